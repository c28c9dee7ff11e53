"""Experiment configuration files.

Line-oriented ``key = value`` pairs under ``[section]`` headers; ``#`` starts a
comment. Every key is typed, range-checked and defaulted; unknown sections or
keys are errors carrying the offending line number. ``serialize`` writes the
fully defaulted form, and ``parse_config(serialize(c)) == c``.
"""
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

KINDS = ("pme_blowup", "pme_global", "pp_blowup", "pp_global", "none")
INITIAL_TYPES = ("sin_product", "bump", "table", "random")


def _floats(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


def _ints(text):
    return tuple(int(v) for v in text.split(",") if v.strip())


def _ranges(text):
    return tuple(_floats(part) for part in text.split(";") if part.strip())


def _float_or_auto(text):
    return None if text.strip().lower() == "auto" else float(text)


def _int_or_auto(text):
    return None if text.strip().lower() == "auto" else int(text)


def _str(text):
    return text.strip()


def _fmt(value):
    if value is None:
        return "auto"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        if value and isinstance(value[0], tuple):
            return " ; ".join(_fmt(v) for v in value)
        return ",".join(_fmt(v) for v in value)
    return str(value)


# section -> key -> (parser, default)
SCHEMA = {
    "group": {
        "group": (_str, "euclidean:3"),
        "strata": (_ints, ()),
        "monomials": (_str, ""),
    },
    "domain": {
        "range": (_ranges, ((0.0, 1.0),)),
        "nodes": (_ints, (33,)),
    },
    "equation": {
        "type": (_str, "pme"),
        "p": (float, 2.0),
        "m": (float, 1.0),
    },
    "nonlinearity": {
        "f": (_str, "power:1,3"),
        "alpha": (_float_or_auto, None),
        "beta": (_float_or_auto, None),
        "gamma": (_float_or_auto, None),
        "u_max": (float, 1e6),
        "samples": (int, 2000),
    },
    "initial": {
        "type": (_str, "sin_product"),
        "amplitude": (float, 1.0),
        "center": (_floats, ()),
        "width": (float, 0.25),
        "path": (_str, ""),
    },
    "numerics": {
        "c_cfl": (float, 0.1),
        "c_react": (float, 0.01),
        "dt": (float, 1e-3),
        "dt_min": (float, 1e-12),
        "blowup_threshold": (float, 1e6),
        "t_max": (float, 1.0),
        "stride": (int, 10),
        "seed": (int, 0),
        "cg_tol": (float, 1e-10),
        "cg_max_iter": (_int_or_auto, None),
        "eps": (float, 1e-12),
        "picard_iters": (int, 1),
        "max_steps": (int, 5_000_000),
    },
    "monitors": {
        "theorem": (_str, "none"),
    },
}


@dataclass
class ExperimentConfig:
    values: dict  # section -> key -> typed value, fully defaulted
    base_dir: Path = field(default=Path("."), compare=False)

    def __getitem__(self, item):
        section, key = item.split(".")
        return self.values[section][key]

    def get(self, section, key):
        return self.values[section][key]

    def with_value(self, dotted, text):
        """Copy with one key replaced by a value given as config text."""
        section, _, key = dotted.partition(".")
        if section not in SCHEMA or key not in SCHEMA[section]:
            raise ConfigError(f"unknown key {dotted!r}", key=dotted)
        return parse_config(serialize(self), base_dir=self.base_dir, overrides={dotted: text})


def _parse_lines(text):
    raw = {}
    lines = {}
    section = None
    for no, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in SCHEMA:
                raise ConfigError(f"unknown section [{section}]", line=no, key=section)
            raw.setdefault(section, {})
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", line=no)
        if section is None:
            raise ConfigError("key outside of any [section]", line=no)
        key, _, value = (s.strip() for s in line.partition("="))
        if key not in SCHEMA[section]:
            raise ConfigError(f"unknown key {key!r} in [{section}]", line=no, key=key)
        if key in raw[section]:
            raise ConfigError(f"duplicate key {key!r} in [{section}]", line=no, key=key)
        raw[section][key] = value
        lines[(section, key)] = no
    return raw, lines


def parse_config(text, base_dir=".", overrides=None):
    """Parse, default and validate config text. ``overrides`` maps 'section.key' to value text."""
    raw, lines = _parse_lines(text)
    for dotted, value in (overrides or {}).items():
        section, _, key = dotted.partition(".")
        if section not in SCHEMA or key not in SCHEMA[section]:
            raise ConfigError(f"unknown key {dotted!r}", key=dotted)
        raw.setdefault(section, {})[key] = str(value)
        lines.pop((section, key), None)
    values = {}
    for section, keys in SCHEMA.items():
        values[section] = {}
        for key, (conv, default) in keys.items():
            if key in raw.get(section, {}):
                try:
                    values[section][key] = conv(raw[section][key])
                except ValueError as exc:
                    raise ConfigError(f"bad value for {section}.{key}: {exc}",
                                      line=lines.get((section, key)), key=key) from None
            else:
                values[section][key] = default
    cfg = ExperimentConfig(values, Path(base_dir))
    _validate(cfg, lines)
    return cfg


def load_config(path, overrides=None):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return parse_config(text, base_dir=path.parent, overrides=overrides)


def serialize(cfg):
    out = []
    for section, keys in SCHEMA.items():
        out.append(f"[{section}]")
        for key in keys:
            out.append(f"{key} = {_fmt(cfg.values[section][key])}".rstrip())
        out.append("")
    return "\n".join(out)


def group_dimension(spec, strata):
    kind, _, arg = spec.partition(":")
    if kind == "euclidean":
        return int(arg)
    if kind == "heisenberg":
        return 2 * int(arg) + 1
    if kind == "custom":
        return sum(strata)
    raise ValueError(f"unknown group {spec!r} (euclidean:<n>, heisenberg:<d> or custom)")


def _validate(cfg, lines):
    v = cfg.values

    def fail(section, key, message):
        raise ConfigError(f"{section}.{key}: {message}", line=lines.get((section, key)), key=key)

    g = v["group"]
    try:
        n = group_dimension(g["group"], g["strata"])
    except ValueError as exc:
        fail("group", "group", str(exc))
    if n < 1:
        fail("group", "group", "dimension must be positive")
    if g["group"] == "custom" and not g["strata"]:
        fail("group", "strata", "custom groups need strata dimensions")

    d = v["domain"]
    if len(d["range"]) not in (1, n) or any(len(r) != 2 or not r[1] > r[0] for r in d["range"]):
        fail("domain", "range", f"need 1 or {n} intervals 'a,b' with b > a")
    if len(d["nodes"]) not in (1, n) or any(k < 3 for k in d["nodes"]):
        fail("domain", "nodes", f"need 1 or {n} node counts, each >= 3")

    e = v["equation"]
    if e["type"] not in ("pme", "pseudo"):
        fail("equation", "type", "must be pme or pseudo")
    if not e["p"] >= 2:
        fail("equation", "p", f"p = {e['p']} is out of range (p >= 2)")
    if not e["m"] >= 1:
        fail("equation", "m", f"m = {e['m']} is out of range (m >= 1)")

    nl = v["nonlinearity"]
    given = [nl[k] is not None for k in ("alpha", "beta", "gamma")]
    if any(given) and not all(given):
        fail("nonlinearity", "alpha", "alpha, beta and gamma must all be given or all be auto")
    if not nl["u_max"] > 1e-4:
        fail("nonlinearity", "u_max", "must exceed 1e-4")
    if nl["samples"] < 100:
        fail("nonlinearity", "samples", "need at least 100 samples")
    if nl["f"].startswith("table:"):
        path = cfg.base_dir / nl["f"][len("table:"):].strip()
        if not path.is_file():
            fail("nonlinearity", "f", f"table file {path} does not exist")

    i = v["initial"]
    if i["type"] not in INITIAL_TYPES:
        fail("initial", "type", f"must be one of {', '.join(INITIAL_TYPES)}")
    if not i["amplitude"] > 0:
        fail("initial", "amplitude", "must be positive")
    if i["type"] == "bump":
        if len(i["center"]) != n:
            fail("initial", "center", f"need {n} coordinates")
        if not i["width"] > 0:
            fail("initial", "width", "must be positive")
    if i["type"] == "table":
        if not i["path"] or not (cfg.base_dir / i["path"]).is_file():
            fail("initial", "path", f"table file {cfg.base_dir / i['path']} does not exist")

    num = v["numerics"]
    if not 0 < num["c_cfl"] < 1:
        fail("numerics", "c_cfl", "must lie in (0, 1)")
    for key in ("c_react", "dt", "dt_min", "blowup_threshold", "t_max", "eps"):
        if not num[key] > 0:
            fail("numerics", key, "must be positive")
    for key in ("stride", "max_steps"):
        if num[key] < 1:
            fail("numerics", key, "must be at least 1")
    if not 0 < num["cg_tol"] <= 1e-4:
        fail("numerics", "cg_tol", "must lie in (0, 1e-4]")
    if num["cg_max_iter"] is not None and num["cg_max_iter"] < 1:
        fail("numerics", "cg_max_iter", "must be at least 1")
    if not 1 <= num["picard_iters"] <= 5:
        fail("numerics", "picard_iters", "must be 1..5")

    th = v["monitors"]["theorem"]
    if th not in KINDS:
        fail("monitors", "theorem", f"must be one of {', '.join(KINDS)}")
    if th != "none" and th.startswith("pme") != (e["type"] == "pme"):
        fail("monitors", "theorem", f"{th} does not apply to equation type {e['type']}")
