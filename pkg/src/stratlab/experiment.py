"""Build problems from configs, run them, and write the per-run artifacts."""
import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import certificates as certs
from . import functionals as fn
from . import nonlinearity as nlmod
from . import pme, pseudo
from .config import ExperimentConfig, parse_config, serialize
from .errors import ConfigError, InvalidField
from .group import StratifiedGroup, make_euclidean, make_heisenberg
from .grid import Grid

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_HYPOTHESES = 2
EXIT_NUMERIC = 3
EXIT_NOT_CERTIFIED = 4

PME_COLUMNS = ("t", "sup_u", "integral_u_m1", "J", "r_J", "E")
PP_COLUMNS = ("t", "sup_u", "Ip", "F", "r_F", "Ep", "cg_iters", "cg_residual")


def parse_monomials(text, n):
    """``k:j:coef:e_1,...,e_n`` entries separated by ``;`` (indices 0-based)."""
    coeffs = {}
    for entry in text.split(";"):
        if not entry.strip():
            continue
        try:
            k, j, c, exps = entry.split(":")
            exps = tuple(int(e) for e in exps.split(","))
        except ValueError:
            raise ConfigError(f"bad monomial {entry.strip()!r} (want k:j:coef:exponents)",
                              key="monomials") from None
        if len(exps) != n:
            raise ConfigError(f"monomial {entry.strip()!r} needs {n} exponents", key="monomials")
        coeffs.setdefault((int(k), int(j)), []).append((float(c), exps))
    return coeffs


def build_group(cfg):
    spec = cfg["group.group"]
    kind, _, arg = spec.partition(":")
    if kind == "euclidean":
        return make_euclidean(int(arg))
    if kind == "heisenberg":
        return make_heisenberg(int(arg))
    strata = cfg["group.strata"]
    return StratifiedGroup(strata, parse_monomials(cfg["group.monomials"], sum(strata)), "custom")


def build_grid(cfg, nodes=None):
    group = build_group(cfg)
    n = group.n
    ranges = cfg["domain.range"]
    ranges = ranges * n if len(ranges) == 1 else ranges
    nodes = nodes if nodes is not None else cfg["domain.nodes"]
    nodes = tuple(nodes) * n if len(nodes) == 1 else tuple(nodes)
    return Grid(group, ranges, nodes)


def sin_product(grid):
    """prod_i sin(pi (x_i - a_i) / (b_i - a_i)); the first Dirichlet mode of the box."""
    u = np.ones(grid.shape)
    for c, (a, b) in zip(grid.coords, grid.ranges):
        u = u * np.sin(np.pi * (c - a) / (b - a))
    return grid.zero_boundary(np.maximum(u, 0.0))


def _load_table(path, grid):
    path = Path(path)
    data = np.load(path) if path.suffix == ".npy" else np.loadtxt(path, delimiter=",", ndmin=1)
    data = np.asarray(data, dtype=float)
    if data.size != grid.size:
        raise InvalidField(f"{path}: {data.size} values for a grid of {grid.size} nodes")
    return data.reshape(grid.shape)


def initial_field(cfg, grid):
    kind = cfg["initial.type"]
    A = cfg["initial.amplitude"]
    if kind == "sin_product":
        u = A * sin_product(grid)
    elif kind == "bump":
        r2 = sum((c - x0) ** 2 for c, x0 in zip(grid.coords, cfg["initial.center"]))
        u = A * np.exp(-r2 / (2 * cfg["initial.width"] ** 2))
    elif kind == "table":
        u = A * _load_table(cfg.base_dir / cfg["initial.path"], grid)
    else:
        rng = np.random.default_rng(cfg["numerics.seed"])
        u = A * rng.random(grid.shape)
    return grid.zero_boundary(u)


def build_nonlinearity(cfg):
    return nlmod.parse(cfg["nonlinearity.f"], cfg.base_dir)


def theorem_of(cfg):
    th = cfg["monitors.theorem"]
    return None if th == "none" else th.upper()


def problem_of(cfg, grid, nl, u0):
    return certs.Problem(grid, cfg["equation.p"], nl, u0, cfg["equation.m"],
                         cfg["nonlinearity.alpha"], cfg["nonlinearity.beta"],
                         cfg["nonlinearity.gamma"], cfg["nonlinearity.u_max"],
                         cfg["nonlinearity.samples"])


def pme_config(cfg):
    n = cfg.values["numerics"]
    return pme.PMEConfig(m=cfg["equation.m"], p=cfg["equation.p"], c_cfl=n["c_cfl"],
                         c_react=n["c_react"], u_blowup=n["blowup_threshold"], dt_min=n["dt_min"],
                         t_max=n["t_max"], stride=n["stride"], eps=n["eps"],
                         max_steps=n["max_steps"])


def pp_config(cfg):
    n = cfg.values["numerics"]
    return pseudo.PPConfig(p=cfg["equation.p"], dt=n["dt"], c_react=n["c_react"],
                           cg_tol=n["cg_tol"], cg_max_iter=n["cg_max_iter"],
                           picard_iters=n["picard_iters"], u_blowup=n["blowup_threshold"],
                           dt_min=n["dt_min"], t_max=n["t_max"], stride=n["stride"],
                           eps=n["eps"], max_steps=n["max_steps"])


def poincare(cfg):
    grid = build_grid(cfg)
    n1, p = grid.group.n1, cfg["equation.p"]
    R = grid.sup_x_prime()
    return {"N1": n1, "p": p, "R": R, "C": fn.poincare_constant(n1, p, R)}


def check(cfg):
    """Hypothesis-only certificate and exit code."""
    theorem = theorem_of(cfg)
    if theorem is None:
        raise ConfigError("check needs [monitors] theorem", key="theorem")
    grid = build_grid(cfg)
    nl = build_nonlinearity(cfg)
    hyp = certs.verify_hypotheses(theorem, problem_of(cfg, grid, nl, initial_field(cfg, grid)))
    cert = certs.hypotheses_certificate(hyp)
    return cert, EXIT_OK if hyp["status"] == certs.CERTIFIED else EXIT_HYPOTHESES


def format_series(record, columns, stride):
    """CSV text: header plus every ``stride``-th accepted step and the final one."""
    n = len(record.series["t"])
    rows = list(range(0, n, stride))
    if rows[-1] != n - 1:
        rows.append(n - 1)
    buf = io.StringIO()
    buf.write(",".join(columns) + "\n")
    for i in rows:
        cells = []
        for c in columns:
            x = record.series[c][i]
            cells.append(str(int(x)) if c == "cg_iters" else f"{float(x):.17g}")
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def run_experiment(cfg, out_dir, kind=None):
    """Run the configured equation; write config.cfg, series.csv, certificate.json.

    Returns (certificate, exit code).
    """
    kind = kind or cfg["equation.type"]
    if kind != cfg["equation.type"]:
        raise ConfigError(f"config describes a {cfg['equation.type']} problem, not {kind}",
                          key="type")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write(out / "config.cfg", serialize(cfg))
    grid = build_grid(cfg)
    nl = build_nonlinearity(cfg)
    u0 = initial_field(cfg, grid)
    theorem = theorem_of(cfg)
    hyp = None
    gamma, M = cfg["nonlinearity.gamma"] or 0.0, 0.0
    if theorem is not None:
        hyp = certs.verify_hypotheses(theorem, problem_of(cfg, grid, nl, u0))
        if hyp.get("gamma") is not None:
            gamma = hyp["gamma"]
        M = hyp.get("M") or 0.0
    if kind == "pme":
        rcfg = pme_config(cfg)
        record = pme.run(grid, u0, rcfg, nl, gamma=gamma, M=M)
        columns = PME_COLUMNS
    else:
        rcfg = pp_config(cfg)
        record = pseudo.run(grid, u0, rcfg, nl, gamma=gamma, M=M)
        columns = PP_COLUMNS
    _write(out / "series.csv", format_series(record, columns, rcfg.stride))

    if hyp is not None:
        cert = certs.post_run_verdict(theorem, hyp, record, h=float(grid.h.max()))
    else:
        cert = {"theorem": None, "status": "UNMONITORED",
                "run": {"verdict": record.verdict, "t_num": record.t_num,
                        "reason": record.reason, "steps": record.steps}}
    _write(out / "certificate.json", certs.to_json(cert))
    return cert, exit_code(cert, record)


def exit_code(cert, record=None):
    status = cert["status"]
    if status in (certs.HYPOTHESES_FAILED, certs.NOT_APPLICABLE):
        return EXIT_HYPOTHESES
    if record is not None and record.verdict == pme.NUMERICAL_FAILURE:
        return EXIT_NUMERIC
    if status in (certs.RUN_CONTRADICTS, certs.INCONCLUSIVE):
        return EXIT_NOT_CERTIFIED
    return EXIT_OK


# -- sweeps ------------------------------------------------------------------

@dataclass
class SweepSpec:
    base: ExperimentConfig
    keys: tuple
    values: tuple  # one tuple of value strings per key
    workers: int = 1

    def jobs(self):
        if len(self.keys) == 1:
            combos = [(v,) for v in self.values[0]]
        else:
            combos = [(a, b) for a in self.values[0] for b in self.values[1]]
        for combo in combos:
            overrides = dict(zip(self.keys, combo))
            name = ",".join(f"{k}={v}" for k, v in overrides.items())
            yield name, overrides


def parse_sweep(text, base_dir="."):
    """``[sweep]`` section with base, keys (1 or 2, ';'-separated), values (';' per key), workers."""
    entries = {}
    section = None
    for no, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            section = line.strip("[]").strip()
            if section != "sweep":
                raise ConfigError(f"unknown section [{section}] in sweep file", line=no)
            continue
        key, eq, value = (s.strip() for s in line.partition("="))
        if not eq or section != "sweep":
            raise ConfigError(f"expected 'key = value' under [sweep], got {line!r}", line=no)
        if key not in ("base", "keys", "values", "workers"):
            raise ConfigError(f"unknown key {key!r} in [sweep]", line=no, key=key)
        entries[key] = (value, no)
    for key in ("base", "keys", "values"):
        if key not in entries:
            raise ConfigError(f"sweep file needs {key!r}", key=key)
    base_path = Path(base_dir) / entries["base"][0]
    try:
        base = parse_config(base_path.read_text(encoding="utf-8"), base_dir=base_path.parent)
    except OSError as exc:
        raise ConfigError(f"cannot read base config {base_path}: {exc}") from None
    keys = tuple(k.strip() for k in entries["keys"][0].split(";") if k.strip())
    values = tuple(tuple(v.strip() for v in group.split(",") if v.strip())
                   for group in entries["values"][0].split(";"))
    if not 1 <= len(keys) <= 2 or len(values) != len(keys) or not all(values):
        raise ConfigError("need one or two keys, each with a non-empty value list",
                          line=entries["keys"][1], key="keys")
    for k in keys:
        section, _, name = k.partition(".")
        if section not in base.values or name not in base.values[section]:
            raise ConfigError(f"swept key {k!r} is not a config key", line=entries["keys"][1], key=k)
    workers = int(entries.get("workers", ("1", 0))[0])
    return SweepSpec(base, keys, values, max(1, workers))


def _sweep_job(args):
    text, base_dir, overrides, out = args
    cfg = parse_config(text, base_dir=base_dir, overrides=overrides)
    try:
        cert, code = run_experiment(cfg, out)
    except Exception as exc:  # a failing job must not take the sweep down
        return {"status": "ERROR", "reason": str(exc)}, EXIT_NUMERIC
    return cert, code


def run_sweep(spec, out_dir, report=print):
    """Run every job (concurrently when workers > 1); write summary.csv; return worst exit code."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    text = serialize(spec.base)
    jobs = list(spec.jobs())
    args = [(text, spec.base.base_dir, ov, out / name) for name, ov in jobs]
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            results = list(pool.map(_sweep_job, args))
    else:
        results = [_sweep_job(a) for a in args]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["run", "status", "verdict", "t_num", "exit_code"])
    for (name, _), (cert, code) in zip(jobs, results):
        run = cert.get("run", {})
        writer.writerow([name, cert["status"], run.get("verdict", ""), run.get("t_num", ""), code])
        report(f"{name}: {cert['status']} (exit {code})")
    _write(out / "summary.csv", buf.getvalue())
    return max(code for _, code in results)


# -- convergence -----------------------------------------------------------

def _exact_decay(cfg, grid):
    """Decay rate of the first Dirichlet mode for Euclidean groups, else None."""
    if not cfg["group.group"].startswith("euclidean"):
        return None
    lam = sum((math.pi / (b - a)) ** 2 for a, b in grid.ranges)
    return lam if cfg["equation.type"] == "pme" else lam / (1 + lam)


def _coarse_view(u, factor):
    return u[tuple(slice(None, None, factor) for _ in u.shape)]


def convergence(cfg, levels=2):
    """f = 0 oracle runs at ``levels`` resolutions ending at the configured node count.

    Returns rows (h, error, order). Euclidean groups compare with the exact
    decaying mode; other groups compare consecutive levels on the shared nodes.
    """
    finest = cfg["domain.nodes"]
    if levels < 2:
        raise ConfigError("convergence needs at least 2 levels", key="levels")
    resolutions = []
    for k in range(levels - 1, -1, -1):
        f = 2 ** k
        if any((n - 1) % f for n in finest) or any((n - 1) // f < 2 for n in finest):
            raise ConfigError(f"node counts {finest} cannot be coarsened {levels - 1} times",
                              key="nodes")
        resolutions.append(tuple((n - 1) // f + 1 for n in finest))
    t_max = cfg["numerics.t_max"]
    finals, grids = [], []
    for nodes in resolutions:
        grid = build_grid(cfg, nodes=nodes)
        u0 = sin_product(grid)
        if cfg["equation.type"] == "pme":
            rec = pme.run(grid, u0, pme_config(cfg), nlmod.Zero())
        else:
            rec = pseudo.run(grid, u0, pp_config(cfg), nlmod.Zero())
        if rec.verdict != pme.REACHED_TMAX:
            raise InvalidField(f"oracle run at nodes {nodes} ended with {rec.verdict}: {rec.reason}")
        finals.append(rec.final)
        grids.append(grid)
    rate = _exact_decay(cfg, grids[0])
    rows = []
    if rate is not None:
        for grid, u in zip(grids, finals):
            exact = math.exp(-rate * t_max) * sin_product(grid)
            rows.append([float(grid.h.max()), float(np.abs(u - exact).max() / np.abs(exact).max())])
    else:
        for i in range(len(grids) - 1):
            coarse, fine = finals[i], _coarse_view(finals[i + 1], 2)
            rows.append([float(grids[i].h.max()), float(np.abs(coarse - fine).max() / np.abs(fine).max())])
    table = []
    for i, (h, err) in enumerate(rows):
        order = math.log2(rows[i - 1][1] / err) if i and err > 0 else float("nan")
        table.append((h, err, order))
    return table
