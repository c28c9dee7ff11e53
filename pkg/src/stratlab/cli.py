"""Command line interface: ``stratlab <command> <config> [options]``.

Exit codes: 0 success, 1 usage or config error, 2 hypotheses failed or not
applicable, 3 numerical failure, 4 run completed but not certified.
"""
import argparse
import sys
from pathlib import Path

from . import certificates as certs
from . import experiment as ex
from .config import load_config
from .errors import StratlabError


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(ex.EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _overrides(pairs):
    out = {}
    for item in pairs or ():
        key, eq, value = item.partition("=")
        if not eq:
            raise StratlabError(f"--set expects section.key=value, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def _out_dir(args):
    return Path(args.out) if args.out else Path("runs") / Path(args.config).stem


def build_parser():
    parser = _Parser(prog="stratlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "poincare": "print N1, p, R and the Poincare constant C",
        "check": "verify the theorem hypotheses and write certificate.json",
        "run-pme": "run the porous medium problem; write CSV and certificate",
        "run-pp": "run the pseudo-parabolic problem; write CSV and certificate",
        "sweep": "run a parameter sweep described by a sweep file",
        "convergence": "f = 0 oracle runs at several resolutions; print errors and orders",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("config", help="sweep file" if name == "sweep" else "experiment config file")
        p.add_argument("--out", help="output directory (default runs/<config stem>)")
        if name != "sweep":
            p.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                           help="override a config value (repeatable)")
        if name == "convergence":
            p.add_argument("--levels", type=int, default=2, help="number of resolutions (default 2)")
        if name == "sweep":
            p.add_argument("--workers", type=int, help="override the sweep's worker count")
    return parser


def _print_status(cert, out):
    run = cert.get("run", {})
    line = f"status: {cert['status']}"
    if run:
        line += f"  verdict: {run.get('verdict')}  t_num: {run.get('t_num'):.6g}"
    print(line)
    print(f"artifacts: {out}")


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "sweep":
            spec = ex.parse_sweep(Path(args.config).read_text(encoding="utf-8"),
                                  base_dir=Path(args.config).parent)
            if args.workers:
                spec.workers = args.workers
            return ex.run_sweep(spec, _out_dir(args))
        cfg = load_config(args.config, overrides=_overrides(args.set))
        if args.command == "poincare":
            info = ex.poincare(cfg)
            print(f"N1 = {info['N1']}\np = {info['p']:g}\nR = {info['R']:.9g}\nC = {info['C']:.9g}")
            return ex.EXIT_OK
        if args.command == "check":
            cert, code = ex.check(cfg)
            out = _out_dir(args)
            out.mkdir(parents=True, exist_ok=True)
            (out / "certificate.json").write_text(certs.to_json(cert), encoding="utf-8")
            print(f"status: {cert['status']}")
            if "reason" in cert["hypotheses"]:
                print(cert["hypotheses"]["reason"])
            return code
        if args.command in ("run-pme", "run-pp"):
            kind = "pme" if args.command == "run-pme" else "pseudo"
            out = _out_dir(args)
            cert, code = ex.run_experiment(cfg, out, kind=kind)
            _print_status(cert, out)
            return code
        if args.command == "convergence":
            table = ex.convergence(cfg, args.levels)
            print(f"{'h':>12} {'error':>14} {'order':>8}")
            for h, err, order in table:
                print(f"{h:12.6g} {err:14.6e} {order:8.3f}")
            return ex.EXIT_OK
    except (StratlabError, OSError) as exc:
        code = ex.EXIT_NUMERIC if isinstance(exc, ArithmeticError) else ex.EXIT_CONFIG
        print(f"stratlab: error: {exc}", file=sys.stderr)
        return code
    return ex.EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
