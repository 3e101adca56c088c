"""Command-line front end.

Precedence for every option: command-line flag, then ``--manifest`` file
(flat ``key = value`` lines), then built-in defaults.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence

import numpy as np

from .circuit import CircuitConfig, MismatchParams, run
from .detection import GateMode
from .encoding import BlochAngles
from .mismatch import QuadratureSpec, SignVariant, average_fidelity, average_probability
from .pdc import DetectorModel, PdcParams, contamination_analysis
from .selftest import FAULTS, run_selftest
from .teleport import RetryPolicy, report, simulate

EXIT_OK, EXIT_USAGE, EXIT_SELFTEST = 0, 1, 2
CSV_COLUMNS = ("eta1", "eta2", "f_ave", "p_plus_mean", "p_minus_mean")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# helpers

def read_manifest(path: str) -> Dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for n, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected key = value")
            k, v = (x.strip() for x in line.split("=", 1))
            out[k.replace("-", "_")] = v
    return out


def _clean(obj):
    """JSON-safe copy: NaN and infinities become null, numpy scalars become floats."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def _mismatch(args) -> Optional[MismatchParams]:
    if args.mismatch is not None:
        return MismatchParams(*args.mismatch)
    if args.eta1 is not None or args.eta2 is not None:
        return MismatchParams(1.0 if args.eta1 is None else args.eta1, 1.0 if args.eta2 is None else args.eta2)
    return None


def _input(args):
    return BlochAngles(args.alpha_theta, args.alpha_phi).qubit()


def fmt(x: float) -> str:
    return f"{x:.12f}"


# ---------------------------------------------------------------------------
# commands

def cmd_reencode(args, gate_mode: GateMode = GateMode.IDENTITY) -> int:
    cfg = CircuitConfig(gate_mode=gate_mode, input=_input(args), mismatch=_mismatch(args))
    result = run(cfg)
    if args.format == "csv":
        buf = io.StringIO(newline="")
        buf.write("pattern,probability,flip_class,correction,fidelity\n")
        for row in result.to_dict()["patterns"]:
            buf.write(f"{row['pattern']},{fmt(row['probability'])},{row['flip_class']},{row['correction']},{fmt(row['fidelity'])}\n")
        _emit(buf.getvalue(), args.out)
    else:
        _emit(_json(result.to_dict()), args.out)
    return EXIT_OK


def cmd_z90(args) -> int:
    return cmd_reencode(args, GateMode.Z90)


def sweep_rows(points: Sequence[tuple], gate_mode: GateMode, quad: QuadratureSpec, workers: int = 1) -> List[tuple]:
    def row(pt):
        e1, e2 = pt
        mm = MismatchParams(e1, e2)
        return (e1, e2,
                average_fidelity(mm, gate_mode, quad, SignVariant.PLUS),
                average_probability(mm, SignVariant.PLUS, gate_mode, quad),
                average_probability(mm, SignVariant.MINUS, gate_mode, quad))

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        return list(pool.map(row, points))   # map keeps grid order


def grid_points(n: int) -> List[tuple]:
    axis = [float(x) for x in np.linspace(0.0, 1.0, n)]
    return [(a, b) for a in axis for b in axis]


def diagonal_points(n: int) -> List[tuple]:
    return [(float(x), float(x)) for x in np.linspace(0.0, 1.0, n)]


def format_csv(rows: Sequence[tuple]) -> str:
    lines = [",".join(CSV_COLUMNS)] + [",".join(fmt(x) for x in r) for r in rows]
    return "\n".join(lines) + "\n"


def format_json_rows(rows: Sequence[tuple]) -> str:
    return _json([dict(zip(CSV_COLUMNS, r)) for r in rows])


def _diagonal_path(out: str) -> str:
    stem, dot, ext = out.rpartition(".")
    return f"{stem}_diagonal.{ext}" if dot else f"{out}_diagonal"


def cmd_mismatch_sweep(args) -> int:
    """Grid to ``--out`` (or stdout); the eta1 = eta2 cut goes to a ``_diagonal`` sibling file."""
    if args.grid < 2:
        raise UsageError("--grid must be at least 2")
    mode, quad = GateMode(args.gate_mode), QuadratureSpec(args.n_theta, args.n_phi)
    grid = sweep_rows(grid_points(args.grid), mode, quad, args.workers)
    diag = sweep_rows(diagonal_points(args.grid), mode, quad, args.workers)
    render = format_json_rows if args.format == "json" else format_csv
    if args.out:
        _emit(render(grid), args.out)
        _emit(render(diag), _diagonal_path(args.out))
    else:
        _emit(render(diag if args.diagonal else grid), None)
    return EXIT_OK


_POLICIES = {
    "single-shot": RetryPolicy.single_shot,
    "type1-retry": RetryPolicy.type1_retry,
    "unlimited": RetryPolicy.unlimited,
}


def cmd_teleport(args) -> int:
    policy = _POLICIES[args.policy]()
    if args.max_type1 is not None or args.max_type2 is not None or args.recovery:
        policy = RetryPolicy(args.max_type1 or policy.max_type1, args.max_type2 or policy.max_type2,
                             args.recovery or policy.recovery)
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    mm = _mismatch(args)
    stats, _ = simulate(_input(args), policy, args.trials, args.seed, mm)
    _emit(_json(report(stats, policy, args.seed, mm)), args.out)
    return EXIT_OK


def cmd_pdc(args) -> int:
    p = PdcParams(args.chi, args.order, DetectorModel(args.detector))
    rep = contamination_analysis(p, CircuitConfig(input=_input(args)))
    _emit(_json(rep.to_dict()), args.out)
    return EXIT_OK


def cmd_selftest(args) -> int:
    inject = FAULTS.get(args.inject_fault, {}) if args.inject_fault else {}
    results = run_selftest(quick=args.quick, **inject)
    lines = [r.line() for r in results]
    failed = sum(not r.ok for r in results)
    lines.append(f"{len(results) - failed}/{len(results)} checks passed")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_SELFTEST if failed else EXIT_OK


# ---------------------------------------------------------------------------
# parser

def _common(p: argparse.ArgumentParser, outputs=("json", "csv"), default="json") -> None:
    p.add_argument("--manifest", help="flat key = value file supplying defaults")
    p.add_argument("--out", help="write output here instead of stdout")
    fmt_group = p.add_mutually_exclusive_group()
    for f in outputs:
        fmt_group.add_argument(f"--{f}", dest="format", action="store_const", const=f)
    p.set_defaults(format=default)


def _input_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha-theta", type=float, default=math.pi / 2, help="polar angle of the logical input")
    p.add_argument("--alpha-phi", type=float, default=0.0, help="azimuth of the logical input")


def _mismatch_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--eta1", type=float)
    p.add_argument("--eta2", type=float)
    p.add_argument("--mismatch", type=float, nargs=2, metavar=("ETA1", "ETA2"))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="parity-reencoder", description="Parity-state re-encoder simulator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name, fn, help_ in (("reencode", cmd_reencode, "16-pattern table for the plain re-encoder"),
                            ("z90", cmd_z90, "same, with the quarter-wave plate on e")):
        p = sub.add_parser(name, help=help_)
        _input_flags(p)
        _mismatch_flags(p)
        _common(p)
        p.set_defaults(func=fn)

    p = sub.add_parser("mismatch-sweep", help="average fidelity over an (eta1, eta2) grid")
    p.add_argument("--grid", type=int, default=21)
    p.add_argument("--gate-mode", choices=[g.value for g in GateMode], default=GateMode.IDENTITY.value)
    p.add_argument("--n-theta", type=int, default=64)
    p.add_argument("--n-phi", type=int, default=128)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--diagonal", action="store_true", help="print the eta1 = eta2 cut instead of the grid")
    _common(p, default="csv")
    p.set_defaults(func=cmd_mismatch_sweep)

    p = sub.add_parser("teleport", help="Monte-Carlo teleportation statistics")
    _input_flags(p)
    _mismatch_flags(p)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--policy", choices=sorted(_POLICIES), default="single-shot")
    p.add_argument("--max-type1", type=int)
    p.add_argument("--max-type2", type=int)
    p.add_argument("--recovery", action="store_true")
    _common(p, outputs=("json",))
    p.set_defaults(func=cmd_teleport)

    p = sub.add_parser("pdc", help="multi-pair contamination report")
    _input_flags(p)
    p.add_argument("--chi", type=float, default=1e-2, help="pair amplitude per source")
    p.add_argument("--order", type=int, default=3, choices=(3, 4))
    p.add_argument("--detector", choices=[d.value for d in DetectorModel], default=DetectorModel.NUMBER_RESOLVING.value)
    _common(p, outputs=("json",))
    p.set_defaults(func=cmd_pdc)

    p = sub.add_parser("selftest", help="oracle-equivalence checks")
    p.add_argument("--quick", action="store_true", help="smaller mismatch grid")
    p.add_argument("--inject-fault", choices=sorted(FAULTS))
    p.add_argument("--manifest")
    p.add_argument("--out")
    p.set_defaults(func=cmd_selftest)
    return parser


def _apply_manifest(parser: argparse.ArgumentParser, argv: Sequence[str], args) -> argparse.Namespace:
    """Re-parse with manifest values installed as subcommand defaults."""
    values = read_manifest(args.manifest)
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest: a for a in subparser._actions}
    formats = {a.const for a in subparser._actions if a.dest == "format"}
    defaults = {}
    for key, raw in values.items():
        if key not in known or key in ("manifest", "func"):
            raise UsageError(f"unknown manifest key {key!r} for {args.command}")
        action = known[key]
        if key == "format":
            if raw not in formats:
                raise UsageError(f"manifest format: {raw!r} not in {sorted(formats)}")
            defaults[key] = raw
        elif action.nargs == 2:
            defaults[key] = [action.type(x) for x in raw.replace(",", " ").split()]
        elif action.const is not None and action.nargs == 0:
            defaults[key] = raw.lower() in ("1", "true", "yes", "on")
        else:
            defaults[key] = action.type(raw) if action.type else raw
            if action.choices is not None and defaults[key] not in action.choices:
                raise UsageError(f"manifest {key}: {raw!r} not in {sorted(action.choices)}")
    subparser.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "manifest", None):
            args = _apply_manifest(parser, argv, args)
        return args.func(args)
    except (UsageError, ValueError, OSError) as exc:
        print(f"parity-reencoder: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
