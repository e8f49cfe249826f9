"""Command-line front end.

Exit codes: 0 success (or extremal), 2 bad arguments or ranges,
3 non-extremal, 4 the two predicates disagree, 5 output not writable.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from . import exposing_lp
from .bell_spectrum import maximize_quantum_value
from .core_model import (
    OUTCOME_LABELS,
    NonSignallingViolation,
    ProbabilityPoint,
    Realization,
    point_from_realization,
    probabilities_from_point,
)
from .extremality import (
    ZERO_MARGINAL_TOL,
    conjecture1_extremal,
    conjecture2_extremal,
    extremality_report,
    realizations_from_point,
    zero_marginal_realization,
)
from .families import (
    DoubleTiltedParams,
    WolfeYelinParams,
    double_tilted_solve,
    wolfe_yelin_extended_realization,
    wolfe_yelin_solve,
)
from .polytopes import Functional, local_value, nonsignalling_value

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NON_EXTREMAL = 3
EXIT_DISAGREEMENT = 4
EXIT_UNWRITABLE = 5

DT_HEADER = ["alpha", "phi", "beta_l", "beta_q", "admissible", "c1_extremal", "c2_extremal"]
WY_HEADER = [
    "alpha0",
    "alpha1",
    "beta_l",
    "beta_q",
    "admissible",
    "c1_extremal",
    "c2_extremal",
    "extended_extremal",
]
COMPARE_HEADER = [
    "index",
    "theta",
    "a0",
    "a1",
    "b0",
    "b1",
    "nonlocal",
    "c1_extremal",
    "c2_extremal",
    "agreement",
    "lp_status",
    "i_max",
    "certificate",
]

FAMILY_DEFAULTS = {
    "double-tilted": ((0.0, 1.99), (0.0, math.pi / 2)),
    "wolfe-yelin": ((-0.99, 0.99), (0.0, 2.0)),
}


class UsageError(Exception):
    pass


class UnwritableOutput(Exception):
    pass


# --------------------------------------------------------------------------
# Helpers
# --------------------------------------------------------------------------


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, default=_json_default))


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    raise TypeError(f"not serialisable: {type(o)}")


def _angle(args, name: str) -> float:
    v = getattr(args, name)
    return math.radians(v) if args.degrees else v


def _realization(args) -> Realization:
    vals = [_angle(args, k) for k in ("theta", "a0", "a1", "b0", "b1")]
    try:
        return Realization(*vals)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _point(values: Sequence[float]) -> ProbabilityPoint:
    try:
        return ProbabilityPoint.from_vector(values)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _probability_dict(p: ProbabilityPoint) -> dict:
    table = probabilities_from_point(p)
    return {f"p({a}{b}|{x}{y})": float(table[a, b, x, y]) for a, b, x, y in OUTCOME_LABELS}


def _threads(requested: Optional[int]) -> int:
    cap = os.environ.get("CHSH_THREADS")
    n = requested if requested else (os.cpu_count() or 1)
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError as exc:
            raise UsageError(f"CHSH_THREADS must be an integer, got {cap!r}") from exc
    return max(1, n)


def _ordered_map(fn: Callable, items: list, threads: int) -> list:
    if threads <= 1 or len(items) < 2:
        return [fn(it) for it in items]
    chunk = max(1, len(items) // (4 * threads))
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items, chunksize=chunk))


def _open_output(path: str):
    try:
        parent = os.path.dirname(os.path.abspath(path))
        if not os.path.isdir(parent):
            raise OSError(f"directory {parent} does not exist")
        return open(path, "w", newline="")
    except OSError as exc:
        raise UnwritableOutput(f"cannot write {path}: {exc}") from exc


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_csv(path: str, header: list[str], rows: Iterable[Sequence]) -> None:
    with _open_output(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------


def cmd_point(args) -> int:
    r = _realization(args)
    p = point_from_realization(r)
    _emit({"realization": r.to_dict(), **p.to_dict(), "vector": p.vector, "probabilities": _probability_dict(p)})
    return EXIT_OK


def cmd_probabilities(args) -> int:
    try:
        table = probabilities_from_point(np.asarray(args.point, dtype=float))
    except (NonSignallingViolation, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    _emit(
        {
            "probabilities": {
                f"p({a}{b}|{x}{y})": float(table[a, b, x, y]) for a, b, x, y in OUTCOME_LABELS
            },
            "normalization_residual": table.normalization_residual(),
            "signalling_residual": table.signalling_residual(),
        }
    )
    return EXIT_OK


def _functional(values: Sequence[float]) -> Functional:
    try:
        return Functional(tuple(values))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_value(args) -> int:
    f = _functional(args.functional)
    vals = local_value(f)
    if args.quantum:
        vals.beta_Q = maximize_quantum_value(f).beta_max
    _emit({"functional": list(f.coeffs), **vals.to_dict()})
    return EXIT_OK


def cmd_maximize(args) -> int:
    f = _functional(args.functional)
    try:
        q = maximize_quantum_value(f, grid_n=args.grid_n, refine_tol=args.refine_tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _emit({"functional": list(f.coeffs), "beta_L": local_value(f).beta_L, "beta_NS": nonsignalling_value(f), **q.to_dict()})
    return EXIT_OK


def cmd_family(args) -> int:
    try:
        if args.name == "double-tilted":
            phi = math.radians(args.phi) if args.degrees else args.phi
            sol = double_tilted_solve(DoubleTiltedParams(args.alpha, phi))
        else:
            sol = wolfe_yelin_solve(WolfeYelinParams(args.alpha0, args.alpha1))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _emit(sol.to_dict())
    return EXIT_OK


def cmd_realize(args) -> int:
    p = _point(args.point)
    if max(abs(t) for t in p.marginals) <= ZERO_MARGINAL_TOL:
        r = zero_marginal_realization(p)
        found, branch = ([] if r is None else [r]), "zero-marginal"
    else:
        found, branch = realizations_from_point(p), "general"
    _emit({"branch": branch, "realizations": [r.to_dict() for r in found], "count": len(found)})
    return EXIT_OK


def _dump_reproducer(report: dict, directory: str) -> str:
    blob = json.dumps(report, sort_keys=True, default=_json_default)
    name = f"disagreement-{hashlib.sha1(blob.encode()).hexdigest()[:12]}.json"
    path = os.path.join(directory, name)
    with _open_output(path) as fh:
        fh.write(blob)
    return path


def cmd_extremal(args) -> int:
    r = _realization(args)
    report = extremality_report(r, method=args.method)
    out = report.to_dict()
    if report.agreement is False:
        out["reproducer"] = _dump_reproducer(out, args.dump_dir)
        _emit(out)
        return EXIT_DISAGREEMENT
    _emit(out)
    verdict = (report.conjecture1 or report.conjecture2).extremal
    return EXIT_OK if verdict else EXIT_NON_EXTREMAL


def cmd_expose(args) -> int:
    r = _realization(args)
    res = exposing_lp.expose(r)
    _emit({"realization": r.to_dict(), **res.to_dict()})
    return EXIT_OK


def cmd_certify(args) -> int:
    r = _realization(args)
    cert = exposing_lp.certify_exposed(r)
    _emit({"realization": r.to_dict(), **cert.to_dict()})
    return EXIT_OK


# ---- scans ----------------------------------------------------------------


@dataclass
class ScanConfig:
    family: str
    first_range: tuple[float, float]
    second_range: tuple[float, float]
    steps: int
    output: str
    threads: int = 1
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        if self.family not in FAMILY_DEFAULTS:
            raise UsageError(f"unknown family {self.family!r}")
        if self.steps < 2:
            raise UsageError("steps must be at least 2")
        lo1, hi1 = self.first_range
        lo2, hi2 = self.second_range
        if lo1 > hi1 or lo2 > hi2:
            raise UsageError("range minimum exceeds maximum")
        if self.family == "double-tilted":
            if lo1 < 0 or hi1 >= 2:
                raise UsageError("alpha range must lie in [0, 2)")
            if lo2 < 0 or hi2 > math.pi / 2 + 1e-12:
                raise UsageError("phi range must lie in [0, pi/2]")
        else:
            if lo1 <= -1 or hi1 >= 1:
                raise UsageError("alpha0 range must lie in (-1, 1)")
            if lo2 < 0 or hi2 > 2:
                raise UsageError("alpha1 range must lie in [0, 2]")

    def grid(self) -> list[tuple[float, float]]:
        xs = np.linspace(*self.first_range, self.steps)
        ys = np.linspace(*self.second_range, self.steps)
        return [(float(x), float(y)) for x in xs for y in ys]


def double_tilted_row(params: tuple[float, float]) -> list:
    alpha, phi = params
    sol = double_tilted_solve(DoubleTiltedParams(alpha, phi))
    c1 = c2 = False
    if sol.admissible and sol.realization is not None:
        c1 = conjecture1_extremal(sol.realization).extremal
        c2 = conjecture2_extremal(sol.realization).extremal
    return [alpha, phi, sol.beta_L, sol.beta_Q, sol.admissible, c1, c2]


def wolfe_yelin_row(params: tuple[float, float]) -> list:
    a0, a1 = params
    p = WolfeYelinParams(a0, a1)
    sol = wolfe_yelin_solve(p)
    c1 = c2 = False
    if sol.admissible and sol.realization is not None:
        c1 = conjecture1_extremal(sol.realization).extremal
        c2 = conjecture2_extremal(sol.realization).extremal
    ext = wolfe_yelin_extended_realization(p)
    extended = ext is not None and conjecture1_extremal(ext).extremal and conjecture2_extremal(ext).extremal
    return [a0, a1, sol.beta_L, sol.beta_Q, sol.admissible, c1, c2, extended]


def run_scan(cfg: ScanConfig) -> list[list]:
    fn = double_tilted_row if cfg.family == "double-tilted" else wolfe_yelin_row
    return _ordered_map(fn, cfg.grid(), cfg.threads)


def cmd_scan(args) -> int:
    defaults = FAMILY_DEFAULTS[args.family]
    min2, max2 = args.min2, args.max2
    if args.degrees and args.family == "double-tilted":
        min2 = None if min2 is None else math.radians(min2)
        max2 = None if max2 is None else math.radians(max2)
    first = (
        args.min1 if args.min1 is not None else defaults[0][0],
        args.max1 if args.max1 is not None else defaults[0][1],
    )
    second = (
        min2 if min2 is not None else defaults[1][0],
        max2 if max2 is not None else defaults[1][1],
    )
    cfg = ScanConfig(args.family, first, second, args.steps, args.output, _threads(args.threads))
    # fail before computing if the sink is unusable
    _open_output(cfg.output).close()
    rows = run_scan(cfg)
    header = DT_HEADER if cfg.family == "double-tilted" else WY_HEADER
    _write_csv(cfg.output, header, rows)
    admissible = sum(1 for r in rows if r[4])
    print(json.dumps({"family": cfg.family, "rows": len(rows), "admissible": admissible, "output": cfg.output}))
    return EXIT_OK


# ---- randomized comparison ------------------------------------------------


@dataclass
class CompareSample:
    index: int
    realization: Realization
    certify: bool = False


@dataclass
class CompareSummary:
    samples: int = 0
    nonlocal_: int = 0
    c1_extremal: int = 0
    c2_extremal: int = 0
    agreements: int = 0
    disagreements: int = 0
    lp_status: dict = field(default_factory=dict)
    certificates: dict = field(default_factory=dict)
    exposed_both_extremal: int = 0

    def to_dict(self) -> dict:
        exposed = self.certificates.get(exposing_lp.PROVEN_EXPOSED, 0)
        return {
            "samples": self.samples,
            "nonlocal": self.nonlocal_,
            "c1_extremal": self.c1_extremal,
            "c2_extremal": self.c2_extremal,
            "agreements": self.agreements,
            "disagreements": self.disagreements,
            "agreement_fraction": self.agreements / self.samples if self.samples else None,
            "lp_status": dict(sorted(self.lp_status.items())),
            "certificates": dict(sorted(self.certificates.items())),
            "inconclusive_fraction": (
                self.certificates.get(exposing_lp.INCONCLUSIVE, 0) / self.samples
                if self.samples and self.certificates
                else None
            ),
            "proven_exposed": exposed,
            "proven_exposed_both_extremal": self.exposed_both_extremal,
        }


def random_realizations(n: int, seed: int) -> list[Realization]:
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.0, math.pi / 2, n)
    angles = rng.uniform(0.0, 2 * math.pi, (n, 4))
    return [Realization(float(t), *map(float, a)) for t, a in zip(theta, angles)]


def compare_row(sample: CompareSample) -> list:
    r = sample.realization
    c1 = conjecture1_extremal(r)
    c2 = conjecture2_extremal(r)
    lp = exposing_lp.expose(r)
    cert = exposing_lp.certify_exposed(r).verdict if sample.certify else None
    return [
        sample.index,
        r.theta,
        r.a0,
        r.a1,
        r.b0,
        r.b1,
        c1.nonlocal_,
        c1.extremal,
        c2.extremal,
        c1.extremal == c2.extremal,
        lp.status,
        lp.i_max,
        cert,
    ]


def run_compare(samples: int, seed: int, certify: bool = False, threads: int = 1) -> tuple[list[list], CompareSummary]:
    items = [CompareSample(i, r, certify) for i, r in enumerate(random_realizations(samples, seed))]
    rows = _ordered_map(compare_row, items, threads)
    s = CompareSummary(samples=len(rows))
    for row in rows:
        s.nonlocal_ += bool(row[6])
        s.c1_extremal += bool(row[7])
        s.c2_extremal += bool(row[8])
        s.agreements += bool(row[9])
        s.disagreements += not row[9]
        s.lp_status[row[10]] = s.lp_status.get(row[10], 0) + 1
        if row[12] is not None:
            s.certificates[row[12]] = s.certificates.get(row[12], 0) + 1
            if row[12] == exposing_lp.PROVEN_EXPOSED and row[7] and row[8]:
                s.exposed_both_extremal += 1
    return rows, s


def cmd_compare(args) -> int:
    if args.samples < 0:
        raise UsageError("--samples must be non-negative")
    _open_output(args.output).close()
    rows, summary = run_compare(args.samples, args.seed, args.certify, _threads(args.threads))
    _write_csv(args.output, COMPARE_HEADER, rows)
    out = summary.to_dict()
    code = EXIT_OK
    if summary.disagreements:
        bad = [row for row in rows if not row[9]]
        out["reproducers"] = [
            _dump_reproducer(
                extremality_report(Realization(*row[1:6])).to_dict(), os.path.dirname(os.path.abspath(args.output))
            )
            for row in bad
        ]
        code = EXIT_DISAGREEMENT
    print(json.dumps(out, indent=2))
    return code


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------


def _add_realization_flags(p: argparse.ArgumentParser) -> None:
    for name in ("theta", "a0", "a1", "b0", "b1"):
        p.add_argument(f"--{name}", type=float, required=True)
    p.add_argument("--degrees", action="store_true", help="angles are given in degrees")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chsh-extremal", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("point", help="probability point of a canonical realisation")
    _add_realization_flags(p)
    p.set_defaults(func=cmd_point)

    p = sub.add_parser("probabilities", help="16 probabilities of an 8-vector")
    p.add_argument("--point", type=float, nargs=8, required=True, metavar="V")
    p.set_defaults(func=cmd_probabilities)

    p = sub.add_parser("value", help="local and non-signalling values of a functional")
    p.add_argument("--functional", type=float, nargs=8, required=True, metavar="F")
    p.add_argument("--quantum", action="store_true", help="also compute the quantum value")
    p.set_defaults(func=cmd_value)

    p = sub.add_parser("maximize", help="quantum value of a functional")
    p.add_argument("--functional", type=float, nargs=8, required=True, metavar="F")
    p.add_argument("--grid-n", type=int, default=64)
    p.add_argument("--refine-tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_maximize)

    p = sub.add_parser("family", help="closed-form solution of a functional family")
    p.add_argument("name", choices=sorted(FAMILY_DEFAULTS))
    p.add_argument("--alpha", type=float)
    p.add_argument("--phi", type=float)
    p.add_argument("--alpha0", type=float)
    p.add_argument("--alpha1", type=float)
    p.add_argument("--degrees", action="store_true")
    p.set_defaults(func=cmd_family)

    p = sub.add_parser("realize", help="canonical realisations of an 8-vector")
    p.add_argument("--point", type=float, nargs=8, required=True, metavar="V")
    p.set_defaults(func=cmd_realize)

    p = sub.add_parser("extremal", help="extremality verdicts for a realisation")
    _add_realization_flags(p)
    p.add_argument("--method", choices=("ishizaka", "conjecture", "both"), default="both")
    p.add_argument("--dump-dir", default=".", help="where to write a reproducer on disagreement")
    p.set_defaults(func=cmd_extremal)

    p = sub.add_parser("expose", help="LP search for an exposing functional")
    _add_realization_flags(p)
    p.set_defaults(func=cmd_expose)

    p = sub.add_parser("certify", help="LP + quantum maximisation round trip")
    _add_realization_flags(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("scan", help="CSV scan of a family's parameter box")
    p.add_argument("family", choices=sorted(FAMILY_DEFAULTS))
    p.add_argument("--steps", type=int, default=100, help="grid points per axis")
    p.add_argument("--min1", type=float, help="alpha / alpha0 minimum")
    p.add_argument("--max1", type=float, help="alpha / alpha0 maximum")
    p.add_argument("--min2", type=float, help="phi / alpha1 minimum")
    p.add_argument("--max2", type=float, help="phi / alpha1 maximum")
    p.add_argument("--output", "-o", required=True)
    p.add_argument("--threads", type=int)
    p.add_argument("--degrees", action="store_true", help="phi bounds in degrees")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("compare", help="random realisations judged by both predicates")
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", "-o", required=True)
    p.add_argument("--certify", action="store_true", help="also run the exposedness round trip (slow)")
    p.add_argument("--threads", type=int)
    p.set_defaults(func=cmd_compare)
    return parser


def _check_family_args(args) -> None:
    if args.command != "family":
        return
    if args.name == "double-tilted" and (args.alpha is None or args.phi is None):
        raise UsageError("double-tilted needs --alpha and --phi")
    if args.name == "wolfe-yelin" and (args.alpha0 is None or args.alpha1 is None):
        raise UsageError("wolfe-yelin needs --alpha0 and --alpha1")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        _check_family_args(args)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except UnwritableOutput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNWRITABLE


if __name__ == "__main__":
    sys.exit(main())
