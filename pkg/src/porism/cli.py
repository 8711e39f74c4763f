"""Command-line harness: find caustics, sweep families, emit reports.

Subcommands:
    caustic   print the confocal caustic data for an (n, k) family
    verify    sweep a family and check every identity; exit 0 iff all pass
    generic   random smooth table, variational orbit, table-free identities
    sweep     per-phase CSV stream of the family quantities

Exit codes: 0 all checks pass, 1 a numeric check failed, 2 construction or
configuration failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .errors import NonConvexTable, PorismError
from .geometry import Ellipse, TrigPoly
from .invariants import (
    CSV_QUANTITIES,
    InvariantReport,
    check_quad_relations,
    check_action_sums,
    check_vertex_identity,
    family_report,
    report_checks,
    vanishing_pedal_sums,
)
from .poncelet import birkhoff_orbit, find_caustic, rotation_number

CSV_HEADER = (
    "sample,phase,psi1,L,J,sum_S_minus_L,sum_hprime_sin,prod_cos_beta,"
    "cm_x,cm_y,sum_pq2,prod_F1,prod_F2,prod_O,sum_sin2psi,"
    "max_vertex_residual,closure_residual"
)

TABLE_ATTEMPTS = 64


def fmt(x: float) -> str:
    """17 significant digits: lossless for 64-bit floats."""
    return f"{x:.17g}"


@dataclass(frozen=True)
class RunConfig:
    """Validated CLI parameters."""

    a1: float = 2.0
    a2: float = 1.0
    n: int = 4
    k: int = 1
    samples: int = 64
    tol: float = 1e-9
    px: float = 0.0
    py: float = 0.0
    seed: int = 0
    harmonics: int = 0
    amplitude: float = 0.05
    fmt: str = "json"
    out: str | None = None
    parallel: bool = False

    def validate(self):
        if not self.a1 >= self.a2 > 0.0:
            raise ValueError("requires a1 >= a2 > 0")
        if self.n < 2 or self.k < 1 or math.gcd(self.n, self.k) != 1:
            raise ValueError("requires coprime n, k with n >= 2, k >= 1")
        if not self.k / self.n < 0.5:
            raise ValueError("gcd/rotation range: k/n must be below 1/2")
        if self.samples < 2:
            raise ValueError("samples must be at least 2")
        if self.tol <= 0.0:
            raise ValueError("tol must be positive")
        if self.fmt not in ("csv", "json"):
            raise ValueError("format must be csv or json")


@dataclass
class ReportFile:
    """Serializable verification report; JSON round-trips losslessly."""

    config: dict
    meta: dict
    family: dict | None
    table: dict | None
    quantities: list[dict]
    checks: list[dict]
    passed: bool

    def to_json(self) -> str:
        payload = {
            "config": self.config,
            "meta": self.meta,
            "family": self.family,
            "table": self.table,
            "quantities": self.quantities,
            "checks": self.checks,
            "pass": self.passed,
        }
        return json.dumps(payload, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ReportFile":
        d = json.loads(text)
        return cls(
            d["config"], d["meta"], d["family"], d["table"],
            d["quantities"], d["checks"], d["pass"],
        )


def _meta() -> dict:
    return {
        "library": "porism",
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }


def _quantities_payload(report: InvariantReport) -> list[dict]:
    rows = []
    for name in report.names():
        rec = report[name]
        rows.append({
            "name": name,
            "values": [float(v) for v in rec.values],
            "mean": rec.mean,
            "std": rec.std,
            "max_dev": rec.max_dev,
            "expected": rec.expected,
            "residual": rec.residual,
        })
    return rows


def _csv_lines(report: InvariantReport):
    yield CSV_HEADER
    for s, phase in enumerate(report.phases):
        vals = [fmt(float(phase))]
        vals += [fmt(float(report[name].values[s])) for name in CSV_QUANTITIES]
        yield f"{s}," + ",".join(vals)


def _emit(text: str, out: str | None):
    if out is None:
        print(text)
    else:
        with open(out, "w") as fh:
            fh.write(text + "\n")


def random_table(seed: int, harmonics: int, amplitude: float = 0.05) -> TrigPoly:
    """Seeded random convex table with harmonics of order 2..harmonics.

    Coefficients are rejection-sampled against the convexity validator;
    harmonics below 2 give the unit circle.
    """
    if harmonics < 2:
        return TrigPoly(1.0)
    rng = np.random.default_rng(seed)
    for _ in range(TABLE_ATTEMPTS):
        terms = []
        for k in range(2, harmonics + 1):
            ak, bk = rng.normal(0.0, amplitude / (k * k), size=2)
            terms.append((k, float(ak), float(bk)))
        try:
            return TrigPoly(1.0, tuple(terms))
        except NonConvexTable:
            continue
    raise NonConvexTable(
        f"no convex table found in {TABLE_ATTEMPTS} draws at amplitude {amplitude:g}"
    )


def cmd_caustic(cfg: RunConfig) -> int:
    ellipse = Ellipse(cfg.a1, cfg.a2)
    fam = find_caustic(ellipse, cfg.n, cfg.k, tol=min(cfg.tol, 1e-9))
    rho = rotation_number(ellipse, fam.caustic.lam, m=4096)
    lines = [
        f"lambda = {fmt(fam.caustic.lam)}",
        f"ac = {fmt(fam.caustic.ac)}",
        f"bc = {fmt(fam.caustic.bc)}",
        f"J = {fmt(fam.J)}",
        f"rotation_residual = {fmt(abs(rho - cfg.k / cfg.n))}",
    ]
    _emit("\n".join(lines), cfg.out)
    return 0


def _verify_report(cfg: RunConfig) -> tuple[ReportFile, InvariantReport]:
    ellipse = Ellipse(cfg.a1, cfg.a2)
    fam = find_caustic(ellipse, cfg.n, cfg.k)
    report = family_report(fam, cfg.samples, (cfg.px, cfg.py), parallel=cfg.parallel)
    checks = report_checks(report, closure_tol=cfg.tol)
    check_rows = [asdict(c) for c in checks]
    if cfg.n % 2 != 0:
        for name in ("focal_product_f1_value", "focal_product_f2_value"):
            check_rows.append({"name": name, "value": None, "bound": None,
                               "passed": True, "note": "not applicable: n is odd"})
    if cfg.n % 4 != 0:
        check_rows.append({"name": "center_product_value", "value": None, "bound": None,
                           "passed": True, "note": "not applicable: 4 does not divide n"})
    if cfg.n == 4:
        quad = check_quad_relations(fam)
        for name, value in quad.as_dict().items():
            check_rows.append({
                "name": f"quad_{name}",
                "value": value,
                "bound": 1e-9,
                "passed": bool(value <= 1e-9),
            })
    passed = all(row["passed"] for row in check_rows)
    rf = ReportFile(
        config=asdict(cfg),
        meta=_meta(),
        family={
            "lambda": fam.caustic.lam,
            "ac": fam.caustic.ac,
            "bc": fam.caustic.bc,
            "J": fam.J,
        },
        table=None,
        quantities=_quantities_payload(report),
        checks=check_rows,
        passed=passed,
    )
    return rf, report


def cmd_verify(cfg: RunConfig) -> int:
    try:
        rf, report = _verify_report(cfg)
    except PorismError as exc:
        partial = ReportFile(asdict(cfg), _meta(), None, None, [], [], False)
        partial.meta["error"] = f"{type(exc).__name__}: {exc}"
        _emit(partial.to_json(), cfg.out)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if cfg.fmt == "csv":
        _emit("\n".join(_csv_lines(report)), cfg.out)
    else:
        _emit(rf.to_json(), cfg.out)
    return 0 if rf.passed else 1


def cmd_sweep(cfg: RunConfig) -> int:
    try:
        _, report = _verify_report(cfg)
    except PorismError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _emit("\n".join(_csv_lines(report)), cfg.out)
    return 0


def cmd_generic(cfg: RunConfig) -> int:
    try:
        table = random_table(cfg.seed, cfg.harmonics, cfg.amplitude)
        orbit = birkhoff_orbit(table, cfg.n, cfg.k, seed=cfg.seed)
    except PorismError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    r1, r2 = check_action_sums(table, orbit)
    eq_h = check_vertex_identity(table, orbit)
    s1, s2 = vanishing_pedal_sums(orbit)
    diam = table.diameter()
    rows = [
        ("action_sum_residual", r1, 1e-8 * orbit.L),
        ("hprime_sum_residual", r2, 1e-8 * table.c0),
        ("vertex_identity", eq_h, 1e-10 * diam),
        ("pedal_sum_cos", s1, 1e-8),
        ("pedal_sum_sin", s2, 1e-8),
    ]
    quantities = [
        {"name": name, "values": [value], "mean": value, "std": 0.0,
         "max_dev": 0.0, "expected": 0.0, "residual": abs(value)}
        for name, value, _ in rows
    ]
    checks = [
        {"name": name, "value": abs(value), "bound": bound, "passed": bool(abs(value) <= bound)}
        for name, value, bound in rows
    ]
    passed = all(c["passed"] for c in checks)
    rf = ReportFile(
        config=asdict(cfg),
        meta=_meta(),
        family=None,
        table={
            "c0": table.c0,
            "harmonics": [[k, a, b] for k, a, b in table.harmonics],
            "L": orbit.L,
        },
        quantities=quantities,
        checks=checks,
        passed=passed,
    )
    _emit(rf.to_json(), cfg.out)
    return 0 if passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="porism",
        description="Billiard orbit families in ellipses and their conserved quantities.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("caustic", "locate the confocal caustic of an (n, k) family"),
        ("verify", "sweep a family and check every identity"),
        ("generic", "random convex table, variational orbit, identity checks"),
        ("sweep", "CSV stream of per-phase family quantities"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--a1", type=float, default=2.0, help="major semi-axis")
        p.add_argument("--a2", type=float, default=1.0, help="minor semi-axis")
        p.add_argument("--n", type=int, default=4, help="orbit period")
        p.add_argument("--k", type=int, default=1, help="winding number")
        p.add_argument("--samples", type=int, default=64, help="family phases to sweep")
        p.add_argument("--tol", type=float, default=1e-9, help="closure tolerance (times a1)")
        p.add_argument("--px", type=float, default=0.0, help="pedal point x")
        p.add_argument("--py", type=float, default=0.0, help="pedal point y")
        p.add_argument("--seed", type=int, default=0, help="seed for generic tables")
        p.add_argument("--harmonics", type=int, default=0,
                       help="highest support harmonic of the generic table")
        p.add_argument("--amplitude", type=float, default=0.05,
                       help="harmonic coefficient scale for generic tables")
        p.add_argument("--format", dest="fmt", choices=("csv", "json"), default="json")
        p.add_argument("--out", type=str, default=None, help="output path (default stdout)")
        p.add_argument("--parallel", action="store_true",
                       help="evaluate sweep phases concurrently")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(
        a1=args.a1, a2=args.a2, n=args.n, k=args.k, samples=args.samples,
        tol=args.tol, px=args.px, py=args.py, seed=args.seed,
        harmonics=args.harmonics, amplitude=args.amplitude,
        fmt=args.fmt, out=args.out, parallel=args.parallel,
    )
    try:
        cfg.validate()
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    handlers = {
        "caustic": cmd_caustic,
        "verify": cmd_verify,
        "generic": cmd_generic,
        "sweep": cmd_sweep,
    }
    try:
        return handlers[args.command](cfg)
    except PorismError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def console_main():
    sys.exit(main())
