"""Command-line front end.

    ipqmc gen | verify | charsum | disc | integrate | sweep | inverse-eps

Exit codes: 0 all checks pass, 1 usage error, 2 a verification failed or an
enumeration budget was exceeded.  ``IPQMC_BUDGET`` overrides the default
enumeration budgets (character-sum candidates and discrepancy corners).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np
import sympy

from . import charsum as cs
from . import discrepancy as disc
from . import integration as integ
from .field import FieldError, FieldSpec, OrderedBasis, element_of_order, make_field, prime_power
from .pointset import (
    DigitalPointSet,
    PeriodTConfig,
    PointSetError,
    SizeQConfig,
    default_S,
    gen_period_t,
    gen_size_q,
    normalize_subset,
)
from .verify import subsets, verify_pointset

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _float_or_inf(text: str) -> float:
    return math.inf if text.lower() in ("inf", "infinity") else float(text)


def _budget(args) -> int | None:
    if getattr(args, "budget", None):
        return args.budget
    env = os.environ.get("IPQMC_BUDGET")
    return int(env) if env else None


# ---------------------------------------------------------------------------
# point-set construction from flags
# ---------------------------------------------------------------------------

def _add_field_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("field")
    g.add_argument("--q", type=int, help="field size (prime power)")
    g.add_argument("--p", type=int, help="characteristic (with --k)")
    g.add_argument("--k", type=int, default=1, help="extension degree (with --p)")
    g.add_argument("--modulus", type=_int_list, help="modulus coefficients c0,...,ck (monic, irreducible)")


def _add_construction_args(p: argparse.ArgumentParser) -> None:
    _add_field_args(p)
    g = p.add_argument_group("construction")
    g.add_argument("--construction", choices=["size-q", "period-T"], default="size-q")
    g.add_argument("--T", type=int, help="period (period-T only; default q-1)")
    g.add_argument("--s", type=int, default=1, help="dimension")
    g.add_argument("--S", type=_int_list, help="shift set as element indices (default 0..s-1)")
    g.add_argument("--basis", type=_int_list, help="ordered basis as element indices (default polynomial)")


def _field_from_args(args) -> FieldSpec:
    if args.q is not None:
        pk = prime_power(args.q)
        if pk is None:
            raise UsageError(f"--q {args.q} is not a prime power")
        p, k = pk
    elif args.p is not None:
        p, k = args.p, args.k
    else:
        raise UsageError("give --q or --p/--k")
    if args.modulus:
        return FieldSpec(p, k, tuple(args.modulus))
    return make_field(p, k)


def _config_from_args(args):
    field = _field_from_args(args)
    if args.S:
        if len(args.S) != args.s and args.s != 1:
            raise UsageError("--S length disagrees with --s")
        S = tuple(field.element(i) for i in args.S)
    else:
        S = default_S(field, args.s)
    basis = OrderedBasis(tuple(field.element(i) for i in args.basis)) if args.basis else None
    if args.construction == "size-q":
        if args.T is not None:
            raise UsageError("--T only applies to period-T")
        return SizeQConfig(field, S, basis)
    T = args.T if args.T is not None else field.q - 1
    return PeriodTConfig(field, T, element_of_order(field, T), S, basis)


def _generate(config) -> DigitalPointSet:
    return gen_size_q(config) if isinstance(config, SizeQConfig) else gen_period_t(config)


# ---------------------------------------------------------------------------
# point-set CSV
# ---------------------------------------------------------------------------

def format_pointset_csv(config, ps: DigitalPointSet) -> str:
    f = ps.field
    meta = [
        ("p", f.p),
        ("k", f.k),
        ("q", f.q),
        ("construction", ps.construction),
        ("S", " ".join(str(v.index) for v in config.S)),
        ("theta", config.theta.index if isinstance(config, PeriodTConfig) else ""),
        ("T", config.T if isinstance(config, PeriodTConfig) else ""),
        ("basis", "polynomial" if config.basis is None else " ".join(str(b.index) for b in config.basis.elements)),
        ("modulus", ",".join(str(c) for c in f.modulus)),
    ]
    buf = io.StringIO()
    for key, val in meta:
        buf.write(f"# {key}={val}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"x{i + 1}" for i in range(ps.s)] + [f"x{i + 1}_float" for i in range(ps.s)])
    den = ps.denominator
    for row in ps.numerators:
        w.writerow([f"{int(m)}/{den}" for m in row] + [format(int(m) / den, ".17g") for m in row])
    return buf.getvalue()


def parse_pointset_csv(text: str) -> tuple[dict, np.ndarray, int]:
    """Inverse of format_pointset_csv: (metadata, numerators, denominator)."""
    meta, body = {}, []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition("=")
            meta[key] = val
        elif line.strip():
            body.append(line)
    rows = list(csv.reader(body))
    header, rows = rows[0], rows[1:]
    exact = [i for i, h in enumerate(header) if not h.endswith("_float")]
    den = int(meta["q"])
    num = np.array([[Fraction(r[i]).numerator * (den // Fraction(r[i]).denominator) for i in exact] for r in rows], dtype=np.int64)
    return meta, num, den


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _emit(args, text: str) -> None:
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _records_text(records, fmt: str) -> str:
    rows = [r.to_json() for r in records]
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (" ".join(map(str, v)) if isinstance(v, list) else _cell(v)) for k, v in r.items()})
    return buf.getvalue()


def _cell(v):
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return format(v, ".17g")
    return v


def cmd_gen(args) -> int:
    config = _config_from_args(args)
    ps = _generate(config)
    if args.format == "json":
        out = {"config": config.to_json(), "denominator": ps.denominator, "numerators": ps.numerators.tolist()}
        _emit(args, json.dumps(out, indent=2) + "\n")
    else:
        _emit(args, format_pointset_csv(config, ps))
    return EXIT_OK


def cmd_verify(args) -> int:
    ps = _generate(_config_from_args(args))
    max_order = args.max_order or min(ps.s, 3)
    budget = _budget(args)
    records, skipped = verify_pointset(
        ps,
        max_order,
        charsum_budget=budget,
        corner_budget=budget or disc.DEFAULT_CORNER_BUDGET,
        discrepancy=not args.no_discrepancy,
    )
    for r in records:
        verdict = "PASS" if r.holds else "FAIL"
        print(f"{verdict} {r.bound_kind:14s} u={r.u} measured={r.measured:.6g} bound={r.bound:.6g}", file=sys.stderr)
    for msg in skipped:
        print(f"BUDGET {msg}", file=sys.stderr)
    if args.output or args.format == "json":
        _emit(args, _records_text(records, args.format))
    ok = all(r.holds for r in records) and not skipped
    return EXIT_OK if ok else EXIT_FAIL


def cmd_charsum(args) -> int:
    ps = _generate(_config_from_args(args))
    us = [normalize_subset(args.u, ps.s)] if args.u else list(subsets(ps.s, args.max_order or min(ps.s, 3)))
    budget = _budget(args)
    reports = []
    for u in us:
        try:
            reports.append(cs.max_abs_charsum(ps, u, ps.construction, budget=budget, subsample=args.subsample))
        except cs.OracleTooLarge as exc:
            print(str(exc), file=sys.stderr)
            return EXIT_FAIL
    _emit(args, json.dumps([r.to_json() for r in reports], indent=2) + "\n")
    return EXIT_OK if all(r.holds for r in reports) else EXIT_FAIL


def cmd_disc(args) -> int:
    ps = _generate(_config_from_args(args))
    budget = _budget(args) or disc.DEFAULT_CORNER_BUDGET
    try:
        res = disc.star_discrepancy_exact(ps, budget)
        out = {"q": ps.field.q, "N": ps.N, "s": ps.s, "construction": ps.construction, "star": res.to_json()}
        if args.weights:
            w = disc.parse_weights(args.weights)
            wres = disc.weighted_star_discrepancy_exact(ps, w, args.max_order, budget)
            out["weighted"] = {
                "weights": w.label,
                "value": wres.value,
                "subset": list(wres.subset),
                "lower_bound": wres.lower_bound,
            }
            out["thm1_bound"] = disc.thm1_bound(ps.construction, w, ps.s, ps.field.q, ps.meta.get("T"))
    except disc.BudgetExceeded as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_FAIL
    _emit(args, json.dumps(out, indent=2) + "\n")
    return EXIT_OK


def _integrand_from_args(args):
    if args.family == "const":
        return integ.ConstantIntegrand(args.s)
    w = disc.parse_weights(args.amplitudes)
    amps = [w.gamma(j) for j in range(1, args.s + 1)]
    kind = "cosine" if args.family == "cosine" else "fourier"
    return integ.CosProdIntegrand(amps, kind)


def _add_integrand_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("integrand")
    g.add_argument("--family", choices=["cosprod", "cosine", "const"], default="cosprod")
    g.add_argument("--amplitudes", default="power:1/j^2", help="amplitude rule a_j, same syntax as weights")
    g.add_argument("--alpha", type=float, default=1.0)
    g.add_argument("--t", type=_float_or_inf, default=math.inf)
    g.add_argument("--tent", action="store_true", help="tent-transform the nodes (use with --family cosine)")


def _sweep_output(args, result: integ.SweepResult) -> int:
    _emit(args, result.to_json() + "\n" if args.format == "json" else result.to_csv())
    slope = "undefined" if result.slope is None else f"{result.slope:.4f}"
    print(f"slope={slope}", file=sys.stderr)
    return EXIT_OK if all(r.holds is not False for r in result.records) else EXIT_FAIL


def cmd_integrate(args) -> int:
    if args.q is None:
        raise UsageError("integrate needs --q")
    f = _integrand_from_args(args)
    params = integ.ClassParams(args.alpha, args.t)
    return _sweep_output(args, integ.convergence_sweep(f, [args.q], params, args.construction, tent_nodes=args.tent))


def cmd_sweep(args) -> int:
    if args.q_list:
        qs = args.q_list
    elif args.prime_range:
        lo, hi = args.prime_range
        qs = [int(p) for p in sympy.primerange(lo, hi + 1)]
    elif args.pow2_range:
        qs = integ.first_primes_above_powers(*args.pow2_range)
    else:
        raise UsageError("give --q-list, --prime-range or --pow2-range")
    bad = [q for q in qs if prime_power(q) is None]
    if bad:
        raise UsageError(f"not prime powers: {bad}")
    f = _integrand_from_args(args)
    params = integ.ClassParams(args.alpha, args.t)
    return _sweep_output(args, integ.convergence_sweep(f, qs, params, args.construction, tent_nodes=args.tent))


def cmd_inverse_eps(args) -> int:
    M = disc.inverse_M(args.eps, args.delta, args.c)
    q = disc.min_q_for_eps(args.eps, args.delta, args.c)
    print(json.dumps({"eps": args.eps, "delta": args.delta, "c": args.c, "M": M, "q": q}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ipqmc", description="Explicit inversive QMC point sets, bounds and experiments.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common_out(p):
        p.add_argument("--output", "-o", help="output file (default stdout)")
        p.add_argument("--format", choices=["csv", "json"], default="csv")
        p.add_argument("--budget", type=int, help="enumeration budget (overrides IPQMC_BUDGET)")

    p = sub.add_parser("gen", help="generate a point set")
    _add_construction_args(p)
    common_out(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("verify", help="check character-sum bounds and discrepancy bound chains")
    _add_construction_args(p)
    common_out(p)
    p.add_argument("--max-order", type=int, help="largest |u| checked (default min(s, 3))")
    p.add_argument("--no-discrepancy", action="store_true", help="character sums only")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("charsum", help="exhaustive maximal character sums")
    _add_construction_args(p)
    common_out(p)
    p.add_argument("--u", type=_int_list, help="coordinate subset, 1-based (default: all up to --max-order)")
    p.add_argument("--max-order", type=int)
    p.add_argument("--subsample", action="store_true", help="subsample w when over budget")
    p.set_defaults(func=cmd_charsum)

    p = sub.add_parser("disc", help="exact (weighted) star discrepancy")
    _add_construction_args(p)
    common_out(p)
    p.add_argument("--weights", help="const:c | power:c/j^a | explicit:@file.json")
    p.add_argument("--max-order", type=int)
    p.set_defaults(func=cmd_disc)

    p = sub.add_parser("integrate", help="QMC integration error at one q")
    _add_construction_args(p)
    _add_integrand_args(p)
    common_out(p)
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser("sweep", help="integration error sweep over q")
    p.add_argument("--construction", choices=["size-q", "period-T"], default="size-q")
    p.add_argument("--s", type=int, default=1)
    p.add_argument("--q-list", type=_int_list)
    p.add_argument("--prime-range", type=int, nargs=2, metavar=("LO", "HI"), help="all primes in [LO, HI]")
    p.add_argument("--pow2-range", type=int, nargs=2, metavar=("MLO", "MHI"), help="first prime >= 2^m, m in range")
    _add_integrand_args(p)
    common_out(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("inverse-eps", help="smallest prime power q meeting a target eps")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--c", type=float, default=1.0, help="stand-in for the unknown constant")
    p.set_defaults(func=cmd_inverse_eps)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, FieldError, PointSetError, ValueError) as exc:
        print(f"ipqmc {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (cs.OracleTooLarge, disc.BudgetExceeded) as exc:
        print(f"ipqmc {args.command}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
