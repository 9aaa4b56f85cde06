"""Bound-versus-measured verification runs producing ExperimentRecords."""

from __future__ import annotations

import itertools
from fractions import Fraction

from .charsum import OracleTooLarge, max_abs_charsum
from .discrepancy import (
    DEFAULT_CORNER_BUDGET,
    BudgetExceeded,
    ExperimentRecord,
    WeightSpec,
    etk_bound,
    star_discrepancy_exact,
    thm1_bound,
)
from .pointset import DigitalPointSet, project

SLACK = Fraction(1, 10**12)


def _record(ps: DigitalPointSet, u, measured, kind, bound, holds) -> ExperimentRecord:
    f = ps.field
    return ExperimentRecord(f.q, f.p, f.k, ps.s, ps.N, ps.construction, list(u), float(measured), kind, float(bound), holds)


def subsets(s: int, max_order: int):
    for r in range(1, min(max_order, s) + 1):
        yield from itertools.combinations(range(1, s + 1), r)


def verify_pointset(
    ps: DigitalPointSet,
    max_order: int = 3,
    charsum_budget: int | None = None,
    corner_budget: int = DEFAULT_CORNER_BUDGET,
    discrepancy: bool = True,
) -> tuple[list[ExperimentRecord], list[str]]:
    """Character-sum bound checks for every u with |u| <= max_order, and for
    each such projection the chains D* <= etk_bound and D* <= thm1_bound
    (unit weights).  Returns the records and a list of budget failures."""
    T = ps.meta.get("T")
    records, skipped = [], []
    for u in subsets(ps.s, max_order):
        try:
            rep = max_abs_charsum(ps, u, ps.construction, budget=charsum_budget)
        except OracleTooLarge as exc:
            skipped.append(f"u={list(u)}: {exc}")
            continue
        records.append(_record(ps, u, rep.max_abs, "charsum", rep.bound, rep.holds))
        if not discrepancy:
            continue
        try:
            d = star_discrepancy_exact(project(ps, u), corner_budget).value
        except BudgetExceeded as exc:
            skipped.append(f"u={list(u)}: {exc}")
            continue
        r = len(u)
        etk = etk_bound(r, ps.field.q, ps.N, rep.max_abs)
        records.append(_record(ps, u, d, "etk", etk, d <= Fraction(etk) + SLACK))
        thm1 = thm1_bound(ps.construction, WeightSpec.constant(1.0), r, ps.field.q, T)
        records.append(_record(ps, u, d, "thm1", thm1, d <= Fraction(thm1) + SLACK))
    return records, skipped
