"""Exact star discrepancy and the closed-form discrepancy bounds.

The exact routines work on integer numerators over a common denominator, so
every comparison is done in exact rational arithmetic.  For an anchored box
[0, a) the supremum of the local discrepancy is approached at corners whose
coordinates are point coordinates or 1: either as a limit from above with
the closed count #{x <= a}, or attained with the open count #{x < a}.
Counts for all corners of that grid come from an s-fold cumulative sum of
the point histogram.
"""

from __future__ import annotations

import itertools
import json
import math
import re
from dataclasses import asdict, dataclass, field as dc_field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
import sympy

from .field import prime_power
from .pointset import DigitalPointSet, project

DEFAULT_CORNER_BUDGET = 2**24
SLACK = 1e-12


class BudgetExceeded(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# weights
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WeightSpec:
    """Coordinate weights.

    ``kind == "product"``: gamma_u = prod_{j in u} gamma_j with gamma_j given
    by ``rule(j)`` (j >= 1).  ``kind == "explicit"``: gamma_u looked up in
    ``table`` (keyed by frozensets of 1-based indices, missing subsets weigh 0).
    """

    kind: str
    rule: Callable[[int], float] | None = None
    table: dict = dc_field(default_factory=dict)
    label: str = ""

    def __post_init__(self):
        if self.kind not in ("product", "explicit"):
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.kind == "product" and self.rule is None:
            raise ValueError("product weights need a rule")
        if any(v < 0 for v in self.table.values()):
            raise ValueError("weights must be nonnegative")

    @classmethod
    def constant(cls, c: float) -> WeightSpec:
        if c < 0:
            raise ValueError("weights must be nonnegative")
        return cls("product", lambda j: c, label=f"const:{c:g}")

    @classmethod
    def power(cls, c: float, a: float) -> WeightSpec:
        if c < 0:
            raise ValueError("weights must be nonnegative")
        return cls("product", lambda j: c / j**a, label=f"power:{c:g}/j^{a:g}")

    @classmethod
    def sequence(cls, gammas: Sequence[float]) -> WeightSpec:
        """Product weights from a finite list; gamma_j = 0 beyond its end."""
        gammas = tuple(float(g) for g in gammas)
        if any(g < 0 for g in gammas):
            raise ValueError("weights must be nonnegative")
        return cls("product", lambda j: gammas[j - 1] if j <= len(gammas) else 0.0, label=f"seq:{gammas}")

    @classmethod
    def explicit(cls, table: dict) -> WeightSpec:
        return cls("explicit", table={frozenset(k): float(v) for k, v in table.items()}, label="explicit")

    def gamma(self, j: int) -> float:
        if self.kind != "product":
            raise ValueError("gamma_j is only defined for product weights")
        g = float(self.rule(j))
        if g < 0:
            raise ValueError("weights must be nonnegative")
        return g

    def weight(self, u: Iterable[int]) -> float:
        u = frozenset(u)
        if self.kind == "explicit":
            return self.table.get(u, 0.0)
        return math.prod(self.gamma(j) for j in u)

    def is_nonincreasing(self, s: int) -> bool:
        g = [self.gamma(j) for j in range(1, s + 1)]
        return all(a >= b for a, b in zip(g, g[1:]))


_CONST_RE = re.compile(r"^const:([0-9.eE+-]+)$")
_POWER_RE = re.compile(r"^power:([0-9.eE+-]+)/j\^([0-9.eE+-]+)$")


def parse_weights(text: str) -> WeightSpec:
    """Parse ``const:c``, ``power:c/j^a`` or ``explicit:@file.json``.

    The JSON file maps comma-separated 1-based index lists to weights,
    e.g. ``{"1": 1.0, "2": 0.5, "1,2": 0.25}``.
    """
    text = text.strip()
    m = _CONST_RE.match(text)
    if m:
        return WeightSpec.constant(float(m.group(1)))
    m = _POWER_RE.match(text)
    if m:
        return WeightSpec.power(float(m.group(1)), float(m.group(2)))
    if text.startswith("explicit:@"):
        raw = json.loads(Path(text[len("explicit:@"):]).read_text())
        table = {}
        for key, val in raw.items():
            idx = tuple(int(i) for i in str(key).split(","))
            table[idx] = float(val)
        return WeightSpec.explicit(table)
    raise ValueError(f"malformed weight spec {text!r}")


# ---------------------------------------------------------------------------
# exact star discrepancy
# ---------------------------------------------------------------------------

@dataclass
class DiscrepancyResult:
    value: Fraction
    corner: tuple[Fraction, ...]
    closed: bool  # True: supremum approached from above with the closed count

    @property
    def real(self) -> float:
        return float(self.value)

    def to_json(self) -> dict:
        return {
            "value": f"{self.value.numerator}/{self.value.denominator}",
            "value_float": float(self.value),
            "corner": [f"{c.numerator}/{c.denominator}" for c in self.corner],
            "closed": self.closed,
        }


def _rational_grid(points) -> tuple[np.ndarray, int]:
    """Points as (N, s) integer numerators over one common denominator."""
    if isinstance(points, DigitalPointSet):
        return np.asarray(points.numerators, dtype=object), points.denominator
    rows = [[Fraction(x) for x in row] for row in points]
    if not rows or not rows[0]:
        raise ValueError("need at least one point of dimension >= 1")
    if any(len(r) != len(rows[0]) for r in rows):
        raise ValueError("points have inconsistent dimensions")
    den = math.lcm(*(x.denominator for r in rows for x in r))
    num = np.array([[x.numerator * (den // x.denominator) for x in r] for r in rows], dtype=object)
    return num, den


def _grid_counts(num: np.ndarray, den: int):
    """Candidate values per axis and closed counts A_<= on the full corner grid."""
    N, s = num.shape
    axes, ranks = [], []
    for i in range(s):
        vals = sorted(set(int(v) for v in num[:, i]) | {den})
        pos = {v: r for r, v in enumerate(vals)}
        axes.append(np.array(vals, dtype=object))
        ranks.append([pos[int(v)] for v in num[:, i]])
    hist = np.zeros(tuple(len(a) for a in axes), dtype=np.int64)
    np.add.at(hist, tuple(np.array(r) for r in ranks), 1)
    closed = hist
    for ax in range(s):
        closed = np.cumsum(closed, axis=ax)
    return axes, closed


def _open_counts(closed: np.ndarray) -> np.ndarray:
    # #{x < a_r} = #{x <= a_{r-1}}: shift every axis back by one
    pad = np.pad(closed, [(1, 0)] * closed.ndim)
    return pad[tuple(slice(0, -1) for _ in range(closed.ndim))]


def _check_budget(axes, budget: int) -> None:
    size = math.prod(len(a) for a in axes)
    if size > budget:
        raise BudgetExceeded(f"corner grid of {size} points exceeds budget {budget}")


def _best_corner(axes, closed, N: int, den: int, mask=None) -> DiscrepancyResult:
    s = len(axes)
    opened = _open_counts(closed)
    # volume numerators prod a_i over den^s, as an outer product
    use_int = N * den**s < 2**62
    dtype = np.int64 if use_int else object
    vol = np.ones((1,) * s, dtype=dtype)
    for i, a in enumerate(axes):
        shape = [1] * s
        shape[i] = len(a)
        vol = vol * np.asarray(a, dtype=dtype).reshape(shape)
    scale = den**s
    closed_gap = closed.astype(dtype) * scale - N * vol  # A_<=/N - vol, times N den^s
    open_gap = N * vol - opened.astype(dtype) * scale  # vol - A_</N, times N den^s
    if mask is not None:
        closed_gap = np.where(mask, closed_gap, -(N * scale) - 1)
        open_gap = np.where(mask, open_gap, -(N * scale) - 1)
    ci = np.unravel_index(int(np.argmax(closed_gap)), closed_gap.shape)
    oi = np.unravel_index(int(np.argmax(open_gap)), open_gap.shape)
    cbest, obest = int(closed_gap[ci]), int(open_gap[oi])
    if cbest >= obest:
        idx, best, is_closed = ci, cbest, True
    else:
        idx, best, is_closed = oi, obest, False
    corner = tuple(Fraction(int(axes[i][idx[i]]), den) for i in range(s))
    return DiscrepancyResult(Fraction(best, N * scale), corner, is_closed)


def star_discrepancy_exact(points, budget: int = DEFAULT_CORNER_BUDGET) -> DiscrepancyResult:
    """Exact D*_N of a finite point set in [0, 1)^s.

    ``points`` is a DigitalPointSet or an (N, s) nested sequence of numbers
    convertible to Fraction (ints, Fractions, floats taken at face value).
    """
    num, den = _rational_grid(points)
    N, s = num.shape
    if N < 1 or s < 1:
        raise ValueError("need at least one point of dimension >= 1")
    if any(int(v) < 0 or int(v) >= den for v in num.ravel()):
        raise ValueError("coordinates must lie in [0, 1)")
    _check_budget([set(num[:, i]) | {den} for i in range(s)], budget)
    axes, closed = _grid_counts(num, den)
    return _best_corner(axes, closed, N, den)


def star_discrepancy_naive(points) -> Fraction:
    """Corner-by-corner evaluation with explicit counting (test oracle)."""
    num, den = _rational_grid(points)
    N, s = num.shape
    pts = [[Fraction(int(v), den) for v in row] for row in num]
    cands = [sorted({row[i] for row in pts} | {Fraction(1)}) for i in range(s)]
    best = Fraction(0)
    for corner in itertools.product(*cands):
        vol = math.prod(corner)
        le = sum(all(x[i] <= corner[i] for i in range(s)) for x in pts)
        lt = sum(all(x[i] < corner[i] for i in range(s)) for x in pts)
        best = max(best, Fraction(le, N) - vol, vol - Fraction(lt, N))
    return best


def star_discrepancy_mc(points: np.ndarray, n_anchors: int = 10**6, seed: int = 0) -> float:
    """Largest |local discrepancy| over random anchors: a lower estimate of D*."""
    pts = np.asarray(points, dtype=float)
    N, s = pts.shape
    rng = np.random.default_rng(seed)
    best = 0.0
    step = max(1, 2**22 // (N * s))
    for start in range(0, n_anchors, step):
        a = rng.random((min(step, n_anchors - start), s))
        inside = np.all(pts[None, :, :] < a[:, None, :], axis=2).sum(axis=1)
        local = np.abs(inside / N - a.prod(axis=1))
        best = max(best, float(local.max()))
    return best


@dataclass
class WeightedResult:
    value: float
    subset: tuple[int, ...]
    projected: DiscrepancyResult | None
    lower_bound: bool = False


def weighted_star_discrepancy_exact(
    ps: DigitalPointSet,
    weights: WeightSpec,
    max_order: int | None = None,
    budget: int = DEFAULT_CORNER_BUDGET,
) -> WeightedResult:
    """max over nonempty u, |u| <= max_order, of gamma_u D*(P_u)."""
    s = ps.s
    max_order = s if max_order is None else max_order
    if not 1 <= max_order <= s:
        raise ValueError("need 1 <= max_order <= s")
    best = WeightedResult(0.0, (), None, max_order < s)
    for r in range(1, max_order + 1):
        for u in itertools.combinations(range(1, s + 1), r):
            g = weights.weight(u)
            if g == 0:
                continue
            res = star_discrepancy_exact(project(ps, u), budget)
            val = g * float(res.value)
            if val > best.value or best.projected is None:
                best = WeightedResult(val, u, res, max_order < s)
    return best


def weighted_star_discrepancy_direct(ps: DigitalPointSet, weights: WeightSpec, budget: int = DEFAULT_CORNER_BUDGET) -> float:
    """Weighted D* straight from the definition: boxes (a_u, 1) of the full set.

    Independent of ``project``; the corner grid of the full s-dimensional set
    is built once and restricted to corners with coordinate 1 outside u.
    """
    num, den = _rational_grid(ps)
    N, s = num.shape
    _check_budget([set(num[:, i]) | {den} for i in range(s)], budget)
    axes, closed = _grid_counts(num, den)
    best = 0.0
    for r in range(1, s + 1):
        for u in itertools.combinations(range(1, s + 1), r):
            g = weights.weight(u)
            if g == 0:
                continue
            mask = np.ones(closed.shape, dtype=bool)
            for j in range(1, s + 1):
                if j not in u:
                    shape = [1] * s
                    shape[j - 1] = len(axes[j - 1])
                    sel = np.zeros(len(axes[j - 1]), dtype=bool)
                    sel[-1] = True  # the value 1 is always the last candidate
                    mask = mask & sel.reshape(shape)
            res = _best_corner(axes, closed, N, den, mask)
            best = max(best, g * float(res.value))
    return best


# ---------------------------------------------------------------------------
# bound evaluators
# ---------------------------------------------------------------------------

def _pk(q: int) -> tuple[int, int]:
    pk = prime_power(q)
    if pk is None:
        raise ValueError(f"{q} is not a prime power")
    return pk


def aux_T_base(q: int) -> float:
    """The per-dimension factor A with aux_T(q, s) = A^s."""
    p, k = _pk(q)
    if p == 2:
        return k / 2 + 1
    return (2 / math.pi * math.log(p) + 7 / 5) * k


def aux_T(q: int, s: int) -> float:
    return aux_T_base(q) ** s


def etk_bound(s: int, q: int, N: int, max_charsum: float) -> float:
    return s / q + aux_T(q, s) * max_charsum / N


def _log_thm1_term(construction: str, q: int, r: int, T: int | None) -> float:
    """log of |u| (1/q + 3 aux_T(q,|u|) / sqrt(q)) or its period-T analogue, for |u| = r."""
    A = aux_T_base(q)
    rest = 3 * math.sqrt(q) / T if construction == "period-T" else 3 / math.sqrt(q)
    # log(1/q + rest * A^r) without overflowing A^r
    big = r * math.log(A) + math.log(rest)
    small = -math.log(q)
    hi, lo = max(big, small), min(big, small)
    return math.log(r) + hi + math.log1p(math.exp(lo - hi))


def thm1_bound(
    construction: str,
    weights: WeightSpec,
    s: int,
    q: int,
    T: int | None = None,
    max_explicit_s: int = 20,
) -> float:
    """max over nonempty u of gamma_u |u| (1/q + 3 aux_T(q,|u|) B) with
    B = q^-1/2 (size q) or B = q^1/2 / T (period T).  Returns inf when the
    value exceeds the double range."""
    return _safe_exp(thm1_log_bound(construction, weights, s, q, T, max_explicit_s))


def thm1_log_bound(
    construction: str,
    weights: WeightSpec,
    s: int,
    q: int,
    T: int | None = None,
    max_explicit_s: int = 20,
) -> float:
    """Natural log of thm1_bound, finite even where the bound itself overflows."""
    if construction not in ("size-q", "period-T"):
        raise ValueError(f"unknown construction {construction!r}")
    if construction == "period-T" and not T:
        raise ValueError("period-T bound needs T")
    _pk(q)
    if weights.kind == "explicit":
        if s > max_explicit_s:
            raise BudgetExceeded(f"explicit weights: s = {s} exceeds subset-enumeration cap {max_explicit_s}")
        best = -math.inf
        for r in range(1, s + 1):
            term = _log_thm1_term(construction, q, r, T)
            for u in itertools.combinations(range(1, s + 1), r):
                g = weights.weight(u)
                if g > 0:
                    best = max(best, math.log(g) + term)
        return best
    # the bound depends on u only through |u|, so for each r the best u
    # takes the r largest gamma_j
    gammas = sorted((weights.gamma(j) for j in range(1, s + 1)), reverse=True)
    best_log = -math.inf
    log_prod = 0.0
    for r, g in enumerate(gammas, start=1):
        if g == 0:
            break
        log_prod += math.log(g)
        best_log = max(best_log, log_prod + _log_thm1_term(construction, q, r, T))
    return best_log


@dataclass
class RateCheck:
    qs: list[int]
    bounds: list[float]
    scaled: list[float]  # bound(q) * q^(1/2 - delta)
    ratios: list[float]  # bound(q_{i+2}) / bound(q_i), i.e. q roughly quadrupled
    threshold: float
    passed: bool


def thm2_rate_check(
    weights: WeightSpec,
    delta: float,
    q_list: Sequence[int],
    s_of_q: Callable[[int], int] | None = None,
    slack: float = 0.1,
    stride: int = 2,
) -> RateCheck:
    """Decay check of the size-q bound along a geometric q sweep.

    With q doubling along ``q_list``, entries ``stride`` apart differ by a
    factor ~4, and a q^-(1/2 - delta) rate gives ratio 2^-(1 - 2 delta).
    """
    if weights.kind != "product":
        raise ValueError("rate check needs product weights")
    if not 0 <= delta < 0.5:
        raise ValueError("delta must lie in [0, 1/2)")
    s_of_q = s_of_q or (lambda q: q)
    qs = sorted(int(q) for q in q_list)
    if not weights.is_nonincreasing(min(s_of_q(qs[-1]), 10**6)):
        raise ValueError("weights must be non-increasing")
    logs = [thm1_log_bound("size-q", weights, s_of_q(q), q) for q in qs]
    bounds = [_safe_exp(lb) for lb in logs]
    scaled = [_safe_exp(lb + (0.5 - delta) * math.log(q)) for lb, q in zip(logs, qs)]
    ratios = [
        _safe_exp(logs[i + stride] - logs[i]) if logs[i] > -math.inf else 0.0 for i in range(len(qs) - stride)
    ]
    threshold = 2 ** -(1 - 2 * delta) + slack
    return RateCheck(qs, bounds, scaled, ratios, threshold, all(r <= threshold for r in ratios))


def _safe_exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def smallest_prime_power_at_least(M: int) -> int:
    M = max(int(M), 2)
    best = int(sympy.nextprime(M - 1))
    k = 2
    while 2**k <= best:
        root, exact = sympy.integer_nthroot(M, k)
        if not exact:
            root += 1
        p = int(sympy.nextprime(root - 1))
        best = min(best, p**k)
        k += 1
    return best


def inverse_M(eps: float, delta: float, c: float) -> int:
    """M = ceil((c / eps)^(2 / (1 - 2 delta)))."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if not 0 <= delta < 0.5:
        raise ValueError("delta must lie in [0, 1/2)")
    if not c > 0:
        raise ValueError("c must be positive")
    expo = Fraction(2) / (1 - 2 * Fraction(delta))
    base = Fraction(c) / Fraction(eps)
    if expo.denominator == 1:
        x = base ** int(expo)
        return -((-x.numerator) // x.denominator)
    return math.ceil(float(base) ** float(expo))


def min_q_for_eps(eps: float, delta: float, c: float) -> int:
    """Smallest prime power q >= M; c stands in for the unknown constant."""
    M = inverse_M(eps, delta, c)
    q = smallest_prime_power_at_least(M)
    if M >= 2 and not q < 2 * M:  # pragma: no cover - Bertrand
        raise AssertionError("Bertrand check failed")
    return q


# ---------------------------------------------------------------------------
# records
# ---------------------------------------------------------------------------

@dataclass
class ExperimentRecord:
    q: int
    p: int
    k: int
    s: int
    N: int
    construction: str
    u: list[int]
    measured: float
    bound_kind: str
    bound: float
    holds: bool

    def to_json(self) -> dict:
        return asdict(self)
