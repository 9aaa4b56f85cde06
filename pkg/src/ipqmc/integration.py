"""QMC quadrature, test integrands with computable norm bounds, tent transform.

Integrands are callables on (N, s) float arrays with attributes ``s`` and
``integral``.  Norm evaluation is only available for closed-form families
(finite Fourier / cosine series and products of one-term cosines); the
Hoelder part is replaced by a certified upper bound:

* Lipschitz constants L_j >= sup |d f / d x_j| from the coefficients;
* with respect to the l_t norm of increments, L = ||(L_j)||_{t'} where
  1/t + 1/t' = 1 (t = inf pairs with the l_1 sum);
* for alpha < 1, |f(x+h) - f(x)| <= min(L |h|, osc f) gives
  |f|_H <= min(L diam^(1-alpha), L^alpha osc^(1-alpha)) with
  diam = s^(1/t) the l_t diameter of the unit cube.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import asdict, dataclass
from typing import Callable, Mapping, Sequence

import numpy as np
import sympy

from .field import FieldSpec, field_of_order
from .pointset import DigitalPointSet, default_S, gen_size_q, period_t, SizeQConfig

EXACT_FLOOR = 1e-12


@dataclass(frozen=True)
class ClassParams:
    alpha: float = 1.0
    t: float = math.inf

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")
        if not self.t >= 1:
            raise ValueError("t must be >= 1")

    @property
    def dual_t(self) -> float:
        if math.isinf(self.t):
            return 1.0
        if self.t == 1:
            return math.inf
        return self.t / (self.t - 1)


# ---------------------------------------------------------------------------
# integrands
# ---------------------------------------------------------------------------

def _as_nodes(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x.reshape(-1, 1) if x.ndim == 1 else x


class ConstantIntegrand:
    def __init__(self, s: int, value: float = 1.0):
        self.s = s
        self.value = value
        self.integral = value

    def __call__(self, x):
        return np.full(_as_nodes(x).shape[0], self.value)


class CosProdIntegrand:
    """prod_j (1 + a_j cos(2 pi x_j))  (kind "fourier"), or
    prod_j (1 + a_j cos(pi x_j)) = prod_j (1 + (a_j / sqrt 2) sigma_1(x_j))  (kind "cosine").

    Both integrate to exactly 1.  Composing the cosine kind with the tent
    map gives the Fourier kind with the same amplitudes.
    """

    def __init__(self, amplitudes: Sequence[float], kind: str = "fourier"):
        if kind not in ("fourier", "cosine"):
            raise ValueError(f"unknown kind {kind!r}")
        a = np.asarray(amplitudes, dtype=float)
        if a.ndim != 1 or len(a) == 0 or np.any(a < 0):
            raise ValueError("amplitudes must be a nonempty list of nonnegative numbers")
        self.a = a
        self.kind = kind
        self.s = len(a)
        self.integral = 1.0

    def __call__(self, x):
        x = _as_nodes(x)
        freq = 2 * np.pi if self.kind == "fourier" else np.pi
        return np.prod(1 + self.a * np.cos(freq * x), axis=1)

    # sum over nonempty u of |u| prod_{j in u} a_j
    def _weighted_sum(self) -> float:
        return float(sum(self.a[j] * np.prod(np.delete(1 + self.a, j)) for j in range(self.s)))

    def _lipschitz(self) -> np.ndarray:
        freq = 2 * np.pi if self.kind == "fourier" else np.pi
        return np.array([freq * self.a[j] * np.prod(np.delete(1 + self.a, j)) for j in range(self.s)])

    def _oscillation(self) -> float:
        return 2 * (float(np.prod(1 + self.a)) - 1)

    def to_series(self):
        """Expand into a FiniteFourierIntegrand (fourier) or FiniteCosineIntegrand (cosine)."""
        coeffs = {}
        if self.kind == "fourier":
            for h in itertools.product((-1, 0, 1), repeat=self.s):
                coeffs[h] = complex(np.prod([self.a[j] / 2 if hj else 1.0 for j, hj in enumerate(h)]))
            return FiniteFourierIntegrand(coeffs)
        for k in itertools.product((0, 1), repeat=self.s):
            coeffs[k] = float(np.prod([self.a[j] / math.sqrt(2) if kj else 1.0 for j, kj in enumerate(k)]))
        return FiniteCosineIntegrand(coeffs)


class FiniteFourierIntegrand:
    """sum_h c_h exp(2 pi i h.x) over a finite set of frequencies h in Z^s."""

    def __init__(self, coeffs: Mapping[Sequence[int], complex]):
        if not coeffs:
            raise ValueError("need at least one coefficient")
        self.coeffs = {tuple(int(v) for v in h): complex(c) for h, c in coeffs.items()}
        dims = {len(h) for h in self.coeffs}
        if len(dims) != 1:
            raise ValueError("frequencies have inconsistent dimensions")
        self.s = dims.pop()
        self.freqs = np.array(list(self.coeffs), dtype=float)
        self.values = np.array(list(self.coeffs.values()))
        self.integral = self.coeffs.get((0,) * self.s, 0j)

    def __call__(self, x):
        x = _as_nodes(x)
        return np.exp(2j * np.pi * x @ self.freqs.T) @ self.values

    def _weighted_sum(self) -> float:
        return float(sum(np.count_nonzero(h) * abs(c) for h, c in self.coeffs.items()))

    def _lipschitz(self) -> np.ndarray:
        return 2 * np.pi * np.abs(self.freqs).T @ np.abs(self.values)

    def _oscillation(self) -> float:
        return 2 * float(sum(abs(c) for h, c in self.coeffs.items() if any(h)))


class FiniteCosineIntegrand:
    """sum_k c_k sigma_k(x) with sigma_k(x) = prod_j sigma_{k_j}(x_j),
    sigma_0 = 1 and sigma_m(x) = sqrt 2 cos(m pi x)."""

    def __init__(self, coeffs: Mapping[Sequence[int], float]):
        if not coeffs:
            raise ValueError("need at least one coefficient")
        self.coeffs = {tuple(int(v) for v in k): float(c) for k, c in coeffs.items()}
        if any(v < 0 for k in self.coeffs for v in k):
            raise ValueError("cosine frequencies must be nonnegative")
        dims = {len(k) for k in self.coeffs}
        if len(dims) != 1:
            raise ValueError("frequencies have inconsistent dimensions")
        self.s = dims.pop()
        self.freqs = np.array(list(self.coeffs), dtype=float)
        self.values = np.array(list(self.coeffs.values()))
        self.support = np.count_nonzero(self.freqs, axis=1)
        self.integral = self.coeffs.get((0,) * self.s, 0.0)

    def __call__(self, x):
        x = _as_nodes(x)
        basis = np.prod(np.where(self.freqs[None] > 0, np.sqrt(2) * np.cos(np.pi * x[:, None, :] * self.freqs[None]), 1.0), axis=2)
        return basis @ self.values

    def _weighted_sum(self) -> float:
        return float(np.sum(self.support * 2.0 ** (self.support / 2) * np.abs(self.values)))

    def _lipschitz(self) -> np.ndarray:
        return np.pi * self.freqs.T @ (2.0 ** (self.support / 2) * np.abs(self.values))

    def _oscillation(self) -> float:
        nz = self.support > 0
        return 2 * float(np.sum(2.0 ** (self.support[nz] / 2) * np.abs(self.values[nz])))


class Composed:
    """x -> g(phi(x)) with the tent map phi."""

    def __init__(self, g):
        self.g = g
        self.s = g.s
        self.integral = g.integral

    def __call__(self, x):
        return self.g(tent(x))


def compose_tent(g: FiniteCosineIntegrand) -> FiniteFourierIntegrand:
    """Fourier series of g o phi.  sigma_m(phi(x)) = sqrt 2 cos(2 pi m x), so each
    cosine term with support r splits into 2^r exponentials of weight 2^(-r/2)."""
    coeffs: dict[tuple[int, ...], complex] = {}
    for k, c in g.coeffs.items():
        supp = [j for j, kj in enumerate(k) if kj]
        w = c * 2 ** (-len(supp) / 2)
        for signs in itertools.product((-1, 1), repeat=len(supp)):
            h = list(k)
            for j, sg in zip(supp, signs):
                h[j] = sg * k[j]
            coeffs[tuple(h)] = coeffs.get(tuple(h), 0) + w
    return FiniteFourierIntegrand(coeffs)


# ---------------------------------------------------------------------------
# quadrature and tent transform
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RationalPoints:
    numerators: np.ndarray
    denominator: int

    @property
    def points(self) -> np.ndarray:
        return self.numerators / self.denominator

    @property
    def N(self) -> int:
        return self.numerators.shape[0]


def _nodes_of(nodes) -> np.ndarray:
    if isinstance(nodes, (DigitalPointSet, RationalPoints)):
        return nodes.points
    return _as_nodes(nodes)


def qmc_apply(nodes, f) -> complex | float:
    """(1/N) sum_n f(x_n), summed with math.fsum (componentwise for complex values)."""
    x = _nodes_of(nodes)
    if getattr(f, "s", x.shape[1]) != x.shape[1]:
        raise ValueError(f"integrand has {f.s} variables but nodes have {x.shape[1]}")
    vals = np.asarray(f(x))
    N = x.shape[0]
    if np.iscomplexobj(vals):
        return complex(math.fsum(vals.real) / N, math.fsum(vals.imag) / N)
    return math.fsum(vals) / N


def tent(x):
    x = np.asarray(x, dtype=float)
    if np.any((x < 0) | (x > 1)):
        raise ValueError("tent map needs coordinates in [0, 1]")
    return 1 - np.abs(2 * x - 1)


def tent_pointset(ps) -> RationalPoints:
    """phi applied to every node; m / D maps to (D - |2m - D|) / D exactly."""
    if isinstance(ps, (DigitalPointSet, RationalPoints)):
        num = np.asarray(ps.numerators, dtype=np.int64)
        D = ps.denominator
        return RationalPoints(D - np.abs(2 * num - D), D)
    raise TypeError("tent_pointset expects a point set with exact numerators; use tent() for floats")


# ---------------------------------------------------------------------------
# bounds and norms
# ---------------------------------------------------------------------------

def error_bound(N: int, s: int, params: ClassParams) -> float:
    """max(3 / sqrt N, s^(alpha/t) / N^alpha)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    a = params.alpha
    s_factor = 1.0 if math.isinf(params.t) else s ** (a / params.t)
    return max(3 / math.sqrt(N), s_factor / N**a)


def _holder_upper(lip: np.ndarray, osc: float, s: int, params: ClassParams) -> float:
    tp = params.dual_t
    lip = np.abs(np.asarray(lip, dtype=float))
    L = float(lip.max()) if math.isinf(tp) else float(np.sum(lip**tp) ** (1 / tp))
    if params.alpha == 1:
        return L
    a = params.alpha
    diam = 1.0 if math.isinf(params.t) else s ** (1 / params.t)
    return min(L * diam ** (1 - a), L**a * osc ** (1 - a))


def _supported(f, kinds) -> None:
    if not isinstance(f, kinds):
        raise TypeError(f"no norm bound available for {type(f).__name__}")


def knorm_upper(f, params: ClassParams) -> float:
    """Certified upper bound on the K_{alpha,t} norm of a periodic closed-form integrand."""
    if isinstance(f, ConstantIntegrand):
        return 0.0
    _supported(f, (CosProdIntegrand, FiniteFourierIntegrand))
    if isinstance(f, CosProdIntegrand) and f.kind != "fourier":
        raise TypeError("cosine-kind integrands are not periodic; use cnorm_upper")
    return f._weighted_sum() + _holder_upper(f._lipschitz(), f._oscillation(), f.s, params)


def cnorm_upper(g, params: ClassParams) -> float:
    """Certified upper bound on the C_{alpha,t} norm of a closed-form cosine-series integrand."""
    if isinstance(g, ConstantIntegrand):
        return 0.0
    _supported(g, (CosProdIntegrand, FiniteCosineIntegrand))
    if isinstance(g, CosProdIntegrand) and g.kind != "cosine":
        raise TypeError("fourier-kind integrands belong to K; use knorm_upper")
    holder = _holder_upper(g._lipschitz(), g._oscillation(), g.s, params)
    return g._weighted_sum() + 2**params.alpha * holder


def norm_upper(f, params: ClassParams) -> float:
    if isinstance(f, FiniteCosineIntegrand) or (isinstance(f, CosProdIntegrand) and f.kind == "cosine"):
        return cnorm_upper(f, params)
    return knorm_upper(f, params)


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

@dataclass
class SweepRecord:
    q: int
    N: int
    s: int
    alpha: float
    t: float
    error: float
    bound: float  # error_bound(N, s): worst-case error bound over the unit ball
    norm_upper: float
    holds: bool | None  # error <= bound * norm_upper; None where the error bound is not asserted (k > 1, period-T)

    def to_json(self) -> dict:
        out = asdict(self)
        out["t"] = "inf" if math.isinf(self.t) else self.t
        return out


SWEEP_COLUMNS = ["q", "N", "s", "alpha", "t", "error", "bound", "norm_upper", "holds"]


@dataclass
class SweepResult:
    records: list[SweepRecord]
    slope: float | None  # least-squares slope of log error vs log N; None if undefined

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for r in self.records:
            row = r.to_json()
            w.writerow([_fmt(row[c]) for c in SWEEP_COLUMNS])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"records": [r.to_json() for r in self.records], "slope": self.slope}, indent=2)


def _fmt(v) -> str:
    if isinstance(v, bool) or v is None:
        return "" if v is None else str(v).lower()
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def fit_slope(Ns: Sequence[int], errors: Sequence[float], floor: float = EXACT_FLOOR) -> float | None:
    """Slope of log(error) against log(N) over rows with error above ``floor``."""
    pts = [(math.log(n), math.log(e)) for n, e in zip(Ns, errors) if e > floor]
    if len(pts) < 2 or len({x for x, _ in pts}) < 2:
        return None
    x, y = np.array(pts).T
    return float(np.polyfit(x, y, 1)[0])


def convergence_sweep(
    f,
    q_list: Sequence[int],
    params: ClassParams = ClassParams(),
    construction: str = "size-q",
    T_of_q: Callable[[int], int] | None = None,
    tent_nodes: bool = False,
) -> SweepResult:
    """Integrate f on inversive point sets for each q; compare with the error bound.

    With ``tent_nodes`` the nodes are tent transformed and f should be a
    cosine-class integrand (its C-norm bound is used).  Bounds are asserted
    only for prime q with the size-q construction.
    """
    norm = 0.0 if isinstance(f, ConstantIntegrand) else norm_upper(f, params)
    records = []
    for q in sorted(q_list):
        field: FieldSpec = field_of_order(q)
        if construction == "size-q":
            ps = gen_size_q(SizeQConfig(field, default_S(field, f.s)))
        elif construction == "period-T":
            T = T_of_q(q) if T_of_q else q - 1
            ps = period_t(field, T, f.s)
        else:
            raise ValueError(f"unknown construction {construction!r}")
        nodes = tent_pointset(ps) if tent_nodes else ps
        err = abs(qmc_apply(nodes, f) - f.integral)
        b = error_bound(ps.N, f.s, params)
        applies = field.k == 1 and construction == "size-q"
        holds = bool(err <= b * norm * (1 + 1e-12) + EXACT_FLOOR) if applies else None
        records.append(SweepRecord(q, ps.N, f.s, params.alpha, params.t, float(err), b, norm, holds))
    slope = fit_slope([r.N for r in records], [r.error for r in records])
    return SweepResult(records, slope)


def first_primes_above_powers(lo: int, hi: int) -> list[int]:
    """The first prime >= 2^m for m = lo..hi."""
    return [int(sympy.nextprime(2**m - 1)) for m in range(lo, hi + 1)]
