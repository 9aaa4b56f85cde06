"""Additive character sums over projected inversive vectors.

psi(z) = exp(2 pi i Tr(z) / p) is the canonical additive character of F_q.
The quantity of interest for a vector set {z_n} and a coordinate subset u is

    max over nonzero w in F_q^|u| of |sum_n psi(w . z_{n,u})|,

found here by exhaustive enumeration of w.  Because the trace is Z_p-linear,
Tr(w . z) = sum_i Tr(w_i z_i) mod p, so a (q, N) table of Tr(w_i z_{n,i})
per coordinate is enough to evaluate every candidate w with integer adds.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .field import FieldElement, FieldSpec, tables, trace
from .pointset import DigitalPointSet, normalize_subset

DEFAULT_BUDGET = 2**24
TOLERANCE = 1e-9
# bound on the size of one intermediate (candidates x N) block
_CHUNK_ELEMS = 2**22


class OracleTooLarge(RuntimeError):
    pass


def budget_from_env(default: int = DEFAULT_BUDGET) -> int:
    value = os.environ.get("IPQMC_BUDGET")
    return int(value) if value else default


def psi(z: FieldElement) -> complex:
    p = z.field.p
    return complex(np.exp(2j * np.pi * trace(z) / p))


def bound_size_q(r: int, q: int) -> float:
    """(2r - 2) sqrt(q) + r + 1."""
    if r < 1:
        raise ValueError("|u| must be >= 1")
    return (2 * r - 2) * math.sqrt(q) + r + 1


def bound_period_t(r: int, q: int) -> float:
    """2r sqrt(q) + r."""
    if r < 1:
        raise ValueError("|u| must be >= 1")
    return 2 * r * math.sqrt(q) + r


def charsum_bound(construction: str, r: int, q: int) -> float:
    if construction == "size-q":
        return bound_size_q(r, q)
    if construction == "period-T":
        return bound_period_t(r, q)
    raise ValueError(f"no character-sum bound for construction {construction!r}")


@dataclass
class CharSumReport:
    q: int
    u: tuple[int, ...]
    N: int
    construction: str
    max_abs: float
    argmax_w: tuple[int, ...]
    bound: float
    holds: bool
    exhaustive: bool = True

    def to_json(self) -> dict:
        out = asdict(self)
        out["u"] = list(self.u)
        out["argmax_w"] = list(self.argmax_w)
        return out


def _coerce_vectors(vectors, field: FieldSpec | None) -> tuple[FieldSpec, np.ndarray]:
    if isinstance(vectors, DigitalPointSet):
        return vectors.field, vectors.vectors
    rows = list(vectors)
    if rows and isinstance(rows[0][0], FieldElement):
        f = rows[0][0].field
        if field is not None and field != f:
            raise ValueError("vectors belong to a different field")
        return f, np.array([[z.index for z in row] for row in rows], dtype=np.int64)
    if field is None:
        raise ValueError("field is required for index-valued vectors")
    arr = np.asarray(rows, dtype=np.int64)
    if arr.ndim != 2:
        raise ValueError("vectors must be an (N, s) array")
    return field, arr


def _w_index(w, field: FieldSpec) -> np.ndarray:
    out = []
    for c in w:
        if isinstance(c, FieldElement):
            if c.field != field:
                raise ValueError("w has components from another field")
            out.append(c.index)
        else:
            out.append(int(c))
    return np.array(out, dtype=np.int64)


def _trace_products(field: FieldSpec, column: np.ndarray) -> np.ndarray:
    """Table T[w, n] = Tr(w * z_n) for every w in F_q (index order)."""
    tab = tables(field)
    w = np.arange(field.q, dtype=np.int64)[:, None]
    return tab.trace[tab.mul(w, column[None, :])]


def charsum(vectors, u: Sequence[int], w, field: FieldSpec | None = None) -> complex:
    """sum_n psi(sum_i w_i z_{n, u_i}) for 1-based coordinate subset u."""
    field, vec = _coerce_vectors(vectors, field)
    u = normalize_subset(u, vec.shape[1])
    w = _w_index(w, field)
    if len(w) != len(u):
        raise ValueError(f"w has {len(w)} components but |u| = {len(u)}")
    tab = tables(field)
    acc = np.zeros(vec.shape[0], dtype=np.int64)
    for wi, i in zip(w, u):
        acc = tab.add(acc, tab.mul(wi, vec[:, i - 1]))
    phases = np.exp(2j * np.pi * tab.trace[acc] / field.p)
    return complex(phases.sum())


def max_abs_charsum(
    vectors,
    u: Sequence[int],
    construction: str = "size-q",
    field: FieldSpec | None = None,
    budget: int | None = None,
    subsample: bool = False,
    rng: np.random.Generator | None = None,
) -> CharSumReport:
    """Maximum of |charsum| over all nonzero w in F_q^|u|.

    With more than ``budget`` candidates an ``OracleTooLarge`` is raised,
    unless ``subsample`` is set, in which case ``budget`` uniformly drawn
    nonzero w are tried and the report is marked non-exhaustive.
    """
    field, vec = _coerce_vectors(vectors, field)
    u = normalize_subset(u, vec.shape[1])
    q, p, r, N = field.q, field.p, len(u), vec.shape[0]
    budget = budget_from_env() if budget is None else budget
    n_cand = q**r - 1
    bound = charsum_bound(construction, r, q) if construction in ("size-q", "period-T") else math.nan
    traces = [_trace_products(field, vec[:, i - 1]) for i in u]
    roots = np.exp(2j * np.pi * np.arange(p) / p)

    if n_cand > budget:
        if not subsample:
            raise OracleTooLarge(f"oracle too large: {n_cand} candidates w exceed budget {budget}")
        rng = rng or np.random.default_rng(0)
        ws = rng.integers(0, q, size=(budget, r))
        ws = ws[ws.any(axis=1)]
        best, best_w = _scan(traces, ws, roots, p)
        exhaustive = False
    else:
        best, best_w = _scan_all(traces, q, r, N, roots, p)
        exhaustive = True

    holds = bool(best <= bound + TOLERANCE) if not math.isnan(bound) else False
    return CharSumReport(q, u, N, construction, best, tuple(int(c) for c in best_w), bound, holds, exhaustive)


def _scan(traces, ws: np.ndarray, roots: np.ndarray, p: int) -> tuple[float, np.ndarray]:
    best, best_w = -1.0, ws[0] if len(ws) else None
    N = traces[0].shape[1]
    step = max(1, _CHUNK_ELEMS // max(N, 1))
    for start in range(0, len(ws), step):
        block = ws[start : start + step]
        acc = np.zeros((len(block), N), dtype=np.int64)
        for i, tr in enumerate(traces):
            acc += tr[block[:, i]]
        vals = np.abs(roots[acc % p].sum(axis=1))
        j = int(np.argmax(vals))
        if vals[j] > best:
            best, best_w = float(vals[j]), block[j]
    return best, best_w


def _scan_all(traces, q: int, r: int, N: int, roots: np.ndarray, p: int) -> tuple[float, np.ndarray]:
    # w enumerated lexicographically, first component slowest; w = 0 skipped
    best, best_w = -1.0, None
    tail_r = r
    while tail_r > 0 and q**tail_r * N > _CHUNK_ELEMS:
        tail_r -= 1
    head_r = r - tail_r
    if tail_r:
        tail = np.array(list(itertools.product(range(q), repeat=tail_r)), dtype=np.int64)
        tail_acc = np.zeros((len(tail), N), dtype=np.int64)
        for i in range(tail_r):
            tail_acc += traces[head_r + i][tail[:, i]]
    else:
        tail = np.zeros((1, 0), dtype=np.int64)
        tail_acc = np.zeros((1, N), dtype=np.int64)
    for head in itertools.product(range(q), repeat=head_r):
        head_acc = np.zeros(N, dtype=np.int64)
        for i, h in enumerate(head):
            head_acc += traces[i][h]
        vals = np.abs(roots[(tail_acc + head_acc) % p].sum(axis=1))
        if not any(head):
            vals[0] = -1.0  # w = 0
        j = int(np.argmax(vals))
        if vals[j] > best:
            best, best_w = float(vals[j]), np.concatenate([np.array(head, dtype=np.int64), tail[j]])
    return best, best_w
