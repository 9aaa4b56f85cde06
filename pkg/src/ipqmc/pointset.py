"""Explicit inversive vector sets and their digital point sets.

Two constructions over F_q^s with shift set S = (v_1, ..., v_s):

* size q:    z_u = (inv(u + v_1), ..., inv(u + v_s))          for u in F_q
* period T:  z_n = (inv(theta^n + v_1), ..., inv(theta^n + v_s)) for n < T

where inv(0) = 0.  Each field coordinate is mapped to [0, 1) through its
digits c^(j) = Tr(delta_j z) with respect to the dual basis, giving the
exact coordinate sum_j c^(j) p^-j.  Coordinates are kept as integer
numerators over the denominator p^k.

Subsets ``u`` of coordinates are 1-based throughout, as sets of indices in
{1, ..., s}.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .field import (
    DualBasis,
    FieldElement,
    FieldError,
    FieldSpec,
    OrderedBasis,
    dual_basis,
    element_of_order,
    multiplicative_order,
    polynomial_basis,
    tables,
    trace,
)


class PointSetError(ValueError):
    pass


def _check_shift_set(field: FieldSpec, S: Sequence[FieldElement]) -> tuple[FieldElement, ...]:
    S = tuple(S)
    if not 1 <= len(S) <= field.q:
        raise PointSetError(f"need 1 <= s <= q, got s={len(S)}, q={field.q}")
    if any(v.field != field for v in S):
        raise PointSetError("shift set contains elements of another field")
    if len(set(S)) != len(S):
        raise PointSetError("shift set elements must be pairwise distinct")
    return S


def _elements_to_json(elements: Iterable[FieldElement]) -> list[list[int]]:
    return [list(e.coeffs) for e in elements]


def _basis_from_json(field: FieldSpec, obj) -> OrderedBasis | None:
    if obj is None:
        return None
    return OrderedBasis(tuple(field.element(c) for c in obj))


@dataclass(frozen=True)
class SizeQConfig:
    field: FieldSpec
    S: tuple[FieldElement, ...]
    basis: OrderedBasis | None = None

    def __post_init__(self):
        object.__setattr__(self, "S", _check_shift_set(self.field, self.S))

    @property
    def s(self) -> int:
        return len(self.S)

    def to_json(self) -> dict:
        return {
            "construction": "size-q",
            "field": self.field.to_json(),
            "S": _elements_to_json(self.S),
            "basis": None if self.basis is None else _elements_to_json(self.basis.elements),
        }

    @classmethod
    def from_json(cls, obj: dict) -> SizeQConfig:
        f = FieldSpec.from_json(obj["field"])
        return cls(f, tuple(f.element(c) for c in obj["S"]), _basis_from_json(f, obj.get("basis")))


@dataclass(frozen=True)
class PeriodTConfig:
    field: FieldSpec
    T: int
    theta: FieldElement
    S: tuple[FieldElement, ...]
    basis: OrderedBasis | None = None

    def __post_init__(self):
        object.__setattr__(self, "S", _check_shift_set(self.field, self.S))
        if self.T < 1 or (self.field.q - 1) % self.T:
            raise PointSetError(f"order {self.T} does not divide q-1 = {self.field.q - 1}")
        if self.theta.field != self.field or self.theta.is_zero():
            raise PointSetError("theta must be a nonzero element of the field")
        if multiplicative_order(self.theta) != self.T:
            raise PointSetError(f"theta = {self.theta} does not have multiplicative order {self.T}")

    @property
    def s(self) -> int:
        return len(self.S)

    def to_json(self) -> dict:
        return {
            "construction": "period-T",
            "field": self.field.to_json(),
            "T": self.T,
            "theta": list(self.theta.coeffs),
            "S": _elements_to_json(self.S),
            "basis": None if self.basis is None else _elements_to_json(self.basis.elements),
        }

    @classmethod
    def from_json(cls, obj: dict) -> PeriodTConfig:
        f = FieldSpec.from_json(obj["field"])
        return cls(
            f,
            int(obj["T"]),
            f.element(obj["theta"]),
            tuple(f.element(c) for c in obj["S"]),
            _basis_from_json(f, obj.get("basis")),
        )


def config_from_json(obj: dict) -> SizeQConfig | PeriodTConfig:
    if obj.get("construction") == "period-T":
        return PeriodTConfig.from_json(obj)
    return SizeQConfig.from_json(obj)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class DigitalPointSet:
    """N points in [0, 1)^s with exact coordinates numerators / p^k.

    ``digits[n, i, j]`` is digit j+1 of coordinate i of point n, and
    ``vectors[n, i]`` the index of the underlying field element z_{n,i}
    (kept so that character sums can be evaluated on the same set).
    """

    field: FieldSpec
    digits: np.ndarray
    numerators: np.ndarray
    vectors: np.ndarray
    construction: str = "size-q"
    meta: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        for name in ("digits", "numerators", "vectors"):
            object.__setattr__(self, name, _frozen(np.asarray(getattr(self, name), dtype=np.int64)))
        q = self.field.q
        if self.numerators.ndim != 2 or self.digits.shape != self.numerators.shape + (self.field.k,):
            raise PointSetError("inconsistent point-set array shapes")
        if self.numerators.size and (self.numerators.min() < 0 or self.numerators.max() >= q):
            raise PointSetError("numerators must lie in [0, p^k)")
        if not np.array_equal(radix_value(self.digits, self.field.p), self.numerators):
            raise PointSetError("numerators disagree with digits")

    @property
    def p(self) -> int:
        return self.field.p

    @property
    def k(self) -> int:
        return self.field.k

    @property
    def denominator(self) -> int:
        return self.field.q

    @property
    def N(self) -> int:
        return self.numerators.shape[0]

    @property
    def s(self) -> int:
        return self.numerators.shape[1]

    @property
    def points(self) -> np.ndarray:
        """Float view of the coordinates, shape (N, s)."""
        return self.numerators / self.denominator

    def fractions(self) -> list[tuple[Fraction, ...]]:
        d = self.denominator
        return [tuple(Fraction(int(m), d) for m in row) for row in self.numerators]

    def __eq__(self, other):
        if not isinstance(other, DigitalPointSet):
            return NotImplemented
        return (
            self.field == other.field
            and np.array_equal(self.digits, other.digits)
            and np.array_equal(self.vectors, other.vectors)
        )

    __hash__ = None


def radix_value(digits: np.ndarray, p: int) -> np.ndarray:
    """sum_j digits[..., j] * p^(k-1-j): the numerator over p^k."""
    k = digits.shape[-1]
    weights = p ** np.arange(k - 1, -1, -1, dtype=np.int64)
    return digits @ weights


def digits_of(z: FieldElement, dual: DualBasis) -> tuple[int, ...]:
    if dual.field != z.field:
        raise FieldError("element and dual basis belong to different fields")
    return tuple(trace(d * z) for d in dual.elements)


def digit_table(field: FieldSpec, dual: DualBasis) -> np.ndarray:
    """Digits of every field element, shape (q, k), rows in index order."""
    tab = tables(field)
    idx = np.arange(field.q, dtype=np.int64)
    cols = [tab.trace[tab.mul(d.index, idx)] for d in dual.elements]
    return np.stack(cols, axis=1)


def to_digital(
    field: FieldSpec,
    vectors: np.ndarray,
    basis: OrderedBasis | None = None,
    construction: str = "custom",
    meta: dict | None = None,
) -> DigitalPointSet:
    """Digital point set of an (N, s) array of field-element indices."""
    vectors = np.asarray(vectors, dtype=np.int64)
    dual = dual_basis(field, basis)
    digits = digit_table(field, dual)[vectors]
    return DigitalPointSet(field, digits, radix_value(digits, field.p), vectors, construction, dict(meta or {}))


def size_q_vectors(config: SizeQConfig) -> np.ndarray:
    tab = tables(config.field)
    u = np.arange(config.field.q, dtype=np.int64)[:, None]
    shifts = np.array([v.index for v in config.S], dtype=np.int64)[None, :]
    return tab.inv(tab.add(u, shifts))


def period_t_vectors(config: PeriodTConfig, start: int = 0) -> np.ndarray:
    tab = tables(config.field)
    powers = tab.power(config.theta.index, np.arange(start, start + config.T))[:, None]
    shifts = np.array([v.index for v in config.S], dtype=np.int64)[None, :]
    return tab.inv(tab.add(powers, shifts))


def _basis_meta(basis: OrderedBasis | None) -> list[str]:
    return ["polynomial"] if basis is None else [str(b) for b in basis.elements]


def gen_size_q(config: SizeQConfig) -> DigitalPointSet:
    meta = {"S": [str(v) for v in config.S], "basis": _basis_meta(config.basis)}
    return to_digital(config.field, size_q_vectors(config), config.basis, "size-q", meta)


def gen_period_t(config: PeriodTConfig) -> DigitalPointSet:
    meta = {
        "S": [str(v) for v in config.S],
        "T": config.T,
        "theta": str(config.theta),
        "basis": _basis_meta(config.basis),
    }
    return to_digital(config.field, period_t_vectors(config), config.basis, "period-T", meta)


def normalize_subset(u: Iterable[int], s: int) -> tuple[int, ...]:
    """Sorted, validated 1-based index subset of {1, ..., s}."""
    u = tuple(sorted(set(int(i) for i in u)))
    if not u:
        raise PointSetError("index subset must be nonempty")
    if u[0] < 1 or u[-1] > s:
        raise PointSetError(f"index subset {u} not contained in [1, {s}]")
    return u


def project(ps: DigitalPointSet, u: Iterable[int]) -> DigitalPointSet:
    cols = [i - 1 for i in normalize_subset(u, ps.s)]
    return DigitalPointSet(
        ps.field, ps.digits[:, cols], ps.numerators[:, cols], ps.vectors[:, cols], ps.construction, ps.meta
    )


def default_S(field: FieldSpec, s: int) -> tuple[FieldElement, ...]:
    if not 1 <= s <= field.q:
        raise PointSetError(f"need 1 <= s <= q, got s={s}, q={field.q}")
    return tuple(FieldElement.from_index(field, i) for i in range(s))


def size_q(field: FieldSpec, s: int, basis: OrderedBasis | None = None) -> DigitalPointSet:
    """Size-q set with the default shift set."""
    return gen_size_q(SizeQConfig(field, default_S(field, s), basis))


def period_t(field: FieldSpec, T: int, s: int, basis: OrderedBasis | None = None) -> DigitalPointSet:
    """Period-T set with the default shift set and canonical theta."""
    return gen_period_t(PeriodTConfig(field, T, element_of_order(field, T), default_S(field, s), basis))


__all__ = [
    "DigitalPointSet",
    "PeriodTConfig",
    "PointSetError",
    "SizeQConfig",
    "config_from_json",
    "default_S",
    "digit_table",
    "digits_of",
    "gen_period_t",
    "gen_size_q",
    "normalize_subset",
    "period_t",
    "period_t_vectors",
    "polynomial_basis",
    "project",
    "radix_value",
    "size_q",
    "size_q_vectors",
    "to_digital",
]
