"""Arithmetic in GF(p^k).

Elements are coefficient vectors over Z_p in the polynomial basis
``1, x, ..., x^(k-1)``, reduced modulo a monic irreducible polynomial.
Polynomials are plain coefficient lists, constant term first.

Every element also has an integer *index* ``c0 + c1*p + ... + c_{k-1}*p^(k-1)``.
Index order is the canonical enumeration order used throughout the package
(constant coefficient varies fastest, index 0 is the zero element).  The
vectorised helpers at the bottom of the module work on numpy arrays of
indices and are what the point-set and character-sum code use internally.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import sympy

MAX_Q = 2**20


class FieldError(ValueError):
    pass


# ---------------------------------------------------------------------------
# polynomials over Z_p
# ---------------------------------------------------------------------------

def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_divmod(a: Sequence[int], b: Sequence[int], p: int) -> tuple[list[int], list[int]]:
    a = _trim([c % p for c in a])
    b = _trim([c % p for c in b])
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    inv_lead = pow(b[-1], -1, p)
    quot = [0] * max(len(a) - len(b) + 1, 0)
    while len(a) >= len(b):
        shift = len(a) - len(b)
        c = a[-1] * inv_lead % p
        quot[shift] = c
        for i, bc in enumerate(b):
            a[shift + i] = (a[shift + i] - c * bc) % p
        _trim(a)
    return quot, a


def _poly_mul(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ac in enumerate(a):
        if ac:
            for j, bc in enumerate(b):
                out[i + j] += ac * bc
    return [c % p for c in out]


def _poly_sub(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    n = max(len(a), len(b))
    a = list(a) + [0] * (n - len(a))
    b = list(b) + [0] * (n - len(b))
    return _trim([(x - y) % p for x, y in zip(a, b)])


def _poly_inverse(a: Sequence[int], mod: Sequence[int], p: int) -> list[int]:
    """Inverse of ``a`` modulo ``mod`` by the extended Euclidean algorithm."""
    r0, r1 = _trim(list(mod)), _trim([c % p for c in a])
    t0, t1 = [], [1]
    while r1:
        quot, rem = _poly_divmod(r0, r1, p)
        r0, r1 = r1, rem
        t0, t1 = t1, _poly_sub(t0, _poly_mul(quot, t1, p), p)
    if len(r0) != 1:
        raise FieldError("element is not invertible")
    c = pow(r0[0], -1, p)
    return [x * c % p for x in t0]


def _poly_powmod(a: Sequence[int], n: int, mod: Sequence[int], p: int) -> list[int]:
    result, base = [1], _poly_divmod(a, mod, p)[1]
    while n:
        if n & 1:
            result = _poly_divmod(_poly_mul(result, base, p), mod, p)[1]
        base = _poly_divmod(_poly_mul(base, base, p), mod, p)[1]
        n >>= 1
    return result


def _poly_gcd(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    a, b = _trim([c % p for c in a]), _trim([c % p for c in b])
    while b:
        a, b = b, _poly_divmod(a, b, p)[1]
    return a


def _gf2_mulmod(a: int, b: int, mod: int, deg: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        b >>= 1
        a <<= 1
        if a >> deg & 1:
            a ^= mod
    return out


def _gf2_gcd(a: int, b: int) -> int:
    while b:
        while a and a.bit_length() >= b.bit_length():
            a ^= b << (a.bit_length() - b.bit_length())
        a, b = b, a
    return a


def _is_irreducible_gf2(poly: Sequence[int]) -> bool:
    # polynomials over Z_2 packed into int bits, bit i = coefficient of x^i
    mod = sum(1 << i for i, c in enumerate(poly) if c)
    n = len(poly) - 1
    frob = [0b10]
    for _ in range(n):
        frob.append(_gf2_mulmod(frob[-1], frob[-1], mod, n))
    if frob[n] != 0b10:
        return False
    return all(_gf2_gcd(mod, frob[n // r] ^ 0b10) == 1 for r in sympy.primefactors(n))


def is_irreducible(poly: Sequence[int], p: int) -> bool:
    """Rabin's test: x^(p^n) = x mod f, and gcd(x^(p^(n/r)) - x, f) = 1 for primes r | n."""
    poly = _trim([c % p for c in poly])
    n = len(poly) - 1
    if n < 1:
        return False
    if n == 1:
        return True
    if poly[0] == 0:
        return False
    if p == 2 and n > 7:
        return _is_irreducible_gf2(poly)
    # cheap rejection of the common case before the Frobenius powers
    if not is_irreducible_trial(poly, p, max_degree=min(n // 2, 3)):
        return False
    if n <= 7:
        return True
    frob = [[0, 1]]  # frob[i] = x^(p^i) mod f
    for _ in range(n):
        frob.append(_poly_powmod(frob[-1], p, poly, p))
    if _poly_sub(frob[n], [0, 1], p):
        return False
    for r in sympy.primefactors(n):
        g = _poly_gcd(poly, _poly_sub(frob[n // r], [0, 1], p), p)
        if len(g) > 1:
            return False
    return True


def is_irreducible_trial(poly: Sequence[int], p: int, max_degree: int | None = None) -> bool:
    """Trial division by every monic polynomial of degree 1..deg//2."""
    poly = _trim([c % p for c in poly])
    deg = len(poly) - 1
    if deg < 1:
        return False
    top = deg // 2 if max_degree is None else max_degree
    for d in range(1, top + 1):
        for low in itertools.product(range(p), repeat=d):
            _, rem = _poly_divmod(poly, list(low) + [1], p)
            if not rem:
                return False
    return True


def smallest_irreducible(p: int, k: int) -> tuple[int, ...]:
    """Lexicographically smallest monic irreducible of degree k, c0 compared first."""
    if k == 1:
        return (0, 1)
    for low in itertools.product(range(p), repeat=k):
        cand = list(low) + [1]
        if is_irreducible(cand, p):
            return tuple(cand)
    raise FieldError(f"no irreducible polynomial of degree {k} over Z_{p}")  # pragma: no cover


def prime_power(q: int) -> tuple[int, int] | None:
    """Return ``(p, k)`` with ``q == p**k`` and p prime, or None."""
    if q < 2:
        return None
    if sympy.isprime(q):
        return q, 1
    pp = sympy.perfect_power(q)
    if not pp:
        return None
    base, exp = pp
    # perfect_power gives the largest exponent, so the base is prime when q is a prime power
    if sympy.isprime(base):
        return int(base), int(exp)
    return None


# ---------------------------------------------------------------------------
# field and elements
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FieldSpec:
    """The finite field GF(p^k) = Z_p[x] / (modulus)."""

    p: int
    k: int
    modulus: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "modulus", tuple(int(c) for c in self.modulus))
        if not sympy.isprime(self.p):
            raise FieldError(f"{self.p} is not prime")
        if self.k < 1:
            raise FieldError("extension degree must be >= 1")
        if len(self.modulus) != self.k + 1 or self.modulus[-1] != 1:
            raise FieldError("modulus must be monic of degree k")
        if any(not 0 <= c < self.p for c in self.modulus):
            raise FieldError("modulus coefficients must lie in [0, p)")
        if self.k > 1 and not is_irreducible(self.modulus, self.p):
            raise FieldError(f"modulus {self.modulus} is reducible over Z_{self.p}")

    @property
    def q(self) -> int:
        return self.p**self.k

    def element(self, value: int | Sequence[int]) -> FieldElement:
        """Element from an index or from a coefficient list (constant term first)."""
        if isinstance(value, (int, np.integer)):
            return FieldElement.from_index(self, int(value))
        coeffs = [int(c) % self.p for c in value]
        if len(coeffs) > self.k:
            _, coeffs = _poly_divmod(coeffs, self.modulus, self.p)
        return FieldElement(self, tuple(coeffs) + (0,) * (self.k - len(coeffs)))

    @property
    def zero(self) -> FieldElement:
        return FieldElement(self, (0,) * self.k)

    @property
    def one(self) -> FieldElement:
        return FieldElement(self, (1,) + (0,) * (self.k - 1))

    def to_json(self) -> dict:
        return {"p": self.p, "k": self.k, "modulus": list(self.modulus)}

    @classmethod
    def from_json(cls, obj: dict) -> FieldSpec:
        return cls(int(obj["p"]), int(obj["k"]), tuple(obj["modulus"]))

    def __str__(self):
        return f"GF({self.p}^{self.k})" if self.k > 1 else f"GF({self.p})"


def make_field(p: int, k: int = 1, max_q: int = MAX_Q) -> FieldSpec:
    if not sympy.isprime(p):
        raise FieldError(f"{p} is not prime")
    if k < 1:
        raise FieldError("extension degree must be >= 1")
    if p**k > max_q:
        raise FieldError(f"field too large: {p}^{k} exceeds cap {max_q}")
    return FieldSpec(p, k, smallest_irreducible(p, k))


def field_of_order(q: int, max_q: int = MAX_Q) -> FieldSpec:
    pk = prime_power(q)
    if pk is None:
        raise FieldError(f"{q} is not a prime power")
    return make_field(*pk, max_q=max_q)


@dataclass(frozen=True)
class FieldElement:
    field: FieldSpec
    coeffs: tuple[int, ...]

    def __post_init__(self):
        if len(self.coeffs) != self.field.k:
            raise FieldError("coefficient vector must have length k")
        if any(not 0 <= c < self.field.p for c in self.coeffs):
            raise FieldError("coefficients must lie in [0, p)")

    @classmethod
    def from_index(cls, field: FieldSpec, index: int) -> FieldElement:
        if not 0 <= index < field.q:
            raise FieldError(f"index {index} out of range for {field}")
        coeffs = []
        for _ in range(field.k):
            index, c = divmod(index, field.p)
            coeffs.append(c)
        return cls(field, tuple(coeffs))

    @property
    def index(self) -> int:
        out = 0
        for c in reversed(self.coeffs):
            out = out * self.field.p + c
        return out

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def _check(self, other: FieldElement) -> None:
        if not isinstance(other, FieldElement):
            raise TypeError("field element expected")
        if other.field != self.field:
            raise FieldError("operands belong to different fields")

    def __add__(self, other: FieldElement) -> FieldElement:
        self._check(other)
        p = self.field.p
        return FieldElement(self.field, tuple((a + b) % p for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> FieldElement:
        p = self.field.p
        return FieldElement(self.field, tuple(-a % p for a in self.coeffs))

    def __sub__(self, other: FieldElement) -> FieldElement:
        return self + (-other)

    def __mul__(self, other: FieldElement) -> FieldElement:
        self._check(other)
        f = self.field
        if f.k == 1:
            return FieldElement(f, (self.coeffs[0] * other.coeffs[0] % f.p,))
        prod = _poly_mul(self.coeffs, other.coeffs, f.p)
        _, rem = _poly_divmod(prod, f.modulus, f.p)
        return FieldElement(f, tuple(rem) + (0,) * (f.k - len(rem)))

    def __pow__(self, n: int) -> FieldElement:
        if n < 0:
            return inv_or_zero(self) ** (-n)
        result, base = self.field.one, self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __str__(self):
        if self.field.k == 1:
            return str(self.coeffs[0])
        terms = []
        for i, c in enumerate(self.coeffs):
            if not c:
                continue
            mono = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
            if i == 0:
                terms.append(str(c))
            else:
                terms.append(mono if c == 1 else f"{c}{mono}")
        return "+".join(terms) if terms else "0"

    def __repr__(self):
        return f"FieldElement({self}, {self.field})"


def add(a: FieldElement, b: FieldElement) -> FieldElement:
    return a + b


def mul(a: FieldElement, b: FieldElement) -> FieldElement:
    return a * b


def neg(a: FieldElement) -> FieldElement:
    return -a


def inv_or_zero(z: FieldElement) -> FieldElement:
    """z^-1 for nonzero z, and 0 for z = 0."""
    f = z.field
    if z.is_zero():
        return z
    if f.k == 1:
        return FieldElement(f, (pow(z.coeffs[0], -1, f.p),))
    inv = _poly_inverse(z.coeffs, f.modulus, f.p)
    return FieldElement(f, tuple(inv) + (0,) * (f.k - len(inv)))


def trace(z: FieldElement) -> int:
    """Absolute trace z + z^p + ... + z^(p^(k-1)), as an integer in [0, p)."""
    acc, conj = z, z
    for _ in range(z.field.k - 1):
        conj = conj ** z.field.p
        acc = acc + conj
    if any(acc.coeffs[1:]):  # pragma: no cover - trace always lands in Z_p
        raise FieldError("trace left the prime field")
    return acc.coeffs[0]


def enumerate_elements(field: FieldSpec) -> list[FieldElement]:
    return [FieldElement.from_index(field, i) for i in range(field.q)]


# ---------------------------------------------------------------------------
# bases
# ---------------------------------------------------------------------------

def _coeff_matrix(elements: Sequence[FieldElement]) -> sympy.Matrix:
    return sympy.Matrix([list(e.coeffs) for e in elements])


@dataclass(frozen=True)
class OrderedBasis:
    elements: tuple[FieldElement, ...]

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        if not self.elements:
            raise FieldError("empty basis")
        f = self.elements[0].field
        if len(self.elements) != f.k or any(e.field != f for e in self.elements):
            raise FieldError("a basis needs exactly k elements of one field")
        if _coeff_matrix(self.elements).det() % f.p == 0:
            raise FieldError("basis elements are linearly dependent over Z_p")

    @property
    def field(self) -> FieldSpec:
        return self.elements[0].field

    def combine(self, digits: Sequence[int]) -> FieldElement:
        """sum_j digits[j] * beta_j."""
        acc = self.field.zero
        for d, b in zip(digits, self.elements):
            acc = acc + self.field.element([d]) * b
        return acc


@dataclass(frozen=True)
class DualBasis:
    elements: tuple[FieldElement, ...]

    @property
    def field(self) -> FieldSpec:
        return self.elements[0].field


def polynomial_basis(field: FieldSpec) -> OrderedBasis:
    return OrderedBasis(tuple(field.element([0] * i + [1]) for i in range(field.k)))


def dual_basis(field: FieldSpec, basis: OrderedBasis | None = None) -> DualBasis:
    """The unique basis {delta_j} with Tr(delta_j beta_i) = [i == j].

    Writing delta_j = sum_l A[j, l] beta_l, the Kronecker condition reads
    A G = I with Gram matrix G[l, i] = Tr(beta_l beta_i), so A = G^-1 mod p.
    """
    if basis is None:
        basis = polynomial_basis(field)
    if basis.field != field:
        raise FieldError("basis belongs to a different field")
    betas = basis.elements
    k, p = field.k, field.p
    gram = sympy.Matrix(k, k, lambda i, j: trace(betas[i] * betas[j]))
    try:
        a = gram.inv_mod(p)
    except ValueError as exc:
        raise FieldError("degenerate basis: Gram matrix is singular mod p") from exc
    deltas = []
    for j in range(k):
        acc = field.zero
        for l in range(k):
            acc = acc + field.element([int(a[j, l])]) * betas[l]
        deltas.append(acc)
    return DualBasis(tuple(deltas))


# ---------------------------------------------------------------------------
# multiplicative structure
# ---------------------------------------------------------------------------

def _is_generator(g: FieldElement, factors: Iterable[int]) -> bool:
    n = g.field.q - 1
    return all(g ** (n // r) != g.field.one for r in factors)


def generator(field: FieldSpec) -> FieldElement:
    """First generator of the multiplicative group in enumeration order."""
    factors = sympy.primefactors(field.q - 1)
    for i in range(1, field.q):
        g = FieldElement.from_index(field, i)
        if _is_generator(g, factors):
            return g
    raise FieldError("no generator found")  # pragma: no cover


def multiplicative_order(z: FieldElement) -> int:
    if z.is_zero():
        raise FieldError("zero has no multiplicative order")
    n = z.field.q - 1
    order = n
    for r in sympy.primefactors(n):
        while order % r == 0 and z ** (order // r) == z.field.one:
            order //= r
    return order


def element_of_order(field: FieldSpec, T: int) -> FieldElement:
    if T < 1 or (field.q - 1) % T:
        raise FieldError(f"order {T} does not divide q-1 = {field.q - 1}")
    theta = generator(field) ** ((field.q - 1) // T)
    if theta**T != field.one or any(theta ** (T // r) == field.one for r in sympy.primefactors(T)):
        raise FieldError("element order check failed")  # pragma: no cover
    return theta


# ---------------------------------------------------------------------------
# vectorised index arithmetic
# ---------------------------------------------------------------------------

class FieldTables:
    """Lookup tables for bulk arithmetic on element indices."""

    def __init__(self, field: FieldSpec):
        self.field = field
        p, k, q = field.p, field.k, field.q
        idx = np.arange(q, dtype=np.int64)
        self.place = p ** np.arange(k, dtype=np.int64)
        self.coeffs = (idx[:, None] // self.place[None, :]) % p

        mono_traces = np.array([trace(field.element([0] * i + [1])) for i in range(k)], dtype=np.int64)
        self.trace = self.coeffs @ mono_traces % p

        g = generator(field)
        self.exp = self._power_table(g)
        self.log = np.full(q, -1, dtype=np.int64)
        self.log[self.exp] = np.arange(q - 1, dtype=np.int64)

    def _power_table(self, g: FieldElement) -> np.ndarray:
        f = self.field
        p, k, n = f.p, f.k, f.q - 1
        # column i of mult holds the coefficients of g * x^i
        mult = np.array([(g * f.element([0] * i + [1])).coeffs for i in range(k)], dtype=np.int64).T
        block = min(n, 1024)
        first = np.empty((k, block), dtype=np.int64)
        v = np.array(f.one.coeffs, dtype=np.int64)
        for i in range(block):
            first[:, i] = v
            v = mult @ v % p
        step = np.eye(k, dtype=np.int64)
        base, e = mult.copy(), block
        while e:
            if e & 1:
                step = step @ base % p
            base = base @ base % p
            e >>= 1
        cols, cur = [], first
        for _ in range(-(-n // block)):
            cols.append(cur)
            cur = step @ cur % p
        powers = np.concatenate(cols, axis=1)[:, :n]
        return self.place @ powers

    def add(self, a, b):
        a, b = np.asarray(a), np.asarray(b)
        if self.field.k == 1:
            return (a + b) % self.field.p
        return ((self.coeffs[a] + self.coeffs[b]) % self.field.p) @ self.place

    def mul(self, a, b):
        a, b = np.asarray(a), np.asarray(b)
        if self.field.k == 1:
            return a * b % self.field.p
        out = self.exp[(self.log[a] + self.log[b]) % (self.field.q - 1)]
        return np.where((a == 0) | (b == 0), 0, out)

    def inv(self, a):
        a = np.asarray(a)
        out = self.exp[(-self.log[a]) % (self.field.q - 1)]
        return np.where(a == 0, 0, out)

    def power(self, a: int, n):
        """a^n for a single nonzero index a and an array of exponents n."""
        return self.exp[(self.log[a] * np.asarray(n, dtype=np.int64)) % (self.field.q - 1)]


@functools.lru_cache(maxsize=32)
def tables(field: FieldSpec) -> FieldTables:
    return FieldTables(field)
