"""Arithmetic over finite fields GF(p^k).

Elements are integers in ``[0, p**k)``.  For extension fields the base-p
digits of an element, least significant first, are the coefficients of the
polynomial residue it represents, so in GF(4) with x^2 + x + 1 the element
``0b10`` is ``x`` and ``0b11`` is ``x + 1``.

Every field used here is small (at most 1024 elements), so addition and
multiplication are served from dense tables.  The tables also drive the
vectorised helpers on :class:`GF` that the codecs use on numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache, reduce
from typing import Sequence

import numpy as np

from .errors import SpecMismatchError, ValidationError

MAX_ORDER = 1024

# Conway polynomials, coefficients listed from x^0 up to the leading 1.
DEFAULT_POLYS: dict[tuple[int, int], tuple[int, ...]] = {
    (2, 2): (1, 1, 1),
    (2, 3): (1, 1, 0, 1),
    (2, 4): (1, 1, 0, 0, 1),
    (2, 5): (1, 0, 1, 0, 0, 1),
    (2, 6): (1, 1, 0, 1, 1, 0, 1),
    (2, 7): (1, 1, 0, 0, 0, 0, 0, 1),
    (2, 8): (1, 0, 1, 1, 1, 0, 0, 0, 1),
    (3, 2): (2, 2, 1),
    (3, 3): (1, 2, 0, 1),
    (3, 4): (2, 0, 0, 2, 1),
    (3, 5): (1, 2, 0, 0, 0, 1),
    (5, 2): (2, 4, 1),
    (5, 3): (3, 3, 0, 1),
    (7, 2): (3, 6, 1),
    (11, 2): (2, 7, 1),
    (13, 2): (2, 12, 1),
}


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def prime_power(n: int) -> tuple[int, int] | None:
    """Return ``(p, k)`` with ``n == p**k`` for prime p, else None."""
    if n < 2:
        return None
    for p in range(2, n + 1):
        if n % p == 0:
            if not is_prime(p):
                return None
            k, rest = 0, n
            while rest % p == 0:
                rest //= p
                k += 1
            return (p, k) if rest == 1 else None
    return None


def _poly_mulmod(a: Sequence[int], b: Sequence[int], poly: Sequence[int], p: int) -> list[int]:
    k = len(poly) - 1
    prod = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] = (prod[i + j] + ai * bj) % p
    # poly is monic: x^k = -(poly[0] + ... + poly[k-1] x^(k-1))
    for deg in range(len(prod) - 1, k - 1, -1):
        c = prod[deg]
        if c:
            prod[deg] = 0
            for i in range(k):
                prod[deg - k + i] = (prod[deg - k + i] - c * poly[i]) % p
    return (prod + [0] * k)[:k]


def _digits(x: int, p: int, k: int) -> list[int]:
    out = []
    for _ in range(k):
        out.append(x % p)
        x //= p
    return out


def _undigits(ds: Sequence[int], p: int) -> int:
    return reduce(lambda acc, d: acc * p + d, reversed(list(ds)), 0)


def _is_irreducible(poly: Sequence[int], p: int) -> bool:
    """True iff the monic poly has no monic divisor of degree <= k/2."""
    k = len(poly) - 1
    if k == 1:
        return True
    for d in range(1, k // 2 + 1):
        for tail in range(p**d):
            div = _digits(tail, p, d) + [1]
            if _poly_divides(div, poly, p):
                return False
    return True


def _poly_divides(div: Sequence[int], poly: Sequence[int], p: int) -> bool:
    rem = list(poly)
    d = len(div) - 1
    for deg in range(len(rem) - 1, d - 1, -1):
        c = rem[deg]
        if c:
            for i in range(d + 1):
                rem[deg - d + i] = (rem[deg - d + i] - c * div[i]) % p
    return not any(rem[:d])


def default_poly(p: int, k: int) -> tuple[int, ...]:
    """Fixed reduction polynomial for GF(p^k); smallest irreducible when untabulated."""
    if (p, k) in DEFAULT_POLYS:
        return DEFAULT_POLYS[(p, k)]
    for tail in range(p**k):
        cand = _digits(tail, p, k) + [1]
        if cand[0] and _is_irreducible(cand, p):
            return tuple(cand)
    raise ValidationError(f"no irreducible polynomial of degree {k} over GF({p})")


@dataclass(frozen=True)
class FieldSpec:
    """Characteristic, extension degree and reduction polynomial of a field."""

    p: int
    k: int = 1
    poly: tuple[int, ...] | None = None

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValidationError(f"characteristic {self.p} is not prime")
        if self.k < 1:
            raise ValidationError("extension degree must be >= 1")
        if self.p**self.k > MAX_ORDER:
            raise ValidationError(f"field order {self.p ** self.k} above {MAX_ORDER}")
        if self.k == 1:
            object.__setattr__(self, "poly", None)
            return
        poly = tuple(int(c) for c in self.poly) if self.poly is not None else default_poly(self.p, self.k)
        if len(poly) != self.k + 1 or poly[-1] != 1:
            raise ValidationError(f"reduction polynomial must be monic of degree {self.k}")
        if any(not 0 <= c < self.p for c in poly):
            raise ValidationError("polynomial coefficients must lie in [0, p)")
        if not _is_irreducible(poly, self.p):
            raise ValidationError(f"polynomial {poly} is reducible over GF({self.p})")
        object.__setattr__(self, "poly", poly)

    @property
    def order(self) -> int:
        return self.p**self.k

    @classmethod
    def of_order(cls, q: int) -> "FieldSpec":
        pk = prime_power(q)
        if pk is None:
            raise ValidationError(f"{q} is not a prime power")
        return cls(*pk)

    def __str__(self) -> str:
        return f"GF({self.p}^{self.k})" if self.k > 1 else f"GF({self.p})"


class GF:
    """Table-driven arithmetic for one field; works on ints and numpy arrays."""

    def __init__(self, spec: FieldSpec):
        self.spec = spec
        q = spec.order
        self.order = q
        self.p = spec.p
        elems = np.arange(q)
        if spec.k == 1:
            self.add_table = (elems[:, None] + elems[None, :]) % q
            self.mul_table = (elems[:, None] * elems[None, :]) % q
        else:
            p, k = spec.p, spec.k
            digs = np.array([_digits(x, p, k) for x in range(q)])
            weights = p ** np.arange(k)
            self.add_table = (((digs[:, None, :] + digs[None, :, :]) % p) * weights).sum(-1)
            # digits of a * x^i for every a, built by repeated multiplication by x
            poly = np.array(spec.poly[:k])
            shifts = [digs]
            for _ in range(k - 1):
                prev = shifts[-1]
                top = prev[:, -1:]
                up = np.concatenate([np.zeros((q, 1), dtype=prev.dtype), prev[:, :-1]], axis=1)
                shifts.append((up - top * poly) % p)
            prod = np.zeros((q, q, k), dtype=np.int64)
            for i in range(k):
                prod += digs[None, :, i, None] * shifts[i][:, None, :]
            self.mul_table = ((prod % p) * weights).sum(-1)
        dtype = np.uint8 if q <= 256 else np.uint16
        self.add_table = self.add_table.astype(dtype)
        self.mul_table = self.mul_table.astype(dtype)
        self.dtype = dtype
        zero_rows = np.argmax(self.add_table == 0, axis=1)
        self.neg_table = zero_rows.astype(dtype)
        ones = self.mul_table == 1
        if not np.all(ones[1:].sum(axis=1) == 1):
            raise ValidationError(f"{spec} tables do not form a field")
        inv = np.argmax(ones, axis=1).astype(dtype)
        inv[0] = 0
        self.inv_table = inv
        self.add_table.setflags(write=False)
        self.mul_table.setflags(write=False)
        self.neg_table.setflags(write=False)
        self.inv_table.setflags(write=False)

    def __repr__(self) -> str:
        return f"GF<{self.spec}>"

    def _check(self, *arrs):
        for a in arrs:
            a = np.asarray(a)
            if a.size and (a.min() < 0 or a.max() >= self.order):
                raise ValidationError(f"element out of range for {self.spec}")

    def add(self, a, b):
        return self.add_table[a, b]

    def neg(self, a):
        return self.neg_table[a]

    def sub(self, a, b):
        return self.add_table[a, self.neg_table[b]]

    def mul(self, a, b):
        return self.mul_table[a, b]

    def inv(self, a):
        if np.any(np.asarray(a) == 0):
            raise ZeroDivisionError("inverse of zero")
        return self.inv_table[a]

    def sum(self, a, axis=0):
        """Field sum along ``axis``."""
        a = np.asarray(a)
        if self.spec.k == 1:
            return (a.astype(np.int64).sum(axis=axis) % self.p).astype(self.dtype)
        if self.p == 2:
            return np.bitwise_xor.reduce(a.astype(self.dtype), axis=axis)
        a = np.moveaxis(a, axis, 0)
        return reduce(lambda acc, row: self.add_table[acc, row], a[1:], a[0].astype(self.dtype))

    def matmul(self, a, b):
        """Matrix product over the field; ``a`` is (..., l) and ``b`` is (l, n)."""
        a = np.asarray(a)
        b = np.asarray(b)
        if a.shape[-1] != b.shape[0]:
            raise ValidationError(f"dimension mismatch: {a.shape} x {b.shape}")
        if self.spec.k == 1:
            return ((a.astype(np.int64) @ b.astype(np.int64)) % self.p).astype(self.dtype)
        out = np.zeros(a.shape[:-1] + b.shape[1:], dtype=self.dtype)
        for r in range(b.shape[0]):
            out = self.add_table[out, self.mul_table[a[..., r, None], b[r]]]
        return out

    def random(self, rng: np.random.Generator, shape) -> np.ndarray:
        return rng.integers(0, self.order, size=shape).astype(self.dtype)

    def rank(self, m) -> int:
        """Rank of a matrix by Gaussian elimination over the field."""
        m = np.array(m, dtype=self.dtype)
        rows, cols = m.shape
        r = 0
        for c in range(cols):
            piv = next((i for i in range(r, rows) if m[i, c]), None)
            if piv is None:
                continue
            m[[r, piv]] = m[[piv, r]]
            m[r] = self.mul_table[self.inv_table[m[r, c]], m[r]]
            for i in range(rows):
                if i != r and m[i, c]:
                    m[i] = self.sub(m[i], self.mul_table[m[i, c], m[r]])
            r += 1
            if r == rows:
                break
        return r


@lru_cache(maxsize=None)
def get_field(spec: FieldSpec) -> GF:
    return GF(spec)


# --- typed scalar / vector / matrix values ------------------------------------


@dataclass(frozen=True)
class FieldElem:
    spec: FieldSpec
    value: int

    def __post_init__(self):
        if not 0 <= self.value < self.spec.order:
            raise ValidationError(f"{self.value} is not an element of {self.spec}")

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __neg__(self):
        return neg(self)

    def __int__(self):
        return self.value


@dataclass(frozen=True)
class FieldVec:
    spec: FieldSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=np.int64).reshape(-1)
        get_field(self.spec)._check(v)
        v = v.astype(get_field(self.spec).dtype)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.values)

    def __eq__(self, other):
        return isinstance(other, FieldVec) and self.spec == other.spec and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.spec, self.values.tobytes()))

    def __add__(self, other: "FieldVec") -> "FieldVec":
        _same(self.spec, other.spec)
        if len(self) != len(other):
            raise ValidationError("vector lengths differ")
        return FieldVec(self.spec, get_field(self.spec).add(self.values, other.values))

    def __sub__(self, other: "FieldVec") -> "FieldVec":
        _same(self.spec, other.spec)
        if len(self) != len(other):
            raise ValidationError("vector lengths differ")
        return FieldVec(self.spec, get_field(self.spec).sub(self.values, other.values))


@dataclass(frozen=True)
class GenMatrix:
    spec: FieldSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=np.int64)
        if v.ndim != 2:
            raise ValidationError("generator matrix must be two-dimensional")
        get_field(self.spec)._check(v)
        v = v.astype(get_field(self.spec).dtype)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def shape(self):
        return self.values.shape


def _same(a: FieldSpec, b: FieldSpec):
    if a != b:
        raise SpecMismatchError(f"{a} vs {b}")


def add(a: FieldElem, b: FieldElem) -> FieldElem:
    _same(a.spec, b.spec)
    return FieldElem(a.spec, int(get_field(a.spec).add(a.value, b.value)))


def mul(a: FieldElem, b: FieldElem) -> FieldElem:
    _same(a.spec, b.spec)
    return FieldElem(a.spec, int(get_field(a.spec).mul(a.value, b.value)))


def neg(a: FieldElem) -> FieldElem:
    return FieldElem(a.spec, int(get_field(a.spec).neg(a.value)))


def sub(a: FieldElem, b: FieldElem) -> FieldElem:
    _same(a.spec, b.spec)
    return FieldElem(a.spec, int(get_field(a.spec).sub(a.value, b.value)))


def inv(a: FieldElem) -> FieldElem:
    if a.value == 0:
        raise ZeroDivisionError("inverse of zero")
    return FieldElem(a.spec, int(get_field(a.spec).inv(a.value)))


def mat_vec_mul(c: FieldVec, G: GenMatrix) -> FieldVec:
    """Row vector times matrix, ``c ⊙ G``."""
    _same(c.spec, G.spec)
    if len(c) != G.shape[0]:
        raise ValidationError(f"vector of length {len(c)} against {G.shape[0]}x{G.shape[1]} matrix")
    return FieldVec(c.spec, get_field(c.spec).matmul(c.values, G.values))
