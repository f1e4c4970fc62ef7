"""Finite fields F_{p^d} with a deterministic defining polynomial.

Elements are coefficient vectors over F_p reduced modulo the lexicographically
least monic irreducible polynomial of degree d (constant term compared first).
The canonical index of ``sum c_i x^i`` is ``sum c_i p^i``; every ordering in
the package is derived from it.

Besides the scalar :class:`FieldElement`, the descriptor exposes vectorised
arithmetic on numpy arrays of canonical indices (``vadd``, ``vmul``, ...),
which is what point enumeration uses.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from functools import lru_cache

import numpy as np

from .errors import CapError, FieldError

DEFAULT_SIZE_CAP = 2**26

_SPREAD = np.array([sum(((b >> i) & 1) << (2 * i) for i in range(8)) for b in range(256)], dtype=np.int64)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    i = 3
    while i * i <= n:
        if n % i == 0:
            return False
        i += 2
    return True


def _prime_factors(n: int) -> list[int]:
    out = []
    k = 2
    while k * k <= n:
        if n % k == 0:
            out.append(k)
            while n % k == 0:
                n //= k
        k += 1
    if n > 1:
        out.append(n)
    return out


# Dense polynomials over F_p as lists, constant term first, no trailing zeros.

def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _pmod(a: list[int], m: list[int], p: int) -> list[int]:
    a = _trim([c % p for c in a])
    dm = len(m) - 1
    inv_lead = pow(m[-1], p - 2, p)
    while len(a) - 1 >= dm:
        c = a[-1] * inv_lead % p
        shift = len(a) - 1 - dm
        for i, mc in enumerate(m):
            a[shift + i] = (a[shift + i] - c * mc) % p
        _trim(a)
    return a


def _pmulmod(a: list[int], b: list[int], m: list[int], p: int) -> list[int]:
    if not a or not b:
        return []
    r = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                r[i + j] += x * y
    return _pmod(r, m, p)


def _ppowmod(a: list[int], k: int, m: list[int], p: int) -> list[int]:
    result = [1]
    base = _pmod(a, m, p)
    while k:
        if k & 1:
            result = _pmulmod(result, base, m, p)
        base = _pmulmod(base, base, m, p)
        k >>= 1
    return result


def _pgcd(a: list[int], b: list[int], p: int) -> list[int]:
    a, b = _trim(list(a)), _trim(list(b))
    while b:
        a, b = b, _pmod(a, b, p)
    return a


def is_irreducible(poly: tuple[int, ...] | list[int], p: int) -> bool:
    """Rabin's test for a monic polynomial over F_p (constant term first)."""
    f = _trim([c % p for c in poly])
    d = len(f) - 1
    if d < 1:
        return False
    if d == 1:
        return True
    x = [0, 1]
    if _ppowmod(x, p**d, f, p) != _pmod(x, f, p):
        return False
    for r in _prime_factors(d):
        h = _ppowmod(x, p ** (d // r), f, p)
        diff = list(h) + [0] * max(0, 2 - len(h))
        diff[1] = (diff[1] - 1) % p
        g = _pgcd(f, _trim(diff), p)
        if len(g) != 1:
            return False
    return True


@lru_cache(maxsize=None)
def least_irreducible(p: int, d: int) -> tuple[int, ...]:
    """Lexicographically least monic irreducible of degree d, constant term most significant."""
    for low in itertools.product(range(p), repeat=d):
        cand = low + (1,)
        if low[0] == 0 and d > 1:
            continue
        if is_irreducible(cand, p):
            return cand
    raise FieldError(f"no irreducible polynomial of degree {d} over F_{p}")


@dataclass(frozen=True)
class FieldDescriptor:
    p: int
    d: int
    modulus: tuple[int, ...] | None = None
    _modmask: int = dc_field(default=0, repr=False, compare=False)

    @property
    def size(self) -> int:
        return self.p**self.d

    @property
    def zero(self) -> FieldElement:
        return FieldElement(self, (0,) * self.d)

    @property
    def one(self) -> FieldElement:
        return FieldElement(self, (1,) + (0,) * (self.d - 1))

    @property
    def gen(self) -> FieldElement:
        """The class of x (equal to 1 for a prime field)."""
        if self.d == 1:
            return self.one
        return FieldElement(self, (0, 1) + (0,) * (self.d - 2))

    def element(self, value: int | tuple[int, ...] | list[int]) -> FieldElement:
        if isinstance(value, (int, np.integer)):
            value = int(value)
            if not 0 <= value < self.size:
                raise FieldError(f"index {value} out of range for F_{self.p}^{self.d}")
            coeffs = []
            for _ in range(self.d):
                value, c = divmod(value, self.p)
                coeffs.append(c)
            return FieldElement(self, tuple(coeffs))
        coeffs = [int(c) % self.p for c in value]
        if len(coeffs) > self.d:
            if self.modulus is None:
                raise FieldError("prime field elements have a single coefficient")
            coeffs = _pmod(coeffs, list(self.modulus), self.p)
        coeffs += [0] * (self.d - len(coeffs))
        return FieldElement(self, tuple(coeffs))

    def from_int(self, n: int) -> FieldElement:
        """Image of the integer n in the prime subfield."""
        return FieldElement(self, (n % self.p,) + (0,) * (self.d - 1))

    def to_json(self) -> dict:
        return {"p": self.p, "d": self.d, "modulus": list(self.modulus) if self.modulus else None}

    # -- vectorised arithmetic on canonical indices --------------------------

    def _digits(self, a: np.ndarray) -> list[np.ndarray]:
        out = []
        for _ in range(self.d):
            out.append(a % self.p)
            a = a // self.p
        return out

    def _undigits(self, digits: list[np.ndarray]) -> np.ndarray:
        r = np.zeros_like(digits[0])
        for c in reversed(digits):
            r = r * self.p + c
        return r

    def vadd(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self.p == 2:
            return a ^ b
        if self.d == 1:
            return (a + b) % self.p
        return self._undigits([(x + y) % self.p for x, y in zip(self._digits(a), self._digits(b))])

    def vneg(self, a):
        a = np.asarray(a, dtype=np.int64)
        if self.p == 2:
            return a
        if self.d == 1:
            return (-a) % self.p
        return self._undigits([(-x) % self.p for x in self._digits(a)])

    def vsub(self, a, b):
        return self.vadd(a, self.vneg(b))

    def vmul(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self.d == 1:
            return (a * b) % self.p
        if self.p == 2:
            return self._vmul_gf2(a, b)
        p, d = self.p, self.d
        da, db = self._digits(a), self._digits(b)
        shape = np.broadcast(a, b).shape
        prod = [np.zeros(shape, dtype=np.int64) for _ in range(2 * d - 1)]
        for i in range(d):
            for j in range(d):
                prod[i + j] += da[i] * db[j]
        prod = [c % p for c in prod]
        mod = self.modulus
        for k in range(2 * d - 2, d - 1, -1):
            c = prod[k]
            for i in range(d):
                if mod[i]:
                    prod[k - d + i] = (prod[k - d + i] - c * mod[i]) % p
        return self._undigits(prod[:d])

    def _vmul_gf2(self, a, b):
        d = self.d
        a, b = np.broadcast_arrays(a, b)
        r = np.zeros(a.shape, dtype=np.int64)
        t1 = np.empty(a.shape, dtype=np.int64)
        t2 = np.empty(a.shape, dtype=np.int64)
        for i in range(d):
            np.right_shift(b, i, out=t1)
            t1 &= 1
            np.negative(t1, out=t1)
            np.left_shift(a, i, out=t2)
            t1 &= t2
            r ^= t1
        return self._reduce_gf2(r, 2 * d - 2, t1)

    def _reduce_gf2(self, r, top, t1):
        d = self.d
        mm = self._modmask
        for k in range(top, d - 1, -1):
            np.right_shift(r, k, out=t1)
            t1 &= 1
            np.negative(t1, out=t1)
            t1 &= mm << (k - d)
            r ^= t1
        return r

    def vsquare(self, a):
        a = np.asarray(a, dtype=np.int64)
        if self.p != 2 or self.d == 1:
            return self.vmul(a, a)
        # squaring is F_2-linear: spread the bits, then reduce
        r = np.zeros(a.shape, dtype=np.int64)
        t1 = np.empty(a.shape, dtype=np.int64)
        for byte in range((self.d + 7) // 8):
            np.right_shift(a, 8 * byte, out=t1)
            t1 &= 0xFF
            r |= _SPREAD[t1] << (16 * byte)
        return self._reduce_gf2(r, 2 * self.d - 2, t1)

    def vpow(self, a, k: int):
        a = np.asarray(a, dtype=np.int64)
        if k < 0:
            raise FieldError("negative exponent")
        result = np.ones_like(a)
        base = a
        while k:
            if k & 1:
                result = self.vmul(result, base)
            k >>= 1
            if k:
                base = self.vsquare(base)
        return result


@lru_cache(maxsize=None)
def build_field(p: int, d: int, size_cap: int = DEFAULT_SIZE_CAP) -> FieldDescriptor:
    if not isinstance(p, int) or not is_prime(p):
        raise FieldError(f"{p} is not prime")
    if not isinstance(d, int) or d < 1:
        raise FieldError(f"extension degree must be >= 1, got {d}")
    if p**d > size_cap:
        raise CapError(f"F_{p}^{d} has {p**d} elements, above the cap {size_cap}")
    if d == 1:
        return FieldDescriptor(p, 1, None)
    mod = least_irreducible(p, d)
    mask = sum(1 << i for i, c in enumerate(mod) if c) if p == 2 else 0
    return FieldDescriptor(p, d, mod, mask)


@dataclass(frozen=True)
class FieldElement:
    field: FieldDescriptor
    coeffs: tuple[int, ...]

    @property
    def index(self) -> int:
        r = 0
        for c in reversed(self.coeffs):
            r = r * self.field.p + c
        return r

    def __int__(self) -> int:
        return self.index

    def __repr__(self) -> str:
        terms = []
        for i, c in enumerate(self.coeffs):
            if not c:
                continue
            mono = "" if i == 0 else ("a" if i == 1 else f"a^{i}")
            if i == 0:
                terms.append(str(c))
            else:
                terms.append(mono if c == 1 else f"{c}*{mono}")
        return " + ".join(reversed(terms)) or "0"

    def _check(self, other) -> FieldElement:
        if isinstance(other, int):
            return self.field.from_int(other)
        if not isinstance(other, FieldElement):
            return NotImplemented
        if other.field != self.field:
            raise FieldError("operands belong to different fields")
        return other

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __add__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        p = self.field.p
        return FieldElement(self.field, tuple((x + y) % p for x, y in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        p = self.field.p
        return FieldElement(self.field, tuple((-x) % p for x in self.coeffs))

    def __sub__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        F = self.field
        if F.d == 1:
            return FieldElement(F, ((self.coeffs[0] * other.coeffs[0]) % F.p,))
        r = _pmulmod(list(self.coeffs), list(other.coeffs), list(F.modulus), F.p)
        return FieldElement(F, tuple(r + [0] * (F.d - len(r))))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result = self.field.one
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def inverse(self) -> FieldElement:
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in a finite field")
        return self ** (self.field.size - 2)

    def __truediv__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other


def arith(a: FieldElement, b: FieldElement, op: str) -> FieldElement:
    if a.field != b.field:
        raise FieldError("operands belong to different fields")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown operation {op!r}")


def inv(a: FieldElement) -> FieldElement:
    return a.inverse()


def power(a: FieldElement, k: int) -> FieldElement:
    if k < 0:
        raise FieldError("exponent must be >= 0")
    return a**k


def frobenius(a: FieldElement, e: int = 1) -> FieldElement:
    """a^(p^e)."""
    return a ** (a.field.p**e)


def enumerate_field(F: FieldDescriptor) -> list[FieldElement]:
    return [F.element(i) for i in range(F.size)]


@dataclass(frozen=True)
class EmbeddingMap:
    source: FieldDescriptor
    target: FieldDescriptor
    image_of_generator: FieldElement

    def __call__(self, a: FieldElement) -> FieldElement:
        if a.field != self.source:
            raise FieldError("element is not in the source field")
        T = self.target
        result = T.zero
        g = T.one
        for c in a.coeffs:
            if c:
                result = result + g * c
            g = g * self.image_of_generator
        return result

    @property
    def table(self) -> np.ndarray:
        """Canonical index of the image of every source element."""
        return _embedding_table(self)


@lru_cache(maxsize=64)
def _embedding_table(emb: EmbeddingMap) -> np.ndarray:
    return np.array([emb(a).index for a in enumerate_field(emb.source)], dtype=np.int64)


def _eval_poly(poly: tuple[int, ...], x: FieldElement) -> FieldElement:
    acc = x.field.zero
    for c in reversed(poly):
        acc = acc * x + c
    return acc


def _least_root(sub: FieldDescriptor, big: FieldDescriptor) -> FieldElement | None:
    # The roots of sub's modulus are the Frobenius conjugates of any one of them,
    # and every root lies in the order-(|sub|-1) subgroup of big^*.
    e = (big.size - 1) // (sub.size - 1)
    for y in range(2, big.size):
        z = big.element(y) ** e
        if _eval_poly(sub.modulus, z).is_zero():
            conj = [z]
            for _ in range(sub.d - 1):
                conj.append(conj[-1] ** big.p)
            return min(conj, key=lambda c: c.index)
    return None


@lru_cache(maxsize=None)
def embed_subfield(sub: FieldDescriptor, big: FieldDescriptor) -> EmbeddingMap:
    """Embed ``sub`` into ``big`` by the least-index root of sub's modulus."""
    if sub.p != big.p:
        raise FieldError("fields have different characteristic")
    if big.d % sub.d:
        raise FieldError(f"F_{sub.p}^{sub.d} does not embed in F_{big.p}^{big.d}: {sub.d} does not divide {big.d}")
    if sub.d == 1:
        return EmbeddingMap(sub, big, big.one)
    root = _least_root(sub, big)
    if root is None:
        raise FieldError("internal error: subfield modulus has no root in the extension")
    return EmbeddingMap(sub, big, root)
