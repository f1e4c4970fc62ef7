"""Truncated power series in t = q^(-s) with exact rational coefficients,
and the zeta products attached to an idempotent relation."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import ValidationError


@dataclass(frozen=True)
class TruncatedSeries:
    coeffs: tuple[Fraction, ...]

    @classmethod
    def of(cls, values, n_max: int) -> TruncatedSeries:
        vals = [Fraction(v) for v in list(values)[: n_max + 1]]
        vals += [Fraction(0)] * (n_max + 1 - len(vals))
        return cls(tuple(vals))

    @property
    def n_max(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, i: int) -> Fraction:
        return self.coeffs[i]

    def is_one(self) -> bool:
        return self.coeffs[0] == 1 and not any(self.coeffs[1:])

    def to_json(self) -> list[str]:
        return [f"{c.numerator}/{c.denominator}" for c in self.coeffs]

    def __add__(self, other: TruncatedSeries) -> TruncatedSeries:
        _same(self, other)
        return TruncatedSeries(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def scale(self, k) -> TruncatedSeries:
        return TruncatedSeries(tuple(k * c for c in self.coeffs))

    def __mul__(self, other: TruncatedSeries) -> TruncatedSeries:
        return series_mul(self, other)


def _same(A: TruncatedSeries, B: TruncatedSeries) -> None:
    if A.n_max != B.n_max:
        raise ValueError("series truncated at different degrees")


def one(n_max: int) -> TruncatedSeries:
    return TruncatedSeries.of([1], n_max)


def series_mul(A: TruncatedSeries, B: TruncatedSeries) -> TruncatedSeries:
    _same(A, B)
    n = A.n_max
    out = [Fraction(0)] * (n + 1)
    for i, a in enumerate(A.coeffs):
        if a:
            for j in range(n + 1 - i):
                out[i + j] += a * B.coeffs[j]
    return TruncatedSeries(tuple(out))


def series_log(A: TruncatedSeries) -> TruncatedSeries:
    """log A for A(0) = 1, from A' = A L'."""
    if A.coeffs[0] != 1:
        raise ValidationError("log needs constant term 1")
    n = A.n_max
    a = A.coeffs
    # b_k = k L_k satisfies b_k = k a_k - sum_{j=1}^{k-1} b_j a_{k-j}
    b = [Fraction(0)] * (n + 1)
    for k in range(1, n + 1):
        b[k] = k * a[k] - sum(b[j] * a[k - j] for j in range(1, k))
    return TruncatedSeries(tuple([Fraction(0)] + [b[k] / k for k in range(1, n + 1)]))


def series_exp(A: TruncatedSeries) -> TruncatedSeries:
    """exp A for A(0) = 0, from E' = A' E."""
    if A.coeffs[0] != 0:
        raise ValidationError("exp needs constant term 0")
    n = A.n_max
    a = A.coeffs
    e = [Fraction(0)] * (n + 1)
    e[0] = Fraction(1)
    for k in range(1, n + 1):
        e[k] = sum(j * a[j] * e[k - j] for j in range(1, k + 1)) / k
    return TruncatedSeries(tuple(e))


def series_inverse(A: TruncatedSeries) -> TruncatedSeries:
    """Multiplicative inverse by the triangular recurrence (needs A(0) = 1)."""
    if A.coeffs[0] != 1:
        raise ValidationError("inverse needs constant term 1")
    n = A.n_max
    inv = [Fraction(0)] * (n + 1)
    inv[0] = Fraction(1)
    for k in range(1, n + 1):
        inv[k] = -sum(A.coeffs[j] * inv[k - j] for j in range(1, k + 1))
    return TruncatedSeries(tuple(inv))


def _repeated_pow(A: TruncatedSeries, k: int) -> TruncatedSeries:
    base = A if k >= 0 else series_inverse(A)
    out = one(A.n_max)
    for _ in range(abs(k)):
        out = series_mul(out, base)
    return out


def series_int_pow(A: TruncatedSeries, k: int) -> TruncatedSeries:
    """A^k as exp(k log A); small |k| are cross-checked by repeated products."""
    if A.coeffs[0] != 1:
        if k >= 0:
            return _repeated_pow(A, k)
        raise ValidationError("negative powers need constant term 1")
    result = series_exp(series_log(A).scale(k))
    if abs(k) <= 3:
        check = _repeated_pow(A, k)
        if check != result:
            raise AssertionError(f"exp(k log A) disagrees with repeated multiplication for k={k}")
    return result


def zeta_series(counts: Sequence[int], n_max: int) -> TruncatedSeries:
    """exp(sum_n counts[n-1] t^n / n), truncated at t^n_max."""
    if len(counts) < n_max:
        raise ValueError(f"need {n_max} counts, got {len(counts)}")
    if any(c < 0 for c in counts[:n_max]):
        raise ValidationError("point counts must be nonnegative")
    log = TruncatedSeries.of([0] + [Fraction(counts[n - 1], n) for n in range(1, n_max + 1)], n_max)
    return series_exp(log)


def zeta_f_series(periodic_counts: Sequence[int], n_max: int) -> TruncatedSeries:
    """Arithmetic zeta function of (V, f): the same exponential built from periodic counts."""
    return zeta_series(periodic_counts, n_max)


def zeta_product_check(table: Mapping[int, Sequence[int]], coefficients: Sequence[int], n_max: int) -> dict:
    """prod_H zeta_H^{n_H} against 1, together with the per-degree log residuals.

    ``table[i]`` lists the counts of subgroup i for n = 1..n_max; subgroups
    with zero coefficient may be omitted.  The product is 1 through t^n_max
    iff every residual sum_H n_H count_H(n) vanishes; both are computed and
    must agree, including on the first offending degree.
    """
    product = one(n_max)
    for i, c in enumerate(coefficients):
        if c:
            product = series_mul(product, series_int_pow(zeta_series(table[i], n_max), c))
    residuals = [sum(c * table[i][n - 1] for i, c in enumerate(coefficients) if c) for n in range(1, n_max + 1)]
    first_bad_product = next((n for n in range(1, n_max + 1) if product[n] != 0), None)
    first_bad_log = next((n for n in range(1, n_max + 1) if residuals[n - 1] != 0), None)
    agree = first_bad_product == first_bad_log
    return {
        "n_max": n_max,
        "product": product.to_json(),
        "product_is_one": product.is_one(),
        "log_residuals": residuals,
        "first_bad_coefficient": first_bad_product,
        "first_bad_log_residual": first_bad_log,
        "agree": agree,
        "passed": product.is_one() and first_bad_log is None and agree,
    }


def theorem_C_check(quotient_count_table: Mapping[int, Sequence[int]], coefficients: Sequence[int], n_max: int) -> dict:
    """prod_H zeta(V/H)^{n_H} = 1 through t^n_max."""
    return zeta_product_check(quotient_count_table, coefficients, n_max)


def theorem_D_check(periodic_count_table: Mapping[int, Sequence[int]], coefficients: Sequence[int], n_max: int) -> dict:
    """prod_H zeta_{f_H}(V/H)^{n_H} = 1 through t^n_max."""
    return zeta_product_check(periodic_count_table, coefficients, n_max)
