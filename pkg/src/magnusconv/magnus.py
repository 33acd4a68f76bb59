"""Magnus series terms for ``Y' = A(t) Y`` with piecewise polynomial ``A``.

Terms are generated exactly with the standard commutator recursion::

    S_n^(1) = [Omega_{n-1}, A]
    S_n^(j) = sum_{m=1}^{n-j} [Omega_m, S_{n-m}^(j-1)]        2 <= j <= n-1
    Omega_1 = int_0^t A
    Omega_n = sum_{j=1}^{n-1} B_j / j! int_0^t S_n^(j)

Each term is kept separately so that divergence diagnostics can look at
individual ``|Omega_n(t)|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .polymat import (
    DegreeOverflowError,
    DimensionError,
    PiecewisePolyMatrix,
    PolyMatrix,
    RationalLike,
    as_fraction,
)


@lru_cache(maxsize=None)
def bernoulli(k: int) -> Fraction:
    """Bernoulli number ``B_k`` with the convention ``B_1 = -1/2``.

    Akiyama-Tanigawa algorithm in exact rationals.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    a = [Fraction(0)] * (k + 1)
    for m in range(k + 1):
        a[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
    # the algorithm yields B_1 = +1/2
    return -a[0] if k == 1 else a[0]


@dataclass(frozen=True)
class MagnusSeries:
    source: PiecewisePolyMatrix
    terms: tuple[PiecewisePolyMatrix, ...]

    @property
    def order(self) -> int:
        return len(self.terms)

    @property
    def dim(self) -> int:
        return self.source.dim

    def term_values(self, t: float, n: int | None = None) -> np.ndarray:
        """Float values ``Omega_1(t) .. Omega_n(t)`` stacked as ``(n, d, d)``."""
        n = self.order if n is None else n
        _check_order(self, n)
        return np.stack([w.evaluate(t) for w in self.terms[:n]])

    def term_norms(self, t: float, n: int | None = None) -> np.ndarray:
        return np.linalg.norm(self.term_values(t, n), ord=2, axis=(1, 2))


def _check_order(series: MagnusSeries, n: int):
    if not 1 <= n <= series.order:
        raise IndexError(f"n={n} outside 1..{series.order}")


def magnus_terms(a: PiecewisePolyMatrix, n_terms: int, max_degree: int | None = None) -> MagnusSeries:
    """First ``n_terms`` Magnus terms of ``a``, exact."""
    if n_terms < 1:
        raise ValueError("need at least one term")
    omega = [None, a.antiderivative()]
    s: dict[tuple[int, int], PiecewisePolyMatrix] = {}
    for n in range(2, n_terms + 1):
        s[n, 1] = omega[n - 1].commutator(a)
        for j in range(2, n):
            acc = None
            for m in range(1, n - j + 1):
                c = omega[m].commutator(s[n - m, j - 1])
                acc = c if acc is None else acc + c
            s[n, j] = acc
        acc = None
        for j in range(1, n):
            b = bernoulli(j)
            if b == 0:
                continue
            c = s[n, j] * (b / math.factorial(j))
            acc = c if acc is None else acc + c
        term = acc.antiderivative()
        if max_degree is not None and term.degree > max_degree:
            raise DegreeOverflowError(f"term {n} has degree {term.degree} > {max_degree}")
        omega.append(term)
    return MagnusSeries(a, tuple(omega[1:]))


def magnus_terms_oracle(a: PiecewisePolyMatrix, n: int) -> PiecewisePolyMatrix:
    """Term ``n <= 4`` from the explicit nested-integral expressions.

    Writing ``I[X]`` for ``int_0^t X`` and ``W = I[A]``::

        O1 = W
        O2 = -1/2 I[[W, A]]
        O3 =  1/4 I[[I[[W, A]], A]] + 1/12 I[[W, [W, A]]]
        O4 = -1/8  I[[I[[I[[W, A]], A]], A]] - 1/24 I[[I[[W, [W, A]]], A]]
             -1/24 I[[W, [I[[W, A]], A]]]   - 1/24 I[[I[[W, A]], [W, A]]]
    """
    if not 1 <= n <= 4:
        raise ValueError("the oracle covers orders 1..4")

    def integ(x):
        return x.antiderivative()

    def br(x, y):
        return x.commutator(y)

    w = integ(a)
    if n == 1:
        return w
    wa = br(w, a)
    if n == 2:
        return integ(wa) * Fraction(-1, 2)
    iwa = integ(wa)
    if n == 3:
        return integ(br(iwa, a)) * Fraction(1, 4) + integ(br(w, wa)) * Fraction(1, 12)
    t1 = integ(br(integ(br(iwa, a)), a)) * Fraction(-1, 8)
    t2 = integ(br(integ(br(w, wa)), a)) * Fraction(-1, 24)
    t3 = integ(br(w, br(iwa, a))) * Fraction(-1, 24)
    t4 = integ(br(iwa, wa)) * Fraction(-1, 24)
    return t1 + t2 + t3 + t4


def partial_sum(series: MagnusSeries, n: int, t: float) -> np.ndarray:
    """``sum_{k<=n} Omega_k(t)`` in floating point."""
    return series.term_values(t, n).sum(axis=0)


def kappa_scaled(series: MagnusSeries, kappa: complex, n: int, t: float) -> np.ndarray:
    """``sum_{k<=n} kappa**k Omega_k(t)``: the series for ``A -> kappa A``."""
    vals = series.term_values(t, n)
    powers = complex(kappa) ** np.arange(1, n + 1)
    return np.tensordot(powers, vals, axes=1)


def dexpinv(omega: np.ndarray, a: np.ndarray, k_max: int = 16) -> np.ndarray:
    """``sum_{k=0}^{k_max} B_k/k! ad_omega^k (a)``."""
    out = np.zeros_like(a, dtype=np.result_type(omega, a))
    term = a
    for k in range(k_max + 1):
        b = bernoulli(k)
        if b:
            out = out + float(b / math.factorial(k)) * term
        term = omega @ term - term @ omega
    return out


def dexpinv_residual(series: MagnusSeries, t: float, k_max: int = 16) -> float:
    """``|Omega'(t) - dexp^{-1}_Omega(A(t))|_2`` for the full partial sum."""
    if series.order < 2:
        raise ValueError("need at least two terms")
    omega = partial_sum(series, series.order, t)
    domega = sum(w.derivative().evaluate(t) for w in series.terms)
    a = series.source.evaluate(t)
    return float(np.linalg.norm(domega - dexpinv(omega, a, k_max), ord=2))


def bch_source(a1: Sequence[Sequence[RationalLike]], a2: Sequence[Sequence[RationalLike]]) -> PiecewisePolyMatrix:
    """Piecewise-constant ``A`` equal to ``a2`` on ``[0, 1)`` and ``a1`` on ``[1, 2]``.

    Its fundamental solution at ``t = 2`` is ``exp(a1) exp(a2)``.
    """
    m1 = PolyMatrix.constant([[as_fraction(x) for x in r] for r in a1])
    m2 = PolyMatrix.constant([[as_fraction(x) for x in r] for r in a2])
    if m1.dim != m2.dim:
        raise DimensionError("BCH operands must have equal dimensions")
    return PiecewisePolyMatrix((0, 1, 2), (m2, m1))


def bch_terms(a1, a2, n_terms: int) -> MagnusSeries:
    """Magnus series of :func:`bch_source`; term ``n`` at ``t = 2`` is the
    degree-``n`` part of ``log(exp(a1) exp(a2))``."""
    return magnus_terms(bch_source(a1, a2), n_terms)
