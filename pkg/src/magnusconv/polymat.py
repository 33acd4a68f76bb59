"""Exact arithmetic on (piecewise) polynomial matrix functions of ``t``.

Coefficients are rationals. A :class:`PolyMatrix` stores a single common
denominator together with an integer numerator tensor ``num[k, i, j]``
(coefficient of ``t**k`` in entry ``(i, j)``), always reduced so that the
gcd of the denominator and every numerator is one. Matrix products are done
by Kronecker substitution: every polynomial entry is packed into one big
integer, the products are formed with GMP, and the result is unpacked.

Public entries are exposed as :class:`Poly` objects holding
:class:`fractions.Fraction` coefficients.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np
from gmpy2 import mpz

RationalLike = Union[Fraction, int, str]

#: default guard on the degree of any polynomial entry
MAX_DEGREE = 512


class DegreeOverflowError(ArithmeticError):
    """A polynomial entry exceeded the configured maximum degree."""


class DimensionError(ValueError):
    pass


class DomainError(ValueError):
    """Evaluation point outside the breakpoint range."""


def as_fraction(x: RationalLike) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floats are not exact; pass a Fraction, int or string")
    return Fraction(x)


def format_fraction(x: Fraction) -> str:
    """Canonical string: ``"3"``, ``"-1/4"``."""
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------------------
# scalar polynomials


@dataclass(frozen=True)
class Poly:
    """Univariate polynomial; ``coeffs[i]`` is the coefficient of ``t**i``.

    Trailing zeros are stripped, so the zero polynomial has ``coeffs == ()``.
    """

    coeffs: tuple[Fraction, ...] = ()

    def __post_init__(self):
        c = [as_fraction(x) for x in self.coeffs]
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __add__(self, other: Poly) -> Poly:
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        return Poly(tuple((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)))

    def __neg__(self) -> Poly:
        return Poly(tuple(-x for x in self.coeffs))

    def __sub__(self, other: Poly) -> Poly:
        return self + (-other)

    def __mul__(self, other: Poly | RationalLike) -> Poly:
        if not isinstance(other, Poly):
            return self.scale(other)
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return Poly()
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return Poly(tuple(out))

    __rmul__ = __mul__

    def scale(self, c: RationalLike) -> Poly:
        c = as_fraction(c)
        return Poly(tuple(c * x for x in self.coeffs))

    def integral(self) -> Poly:
        """Antiderivative vanishing at ``t = 0``."""
        if not self.coeffs:
            return Poly()
        return Poly((Fraction(0),) + tuple(x / (k + 1) for k, x in enumerate(self.coeffs)))

    def derivative(self) -> Poly:
        return Poly(tuple(k * x for k, x in enumerate(self.coeffs) if k > 0))

    def __call__(self, t):
        acc = Fraction(0) if isinstance(t, (int, Fraction)) else 0.0
        for x in reversed(self.coeffs):
            acc = acc * t + (x if isinstance(acc, Fraction) else float(x))
        return acc

    def to_strings(self) -> list[str]:
        return [format_fraction(x) for x in self.coeffs]

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for k, x in reversed(list(enumerate(self.coeffs))):
            if x == 0:
                continue
            mag = format_fraction(abs(x))
            mono = "" if k == 0 else ("t" if k == 1 else f"t^{k}")
            body = mag if not mono else (mono if mag == "1" else f"{mag}*{mono}")
            parts.append(("-" if x < 0 else "+", body))
        head = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        return " ".join([head] + [f"{s} {b}" for s, b in parts[1:]])


# ---------------------------------------------------------------------------
# Kronecker packing helpers


def _maxbits(m: PolyMatrix) -> int:
    if m._bits is None:
        m._bits = max(map(abs, m._num.flat), default=0).bit_length()
    return m._bits


def _packed(m: PolyMatrix, nb: int) -> list[list]:
    got = m._packed.get(nb)
    if got is None:
        d = m._dim
        got = [[_pack(m._num[:, i, j].tolist(), nb) for j in range(d)] for i in range(d)]
        m._packed = {nb: got}
    return got


def _pack(coeffs: Sequence[int], nb: int):
    """Integer ``sum c_k 2**(8*nb*k)`` for signed ``c_k`` with ``|c_k| < 2**(8*nb-1)``."""
    pos = b"".join((c if c > 0 else 0).to_bytes(nb, "little") for c in coeffs)
    neg = b"".join((-c if c < 0 else 0).to_bytes(nb, "little") for c in coeffs)
    return mpz(int.from_bytes(pos, "little") - int.from_bytes(neg, "little"))


def _unpack(v, nb: int, length: int) -> list[int]:
    half = 1 << (8 * nb - 1)
    bias = int.from_bytes(half.to_bytes(nb, "little") * length, "little")
    raw = (int(v) + bias).to_bytes(nb * length, "little")
    return [int.from_bytes(raw[k * nb:(k + 1) * nb], "little") - half for k in range(length)]


def _zeros(length: int, d: int) -> np.ndarray:
    out = np.empty((length, d, d), dtype=object)
    out.fill(0)
    return out


# ---------------------------------------------------------------------------
# polynomial matrices


class PolyMatrix:
    """Square matrix of polynomials in ``t`` with exact rational coefficients.

    Immutable. ``num`` has shape ``(L, dim, dim)``; the represented matrix is
    ``sum_k num[k] * t**k / den``.
    """

    __slots__ = ("_num", "_den", "_dim", "_float", "_bits", "_packed")

    def __init__(self, num: np.ndarray, den: int = 1, *, _normalized: bool = False):
        if num.ndim != 3 or num.shape[1] != num.shape[2] or num.shape[1] == 0:
            raise DimensionError(f"expected (L, d, d) coefficient tensor, got {num.shape}")
        self._dim = num.shape[1]
        if not _normalized:
            num, den = _normalize(num, int(den))
        self._num = num
        self._den = den
        self._float = None
        self._bits = None
        self._packed = {}

    # construction -------------------------------------------------------

    @classmethod
    def zeros(cls, dim: int) -> PolyMatrix:
        return cls(_zeros(0, dim), 1, _normalized=True)

    @classmethod
    def identity(cls, dim: int) -> PolyMatrix:
        return cls.constant(np.eye(dim, dtype=int).tolist())

    @classmethod
    def constant(cls, rows: Sequence[Sequence[RationalLike]]) -> PolyMatrix:
        return cls.from_entries([[[x] for x in row] for row in rows])

    @classmethod
    def from_entries(cls, rows: Sequence[Sequence[Poly | Sequence[RationalLike]]]) -> PolyMatrix:
        """Build from a square nested list whose entries are :class:`Poly` or
        coefficient lists (constant term first)."""
        d = len(rows)
        if any(len(r) != d for r in rows):
            raise DimensionError("entries must form a square matrix")
        polys = [[e if isinstance(e, Poly) else Poly(tuple(e)) for e in r] for r in rows]
        length = max((len(p.coeffs) for r in polys for p in r), default=0)
        den = 1
        for r in polys:
            for p in r:
                for x in p.coeffs:
                    den = den * x.denominator // math.gcd(den, x.denominator)
        num = _zeros(length, d)
        for i, r in enumerate(polys):
            for j, p in enumerate(r):
                for k, x in enumerate(p.coeffs):
                    num[k, i, j] = x.numerator * (den // x.denominator)
        return cls(num, den)

    # accessors ----------------------------------------------------------

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def degree(self) -> int:
        """Largest entry degree; ``-1`` for the zero matrix."""
        return self._num.shape[0] - 1

    @property
    def denominator(self) -> int:
        return self._den

    def is_zero(self) -> bool:
        return self._num.shape[0] == 0

    def entry(self, i: int, j: int) -> Poly:
        return Poly(tuple(Fraction(int(c), self._den) for c in self._num[:, i, j]))

    def entries(self) -> list[list[Poly]]:
        return [[self.entry(i, j) for j in range(self._dim)] for i in range(self._dim)]

    def coefficient(self, k: int) -> list[list[Fraction]]:
        """Exact coefficient matrix of ``t**k``."""
        if k >= self._num.shape[0]:
            return [[Fraction(0)] * self._dim for _ in range(self._dim)]
        return [[Fraction(int(c), self._den) for c in row] for row in self._num[k]]

    def float_coefficients(self) -> np.ndarray:
        """Coefficients as a float array of shape ``(L, dim, dim)`` (cached)."""
        if self._float is None:
            den = self._den
            flat = [int(c) / den for c in self._num.flat]
            self._float = np.array(flat, dtype=float).reshape(self._num.shape)
        return self._float

    # evaluation ---------------------------------------------------------

    def __call__(self, t):
        return self.evaluate(t)

    def evaluate(self, t) -> np.ndarray:
        """Horner evaluation in floating point (``t`` may be complex)."""
        c = self.float_coefficients()
        out = np.zeros((self._dim, self._dim), dtype=np.result_type(float, type(t)))
        for k in range(c.shape[0] - 1, -1, -1):
            out = out * t + c[k]
        return out

    def evaluate_exact(self, t: RationalLike) -> list[list[Fraction]]:
        t = as_fraction(t)
        acc = _zeros(1, self._dim)[0]
        for k in range(self._num.shape[0] - 1, -1, -1):
            acc = acc * t + self._num[k]
        return [[Fraction(x) / self._den for x in row] for row in acc]

    # arithmetic ---------------------------------------------------------

    def _check(self, other: PolyMatrix):
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        if other._dim != self._dim:
            raise DimensionError(f"dimension mismatch: {self._dim} vs {other._dim}")

    def __add__(self, other: PolyMatrix) -> PolyMatrix:
        self._check(other)
        return _combine(self, other, 1)

    def __sub__(self, other: PolyMatrix) -> PolyMatrix:
        self._check(other)
        return _combine(self, other, -1)

    def __neg__(self) -> PolyMatrix:
        return PolyMatrix(-self._num, self._den, _normalized=True)

    def __mul__(self, c: RationalLike) -> PolyMatrix:
        if isinstance(c, PolyMatrix):
            raise TypeError("use @ for matrix products")
        c = as_fraction(c)
        if c == 0:
            return PolyMatrix.zeros(self._dim)
        return PolyMatrix(self._num * c.numerator, self._den * c.denominator)

    __rmul__ = __mul__

    def __matmul__(self, other: PolyMatrix) -> PolyMatrix:
        self._check(other)
        return _product(self, other, commutator=False)

    def commutator(self, other: PolyMatrix) -> PolyMatrix:
        """``self @ other - other @ self``, exact."""
        self._check(other)
        return _product(self, other, commutator=True)

    def integral(self) -> PolyMatrix:
        """Entrywise antiderivative vanishing at ``t = 0``."""
        length = self._num.shape[0]
        if length == 0:
            return self
        m = math.lcm(*range(1, length + 1))
        out = _zeros(length + 1, self._dim)
        for k in range(length):
            out[k + 1] = self._num[k] * (m // (k + 1))
        return PolyMatrix(out, self._den * m)

    def derivative(self) -> PolyMatrix:
        length = self._num.shape[0]
        if length <= 1:
            return PolyMatrix.zeros(self._dim)
        out = _zeros(length - 1, self._dim)
        for k in range(1, length):
            out[k - 1] = self._num[k] * k
        return PolyMatrix(out, self._den)

    def add_constant(self, rows: Sequence[Sequence[Fraction]]) -> PolyMatrix:
        return self + PolyMatrix.constant(rows)

    # comparison ---------------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        return (
            self._dim == other._dim
            and self._den == other._den
            and self._num.shape == other._num.shape
            and bool(np.all(self._num == other._num))
        )

    def __hash__(self):
        return hash((self._dim, self._den, tuple(int(x) for x in self._num.flat)))

    def __repr__(self) -> str:
        rows = ["[" + ", ".join(str(p) for p in r) + "]" for r in self.entries()]
        return "PolyMatrix([" + ", ".join(rows) + "])"

    def to_strings(self) -> list[list[list[str]]]:
        return [[p.to_strings() for p in r] for r in self.entries()]


def _normalize(num: np.ndarray, den: int) -> tuple[np.ndarray, int]:
    if den <= 0:
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        num, den = -num, -den
    length = num.shape[0]
    while length and not any(num[length - 1].flat):
        length -= 1
    num = num[:length]
    if length == 0:
        return num, 1
    if length - 1 > MAX_DEGREE:
        raise DegreeOverflowError(f"degree {length - 1} exceeds the limit {MAX_DEGREE}")
    g = math.gcd(den, *(int(x) for x in num.flat))
    if g > 1:
        num = num // g
        den //= g
    return num, den


def _combine(a: PolyMatrix, b: PolyMatrix, sign: int) -> PolyMatrix:
    if b.is_zero():
        return a
    if a.is_zero():
        return b if sign > 0 else -b
    g = math.gcd(a._den, b._den)
    fa, fb = b._den // g, a._den // g
    length = max(a._num.shape[0], b._num.shape[0])
    out = _zeros(length, a._dim)
    out[: a._num.shape[0]] += a._num * fa
    if sign > 0:
        out[: b._num.shape[0]] += b._num * fb
    else:
        out[: b._num.shape[0]] -= b._num * fb
    return PolyMatrix(out, a._den * fa)


def _product(a: PolyMatrix, b: PolyMatrix, commutator: bool) -> PolyMatrix:
    d = a._dim
    if a.is_zero() or b.is_zero():
        return PolyMatrix.zeros(d)
    la, lb = a._num.shape[0], b._num.shape[0]
    length = la + lb - 1
    if length - 1 > MAX_DEGREE:
        raise DegreeOverflowError(f"degree {length - 1} exceeds the limit {MAX_DEGREE}")
    # each unpacked coefficient is a sum of at most 2*d*min(la, lb) products
    bits = _maxbits(a) + _maxbits(b) + (2 * d * min(la, lb)).bit_length() + 2
    # coarse byte width so cached packings are reused across partners
    nb = -(-bits // 64) * 8
    pa = _packed(a, nb)
    pb = _packed(b, nb)
    out = _zeros(length, d)
    for i in range(d):
        for j in range(d):
            s = mpz(0)
            for k in range(d):
                s += pa[i][k] * pb[k][j]
                if commutator:
                    s -= pb[i][k] * pa[k][j]
            out[:, i, j] = _unpack(s, nb, length)
    return PolyMatrix(out, a._den * b._den)


# ---------------------------------------------------------------------------
# piecewise polynomial matrices


class PiecewisePolyMatrix:
    """Matrix function given by a polynomial on each ``[t_k, t_{k+1})``.

    Segment polynomials are expressed in the absolute variable ``t``, not in
    a local shifted variable.
    """

    __slots__ = ("breakpoints", "segments")

    def __init__(self, breakpoints: Sequence[RationalLike], segments: Sequence[PolyMatrix]):
        bps = tuple(as_fraction(b) for b in breakpoints)
        segs = tuple(segments)
        if len(segs) < 1 or len(bps) != len(segs) + 1:
            raise ValueError("need m >= 1 segments and m + 1 breakpoints")
        if any(b >= c for b, c in zip(bps, bps[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if len({s.dim for s in segs}) != 1:
            raise DimensionError("all segments must share one dimension")
        self.breakpoints = bps
        self.segments = segs

    @classmethod
    def single(cls, m: PolyMatrix, t0: RationalLike = 0, t1: RationalLike = 1) -> PiecewisePolyMatrix:
        return cls((t0, t1), (m,))

    @property
    def dim(self) -> int:
        return self.segments[0].dim

    @property
    def domain(self) -> tuple[Fraction, Fraction]:
        return self.breakpoints[0], self.breakpoints[-1]

    @property
    def degree(self) -> int:
        return max(s.degree for s in self.segments)

    def is_zero(self) -> bool:
        return all(s.is_zero() for s in self.segments)

    def segment_index(self, t) -> int:
        lo, hi = self.domain
        if t < lo or t > hi:
            raise DomainError(f"t={t} outside [{lo}, {hi}]")
        bps = self.breakpoints
        for k in range(len(self.segments) - 1, 0, -1):
            if t >= bps[k]:
                return k
        return 0

    def evaluate(self, t: float) -> np.ndarray:
        return self.segments[self.segment_index(t)].evaluate(t)

    __call__ = evaluate

    def evaluate_exact(self, t: RationalLike) -> list[list[Fraction]]:
        t = as_fraction(t)
        return self.segments[self.segment_index(t)].evaluate_exact(t)

    def limit_left(self, k: int) -> list[list[Fraction]]:
        """Exact value of segment ``k-1`` at breakpoint ``k``."""
        return self.segments[k - 1].evaluate_exact(self.breakpoints[k])

    # segmentwise algebra --------------------------------------------------

    def _same_grid(self, other: PiecewisePolyMatrix):
        if self.breakpoints != other.breakpoints:
            raise ValueError("piecewise operands must share breakpoints")

    def _map(self, fn) -> PiecewisePolyMatrix:
        return PiecewisePolyMatrix(self.breakpoints, [fn(s) for s in self.segments])

    def _zip(self, other, fn) -> PiecewisePolyMatrix:
        self._same_grid(other)
        return PiecewisePolyMatrix(self.breakpoints, [fn(a, b) for a, b in zip(self.segments, other.segments)])

    def __add__(self, other):
        return self._zip(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._zip(other, lambda a, b: a - b)

    def __neg__(self):
        return self._map(lambda a: -a)

    def __mul__(self, c: RationalLike):
        return self._map(lambda a: a * c)

    __rmul__ = __mul__

    def __matmul__(self, other):
        return self._zip(other, lambda a, b: a @ b)

    def commutator(self, other) -> PiecewisePolyMatrix:
        return self._zip(other, lambda a, b: a.commutator(b))

    def derivative(self) -> PiecewisePolyMatrix:
        return self._map(lambda a: a.derivative())

    def antiderivative(self) -> PiecewisePolyMatrix:
        """``t -> integral from t_0 to t``; continuous across breakpoints."""
        out = []
        acc = None
        for k, seg in enumerate(self.segments):
            q = seg.integral()
            offset = q.evaluate_exact(self.breakpoints[k])
            shift = [[-x for x in row] for row in offset]
            if acc is not None:
                shift = [[s + a for s, a in zip(rs, ra)] for rs, ra in zip(shift, acc)]
            if any(x for row in shift for x in row):
                q = q.add_constant(shift)
            out.append(q)
            acc = q.evaluate_exact(self.breakpoints[k + 1])
        return PiecewisePolyMatrix(self.breakpoints, out)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PiecewisePolyMatrix):
            return NotImplemented
        return self.breakpoints == other.breakpoints and self.segments == other.segments

    def __hash__(self):
        return hash((self.breakpoints, self.segments))

    def __repr__(self) -> str:
        bps = ", ".join(format_fraction(b) for b in self.breakpoints)
        return f"PiecewisePolyMatrix(breakpoints=[{bps}], segments={list(self.segments)!r})"


def commutator(a, b):
    """``[a, b] = ab - ba`` for :class:`PolyMatrix` or :class:`PiecewisePolyMatrix`."""
    return a.commutator(b)


def antiderivative(a: PiecewisePolyMatrix) -> PiecewisePolyMatrix:
    return a.antiderivative()


def evaluate(a: PiecewisePolyMatrix, t: float) -> np.ndarray:
    return a.evaluate(t)


# ---------------------------------------------------------------------------
# textual model format
#
# {"dim": 2, "breakpoints": ["0", "1"],
#  "segments": [[[["0", "1/2"], ["1"]], [["0"], ["-1"]]]]}
#
# segments[k][i][j] is the coefficient list (constant term first) of entry
# (i, j) on segment k; every coefficient is an exact-fraction string.


def to_document(a: PiecewisePolyMatrix) -> dict:
    return {
        "dim": a.dim,
        "breakpoints": [format_fraction(b) for b in a.breakpoints],
        "segments": [s.to_strings() for s in a.segments],
    }


def from_document(doc: dict) -> PiecewisePolyMatrix:
    try:
        dim = int(doc["dim"])
        segs = [PolyMatrix.from_entries([[[as_fraction(c) for c in e] for e in row] for row in seg])
                for seg in doc["segments"]]
        out = PiecewisePolyMatrix([as_fraction(b) for b in doc["breakpoints"]], segs)
    except (KeyError, TypeError, ZeroDivisionError) as exc:
        raise ValueError(f"malformed model document: {exc}") from exc
    if out.dim != dim:
        raise DimensionError(f"declared dim {dim} but segments are {out.dim}x{out.dim}")
    return out


def dumps(a: PiecewisePolyMatrix) -> str:
    return json.dumps(to_document(a), separators=(",", ":"))


def loads(text: str) -> PiecewisePolyMatrix:
    return from_document(json.loads(text))


def poly_matrix(rows: Iterable[Iterable[Sequence[RationalLike]]]) -> PolyMatrix:
    """Shorthand: ``poly_matrix([[[0, 1], [2]], ...])``."""
    return PolyMatrix.from_entries([list(r) for r in rows])
