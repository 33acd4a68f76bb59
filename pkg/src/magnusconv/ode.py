"""Fundamental solutions of ``Y' = kappa A(t) Y`` and the action integral.

The integrator is an adaptive Dormand-Prince 5(4) pair working on complex
states. Steps never straddle a breakpoint of ``A``: every breakpoint is a
forced stop, and inside ``[t_k, t_{k+1}]`` the polynomial of segment ``k`` is
used even at the right endpoint.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad

from .linalg import spectral_norm
from .polymat import PiecewisePolyMatrix

Evaluator = Callable[[float], np.ndarray]


class StepSizeUnderflow(ArithmeticError):
    pass


@dataclass(frozen=True)
class MatrixFunction:
    """Real matrix function on ``[breakpoints[0], breakpoints[-1]]``.

    ``pieces[k]`` evaluates ``A`` on ``[breakpoints[k], breakpoints[k+1]]``.
    """

    dim: int
    breakpoints: tuple[float, ...]
    pieces: tuple[Evaluator, ...]
    name: str = ""
    poly: PiecewisePolyMatrix | None = field(default=None, compare=False, repr=False)

    @classmethod
    def from_poly(cls, a: PiecewisePolyMatrix, name: str = "") -> MatrixFunction:
        return cls(
            a.dim,
            tuple(float(b) for b in a.breakpoints),
            tuple(seg.evaluate for seg in a.segments),
            name,
            a,
        )

    @classmethod
    def from_callable(cls, fn: Evaluator, dim: int, t_end: float, t0: float = 0.0, name: str = "") -> MatrixFunction:
        return cls(dim, (float(t0), float(t_end)), (fn,), name)

    @property
    def domain(self) -> tuple[float, float]:
        return self.breakpoints[0], self.breakpoints[-1]

    def segment_index(self, t: float) -> int:
        lo, hi = self.domain
        if t < lo - 1e-12 or t > hi + 1e-12:
            raise ValueError(f"t={t} outside [{lo}, {hi}]")
        k = int(np.searchsorted(self.breakpoints, t, side="right")) - 1
        return min(max(k, 0), len(self.pieces) - 1)

    def __call__(self, t: float) -> np.ndarray:
        return np.asarray(self.pieces[self.segment_index(t)](t), dtype=float)


@dataclass
class StepStats:
    accepted: int = 0
    rejected: int = 0
    max_error_estimate: float = 0.0


@dataclass(frozen=True)
class FundamentalSolution:
    kappa: complex | np.ndarray
    grid: np.ndarray
    values: np.ndarray  # (len(grid), d, d) or (len(grid), n_kappa, d, d)
    stats: StepStats

    def at(self, t: float) -> np.ndarray:
        k = int(np.argmin(np.abs(self.grid - t)))
        if abs(self.grid[k] - t) > 1e-12 * max(1.0, abs(t)):
            raise KeyError(f"t={t} is not a grid point")
        return self.values[k]


# Dormand-Prince 5(4) tableau
_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_A = np.zeros((7, 7))
_A[1, :1] = [1 / 5]
_A[2, :2] = [3 / 40, 9 / 40]
_A[3, :3] = [44 / 45, -56 / 15, 32 / 9]
_A[4, :4] = [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]
_A[5, :5] = [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]
_A[6, :6] = [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]
_B5 = _A[6].copy()
_B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


def integrate(
    rhs: Callable[[int, float, np.ndarray], np.ndarray],
    breakpoints: Sequence[float],
    t0: float,
    y0: np.ndarray,
    t_out: Sequence[float],
    tol: float,
    max_steps: int = 2_000_000,
) -> tuple[np.ndarray, StepStats]:
    """Integrate ``y' = rhs(segment, t, y)`` from ``t0`` and return ``y`` at
    each (nondecreasing, ``>= t0``) time in ``t_out``."""
    t_out = np.asarray(t_out, dtype=float)
    if np.any(np.diff(t_out) < 0) or (len(t_out) and t_out[0] < t0 - 1e-14):
        raise ValueError("output times must be nondecreasing and start at or after t0")
    bps = np.asarray(breakpoints, dtype=float)
    if len(t_out) and t_out[-1] > bps[-1] + 1e-12 * max(1.0, abs(bps[-1])):
        raise ValueError(f"output time {t_out[-1]} beyond the end of the domain {bps[-1]}")
    stats = StepStats()
    out = np.empty((len(t_out),) + y0.shape, dtype=complex)
    y = np.array(y0, dtype=complex)
    t = float(t0)
    h = None
    for idx, target in enumerate(t_out):
        while t < target:
            seg = min(max(int(np.searchsorted(bps, t, side="right")) - 1, 0), len(bps) - 2)
            stop = min(target, bps[seg + 1]) if seg < len(bps) - 2 else target
            y, h = _advance(rhs, seg, t, stop, y, h, tol, stats, max_steps)
            t = stop
        out[idx] = y
    return out, stats


def _advance(rhs, seg, t, t_end, y, h, tol, stats, max_steps):
    span = t_end - t
    if h is None:
        scale = np.abs(rhs(seg, t, y)).max() / max(np.abs(y).max(), 1e-300)
        h = min(span, 0.1 * tol**0.2 / max(scale, 1e-12))
    k1 = rhs(seg, t, y)
    while t < t_end:
        if stats.accepted + stats.rejected > max_steps:
            raise StepSizeUnderflow("step budget exhausted")
        last = h >= t_end - t
        step = t_end - t if last else h
        ks = np.empty((7, y.size), dtype=complex)
        ks[0] = k1.ravel()
        for s in range(1, 7):
            incr = (_A[s, :s] @ ks[:s]).reshape(y.shape)
            ks[s] = rhs(seg, t + _C[s] * step, y + step * incr).ravel()
        # stage 7 is evaluated at the 5th-order solution (FSAL)
        y_new = y + step * (_B5 @ ks).reshape(y.shape)
        err_vec = step * (_E @ ks)
        sc = tol * (1.0 + np.maximum(np.abs(y), np.abs(y_new))).ravel()
        err = float(np.max(np.abs(err_vec) / sc))
        if err <= 1.0:
            stats.accepted += 1
            stats.max_error_estimate = max(stats.max_error_estimate, err * tol)
            t = t_end if last else t + step
            y = y_new
            k1 = ks[6].reshape(y.shape)
            grown = step * (5.0 if err == 0 else min(5.0, 0.9 * err**-0.2))
            # a step clipped at a stop says little about the natural step size
            h = max(h, grown) if last else grown
        else:
            stats.rejected += 1
            h = step * max(0.1, 0.9 * err**-0.25)
            if h < 1e-14 * max(1.0, abs(t)):
                raise StepSizeUnderflow(f"step size underflow at t={t}")
    return y, h


def propagate(
    a: MatrixFunction,
    kappa,
    t0: float,
    y0: np.ndarray,
    t_out: Sequence[float],
    tol: float = 1e-10,
) -> tuple[np.ndarray, StepStats]:
    """Solve ``Y' = kappa A(t) Y`` from ``Y(t0) = y0``.

    ``kappa`` may be a 1-D array; then ``y0`` has shape ``(n_kappa, d, d)``
    (or ``(d, d)``, broadcast) and all values of kappa share the step sequence.
    """
    kap = np.asarray(kappa, dtype=complex)
    y0 = np.asarray(y0, dtype=complex)
    if kap.ndim == 1:
        y0 = np.broadcast_to(y0, kap.shape + (a.dim, a.dim)).copy()
        kap_b = kap[:, None, None]
    else:
        kap_b = kap
    pieces = a.pieces

    def rhs(seg, t, y):
        return kap_b * (pieces[seg](t) @ y)

    return integrate(rhs, a.breakpoints, t0, y0, t_out, tol)


def fundamental_solution(
    a: MatrixFunction,
    kappa=1.0,
    t_end: float | None = None,
    tol: float = 1e-10,
    grid: Sequence[float] | None = None,
) -> FundamentalSolution:
    """``Y(t; kappa)`` with ``Y(0) = I`` on ``grid`` (default ``[0, t_end]``)."""
    t0 = a.domain[0]
    if grid is None:
        if t_end is None:
            raise ValueError("need t_end or grid")
        grid = [t0, t_end]
    grid = np.asarray(grid, dtype=float)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if grid[-1] > a.domain[1] + 1e-12:
        raise ValueError(f"t={grid[-1]} beyond the domain end {a.domain[1]}")
    values, stats = propagate(a, kappa, t0, np.eye(a.dim), grid, tol)
    return FundamentalSolution(kappa, grid, values, stats)


def solve(a: MatrixFunction, t: float, kappa=1.0, tol: float = 1e-10) -> np.ndarray:
    """``Y(t; kappa)`` alone."""
    return fundamental_solution(a, kappa, t, tol).values[-1]


def action_norm(a: MatrixFunction, t: float, tol: float = 1e-8) -> float:
    """``gamma(t) = int_0^t |A(tau)|_2 dtau`` by adaptive quadrature."""
    t0 = a.domain[0]
    if t < t0 or t > a.domain[1] + 1e-12:
        raise ValueError(f"t={t} outside the domain {a.domain}")
    total = 0.0
    bps = a.breakpoints
    pieces = [(max(bps[k], t0), min(bps[k + 1], t), a.pieces[k]) for k in range(len(a.pieces))]
    pieces = [(lo, hi, fn) for lo, hi, fn in pieces if hi > lo]
    for lo, hi, fn in pieces:
        val, _ = quad(lambda s: spectral_norm(fn(s)), lo, hi,
                      epsabs=tol / max(len(pieces), 1), epsrel=0.0, limit=1000)
        total += val
    return total


def unit_direction_arclengths(a: MatrixFunction, y0: np.ndarray, t: float, tol: float = 1e-10) -> np.ndarray:
    """Arclength of ``y(tau) / |y(tau)|`` over ``[0, t]`` for each column of ``y0``.

    The unit vector obeys ``u' = (I - u u^T) A u``, so the speed is the norm
    of the component of ``A u`` orthogonal to ``u``.
    """
    y0 = np.asarray(y0, dtype=float)
    if y0.ndim == 1:
        y0 = y0[:, None]
    if np.any(np.linalg.norm(y0, axis=0) == 0):
        raise ValueError("initial vectors must be nonzero")
    d = a.dim
    pieces = a.pieces

    def rhs(seg, tau, state):
        y = state[:d].real
        m = pieces[seg](tau)
        dy = m @ y
        nrm = np.linalg.norm(y, axis=0)
        if np.any(nrm == 0):
            raise ArithmeticError("trajectory passed through the origin")
        u = y / nrm
        v = dy / nrm
        w = v - np.sum(u * v, axis=0) * u
        return np.vstack([dy, np.linalg.norm(w, axis=0)[None, :]]).astype(complex)

    state0 = np.vstack([y0, np.zeros((1, y0.shape[1]))])
    out, _ = integrate(rhs, a.breakpoints, a.domain[0], state0, [t], tol)
    return out[-1, d].real


def unit_direction_arclength(a: MatrixFunction, y0, t: float, tol: float = 1e-10) -> float:
    return float(unit_direction_arclengths(a, np.asarray(y0, dtype=float), t, tol)[0])
