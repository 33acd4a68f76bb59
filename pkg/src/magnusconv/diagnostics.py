"""Convergence certificates and divergence diagnostics.

* :func:`certify` compares ``gamma(t) = int_0^t |A|_2`` with the classical
  sufficient bounds, the largest of which is ``pi``.
* :func:`real_log_exists` decides whether a real matrix has a real logarithm
  as far as the principal branch and eigenvalue multiplicities allow.
* :func:`empirical_radius` estimates the radius of ``sum kappa^n Omega_n(t)``
  with a root test over the tail of the computed terms.
* :func:`eigenvalue_tracks`, :func:`collision_classify` and
  :func:`kappa_sweep` follow the eigenvalues of ``Y(t; kappa)`` for
  ``|kappa| = 1`` and look for defective collisions whose loop winds around
  the origin; the earliest such collision is the conjectured divergence onset.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq, linear_sum_assignment, minimize_scalar

from .linalg import (
    eigenvalue_clusters,
    geometric_multiplicity,
    logm_integral,
    on_negative_axis,
    spectral_norm,
)
from .magnus import MagnusSeries, partial_sum
from .ode import MatrixFunction, action_norm, propagate

COLLISION_TOL = 1e-4
DEFECT_RANK_TOL = 1e-6

# sufficient values r for "gamma(t) < r implies convergence", weakest first
THRESHOLDS: tuple[tuple[str, float], ...] = (
    ("half_log2", 0.5 * math.log(2)),
    ("0.57745", 0.57745),
    ("log2", math.log(2)),
    ("1", 1.0),
    ("1.08688", 1.08688),
    ("2", 2.0),
    ("pi", math.pi),
)


# ---------------------------------------------------------------------------
# certificates


class Verdict(str, enum.Enum):
    GUARANTEED = "GuaranteedConvergent"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class Certificate:
    t: float
    gamma: float
    verdict: Verdict
    thresholds: tuple[tuple[str, float, bool], ...]

    def as_row(self) -> dict:
        row = {"t": self.t, "gamma": self.gamma, "verdict": self.verdict.value}
        row.update({f"lt_{name}": ok for name, _, ok in self.thresholds})
        return row


def certificate_from_gamma(t: float, gamma: float, safety_margin: float = 1e-6) -> Certificate:
    verdict = Verdict.GUARANTEED if gamma < math.pi - safety_margin else Verdict.UNKNOWN
    flags = tuple((name, r, gamma < r) for name, r in THRESHOLDS)
    return Certificate(float(t), float(gamma), verdict, flags)


def certify(a: MatrixFunction, t: float, tol: float = 1e-8, safety_margin: float = 1e-6) -> Certificate:
    return certificate_from_gamma(t, action_norm(a, t, tol), safety_margin)


def certificate_table(a: MatrixFunction, times, tol: float = 1e-8) -> list[Certificate]:
    """Certificates on a grid; gamma is accumulated interval by interval."""
    times = np.asarray(times, dtype=float)
    out, gamma, prev = [], 0.0, a.domain[0]
    for t in times:
        if t < prev:
            raise ValueError("times must be nondecreasing")
        gamma += action_norm(_restricted(a, prev), t, tol) if t > prev else 0.0
        out.append(certificate_from_gamma(t, gamma))
        prev = t
    return out


def _restricted(a: MatrixFunction, t0: float) -> MatrixFunction:
    if t0 <= a.domain[0]:
        return a
    k = a.segment_index(t0)
    return MatrixFunction(a.dim, (t0,) + a.breakpoints[k + 1:], a.pieces[k:], a.name)


def action_crossing(a: MatrixFunction, level: float = math.pi, tol: float = 1e-8) -> float | None:
    """Smallest ``t`` with ``gamma(t) = level`` (``None`` if never reached)."""
    lo, hi = a.domain
    if action_norm(a, hi, tol) < level:
        return None
    return brentq(lambda t: action_norm(a, t, tol) - level, lo, hi, xtol=1e-10)


# ---------------------------------------------------------------------------
# real logarithm


class RealLog(str, enum.Enum):
    YES = "Yes"
    NO = "No"
    PRINCIPAL_BRANCH_INAPPLICABLE = "PrincipalBranchInapplicable"


@dataclass(frozen=True)
class NegativeCluster:
    centroid: complex
    algebraic: int
    geometric: int

    @property
    def defective(self) -> bool:
        return self.geometric < self.algebraic


@dataclass(frozen=True)
class RealLogReport:
    verdict: RealLog
    negative: tuple[NegativeCluster, ...] = ()


def real_log_exists(y, cluster_tol: float = COLLISION_TOL, rank_tol: float = DEFECT_RANK_TOL) -> RealLogReport:
    """Three-way verdict on the existence of a real logarithm.

    Eigenvalues closer than ``cluster_tol`` are treated as one multiple
    eigenvalue (a defective eigenvalue splits by about the square root of
    the rounding error). A real logarithm needs the Jordan blocks of every
    negative eigenvalue to come in equal pairs, so an odd algebraic or
    geometric multiplicity rules it out.
    """
    y = np.asarray(y)
    if np.iscomplexobj(y):
        if np.abs(y.imag).max() > 1e-9 * max(1.0, np.abs(y).max()):
            raise ValueError("matrix is not real")
        y = y.real
    vals = np.linalg.eigvals(y)
    if np.min(np.abs(vals)) <= 1e-14 * max(1.0, spectral_norm(y)):
        raise ValueError("matrix is singular")
    negative = []
    for group in eigenvalue_clusters(vals, cluster_tol):
        centroid = complex(np.mean(vals[group]))
        if on_negative_axis(centroid):
            geo = geometric_multiplicity(y, centroid.real, rank_tol)
            negative.append(NegativeCluster(centroid, len(group), geo))
    if not negative:
        return RealLogReport(RealLog.YES)
    if any(c.algebraic % 2 or c.geometric % 2 for c in negative):
        return RealLogReport(RealLog.NO, tuple(negative))
    return RealLogReport(RealLog.PRINCIPAL_BRANCH_INAPPLICABLE, tuple(negative))


# ---------------------------------------------------------------------------
# radius of convergence


def empirical_radius(series: MagnusSeries, t: float, window: int = 10) -> float:
    """``1 / max_{n in tail} |Omega_n(t)|_2 ** (1/n)`` over the last ``window`` terms."""
    if series.order < 20:
        raise ValueError("need at least 20 terms")
    n0 = series.order - window + 1
    norms = series.term_norms(t)[n0 - 1:]
    roots = [nrm ** (1.0 / n) for n, nrm in zip(range(n0, series.order + 1), norms) if nrm > 0]
    if not roots:
        return math.inf
    return 1.0 / max(roots)


def divergence_onset(series: MagnusSeries, t_lo: float, t_hi: float, samples: int = 200,
                     window: int = 10, xtol: float = 1e-6) -> float | None:
    """First ``t`` in ``[t_lo, t_hi]`` where the empirical radius drops to 1."""
    grid = np.linspace(t_lo, t_hi, samples + 1)
    prev = grid[0]
    if empirical_radius(series, prev, window) < 1:
        return float(prev)
    for t in grid[1:]:
        if empirical_radius(series, t, window) < 1:
            lo, hi = prev, t
            while hi - lo > xtol:
                mid = 0.5 * (lo + hi)
                if empirical_radius(series, mid, window) < 1:
                    hi = mid
                else:
                    lo = mid
            return 0.5 * (lo + hi)
        prev = t
    return None


def log_baseline(a: MatrixFunction, times, tol: float = 1e-10) -> np.ndarray:
    """``|log Y(t)|_2`` along ``times`` (principal logarithm, NaN where it fails)."""
    times = np.asarray(times, dtype=float)
    ys, _ = propagate(a, 1.0, a.domain[0], np.eye(a.dim), times, tol)
    out = np.full(len(times), np.nan)
    for k, y in enumerate(ys):
        try:
            out[k] = spectral_norm(logm_integral(y.real))
        except (ValueError, ArithmeticError):
            pass
    return out


def partial_sum_onset(series: MagnusSeries, a: MatrixFunction, times, n: int | None = None,
                      factor: float = 10.0) -> float | None:
    """First ``t`` where ``|sum_{k<=n} Omega_k(t)|`` exceeds ``factor`` times
    ``|log Y(t)|`` (the partial sums have visibly blown up)."""
    n = series.order if n is None else n
    times = np.asarray(times, dtype=float)
    base = log_baseline(a, times)
    for t, b in zip(times, base):
        if spectral_norm(partial_sum(series, n, t)) > factor * b:
            return float(t)
    return None


def partial_sum_table(series: MagnusSeries, times, orders=(15, 20, 25, 30),
                      entries=((0, 0), (1, 2))) -> list[dict]:
    """Rows ``t, n, entry values`` of partial sums (plot data)."""
    rows = []
    for t in times:
        vals = np.cumsum(series.term_values(float(t)), axis=0)
        for n in orders:
            if n > series.order:
                continue
            row = {"t": float(t), "n": n}
            for i, j in entries:
                row[f"omega_{i + 1}{j + 1}"] = float(vals[n - 1, i, j])
            rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# eigenvalue trajectories


@dataclass(frozen=True)
class CollisionEvent:
    t_star: float
    lambda_star: complex
    track_indices: tuple[int, int]
    kappa: complex = 1.0
    defective: bool | None = None
    winding: int | None = None
    alt_winding: int | None = None
    algebraic: int | None = None
    geometric: int | None = None
    unstable: bool = False

    @property
    def alpha(self) -> float:
        return float(np.angle(self.kappa) % (2 * np.pi))

    @property
    def encircles(self) -> bool:
        return bool(self.winding)

    @property
    def qualifies(self) -> bool:
        """Defective and winding around the origin."""
        return bool(self.defective) and self.encircles

    @property
    def on_negative_axis(self) -> bool:
        return abs(self.lambda_star.imag) <= COLLISION_TOL and self.lambda_star.real < 0


@dataclass
class Trajectory:
    kappa: complex
    grid: np.ndarray
    tracks: np.ndarray  # (len(grid), dim)
    solutions: np.ndarray  # Y(t; kappa) on the grid
    events: list[CollisionEvent] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    ambiguous_steps: list[tuple[int, frozenset]] = field(default_factory=list)


_PERMS: dict[int, np.ndarray] = {}


def _perms(d: int) -> np.ndarray | None:
    if d > 8:
        return None
    if d not in _PERMS:
        _PERMS[d] = np.array(list(itertools.permutations(range(d))))
    return _PERMS[d]


def _assign(pred: np.ndarray, cur: np.ndarray):
    """Order ``cur`` so that ``cur[order[i]]`` continues track ``i``."""
    d = len(pred)
    cost = np.abs(pred[:, None] - cur[None, :])
    perms = _perms(d)
    if perms is None:
        _, cols = linear_sum_assignment(cost)
        return cols, frozenset()
    totals = cost[np.arange(d), perms].sum(axis=1)
    if len(totals) == 1:
        return perms[0], frozenset()
    first, second = np.argpartition(totals, 1)[:2]
    if totals[second] < totals[first]:
        first, second = second, first
    ambiguous = frozenset()
    if totals[second] - totals[first] <= 1e-12:
        ambiguous = frozenset(np.nonzero(perms[first] != perms[second])[0].tolist())
    return perms[first], ambiguous


def _order_tracks(grid: np.ndarray, spectra: np.ndarray):
    n, d = spectra.shape
    tracks = np.empty_like(spectra)
    tracks[0] = spectra[0]
    ambiguous = []
    for k in range(1, n):
        prev_step = grid[k - 1] - grid[k - 2] if k > 1 else 0.0
        if prev_step == 0:
            pred = tracks[k - 1]
        else:
            # linear extrapolation; works for decreasing grids too
            ratio = (grid[k] - grid[k - 1]) / prev_step
            pred = tracks[k - 1] + ratio * (tracks[k - 1] - tracks[k - 2])
        order, amb = _assign(pred, spectra[k])
        tracks[k] = spectra[k][order]
        # every permutation ties at the start, where all tracks sit at 1
        if amb and k > 1:
            ambiguous.append((k, amb))
    return tracks, ambiguous


def _jumps(tracks: np.ndarray) -> np.ndarray:
    step = np.abs(np.diff(tracks, axis=0))
    return (step / np.maximum(1.0, np.abs(tracks[1:]))).max(axis=1)


def _build_trajectory(a: MatrixFunction, kappa: complex, grid: np.ndarray, ys: np.ndarray, tol: float,
                      max_jump: float = 0.05, max_passes: int = 10) -> Trajectory:
    grid = np.asarray(grid, dtype=float)
    ys = np.asarray(ys)
    for _ in range(max_passes):
        spectra = np.linalg.eigvals(ys)
        tracks, ambiguous = _order_tracks(grid, spectra)
        bad = np.nonzero((_jumps(tracks) > max_jump) & (np.diff(grid) > 1e-9))[0]
        if len(bad) == 0:
            break
        new_t, new_y = [], []
        for k in bad:
            mid = 0.5 * (grid[k] + grid[k + 1])
            y_mid, _ = propagate(a, kappa, grid[k], ys[k], [mid], tol)
            new_t.append(mid)
            new_y.append(y_mid[0])
        grid = np.concatenate([grid, new_t])
        ys = np.concatenate([ys, np.array(new_y)])
        order = np.argsort(grid, kind="stable")
        grid, ys = grid[order], ys[order]
    traj = Trajectory(complex(kappa), grid, tracks, ys, ambiguous_steps=ambiguous)
    traj.warnings.extend(f"ambiguous assignment at t={grid[k]:.6g} among tracks {sorted(s)}" for k, s in ambiguous)
    return traj


def _pair_distance_at(a, kappa, t0, y0, t, centre, tol):
    y, _ = propagate(a, kappa, t0, y0, [t], tol)
    ev = np.linalg.eigvals(y[0])
    near = ev[np.argsort(np.abs(ev - centre))[:2]]
    return abs(near[0] - near[1]), near, y[0]


def _detect_collisions(a: MatrixFunction, traj: Trajectory, tol: float, collision_tol: float) -> list[CollisionEvent]:
    grid, tracks, ys = traj.grid, traj.tracks, traj.solutions
    n, d = tracks.shape
    found: list[CollisionEvent] = []
    for i, j in itertools.combinations(range(d), 2):
        dist = np.abs(tracks[:, i] - tracks[:, j])
        for k in range(1, n):
            left = dist[k - 1] >= dist[k]
            right = k == n - 1 or dist[k + 1] >= dist[k]
            if not (left and right):
                continue
            move = max(np.abs(tracks[k, [i, j]] - tracks[k - 1, [i, j]]).max(),
                       np.abs(tracks[min(k + 1, n - 1), [i, j]] - tracks[k, [i, j]]).max())
            if dist[k] > 2 * move + collision_tol:
                continue
            lo, hi = grid[k - 1], grid[min(k + 1, n - 1)]
            centre = 0.5 * (tracks[k, i] + tracks[k, j])
            y_lo = ys[k - 1]
            res = minimize_scalar(lambda s: _pair_distance_at(a, traj.kappa, lo, y_lo, s, centre, tol)[0],
                                  bounds=(lo, hi), method="bounded", options={"xatol": 1e-8})
            t_star = float(res.x)
            # a minimum at the right end of the window may sit on the last grid point
            if k == n - 1 and dist[k] < res.fun:
                t_star = float(grid[k])
            dmin, near, y_star = _pair_distance_at(a, traj.kappa, lo, y_lo, t_star, centre, tol)
            if dmin >= collision_tol or t_star <= grid[0] + 1e-9:
                continue
            if any(e.track_indices == (i, j) and abs(e.t_star - t_star) < 1e-6 for e in found):
                continue
            event = CollisionEvent(t_star, complex(near.mean()), (i, j), traj.kappa)
            found.append(collision_classify(traj, event, y_star, collision_tol))
    found.sort(key=lambda e: e.t_star)
    return found


def eigenvalue_tracks(a: MatrixFunction, kappa: complex, t_end: float, samples: int = 200,
                      tol: float = 1e-10, collision_tol: float = COLLISION_TOL) -> Trajectory:
    """Continuity-ordered eigenvalues of ``Y(t; kappa)`` on ``[0, t_end]``
    with detected collision events."""
    if samples < 100:
        raise ValueError("need at least 100 samples")
    grid = np.linspace(a.domain[0], t_end, samples + 1)
    ys, _ = propagate(a, kappa, a.domain[0], np.eye(a.dim), grid, tol)
    traj = _build_trajectory(a, kappa, grid, ys, tol)
    traj.events = _detect_collisions(a, traj, tol, collision_tol)
    return traj


def _phase_increments(track: np.ndarray) -> np.ndarray:
    return np.angle(track[1:] / track[:-1])


def _winding(traj: Trajectory, i: int, j: int, t_star: float, lam: complex) -> tuple[int, int | None]:
    upto = np.searchsorted(traj.grid, t_star, side="right")
    ti = np.append(traj.tracks[:upto, i], lam)
    tj = np.append(traj.tracks[:upto, j], lam)
    pi, pj = _phase_increments(ti), _phase_increments(tj)
    winding = int(round((pi.sum() - pj.sum()) / (2 * np.pi)))
    alt = None
    for k, members in traj.ambiguous_steps:
        if k < upto and {i, j} <= members:
            # swap the continuations of i and j from step k on
            s = k - 1
            alt_i = pi[:s].sum() + pj[s:].sum()
            alt_j = pj[:s].sum() + pi[s:].sum()
            alt = int(round((alt_i - alt_j) / (2 * np.pi)))
            break
    return winding, alt


def collision_classify(traj: Trajectory, event: CollisionEvent, y_star: np.ndarray,
                       collision_tol: float = COLLISION_TOL, rank_tol: float = DEFECT_RANK_TOL) -> CollisionEvent:
    """Fill in defectiveness and the winding number of a collision."""
    ev = np.linalg.eigvals(y_star)
    lam = event.lambda_star
    alg = int(np.count_nonzero(np.abs(ev - lam) < collision_tol))
    geo = geometric_multiplicity(y_star, lam, rank_tol)
    sv = np.linalg.svd(y_star - lam * np.eye(len(ev)), compute_uv=False)
    scale = spectral_norm(y_star)
    unstable = bool(np.any((sv > 1e-2 * rank_tol * scale) & (sv < 1e2 * rank_tol * scale)))
    i, j = event.track_indices
    winding, alt = _winding(traj, i, j, event.t_star, lam)
    return replace(event, defective=geo < alg, winding=winding, alt_winding=alt,
                   algebraic=alg, geometric=geo, unstable=unstable)


# ---------------------------------------------------------------------------
# sweep over |kappa| = 1


@dataclass(frozen=True)
class ClosestApproach:
    alpha: float
    t: float
    distance: float
    lam: complex
    pair: tuple[int, int]


@dataclass
class SweepResult:
    approaches: list[ClosestApproach]
    collisions: list[CollisionEvent]
    best: CollisionEvent | None
    per_alpha: list[tuple[float, CollisionEvent | None]] = field(default_factory=list)

    @property
    def qualifying(self) -> list[CollisionEvent]:
        return [e for e in self.collisions if e.qualifies]


def _local_minima(traj: Trajectory, alpha: float) -> list[ClosestApproach]:
    grid, tracks = traj.grid, traj.tracks
    n, d = tracks.shape
    out = []
    for i, j in itertools.combinations(range(d), 2):
        dist = np.abs(tracks[:, i] - tracks[:, j])
        for k in range(2, n):
            if dist[k - 1] >= dist[k] and (k == n - 1 or dist[k + 1] >= dist[k]):
                out.append(ClosestApproach(alpha, float(grid[k]), float(dist[k]),
                                           complex(0.5 * (tracks[k, i] + tracks[k, j])), (i, j)))
    return out


def _seeds(approaches: list[ClosestApproach], n_alpha: int, t_scale: float) -> list[ClosestApproach]:
    """Closest approaches that are also local minima across neighbouring alphas."""
    by_alpha: dict[float, list[ClosestApproach]] = {}
    for c in approaches:
        by_alpha.setdefault(c.alpha, []).append(c)
    alphas = sorted(by_alpha)
    seeds = []
    for idx, alpha in enumerate(alphas):
        nbrs = by_alpha[alphas[idx - 1]] + by_alpha[alphas[(idx + 1) % len(alphas)]]
        for c in by_alpha[alpha]:
            close = [o for o in nbrs if abs(o.t - c.t) < 0.1 * t_scale and abs(o.lam - c.lam) < 0.5]
            if all(o.distance >= c.distance for o in close):
                seeds.append(c)
    seeds.sort(key=lambda c: c.distance)
    return seeds


def _discriminant(a, t, alpha, centre, tol):
    y, _ = propagate(a, np.exp(1j * alpha), a.domain[0], np.eye(a.dim), [t], tol)
    ev = np.linalg.eigvals(y[0])
    near = ev[np.argsort(np.abs(ev - centre))[:2]]
    return (near[0] - near[1]) ** 2, near, y[0]


def refine_collision(a: MatrixFunction, t: float, alpha: float, centre: complex, t_max: float,
                     tol: float = 1e-12, max_iter: int = 40, collision_tol: float = COLLISION_TOL,
                     g_tol: float = 1e-12):
    """Newton iteration on ``(lam_i - lam_j)**2 = 0`` in the real unknowns
    ``(t, alpha)``; returns ``(t, alpha, lam)`` or ``None``.

    A defective collision is a simple zero of the squared gap and Newton
    converges quadratically. At a non-defective crossing the zero is double,
    the residual only drops by about 4 per step, and doubled steps are tried.
    """
    g, near, _ = _discriminant(a, t, alpha, centre, tol)
    h = 1e-6
    t_hi = min(t_max * 1.02, a.domain[1])
    ratios: list[float] = []
    for _ in range(max_iter):
        if abs(g) < g_tol:
            break
        centre = near.mean()
        ht = h if t + h <= a.domain[1] else -h
        gt = (_discriminant(a, t + ht, alpha, centre, tol)[0] - g) / ht
        ga = (_discriminant(a, t, alpha + h, centre, tol)[0] - g) / h
        jac = np.array([[gt.real, ga.real], [gt.imag, ga.imag]])
        try:
            step = np.linalg.solve(jac, [-g.real, -g.imag])
        except np.linalg.LinAlgError:
            break
        double_root = len(ratios) >= 2 and all(0.15 < r < 0.35 for r in ratios[-2:])
        lam_step = 2.0 if double_root else 1.0
        while lam_step > 1e-4:
            t_new, a_new = t + lam_step * step[0], alpha + lam_step * step[1]
            if a.domain[0] < t_new <= t_hi:
                g_new, near_new, _ = _discriminant(a, t_new, a_new, centre, tol)
                if abs(g_new) < abs(g):
                    break
            lam_step *= 0.5
        else:
            break
        ratios.append(abs(g_new) / abs(g))
        small = abs(step[0]) * lam_step < 1e-13 and abs(step[1]) * lam_step < 1e-13
        t, alpha, g, near = t_new, a_new, g_new, near_new
        if small:
            break
    if math.sqrt(abs(g)) >= collision_tol or t > t_max + 1e-9:
        return None
    return t, alpha % (2 * np.pi), complex(near.mean())


def classify_at(a: MatrixFunction, t_star: float, alpha: float, samples: int = 200,
                tol: float = 1e-10, collision_tol: float = COLLISION_TOL) -> CollisionEvent:
    """Collision event at ``(t_star, kappa = e^{i alpha})`` with tracks up to ``t_star``."""
    kappa = np.exp(1j * alpha)
    grid = np.linspace(a.domain[0], t_star, samples + 1)
    ys, _ = propagate(a, kappa, a.domain[0], np.eye(a.dim), grid, tol)
    traj = _build_trajectory(a, kappa, grid, ys, tol)
    last = traj.tracks[-1]
    pairs = list(itertools.combinations(range(a.dim), 2))
    i, j = min(pairs, key=lambda p: abs(last[p[0]] - last[p[1]]))
    lam = complex(0.5 * (last[i] + last[j]))
    event = CollisionEvent(float(t_star), lam, (i, j), complex(kappa))
    return collision_classify(traj, event, traj.solutions[-1], collision_tol)


def _angle_gap(a: float, b: float) -> float:
    d = abs(a - b) % (2 * np.pi)
    return min(d, 2 * np.pi - d)


def kappa_sweep(a: MatrixFunction, t_max: float, alpha_samples: int = 64, samples: int = 200,
                tol: float = 1e-10, max_seeds: int = 12, collision_tol: float = COLLISION_TOL) -> SweepResult:
    """Search ``|kappa| = 1`` for the earliest defective, origin-encircling
    eigenvalue collision of ``Y(t; kappa)`` with ``t <= t_max``."""
    if alpha_samples < 64:
        raise ValueError("need at least 64 alpha samples")
    alphas = 2 * np.pi * np.arange(alpha_samples) / alpha_samples
    kappas = np.exp(1j * alphas)
    grid = np.linspace(a.domain[0], t_max, samples + 1)
    ys_all, _ = propagate(a, kappas, a.domain[0], np.eye(a.dim), grid, tol)
    approaches: list[ClosestApproach] = []
    per_alpha = []
    for m, alpha in enumerate(alphas):
        traj = _build_trajectory(a, kappas[m], grid, ys_all[:, m], tol)
        mins = _local_minima(traj, float(alpha))
        approaches.extend(mins)
        direct = [c for c in mins if c.distance < collision_tol]
        per_alpha.append((float(alpha), None if not direct else
                          CollisionEvent(direct[0].t, direct[0].lam, direct[0].pair, complex(kappas[m]))))
    collisions: list[CollisionEvent] = []
    tried: list[tuple[float, float]] = []
    d_alpha = 2 * np.pi / alpha_samples
    for seed in _seeds(approaches, alpha_samples, t_max)[:max_seeds]:
        if any(abs(seed.t - t) < 1e-3 and _angle_gap(seed.alpha, al) < 1e-3 for t, al in tried):
            continue
        # neighbouring grid alphas see the same collision
        if any(abs(seed.t - e.t_star) < 0.05 * t_max and _angle_gap(seed.alpha, e.alpha) < 2.5 * d_alpha
               for e in collisions):
            continue
        tried.append((seed.t, seed.alpha))
        if seed.distance < collision_tol:
            hit = (seed.t, seed.alpha, seed.lam)
        else:
            hit = refine_collision(a, seed.t, seed.alpha, seed.lam, t_max, collision_tol=collision_tol)
        if hit is None:
            continue
        t_star, alpha_star, _ = hit
        if any(abs(e.t_star - t_star) < 1e-6 and _angle_gap(e.alpha, alpha_star) < 1e-6 for e in collisions):
            continue
        collisions.append(classify_at(a, t_star, alpha_star, samples, tol, collision_tol))
    collisions.sort(key=lambda e: (round(e.t_star, 6), round(min(e.alpha, 2 * np.pi - e.alpha), 6), e.alpha))
    best = next((e for e in collisions if e.qualifies), None)
    return SweepResult(approaches, collisions, best, per_alpha)
