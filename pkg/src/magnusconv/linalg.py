"""Small dense matrix kernels: exponential, logarithms, spectra, norms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

MAX_DIM = 16

# band around the closed negative real axis treated as "on the cut"
CUT_TOL = 1e-9


class NegativeSpectrum(ValueError):
    """The matrix has an eigenvalue on the closed negative real axis, so the
    resolvent-integral logarithm does not apply."""


class IllConditionedEigenbasis(ValueError):
    pass


class EigenvalueFailure(ArithmeticError):
    pass


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    condition_estimate: float


def _square(m) -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] > MAX_DIM:
        raise ValueError(f"dimension {m.shape[0]} exceeds the desk-scale limit {MAX_DIM}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


# ---------------------------------------------------------------------------
# exponential: scaling and squaring with diagonal Pade approximants

_PADE = {
    3: (1.495585217958292e-2, [120, 60, 12, 1]),
    5: (2.539398330063230e-1, [30240, 15120, 3360, 420, 30, 1]),
    7: (9.504178996162932e-1, [17297280, 8648640, 1995840, 277200, 25200, 1512, 56, 1]),
    9: (2.097847961257068e0, [17643225600, 8821612800, 2075673600, 302702400, 30270240,
                             2162160, 110880, 3960, 90, 1]),
    13: (5.371920351148152e0, [64764752532480000, 32382376266240000, 7771770303897600,
                              1187353796428800, 129060195264000, 10559470521600,
                              670442572800, 33522128640, 1323241920, 40840800, 960960,
                              16380, 182, 1]),
}


def _pade(m: np.ndarray, b: list[int]) -> np.ndarray:
    n = m.shape[0]
    ident = np.eye(n, dtype=m.dtype)
    powers = [ident, m @ m]
    if len(b) == 14:
        a2 = powers[1]
        a4 = a2 @ a2
        a6 = a4 @ a2
        u = m @ (a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2)
                 + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident)
        v = (a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2)
             + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident)
    else:
        for _ in range(2, (len(b) - 1) // 2 + 1):
            powers.append(powers[-1] @ powers[1])
        u = m @ sum(b[2 * k + 1] * powers[k] for k in range(len(powers)))
        v = sum(b[2 * k] * powers[k] for k in range(len(powers)))
    return np.linalg.solve(v - u, v + u)


def expm(m) -> np.ndarray:
    """Matrix exponential (Higham's scaling and squaring, Pade 3..13)."""
    m = _square(m)
    if not np.iscomplexobj(m):
        m = m.astype(float)
    norm1 = np.linalg.norm(m, 1)
    for order in (3, 5, 7, 9):
        theta, b = _PADE[order]
        if norm1 <= theta:
            return _pade(m, b)
    theta, b = _PADE[13]
    s = max(0, int(np.ceil(np.log2(norm1 / theta)))) if norm1 > 0 else 0
    r = _pade(m / 2.0**s, b)
    for _ in range(s):
        r = r @ r
    if not np.all(np.isfinite(r)):
        raise OverflowError("matrix exponential overflowed")
    return r


# ---------------------------------------------------------------------------
# spectra


def eig(m) -> Spectrum:
    """Eigenvalues with the condition number of the eigenvector basis."""
    m = _square(m)
    # entries far below eps^2 |M| are noise to the eigenproblem but can upset
    # LAPACK's balancing when their squares underflow
    scale = spectral_norm(m)
    m = np.where(np.abs(m) < np.finfo(float).eps ** 2 * scale, 0, m)
    try:
        w, v = np.linalg.eig(m)
    except np.linalg.LinAlgError as exc:
        raise EigenvalueFailure(str(exc)) from exc
    residual = np.linalg.norm(m @ v - v * w, axis=0).max() if len(w) else 0.0
    if residual > 1e-9 * max(scale, 1.0):
        raise EigenvalueFailure(f"eigenpair residual {residual:.3g}")
    return Spectrum(w, float(np.linalg.cond(v)))


def eigvals(m) -> np.ndarray:
    return eig(m).eigenvalues


def spectral_norm(m) -> float:
    """Largest singular value."""
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def on_negative_axis(lam: complex, tol: float = CUT_TOL) -> bool:
    """``lam`` lies in the band around ``(-inf, 0]``."""
    return abs(lam.imag) <= tol * (1 + abs(lam)) and lam.real <= tol


def geometric_multiplicity(m, lam: complex, tol: float = 1e-6) -> int:
    """``dim - rank(M - lam I)``; singular values below ``tol * |M|_2`` count as zero."""
    m = _square(m)
    n = m.shape[0]
    sv = np.linalg.svd(m - lam * np.eye(n), compute_uv=False)
    scale = max(spectral_norm(m), np.finfo(float).tiny)
    return int(n - np.count_nonzero(sv > tol * scale))


def eigenvalue_clusters(values, tol: float) -> list[list[int]]:
    """Group indices of ``values`` whose chained distances are below ``tol``."""
    values = np.asarray(values)
    n = len(values)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(values[i] - values[j]) < tol:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def _check_cut(phi: np.ndarray):
    for lam in np.linalg.eigvals(phi):
        if on_negative_axis(complex(lam)):
            raise NegativeSpectrum(f"eigenvalue {complex(lam):.6g} lies on the closed negative real axis")


# ---------------------------------------------------------------------------
# logarithms

_GL_X, _GL_W = leggauss(15)


def _panel(phi: np.ndarray, a: float, b: float) -> np.ndarray:
    s = 0.5 * (b - a) * _GL_X + 0.5 * (a + b)
    n = phi.shape[0]
    ident = np.eye(n)
    stack = s[:, None, None] * ident + (1 - s)[:, None, None] * phi
    inv = np.linalg.inv(stack)
    return 0.5 * (b - a) * np.tensordot(_GL_W, inv, axes=1)


def logm_integral(phi, tol: float = 1e-10, max_panels: int = 4096) -> np.ndarray:
    """Principal logarithm from the resolvent integral

        log(phi) = (phi - I) int_0^inf (1 + mu)^-1 (mu I + phi)^-1 dmu.

    With ``mu = s / (1 - s)`` the integrand becomes ``(s I + (1 - s) phi)^-1``
    on ``[0, 1]``, which is bounded away from the cut. Panels are bisected
    until each one agrees with its two halves to ``tol``.
    """
    phi = _square(phi)
    if not np.iscomplexobj(phi):
        phi = phi.astype(float)
    _check_cut(phi)
    n = phi.shape[0]
    pending = [(0.0, 0.5, _panel(phi, 0.0, 0.5)), (0.5, 1.0, _panel(phi, 0.5, 1.0))]
    total = np.zeros_like(phi)
    panels = 0
    while pending:
        a, b, whole = pending.pop()
        mid = 0.5 * (a + b)
        left, right = _panel(phi, a, mid), _panel(phi, mid, b)
        halves = left + right
        panels += 1
        if np.abs(halves - whole).max() <= tol * max(1.0, np.abs(halves).max()) * (b - a) or b - a < 1e-12:
            total = total + halves
        elif panels > max_panels:
            raise ArithmeticError("resolvent quadrature did not converge")
        else:
            pending.append((a, mid, left))
            pending.append((mid, b, right))
    return (phi - np.eye(n)) @ total


def logm_eig(phi, cond_limit: float = 1e8) -> np.ndarray:
    """``V diag(log lam) V^-1`` with principal scalar logarithms."""
    phi = _square(phi)
    _check_cut(phi)
    w, v = np.linalg.eig(phi)
    if np.linalg.cond(v) > cond_limit:
        raise IllConditionedEigenbasis(f"eigenvector condition number {np.linalg.cond(v):.3g}")
    out = v @ np.diag(np.log(w.astype(complex))) @ np.linalg.inv(v)
    if not np.iscomplexobj(phi) and np.abs(out.imag).max() <= 1e-9 * max(1.0, np.abs(out).max()):
        return out.real
    return out
