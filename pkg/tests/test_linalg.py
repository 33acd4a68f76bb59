import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from magnusconv.linalg import (
    IllConditionedEigenbasis,
    NegativeSpectrum,
    eig,
    eigenvalue_clusters,
    expm,
    geometric_multiplicity,
    logm_eig,
    logm_integral,
    on_negative_axis,
    spectral_norm,
)


def square(n_max=5, scale=1.0):
    return st.integers(1, n_max).flatmap(
        lambda n: arrays(np.float64, (n, n), elements=st.floats(-scale, scale, allow_nan=False, width=64))
    )


@settings(max_examples=80, deadline=None)
@given(square(6, 8.0))
def test_expm_matches_scipy(m):
    ref = scipy.linalg.expm(m)
    assert np.allclose(expm(m), ref, rtol=1e-11, atol=1e-12 * max(1.0, np.abs(ref).max()))


def test_expm_special_cases():
    assert np.array_equal(expm(np.zeros((3, 3))), np.eye(3))
    n = np.array([[0.0, 2.0], [0.0, 0.0]])
    assert np.allclose(expm(n), [[1, 2], [0, 1]], atol=1e-15)
    rot = np.array([[0.0, 1.0], [-1.0, 0.0]]) * np.pi
    assert np.allclose(expm(rot), -np.eye(2), atol=1e-14)
    z = np.array([[1j, 0], [0, -1j]])
    assert np.allclose(expm(z), np.diag([np.exp(1j), np.exp(-1j)]))


def test_shape_and_size_checks():
    with pytest.raises(ValueError):
        expm(np.ones((2, 3)))
    with pytest.raises(ValueError):
        expm(np.eye(17))
    with pytest.raises(ValueError):
        expm(np.array([[np.nan]]))


@settings(max_examples=60, deadline=None)
@given(square(5, 1.0))
def test_log_of_exp_roundtrip(m):
    if spectral_norm(m) > 1:
        m = m / spectral_norm(m)
    back = logm_integral(expm(m))
    assert np.abs(back - m).max() < 1e-8


@settings(max_examples=40, deadline=None)
@given(square(4, 1.0))
def test_logm_integral_matches_scipy_on_positive_spectrum(m):
    m = m / max(1.0, spectral_norm(m) / 2)
    phi = np.eye(len(m)) * 3 + m  # eigenvalues in the disc |z - 3| <= 2
    ref = scipy.linalg.logm(phi)
    assert np.allclose(logm_integral(phi), ref, atol=1e-9)
    assert not np.iscomplexobj(logm_integral(phi))


def test_logm_rejects_the_cut():
    with pytest.raises(NegativeSpectrum):
        logm_integral(-np.eye(2))
    with pytest.raises(NegativeSpectrum):
        logm_integral(np.array([[-1.0, 0.0], [np.pi, -1.0]]))
    with pytest.raises(NegativeSpectrum):
        logm_eig(np.diag([1.0, -2.0]))


def test_logm_complex_input():
    phi = np.diag([np.exp(2j), np.exp(-0.5 + 1j)])
    assert np.allclose(logm_integral(phi), np.diag([2j, -0.5 + 1j]), atol=1e-10)


def test_logm_eig():
    phi = np.array([[2.0, 1.0], [0.0, 3.0]])
    assert np.allclose(logm_eig(phi), scipy.linalg.logm(phi))
    with pytest.raises(IllConditionedEigenbasis):
        logm_eig(np.array([[1.0, 1.0], [0.0, 1.0]]))


@settings(max_examples=60, deadline=None)
@given(square(8, 5.0))
def test_eig_residuals_and_conjugate_closure(m):
    w = eig(m).eigenvalues
    scale = max(spectral_norm(m), 1.0)
    for lam in w:
        # lam is an eigenvalue: M - lam I is numerically singular
        sv = np.linalg.svd(m - lam * np.eye(len(m)), compute_uv=False)
        assert sv[-1] <= 1e-9 * scale
    assert np.allclose(np.sort_complex(w), np.sort_complex(np.conj(w)), atol=1e-9 * scale)


def test_eig_survives_tiny_entries():
    e = 3.54069676e-241
    m = np.array([[1.0, 0.0, e], [1.0, e, e], [e, e, e]])
    assert np.allclose(np.sort(eig(m).eigenvalues.real), [0, 0, 1])


def test_geometric_multiplicity():
    assert geometric_multiplicity(-np.eye(2), -1.0) == 2
    assert geometric_multiplicity(np.array([[-1.0, 0.0], [np.pi, -1.0]]), -1.0) == 1
    assert geometric_multiplicity(np.diag([1.0, 2.0]), 3.0) == 0


def test_clusters_and_cut_band():
    groups = eigenvalue_clusters(np.array([1.0, 1.0 + 1e-6, 2.0, 2.0 + 5e-5, 2.0 + 1e-4]), 1e-4)
    assert sorted(map(sorted, groups)) == [[0, 1], [2, 3, 4]]
    assert on_negative_axis(-1 + 0j)
    assert on_negative_axis(0j)
    assert not on_negative_axis(-1 + 1e-6j)
    assert not on_negative_axis(1 + 0j)
