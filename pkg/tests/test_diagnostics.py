import math

import numpy as np
import pytest

from magnusconv import corpus
from magnusconv.diagnostics import (
    RealLog,
    Verdict,
    action_crossing,
    certificate_table,
    certify,
    divergence_onset,
    eigenvalue_tracks,
    empirical_radius,
    kappa_sweep,
    partial_sum_onset,
    partial_sum_table,
    real_log_exists,
)
from magnusconv.diagnostics import _order_tracks
from magnusconv.magnus import MagnusSeries, magnus_terms
from magnusconv.ode import solve

# ---------------------------------------------------------------------------
# certificates


def test_certificate_at_zero(ex4):
    cert = certify(ex4.function, 0.0)
    assert cert.gamma == 0
    assert cert.verdict is Verdict.GUARANTEED
    assert all(ok for _, _, ok in cert.thresholds)


def test_certificate_values(ex4):
    assert certify(ex4.function, 0.5).verdict is Verdict.GUARANTEED
    late = certify(ex4.function, 0.733)
    assert late.verdict is Verdict.UNKNOWN
    assert late.gamma == pytest.approx(4.36, abs=0.05)
    flags = dict((name, ok) for name, _, ok in certify(ex4.function, 0.1).thresholds)
    assert flags["pi"] and not flags["half_log2"]


def test_certificate_is_monotone(ex4):
    table = certificate_table(ex4.function, np.linspace(0, 1, 41))
    gammas = [c.gamma for c in table]
    assert all(b >= a for a, b in zip(gammas, gammas[1:]))
    verdicts = [c.verdict is Verdict.GUARANTEED for c in table]
    first_unknown = verdicts.index(False)
    assert all(verdicts[:first_unknown]) and not any(verdicts[first_unknown:])
    assert table[-1].gamma == pytest.approx(certify(ex4.function, 1.0).gamma, abs=1e-7)


def test_sharpness_of_pi(ex2):
    assert certify(ex2.function, math.pi - 0.01).verdict is Verdict.GUARANTEED
    assert certify(ex2.function, math.pi).verdict is Verdict.UNKNOWN
    assert real_log_exists(solve(ex2.function, math.pi)).verdict is RealLog.NO


def test_action_crossing(ex4, ex1):
    assert action_crossing(ex4.function) == pytest.approx(0.556, abs=1e-3)
    assert action_crossing(ex1.function, level=2.0) == pytest.approx(2.0, abs=1e-8)
    assert action_crossing(ex1.function, level=100.0) is None


# ---------------------------------------------------------------------------
# real logarithm


def test_real_log_verdicts(ex3):
    report = real_log_exists(np.array([[-1.0, 0.0], [math.pi, -1.0]]))
    assert report.verdict is RealLog.NO
    assert report.negative[0].defective
    minus_id = real_log_exists(-np.eye(2))
    assert minus_id.verdict is RealLog.PRINCIPAL_BRANCH_INAPPLICABLE
    assert not minus_id.negative[0].defective
    assert real_log_exists(ex3.exact(2 * math.pi / 3)).verdict is RealLog.YES
    assert real_log_exists(np.diag([-1.0, 2.0])).verdict is RealLog.NO


def test_real_log_rejects_bad_input():
    with pytest.raises(ValueError):
        real_log_exists(np.diag([1.0, 0.0]))
    with pytest.raises(ValueError):
        real_log_exists(np.diag([1.0, 1j]))


def test_real_log_tolerates_split_defective_pair():
    # rounding splits the double eigenvalue of a Jordan block into a close pair
    y = np.array([[-1.0, 1e-12], [math.pi, -1.0]])
    assert real_log_exists(y).verdict is RealLog.NO


# ---------------------------------------------------------------------------
# radius


def test_radius_infinite_for_commuting(ex1):
    series = magnus_terms(ex1.poly, 20)
    assert math.isinf(empirical_radius(series, 5.0))


def test_radius_needs_twenty_terms(ex3):
    with pytest.raises(ValueError):
        empirical_radius(magnus_terms(ex3.poly, 10), 1.0)


def test_radius_decreases_in_t(ex3_series):
    radii = [empirical_radius(ex3_series, t) for t in (0.5, 1.0, 1.5, 2.0, 2.5)]
    assert all(b < a for a, b in zip(radii, radii[1:]))


def test_ex3_onset_near_pole(ex3_series):
    onset = divergence_onset(ex3_series, 0.01, 3.0)
    assert 0.95 * 2 * math.pi / 3 <= onset <= 1.05 * 2 * math.pi / 3


def test_partial_sum_blowup_follows_radius_onset(ex3_series, ex3):
    grid = np.linspace(0.05, 3.0, 60)
    blowup = partial_sum_onset(ex3_series, ex3.function, grid)
    assert blowup is not None
    assert blowup > divergence_onset(ex3_series, 0.01, 3.0)


def test_partial_sum_table(ex3_series):
    rows = partial_sum_table(ex3_series, [0.5, 1.0], orders=(15, 30), entries=((0, 0), (0, 1)))
    assert len(rows) == 4
    assert set(rows[0]) == {"t", "n", "omega_11", "omega_12"}
    assert rows[0]["omega_11"] == pytest.approx(1.0)  # 2t


# ---------------------------------------------------------------------------
# trajectories


def test_tracks_start_at_one_and_match_spectra(ex4):
    traj = eigenvalue_tracks(ex4.function, np.exp(0.3j), 1.0)
    assert np.allclose(traj.tracks[0], 1.0)
    spectra = np.linalg.eigvals(traj.solutions)
    for vals, tracks in zip(spectra, traj.tracks):
        assert np.allclose(np.sort_complex(vals), np.sort_complex(tracks))


def test_sample_floor(ex4):
    with pytest.raises(ValueError):
        eigenvalue_tracks(ex4.function, 1.0, 1.0, samples=50)


def test_tracks_are_reproducible_backwards(ex4):
    traj = eigenvalue_tracks(ex4.function, 1.0, 1.0)
    spectra = np.linalg.eigvals(traj.solutions)
    back, _ = _order_tracks(traj.grid[::-1], spectra[::-1])
    back = back[::-1]
    perm = [int(np.argmin(np.abs(traj.tracks[-1] - z))) for z in back[-1]]
    # the two directions agree everywhere except at t = 0, where all tracks meet
    assert np.allclose(back[1:], traj.tracks[1:, perm])


def test_ex4_real_kappa_has_no_negative_axis_collision(ex4):
    traj = eigenvalue_tracks(ex4.function, 1.0, 1.0)
    assert not [e for e in traj.events if e.on_negative_axis]
    final = traj.tracks[-1]
    assert np.sum(np.abs(final.imag) < 1e-9) == 2  # two real tracks
    assert np.sum(np.abs(final.imag) > 1e-3) == 2  # and a complex pair


def test_ex3_imaginary_kappa_collision(ex3):
    traj = eigenvalue_tracks(ex3.function, 1j, 3.0)
    assert len(traj.events) == 1
    event = traj.events[0]
    assert event.t_star == pytest.approx(2 * math.pi / 3, abs=1e-6)
    assert event.lambda_star == pytest.approx(np.exp(-2j * math.pi / 3), abs=1e-4)
    assert event.defective and event.winding in (1, -1)
    assert event.qualifies


def test_winding_stable_under_refinement(ex3, ex4):
    for a, kappa, t_end in ((ex3.function, 1j, 3.0), (ex4.function, np.exp(1.8045j), 0.75)):
        coarse = eigenvalue_tracks(a, kappa, t_end, samples=200)
        fine = eigenvalue_tracks(a, kappa, t_end, samples=400)
        assert [e.winding for e in coarse.events] == [e.winding for e in fine.events]


def test_ex1_collisions_are_not_defective(ex1):
    traj = eigenvalue_tracks(ex1.function, 1.0, 7.0)
    times = [e.t_star for e in traj.events]
    assert times == pytest.approx([math.pi, 2 * math.pi], abs=1e-6)
    assert not any(e.defective for e in traj.events)
    assert not any(e.qualifies for e in traj.events)


# ---------------------------------------------------------------------------
# sweep


def test_sweep_ex3_finds_quarter_turn(ex3):
    res = kappa_sweep(ex3.function, 3.0)
    assert res.best is not None
    assert res.best.alpha == pytest.approx(math.pi / 2, abs=1e-3)
    assert res.best.t_star == pytest.approx(2 * math.pi / 3, abs=1e-4)


def test_sweep_needs_64_alphas(ex3):
    with pytest.raises(ValueError):
        kappa_sweep(ex3.function, 3.0, alpha_samples=32)


def test_sweep_without_collisions():
    # a single real eigenvalue path: nothing can collide
    from magnusconv.polymat import PiecewisePolyMatrix, poly_matrix
    from magnusconv.ode import MatrixFunction

    a = PiecewisePolyMatrix((0, 1), [poly_matrix([[[1], [0]], [[0], [2]]])])
    res = kappa_sweep(MatrixFunction.from_poly(a), 1.0)
    assert res.best is None and not res.collisions
