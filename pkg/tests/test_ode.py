import math

import numpy as np
import pytest
from scipy.integrate import quad

from magnusconv import corpus
from magnusconv.linalg import expm, spectral_norm
from magnusconv.ode import (
    MatrixFunction,
    StepSizeUnderflow,
    action_norm,
    fundamental_solution,
    integrate,
    propagate,
    solve,
    unit_direction_arclengths,
)


@pytest.mark.parametrize("name, times", [("ex1", (1.0, 3.0, 8.0)), ("ex2", (1.0, math.pi, 4.0)), ("ex3", (0.5, 2.0, 4.0))])
@pytest.mark.parametrize("tol", [1e-6, 1e-10])
def test_error_within_tolerance_times_growth(name, times, tol):
    ex = corpus.get(name)
    sol = fundamental_solution(ex.function, grid=[0.0, *times], tol=tol)
    for t, y in zip(times, sol.values[1:]):
        bound = tol * math.exp(action_norm(ex.function, t))
        assert spectral_norm(y - ex.exact(t)) <= bound


def test_solution_crosses_breakpoints_exactly():
    ex = corpus.bch_example([[0, 1], [-2, 0]], [[1, 0], [3, -1]])
    for t in (0.5, 1.0, 1.5, 2.0):
        assert np.allclose(solve(ex.function, t, tol=1e-12), ex.exact(t), atol=1e-10)


def test_batched_kappa_matches_single_runs(ex4):
    kappas = np.exp(1j * np.linspace(0, 2 * np.pi, 5, endpoint=False))
    batch, _ = propagate(ex4.function, kappas, 0.0, np.eye(4), [0.4, 0.8], tol=1e-11)
    for k, kap in enumerate(kappas):
        single = solve(ex4.function, 0.8, kap, tol=1e-11)
        assert np.allclose(batch[1, k], single, atol=1e-8 * spectral_norm(single))


def test_liouville_determinant(ex4):
    t = 0.9
    trace_integral, _ = quad(lambda s: np.trace(ex4.function(s)), 0, t)
    det = np.linalg.det(solve(ex4.function, t, tol=1e-12))
    assert det.real == pytest.approx(math.exp(trace_integral), rel=1e-9)


def test_step_statistics_and_grid_lookup(ex3):
    sol = fundamental_solution(ex3.function, grid=[0, 1, 2], tol=1e-9)
    assert sol.stats.accepted > 0
    assert np.allclose(sol.at(1.0), ex3.exact(1.0), rtol=1e-7)
    with pytest.raises(KeyError):
        sol.at(1.5)


def test_input_validation(ex3):
    with pytest.raises(ValueError):
        fundamental_solution(ex3.function, t_end=5.0)
    with pytest.raises(ValueError):
        fundamental_solution(ex3.function, t_end=1.0, tol=0)
    with pytest.raises(ValueError):
        action_norm(ex3.function, -1.0)
    with pytest.raises(ValueError):
        ex3.function(7.0)


def test_step_budget():
    with pytest.raises(StepSizeUnderflow):
        integrate(lambda seg, t, y: 1e3 * y, (0.0, 1.0), 0.0, np.ones(1), [1.0], tol=1e-12, max_steps=10)


def test_action_norm_values(ex1, ex2):
    assert action_norm(ex1.function, 2.5) == pytest.approx(2.5, abs=1e-10)
    assert action_norm(ex2.function, math.pi) == pytest.approx(math.pi, abs=1e-8)
    bch = corpus.bch_example([[0, 2], [0, 0]], [[1, 0], [0, 3]])
    assert action_norm(bch.function, 2.0) == pytest.approx(5.0, abs=1e-8)


def test_callable_function():
    f = MatrixFunction.from_callable(lambda t: np.array([[0.0, t], [0.0, 0.0]]), 2, 2.0)
    y = solve(f, 2.0, tol=1e-12)
    assert np.allclose(y, [[1, 2], [0, 1]], atol=1e-12)


def test_arclength_bounded_by_action(ex4):
    rng = np.random.default_rng(5)
    y0 = rng.standard_normal((4, 20))
    t = 0.7
    lengths = unit_direction_arclengths(ex4.function, y0, t)
    assert np.all(lengths <= action_norm(ex4.function, t) + 1e-6)
    assert np.all(lengths > 0)


def test_arclength_of_rotation_is_exact(ex1):
    # y(t) = exp(tA) y0 rotates at unit angular speed
    lengths = unit_direction_arclengths(ex1.function, np.array([[1.0], [0.0]]), 2.0)
    assert lengths[0] == pytest.approx(2.0, abs=1e-9)
    assert np.allclose(expm(2.0 * np.array([[0.0, 1.0], [-1.0, 0.0]])), ex1.exact(2.0))


def test_target_past_last_breakpoint_is_rejected(ex4):
    with pytest.raises(ValueError):
        propagate(ex4.function, 1.0, 0.0, np.eye(4), [2.0 + 1e-6])


def test_ex3_eigenvalues_follow_the_diagonal(ex3):
    t = 2 * math.pi / 3
    ev = np.sort(np.linalg.eigvals(solve(ex3.function, t, tol=1e-12)).real)
    assert np.allclose(ev, [math.exp(-t), math.exp(2 * t)], rtol=1e-9)
