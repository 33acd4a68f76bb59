"""Built-in example problems.

``ex1``  constant rotation generator; every collision of eigenvalues is
         non-defective.
``ex2``  trigonometric A(t) with |A(t)|_2 = 1, so gamma(pi) = pi exactly and
         Y(pi) = [[-1, 0], [pi, -1]] has no real logarithm.
``ex3``  upper-triangular polynomial A(t); the series diverges at t = 2 pi/3
         although Y(t) keeps a real logarithm.
``ex4``  4x4 polynomial A(t) with no special structure.
``bch``  piecewise-constant A(t) whose series at t = 2 is the BCH series.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .linalg import expm
from .magnus import bch_source
from .ode import MatrixFunction
from .polymat import PiecewisePolyMatrix, poly_matrix


@dataclass(frozen=True)
class Example:
    name: str
    summary: str
    formula: str
    function: MatrixFunction
    poly: PiecewisePolyMatrix | None = None
    exact: Callable[[float], np.ndarray] | None = None

    @property
    def numeric_only(self) -> bool:
        return self.poly is None


EX1_A = [[0, 1], [-1, 0]]

EX4_ROWS = [
    [[0, -1], [0, 3], [0], [2, 1, -3]],
    [[0, -1, 1], [-3], [3, 2, 1], [0]],
    [[3], [0], [0, -2, 1], [-3, 0, -1]],
    [[3, -1, 1], [0, -3, 2], [-2, -3], [2, -1]],
]


def _ex1() -> Example:
    a = PiecewisePolyMatrix((0, 8), [poly_matrix([[[x] for x in r] for r in EX1_A])])
    gen = np.array(EX1_A, dtype=float)
    return Example(
        "ex1",
        "constant rotation generator; collisions at t = k*pi are non-defective",
        "A = [[0, 1], [-1, 0]]",
        MatrixFunction.from_poly(a, "ex1"),
        a,
        lambda t: expm(t * gen),
    )


def ex2_matrix(t: float) -> np.ndarray:
    s, c = np.sin(2 * t), np.cos(2 * t)
    return 0.5 * np.array([[s, -1 - c], [1 - c, -s]])


def ex2_solution(t: float) -> np.ndarray:
    s, c = np.sin(t), np.cos(t)
    return np.array([[t * s + c, -s], [s - t * c, c]])


def _ex2() -> Example:
    return Example(
        "ex2",
        "trigonometric A(t) with unit spectral norm; Y(pi) has no real logarithm (numeric-only)",
        "A(t) = 1/2 [[sin 2t, -1 - cos 2t], [1 - cos 2t, -sin 2t]]",
        MatrixFunction.from_callable(ex2_matrix, 2, 4.0, name="ex2"),
        None,
        ex2_solution,
    )


def ex3_solution(t: float) -> np.ndarray:
    e2, em = np.exp(2 * t), np.exp(-t)
    return np.array([[e2, e2 / 9 - (1 / 9 + t / 3) * em], [0.0, em]])


def ex3_log_entry(t):
    """(1,2) entry of the principal logarithm of the ex3 solution."""
    return (t * np.exp(2 * t) - (t + 3 * t**2) * np.exp(-t)) / (3 * (np.exp(2 * t) - np.exp(-t)))


def _ex3() -> Example:
    a = PiecewisePolyMatrix((0, 4), [poly_matrix([[[2], [0, 1]], [[0], [-1]]])])
    return Example(
        "ex3",
        "triangular A(t); series diverges at t = 2*pi/3 although Y keeps a real logarithm",
        "A(t) = [[2, t], [0, -1]]",
        MatrixFunction.from_poly(a, "ex3"),
        a,
        ex3_solution,
    )


def _ex4() -> Example:
    a = PiecewisePolyMatrix((0, 2), [poly_matrix(EX4_ROWS)])
    return Example(
        "ex4",
        "4x4 polynomial A(t); conjectured divergence onset t* ~ 0.733",
        "A(t) = [[-t, 3t, 0, -3t^2+t+2], [t^2-t, -3, t^2+2t+3, 0], "
        "[3, 0, t^2-2t, -t^2-3], [t^2-t+3, 2t^2-3t, -3t-2, -t+2]]",
        MatrixFunction.from_poly(a, "ex4"),
        a,
    )


def bch_example(a1, a2) -> Example:
    a = bch_source(a1, a2)
    m1 = np.array([[float(x) for x in r] for r in a.segments[1].coefficient(0)])
    m2 = np.array([[float(x) for x in r] for r in a.segments[0].coefficient(0)])

    def exact(t):
        if t <= 1:
            return expm(t * m2)
        return expm((t - 1) * m1) @ expm(m2)

    return Example(
        "bch",
        "A = A2 on [0, 1), A1 on [1, 2]; Y(2) = exp(A1) exp(A2)",
        "A(t) = A2 (0 <= t < 1), A1 (1 <= t <= 2)",
        MatrixFunction.from_poly(a, "bch"),
        a,
        exact,
    )


# default BCH operands for the registry listing
BCH_DEFAULT = ([[0, 1], [0, 0]], [[0, 0], [1, 0]])

_BUILDERS = {
    "ex1": _ex1,
    "ex2": _ex2,
    "ex3": _ex3,
    "ex4": _ex4,
    "bch": lambda: bch_example(*BCH_DEFAULT),
}

NAMES = tuple(_BUILDERS)


def get(name: str) -> Example:
    key = name.split(":", 1)[1] if name.startswith("examples:") else name
    try:
        return _BUILDERS[key]()
    except KeyError:
        raise KeyError(f"unknown example {name!r}; choose from {', '.join(NAMES)}") from None


def all_examples() -> list[Example]:
    return [get(n) for n in NAMES]
