"""Magnus series for linear ODEs with polynomial coefficients, with
convergence certificates and divergence diagnostics."""

from .diagnostics import (
    Certificate,
    CollisionEvent,
    RealLog,
    Trajectory,
    Verdict,
    certify,
    collision_classify,
    divergence_onset,
    eigenvalue_tracks,
    empirical_radius,
    kappa_sweep,
    real_log_exists,
)
from .linalg import NegativeSpectrum, eig, expm, geometric_multiplicity, logm_eig, logm_integral, spectral_norm
from .magnus import MagnusSeries, bch_terms, bernoulli, magnus_terms, magnus_terms_oracle, partial_sum
from .ode import MatrixFunction, action_norm, fundamental_solution, solve, unit_direction_arclength
from .polymat import PiecewisePolyMatrix, Poly, PolyMatrix, antiderivative, commutator, poly_matrix

__version__ = "0.1.0"

__all__ = [
    "Certificate",
    "CollisionEvent",
    "MagnusSeries",
    "MatrixFunction",
    "NegativeSpectrum",
    "PiecewisePolyMatrix",
    "Poly",
    "PolyMatrix",
    "RealLog",
    "Trajectory",
    "Verdict",
    "action_norm",
    "antiderivative",
    "bch_terms",
    "bernoulli",
    "certify",
    "collision_classify",
    "commutator",
    "divergence_onset",
    "eig",
    "eigenvalue_tracks",
    "empirical_radius",
    "expm",
    "fundamental_solution",
    "geometric_multiplicity",
    "kappa_sweep",
    "logm_eig",
    "logm_integral",
    "magnus_terms",
    "magnus_terms_oracle",
    "partial_sum",
    "poly_matrix",
    "real_log_exists",
    "solve",
    "spectral_norm",
    "unit_direction_arclength",
]
