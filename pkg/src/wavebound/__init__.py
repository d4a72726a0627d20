"""Local entropies and energies of Klein-Gordon waves and U(1) current profiles.

The package evaluates entropy functionals of coherent states on spectral
grids and checks entropy-energy inequalities, identities and variational
characterizations numerically.
"""
from .bekenstein import (BoundReport, bekenstein_correction, check_localized,
                         check_nonlocalized, local_energy)
from .entropy import (ball_entropy_improved, ball_entropy_massless, entropy_balance_residual,
                      halfspace_entropy, halfspace_entropy_improved, qdec_profile,
                      wedge_convexity_check, wedge_entropy)
from .errors import WaveboundError
from .field import evolve, norm_squared, stress_energy, total_energy
from .gamma import BoundaryData, ExteriorProblem, gamma
from .grid import CauchyData, GridSpec
from .regions import Ball, Box, HalfSpace, WedgeVertex
from .spectral_bounds import lambda1, rayleigh_quotient
from .u1 import (CurrentProfile, ant_check, balance_check, dilation_flow_check,
                 halfline_entropy, interval_entropy, u1_complex_structure, u1_norm)

__version__ = "0.1.0"

__all__ = [
    "Ball", "BoundReport", "BoundaryData", "Box", "CauchyData", "CurrentProfile",
    "ExteriorProblem", "GridSpec", "HalfSpace", "WaveboundError", "WedgeVertex",
    "ant_check", "balance_check", "ball_entropy_improved", "ball_entropy_massless",
    "bekenstein_correction", "check_localized", "check_nonlocalized",
    "dilation_flow_check", "entropy_balance_residual", "evolve", "gamma",
    "halfline_entropy", "halfspace_entropy", "halfspace_entropy_improved",
    "interval_entropy", "lambda1", "local_energy", "norm_squared", "qdec_profile",
    "rayleigh_quotient", "stress_energy", "total_energy", "u1_complex_structure",
    "u1_norm", "wedge_convexity_check", "wedge_entropy",
]
