"""Resonances of a tilted delta-wire across a Dirichlet waveguide."""

__version__ = "0.1.0"

from .elements import element_table, m_closed, m_oracle, n_closed, n_oracle
from .exceptions import (
    AdmissibilityError,
    ConvergenceError,
    NearSingularError,
    RegionError,
    TruncationError,
)
from .perturbation import PerturbativeCoefficients, coefficients, pole_expansion, v_coeff, w_coeff
from .solver import (
    PoleResult,
    det_crosscheck,
    eta,
    find_pole,
    r_matrix,
    s_rank1,
    sv_minimum,
    sweep_and_fit,
)
from .spectral import (
    ModeClassification,
    WaveguideParams,
    check_admissible,
    classify_modes,
    spectrum_summary,
    tau,
)
