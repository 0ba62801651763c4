"""Pseudospectral simulation of u_t - Delta u + a . grad(u |u|^(q-1)) = 0 with zero-mass data.

Modules
-------
spectral      grids, fields, transforms, norms, padded dealiasing
operators     heat semigroup, derivatives, D^beta, I_beta, multipliers
initial_data  zero-mass data of prescribed spectral order, A and Besov norm
evolution     IFRK4 / ETDRK2 integrator, Picard iteration, pair runs
oracles       Cole-Hopf, closed-form heat flows, Riesz kernel quadrature
analysis      norm records, decay fits, profile distances, scaling collapse
cli           configuration files and the ``zml`` command
"""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .spectral import (  # noqa: F401
    GridSpec,
    RealField,
    SpectralField,
    forward_transform,
    integrate,
    inverse_transform,
    lp_norm,
    pad_pointwise_apply,
)
from .operators import (  # noqa: F401
    MultiIndex,
    MultiplierSymbol,
    fractional_derivative,
    gauss_kernel,
    heat_semigroup,
    multiplier_apply,
    partial_derivative,
    riesz_potential,
    self_similar_profile,
)
from .initial_data import (  # noqa: F401
    InitialDatum,
    besov_norm,
    compute_A,
    custom_datum,
    make_dipole,
    make_fractional_bump,
    make_miyakawa,
    moment_beta,
)
from .analysis import (  # noqa: F401
    DecayFit,
    NormRecord,
    ProfileDistance,
    asymptotic_profile,
    fit_decay,
    g_functional,
    holder_interpolation_check,
    linearization_distance,
    profile_distance,
    record_norms,
    scaling_collapse,
)
from .evolution import (  # noqa: F401
    PicardReport,
    SimConfig,
    Trajectory,
    critical_exponent,
    evolve,
    nonlinear_flux_divergence,
    pair_evolve,
    picard_iterate,
)
from .oracles import (  # noqa: F401
    ColeHopfFamily,
    QuadratureSpec,
    cole_hopf_solution,
    heat_exact,
    riesz_kernel_oracle,
)
