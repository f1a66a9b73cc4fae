"""Chaos decomposition of white noise with independent values on a lattice.

The package discretizes a noise field driven by per-cell spectral measures:
orthogonal-polynomial recurrences per cell, a truncated symmetric Fock
space with creation/annihilation/neutral operators, exact path simulation
(Gaussian part plus compensated jumps), and the chaos map realized both as
an occupation-state embedding and as pathwise multiple integrals, with
Monte Carlo verification of the isometry.
"""

from .chaos import (
    ChaosCoefficient,
    ChaosIndex,
    evaluate_multiple_integral,
    evaluate_Y,
    evaluate_Z,
    g_inner,
    g_norm_sq,
    indicator_coefficient,
    kmap_fock,
    mc_verify,
    random_coefficient,
)
from .errors import (
    ConfigError,
    DegenerateDegreeError,
    IllConditionedWarning,
    LevyChaosError,
    MomentOrderError,
    NumericalBreakdownError,
    SizeExceededError,
    TruncationOverflowError,
    UnsupportedKindError,
)
from .fock import (
    FockVector,
    ModeBasis,
    OneParticleOperator,
    annihilate,
    apply_A,
    apply_A_k,
    apply_R_k,
    create,
    embed_kernel,
    multiplication_operator,
    neutral,
    q_mode_vector,
    rho_operator,
    vacuum_moment,
)
from .lattice import Lattice
from .measures import (
    DiscreteMeasure,
    MeasureField,
    MomentMeasure,
    SpectralMeasure,
    fit_moment_bound,
    levy_decomposition,
)
from .orthopoly import (
    RecurrenceTable,
    evaluate_q,
    jacobi_matrix,
    monomial_coefficients,
    recurrence_coefficients,
)
from .sampler import (
    PathBatch,
    PathSample,
    char_functional,
    empirical_cf,
    empirical_cf_grid,
    pairing,
    sample_batch,
    sample_path,
)
from .symtensor import occupation_sector_to_dense, sym_project_dense, symmetrize_dense

__version__ = "0.1.0"
