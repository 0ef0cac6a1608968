"""Ground-state entanglement of finite spin arrays from mean field plus RPA.

The package bosonizes fluctuations around the self-consistent mean field of a
spin array, diagonalizes the resulting quadratic form symplectically, and
evaluates subsystem entanglement entropies and negativities of the Gaussian
vacuum, including parity-restoration corrections in the symmetry-broken
phase.  Closed forms for the spin pair and the fully connected array, and
exact-diagonalization oracles (dense and collective), validate every step at
desk scale.
"""

from .errors import (
    ConfigError,
    MeanFieldError,
    ModelError,
    OracleError,
    SpectrumError,
    SpinRpaError,
    StabilityError,
)
from .model import (
    FourierCouplings,
    SpinModel,
    XYZModelTI,
    build_general,
    build_xyz_ti,
    fourier_couplings,
    fully_connected_xyz,
    inverse_fourier_couplings,
    nearest_neighbor_xyz,
    to_spin_model,
    xyz_from_spin_model,
    xyz_pair,
)
from .meanfield import (
    MeanFieldSolution,
    aligned_trial_energy,
    common_anisotropy,
    factorizing_field,
    mf_energy,
    solve_general_iterative,
    solve_uniform,
)
from .rpa import (
    ContractionData,
    MomentumModes,
    RpaModes,
    RpaSystem,
    build_rpa_matrices,
    contractions,
    metric,
    momentum_modes,
    rpa_spin_observables,
    symplectic_diagonalize,
    vacuum_coefficients,
)
from .gaussian import (
    SubsystemSpec,
    SymplecticSpectrum,
    entanglement_entropy,
    global_negativity,
    negativity,
    partial_transpose,
    subsystem_contraction,
    subsystem_entropy,
    subsystem_negativity,
    symplectic_spectrum,
)
from .parity import (
    ParityContext,
    SpinDensity,
    binary_entropy,
    corrected_entropy,
    corrected_global_negativity,
    spin_density,
    spin_entropy_and_negativity,
)
from .analytic import (
    FullyConnectedResult,
    PairResult,
    UniformSpectra,
    fully_connected_closed_form,
    pair_closed_form,
    uniform_contraction_spectra,
)
from .exact import (
    CollectiveGroundState,
    DenseGroundState,
    collective_ground_state,
    dense_ground_state,
    dicke_reduced_density,
    exact_entanglement,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
