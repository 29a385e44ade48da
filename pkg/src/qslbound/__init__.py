"""Generalized relative entropies, their unitary-evolution bounds and quantum speed limits."""

__version__ = "0.1.0"

from .bounds import (  # noqa: E402
    BoundProblem,
    BoundReport,
    GConvention,
    QslReport,
    bound_forward,
    bound_loose,
    bound_reverse,
    bound_symmetric,
    g_functional,
    merit_deltas,
    min_bound_and_qsl,
    phi_factor,
    q0_speed,
    qsl_re,
    qsl_times,
    re_limit_bound,
    skew_information,
)
from .entropy import (  # noqa: E402
    EntropyKind,
    min_relative_entropy,
    quantum_relative_entropy,
    relative_purity,
    renyi,
    symmetrized,
    tsallis,
)
from .evolution import PropagatorTrajectory, evolve_state, propagate, time_average  # noqa: E402
from .kernels import BACKEND  # noqa: E402
from .matrix_core import (  # noqa: E402
    ConstantHamiltonian,
    DensityMatrix,
    FixedAxis,
    LZAxis,
    QubitDrive,
    TabulatedHamiltonian,
    eigendecompose,
    from_bloch,
    matrix_log,
    matrix_power,
    schatten2,
)

__all__ = [
    "__version__",
    "BACKEND",
    "bound_forward",
    "bound_loose",
    "bound_reverse",
    "bound_symmetric",
    "BoundProblem",
    "BoundReport",
    "ConstantHamiltonian",
    "DensityMatrix",
    "eigendecompose",
    "EntropyKind",
    "evolve_state",
    "FixedAxis",
    "from_bloch",
    "g_functional",
    "GConvention",
    "LZAxis",
    "matrix_log",
    "matrix_power",
    "merit_deltas",
    "min_bound_and_qsl",
    "min_relative_entropy",
    "phi_factor",
    "propagate",
    "PropagatorTrajectory",
    "q0_speed",
    "qsl_re",
    "qsl_times",
    "QslReport",
    "quantum_relative_entropy",
    "QubitDrive",
    "re_limit_bound",
    "relative_purity",
    "renyi",
    "schatten2",
    "skew_information",
    "symmetrized",
    "TabulatedHamiltonian",
    "time_average",
    "tsallis",
]
