"""spinsight: infer spin-Hamiltonian parameters from ground states.

Ground states of 1D/2D spin-1/2 models (transverse-field Ising, XXZ, XY)
are rendered as Qubism fractal images, optionally through a reduced-density-
matrix purification, and a small convolutional network regresses the
Hamiltonian parameter from the image.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    ConvergenceError,
    DataError,
    LatticeError,
    SpinsightError,
)
from .lattice import Lattice, enumerate_edges, snake_order
from .models import (
    HamiltonianApplier,
    ModelSpec,
    TermList,
    apply_hamiltonian,
    build_terms,
)
from .states import DenseState, PurifiedState
from .qubism import QubismImage, normalize_image, qubism_index, qubism_map
from .rdm import (
    Rdm,
    SubsystemSpec,
    gauge_fix,
    middle_block,
    purify,
    rdm_dense,
    rdm_mps,
)

__all__ = [
    "__version__",
    "SpinsightError",
    "LatticeError",
    "ConfigError",
    "ConvergenceError",
    "DataError",
    "Lattice",
    "enumerate_edges",
    "snake_order",
    "ModelSpec",
    "TermList",
    "build_terms",
    "apply_hamiltonian",
    "HamiltonianApplier",
    "DenseState",
    "PurifiedState",
    "QubismImage",
    "qubism_index",
    "qubism_map",
    "normalize_image",
    "Rdm",
    "SubsystemSpec",
    "middle_block",
    "rdm_dense",
    "rdm_mps",
    "purify",
    "gauge_fix",
]
