"""Ptychographic phase retrieval from a lifted banded operator with subspace completion.

The measurement operator restricted to banded Hermitian matrices is block
circulant, so its singular values come from FFTs of the window. Inverting it
(optionally truncating small singular values), filling lost Fourier
coefficients of the diagonals from the rank-one structure, and a final
angular synchronization give the signal up to a global phase.
"""

from .completion import (
    AssumptionViolation,
    CompletionProblem,
    CompletionResult,
    RankDeficient,
    build_linear_system,
    complete,
    extract_known_coefficients,
    solve_missing,
)
from .core import BandedHermitian, DiagonalSet, assemble_diagonals, extract_diagonals
from .experiments import (
    ConfigError,
    ExperimentConfig,
    SweepResult,
    random_signal,
    recover,
    relative_error,
    run_blockpr,
    run_blockpr_sc,
    run_sweep,
    run_wirtinger_flow,
)
from .masks import MaskSet, MeasurementGrid, WindowSpec, add_noise, build_masks, forward_measure
from .spectral import BlockSVD, LostIndexSet, apply_regularized_inverse, block_svd, lost_indices
from .sync import NoConvergence, assemble_signal, normalize_phases, top_eigenvector

__version__ = "0.1.0"

__all__ = [
    "AssumptionViolation",
    "BandedHermitian",
    "BlockSVD",
    "CompletionProblem",
    "CompletionResult",
    "ConfigError",
    "DiagonalSet",
    "ExperimentConfig",
    "LostIndexSet",
    "MaskSet",
    "MeasurementGrid",
    "NoConvergence",
    "RankDeficient",
    "SweepResult",
    "WindowSpec",
    "add_noise",
    "apply_regularized_inverse",
    "assemble_diagonals",
    "assemble_signal",
    "block_svd",
    "build_linear_system",
    "build_masks",
    "complete",
    "extract_diagonals",
    "extract_known_coefficients",
    "forward_measure",
    "lost_indices",
    "normalize_phases",
    "random_signal",
    "recover",
    "relative_error",
    "run_blockpr",
    "run_blockpr_sc",
    "run_sweep",
    "run_wirtinger_flow",
    "solve_missing",
    "top_eigenvector",
]
