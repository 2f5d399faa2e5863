"""ADI finite-difference pricing engine for the Bates model."""

from .cases import CASES, CaseConfig, custom_case, load_case
from .grid import SpatialGrid, build_grid, payoff_vector
from .harness import (
    default_n_values,
    interpolate_solution,
    price,
    region_of_interest_mask,
    sweep,
    temporal_error,
)
from .linalg import (
    BandedLU,
    EigenSolveError,
    SingularMatrixError,
    SpectrumResult,
    dense_eigenvalues,
    factor_banded,
    solve_banded,
)
from .model import BatesParams
from .operators import (
    JumpBlock,
    SplitOperators,
    StencilWeights,
    apply_a0j,
    assemble,
    assemble_unsplit,
    central_first,
    central_second,
    forward_first_v0,
    jump_block,
)
from .schemes import (
    OperatorSystem,
    RunResult,
    ScalarTestSystem,
    SchemeConfig,
    advance,
    reference_solution,
    run,
    step_adaptation1,
    step_adaptation2,
    step_adaptation3,
)
from .spectrum import SpectrumExport, jump_spectrum
from .stability import (
    RootReport,
    StabilityPoint,
    VerificationReport,
    cond_membership,
    eval_Q,
    eval_R,
    eval_S,
    eval_T,
    schur_stable,
    verify_theorem,
)

__version__ = "0.1.0"

__all__ = [
    "BandedLU",
    "BatesParams",
    "CASES",
    "CaseConfig",
    "EigenSolveError",
    "JumpBlock",
    "OperatorSystem",
    "RootReport",
    "RunResult",
    "ScalarTestSystem",
    "SchemeConfig",
    "SingularMatrixError",
    "SpatialGrid",
    "SpectrumExport",
    "SpectrumResult",
    "SplitOperators",
    "StabilityPoint",
    "StencilWeights",
    "VerificationReport",
    "advance",
    "apply_a0j",
    "assemble",
    "assemble_unsplit",
    "build_grid",
    "central_first",
    "central_second",
    "cond_membership",
    "custom_case",
    "default_n_values",
    "dense_eigenvalues",
    "eval_Q",
    "eval_R",
    "eval_S",
    "eval_T",
    "factor_banded",
    "forward_first_v0",
    "interpolate_solution",
    "jump_block",
    "jump_spectrum",
    "load_case",
    "payoff_vector",
    "price",
    "reference_solution",
    "region_of_interest_mask",
    "run",
    "schur_stable",
    "solve_banded",
    "step_adaptation1",
    "step_adaptation2",
    "step_adaptation3",
    "sweep",
    "temporal_error",
    "verify_theorem",
]
