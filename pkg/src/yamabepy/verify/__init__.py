from .report import CheckResult, VerificationReport
from .checks import (
    closed_vs_numeric,
    conformal_flatness_check,
    einstein_fiber_check,
    gradient_identity_residual,
    level_grid,
    level_set_constancy,
    profile_consistency,
    soliton_residual,
    umbilicity_residual,
)
from .catalog import CHECKS, run_suite, verify_profile
