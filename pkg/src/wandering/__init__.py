"""Log-space evaluation of infinite products with fast-growing zeros, and the wandering domains they produce."""

__version__ = "0.1.0"

from .errors import WanderingError, ValidationError, FamilyOverflowError  # noqa: E402
from .families import FamilySpec, PRule, PhaseRule, ZeroSequence, build  # noqa: E402
from .evaluator import EvalConfig, ScaledPoint, eval_f, zero_count  # noqa: E402

__all__ = ["EvalConfig", "FamilyOverflowError", "FamilySpec", "PRule", "PhaseRule", "ScaledPoint",
           "ValidationError", "WanderingError", "ZeroSequence", "build", "eval_f", "zero_count"]
