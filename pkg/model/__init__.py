from model.abstraction import (
    CLIP_LABEL,
    CUT_LABEL,
    GOAL_LABEL,
    AbstractionMdp,
    ExplorationConfig,
    SolveResult,
)
from model.belief import Belief
from model.clipping import BeliefClip, ClippingResult
from model.errors import (
    ActionNotEnabledError,
    AnalysisError,
    BeliefBoundError,
    ChainTooLargeError,
    ConfigurationError,
    HorizonTooLargeError,
    InvalidAbstractionError,
    ModelError,
    ModelParseError,
    ModelValidationError,
    ObservationMismatchError,
    SingularSystemError,
    SolverError,
    UndefinedSuccessorError,
)
from model.pomdp import GoalSpec, Mdp, Pomdp, RewardSign, RewardStructure
from model.report import INCONCLUSIVE, REFUTED, AnalysisReport, AnalysisRequest, parse_rational
from model.values import ExtReal, MemorylessObsPolicy, StateValues, ValueKind, ext_repr, is_infinite

__all__ = [
    "AbstractionMdp", "ActionNotEnabledError", "AnalysisError", "AnalysisReport", "AnalysisRequest",
    "Belief", "BeliefBoundError", "BeliefClip", "CLIP_LABEL", "CUT_LABEL", "ChainTooLargeError",
    "ClippingResult", "ConfigurationError", "ExplorationConfig", "ExtReal", "GOAL_LABEL", "GoalSpec",
    "HorizonTooLargeError", "INCONCLUSIVE", "InvalidAbstractionError", "Mdp", "MemorylessObsPolicy",
    "ModelError", "ModelParseError", "ModelValidationError", "ObservationMismatchError", "Pomdp",
    "REFUTED", "RewardSign", "RewardStructure", "SingularSystemError", "SolveResult", "SolverError",
    "StateValues", "UndefinedSuccessorError", "ValueKind", "ext_repr", "is_infinite", "parse_rational",
]
