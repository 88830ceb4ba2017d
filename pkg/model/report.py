import json
from dataclasses import asdict, dataclass, fields
from fractions import Fraction
from typing import Any, Dict, Optional, Tuple

from model.abstraction import ExplorationConfig
from model.errors import ConfigurationError
from model.values import ExtReal, ext_repr

DIRECTIONS = ("max", "min")
OBJECTIVES = ("reward", "reachability")
CUTOFF_SOURCES = ("heuristic", "min")
REFUTED = "refuted"
INCONCLUSIVE = "inconclusive"


def parse_rational(text) -> Fraction:
    """Parse '3/4', '0.7' or a number into a Fraction."""
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError):
        raise ConfigurationError(f"not a rational number: {text!r}") from None


_NUMERIC_FIELDS = {
    "eta": int,
    "size_budget": int,
    "max_expansions": int,
    "threads": int,
    "size_factor": float,
    "precision": float,
}


def _number(name: str, value, kind):
    """Coerce a JSON value to int/float; bools, and non-integral floats for int fields, are rejected."""
    what = "an integer" if kind is int else "a number"
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise ConfigurationError(f"{name} must be {what}, got {value!r}")
    if kind is int and isinstance(value, float) and not value.is_integer():
        raise ConfigurationError(f"{name} must be {what}, got {value!r}")
    try:
        return kind(value)
    except (ValueError, OverflowError):
        raise ConfigurationError(f"{name} must be {what}, got {value!r}") from None


@dataclass(frozen=True)
class AnalysisRequest:
    """Everything one analysis run needs besides the model text."""
    direction: str = "max"
    objective: str = "reward"
    goal_observations: Tuple[str, ...] = ()
    threshold: Optional[Fraction] = None
    clipping: bool = False
    eta: int = 2
    size_factor: float = 1.0
    size_budget: Optional[int] = None
    precision: float = 1e-6
    max_expansions: Optional[int] = None
    threads: Optional[int] = None
    cutoff_source: str = "heuristic"
    clipping_solver: str = "enumerate"
    model_id: str = "model"
    deterministic: bool = False

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise ConfigurationError(f"direction must be one of {DIRECTIONS}")
        if self.objective not in OBJECTIVES:
            raise ConfigurationError(f"objective must be one of {OBJECTIVES}")
        if self.cutoff_source not in CUTOFF_SOURCES:
            raise ConfigurationError(f"cutoff source must be one of {CUTOFF_SOURCES}")
        if not 0 < self.precision < 1:
            raise ConfigurationError("precision must lie in (0, 1)")

    def exploration_config(self, threads: int, size_budget: Optional[int] = None,
                           clipping: Optional[bool] = None, eta: Optional[int] = None) -> ExplorationConfig:
        return ExplorationConfig(
            size_factor=self.size_factor,
            clipping_enabled=self.clipping if clipping is None else clipping,
            eta=self.eta if eta is None else eta,
            max_expansions=self.max_expansions,
            size_budget=self.size_budget if size_budget is None else size_budget,
            threads=self.threads or threads,
            clipping_solver=self.clipping_solver,
        )

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "AnalysisRequest":
        """Build from JSON-like input (HTTP bodies); unknown keys are ignored."""
        known = {f.name for f in fields(cls)}
        kwargs = {k: v for k, v in data.items() if k in known and v is not None}
        if "threshold" in kwargs:
            kwargs["threshold"] = parse_rational(kwargs["threshold"])
        if "goal_observations" in kwargs:
            goals = kwargs["goal_observations"]
            kwargs["goal_observations"] = (goals,) if isinstance(goals, str) else tuple(goals)
        for name, kind in _NUMERIC_FIELDS.items():
            if name in kwargs:
                kwargs[name] = _number(name, kwargs[name], kind)
        for name in ("clipping", "deterministic"):
            if name in kwargs and not isinstance(kwargs[name], bool):
                raise ConfigurationError(f"{name} must be true or false, got {kwargs[name]!r}")
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigurationError(str(exc)) from None


@dataclass
class AnalysisReport:
    """Outcome of one analysis: the bound, the threshold verdict and exploration statistics."""
    model_id: str
    direction: str
    objective: str
    bound: ExtReal
    bound_kind: str  # 'lower' for max, 'upper' for min
    threshold: Optional[Fraction] = None
    verdict: Optional[str] = None
    explored_beliefs: int = 0
    cut_transitions: int = 0
    clip_transitions: int = 0
    eta: Optional[int] = None
    wall_time_ms: int = 0
    abstraction_states: int = 0
    initial_is_goal: bool = False
    precision_limited: bool = False
    bound_exact: Optional[str] = None
    iterations: int = 0
    clipping_solver: Optional[str] = None
    cutoff_source: str = "heuristic"
    run_id: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["bound"] = ext_repr(self.bound)
        data["threshold"] = None if self.threshold is None else str(self.threshold)
        data.pop("run_id")
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, data: Dict[str, Any], run_id: Optional[str] = None) -> "AnalysisReport":
        bound = data["bound"]
        if bound == "+inf":
            bound = float("inf")
        elif bound == "-inf":
            bound = float("-inf")
        known = {f.name for f in fields(cls)}
        kwargs = {k: v for k, v in data.items() if k in known}
        kwargs["bound"] = bound
        if kwargs.get("threshold") is not None:
            kwargs["threshold"] = Fraction(kwargs["threshold"])
        kwargs["run_id"] = run_id
        return cls(**kwargs)
