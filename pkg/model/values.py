import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Tuple, Union

# Extended real: exact Fraction, float from iterative solvers, or +-math.inf.
ExtReal = Union[Fraction, float]


def is_infinite(value: ExtReal) -> bool:
    return isinstance(value, float) and math.isinf(value)


def ext_repr(value: ExtReal):
    """JSON-friendly form: float for finite values, '+inf' / '-inf' otherwise."""
    if is_infinite(value):
        return "+inf" if value > 0 else "-inf"
    return float(value)


class ValueKind(str, Enum):
    MIN = "min"
    MAX = "max"
    POLICY = "policy"


@dataclass(frozen=True)
class StateValues:
    """Per-state extended-real values of the underlying MDP."""
    values: Tuple[ExtReal, ...]
    kind: ValueKind

    def __getitem__(self, state: int) -> ExtReal:
        return self.values[state]

    def __len__(self) -> int:
        return len(self.values)

    @property
    def exact(self) -> bool:
        return all(isinstance(v, Fraction) or is_infinite(v) for v in self.values)


@dataclass(frozen=True)
class MemorylessObsPolicy:
    """Deterministic memoryless observation-based policy: choice[z] is an action index."""
    choice: Tuple[int, ...]

    def action_for(self, observation: int) -> int:
        return self.choice[observation]
