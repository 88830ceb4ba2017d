from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, Mapping, Tuple

from model.errors import ModelValidationError


@dataclass(frozen=True)
class Belief:
    """
    Sparse distribution over states sharing one observation.

    `entries` is sorted by state with strictly positive Fractions summing to 1,
    so dataclass equality and hashing coincide with exact equality of the
    distributions.
    """
    entries: Tuple[Tuple[int, Fraction], ...]
    observation: int

    def __post_init__(self):
        states = [s for s, _ in self.entries]
        if not states:
            raise ModelValidationError("belief has empty support")
        if states != sorted(set(states)):
            raise ModelValidationError("belief entries must be sorted by state and unique")
        if any(p <= 0 for _, p in self.entries):
            raise ModelValidationError("belief entries must be strictly positive")
        if sum(p for _, p in self.entries) != 1:
            raise ModelValidationError("belief entries must sum to 1")

    @classmethod
    def dirac(cls, state: int, observation: int) -> "Belief":
        return cls(((state, Fraction(1)),), observation)

    @classmethod
    def from_mapping(cls, mapping: Mapping[int, Fraction], observation: int) -> "Belief":
        """Build from an unordered map; zero entries are dropped, values are not rescaled."""
        entries = tuple(sorted((s, Fraction(p)) for s, p in mapping.items() if p != 0))
        return cls(entries, observation)

    @property
    def support(self) -> FrozenSet[int]:
        return frozenset(s for s, _ in self.entries)

    @property
    def is_dirac(self) -> bool:
        return len(self.entries) == 1

    def prob(self, state: int) -> Fraction:
        for s, p in self.entries:
            if s == state:
                return p
        return Fraction(0)

    def as_dict(self) -> Dict[int, Fraction]:
        return dict(self.entries)

    def label(self, state_names=None) -> str:
        """Human-readable form, e.g. 's0: 1/4, s1: 3/4'."""
        name = (lambda s: state_names[s]) if state_names else (lambda s: f"s{s}")
        return ", ".join(f"{name(s)}: {p}" for s, p in self.entries)
