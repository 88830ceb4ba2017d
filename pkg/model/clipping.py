from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Mapping, Tuple

from model.belief import Belief
from model.errors import ModelValidationError


@dataclass(frozen=True)
class BeliefClip:
    """Probability mass mu(s) in [0, b(s)] removed from a belief, total below 1."""
    mu: Mapping[int, Fraction]

    @property
    def total(self) -> Fraction:
        return sum(self.mu.values(), Fraction(0))

    def induced(self, belief: Belief) -> Belief:
        """The renormalised belief (b - mu) / (1 - total)."""
        total = self.total
        if total >= 1:
            raise ModelValidationError("clip removes all probability mass")
        remaining = {}
        for state, p in belief.entries:
            removed = self.mu.get(state, Fraction(0))
            if not 0 <= removed <= p:
                raise ModelValidationError(f"clip mass {removed} at state {state} outside [0, {p}]")
            remaining[state] = (p - removed) / (1 - total)
        if any(s not in belief.support for s, m in self.mu.items() if m):
            raise ModelValidationError("clip touches a state outside the belief support")
        return Belief.from_mapping(remaining, belief.observation)


@dataclass(frozen=True)
class ClippingResult:
    """
    Candidate b~ with clipping value delta and per-state values, such that
    b(s) = (1 - delta) * b~(s) + state_deltas(s) for every s.
    """
    candidate: Belief
    delta: Fraction
    state_deltas: Tuple[Tuple[int, Fraction], ...]

    @property
    def is_trivial(self) -> bool:
        return self.delta == 0

    def state_delta(self, state: int) -> Fraction:
        return self.deltas_dict().get(state, Fraction(0))

    def deltas_dict(self) -> Dict[int, Fraction]:
        return dict(self.state_deltas)

    def as_clip(self) -> BeliefClip:
        return BeliefClip(mu=self.deltas_dict())
