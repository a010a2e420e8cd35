# Copyright (c) 2026 BroadcastElect contributors. Licensed under MIT.
"""Fragment identities and the trace records shared by the distributed run and the oracle."""

from dataclasses import dataclass


class InvalidGrowthFactorError(ValueError):
    """Raised for a growth factor X <= 1."""
    pass


def check_growth_factor(x):
    if x is None or not x > 1:
        raise InvalidGrowthFactorError(f"growth factor X must be greater than 1 (got {x})")
    return float(x)


@dataclass(frozen=True, order=True)
class FragmentId:
    """(size, identity), compared lexicographically: larger size wins, identity breaks ties."""

    size: int
    identity: int

    def __post_init__(self):
        if self.size < 1:
            raise ValueError(f"fragment size must be at least 1 (got {self.size})")

    def __str__(self):
        return f"({self.size},{self.identity})"

    def to_list(self):
        return [self.size, self.identity]


@dataclass(frozen=True)
class MergeEvent:
    time: float
    joiner: FragmentId
    joined: FragmentId

    def key(self):
        return (self.joiner, self.joined)

    def to_line(self):
        return f"{self.time:.6f}, {self.joiner}, {self.joined}"


@dataclass
class WorkPhase:
    """One completed work period of a candidate lineage."""

    candidate: int
    entry_id: FragmentId
    new_size: int
    best_external: object  # FragmentId or None
    outcome: str  # 'stay' | 'join' | 'leader'
    decision_time: float
    feedback: int = 0
    action: int = 0
    info: int = 0

    def key(self):
        return (self.candidate, self.entry_id, self.new_size, self.best_external, self.outcome)

    @property
    def messages(self):
        return self.feedback + self.action + self.info

    def to_json(self):
        return {
            'candidate': self.candidate,
            'entry_id': self.entry_id.to_list(),
            'new_size': self.new_size,
            'best_external': self.best_external.to_list() if self.best_external else None,
            'outcome': self.outcome,
            'decision_time': self.decision_time,
            'feedback': self.feedback,
            'action': self.action,
            'info': self.info,
        }


def lineages(phases):
    """Group work phases by candidate, each list in decision order."""
    out = {}
    for phase in phases:
        out.setdefault(phase.candidate, []).append(phase)
    return out
