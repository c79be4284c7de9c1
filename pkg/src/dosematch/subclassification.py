"""Subclassification: a partition of units into reference-rooted subclasses."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import RefNotMember

__all__ = ["Subclass", "Subclassification"]


@dataclass(frozen=True)
class Subclass:
    """A matched set of >= 2 unit indices with a designated reference unit."""

    members: tuple[int, ...]
    reference: int

    def __post_init__(self):
        members = tuple(sorted(int(v) for v in self.members))
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "reference", int(self.reference))
        if len(members) < 2:
            raise ValueError(f"subclass must have >= 2 members, got {members}")
        if len(set(members)) != len(members):
            raise ValueError(f"duplicate members in subclass {members}")
        if self.reference not in members:
            raise RefNotMember(f"reference {self.reference} not in subclass {members}")

    @property
    def size(self) -> int:
        return len(self.members)

    def leaves(self) -> tuple[int, ...]:
        return tuple(m for m in self.members if m != self.reference)


@dataclass(frozen=True)
class Subclassification:
    """Disjoint subclasses covering all units (minus any discarded by design).

    ``discarded`` is nonempty only for pair matching on an odd number of
    units, where one unit is necessarily dropped.
    """

    subclasses: tuple[Subclass, ...]
    unit_count: int
    discarded: tuple[int, ...] = field(default=())

    def __post_init__(self):
        ordered = tuple(sorted(self.subclasses, key=lambda s: s.members[0]))
        object.__setattr__(self, "subclasses", ordered)
        object.__setattr__(self, "discarded", tuple(sorted(int(v) for v in self.discarded)))
        seen: list[int] = []
        for s in ordered:
            seen.extend(s.members)
        seen.extend(self.discarded)
        if len(set(seen)) != len(seen):
            raise ValueError("subclasses are not disjoint")
        if set(seen) != set(range(self.unit_count)):
            raise ValueError(
                f"subclasses + discarded must cover exactly units 0..{self.unit_count - 1}"
            )

    def __len__(self) -> int:
        return len(self.subclasses)

    def sizes(self) -> tuple[int, ...]:
        return tuple(s.size for s in self.subclasses)

    def member_sets(self) -> set[frozenset[int]]:
        return {frozenset(s.members) for s in self.subclasses}

    def labels(self) -> np.ndarray:
        """Per-unit subclass index (order of ``subclasses``); -1 if discarded."""
        lab = np.full(self.unit_count, -1, dtype=np.int64)
        for k, s in enumerate(self.subclasses):
            for m in s.members:
                lab[m] = k
        return lab
