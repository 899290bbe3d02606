"""Boston / Immediate Acceptance matching with optional beacon-driven lotteries.

Round r assigns every still-unassigned student to her r-th listed school if
seats remain, rationing over-demand by the school's priority order. Seats
granted in earlier rounds are never released, which is exactly what makes
truthful ranking unsafe.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence

from .beacon import BeaconOutput, derive_permutation
from .errors import ValidationError, WireFormatError


class LotteryMode(Enum):
    SINGLE = "single_lottery"
    PER_SCHOOL = "per_school_lottery"


@dataclass(frozen=True)
class PreferenceRanking:
    """A student's ordered school list; unlisted schools are unacceptable."""

    agent: str
    ranking: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(set(self.ranking)) != len(self.ranking):
            raise ValidationError(f"ranking for {self.agent!r} repeats a school")


@dataclass(frozen=True)
class SchoolSpec:
    """One school: its capacity and a strict priority order over students."""

    school: str
    capacity: int
    priority: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.capacity < 0:
            raise ValidationError(f"capacity of {self.school!r} is negative")
        if len(set(self.priority)) != len(self.priority):
            raise ValidationError(f"priority order for {self.school!r} repeats a student")


@dataclass
class Matching:
    assignment: dict[str, str | None] = field(default_factory=dict)
    round_assigned: dict[str, int] = field(default_factory=dict)


def boston(prefs: Sequence[PreferenceRanking], schools: Sequence[SchoolSpec]) -> Matching:
    """Run the immediate-acceptance rounds to completion."""
    known = {s.school for s in schools}
    priority_rank: dict[str, dict[str, int]] = {
        s.school: {student: i for i, student in enumerate(s.priority)} for s in schools
    }
    for pref in prefs:
        for school in pref.ranking:
            if school not in known:
                raise ValidationError(
                    f"student {pref.agent!r} ranked unknown school {school!r}"
                )
        for spec in schools:
            if pref.agent not in priority_rank[spec.school]:
                raise ValidationError(
                    f"school {spec.school!r} has no priority rank for {pref.agent!r}"
                )

    seats = {s.school: s.capacity for s in schools}
    matching = Matching(assignment={p.agent: None for p in prefs})
    unassigned = list(prefs)

    max_rounds = max((len(p.ranking) for p in prefs), default=0)
    for rnd in range(1, max_rounds + 1):
        applicants: dict[str, list[PreferenceRanking]] = {}
        for pref in unassigned:
            if len(pref.ranking) >= rnd:
                applicants.setdefault(pref.ranking[rnd - 1], []).append(pref)
        for school in sorted(applicants):
            pool = sorted(applicants[school], key=lambda p: priority_rank[school][p.agent])
            admitted = pool[: seats[school]]
            seats[school] -= len(admitted)
            for pref in admitted:
                matching.assignment[pref.agent] = school
                matching.round_assigned[pref.agent] = rnd
        unassigned = [p for p in unassigned if matching.assignment[p.agent] is None]
        if not unassigned:
            break

    return matching


def lottery_priorities(
    students: Sequence[str],
    schools: Sequence[SchoolSpec],
    output: BeaconOutput,
    mode: LotteryMode,
) -> list[SchoolSpec]:
    """Replace every school's priority order with a beacon-drawn lottery.

    SINGLE draws one permutation (stream domain 0) shared by all schools;
    PER_SCHOOL draws an independent permutation per school, the stream domain
    being the school's index in ``schools``.
    """
    ordered = sorted(students)
    out = []
    for index, spec in enumerate(schools):
        domain = 0 if mode is LotteryMode.SINGLE else index
        perm = derive_permutation(output, len(ordered), domain=domain)
        out.append(replace(spec, priority=tuple(ordered[p] for p in perm)))
    return out


def rank_utility(true_ranking: PreferenceRanking, assigned: str | None, n_schools: int) -> int:
    """Ordinal utility: negative true rank of the assigned school.

    Unassigned (or assigned to a school the student never listed) is worse
    than any listed rank: -(n_schools + 1). Preferences here are ordinal,
    so this is the minimal faithful metric; reports flag it as such.
    """
    if assigned is not None and assigned in true_ranking.ranking:
        return -(true_ranking.ranking.index(assigned) + 1)
    return -(n_schools + 1)


def encode_ranking(school_indices: Sequence[int]) -> bytes:
    """Reveal payload: one length byte, then school indices as unsigned bytes."""
    if len(school_indices) > 255:
        raise WireFormatError("ranking longer than 255 schools")
    for idx in school_indices:
        if not 0 <= idx <= 255:
            raise WireFormatError(f"school index {idx} outside one byte")
    return bytes([len(school_indices)]) + bytes(school_indices)


def decode_ranking(data: bytes) -> tuple[int, ...]:
    if not data:
        raise WireFormatError("empty ranking payload")
    length = data[0]
    if len(data) != 1 + length:
        raise WireFormatError(
            f"ranking payload declares {length} entries but carries {len(data) - 1}"
        )
    return tuple(data[1:])
