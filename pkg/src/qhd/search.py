"""Enumeration and verification of extra -1 curve placements.

Candidate curves are rational classes determined by their intersections
with the configuration: a candidate attaches transversally to 2 or 3
components, once each, with adjunction weight sum(-k_j) = 1 and
self-pairing -1.  Placements are pairwise-orthogonal sets of candidates;
each is verified geometrically by materialising the extra curves and
running the blow-down engine to four lines in general position.
Arithmetic alone never accepts a placement.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .birational import (
    BlowDownFailure,
    BlowDownRecord,
    blow_down_to_four_lines,
    k_squared,
)
from .curve_config import Curve, CurveConfig, FamilyParams, IncidencePoint, make_family
from .discriminant import DiscriminantForm, Subgroup, discriminant_form, model_subgroup
from .errors import EnumerationLimitError, QhdError
from .lattice import (
    Cycle,
    IntersectionLattice,
    canonical_coefficients,
    intersection_matrix,
    invert_exact,
)

DEFAULT_PLACEMENT_LIMIT = 10**6


@dataclass(frozen=True)
class CandidateClass:
    """A possible -1 curve, known only through its intersection numbers."""

    attachments: tuple[int, ...]
    rational_class: tuple[Fraction, ...]
    self_pairing: Fraction


@dataclass(frozen=True)
class Placement:
    """A set of candidate -1 curves, possibly verified by a blow-down record."""

    candidates: tuple[CandidateClass, ...]
    verified: BlowDownRecord | None = None
    rejection: str | None = None

    @property
    def attachment_sets(self) -> tuple[tuple[int, ...], ...]:
        return tuple(c.attachments for c in self.candidates)


@dataclass(frozen=True)
class ClassificationResult:
    """Verified placements grouped by the surface they live on.

    ``placements`` holds one representative per distinct model subgroup
    and ``subgroups`` the matching invariants; distinct four-lines
    contractions with the same subgroup are different blow-down routes
    on a single surface (the degenerate families admit more than three
    remarkable -1 curves) and are kept in ``all_verified``.
    """

    params: FamilyParams
    placements: tuple[Placement, ...]
    subgroups: tuple[Subgroup, ...]
    all_verified: tuple[Placement, ...]
    rejected: tuple[Placement, ...]

    @property
    def count(self) -> int:
        return len(self.placements)


@dataclass(frozen=True)
class SweepRow:
    params: FamilyParams
    result: ClassificationResult
    expected: int

    @property
    def matches(self) -> bool:
        return self.result.count == self.expected


# ---------------------------------------------------------------------------
# candidates


def candidate_classes(gamma: CurveConfig) -> list[CandidateClass]:
    """All candidate -1 classes attached at 2 or 3 components, once each.

    The filter is exact: sum of -k_j over the attachments equals 1, and
    the rational class solving M c = v has self-pairing v^T c = -1.
    """
    L = intersection_matrix(gamma)
    k = canonical_coefficients(L)
    inv = invert_exact(L.matrix)
    ordering = L.ordering
    n = len(ordering)
    out = []
    for size in (2, 3):
        for subset in itertools.combinations(range(n), size):
            if sum(-k[i] for i in subset) != 1:
                continue
            pairing = sum(inv[i][j] for i in subset for j in subset)
            if pairing != -1:
                continue
            cls = tuple(
                sum(inv[row][j] for j in subset) for row in range(n)
            )
            out.append(
                CandidateClass(
                    tuple(ordering[i] for i in subset), cls, Fraction(-1)
                )
            )
    out.sort(key=lambda c: c.attachments)
    return out


def expected_extras(gamma: CurveConfig) -> int:
    """Number of extra -1 curves a plane model needs: (4 + B) - curve count."""
    blowups = 9 - k_squared(gamma)
    return 4 + blowups - len(gamma.curves)


def _mutual_pairing(
    inv: Sequence[Sequence[Fraction]],
    index: dict[int, int],
    a: CandidateClass,
    b: CandidateClass,
) -> Fraction:
    return sum(
        inv[index[i]][index[j]] for i in a.attachments for j in b.attachments
    )


def enumerate_placements(
    gamma: CurveConfig,
    m: int,
    candidates: Sequence[CandidateClass] | None = None,
    limit: int = DEFAULT_PLACEMENT_LIMIT,
) -> list[Placement]:
    """All m-element pairwise-orthogonal candidate sets, in attachment order."""
    if m == 0:
        return [Placement(())]
    if candidates is None:
        candidates = candidate_classes(gamma)
    L = intersection_matrix(gamma)
    inv = invert_exact(L.matrix)
    index = L.index
    count = len(candidates)
    disjoint = [
        [
            _mutual_pairing(inv, index, candidates[i], candidates[j]) == 0
            for j in range(count)
        ]
        for i in range(count)
    ]
    total = 1
    for step in range(m):
        total = total * max(count - step, 0) // (step + 1)
    if total > limit:
        raise EnumerationLimitError(
            f"{total} candidate combinations exceed the limit {limit}"
        )
    placements = []
    for combo in itertools.combinations(range(count), m):
        if all(disjoint[i][j] for i, j in itertools.combinations(combo, 2)):
            placements.append(Placement(tuple(candidates[i] for i in combo)))
    placements.sort(key=lambda pl: pl.attachment_sets)
    return placements


# ---------------------------------------------------------------------------
# geometric verification


def materialize(gamma: CurveConfig, attachment_sets: Sequence[Iterable[int]]) -> CurveConfig:
    """Attach one fresh -1 curve per attachment set, transversally at new points."""
    curves = list(gamma.curves)
    points = list(gamma.points)
    next_cid = gamma.next_curve_id()
    next_pid = gamma.next_point_id()
    for i, targets in enumerate(attachment_sets):
        xid = next_cid
        next_cid += 1
        curves.append(Curve(xid, -1, f"extra{i + 1}"))
        for target in sorted(targets):
            gamma.curve(target)
            points.append(IncidencePoint.make(next_pid, (target, xid)))
            next_pid += 1
    return CurveConfig(tuple(curves), tuple(points), gamma.marks)


def verify_attachment_sets(
    gamma: CurveConfig, attachment_sets: Sequence[Iterable[int]]
) -> tuple[BlowDownRecord | None, str | None]:
    """Run the engine on gamma plus extras; returns (record, None) or (None, reason)."""
    staged = materialize(gamma, attachment_sets)
    result = blow_down_to_four_lines(staged)
    if isinstance(result, BlowDownFailure):
        return None, f"{result.reason}: {result.detail}"
    return result.record, None


def verify_placement(gamma: CurveConfig, placement: Placement) -> Placement:
    """Materialise and blow down a placement; accepted iff four general lines result."""
    record, reason = verify_attachment_sets(gamma, placement.attachment_sets)
    if record is None:
        return Placement(placement.candidates, None, reason)
    return Placement(placement.candidates, record, None)


# ---------------------------------------------------------------------------
# classification

def nef_filter(gamma: CurveConfig, nef: Cycle, candidate: CandidateClass) -> bool:
    """Whether the candidate pairs non-negatively against a caller-asserted nef cycle.

    With M c = v for the candidate class c, the pairing N.c equals the
    plain dot product of N's coefficients with the attachment vector v.
    """
    L = intersection_matrix(gamma)
    value = sum(nef.coefficients[L.index[cid]] for cid in candidate.attachments)
    return value >= 0


def central_cycle(gamma: CurveConfig) -> Cycle:
    """The central curve of a star as a cycle (the stock nef divisor for pruning)."""
    from .lattice import star_shape

    star = star_shape(gamma)
    L = intersection_matrix(gamma)
    coeffs = [Fraction(0)] * len(L.ordering)
    coeffs[L.index[star.central]] = Fraction(1)
    return Cycle(tuple(coeffs))


def classify(
    params: FamilyParams,
    nef_cycles: Sequence[Cycle] | None = None,
) -> ClassificationResult:
    """Full pipeline: generate, enumerate, verify, group by model subgroup."""
    gamma = make_family(params)
    candidates = candidate_classes(gamma)
    if nef_cycles:
        candidates = [
            c
            for c in candidates
            if all(nef_filter(gamma, nef, c) for nef in nef_cycles)
        ]
    placements = enumerate_placements(gamma, expected_extras(gamma), candidates)
    accepted, rejected = [], []
    for placement in placements:
        outcome = verify_placement(gamma, placement)
        (accepted if outcome.verified is not None else rejected).append(outcome)
    representatives: list[Placement] = []
    subgroups: list[Subgroup] = []
    if accepted:
        form = discriminant_form(intersection_matrix(gamma))
        for placement in accepted:
            H = model_subgroup(placement.verified, form=form, gamma=gamma)
            if not any(H.same_subgroup(existing) for existing in subgroups):
                representatives.append(placement)
                subgroups.append(H)
    return ClassificationResult(
        params,
        tuple(representatives),
        tuple(subgroups),
        tuple(accepted),
        tuple(rejected),
    )


def expected_count(params: FamilyParams) -> int:
    """The classification rule: two placements exactly at the symmetric parameters."""
    p, q, r = params.p, params.q, params.r
    if params.family == "W":
        return 2 if p == q == r else 1
    if params.family == "N":
        return 2 if (p == q + 2 and r == 0) else 1
    return 2 if p == r + 1 else 1


def sweep(
    family: str,
    p_max: int,
    q_max: int,
    r_max: int,
    use_nef_filter: bool = False,
) -> list[SweepRow]:
    """One classification per parameter triple, with the expected-count comparison."""
    rows = []
    for p in range(p_max + 1):
        for q in range(q_max + 1):
            for r in range(r_max + 1):
                params = FamilyParams(family, p, q, r)
                nef_cycles = None
                if use_nef_filter:
                    nef_cycles = [central_cycle(make_family(params))]
                result = classify(params, nef_cycles=nef_cycles)
                rows.append(SweepRow(params, result, expected_count(params)))
    return rows
