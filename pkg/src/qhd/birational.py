"""Blow-up / blow-down calculus on curve configurations.

Contracting a curve f with f.f = -1 merges every point of f into a
single image point.  For each curve C meeting f with total multiplicity
m_C the bookkeeping is exact:

* C.C increases by m_C^2,
* for curves C, D meeting f the local multiplicity at the new point is
  m_C * m_D plus whatever the pair already shared at points of f,
* total intersection numbers satisfy C'.D' = C.D + m_C * m_D.

A curve with m_C >= 2 acquires a singular image; it keeps its identity
and receives a mark (node-like when it met f at two or more distinct
points, cusp-like when it met f tangentially at one).  Contracting a
marked curve, or contracting through a marked point, is refused: the
verified calculus never needs it, and refusing is conservative.

Blow-up is the exact inverse of contraction for points where every
incident curve arrived along a single branch (which includes every
point the drivers here ever revisit); node-like marks would require
branch data the configuration no longer carries, and are rejected.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from .curve_config import (
    CUSP_LIKE,
    NODE_LIKE,
    Curve,
    CurveConfig,
    IncidencePoint,
    SingularMark,
)
from .errors import (
    ContractionBlockedError,
    NotContractibleError,
    QhdError,
    UnknownPointError,
    UnsupportedBlowUpError,
)

Policy = Callable[[CurveConfig, tuple[int, ...]], int]


@dataclass(frozen=True)
class BlowDownStep:
    """One contraction: the curve removed, the merge point, and C.f multiplicities."""

    contracted: int
    new_point: IncidencePoint | None
    multiplicities: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class BlowDownRecord:
    """An ordered contraction log with class tracking.

    ``pic_basis`` maps every curve id of the initial configuration to
    its integer class in the basis (line class, e_1, ..., e_B) of the
    plane model, with e_i the class of the step-i exceptional curve; it
    is present exactly when the run ended at four lines in general
    position.
    """

    steps: tuple[BlowDownStep, ...]
    pic_basis: Mapping[int, tuple[int, ...]] | None
    final: CurveConfig
    initial: CurveConfig


@dataclass(frozen=True)
class PlaneModel:
    """A terminal state of the contraction driver plus its record."""

    config: CurveConfig
    record: BlowDownRecord


@dataclass(frozen=True)
class BlowDownFailure:
    """A failed run: reason is 'stall' or 'forbidden-singular-contraction'."""

    reason: str
    detail: str
    config: CurveConfig
    steps: tuple[BlowDownStep, ...]


# ---------------------------------------------------------------------------
# contraction


def contract(config: CurveConfig, fid: int) -> tuple[CurveConfig, BlowDownStep]:
    """Contract the -1 curve ``fid``; returns the new configuration and the step."""
    f = config.curve(fid)
    if f.self_int != -1:
        raise NotContractibleError(f"curve {fid} has self-intersection {f.self_int}, not -1")
    if config.marks_on(fid):
        raise ContractionBlockedError(f"curve {fid} carries a singularity mark")
    f_points = config.points_on(fid)
    f_pids = {p.id for p in f_points}
    for mark in config.marks:
        if mark.point in f_pids:
            raise ContractionBlockedError(
                f"curve {mark.curve} has a singular point on the contracted curve {fid}"
            )

    branch_mults: dict[int, list[int]] = {}
    prior: dict[tuple[int, int], int] = {}
    for p in f_points:
        others = [c for c in p.incident if c != fid]
        for c in others:
            branch_mults.setdefault(c, []).append(p.mult(c, fid))
        for a, b in itertools.combinations(others, 2):
            key = (min(a, b), max(a, b))
            prior[key] = prior.get(key, 0) + p.mult(a, b)
    totals = {c: sum(ms) for c, ms in branch_mults.items()}

    curves = tuple(
        Curve(c.id, c.self_int + totals.get(c.id, 0) ** 2, c.label)
        for c in config.curves
        if c.id != fid
    )
    kept_points = [p for p in config.points if p.id not in f_pids]
    new_point = None
    new_marks = []
    if totals:
        pid = config.next_point_id()
        incident = sorted(totals)
        mults = {
            (a, b): totals[a] * totals[b] + prior.get((a, b), 0)
            for a, b in itertools.combinations(incident, 2)
        }
        new_point = IncidencePoint.make(pid, incident, mults)
        kept_points.append(new_point)
        for c, ms in branch_mults.items():
            if totals[c] >= 2:
                kind = NODE_LIKE if len(ms) >= 2 else CUSP_LIKE
                new_marks.append(SingularMark(c, pid, kind, tuple(sorted(ms))))
    marks = tuple(config.marks) + tuple(new_marks)
    step = BlowDownStep(fid, new_point, tuple(sorted(totals.items())))
    return CurveConfig(curves, tuple(kept_points), marks), step


# ---------------------------------------------------------------------------
# blow-up


def blow_up(
    config: CurveConfig,
    point_id: int,
    *,
    curve_id: int | None = None,
    label: str | None = None,
) -> CurveConfig:
    """Blow up a point; exact inverse of :func:`contract` on its images.

    Each curve through the point loses (multiplicity at the point)^2
    from its self-intersection and meets the new -1 curve; pairs of
    branches keep whatever multiplicity exceeds the product of their
    point multiplicities, sharing a point on the new curve when that
    residue is positive and separating otherwise.
    """
    p = config.point(point_id)
    marks_here = {m.curve: m for m in config.marks if m.point == point_id}
    for mark in marks_here.values():
        if mark.kind == NODE_LIKE:
            raise UnsupportedBlowUpError(
                f"point {point_id} carries a node-like mark on curve {mark.curve}; "
                "its branch distribution is not recoverable"
            )
    mu = {c: (marks_here[c].mult if c in marks_here else 1) for c in p.incident}

    residual: dict[tuple[int, int], int] = {}
    for a, b in itertools.combinations(sorted(p.incident), 2):
        r = p.mult(a, b) - mu[a] * mu[b]
        if r < 0:
            raise QhdError(
                f"point {point_id} has multiplicity below branch product for ({a}, {b})"
            )
        residual[(a, b)] = r

    # group branches that still meet after the blow-up
    parent = {c: c for c in p.incident}

    def find(c):
        while parent[c] != c:
            parent[c] = parent[parent[c]]
            c = parent[c]
        return c

    for (a, b), r in residual.items():
        if r >= 1:
            parent[find(a)] = find(b)
    groups: dict[int, list[int]] = {}
    for c in p.incident:
        groups.setdefault(find(c), []).append(c)
    for members in groups.values():
        for a, b in itertools.combinations(sorted(members), 2):
            if residual[(a, b)] == 0:
                raise QhdError(
                    f"point {point_id} groups branches inconsistently; "
                    "not the image of a contraction"
                )

    fid = config.next_curve_id() if curve_id is None else curve_id
    if any(c.id == fid for c in config.curves):
        raise QhdError(f"curve id {fid} already exists")
    curves = tuple(
        Curve(c.id, c.self_int - mu[c.id] ** 2, c.label) if c.id in mu else c
        for c in config.curves
    ) + (Curve(fid, -1, label),)
    points = [q for q in config.points if q.id != point_id]
    pid = config.next_point_id()
    for members in sorted(groups.values(), key=min):
        incident = sorted(members) + [fid]
        mults = {(c, fid): mu[c] for c in members}
        for a, b in itertools.combinations(sorted(members), 2):
            mults[(a, b)] = residual[(a, b)]
        points.append(IncidencePoint.make(pid, incident, mults))
        pid += 1
    marks = tuple(m for m in config.marks if m.point != point_id)
    return CurveConfig(curves, tuple(points), marks)


def blow_up_free_point(
    config: CurveConfig,
    on_curve: int,
    *,
    curve_id: int | None = None,
    label: str | None = None,
) -> CurveConfig:
    """Blow up a generic point of one curve (a point on no other curve)."""
    host = config.curve(on_curve)
    fid = config.next_curve_id() if curve_id is None else curve_id
    if any(c.id == fid for c in config.curves):
        raise QhdError(f"curve id {fid} already exists")
    curves = tuple(
        Curve(c.id, c.self_int - 1, c.label) if c.id == on_curve else c
        for c in config.curves
    ) + (Curve(fid, -1, label),)
    points = tuple(config.points) + (
        IncidencePoint.make(config.next_point_id(), (on_curve, fid)),
    )
    return CurveConfig(curves, points, config.marks)


def elementary_modification(
    config: CurveConfig,
    point: int | None = None,
    contract_ids: Sequence[int] = (),
    *,
    free_on: int | None = None,
) -> CurveConfig:
    """An optional blow-up followed by an ordered list of contractions.

    ``point`` blows up an existing point; ``free_on`` blows up a fresh
    generic point of the named curve.  Passing neither performs the
    contractions only.
    """
    if point is not None and free_on is not None:
        raise QhdError("pass at most one of point and free_on")
    out = config
    if free_on is not None:
        out = blow_up_free_point(out, free_on)
    elif point is not None:
        out = blow_up(out, point)
    for cid in contract_ids:
        out, _ = contract(out, cid)
    return out


# ---------------------------------------------------------------------------
# the full blow-down driver


def eligible_contractions(config: CurveConfig) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Ids of -1 curves that can be contracted, and those blocked by marks."""
    marked_curves = {m.curve for m in config.marks}
    marked_points = {m.point for m in config.marks}
    free, blocked = [], []
    for c in config.curves:
        if c.self_int != -1:
            continue
        if c.id in marked_curves or any(
            p.id in marked_points for p in config.points_on(c.id)
        ):
            blocked.append(c.id)
        else:
            free.append(c.id)
    return tuple(free), tuple(blocked)


def default_policy(config: CurveConfig, eligible: tuple[int, ...]) -> int:
    """Contract extra-labelled curves first, then the lowest id."""
    extras = [
        cid for cid in eligible if (config.curve(cid).label or "").startswith("extra")
    ]
    return min(extras) if extras else min(eligible)


def full_blow_down(
    config: CurveConfig, policy: Policy | None = None
) -> PlaneModel | BlowDownFailure:
    """Contract -1 curves until none remains, logging every step.

    Failure (a value, not an exception) is reported when the process
    stalls with more than four curves or when the only remaining -1
    curves pass through singular branch points.
    """
    choose = policy or default_policy
    current = config
    steps: list[BlowDownStep] = []
    while True:
        free, blocked = eligible_contractions(current)
        if not free:
            if blocked:
                return BlowDownFailure(
                    "forbidden-singular-contraction",
                    f"-1 curves {blocked} pass through singular branch points",
                    current,
                    tuple(steps),
                )
            if len(current.curves) > 4:
                stuck = [c.id for c in current.curves if c.self_int < -1]
                detail = f"stalled with {len(current.curves)} curves"
                if stuck:
                    detail += f"; curves {stuck} keep self-intersection < -1"
                return BlowDownFailure("stall", detail, current, tuple(steps))
            record = BlowDownRecord(
                tuple(steps), _pic_classes(config, steps, current), current, config
            )
            return PlaneModel(current, record)
        current, step = contract(current, choose(current, free))
        steps.append(step)


def blow_down_to_four_lines(config: CurveConfig) -> PlaneModel | BlowDownFailure:
    """Find a contraction order ending at four lines in general position.

    The four-lines verdict genuinely depends on the order once several
    -1 curves interact (contracting an adjacent curve ahead of a chain
    end can land on a conic-plus-lines model instead), so verification
    is existential: a deterministic depth-first search over admissible
    contractions, with visited states memoised, returns the first
    successful record.  When no order succeeds, the default-policy run
    supplies the reported failure.
    """
    seen: set = set()

    def order(cur: CurveConfig, free: tuple[int, ...]) -> list[int]:
        def rank(cid: int) -> tuple[int, int, int]:
            curve = cur.curve(cid)
            is_extra = (curve.label or "").startswith("extra")
            return (0 if is_extra else 1, len(cur.neighbors(cid)), cid)

        return sorted(free, key=rank)

    def dfs(cur: CurveConfig, steps: list[BlowDownStep]) -> PlaneModel | None:
        from .curve_config import config_key

        # self-intersections only grow and marks never dissolve under
        # contraction, so such states cannot end at four clean +1 lines
        if cur.marks or any(c.self_int > 1 for c in cur.curves):
            return None
        # curves at self-intersection >= 0 can never be contracted again
        permanent = [c.id for c in cur.curves if c.self_int >= 0]
        if len(permanent) > 4:
            return None
        if any(
            cur.total(a, b) > 1 for a, b in itertools.combinations(permanent, 2)
        ):
            return None
        key = config_key(cur)
        if key in seen:
            return None
        seen.add(key)
        free, _blocked = eligible_contractions(cur)
        if not free:
            if is_four_lines_general_position(cur):
                record = BlowDownRecord(
                    tuple(steps), _pic_classes(config, steps, cur), cur, config
                )
                return PlaneModel(cur, record)
            return None
        for fid in order(cur, free):
            nxt, step = contract(cur, fid)
            steps.append(step)
            hit = dfs(nxt, steps)
            if hit is not None:
                return hit
            steps.pop()
        return None

    hit = dfs(config, [])
    if hit is not None:
        return hit
    fallback = full_blow_down(config)
    if isinstance(fallback, BlowDownFailure):
        return fallback
    return BlowDownFailure(
        "stall",
        "no admissible contraction order ends at four lines in general position "
        f"(default policy leaves {len(fallback.config.curves)} curves)",
        fallback.config,
        fallback.record.steps,
    )


def _pic_classes(
    initial: CurveConfig, steps: Sequence[BlowDownStep], final: CurveConfig
) -> dict[int, tuple[int, ...]] | None:
    """Classes of all initial curves in the plane-model basis, or None.

    Only a final state of four general-position lines determines the
    basis (every surviving curve is the line class); each contracted
    curve contributes the exceptional class of its step, corrected by
    the recorded multiplicities of later contractions.
    """
    if not is_four_lines_general_position(final):
        return None
    width = len(steps) + 1
    classes: dict[int, list[int]] = {
        c.id: [1] + [0] * len(steps) for c in final.curves
    }
    for i in range(len(steps), 0, -1):
        step = steps[i - 1]
        for cid, m in step.multiplicities:
            classes[cid][i] -= m
        unit = [0] * width
        unit[i] = 1
        classes[step.contracted] = unit
    return {cid: tuple(vec) for cid, vec in classes.items()}


def is_four_lines_general_position(pm) -> bool:
    """Whether a terminal state is four unit lines meeting pairwise in 6 points."""
    config = pm.config if isinstance(pm, PlaneModel) else pm
    if len(config.curves) != 4 or config.marks:
        return False
    if any(c.self_int != 1 for c in config.curves):
        return False
    ids = config.curve_ids
    if any(config.total(a, b) != 1 for a, b in itertools.combinations(ids, 2)):
        return False
    if len(config.points) != 6:
        return False
    return all(
        len(p.incident) == 2 and all(m == 1 for _, _, m in p.mults)
        for p in config.points
    )


def k_squared(config: CurveConfig, record: BlowDownRecord | None = None) -> int:
    """K^2 of a surface whose Pic is rationally spanned by the configuration.

    With a verified record available the count of contractions must
    agree: 9 - B = 10 - (number of curves).
    """
    value = 10 - len(config.curves)
    if record is not None and 9 - len(record.steps) != value:
        raise QhdError(
            f"record has {len(record.steps)} steps, inconsistent with K^2 = {value}"
        )
    return value


# ---------------------------------------------------------------------------
# record serialization


def record_to_dict(record: BlowDownRecord) -> dict:
    from .curve_config import config_to_dict

    return {
        "steps": [
            {
                "contracted": s.contracted,
                "new_point": None
                if s.new_point is None
                else {
                    "id": s.new_point.id,
                    "incident": list(s.new_point.incident),
                    "mults": sorted(
                        [min(a, b), max(a, b), m] for a, b, m in s.new_point.mults
                    ),
                },
                "multiplicities": [list(pair) for pair in s.multiplicities],
            }
            for s in record.steps
        ],
        "pic_basis": None
        if record.pic_basis is None
        else {str(cid): list(vec) for cid, vec in sorted(record.pic_basis.items())},
        "final": config_to_dict(record.final),
        "initial": config_to_dict(record.initial),
    }
