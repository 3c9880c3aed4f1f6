"""Curve configurations with point-level incidence data.

A configuration is a finite set of smooth rational curves together with
the points where they meet.  Points carry the local intersection
multiplicity of every pair of incident branches (1 = transversal,
2 = simple tangency, 3 = triple tangency, ...), which is exactly the
bookkeeping the blow-down calculus needs; a plain intersection matrix
cannot express it.

The module also provides the generators for the three star-shaped
families ``W``, ``N`` and ``M`` parametrised by non-negative integers
(p, q, r), and the continued-fraction helpers used to read arm data.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import gcd
from typing import Iterable, Mapping

from .errors import QhdError, UnknownCurveError, UnknownPointError

FAMILIES = ("W", "N", "M")

NODE_LIKE = "node-like"
CUSP_LIKE = "cusp-like"


# ---------------------------------------------------------------------------
# data types


@dataclass(frozen=True)
class Curve:
    """A smooth rational curve: identity, self-intersection, optional role tag."""

    id: int
    self_int: int
    label: str | None = None


@dataclass(frozen=True)
class IncidencePoint:
    """A point lying on one or more curves.

    ``mults`` lists local intersection multiplicities as ``(a, b, m)``
    triples of incident curve ids.  Pairs without an entry default to 1
    (transversal).  Entries are kept as given so that malformed
    (asymmetric or conflicting) data can be reported by :func:`validate`;
    use :meth:`make` to build normalised points.

    Points with a single incident curve are allowed: they mark the
    location of a contracted curve on its image, which the blow-up
    inverse needs.
    """

    id: int
    incident: tuple[int, ...]
    mults: tuple[tuple[int, int, int], ...] = ()

    @staticmethod
    def make(
        pid: int,
        incident: Iterable[int],
        mults: Mapping[tuple[int, int], int] | Iterable[tuple[int, int, int]] | None = None,
    ) -> "IncidencePoint":
        """Build a point with sorted incidence and a complete, canonical mult table."""
        inc = tuple(sorted(set(incident)))
        given: dict[tuple[int, int], int] = {}
        if mults is not None:
            items = mults.items() if isinstance(mults, Mapping) else ((a, b, m) for a, b, m in mults)
            for entry in items:
                if isinstance(mults, Mapping):
                    (a, b), m = entry  # type: ignore[misc]
                else:
                    a, b, m = entry  # type: ignore[misc]
                key = (min(a, b), max(a, b))
                if given.get(key, m) != m:
                    raise QhdError(f"conflicting multiplicities for pair {key} at point {pid}")
                given[key] = m
        table = tuple(
            (a, b, given.get((a, b), 1)) for a, b in itertools.combinations(inc, 2)
        )
        return IncidencePoint(pid, inc, table)

    def mult(self, a: int, b: int) -> int:
        """Local multiplicity of the pair (a, b) at this point (0 if not both incident)."""
        if a == b or a not in self.incident or b not in self.incident:
            return 0
        for x, y, m in self.mults:
            if {x, y} == {a, b}:
                return m
        return 1


@dataclass(frozen=True)
class SingularMark:
    """Annotation of a singular point acquired by a curve image.

    ``branches`` records the local multiplicities the curve had with the
    contracted curve at each of the formerly distinct points; their sum
    is the multiplicity of the singularity.  ``kind`` is ``node-like``
    when the curve met the contracted curve at two or more distinct
    points and ``cusp-like`` when it met it tangentially at one point.
    """

    curve: int
    point: int
    kind: str
    branches: tuple[int, ...]

    @property
    def mult(self) -> int:
        return sum(self.branches)


@dataclass(frozen=True)
class CurveConfig:
    """An immutable configuration of curves, points and singularity marks."""

    curves: tuple[Curve, ...]
    points: tuple[IncidencePoint, ...]
    marks: tuple[SingularMark, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "curves", tuple(sorted(self.curves, key=lambda c: c.id)))
        object.__setattr__(self, "points", tuple(sorted(self.points, key=lambda p: p.id)))
        object.__setattr__(
            self, "marks", tuple(sorted(self.marks, key=lambda m: (m.curve, m.point)))
        )

    @cached_property
    def _curve_map(self) -> dict[int, Curve]:
        return {c.id: c for c in self.curves}

    @cached_property
    def _point_map(self) -> dict[int, IncidencePoint]:
        return {p.id: p for p in self.points}

    @cached_property
    def curve_ids(self) -> tuple[int, ...]:
        return tuple(c.id for c in self.curves)

    def curve(self, cid: int) -> Curve:
        try:
            return self._curve_map[cid]
        except KeyError:
            raise UnknownCurveError(cid) from None

    def point(self, pid: int) -> IncidencePoint:
        try:
            return self._point_map[pid]
        except KeyError:
            raise UnknownPointError(pid) from None

    @cached_property
    def _points_on(self) -> dict[int, tuple[IncidencePoint, ...]]:
        on: dict[int, list[IncidencePoint]] = {c.id: [] for c in self.curves}
        for p in self.points:
            for cid in p.incident:
                if cid in on:
                    on[cid].append(p)
        return {cid: tuple(ps) for cid, ps in on.items()}

    def points_on(self, cid: int) -> tuple[IncidencePoint, ...]:
        self.curve(cid)
        return self._points_on.get(cid, ())

    def total(self, a: int, b: int) -> int:
        """Total intersection number of curves ``a`` and ``b``."""
        if a == b:
            return self.curve(a).self_int
        self.curve(b)
        return sum(p.mult(a, b) for p in self.points_on(a))

    def neighbors(self, cid: int) -> tuple[int, ...]:
        out = {c for p in self.points_on(cid) for c in p.incident if c != cid}
        return tuple(sorted(out))

    def marks_on(self, cid: int) -> tuple[SingularMark, ...]:
        return tuple(m for m in self.marks if m.curve == cid)

    def next_curve_id(self) -> int:
        return max((c.id for c in self.curves), default=-1) + 1

    def next_point_id(self) -> int:
        return max((p.id for p in self.points), default=-1) + 1


@dataclass(frozen=True)
class FamilyParams:
    """A family name together with its non-negative parameters (p, q, r)."""

    family: str
    p: int
    q: int
    r: int

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise QhdError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        for name in ("p", "q", "r"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 0:
                raise QhdError(f"parameter {name} must be a non-negative integer, got {value!r}")


# ---------------------------------------------------------------------------
# continued fractions


def cf_expand(n: int, q: int) -> list[int]:
    """Expand n/q (0 < q < n coprime) as [b1, ..., bs], all entries >= 2.

    The expansion satisfies n/q = b1 - 1/(b2 - 1/(... - 1/bs)) and encodes
    a string of curves of self-intersections -b1, ..., -bs read outward.
    """
    if not (0 < q < n):
        raise QhdError(f"need 0 < q < n, got n={n}, q={q}")
    if gcd(n, q) != 1:
        raise QhdError(f"n and q must be coprime, got n={n}, q={q}")
    bs = []
    while q > 0:
        b = -(-n // q)  # ceil
        bs.append(b)
        n, q = q, b * q - n
    return bs


def cf_evaluate(bs: Iterable[int]) -> tuple[int, int]:
    """Evaluate [b1, ..., bs] to the reduced pair (n, q); inverse of cf_expand."""
    entries = list(bs)
    if not entries:
        raise QhdError("empty continued fraction")
    if any(b < 2 for b in entries):
        raise QhdError(f"entries must all be >= 2, got {entries}")
    value = Fraction(entries[-1])
    for b in reversed(entries[:-1]):
        value = b - 1 / value
    return value.numerator, value.denominator


# ---------------------------------------------------------------------------
# family generators


def _arm_weights(params: FamilyParams) -> tuple[int, list[list[int]]]:
    """Central self-intersection and arm weight strings (read outward)."""
    p, q, r = params.p, params.q, params.r
    if params.family == "W":
        # Central +1; each adjacent curve carries the chain of the
        # cyclically preceding parameter, which is what makes the
        # configuration contract onto four general-position lines for
        # arbitrary (p, q, r).
        central = 1
        arms = [
            [-(p + 2)] + [-2] * (r + 1),
            [-(q + 2)] + [-2] * (p + 1),
            [-(r + 2)] + [-2] * (q + 1),
        ]
    elif params.family == "N":
        central = 0
        arms = [
            [-(q + 2), -(p + 2)] + [-2] * (r + 1),
            [-(r + 2)] + [-2] * (q + 2),
            [-2] * (p + 1),
        ]
    else:
        central = -1
        arms = [
            [-2] * (r + 2),
            [-2] * (p + 1),
            [-(q + 2), -(r + 2), -(p + 2)] + [-2] * (q + 2),
        ]
    return central, arms


def make_family(params: FamilyParams) -> CurveConfig:
    """Build the normal-crossings star configuration for the given parameters.

    Identifiers are deterministic: the central curve is 0, then each arm
    is numbered outward in order.  The first curve of each arm is
    labelled P, Q, R respectively; the central curve is labelled
    ``central``.
    """
    central_self, arms = _arm_weights(params)
    curves = [Curve(0, central_self, "central")]
    points = []
    arm_labels = ("P", "Q", "R")
    next_cid = 1
    next_pid = 0
    for arm, label in zip(arms, arm_labels):
        prev = 0
        for k, weight in enumerate(arm):
            cid = next_cid
            next_cid += 1
            curves.append(Curve(cid, weight, label if k == 0 else None))
            points.append(IncidencePoint.make(next_pid, (prev, cid)))
            next_pid += 1
            prev = cid
    return CurveConfig(tuple(curves), tuple(points))


# ---------------------------------------------------------------------------
# queries and validation


def total_intersection(config: CurveConfig, a: int, b: int) -> int:
    """Total intersection number C.D; for a == b, the self-intersection."""
    return config.total(a, b)


def validate(config: CurveConfig) -> list[str]:
    """Return a list of invariant violations (empty iff the config is valid)."""
    issues: list[str] = []
    seen_ids: set[int] = set()
    labels: set[str] = set()
    for c in config.curves:
        if c.id in seen_ids:
            issues.append(f"duplicate curve id {c.id}")
        seen_ids.add(c.id)
        if c.label is not None:
            if c.label in labels:
                issues.append(f"duplicate label {c.label!r}")
            labels.add(c.label)
    for p in config.points:
        if not p.incident:
            issues.append(f"point {p.id} has no incident curves")
        if len(set(p.incident)) != len(p.incident):
            issues.append(f"point {p.id} lists a curve more than once")
        for cid in p.incident:
            if cid not in seen_ids:
                issues.append(f"point {p.id} references missing curve {cid}")
        table: dict[tuple[int, int], int] = {}
        for a, b, m in p.mults:
            if a not in p.incident or b not in p.incident or a == b:
                issues.append(f"point {p.id} has a multiplicity entry for non-incident pair ({a}, {b})")
                continue
            if m < 1:
                issues.append(f"point {p.id} has non-positive multiplicity for ({a}, {b})")
            key = (min(a, b), max(a, b))
            if key in table and table[key] != m:
                issues.append(f"point {p.id} has asymmetric multiplicities for pair {key}")
            table.setdefault(key, m)
    for m in config.marks:
        if m.curve not in seen_ids:
            issues.append(f"mark references missing curve {m.curve}")
        if m.point not in {p.id for p in config.points}:
            issues.append(f"mark references missing point {m.point}")
        if m.kind not in (NODE_LIKE, CUSP_LIKE):
            issues.append(f"mark has unknown kind {m.kind!r}")
    return issues


def config_key(config: CurveConfig):
    """Canonical comparison key: identical up to point ids."""
    curves = tuple((c.id, c.self_int, c.label) for c in config.curves)
    points = tuple(
        sorted(
            (p.incident, tuple(sorted((min(a, b), max(a, b), m) for a, b, m in p.mults)))
            for p in config.points
        )
    )
    marks = tuple(sorted((m.curve, m.kind, m.branches) for m in config.marks))
    return curves, points, marks


# ---------------------------------------------------------------------------
# JSON graph format


def config_to_dict(config: CurveConfig) -> dict:
    """Serialize to the graph-file schema (multiplicity-1 entries omitted)."""
    curves = [
        {"id": c.id, "self": c.self_int, "label": c.label} for c in config.curves
    ]
    points = []
    for p in config.points:
        entry: dict = {"id": p.id, "incident": list(p.incident)}
        nontrivial = sorted(
            [min(a, b), max(a, b), m] for a, b, m in p.mults if m != 1
        )
        if nontrivial:
            entry["mults"] = nontrivial
        points.append(entry)
    out = {"curves": curves, "points": points}
    if config.marks:
        out["marks"] = [
            {"curve": m.curve, "point": m.point, "kind": m.kind, "branches": list(m.branches)}
            for m in config.marks
        ]
    return out


def config_from_dict(data: dict) -> CurveConfig:
    """Parse the graph-file schema; omitted pair multiplicities default to 1."""
    try:
        curves = tuple(
            Curve(int(c["id"]), int(c["self"]), c.get("label"))
            for c in data["curves"]
        )
        points = []
        for pd in data.get("points", []):
            points.append(
                IncidencePoint.make(
                    int(pd["id"]),
                    [int(c) for c in pd["incident"]],
                    [(int(a), int(b), int(m)) for a, b, m in pd.get("mults", [])],
                )
            )
        marks = tuple(
            SingularMark(int(m["curve"]), int(m["point"]), m["kind"], tuple(int(b) for b in m["branches"]))
            for m in data.get("marks", [])
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise QhdError(f"malformed graph data: {exc}") from exc
    return CurveConfig(curves, tuple(points), marks)
