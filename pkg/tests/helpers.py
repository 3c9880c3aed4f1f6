"""Shared builders and independent oracles for the test suite."""

from __future__ import annotations

import itertools
import random
from math import gcd

from qhd.curve_config import Curve, CurveConfig, IncidencePoint


def chain_config(self_ints):
    """A chain of curves 0-1-2-... meeting transversally."""
    curves = tuple(Curve(i, s) for i, s in enumerate(self_ints))
    points = tuple(
        IncidencePoint.make(i, (i, i + 1)) for i in range(len(self_ints) - 1)
    )
    return CurveConfig(curves, points)


def config_from_edges(self_ints, edges):
    """Curves 0..n-1 with one transversal point per listed pair."""
    curves = tuple(Curve(i, s) for i, s in enumerate(self_ints))
    points = tuple(IncidencePoint.make(k, e) for k, e in enumerate(edges))
    return CurveConfig(curves, points)


def det_cofactor(rows):
    """Exact determinant by first-row cofactor expansion (test oracle)."""
    n = len(rows)
    if n == 0:
        return 1
    if n == 1:
        return rows[0][0]
    total = 0
    for j in range(n):
        if rows[0][j]:
            minor = [row[:j] + row[j + 1 :] for row in rows[1:]]
            total += (-1) ** j * rows[0][j] * det_cofactor(minor)
    return total


def minor_gcd_diagonal(rows):
    """Invariant factors via gcds of k x k minors (test oracle for SNF)."""
    rows = [list(r) for r in rows]
    n, m = len(rows), len(rows[0])
    out = []
    prev = 1
    for k in range(1, min(n, m) + 1):
        g = 0
        for rsel in itertools.combinations(range(n), k):
            for csel in itertools.combinations(range(m), k):
                sub = [[rows[i][j] for j in csel] for i in rsel]
                g = gcd(g, abs(det_cofactor(sub)))
        if g == 0 or prev == 0:
            out.append(0)
            prev = 0
        else:
            out.append(g // prev)
            prev = g
    return out


def brute_subgroups(group, order):
    """All subgroups of the given order via closures of small generator tuples.

    Only sound for groups every subgroup of which is generated by at
    most three elements; ample for the tiny oracle groups used here.
    """
    from qhd.discriminant import closure

    elements = list(group.elements())
    found = set()
    for size in (0, 1, 2, 3):
        for gens in itertools.combinations(elements, size):
            sub = closure(group, gens)
            if len(sub) == order:
                found.add(sub)
    return found


def random_contractible_config(rng: random.Random) -> CurveConfig:
    """A random configuration with a contractible curve 0 of self-intersection -1.

    Every other curve meets curve 0 at most once (with arbitrary local
    multiplicity), which is the regime where blow-up inverts contraction
    exactly; points away from curve 0 and mutual tangencies are allowed.
    """
    n = rng.randint(2, 6)
    curves = [Curve(0, -1)]
    for i in range(1, n + 1):
        curves.append(Curve(i, rng.randint(-4, 2)))
    others = list(range(1, n + 1))
    rng.shuffle(others)
    meeting = others[: rng.randint(1, n)]
    points = []
    pid = 0
    idx = 0
    while idx < len(meeting):
        size = min(rng.randint(1, 3), len(meeting) - idx)
        group = meeting[idx : idx + size]
        idx += size
        mults = {(0, c): rng.randint(1, 3) for c in group}
        for a, b in itertools.combinations(group, 2):
            mults[(a, b)] = rng.randint(1, 2)
        points.append(IncidencePoint.make(pid, [0] + group, mults))
        pid += 1
    for _ in range(rng.randint(0, 3)):
        if len(others) >= 2:
            a, b = rng.sample(others, 2)
            points.append(IncidencePoint.make(pid, (a, b), {(a, b): rng.randint(1, 3)}))
            pid += 1
    return CurveConfig(tuple(curves), tuple(points))


def replay_record_forward(record):
    """Re-run a record's contractions, checking the exact update formulas.

    Returns the final configuration; raises AssertionError on any
    mismatch with the recorded steps or the intersection calculus.
    """
    from qhd.birational import contract

    cur = record.initial
    for step in record.steps:
        ids = [c.id for c in cur.curves if c.id != step.contracted]
        self_before = {c: cur.total(c, c) for c in ids}
        pair_before = {
            (a, b): cur.total(a, b) for a, b in itertools.combinations(ids, 2)
        }
        nxt, replayed = contract(cur, step.contracted)
        assert replayed.multiplicities == step.multiplicities
        m = dict(step.multiplicities)
        for c in ids:
            assert nxt.total(c, c) - self_before[c] == m.get(c, 0) ** 2
        for (a, b), before in pair_before.items():
            assert nxt.total(a, b) - before == m.get(a, 0) * m.get(b, 0)
        cur = nxt
    return cur


def replay_record_backward(record):
    """Blow the record back up from the final state, checking singular points.

    Every point blown up must be a genuine singular point of the total
    transform (at least two incident branches, or a marked point); the
    initial configuration must be recovered exactly up to point ids.
    """
    from qhd.birational import blow_up
    from qhd.curve_config import config_key

    cur = record.final
    for step in reversed(record.steps):
        assert step.new_point is not None, "cannot invert an isolated contraction"
        target = None
        for p in cur.points:
            if set(p.incident) == set(step.new_point.incident) and all(
                p.mult(a, b) == step.new_point.mult(a, b)
                for a, b in itertools.combinations(p.incident, 2)
            ):
                target = p
                break
        assert target is not None, f"merge point of step {step.contracted} not found"
        assert len(target.incident) >= 2 or any(
            mk.point == target.id for mk in cur.marks
        ), "blow-up at a smooth point of the total transform"
        label = record.initial.curve(step.contracted).label
        cur = blow_up(cur, target.id, curve_id=step.contracted, label=label)
    assert config_key(cur) == config_key(record.initial)
    return cur
