"""Discriminant groups, their Q/Z pairings, and self-isotropic subgroups.

The discriminant group of a nonsingular intersection lattice L is the
finite abelian group L*/L; its order equals |det L| and it carries a
non-degenerate pairing into Q/Z.  Unimodular overlattices of L (such as
the Picard lattice of a plane model) correspond to self-isotropic
subgroups, which is what ties the blow-down records to the group theory.

Group elements are kept in invariant-factor coordinates, i.e. tuples
(x_1, ..., x_k) with x_i taken mod d_i, where d_1 | d_2 | ... | d_k > 1.
Pairing values are reduced to the canonical representative in [0, 1) so
that equality mod 1 is plain rational equality.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import gcd, isqrt
from typing import Iterable, Sequence

from .curve_config import Curve, CurveConfig
from .errors import (
    AmbientMismatchError,
    EnumerationLimitError,
    QhdError,
    SingularLatticeError,
)
from .lattice import IntersectionLattice, _as_rows, intersection_matrix

DEFAULT_SUBGROUP_LIMIT = 10**6


def subgroup_limit() -> int:
    """Enumeration bound on |D|; override with QHD_SUBGROUP_LIMIT."""
    raw = os.environ.get("QHD_SUBGROUP_LIMIT")
    if raw is None:
        return DEFAULT_SUBGROUP_LIMIT
    try:
        return int(raw)
    except ValueError:
        raise QhdError(f"QHD_SUBGROUP_LIMIT must be an integer, got {raw!r}") from None


# ---------------------------------------------------------------------------
# Smith normal form


def smith_normal_form(matrix) -> tuple[list[list[int]], list[list[int]], list[list[int]]]:
    """Return unimodular U, V and diagonal D with U A V = D.

    Diagonal entries are non-negative and form a divisibility chain
    d_1 | d_2 | ... (zeros, if any, come last).
    """
    S = _as_rows(matrix)
    m = len(S)
    n = len(S[0]) if m else 0
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i, j):
        S[i], S[j] = S[j], S[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in S:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, factor):
        S[dst] = [a + factor * b for a, b in zip(S[dst], S[src])]
        U[dst] = [a + factor * b for a, b in zip(U[dst], U[src])]

    def add_col(dst, src, factor):
        for row in S:
            row[dst] += factor * row[src]
        for row in V:
            row[dst] += factor * row[src]

    t = 0
    while t < min(m, n):
        # move a smallest nonzero entry of the remaining block to (t, t)
        best = None
        for i in range(t, m):
            for j in range(t, n):
                if S[i][j] != 0 and (best is None or abs(S[i][j]) < abs(S[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])
        while True:
            # clear column t
            dirty = False
            for i in range(t + 1, m):
                if S[i][t] != 0:
                    quotient = S[i][t] // S[t][t]
                    add_row(i, t, -quotient)
                    if S[i][t] != 0:
                        swap_rows(t, i)
                        dirty = True
            if dirty:
                continue
            # clear row t
            for j in range(t + 1, n):
                if S[t][j] != 0:
                    quotient = S[t][j] // S[t][t]
                    add_col(j, t, -quotient)
                    if S[t][j] != 0:
                        swap_cols(t, j)
                        dirty = True
            if dirty:
                continue
            # pivot must divide every remaining entry for the chain to hold
            offender = None
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if S[i][j] % S[t][t] != 0:
                        offender = i
                        break
                if offender is not None:
                    break
            if offender is None:
                break
            add_row(t, offender, 1)
        t += 1
    for i in range(min(m, n)):
        if S[i][i] < 0:
            S[i] = [-v for v in S[i]]
            U[i] = [-v for v in U[i]]
    return U, S, V


# ---------------------------------------------------------------------------
# groups and subgroups


@dataclass(frozen=True)
class FiniteAbelianGroup:
    """A finite abelian group as a divisibility chain of invariant factors."""

    invariant_factors: tuple[int, ...]

    def __post_init__(self) -> None:
        factors = self.invariant_factors
        if any(d <= 1 for d in factors):
            raise QhdError(f"invariant factors must exceed 1, got {factors}")
        if any(factors[i + 1] % factors[i] for i in range(len(factors) - 1)):
            raise QhdError(f"invariant factors must form a divisibility chain, got {factors}")

    @property
    def order(self) -> int:
        out = 1
        for d in self.invariant_factors:
            out *= d
        return out

    @property
    def identity(self) -> tuple[int, ...]:
        return (0,) * len(self.invariant_factors)

    def add(self, x: tuple[int, ...], y: tuple[int, ...]) -> tuple[int, ...]:
        return tuple((a + b) % d for a, b, d in zip(x, y, self.invariant_factors))

    def neg(self, x: tuple[int, ...]) -> tuple[int, ...]:
        return tuple((-a) % d for a, d in zip(x, self.invariant_factors))

    def scale(self, n: int, x: tuple[int, ...]) -> tuple[int, ...]:
        return tuple((n * a) % d for a, d in zip(x, self.invariant_factors))

    def elements(self) -> Iterable[tuple[int, ...]]:
        return itertools.product(*(range(d) for d in self.invariant_factors))


def closure(group: FiniteAbelianGroup, generators: Iterable[tuple[int, ...]]) -> frozenset:
    """The subgroup generated by the given elements, as an element set."""
    elements = {group.identity}
    for g in generators:
        if g in elements:
            continue
        shift = g
        cosets = list(elements)
        while shift not in elements:
            elements.update(group.add(x, shift) for x in cosets)
            shift = group.add(shift, g)
    return frozenset(elements)


def _generating_set(group: FiniteAbelianGroup, elements: frozenset) -> tuple[tuple[int, ...], ...]:
    """A small deterministic generating set for a subgroup given as a set."""
    gens: list[tuple[int, ...]] = []
    span: frozenset = frozenset({group.identity})
    for x in sorted(elements):
        if x not in span:
            gens.append(x)
            span = closure(group, gens)
            if len(span) == len(elements):
                break
    return tuple(gens)


@dataclass(frozen=True)
class Subgroup:
    """A subgroup in invariant-factor coordinates of its ambient group."""

    factors: tuple[int, ...]
    generators: tuple[tuple[int, ...], ...]
    order: int

    @cached_property
    def _group(self) -> FiniteAbelianGroup:
        return FiniteAbelianGroup(self.factors)

    @cached_property
    def elements(self) -> frozenset:
        out = closure(self._group, self.generators)
        if len(out) != self.order:
            raise QhdError(
                f"subgroup order mismatch: generators span {len(out)}, declared {self.order}"
            )
        return out

    @staticmethod
    def from_elements(group: FiniteAbelianGroup, elements: frozenset) -> "Subgroup":
        return Subgroup(
            group.invariant_factors,
            _generating_set(group, elements),
            len(elements),
        )

    def same_subgroup(self, other: "Subgroup") -> bool:
        if self.factors != other.factors:
            raise AmbientMismatchError(
                f"subgroups live in different ambient groups: {self.factors} vs {other.factors}"
            )
        return self.elements == other.elements


def _prime_factorisation(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def _p_subgroups_of_order(
    group: FiniteAbelianGroup, p: int, exponent: int
) -> list[frozenset]:
    """All subgroups of order p**exponent inside the Sylow p-subgroup.

    Level-by-level search in Sylow coordinates: a subgroup of order
    p^(j+1) is generated by any of its index-p subgroups H plus one
    element g with p*g in H, so the extension candidates are exactly
    the multiplication-by-p preimages of H.
    """
    factors = group.invariant_factors
    exps = []
    for d in factors:
        e = 0
        while d % p == 0:
            d //= p
            e += 1
        exps.append(e)
    mods = tuple(p**e for e in exps)
    steps = tuple(d // m for d, m in zip(factors, mods))
    identity = (0,) * len(mods)

    def padd(x, y):
        return tuple((a + b) % m for a, b, m in zip(x, y, mods))

    def preimages(h):
        axes = []
        for hi, m in zip(h, mods):
            if m == 1:
                axes.append((0,))
                continue
            if hi % p:
                return None
            half = m // p
            axes.append(tuple((hi // p + t * half) % m for t in range(p)))
        return itertools.product(*axes)

    level: set[frozenset] = {frozenset({identity})}
    for j in range(1, exponent + 1):
        target = p**j
        nxt: set[frozenset] = set()
        for H in level:
            members = list(H)
            candidates: set = set()
            for h in H:
                pre = preimages(h)
                if pre is not None:
                    candidates.update(pre)
            for g in candidates - H:
                extended = set(H)
                shift = g
                while shift not in H:
                    extended.update(padd(x, shift) for x in members)
                    shift = padd(shift, g)
                if len(extended) == target:
                    nxt.add(frozenset(extended))
        level = nxt
        if not level:
            break
    # back into ambient coordinates
    return [
        frozenset(
            tuple((t * s) % d for t, s, d in zip(x, steps, factors)) for x in H
        )
        for H in sorted(level, key=sorted)
    ]


def enumerate_subgroups(G: FiniteAbelianGroup, order: int) -> list[Subgroup]:
    """Complete duplicate-free list of subgroups of the given order."""
    if order <= 0 or G.order % order != 0:
        raise QhdError(f"order {order} does not divide |G| = {G.order}")
    limit = subgroup_limit()
    if G.order > limit:
        raise EnumerationLimitError(
            f"|G| = {G.order} exceeds the enumeration limit {limit}"
        )
    wanted = _prime_factorisation(order)
    per_prime: list[list[frozenset]] = []
    for p, a in wanted.items():
        subs = _p_subgroups_of_order(G, p, a)
        if not subs:
            return []
        per_prime.append(subs)
    results = []
    for combo in itertools.product(*per_prime) if per_prime else [()]:
        elements = frozenset({G.identity})
        for part in combo:
            elements = frozenset(G.add(x, y) for x in elements for y in part)
        results.append(Subgroup.from_elements(G, elements))
    results.sort(key=lambda H: sorted(H.elements))
    return results


# ---------------------------------------------------------------------------
# discriminant forms


@dataclass(frozen=True)
class DiscriminantForm:
    """The group L*/L with its pairing data.

    ``lift`` holds one rational representative in L (x) Q for each
    generator; ``gram`` is the pairing of generator lifts reduced
    mod 1 into [0, 1).  The private SNF data converts arbitrary dual
    vectors into invariant-factor coordinates.
    """

    group: FiniteAbelianGroup
    gram: tuple[tuple[Fraction, ...], ...]
    lift: tuple[tuple[Fraction, ...], ...]
    matrix: tuple[tuple[int, ...], ...]
    _u: tuple[tuple[int, ...], ...]
    _positions: tuple[int, ...]
    _diagonal: tuple[int, ...]

    def pairing(self, x: tuple[int, ...], y: tuple[int, ...]) -> Fraction:
        """The Q/Z pairing of two elements, reduced into [0, 1)."""
        total = Fraction(0)
        for i, xi in enumerate(x):
            if xi:
                for j, yj in enumerate(y):
                    if yj:
                        total += xi * yj * self.gram[i][j]
        return total % 1

    def element_from_dual(self, v: Sequence[int]) -> tuple[int, ...]:
        """Class of the dual-lattice vector with integral pairings v against the basis."""
        w = [sum(int(uij) * int(vj) for uij, vj in zip(row, v)) for row in self._u]
        return tuple(
            w[pos] % d for pos, d in zip(self._positions, self.group.invariant_factors)
        )

    def self_pairing(self, x: tuple[int, ...]) -> Fraction:
        return self.pairing(x, x)


def discriminant_form(L) -> DiscriminantForm:
    """The discriminant group of a nonsingular lattice, with pairing data."""
    rows = _as_rows(L)
    n = len(rows)
    U, D, V = smith_normal_form(rows)
    diagonal = [D[i][i] for i in range(n)]
    if any(d == 0 for d in diagonal):
        raise SingularLatticeError("lattice is singular; discriminant group undefined")
    positions = tuple(i for i, d in enumerate(diagonal) if d > 1)
    factors = tuple(diagonal[i] for i in positions)
    group = FiniteAbelianGroup(factors)
    # generator i lifts to column `positions[i]` of V divided by its factor
    lifts = tuple(
        tuple(Fraction(V[row][pos], diagonal[pos]) for row in range(n))
        for pos in positions
    )
    gram = tuple(
        tuple(
            sum(
                li * rows[a][b] * lj
                for a, li in enumerate(lift_i)
                for b, lj in enumerate(lift_j)
                if li and lj
            )
            % 1
            for lift_j in lifts
        )
        for lift_i in lifts
    )
    return DiscriminantForm(
        group,
        gram,
        lifts,
        tuple(tuple(r) for r in rows),
        tuple(tuple(r) for r in U),
        positions,
        tuple(diagonal),
    )


def self_isotropic_subgroups(F: DiscriminantForm) -> list[Subgroup]:
    """All subgroups equal to their own orthogonal complement.

    Such a subgroup has order sqrt|D|, so only subgroups of that order
    are enumerated; isotropy of the generators suffices because the
    pairing is bilinear, and non-degeneracy forces |H^perp| = |D|/|H|.
    """
    order = F.group.order
    root = isqrt(order)
    if root * root != order:
        return []
    out = []
    for H in enumerate_subgroups(F.group, root):
        gens = H.generators or (F.group.identity,)
        if all(F.pairing(g, h) == 0 for g in gens for h in gens):
            out.append(H)
    return out


def orthogonal_complement(F: DiscriminantForm, H: Subgroup) -> frozenset:
    """Explicit perp of a subgroup, by scanning the whole group."""
    gens = H.generators or (F.group.identity,)
    return frozenset(
        x for x in F.group.elements() if all(F.pairing(x, g) == 0 for g in gens)
    )


def is_basic(H: Subgroup, basics: Sequence[Subgroup]) -> bool:
    """Whether H equals (as a subgroup, not a generator list) a member of basics."""
    return any(H.same_subgroup(B) for B in basics)


# ---------------------------------------------------------------------------
# the subgroup attached to a plane model


def _strip_extras(config: CurveConfig) -> CurveConfig:
    kept = tuple(
        c for c in config.curves if not (c.label or "").startswith("extra")
    )
    ids = {c.id for c in kept}
    points = tuple(p for p in config.points if set(p.incident) <= ids)
    marks = tuple(m for m in config.marks if m.curve in ids)
    return CurveConfig(kept, points, marks)


def model_subgroup(
    record,
    form: DiscriminantForm | None = None,
    gamma: CurveConfig | None = None,
) -> Subgroup:
    """The self-isotropic subgroup cut out by a successful blow-down record.

    The record's tracked classes express every curve in the unimodular
    basis (line class, exceptional classes); the image of that lattice
    inside D of the stripped configuration is returned in
    invariant-factor coordinates.  Inconsistencies are hard failures.
    """
    if record.pic_basis is None:
        raise QhdError("record lacks Pic tracking (not a verified plane model)")
    if gamma is None:
        gamma = _strip_extras(record.initial)
    L = intersection_matrix(gamma)
    if form is None:
        form = discriminant_form(L)
    ordering = L.ordering
    rank = len(record.steps) + 1
    if len(ordering) != rank:
        raise QhdError(
            f"lattice rank {len(ordering)} does not match Pic rank {rank}"
        )
    columns = []
    for cid in ordering:
        if cid not in record.pic_basis:
            raise QhdError(f"record lacks a Pic class for curve {cid}")
        columns.append(record.pic_basis[cid])
    # Gram check in the signature (1, B) form
    sig = [1] + [-1] * (rank - 1)
    for i, ci in enumerate(columns):
        for j, cj in enumerate(columns):
            value = sum(s * a * b for s, a, b in zip(sig, ci, cj))
            if value != L.matrix[i][j]:
                raise QhdError(
                    "tracked classes do not reproduce the intersection form "
                    f"at pair ({ordering[i]}, {ordering[j]})"
                )
    generators = []
    for g in range(rank):
        dual = [sig[g] * col[g] for col in columns]
        generators.append(form.element_from_dual(dual))
    elements = closure(form.group, generators)
    root = isqrt(form.group.order)
    if len(elements) != root:
        raise QhdError(
            f"model subgroup has order {len(elements)}, expected sqrt|D| = {root}"
        )
    H = Subgroup.from_elements(form.group, elements)
    gens = H.generators or (form.group.identity,)
    if any(form.pairing(a, b) != 0 for a in gens for b in gens):
        raise QhdError("model subgroup is not self-isotropic")
    return H
