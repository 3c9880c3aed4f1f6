"""Exact rational linear algebra on intersection lattices.

Everything here is computed over arbitrary-precision integers and
rationals; there is no floating point anywhere.  Definiteness tests and
the anticanonical identity are exact statements, and a tolerance would
mask errors.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

from .curve_config import CurveConfig, cf_evaluate
from .errors import NotStarShapedError, SingularLatticeError

Rows = Sequence[Sequence[int]]


@dataclass(frozen=True)
class IntersectionLattice:
    """Symmetric integer intersection matrix over an explicit id ordering."""

    matrix: tuple[tuple[int, ...], ...]
    ordering: tuple[int, ...]

    @cached_property
    def index(self) -> dict[int, int]:
        return {cid: i for i, cid in enumerate(self.ordering)}


@dataclass(frozen=True)
class Cycle:
    """A rational cycle: coefficients indexed like the parent lattice ordering."""

    coefficients: tuple[Fraction, ...]


@dataclass(frozen=True)
class StarShape:
    """A star-shaped configuration: central curve plus chains read outward."""

    central: int
    arms: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class CanonicalData:
    k: tuple[Fraction, ...]
    e: Fraction
    chi: Fraction
    beta: Fraction


@dataclass(frozen=True)
class BoundsReport:
    """Exact bound checks on (e, chi, beta) and the adjunction coefficients."""

    e: Fraction
    chi: Fraction
    beta: Fraction
    k: tuple[Fraction, ...]
    central: int
    ordering: tuple[int, ...]
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def beta_zero(self) -> bool:
        return self.beta == 0

    @property
    def k_minus_one_ids(self) -> tuple[int, ...]:
        return tuple(cid for cid, ki in zip(self.ordering, self.k) if ki == -1)


# ---------------------------------------------------------------------------
# core exact solvers


def _as_rows(matrix) -> list[list[int]]:
    if isinstance(matrix, IntersectionLattice):
        matrix = matrix.matrix
    return [list(row) for row in matrix]


def det_direct(matrix) -> int:
    """Exact determinant by Bareiss fraction-free elimination."""
    a = _as_rows(matrix)
    n = len(a)
    if n == 0:
        return 1
    if any(len(row) != n for row in a):
        raise ValueError("matrix must be square")
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            pivot = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if pivot is None:
                return 0
            a[k], a[pivot] = a[pivot], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[-1][-1]


def solve_exact(matrix, rhs: Sequence[Fraction | int]) -> list[Fraction]:
    """Solve M x = rhs exactly; raises SingularLatticeError if singular."""
    a = [[Fraction(v) for v in row] for row in _as_rows(matrix)]
    n = len(a)
    x = [Fraction(v) for v in rhs]
    if len(x) != n:
        raise ValueError("dimension mismatch")
    for col in range(n):
        pivot = next((i for i in range(col, n) if a[i][col] != 0), None)
        if pivot is None:
            raise SingularLatticeError("matrix is singular")
        a[col], a[pivot] = a[pivot], a[col]
        x[col], x[pivot] = x[pivot], x[col]
        inv = 1 / a[col][col]
        a[col] = [v * inv for v in a[col]]
        x[col] *= inv
        for i in range(n):
            if i != col and a[i][col] != 0:
                factor = a[i][col]
                a[i] = [u - factor * v for u, v in zip(a[i], a[col])]
                x[i] -= factor * x[col]
    return x


def invert_exact(matrix) -> list[list[Fraction]]:
    """Exact inverse via Gauss-Jordan; raises SingularLatticeError if singular."""
    a = [[Fraction(v) for v in row] for row in _as_rows(matrix)]
    n = len(a)
    inv = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for col in range(n):
        pivot = next((i for i in range(col, n) if a[i][col] != 0), None)
        if pivot is None:
            raise SingularLatticeError("matrix is singular")
        a[col], a[pivot] = a[pivot], a[col]
        inv[col], inv[pivot] = inv[pivot], inv[col]
        scale = 1 / a[col][col]
        a[col] = [v * scale for v in a[col]]
        inv[col] = [v * scale for v in inv[col]]
        for i in range(n):
            if i != col and a[i][col] != 0:
                factor = a[i][col]
                a[i] = [u - factor * v for u, v in zip(a[i], a[col])]
                inv[i] = [u - factor * v for u, v in zip(inv[i], inv[col])]
    return inv


# ---------------------------------------------------------------------------
# lattice assembly and star structure


def intersection_matrix(config: CurveConfig) -> IntersectionLattice:
    """Assemble the symmetric intersection matrix over sorted curve ids."""
    ordering = tuple(sorted(config.curve_ids))
    pair_totals: dict[tuple[int, int], int] = {}
    for p in config.points:
        inc = p.incident
        for i in range(len(inc)):
            for j in range(i + 1, len(inc)):
                a, b = inc[i], inc[j]
                key = (min(a, b), max(a, b))
                pair_totals[key] = pair_totals.get(key, 0) + p.mult(a, b)
    n = len(ordering)
    index = {cid: i for i, cid in enumerate(ordering)}
    rows = [[0] * n for _ in range(n)]
    for cid in ordering:
        rows[index[cid]][index[cid]] = config.curve(cid).self_int
    for (a, b), m in pair_totals.items():
        if a in index and b in index:
            rows[index[a]][index[b]] = m
            rows[index[b]][index[a]] = m
    return IntersectionLattice(tuple(tuple(r) for r in rows), ordering)


def star_shape(config: CurveConfig) -> StarShape:
    """Detect the central curve and arms of a star-shaped configuration.

    Requires normal crossings (every point joins exactly two curves
    transversally), a connected graph, a unique curve of valency >= 3
    and simple chains elsewhere.
    """
    for p in config.points:
        if len(p.incident) != 2 or any(m != 1 for _, _, m in p.mults):
            raise NotStarShapedError(
                f"point {p.id} is not a transversal double point"
            )
    valency = {cid: len(config.neighbors(cid)) for cid in config.curve_ids}
    hubs = [cid for cid, v in valency.items() if v >= 3]
    if len(hubs) != 1:
        raise NotStarShapedError(f"expected a unique curve of valency >= 3, found {hubs}")
    central = hubs[0]
    arms = []
    seen = {central}
    for first in config.neighbors(central):
        arm = []
        prev, cur = central, first
        while True:
            if cur in seen:
                raise NotStarShapedError("configuration contains a cycle")
            seen.add(cur)
            arm.append(cur)
            nxt = [c for c in config.neighbors(cur) if c != prev]
            if not nxt:
                break
            if len(nxt) > 1:
                raise NotStarShapedError(f"curve {cur} branches inside an arm")
            prev, cur = cur, nxt[0]
        arms.append(tuple(arm))
    if len(seen) != len(config.curve_ids):
        raise NotStarShapedError("configuration is not connected")
    return StarShape(central, tuple(arms))


def _arm_fraction(config: CurveConfig, arm: Sequence[int]) -> tuple[int, int]:
    """The (n, q) pair of one arm, read outward from the central curve."""
    weights = [-config.curve(cid).self_int for cid in arm]
    if any(w < 2 for w in weights):
        raise NotStarShapedError(
            f"arm {tuple(arm)} carries a curve of self-intersection > -2"
        )
    return cf_evaluate(weights)


def det_via_formula(config: CurveConfig) -> int:
    """|det| from the star data: |n1 ... nt (d - sum q_i/n_i)|.

    The sign is a convention and is fixed by det_direct instead; the two
    agree in absolute value.
    """
    star = star_shape(config)
    d = -config.curve(star.central).self_int
    value = Fraction(d)
    product = 1
    for arm in star.arms:
        n, q = _arm_fraction(config, arm)
        value -= Fraction(q, n)
        product *= n
    return abs(int(product * value))


def canonical_coefficients(L: IntersectionLattice) -> tuple[Fraction, ...]:
    """Solve the adjunction system K.E_i + E_i.E_i = -2 for K = sum k_i E_i."""
    rhs = [-2 - L.matrix[i][i] for i in range(len(L.ordering))]
    return tuple(solve_exact(L.matrix, rhs))


def star_invariants(config: CurveConfig) -> tuple[Fraction, Fraction, Fraction]:
    """The exact invariants (e, chi, beta) of a star-shaped configuration."""
    star = star_shape(config)
    d = -config.curve(star.central).self_int
    fractions = [_arm_fraction(config, arm) for arm in star.arms]
    e = Fraction(d) - sum(Fraction(q, n) for n, q in fractions)
    chi = Fraction(len(star.arms) - 2) - sum(Fraction(1, n) for n, _ in fractions)
    if e == 0:
        raise SingularLatticeError("star invariant e vanishes; beta undefined")
    return e, chi, chi / e


def chain_dual_cycles(chain: Sequence[int]) -> list[Cycle]:
    """Dual cycles e_1..e_s of a chain of self-intersections: M e_i = -delta_i."""
    s = len(chain)
    rows = [[0] * s for _ in range(s)]
    for i in range(s):
        rows[i][i] = chain[i]
        if i + 1 < s:
            rows[i][i + 1] = 1
            rows[i + 1][i] = 1
    inv = invert_exact(rows)
    # columns of -M^{-1}; the chain form is negative definite so these
    # have strictly positive coefficients
    return [Cycle(tuple(-inv[j][i] for j in range(s))) for i in range(s)]


@dataclass(frozen=True)
class AnticanonicalDecomposition:
    """Both sides of -(K + E) = sum_k Y_k + beta * E_0, computed independently."""

    beta: Fraction
    y_cycles: tuple[Cycle, ...]
    lhs: tuple[Fraction, ...]
    rhs: tuple[Fraction, ...]
    ordering: tuple[int, ...]

    @property
    def identity_holds(self) -> bool:
        return self.lhs == self.rhs


def anticanonical_decomposition(config: CurveConfig) -> AnticanonicalDecomposition:
    """Assemble the per-arm cycles Y_k = beta*e_1 - e_s and check the identity.

    The left side comes from the adjunction solution, the right side from
    the dual cycles of each arm; agreement is exact rational equality.
    """
    star = star_shape(config)
    L = intersection_matrix(config)
    k = canonical_coefficients(L)
    _, _, beta = star_invariants(config)
    n = len(L.ordering)
    rhs = [Fraction(0)] * n
    rhs[L.index[star.central]] += beta
    y_cycles = []
    for arm in star.arms:
        duals = chain_dual_cycles([config.curve(cid).self_int for cid in arm])
        first, last = duals[0], duals[-1]
        y = [Fraction(0)] * n
        for cid, c_first, c_last in zip(arm, first.coefficients, last.coefficients):
            y[L.index[cid]] = beta * c_first - c_last
        y_cycles.append(Cycle(tuple(y)))
        for i in range(n):
            rhs[i] += y_cycles[-1].coefficients[i]
    lhs = tuple(-ki - 1 for ki in k)
    return AnticanonicalDecomposition(beta, tuple(y_cycles), lhs, tuple(rhs), L.ordering)


def is_negative_definite(L) -> bool:
    """Exact Sylvester test: leading principal minors alternate, starting negative."""
    rows = _as_rows(L)
    n = len(rows)
    for k in range(1, n + 1):
        minor = det_direct([row[:k] for row in rows[:k]])
        if minor == 0 or (minor > 0) != (k % 2 == 0):
            return False
    return True


def verify_bounds(config: CurveConfig) -> BoundsReport:
    """Check chi >= 0, e < 0, -1 < beta <= 0 and -1 <= k_i < 0 exactly.

    Equality k_i = -1 is tolerated only at the central curve and only
    when beta = 0 (the log-canonical situation); everything else is
    reported as a violation.
    """
    star = star_shape(config)
    L = intersection_matrix(config)
    e, chi, beta = star_invariants(config)
    k = canonical_coefficients(L)
    violations = []
    if chi < 0:
        violations.append(f"chi = {chi} < 0")
    if e >= 0:
        violations.append(f"e = {e} >= 0")
    if not (-1 < beta <= 0):
        violations.append(f"beta = {beta} outside (-1, 0]")
    for cid, ki in zip(L.ordering, k):
        if not (-1 <= ki < 0):
            violations.append(f"k[{cid}] = {ki} outside [-1, 0)")
        elif ki == -1:
            if cid != star.central:
                violations.append(f"k[{cid}] = -1 away from the central curve")
            elif beta != 0:
                violations.append(f"k[{cid}] = -1 but beta = {beta} != 0")
    return BoundsReport(e, chi, beta, k, star.central, L.ordering, tuple(violations))


def solve_class(L: IntersectionLattice, v: Sequence[int]) -> tuple[tuple[Fraction, ...], Fraction]:
    """Solve M c = v exactly; returns (c, self-pairing c^T M c = c^T v)."""
    c = solve_exact(L.matrix, list(v))
    pairing = sum(ci * Fraction(vi) for ci, vi in zip(c, v))
    return tuple(c), pairing
