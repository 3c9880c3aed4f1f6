import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from helpers import brute_subgroups, chain_config, det_cofactor, minor_gcd_diagonal
from qhd.curve_config import FamilyParams, make_family
from qhd.discriminant import (
    DiscriminantForm,
    FiniteAbelianGroup,
    Subgroup,
    closure,
    discriminant_form,
    enumerate_subgroups,
    is_basic,
    model_subgroup,
    orthogonal_complement,
    self_isotropic_subgroups,
    smith_normal_form,
)
from qhd.errors import (
    AmbientMismatchError,
    EnumerationLimitError,
    QhdError,
    SingularLatticeError,
)
from qhd.lattice import det_direct, intersection_matrix

F = Fraction


def matmul(A, B):
    return [[sum(a * b for a, b in zip(row, col)) for col in zip(*B)] for row in A]


def assert_valid_snf(A):
    U, D, V = smith_normal_form(A)
    assert matmul(matmul(U, [list(r) for r in A]), V) == D
    assert abs(det_direct(U)) == 1
    assert abs(det_direct(V)) == 1
    diag = [D[i][i] for i in range(min(len(D), len(D[0])))]
    for i in range(len(diag) - 1):
        if diag[i + 1] != 0:
            assert diag[i] != 0 and diag[i + 1] % diag[i] == 0
    assert all(d >= 0 for d in diag)
    return diag


# ---------------------------------------------------------------------------
# Smith normal form


def test_snf_diag_2_3():
    assert assert_valid_snf([[2, 0], [0, 3]]) == [1, 6]


def test_snf_minus_two():
    assert assert_valid_snf([[-2]]) == [2]


def test_snf_a3_chain():
    a3 = [list(r) for r in intersection_matrix(chain_config([-2, -2, -2])).matrix]
    diag = assert_valid_snf(a3)
    assert diag == [1, 1, 4]
    assert diag == minor_gcd_diagonal(a3)


def test_snf_singular_matrix():
    diag = assert_valid_snf([[2, 4], [1, 2]])
    assert diag == [1, 0]


@settings(max_examples=120)
@given(
    st.integers(1, 4).flatmap(
        lambda n: st.lists(
            st.lists(st.integers(-8, 8), min_size=n, max_size=n),
            min_size=n,
            max_size=n,
        )
    )
)
def test_snf_random_matches_minor_gcd_oracle(rows):
    diag = assert_valid_snf(rows)
    assert diag == minor_gcd_diagonal(rows)


# ---------------------------------------------------------------------------
# discriminant forms


def test_trivial_form_for_unimodular():
    form = discriminant_form([[-1]])
    assert form.group.invariant_factors == ()
    assert form.group.order == 1


def test_form_minus_two():
    form = discriminant_form([[-2]])
    assert form.group.invariant_factors == (2,)
    assert form.gram == ((F(1, 2),),)


def test_form_order_equals_det():
    for family in "WNM":
        cfg = make_family(FamilyParams(family, 1, 2, 0))
        L = intersection_matrix(cfg)
        assert discriminant_form(L).group.order == abs(det_direct(L))


def test_w000_form_order_81():
    L = intersection_matrix(make_family(FamilyParams("W", 0, 0, 0)))
    assert discriminant_form(L).group.order == 81


def test_form_rejects_singular():
    with pytest.raises(SingularLatticeError):
        discriminant_form([[2, 4], [1, 2]])


def test_pairing_well_defined_under_lift_perturbation():
    rng = random.Random(7)
    L = intersection_matrix(make_family(FamilyParams("N", 1, 0, 1)))
    form = discriminant_form(L)
    rows = form.matrix
    n = len(rows)
    for li in form.lift:
        for lj in form.lift:
            base = sum(
                a * rows[x][y] * b
                for x, a in enumerate(li)
                for y, b in enumerate(lj)
            ) % 1
            for _ in range(5):
                z = [rng.randint(-3, 3) for _ in range(n)]
                shifted = [a + zi for a, zi in zip(li, z)]
                moved = sum(
                    a * rows[x][y] * b
                    for x, a in enumerate(shifted)
                    for y, b in enumerate(lj)
                ) % 1
                assert moved == base


def test_lifts_pair_integrally_with_the_lattice():
    # lift vectors lie in the dual lattice: integer pairing with every basis vector
    L = intersection_matrix(make_family(FamilyParams("M", 0, 1, 0)))
    form = discriminant_form(L)
    for lift in form.lift:
        for row in form.matrix:
            value = sum(a * m for a, m in zip(lift, row))
            assert value.denominator == 1


# ---------------------------------------------------------------------------
# subgroup enumeration


def test_enumerate_subgroups_examples():
    assert len(enumerate_subgroups(FiniteAbelianGroup((4,)), 2)) == 1
    assert len(enumerate_subgroups(FiniteAbelianGroup((2, 2)), 2)) == 3
    assert len(enumerate_subgroups(FiniteAbelianGroup((9,)), 3)) == 1


@pytest.mark.parametrize(
    "factors, order",
    [((4,), 2), ((2, 2), 2), ((9,), 3), ((2, 4), 4), ((12,), 6), ((2, 2, 2), 4), ((3, 9), 9)],
)
def test_enumerate_subgroups_complete_vs_brute_force(factors, order):
    G = FiniteAbelianGroup(factors)
    got = {H.elements for H in enumerate_subgroups(G, order)}
    assert got == brute_subgroups(G, order)


def test_enumerate_subgroups_rejects_non_divisor():
    with pytest.raises(QhdError):
        enumerate_subgroups(FiniteAbelianGroup((4,)), 3)


def test_enumeration_limit(monkeypatch):
    monkeypatch.setenv("QHD_SUBGROUP_LIMIT", "10")
    with pytest.raises(EnumerationLimitError):
        enumerate_subgroups(FiniteAbelianGroup((16,)), 4)


def test_subgroup_equality_by_elements():
    G = FiniteAbelianGroup((4,))
    a = Subgroup((4,), ((2,),), 2)
    b = Subgroup((4,), ((2,),), 2)
    assert a.same_subgroup(b)
    trivial = Subgroup((4,), (), 1)
    assert not trivial.same_subgroup(a)


def test_is_basic():
    basics = [Subgroup((4,), ((2,),), 2)]
    assert is_basic(Subgroup((4,), ((2,),), 2), basics)
    assert not is_basic(Subgroup((4,), (), 1), basics)
    with pytest.raises(AmbientMismatchError):
        is_basic(Subgroup((9,), ((3,),), 3), basics)


# ---------------------------------------------------------------------------
# self-isotropic subgroups


def test_a3_self_isotropic():
    form = discriminant_form(intersection_matrix(chain_config([-2, -2, -2])))
    assert form.group.invariant_factors == (4,)
    # generator self-pairing is -3/4 mod 1
    assert form.gram[0][0] == F(1, 4)
    subs = self_isotropic_subgroups(form)
    assert len(subs) == 1
    assert sorted(subs[0].elements) == [(0,), (2,)]
    # brute-force oracle over all order-2 subgroups
    brute = [
        H
        for H in brute_subgroups(form.group, 2)
        if all(form.pairing(g, h) == 0 for g in H for h in H)
    ]
    assert len(brute) == 1 and brute[0] == subs[0].elements


def test_trivial_group_self_isotropic():
    form = discriminant_form([[-1]])
    subs = self_isotropic_subgroups(form)
    assert len(subs) == 1 and subs[0].order == 1


def test_non_square_order_gives_nothing():
    form = discriminant_form([[-2]])
    assert self_isotropic_subgroups(form) == []


def test_w000_self_isotropic_subgroups():
    form = discriminant_form(intersection_matrix(make_family(FamilyParams("W", 0, 0, 0))))
    subs = self_isotropic_subgroups(form)
    assert subs and all(H.order == 9 for H in subs)
    for H in subs:
        assert orthogonal_complement(form, H) == H.elements


def test_self_isotropic_equals_own_perp_on_families():
    for family, p, q, r in [("N", 1, 0, 0), ("M", 0, 0, 1)]:
        form = discriminant_form(
            intersection_matrix(make_family(FamilyParams(family, p, q, r)))
        )
        for H in self_isotropic_subgroups(form):
            assert H.order**2 == form.group.order
            assert orthogonal_complement(form, H) == H.elements


# ---------------------------------------------------------------------------
# model subgroups


def w000_verified():
    from qhd.search import enumerate_placements, verify_placement

    gamma = make_family(FamilyParams("W", 0, 0, 0))
    out = [
        verify_placement(gamma, pl) for pl in enumerate_placements(gamma, 3)
    ]
    return gamma, [pl for pl in out if pl.verified is not None]


def test_model_subgroup_w000():
    gamma, verified = w000_verified()
    assert len(verified) == 2
    form = discriminant_form(intersection_matrix(gamma))
    subs = [model_subgroup(pl.verified, form=form, gamma=gamma) for pl in verified]
    assert all(H.order == 9 for H in subs)
    assert not subs[0].same_subgroup(subs[1])
    enumerated = self_isotropic_subgroups(form)
    for H in subs:
        assert is_basic(H, enumerated)


def test_model_subgroup_unique_for_w100():
    from qhd.search import enumerate_placements, verify_placement

    gamma = make_family(FamilyParams("W", 1, 0, 0))
    verified = [
        pl
        for pl in (verify_placement(gamma, p) for p in enumerate_placements(gamma, 3))
        if pl.verified is not None
    ]
    assert len(verified) == 1
    H = model_subgroup(verified[0].verified)
    form = discriminant_form(intersection_matrix(gamma))
    assert H.order**2 == form.group.order
    assert is_basic(H, self_isotropic_subgroups(form))


def test_model_subgroup_requires_pic():
    from qhd.birational import BlowDownRecord

    gamma = make_family(FamilyParams("W", 0, 0, 0))
    record = BlowDownRecord((), None, gamma, gamma)
    with pytest.raises(QhdError):
        model_subgroup(record)


def test_closure_helper():
    G = FiniteAbelianGroup((6,))
    assert closure(G, [(2,)]) == frozenset({(0,), (2,), (4,)})
    assert closure(G, []) == frozenset({(0,)})
