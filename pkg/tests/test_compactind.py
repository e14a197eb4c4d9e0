import random

import numpy as np
import pytest

from gl2borel.compactind import (
    BallIndex,
    CindElement,
    HeckeIdeal,
    QuotientElement,
    TruncationError,
    act,
    ball_vertices,
    hecke_T,
    i1_fixed_ball,
    i1_generators,
    ideal_matrix,
    one_mod_p_unit_gens,
    phi_element,
    quotient_membership,
    sphere_size,
)
from gl2borel.exactfield import kernel_codes
from gl2borel.fqweights import Weight
from gl2borel.padicmat import (
    Mat2,
    diag,
    lower_u,
    pi_mat,
    random_group_word,
    s_mat,
    t_mat,
    upper_u,
)


@pytest.mark.parametrize("p", [2, 3, 5])
def test_ball_enumeration_counts(p):
    for R in range(4):
        vs = ball_vertices(p, R)
        assert len(vs) == sum(sphere_size(p, n) for n in range(R + 1))
        assert len(set(vs)) == len(vs)
        assert all(v.distance() <= R for v in vs)


def test_phi_and_basic_action():
    p = 3
    w = Weight(p, 1, 0)
    phi = phi_element(w)
    assert phi.radius() == 0
    assert act(Mat2.identity(p), phi) == phi
    # central p-powers act trivially
    assert act(diag(p, p, p), phi) == phi
    assert act(diag(p, p * p, p * p), phi) == phi
    # K stabilizes the base coset and acts through the weight
    kphi = act(s_mat(p), phi)
    (vert, coeffs), = kphi.support.items()
    assert vert.distance() == 0
    assert [c.code for c in coeffs] == [0, 1]  # x -> y under the swap


def test_action_composition_random():
    p = 3
    w = Weight(p, 1, 1)
    phi = phi_element(w)
    rng = random.Random(4)
    f = act(upper_u(p, 1) * t_mat(p), phi) + phi.scale(2)
    for _ in range(60):
        g1 = random_group_word(p, rng, 4)
        g2 = random_group_word(p, rng, 4)
        assert act(g1, act(g2, f)) == act(g1 * g2, f)


@pytest.mark.parametrize("p", [2, 3])
def test_lemma_T_noncharacter(p):
    w = Weight(p, 1, 0)
    phi = phi_element(w)
    tphi = hecke_T(phi)
    direct = CindElement(w)
    for lam in range(p):
        direct = direct + act(upper_u(p, lam) * t_mat(p), phi)
    assert tphi == direct
    assert tphi.radius() == 1
    assert all(v.distance() == 1 for v in tphi.support)


@pytest.mark.parametrize("p,m", [(2, 0), (3, 0), (3, 1), (5, 2)])
def test_lemma_T_character(p, m):
    """Character weights gain the translate of Pi, with the sign psi(-1)."""
    w = Weight(p, 0, m)
    phi = phi_element(w)
    tphi = hecke_T(phi)
    direct = act(pi_mat(p), phi).scale(w.field.from_int((-1) ** m))
    for lam in range(p):
        direct = direct + act(upper_u(p, lam) * t_mat(p), phi)
    assert tphi == direct
    base_terms = [v for v in tphi.support if v.distance() == 0]
    assert not base_terms and tphi.radius() == 1


def test_hecke_equivariance_100_pairs():
    p = 3
    w = Weight(p, 2, 0)
    rng = random.Random(17)
    ball = BallIndex(w, 1)
    for _ in range(100):
        g = random_group_word(p, rng, 5)
        codes = np.array([rng.randrange(w.field.size) for _ in range(ball.dim)],
                         dtype=np.int64)
        f = ball.elem(codes)
        assert hecke_T(act(g, f)) == act(g, hecke_T(f))


def test_hecke_well_defined_two_expansions():
    p = 3
    w = Weight(p, 1, 0)
    phi = phi_element(w)
    probe = act(s_mat(p), phi)
    assert hecke_T(probe, "default") == hecke_T(probe, "alt")
    rng = random.Random(3)
    ball = BallIndex(w, 1)
    for _ in range(20):
        codes = np.array([rng.randrange(3) for _ in range(ball.dim)], dtype=np.int64)
        f = ball.elem(codes)
        assert hecke_T(f, "default") == hecke_T(f, "alt")


def test_hecke_linear():
    p = 3
    w = Weight(p, 1, 0)
    phi = phi_element(w)
    f = act(t_mat(p), phi)
    assert hecke_T(phi + f.scale(2)) == hecke_T(phi) + hecke_T(f).scale(2)


def test_ideal_parse_and_apply():
    f3 = Weight(3, 1, 0).field
    t = HeckeIdeal.parse(f3, "T")
    assert t.degree == 1 and repr(t) == "T"
    t2 = HeckeIdeal.parse(f3, "T^2")
    assert t2.degree == 2
    tm = HeckeIdeal.parse(f3, "T-1")
    assert tm.coeffs[0] == f3.from_int(-1)
    with pytest.raises(ValueError):
        HeckeIdeal.parse(f3, "bogus")
    w = Weight(3, 1, 0)
    phi = phi_element(w)
    assert t2.apply(phi) == hecke_T(hecke_T(phi))
    assert tm.apply(phi) == hecke_T(phi) + phi.scale(f3.from_int(-1))


def test_membership_examples():
    p = 3
    w = Weight(p, 1, 0)
    phi = phi_element(w)
    ideal = HeckeIdeal.parse(w.field, "T")
    tphi = hecke_T(phi)

    res = quotient_membership(tphi, ideal, 1)
    assert res.status == "zero"
    assert (res.preimage - phi).is_zero()

    res = quotient_membership(phi, ideal, 2)
    assert res.status == "nonzero"
    assert res.certificate is not None
    assert res.certified_radius == 3

    ideal2 = HeckeIdeal.parse(w.field, "T^2")
    res = quotient_membership(hecke_T(tphi), ideal2, 2)
    assert res.status == "zero"


def test_membership_guards():
    w = Weight(3, 1, 0)
    phi = phi_element(w)
    ideal = HeckeIdeal.parse(w.field, "T")
    with pytest.raises(ValueError):
        quotient_membership(hecke_T(phi), ideal, 0)
    with pytest.raises(TruncationError, match="truncation too small"):
        quotient_membership(phi, ideal, 5, r_max=4)


def test_hecke_injective_at_truncation():
    """Matrix of T on balls has trivial kernel (freeness evidence), for
    every weight at p in {2,3} and radius up to 3 on the standard one."""
    for p in (2, 3):
        for r in range(p):
            for m in range(max(p - 1, 1)):
                w = Weight(p, r, m)
                ideal = HeckeIdeal.parse(w.field, "T")
                for R in range(0, 3):
                    A, _, _ = ideal_matrix(w, ideal, R)
                    assert kernel_codes(w.field, A).shape[0] == 0
    w = Weight(3, 1, 0)
    A, _, _ = ideal_matrix(w, HeckeIdeal.parse(w.field, "T"), 3)
    assert kernel_codes(w.field, A).shape[0] == 0


def test_quotient_element_equality():
    p = 3
    w = Weight(p, 1, 0)
    phi = phi_element(w)
    ideal = HeckeIdeal.parse(w.field, "T")
    q1 = QuotientElement(hecke_T(phi), ideal)
    assert q1.is_zero()
    q2 = QuotientElement(phi, ideal)
    assert not q2.is_zero()
    shifted = QuotientElement(phi + hecke_T(phi), ideal)
    assert q2 == shifted


def test_i1_fixed_ball_examples():
    p = 3
    w = Weight(p, 1, 0)
    basis0 = i1_fixed_ball(w, 0)
    assert len(basis0) == 1
    phi = phi_element(w)
    # the line is phi
    lead = basis0[0]
    codes = [c.code for c in list(lead.support.values())[0]]
    nz = next(c for c in codes if c)
    assert (lead.scale(w.field.from_code(nz).inv()) - phi).is_zero()

    basis1 = i1_fixed_ball(w, 1)
    assert len(basis1) == 3
    # the sum vector T phi lies in the fixed space
    from gl2borel.exactfield import IncrementalSpan
    ball = BallIndex(w, 1)
    span = IncrementalSpan(w.field, ball.dim)
    for b in basis1:
        span.add(ball.coords(b))
    assert span.contains(ball.coords(hecke_T(phi)))
    assert span.contains(ball.coords(phi))


def test_i1_fixed_ball_quotient():
    """In c-Ind/(T) the image of the unipotent sum of phi is 0."""
    p = 3
    w = Weight(p, 1, 0)
    ideal = HeckeIdeal.parse(w.field, "T")
    phi = phi_element(w)
    total = CindElement(w)
    for lam in range(p):
        total = total + act(upper_u(p, lam) * t_mat(p), phi)
    assert QuotientElement(total, ideal).is_zero()
    basis = i1_fixed_ball(w, 1, ideal)
    ball = BallIndex(w, 1)
    from gl2borel.exactfield import IncrementalSpan
    # in the quotient the fixed space at radius 1 still contains phi
    assert any(not QuotientElement(b, ideal).is_zero() for b in basis)


@pytest.mark.parametrize("p", [2, 3])
def test_lift_independence(p):
    """Unipotent sums over any unit-lift system agree on I1-fixed vectors."""
    w = Weight(p, 1, 0)
    phi = phi_element(w)
    rng = random.Random(p + 40)
    fixed = [phi, hecke_T(phi)] + i1_fixed_ball(w, 1)
    for f in fixed:
        base = CindElement(w)
        alt = CindElement(w)
        for lam in range(p):
            base = base + act(upper_u(p, lam) * t_mat(p), f)
            lift2 = lam + p * rng.randint(1, 4) if lam else 0
            alt = alt + act(upper_u(p, lift2) * t_mat(p), f)
        assert base == alt


def test_lift_dependence_without_fixedness():
    """The same replacement is detectable on a vector that is not I1-fixed,
    so the invariance above is not vacuous."""
    p = 3
    w = Weight(p, 1, 0)
    g = act(lower_u(p, 1), phi_element(w))  # moved off the fixed line
    base = CindElement(w)
    alt = CindElement(w)
    for lam in range(p):
        base = base + act(upper_u(p, lam) * t_mat(p), g)
        alt = alt + act(upper_u(p, lam + (p if lam else 0)) * t_mat(p), g)
    assert base != alt


def test_unit_gen_helpers():
    assert one_mod_p_unit_gens(3, 1) == []
    assert one_mod_p_unit_gens(3, 3) == [4]
    assert one_mod_p_unit_gens(2, 2) == [3]
    assert set(one_mod_p_unit_gens(2, 4)) == {15, 5}
    gens = i1_generators(3, 2)
    from gl2borel.padicmat import in_subgroup
    assert all(in_subgroup(g, "I1") for g in gens)


def test_quotient_equality_is_equivalence():
    p = 3
    w = Weight(p, 1, 0)
    phi = phi_element(w)
    ideal = HeckeIdeal.parse(w.field, "T")
    a = QuotientElement(phi, ideal)
    b = QuotientElement(phi + hecke_T(phi), ideal)
    c = QuotientElement(phi + hecke_T(act(t_mat(p), phi)).scale(2), ideal)
    assert a.rep != b.rep and b.rep != c.rep
    assert a == a
    assert a == b and b == a
    assert b == c and a == c


def test_serialization():
    w = Weight(3, 1, 0)
    phi = phi_element(w)
    data = phi.serialize()
    assert data == [{"vertex": {"d": 0, "a": "0"}, "coeffs": [1, 0]}]
    assert CindElement(w).radius() == -1  # zero sentinel
    assert CindElement(w).serialize() == []


def test_spanning_error_unreachable_by_construction():
    # the default spanning sets are invertible for every legal weight
    for p in (2, 3, 5):
        for r in range(p):
            hecke_T(phi_element(Weight(p, r, 0)))
