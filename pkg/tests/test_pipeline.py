import random
from fractions import Fraction

import pytest

from conftest import fn, random_polynomial, x
from oracles import moyal_product, taylor_lift
from fedosov.forms import WeylForm, form_deg_component
from fedosov.pipeline import (
    ConnectionData,
    FedosovStar,
    abelian_correction,
    build_connection_one_form,
    sigma,
    sigma_circ_complement,
    star,
    star_full,
)
from fedosov.scalar import GaussianRational, ScalarCoeff, differentiate, parse_expr
from fedosov.weyl import WeylElement, circ_oracle

w = fn("w", 0, 0)
v = fn("v", 0, 0)


def c(re, im=0):
    return ScalarCoeff.const(GaussianRational(re, im))


def mono(exps, coeff=1, k=0):
    return WeylElement.monomial(len(exps) // 2, exps, coeff, k)


def test_connection_data_symmetrizes():
    conn = ConnectionData(1, {(1, 1, 2): x(1)})
    assert conn[(2, 1, 1)] == x(1)
    assert conn[(1, 2, 1)] == x(1)
    assert conn[(1, 1, 1)].is_zero()
    with pytest.raises(ValueError):
        ConnectionData(1, {(2, 1, 1): x(1)})
    with pytest.raises(IndexError):
        ConnectionData(1, {(1, 1, 3): x(1)})


def test_connection_one_form_examples(curved_connection):
    gamma = build_connection_one_form(curved_connection)
    assert gamma == WeylForm.one_form([mono((2, 0), parse_expr("-1/2*x[2]")), WeylElement.zero(1)])
    assert build_connection_one_form(ConnectionData(1)).is_zero()
    g = fn("g", 0, 0)
    gamma = build_connection_one_form(ConnectionData(1, {(1, 1, 2): g}))
    assert gamma == WeylForm.one_form([mono((1, 1), g), mono((2, 0), g.scale(Fraction(1, 2)))])


def test_connection_one_form_is_degree_two(curved_connection):
    gamma = build_connection_one_form(curved_connection)
    assert gamma.is_homogeneous(2)


def test_abelian_correction_flat():
    eng = FedosovStar(ConnectionData(1), 4)
    assert eng.curvature.is_zero()
    assert all(r.is_zero() for r in eng.r.values())


def test_abelian_correction_curved(curved_connection):
    eng = FedosovStar(curved_connection, 4)
    assert eng.r[3] == WeylForm.one_form([mono((2, 1), Fraction(-1, 8)), mono((3, 0), Fraction(1, 8))])
    for z, r in eng.r.items():
        assert r.is_homogeneous(z)


def test_abelian_correction_short_depth(curved_connection):
    gamma = build_connection_one_form(curved_connection)
    assert abelian_correction(gamma, WeylForm.zero(2, 1), 2) == {}


def test_flat_section_unit(curved_connection):
    eng = FedosovStar(curved_connection, 3)
    lift = eng.lift(ScalarCoeff.const(1))
    assert all(part.is_zero() for part in lift.by_degree[1:])


def test_flat_section_first_order_is_gradient():
    a0 = x(1) ** 2 * x(2) + w
    lift = FedosovStar(ConnectionData(1), 2).lift(a0)
    expected = mono((1, 0), differentiate(a0, 1)) + mono((0, 1), differentiate(a0, 2))
    assert lift.by_degree[1].component() == expected


def test_flat_section_curved(curved_connection):
    eng = FedosovStar(curved_connection, 3)
    lift = eng.lift(x(2))
    assert lift.by_degree[1].component() == mono((0, 1))
    assert lift.by_degree[2].component() == mono((2, 0), parse_expr("1/2*x[2]"))
    for z, part in enumerate(lift.by_degree):
        assert part.is_homogeneous(z)


def test_flat_section_matches_taylor_lift_when_flat():
    a0 = random_polynomial(random.Random(4), max_deg=4)
    eng = FedosovStar(ConnectionData(1), 3)
    assert eng.lift(a0).total().component() == taylor_lift(a0, 1, eng.z_max)


def test_sigma():
    eng = FedosovStar(ConnectionData(1, {(1, 1, 1): -x(2)}), 3)
    assert sigma(eng.lift(w)) == {0: w}
    assert sigma(mono((1, 1)) + mono((0, 0), w, k=1)) == {1: w}
    assert sigma(WeylElement.zero(1)) == {}


def test_sigma_circ_complement_examples():
    fa, fb = x(1), w
    assert sigma_circ_complement((1, 0), fa, 0, (0, 1), fb, 0) == (1, (fa * fb).scale(GaussianRational(0, Fraction(1, 2))))
    assert sigma_circ_complement((0, 1), fa, 0, (1, 0), fb, 0) == (1, (fa * fb).scale(GaussianRational(0, Fraction(-1, 2))))
    assert sigma_circ_complement((0, 0), fa, 2, (0, 0), fb, 1) == (3, fa * fb)
    with pytest.raises(ValueError):
        sigma_circ_complement((1, 0), fa, 0, (1, 0), fb, 0)


@pytest.mark.parametrize("left", [(1, 0), (0, 1), (2, 1), (1, 3), (0, 0)])
def test_sigma_circ_complement_matches_oracle(left):
    right = left[1:] + left[:1]
    prod = circ_oracle(mono(left, x(1), k=1), mono(right, w))
    k, coeff = sigma_circ_complement(left, x(1), 1, right, w, 0)
    assert sigma(prod) == {k: coeff}


def test_sigma_circ_complement_n2_matches_oracle():
    for left in [(1, 0, 0, 1), (2, 1, 0, 1), (0, 1, 1, 0)]:
        right = left[2:] + left[:2]
        k, coeff = sigma_circ_complement(left, x(1), 0, right, x(2), 0)
        assert sigma(circ_oracle(mono(left, x(1)), mono(right, x(2)))) == {k: coeff}


def test_curved_product_computed(curved_connection):
    # even orders match the reference expression; the h^1 sign follows from a[1] o b[1] = y[2] o (w_1 y[1] + ...)
    res = star(x(2), w, 5, curved_connection)
    assert res.by_hpower == [
        x(2) * w,
        fn("w", 1, 0).scale(GaussianRational(0, Fraction(-1, 2))),
        (x(2) * fn("w", 0, 2)).scale(Fraction(-1, 8)),
        ScalarCoeff(),
        (x(2) * fn("w", 0, 4)).scale(Fraction(-1, 128)),
        ScalarCoeff(),
    ]


def test_curved_reversed_order_reproduces_reference_expression(curved_connection):
    reference = [
        parse_expr("x[2]*w(x[1],x[2])"),
        parse_expr("1/2*i*w^(1,0)(x[1],x[2])"),
        parse_expr("-1/8*x[2]*w^(0,2)(x[1],x[2])"),
        ScalarCoeff(),
        parse_expr("-1/128*x[2]*w^(0,4)(x[1],x[2])"),
        ScalarCoeff(),
    ]
    assert star(w, x(2), 5, curved_connection).by_hpower == reference


def test_star_unit(curved_connection):
    eng = FedosovStar(curved_connection, 3)
    a0 = x(1) * w + x(2) ** 2
    assert eng.star(a0, 1).by_hpower == [a0, ScalarCoeff(), ScalarCoeff(), ScalarCoeff()]
    assert eng.star(1, a0).by_hpower == [a0, ScalarCoeff(), ScalarCoeff(), ScalarCoeff()]


def test_star_full_of_units():
    for k in (1, 2, 3):
        assert star_full(1, 1, k).by_hpower == [c(1)] + [ScalarCoeff()] * k


def test_moyal_against_oracle():
    res = star(w, v, 4)
    assert res.by_hpower == moyal_product(w, v, 1, 4)


def test_classical_limit_orientation(curved_connection):
    a0, b0 = x(1) ** 2 * x(2), w * x(1)
    res = star(a0, b0, 1, curved_connection)
    bracket = differentiate(a0, 1) * differentiate(b0, 2) - differentiate(a0, 2) * differentiate(b0, 1)
    assert res.by_hpower[0] == a0 * b0
    assert res.by_hpower[1] == bracket.scale(GaussianRational(0, Fraction(1, 2)))


def test_star_matches_full_randomized(curved_connection):
    rng = random.Random(7)
    eng = FedosovStar(curved_connection, 3)
    for _ in range(4):
        a0, b0 = random_polynomial(rng), random_polynomial(rng) + w
        assert eng.star(a0, b0).by_hpower == eng.star_full(a0, b0).by_hpower


def test_flatness_of_lifts(curved_connection):
    eng = FedosovStar(curved_connection, 2, z_max=4)
    lift = eng.lift(x(1) * x(2) ** 2 + w)
    defect = eng.flatness_defect(lift)
    for d in range(eng.z_max):
        assert form_deg_component(defect, d).is_zero()


def test_flatness_requires_abelian_correction(curved_connection):
    eng = FedosovStar(curved_connection, 2, z_max=4)
    eng.r = {}
    lift = eng.lift(x(2) ** 3)
    defect = eng.flatness_defect(lift)
    assert any(not form_deg_component(defect, d).is_zero() for d in range(eng.z_max))


def test_star_series_is_h_linear(curved_connection):
    eng = FedosovStar(curved_connection, 2)
    a0, b0 = x(1) * x(2), w
    base = eng.star(a0, b0).by_hpower
    shifted = eng.star_series([ScalarCoeff(), a0], [b0])
    assert shifted == [ScalarCoeff(), base[0], base[1]]


def test_intermediates_kept(curved_connection):
    res = FedosovStar(curved_connection, 2).star(x(2), w, keep_intermediates=True)
    inter = res.intermediates
    assert set(inter) == {"gamma", "curvature", "r", "gamma_plus_r", "lift_A", "lift_B"}
    assert inter["gamma_plus_r"] == inter["gamma"] + inter["r"][3]


def test_hpower_must_be_positive():
    with pytest.raises(ValueError):
        FedosovStar(ConnectionData(1), 0)
