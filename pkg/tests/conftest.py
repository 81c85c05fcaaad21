import random
from fractions import Fraction

import pytest
from hypothesis import strategies as st

from fedosov.pipeline import ConnectionData
from fedosov.scalar import GaussianRational, ScalarCoeff, parse_expr
from fedosov.weyl import WeylElement


def x(i):
    return ScalarCoeff.coord(i)


def fn(name, *order):
    return ScalarCoeff.func(name, order)


@pytest.fixture
def curved_connection():
    return ConnectionData(1, {(1, 1, 1): parse_expr("-x[2]")})


# -- hypothesis strategies ---------------------------------------------------

small_rationals = st.builds(Fraction, st.integers(-5, 5), st.integers(1, 4))
gaussian = st.builds(GaussianRational, small_rationals, st.sampled_from([0, 0, 1, Fraction(-1, 2)]))


def atoms_n1():
    return st.one_of(
        st.sampled_from([x(1), x(2)]),
        st.builds(lambda a, b: fn("w", a, b), st.integers(0, 2), st.integers(0, 2)),
        st.builds(lambda a, b: fn("v", a, b), st.integers(0, 1), st.integers(0, 1)),
    )


@st.composite
def scalars(draw, max_terms=4, max_factors=3):
    total = ScalarCoeff()
    for _ in range(draw(st.integers(0, max_terms))):
        term = ScalarCoeff.const(draw(gaussian))
        for _ in range(draw(st.integers(0, max_factors))):
            term = term * draw(atoms_n1())
        total = total + term
    return total


@st.composite
def weyl_elements(draw, n=1, max_terms=3, max_exp=2, max_h=1, coeff=None):
    if coeff is None:
        coeff = scalars(max_terms=2, max_factors=1)
    terms = []
    for _ in range(draw(st.integers(0, max_terms))):
        k = draw(st.integers(0, max_h))
        mono = tuple(draw(st.integers(0, max_exp)) for _ in range(2 * n))
        terms.append((k, mono, draw(coeff)))
    out = WeylElement.zero(n)
    for k, mono, c in terms:
        out = out + WeylElement.monomial(n, mono, c, k)
    return out


@st.composite
def homogeneous_weyl(draw, z, n=1, max_terms=3, coeff=None):
    """Random element all of whose terms have total degree ``z``."""
    if coeff is None:
        coeff = scalars(max_terms=2, max_factors=1)
    out = WeylElement.zero(n)
    for _ in range(draw(st.integers(1, max_terms))):
        k = draw(st.integers(0, z // 2))
        rest = z - 2 * k
        cuts = sorted(draw(st.integers(0, rest)) for _ in range(2 * n - 1))
        bounds = [0] + cuts + [rest]
        mono = tuple(bounds[i + 1] - bounds[i] for i in range(2 * n))
        out = out + WeylElement.monomial(n, mono, draw(coeff), k)
    return out


def random_polynomial(rng: random.Random, max_deg=3, n=1, terms=4) -> ScalarCoeff:
    """Random polynomial in the coordinates with small rational coefficients."""
    out = ScalarCoeff()
    for _ in range(terms):
        c = Fraction(rng.randint(-6, 6), rng.randint(1, 4))
        mono = ScalarCoeff.const(c)
        for _ in range(rng.randint(0, max_deg)):
            mono = mono * x(rng.randint(1, 2 * n))
        out = out + mono
    return out


# -- acceptance summary ------------------------------------------------------

_acceptance_results = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        number, title = marker.args
        _acceptance_results.append((number, title, report.outcome, report.duration))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, outcome, duration in sorted(_acceptance_results, key=lambda r: (int(r[0].rstrip("ab")), r[0])):
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{status}  criterion {number:<3} {title}  ({duration:.2f} s)")
