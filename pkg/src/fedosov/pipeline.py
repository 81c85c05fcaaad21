"""Star product of two phase-space functions via flat sections of the Weyl bundle.

The pipeline is: connection 1-form -> curvature -> Abelian correction
``r[z]`` -> flat lifts of both functions -> projection of their Weyl
product to ``y = 0``.  Every recursion stops at total degree
``2 * hpower - 1``, which is enough for the ``h**hpower`` coefficient.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from math import factorial

from .forms import (
    WeylForm,
    commutator,
    covariant_d,
    curvature,
    delta_inv,
    form_product,
    i_over_h,
    ordnung,
)
from .scalar import I_POWERS, GaussianRational, ScalarCoeff, accumulate
from .weyl import WeylElement, circ, half_swap, mono_degree, omega_lower, sym_tensor_to_poly


class ConnectionData:
    """Totally symmetric Christoffel symbols ``Gamma_ijk`` in Darboux coordinates.

    Only nondecreasing index triples are stored; lookups symmetrize.
    """

    def __init__(self, n: int, coefficients=None):
        if n < 1:
            raise ValueError("n must be positive")
        self.n = n
        self.coefficients = {}
        for triple, c in (coefficients or {}).items():
            triple = tuple(triple)
            if len(triple) != 3 or any(not 1 <= t <= 2 * n for t in triple):
                raise IndexError(f"connection index {triple} out of range for n={n}")
            if list(triple) != sorted(triple):
                raise ValueError(f"connection index {triple} must satisfy i <= j <= k")
            c = ScalarCoeff.coerce(c)
            if c:
                self.coefficients[triple] = c

    def __getitem__(self, triple) -> ScalarCoeff:
        return self.coefficients.get(tuple(sorted(triple)), ScalarCoeff())

    def is_flat(self) -> bool:
        return not self.coefficients


def build_connection_one_form(c: ConnectionData) -> WeylForm:
    """``(1/2) Gamma_ijk y^i y^j dx^k`` summed over all i, j."""
    n = c.n
    comps = {}
    for k in range(1, 2 * n + 1):
        table = {}
        for i in range(1, 2 * n + 1):
            for j in range(i, 2 * n + 1):
                g = c[(i, j, k)]
                if g:
                    table[(i, j)] = g.scale(GaussianRational(1, 0) / 2)
        if table:
            comps[(k - 1,)] = sym_tensor_to_poly(2, table, n)
    return WeylForm(1, n, comps)


def _check_degree(form: WeylForm, z: int, what: str) -> None:
    if not form.is_homogeneous(z):
        raise AssertionError(f"{what} is not homogeneous of degree {z}")


def abelian_correction(gamma: WeylForm, curv: WeylForm, z_max: int) -> dict:
    """Degree components ``r[z]``, ``3 <= z <= z_max``, of the Abelian correction.

    Returns a dict ``z -> 1-form``; ``r[1] = r[2] = 0`` are not stored.
    """
    n = gamma.n
    r: dict = {}
    if z_max < 3:
        return r
    r[3] = ordnung(delta_inv(curv))
    _check_degree(r[3], 3, "r[3]")
    for z in range(4, z_max + 1):
        acc = covariant_d(gamma, r[z - 1])
        quad = WeylForm.zero(2, n)
        for j in range(3, z - 1):
            quad = quad + form_product(r[j], r[z + 1 - j])
        if quad:
            acc = acc + i_over_h(quad)
        r[z] = ordnung(delta_inv(acc))
        _check_degree(r[z], z, f"r[{z}]")
    return r


def abelian_series(gamma: WeylForm, r: dict) -> WeylForm:
    """``Gamma + r`` as a single 1-form (the ``omega_ij y^i dx^j`` term omitted)."""
    total = gamma
    for z in sorted(r):
        total = total + r[z]
    return total


def full_abelian_connection(gamma: WeylForm, r: dict) -> WeylForm:
    """``omega_ij y^i dx^j + Gamma + r``, the complete Abelian connection."""
    n = gamma.n
    w = omega_lower(n)
    comps = []
    for j in range(2 * n):
        terms = {}
        for i in range(2 * n):
            if w[i][j]:
                mono = tuple(1 if m == i else 0 for m in range(2 * n))
                terms[(0, mono)] = ScalarCoeff.const(w[i][j])
        comps.append(WeylElement(n, terms))
    return WeylForm.one_form(comps) + abelian_series(gamma, r)


@dataclass
class FlatSection:
    base: ScalarCoeff
    by_degree: list  # WeylForm of degree 0 for z = 0 .. z_max

    def total(self) -> WeylForm:
        out = self.by_degree[0]
        for a in self.by_degree[1:]:
            out = out + a
        return out


def flat_section(a0: ScalarCoeff, gamma: WeylForm, r: dict, z_max: int) -> FlatSection:
    """Lift ``a0`` to the flat section whose ``y = 0`` value is ``a0``."""
    n = gamma.n
    a0 = ScalarCoeff.coerce(a0)
    parts = [WeylForm.from_weyl(WeylElement.scalar(n, a0))]
    for z in range(1, z_max + 1):
        acc = covariant_d(gamma, parts[z - 1])
        comm = WeylForm.zero(1, n)
        for l in range(1, z - 1):
            rz = r.get(z + 1 - l)
            if rz is not None and parts[l]:
                comm = comm + commutator(rz, parts[l])
        if comm:
            acc = acc + i_over_h(comm)
        parts.append(ordnung(delta_inv(acc)))
        _check_degree(parts[z], z, f"a[{z}]")
    return FlatSection(a0, parts)


def sigma(a) -> dict:
    """Projection to ``y = 0``: map ``h``-power -> coefficient."""
    if isinstance(a, FlatSection):
        a = a.total()
    if isinstance(a, WeylForm):
        if a.degree != 0:
            raise ValueError("sigma is defined on 0-forms")
        a = a.component()
    return {k: c for (k, m), c in a.terms.items() if not any(m)}


def sigma_circ_complement(I: tuple, fA: ScalarCoeff, sA: int, J: tuple, fB: ScalarCoeff, sB: int):
    """``y = 0`` part of ``(h^sA fA y^I) o (h^sB fB y^J)`` for ``J = half_swap(I)``.

    Returns ``(k, coefficient)`` where ``k = sA + sB + |I|``.
    """
    I, J = tuple(I), tuple(J)
    if J != half_swap(I):
        raise ValueError(f"{J} is not the complement of {I}")
    n = len(I) // 2
    deg = mono_degree(I)
    mult = 1
    for e in I:
        mult *= factorial(e)
    if sum(I[n:]) % 2:
        mult = -mult
    g = I_POWERS[deg % 4] * GaussianRational(mult, 0) / 2 ** deg
    return sA + sB + deg, (fA * fB).scale(g)


@dataclass
class StarResult:
    by_hpower: list  # ScalarCoeff per power of h, k = 0 .. hpower
    intermediates: dict | None = None
    timings: dict = field(default_factory=dict)

    def coefficient(self, k: int) -> ScalarCoeff:
        return self.by_hpower[k] if k < len(self.by_hpower) else ScalarCoeff()


def _projected_product(a: WeylElement, b: WeylElement, k: int) -> ScalarCoeff:
    """``h^k`` coefficient of ``sigma(a o b)`` pairing each term with its complement."""
    flip = len(b) < len(a)
    short, long_ = (b, a) if flip else (a, b)
    acc: dict = {}
    for (s, mono), f in short.terms.items():
        other_mono = half_swap(mono)
        other = long_.terms.get((k - s - mono_degree(mono), other_mono))
        if other is None:
            continue
        if flip:
            _, term = sigma_circ_complement(other_mono, other, k - s - mono_degree(mono), mono, f, s)
        else:
            _, term = sigma_circ_complement(mono, f, s, other_mono, other, k - s - mono_degree(mono))
        accumulate(acc, term)
    return ScalarCoeff(acc)


class FedosovStar:
    """Star product for a fixed connection and truncation order.

    The connection 1-form, its curvature and the Abelian correction are
    computed once on construction and reused by every product.
    """

    def __init__(self, connection: ConnectionData, hpower: int, z_max: int | None = None):
        if hpower < 1:
            raise ValueError("hpower must be a positive integer")
        self.connection = connection
        self.n = connection.n
        self.hpower = hpower
        # 2*hpower - 1 suffices for the product; a larger depth is only
        # useful for checking flatness of the lifts one degree further
        self.z_max = 2 * hpower - 1 if z_max is None else max(z_max, 2 * hpower - 1)
        self.timings = {}
        t0 = time.perf_counter()
        self.gamma = build_connection_one_form(connection)
        t1 = time.perf_counter()
        self.curvature = curvature(self.gamma)
        t2 = time.perf_counter()
        self.r = abelian_correction(self.gamma, self.curvature, self.z_max)
        t3 = time.perf_counter()
        self.timings.update(connection=t1 - t0, curvature=t2 - t1, abelian=t3 - t2)

    def lift(self, a0: ScalarCoeff) -> FlatSection:
        return flat_section(a0, self.gamma, self.r, self.z_max)

    def intermediates(self, lift_a: FlatSection, lift_b: FlatSection) -> dict:
        return {
            "gamma": self.gamma,
            "curvature": self.curvature,
            "r": dict(self.r),
            "gamma_plus_r": abelian_series(self.gamma, self.r),
            "lift_A": lift_a,
            "lift_B": lift_b,
        }

    def star(self, a0, b0, keep_intermediates: bool = False) -> StarResult:
        a0, b0 = ScalarCoeff.coerce(a0), ScalarCoeff.coerce(b0)
        t0 = time.perf_counter()
        la = self.lift(a0)
        t1 = time.perf_counter()
        lb = self.lift(b0)
        t2 = time.perf_counter()
        series = [a0 * b0]
        for k in range(1, self.hpower + 1):
            acc: dict = {}
            for l in range(1, 2 * k):
                a_l = la.by_degree[l].component()
                b_m = lb.by_degree[2 * k - l].component()
                if a_l and b_m:
                    accumulate(acc, _projected_product(a_l, b_m, k))
            series.append(ScalarCoeff(acc))
        t3 = time.perf_counter()
        timings = dict(self.timings, lift_A=t1 - t0, lift_B=t2 - t1, projection=t3 - t2)
        inter = self.intermediates(la, lb) if keep_intermediates else None
        return StarResult(series, inter, timings)

    def star_full(self, a0, b0) -> StarResult:
        """Unoptimized reference: full Weyl product of the lifts, then projection."""
        la, lb = self.lift(a0), self.lift(b0)
        prod = circ(la.total().component(), lb.total().component(), max_deg=2 * self.hpower)
        proj = sigma(prod)
        return StarResult([proj.get(k, ScalarCoeff()) for k in range(self.hpower + 1)])

    def star_series(self, a_series, b_series) -> list:
        """Star product of ``h``-series given as coefficient lists, truncated at ``hpower``."""
        out = [ScalarCoeff() for _ in range(self.hpower + 1)]
        for p, a in enumerate(a_series):
            for q, b in enumerate(b_series):
                if p + q > self.hpower or not a or not b:
                    continue
                res = self.star(a, b)
                for k in range(self.hpower + 1 - p - q):
                    out[p + q + k] = out[p + q + k] + res.by_hpower[k]
        return out

    def flatness_defect(self, lift: FlatSection) -> WeylForm:
        """``d a + (i/h)[full Abelian connection, a]`` for a lifted section.

        Its degree-``d`` part involves ``a[d+1]`` and ``r[d+1]``, so it vanishes
        for ``d < z_max`` only.
        """
        full = full_abelian_connection(self.gamma, self.r)
        return covariant_d(full, lift.total())


def star(a0, b0, hpower: int, connection: ConnectionData | None = None, n: int = 1,
         keep_intermediates: bool = False) -> StarResult:
    connection = connection or ConnectionData(n)
    return FedosovStar(connection, hpower).star(a0, b0, keep_intermediates)


def star_full(a0, b0, hpower: int, connection: ConnectionData | None = None, n: int = 1) -> StarResult:
    connection = connection or ConnectionData(n)
    return FedosovStar(connection, hpower).star_full(a0, b0)
