"""Differential forms of degree 0, 1 and 2 with Weyl-algebra values.

A :class:`WeylForm` stores one :class:`WeylElement` per basis form.  Keys
are strictly increasing tuples of 0-based coordinate indices: ``()`` for a
0-form, ``(s,)`` for ``dx[s+1]`` and ``(j, s)`` with ``j < s`` for
``dx[j+1]^dx[s+1]``.  Antisymmetry is therefore structural.
"""

from __future__ import annotations

from .scalar import I, GaussianRational, differentiate
from .weyl import DimensionError, WeylElement, circ, deg_component, mono_degree, unit_mono

MAX_FORM_DEGREE = 2


class DivisionByH(ArithmeticError):
    """Raised when dividing by ``h`` would leave a negative power."""


def _sort_sign(key: tuple):
    """Sort a tuple of indices; return (sign, sorted) or (0, None) on repeats."""
    if len(set(key)) != len(key):
        return 0, None
    sign = 1
    key = list(key)
    for a in range(len(key)):
        for b in range(len(key) - 1 - a):
            if key[b] > key[b + 1]:
                key[b], key[b + 1] = key[b + 1], key[b]
                sign = -sign
    return sign, tuple(key)


class WeylForm:
    __slots__ = ("degree", "n", "comps")

    def __init__(self, degree: int, n: int, comps=None):
        if not 0 <= degree <= MAX_FORM_DEGREE:
            raise ValueError(f"unsupported form degree {degree}")
        self.degree = degree
        self.n = n
        self.comps = {}
        for key, w in (comps or {}).items():
            key = tuple(key)
            if len(key) != degree or list(key) != sorted(set(key)) or any(not 0 <= s < 2 * n for s in key):
                raise ValueError(f"bad form key {key} for degree {degree}, n={n}")
            if w.n != n:
                raise DimensionError(f"component has n={w.n}, form has n={n}")
            if w:
                self.comps[key] = w

    @classmethod
    def zero(cls, degree: int, n: int) -> "WeylForm":
        return cls(degree, n)

    @classmethod
    def from_weyl(cls, a: WeylElement) -> "WeylForm":
        return cls(0, a.n, {(): a})

    @classmethod
    def one_form(cls, comps) -> "WeylForm":
        """Build a 1-form from the list of ``dx[1] .. dx[2n]`` coefficients."""
        comps = list(comps)
        n = comps[0].n
        if len(comps) != 2 * n:
            raise DimensionError(f"expected {2 * n} components, got {len(comps)}")
        return cls(1, n, {(s,): w for s, w in enumerate(comps)})

    @classmethod
    def from_components(cls, degree: int, n: int, items) -> "WeylForm":
        """Collect ``(key, WeylElement)`` items with arbitrary key order.

        Keys are permuted into increasing order with the wedge sign; keys with
        a repeated index vanish.
        """
        acc: dict = {}
        for key, w in items:
            sign, key = _sort_sign(tuple(key))
            if not sign:
                continue
            w = w if sign > 0 else -w
            acc[key] = acc[key] + w if key in acc else w
        return cls(degree, n, acc)

    def component(self, *key) -> WeylElement:
        return self.comps.get(tuple(key), WeylElement.zero(self.n))

    def _check(self, other: "WeylForm") -> None:
        if self.n != other.n:
            raise DimensionError(f"dimension mismatch: n={self.n} vs n={other.n}")
        if self.degree != other.degree:
            raise ValueError(f"form degree mismatch: {self.degree} vs {other.degree}")

    def is_zero(self) -> bool:
        return not self.comps

    def __bool__(self):
        return bool(self.comps)

    def __eq__(self, other):
        if not isinstance(other, WeylForm):
            return NotImplemented
        return self.degree == other.degree and self.n == other.n and self.comps == other.comps

    def __add__(self, other: "WeylForm") -> "WeylForm":
        self._check(other)
        out = dict(self.comps)
        for key, w in other.comps.items():
            out[key] = out[key] + w if key in out else w
        return WeylForm(self.degree, self.n, out)

    def __neg__(self) -> "WeylForm":
        return WeylForm(self.degree, self.n, {key: -w for key, w in self.comps.items()})

    def __sub__(self, other: "WeylForm") -> "WeylForm":
        return self + (-other)

    def scale(self, c) -> "WeylForm":
        return WeylForm(self.degree, self.n, {key: w.scale(c) for key, w in self.comps.items()})

    def map_components(self, fn) -> "WeylForm":
        return WeylForm(self.degree, self.n, {key: fn(w) for key, w in self.comps.items()})

    def is_homogeneous(self, z: int) -> bool:
        return all(w.is_homogeneous(z) for w in self.comps.values())

    def render(self, style: str = "machine") -> str:
        return render_form(self, style)

    def __repr__(self):
        return f"WeylForm(degree={self.degree}, n={self.n}, {render_form(self)!r})"

    def __str__(self):
        return render_form(self, "human")


def ordnung(a: WeylForm) -> WeylForm:
    """Canonical copy of ``a``: one entry per (monomial, basis form)."""
    return WeylForm(a.degree, a.n, {key: WeylElement(w.n, dict(w.terms)) for key, w in a.comps.items()})


def form_deg_component(a: WeylForm, z: int) -> WeylForm:
    return a.map_components(lambda w: deg_component(w, z))


def form_product(a: WeylForm, b: WeylForm, max_deg: int | None = None) -> WeylForm:
    """``a o b``: Weyl product on values, wedge product on the form parts."""
    if a.n != b.n:
        raise DimensionError(f"dimension mismatch: n={a.n} vs n={b.n}")
    degree = a.degree + b.degree
    if degree > MAX_FORM_DEGREE:
        raise ValueError(f"product of forms of degree {a.degree} and {b.degree} is unsupported")
    items = []
    for ka, wa in a.comps.items():
        for kb, wb in b.comps.items():
            if set(ka) & set(kb):
                continue
            items.append((ka + kb, circ(wa, wb, max_deg)))
    return WeylForm.from_components(degree, a.n, items)


def wedge11(a: WeylForm, b: WeylForm, max_deg: int | None = None) -> WeylForm:
    if a.degree != 1 or b.degree != 1:
        raise ValueError("wedge11 expects two 1-forms")
    return form_product(a, b, max_deg)


def commutator(a: WeylForm, b: WeylForm, max_deg: int | None = None) -> WeylForm:
    """Graded commutator ``a o b - (-1)^(m1 m2) b o a``."""
    ab = form_product(a, b, max_deg)
    ba = form_product(b, a, max_deg)
    if a.degree * b.degree % 2:
        return ab + ba
    return ab - ba


def weyl_differentiate(w: WeylElement, i: int) -> WeylElement:
    """Differentiate every coefficient with respect to ``x[i]`` (1-based)."""
    return w.map_coefficients(lambda c: differentiate(c, i, w.n))


def exterior_d(a: WeylForm) -> WeylForm:
    """Exterior derivative in ``x``; the fibre variables are constants."""
    n = a.n
    if a.degree == 0:
        w = a.component()
        return WeylForm(1, n, {(s,): weyl_differentiate(w, s + 1) for s in range(2 * n)})
    if a.degree == 1:
        items = []
        for (s,), w in a.comps.items():
            for j in range(2 * n):
                if j != s:
                    items.append(((j, s), weyl_differentiate(w, j + 1)))
        return WeylForm.from_components(2, n, items)
    raise ValueError("exterior_d is only supported on 0- and 1-forms")


def _raise_by_y(w: WeylElement, j: int, extra: int, out: dict, sign: int = 1) -> None:
    n = w.n
    ej = unit_mono(n, j)
    for (k, m), c in w.terms.items():
        l = mono_degree(m)
        key = (k, tuple(x + y for x, y in zip(m, ej)))
        term = c.scale(GaussianRational(sign) / (l + extra))
        out[key] = out[key] + term if key in out else term


def delta_inv(a: WeylForm) -> WeylForm:
    """The homotopy operator turning one ``dx`` into a ``y``.

    On ``I dx[j]`` it gives ``I y[j] / (|I|+1)``; on ``I dx[j]^dx[s]`` it
    gives ``(I y[j] dx[s] - I y[s] dx[j]) / (|I|+2)``.  Powers of ``h`` are
    left alone.
    """
    n = a.n
    if a.degree == 0:
        if any(mono_degree(m) for w in a.comps.values() for _, m in w.terms):
            raise ValueError("delta_inv is not defined on 0-forms with y-dependence")
        return WeylForm.zero(0, n)
    if a.degree == 1:
        out: dict = {}
        for (j,), w in a.comps.items():
            _raise_by_y(w, j, 1, out)
        return WeylForm(0, n, {(): WeylElement(n, out)})
    items = []
    for (j, s), w in a.comps.items():
        plus: dict = {}
        minus: dict = {}
        _raise_by_y(w, j, 2, plus)
        _raise_by_y(w, s, 2, minus, -1)
        items.append(((s,), WeylElement(n, plus)))
        items.append(((j,), WeylElement(n, minus)))
    return WeylForm.from_components(1, n, items)


def i_over_h(a: WeylForm) -> WeylForm:
    """Multiply by ``i/h``; every term must carry at least one power of ``h``."""
    for w in a.comps.values():
        if any(k == 0 for k, _ in w.terms):
            raise DivisionByH("form has a nonzero h^0 part")
    return a.map_components(lambda w: w.shift_h(-1).scale(I))


def covariant_d(gamma: WeylForm, a: WeylForm, max_deg: int | None = None) -> WeylForm:
    """``da + (i/h)[gamma, a]`` for a 1-form ``gamma`` and a 0- or 1-form ``a``."""
    if gamma.degree != 1:
        raise ValueError("connection must be a 1-form")
    if a.degree > 1:
        raise ValueError("covariant_d is only supported on 0- and 1-forms")
    return exterior_d(a) + i_over_h(commutator(gamma, a, max_deg))


def curvature(gamma: WeylForm, max_deg: int | None = None) -> WeylForm:
    """``d gamma + (i/h) gamma o gamma``."""
    if gamma.degree != 1:
        raise ValueError("curvature expects a 1-form")
    return exterior_d(gamma) + i_over_h(form_product(gamma, gamma, max_deg))


def _render_key(key: tuple) -> str:
    return "^".join(f"dx[{s + 1}]" for s in key)


def render_form(a: WeylForm, style: str = "machine") -> str:
    if a.degree == 0:
        return a.component().render(style)
    if not a.comps:
        return "0"
    parts = []
    for key in sorted(a.comps):
        parts.append(f"({a.comps[key].render(style)}) {_render_key(key)}")
    return " + ".join(parts)
