"""The fibre Weyl algebra.

Elements are finite sums ``coeff * h^k * y^I`` where ``I`` is an exponent
vector over ``y[1] .. y[2n]`` and ``coeff`` is a :class:`ScalarCoeff`.
The total degree of a term is ``2k + |I|``.  ``h`` is never a scalar atom;
it is the integer ``k`` stored in the key.

Conjugate pairs are ``(y[i], y[i+n])`` and the symplectic form is the
Darboux form ``sum_i dx[i] ^ dx[i+n]``.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from functools import lru_cache
from math import factorial

from .scalar import I_POWERS, ONE, GaussianRational, ScalarCoeff, accumulate, join_terms, render_expr

HALF = Fraction(1, 2)


def omega_lower(n: int) -> list[list[int]]:
    """Components ``omega_{ij}`` of the Darboux symplectic form (0-based)."""
    w = [[0] * (2 * n) for _ in range(2 * n)]
    for i in range(n):
        w[i][i + n] = 1
        w[i + n][i] = -1
    return w


def omega_upper(n: int) -> list[list[int]]:
    """Components ``omega^{ij}`` with ``omega_{kj} omega^{ji} = delta_k^i``."""
    w = [[0] * (2 * n) for _ in range(2 * n)]
    for i in range(n):
        w[i][i + n] = -1
        w[i + n][i] = 1
    return w


def mono_degree(mono: tuple) -> int:
    return sum(mono)


def mono_mul(a: tuple, b: tuple) -> tuple:
    return tuple(x + y for x, y in zip(a, b))


def unit_mono(n: int, j: int) -> tuple:
    e = [0] * (2 * n)
    e[j] = 1
    return tuple(e)


def half_swap(mono: tuple) -> tuple:
    """Exchange the exponents of each conjugate pair ``(y[i], y[i+n])``."""
    n = len(mono) // 2
    return mono[n:] + mono[:n]


class DimensionError(ValueError):
    pass


class WeylElement:
    """Sparse polynomial in ``h`` and ``y[1..2n]`` with scalar coefficients.

    ``terms`` maps ``(k, I)`` to a nonzero :class:`ScalarCoeff`.
    """

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms=None):
        self.n = n
        self.terms = {key: c for key, c in (terms or {}).items() if c}

    @classmethod
    def _raw(cls, n: int, terms: dict) -> "WeylElement":
        obj = cls.__new__(cls)
        obj.n = n
        obj.terms = terms
        return obj

    @classmethod
    def zero(cls, n: int) -> "WeylElement":
        return cls._raw(n, {})

    @classmethod
    def scalar(cls, n: int, c, k: int = 0) -> "WeylElement":
        c = ScalarCoeff.coerce(c)
        return cls(n, {(k, (0,) * (2 * n)): c})

    @classmethod
    def one(cls, n: int) -> "WeylElement":
        return cls.scalar(n, 1)

    @classmethod
    def monomial(cls, n: int, mono, c=1, k: int = 0) -> "WeylElement":
        mono = tuple(mono)
        if len(mono) != 2 * n or any(e < 0 for e in mono):
            raise ValueError(f"bad exponent vector {mono} for n={n}")
        return cls(n, {(k, mono): ScalarCoeff.coerce(c)})

    @classmethod
    def y(cls, n: int, j: int) -> "WeylElement":
        """The generator ``y[j]`` (1-based)."""
        if not 1 <= j <= 2 * n:
            raise IndexError(f"y index {j} out of range for n={n}")
        return cls.monomial(n, unit_mono(n, j - 1))

    def _check(self, other: "WeylElement") -> None:
        if self.n != other.n:
            raise DimensionError(f"dimension mismatch: n={self.n} vs n={other.n}")

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def __eq__(self, other):
        if not isinstance(other, WeylElement):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, frozenset(self.terms.items())))

    def __add__(self, other: "WeylElement") -> "WeylElement":
        self._check(other)
        if not other.terms:
            return self
        out = dict(self.terms)
        for key, c in other.terms.items():
            s = out.get(key)
            if s is None:
                out[key] = c
            else:
                s = s + c
                if s:
                    out[key] = s
                else:
                    del out[key]
        return WeylElement._raw(self.n, out)

    def __neg__(self) -> "WeylElement":
        return WeylElement._raw(self.n, {key: -c for key, c in self.terms.items()})

    def __sub__(self, other: "WeylElement") -> "WeylElement":
        return self + (-other)

    def scale(self, c) -> "WeylElement":
        if isinstance(c, ScalarCoeff):
            return WeylElement(self.n, {key: v * c for key, v in self.terms.items()})
        c = GaussianRational.coerce(c)
        if not c:
            return WeylElement.zero(self.n)
        return WeylElement._raw(self.n, {key: v.scale(c) for key, v in self.terms.items()})

    def shift_h(self, dk: int) -> "WeylElement":
        """Multiply by ``h**dk``; negative ``dk`` must not produce negative powers."""
        if any(k + dk < 0 for k, _ in self.terms):
            raise ValueError("negative power of h")
        return WeylElement._raw(self.n, {(k + dk, m): c for (k, m), c in self.terms.items()})

    def map_coefficients(self, fn) -> "WeylElement":
        return WeylElement(self.n, {key: fn(c) for key, c in self.terms.items()})

    def degrees(self) -> set:
        return {2 * k + mono_degree(m) for k, m in self.terms}

    def is_homogeneous(self, z: int) -> bool:
        return all(2 * k + mono_degree(m) == z for k, m in self.terms)

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: (kv[0][0], mono_degree(kv[0][1]), kv[0][1]))

    def render(self, style: str = "machine") -> str:
        return render_weyl(self, style)

    def __repr__(self):
        return f"WeylElement(n={self.n}, {render_weyl(self)!r})"

    def __str__(self):
        return render_weyl(self, "human")


def weyl_add(a: WeylElement, b: WeylElement) -> WeylElement:
    return a + b


def weyl_scale(a: WeylElement, c) -> WeylElement:
    return a.scale(c)


def ord(terms, n: int | None = None) -> WeylElement:
    """Collect terms so that every ``(h-power, monomial)`` key appears once.

    Accepts a :class:`WeylElement` (returned in canonical form) or an
    iterable of raw ``(k, mono, coeff)`` triples together with ``n``.
    """
    if isinstance(terms, WeylElement):
        return WeylElement(terms.n, dict(terms.terms))
    if n is None:
        raise ValueError("n is required for raw term lists")
    acc: dict = {}
    for k, mono, c in terms:
        mono = tuple(mono)
        if len(mono) != 2 * n:
            raise DimensionError(f"exponent vector {mono} does not have length {2 * n}")
        accumulate(acc.setdefault((k, mono), {}), ScalarCoeff.coerce(c))
    return WeylElement(n, {key: ScalarCoeff(v) for key, v in acc.items()})


def deg_component(a: WeylElement, z: int) -> WeylElement:
    """Sub-sum of the terms with ``2k + |I| == z``."""
    return WeylElement._raw(a.n, {(k, m): c for (k, m), c in a.terms.items() if 2 * k + mono_degree(m) == z})


@lru_cache(maxsize=None)
def circ_pair(r: int, j: int, s: int, k: int) -> tuple:
    """Coefficients ``c_t`` of ``y^r Y^j o y^s Y^k`` for one conjugate pair.

    The product equals ``sum_t c_t (ih/2)^t y^(r+s-t) Y^(k+j-t)`` where
    ``Y`` is the conjugate of ``y``.  Returned as a tuple indexed by ``t``.
    """
    pref = factorial(r) * factorial(j) * factorial(s) * factorial(k)
    out = []
    for t in range(min(r, k) + min(j, s) + 1):
        total = Fraction(0)
        for a in range(max(t - r, t - k, 0), min(j, s, t) + 1):
            den = (factorial(a) * factorial(t - a) * factorial(r - t + a)
                   * factorial(j - a) * factorial(s - a) * factorial(k - t + a))
            total += Fraction((-1) ** a, den)
        out.append(total * pref)
    return tuple(out)


@lru_cache(maxsize=None)
def _circ_mono_table(left: tuple, right: tuple) -> tuple:
    """``left o right`` as a tuple of ``(h_power, mono, GaussianRational)``."""
    n = len(left) // 2
    factors = []
    for i in range(n):
        r, j = left[i], left[i + n]
        s, k = right[i], right[i + n]
        cs = circ_pair(r, j, s, k)
        factors.append([(t, c, r + s - t, k + j - t) for t, c in enumerate(cs) if c])
    out = []
    for combo in itertools.product(*factors):
        t_total = 0
        coeff = Fraction(1)
        mono = [0] * (2 * n)
        for i, (t, c, ey, eY) in enumerate(combo):
            t_total += t
            coeff *= c
            mono[i] = ey
            mono[i + n] = eY
        # (i/2)^T
        g = I_POWERS[t_total % 4] * (coeff * HALF ** t_total)
        out.append((t_total, tuple(mono), g))
    return tuple(out)


def circ_mono(left, right) -> WeylElement:
    left, right = tuple(left), tuple(right)
    if len(left) != len(right) or len(left) % 2:
        raise DimensionError("monomials must have the same even length")
    n = len(left) // 2
    return WeylElement(n, {(t, m): ScalarCoeff.const(g) for t, m, g in _circ_mono_table(left, right)})


def circ(a: WeylElement, b: WeylElement, max_deg: int | None = None) -> WeylElement:
    """The Weyl product ``a o b``; terms of total degree above ``max_deg`` are dropped."""
    a._check(b)
    if not a.terms or not b.terms:
        return WeylElement.zero(a.n)
    acc: dict = {}
    bterms = [(kb, mb, 2 * kb + mono_degree(mb), cb) for (kb, mb), cb in b.terms.items()]
    for (ka, ma), ca in a.terms.items():
        da = 2 * ka + mono_degree(ma)
        for kb, mb, db, cb in bterms:
            if max_deg is not None and da + db > max_deg:
                continue
            prod = ca * cb
            if not prod:
                continue
            for t, m, g in _circ_mono_table(ma, mb):
                target = acc.get((ka + kb + t, m))
                if target is None:
                    target = acc[(ka + kb + t, m)] = {}
                accumulate(target, prod, g)
    return WeylElement(a.n, {key: ScalarCoeff(v) for key, v in acc.items()})


def _oracle_mono(left: tuple, right: tuple, upper) -> dict:
    """Apply the t-fold contraction directly with explicit y-derivatives."""
    dim = len(left)
    pairs = [(i, j, upper[i][j]) for i in range(dim) for j in range(dim) if upper[i][j]]
    sums: dict = {}
    current = {(left, right): 1}
    t = 0
    while current:
        for (ma, mb), c in current.items():
            key = (t, mono_mul(ma, mb))
            sums[key] = sums.get(key, 0) + c
        nxt: dict = {}
        for (ma, mb), c in current.items():
            for i, j, w in pairs:
                if ma[i] and mb[j]:
                    da = ma[:i] + (ma[i] - 1,) + ma[i + 1:]
                    db = mb[:j] + (mb[j] - 1,) + mb[j + 1:]
                    nxt[(da, db)] = nxt.get((da, db), 0) + c * w * ma[i] * mb[j]
        current = {key: c for key, c in nxt.items() if c}
        t += 1
    # (1/t!) (-i h / 2)^t
    return {
        (t, m): I_POWERS[(3 * t) % 4] * Fraction(c, factorial(t) * 2 ** t)
        for (t, m), c in sums.items()
        if c
    }


def circ_oracle(a: WeylElement, b: WeylElement) -> WeylElement:
    """Reference Weyl product evaluated from its defining derivative series.

    Slow; meant as an independent check of :func:`circ`.
    """
    a._check(b)
    upper = omega_upper(a.n)
    acc: dict = {}
    for (ka, ma), ca in a.terms.items():
        for (kb, mb), cb in b.terms.items():
            prod = ca * cb
            for (t, m), g in _oracle_mono(ma, mb, upper).items():
                if g:
                    accumulate(acc.setdefault((ka + kb + t, m), {}), prod, GaussianRational.coerce(g))
    return WeylElement(a.n, {key: ScalarCoeff(v) for key, v in acc.items()})


def sym_tensor_to_poly(l: int, components: dict, n: int, k: int = 0) -> WeylElement:
    """Polynomial form of a symmetric covariant tensor of rank ``l``.

    ``components`` maps sorted 1-based index tuples to coefficients; each
    contributes ``l!/(i_1!...i_2n!) * a`` to the monomial with those counts.
    """
    acc: dict = {}
    for idx, c in components.items():
        idx = tuple(idx)
        if len(idx) != l:
            raise ValueError(f"index tuple {idx} does not have length {l}")
        if any(not 1 <= j <= 2 * n for j in idx):
            raise IndexError(f"index tuple {idx} out of range for n={n}")
        if list(idx) != sorted(idx):
            raise ValueError(f"index tuple {idx} is not in nondecreasing order")
        mono = [0] * (2 * n)
        for j in idx:
            mono[j - 1] += 1
        mult = factorial(l)
        for e in mono:
            mult //= factorial(e)
        accumulate(acc.setdefault((k, tuple(mono)), {}), ScalarCoeff.coerce(c), GaussianRational(mult))
    return WeylElement(n, {key: ScalarCoeff(v) for key, v in acc.items()})


def _render_ymono(k: int, mono: tuple, style: str) -> str:
    sep = "*" if style == "machine" else " "
    parts = []
    if k:
        parts.append("h" if k == 1 else f"h^{k}")
    for j, e in enumerate(mono):
        if e:
            parts.append(f"y[{j + 1}]" if e == 1 else f"y[{j + 1}]^{e}")
    return sep.join(parts)


def render_weyl(a: WeylElement, style: str = "machine") -> str:
    sep = "*" if style == "machine" else " "
    parts = []
    for (k, mono), c in a.sorted_terms():
        ys = _render_ymono(k, mono, style)
        cs = render_expr(c, style)
        if not ys:
            parts.append(cs if len(c.terms) == 1 else f"({cs})")
        elif c == ONE:
            parts.append(ys)
        elif len(c.terms) == 1:
            parts.append(ys if cs == "1" else ("-" + ys if cs == "-1" else cs + sep + ys))
        else:
            parts.append(f"({cs}){sep}{ys}")
    return join_terms(parts)
