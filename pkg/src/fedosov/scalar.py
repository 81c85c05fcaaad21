"""Exact coefficient ring for phase-space functions.

A :class:`ScalarCoeff` is a polynomial over atoms with Gaussian-rational
constants.  Atoms are plain tuples so that they hash and sort quickly:

* ``(0, i)`` is the coordinate ``x[i]`` (1-based),
* ``(1, name, order)`` is the partial derivative of an opaque function
  ``name`` with multi-index ``order`` (length ``2n``).

Tuple comparison gives the fixed atom order: coordinates first, then
functions by name and derivative order.  A monomial is a sorted tuple of
``(atom, exponent)`` pairs; the empty tuple is the constant monomial.
"""

from __future__ import annotations

import re
from fractions import Fraction
from numbers import Rational

COORD = 0
FUNC = 1

RESERVED_NAMES = frozenset({"i", "x", "h", "y"})


class GaussianRational:
    """Exact number ``re + im*i`` with rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if type(re) is Fraction else Fraction(re)
        self.im = im if type(im) is Fraction else Fraction(im)

    @classmethod
    def coerce(cls, value) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, (int, Rational)):
            return cls(value)
        raise TypeError(f"cannot convert {value!r} to GaussianRational")

    def __add__(self, other):
        other = GaussianRational.coerce(other)
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = GaussianRational.coerce(other)
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return GaussianRational.coerce(other) - self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __mul__(self, other):
        if not isinstance(other, GaussianRational):
            if isinstance(other, (int, Rational)):
                return GaussianRational(self.re * other, self.im * other)
            return NotImplemented
        a, b, c, d = self.re, self.im, other.re, other.im
        if not b and not d:
            return GaussianRational(a * c, 0)
        return GaussianRational(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = GaussianRational.coerce(other)
        norm = other.re * other.re + other.im * other.im
        if not norm:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return self * GaussianRational(other.re / norm, -other.im / norm)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        if isinstance(other, GaussianRational):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Rational)):
            return self.im == 0 and self.re == other
        return NotImplemented

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self):
        return _render_number(self)


ZERO = GaussianRational(0)
ONE = GaussianRational(1)
I = GaussianRational(0, 1)

# powers of i, indexed by exponent mod 4
I_POWERS = (ONE, I, GaussianRational(-1), GaussianRational(0, -1))


def coordinate(i: int) -> tuple:
    return (COORD, i)


def func_deriv(name: str, order) -> tuple:
    return (FUNC, name, tuple(order))


def _mono_mul(m1: tuple, m2: tuple) -> tuple:
    if not m1:
        return m2
    if not m2:
        return m1
    powers = dict(m1)
    for atom, e in m2:
        powers[atom] = powers.get(atom, 0) + e
    return tuple(sorted(powers.items()))


def _mono_degree(m: tuple) -> int:
    return sum(e for _, e in m)


def _mono_sort_key(m: tuple):
    # graded lexicographic over the atom order
    return (_mono_degree(m), m)


class ScalarCoeff:
    """Canonical sparse polynomial over coordinate and function atoms.

    Instances are immutable; every constructor drops zero coefficients so
    that structural equality is algebraic equality.
    """

    __slots__ = ("terms", "_hash")

    def __init__(self, terms=None):
        if terms:
            self.terms = {m: c for m, c in terms.items() if c}
        else:
            self.terms = {}
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict) -> "ScalarCoeff":
        # terms already free of zeros
        obj = cls.__new__(cls)
        obj.terms = terms
        obj._hash = None
        return obj

    @classmethod
    def const(cls, value) -> "ScalarCoeff":
        value = GaussianRational.coerce(value)
        return cls({(): value}) if value else cls()

    @classmethod
    def coord(cls, i: int) -> "ScalarCoeff":
        if i < 1:
            raise ValueError(f"coordinate index must be positive, got {i}")
        return cls._raw({((coordinate(i), 1),): ONE})

    @classmethod
    def func(cls, name: str, order) -> "ScalarCoeff":
        order = tuple(int(o) for o in order)
        if any(o < 0 for o in order):
            raise ValueError(f"negative derivative order {order}")
        return cls._raw({((func_deriv(name, order), 1),): ONE})

    @classmethod
    def coerce(cls, value) -> "ScalarCoeff":
        if isinstance(value, ScalarCoeff):
            return value
        return cls.const(value)

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and () in self.terms)

    def constant_term(self) -> GaussianRational:
        return self.terms.get((), ZERO)

    def atoms(self) -> set:
        return {atom for m in self.terms for atom, _ in m}

    def __eq__(self, other):
        if isinstance(other, ScalarCoeff):
            return self.terms == other.terms
        if isinstance(other, (int, Rational, GaussianRational)):
            return self == ScalarCoeff.const(other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __add__(self, other):
        other = ScalarCoeff.coerce(other)
        if not other.terms:
            return self
        if not self.terms:
            return other
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m)
            if s is None:
                out[m] = c
            else:
                s = s + c
                if s:
                    out[m] = s
                else:
                    del out[m]
        return ScalarCoeff._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return ScalarCoeff._raw({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-ScalarCoeff.coerce(other))

    def __rsub__(self, other):
        return ScalarCoeff.coerce(other) - self

    def scale(self, factor) -> "ScalarCoeff":
        factor = GaussianRational.coerce(factor)
        if not factor:
            return ScalarCoeff()
        return ScalarCoeff._raw({m: c * factor for m, c in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, ScalarCoeff):
            if isinstance(other, (int, Rational, GaussianRational)):
                return self.scale(other)
            return NotImplemented
        if not self.terms or not other.terms:
            return ScalarCoeff()
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                c = c1 * c2
                s = out.get(m)
                out[m] = c if s is None else s + c
        return ScalarCoeff(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = GaussianRational.coerce(other)
        return self.scale(ONE / other)

    def __pow__(self, e: int):
        if not isinstance(e, int) or e < 0:
            raise ValueError("exponent must be a nonnegative integer")
        result = ScalarCoeff.const(1)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def differentiate(self, i: int, n: int | None = None) -> "ScalarCoeff":
        return differentiate(self, i, n)

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda mc: _mono_sort_key(mc[0]))

    def __repr__(self):
        return f"ScalarCoeff({render_expr(self, 'machine')!r})"

    def __str__(self):
        return render_expr(self, "human")


def accumulate(target: dict, a: ScalarCoeff, factor: GaussianRational = ONE) -> None:
    """Add ``factor * a`` into the raw term map ``target`` in place.

    Zero coefficients may be left in ``target``; build with ``ScalarCoeff(target)``.
    """
    if factor == ONE:
        for m, c in a.terms.items():
            s = target.get(m)
            target[m] = c if s is None else s + c
    else:
        for m, c in a.terms.items():
            c = c * factor
            s = target.get(m)
            target[m] = c if s is None else s + c


def scalar_add(a: ScalarCoeff, b: ScalarCoeff) -> ScalarCoeff:
    return a + b


def scalar_mul(a: ScalarCoeff, b: ScalarCoeff) -> ScalarCoeff:
    return a * b


def scalar_is_zero(a: ScalarCoeff) -> bool:
    return a.is_zero()


def _diff_atom(atom: tuple, i: int):
    """Return the derivative of a single atom as (constant, atom-or-None)."""
    if atom[0] == COORD:
        return (1, None) if atom[1] == i else (0, None)
    _, name, order = atom
    if i > len(order):
        raise IndexError(f"coordinate index {i} out of range for {name}{order}")
    bumped = list(order)
    bumped[i - 1] += 1
    return (1, func_deriv(name, bumped))


def differentiate(a: ScalarCoeff, i: int, n: int | None = None) -> ScalarCoeff:
    """Partial derivative with respect to ``x[i]`` (1-based).

    When the half-dimension ``n`` is given, ``i`` is checked against ``2n``.
    """
    if i < 1 or (n is not None and i > 2 * n):
        raise IndexError(f"coordinate index {i} out of range")
    out: dict = {}
    for m, c in a.terms.items():
        for pos, (atom, e) in enumerate(m):
            mult, new_atom = _diff_atom(atom, i)
            if not mult:
                continue
            powers = dict(m)
            if e == 1:
                del powers[atom]
            else:
                powers[atom] = e - 1
            if new_atom is not None:
                powers[new_atom] = powers.get(new_atom, 0) + 1
            key = tuple(sorted(powers.items()))
            term = c * (e * mult)
            s = out.get(key)
            out[key] = term if s is None else s + term
    return ScalarCoeff(out)


# ---------------------------------------------------------------------------
# parsing

class ParseError(ValueError):
    def __init__(self, message: str, pos: int, source: str = ""):
        self.pos = pos
        self.source = source
        super().__init__(f"{message} at position {pos}")


_TOKEN_RE = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\S))?")


def _tokenize(source: str):
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m.group(1) is not None:
            tokens.append(("num", int(m.group(1)), m.start(1)))
        elif m.group(2) is not None:
            tokens.append(("ident", m.group(2), m.start(2)))
        elif m.group(3) is not None:
            ch = m.group(3)
            if ch not in "+-*/^()[],":
                raise ParseError(f"unexpected character {ch!r}", m.start(3), source)
            tokens.append(("op", ch, m.start(3)))
        else:
            break
        pos = m.end()
    tokens.append(("end", None, len(source)))
    return tokens


class _Parser:
    def __init__(self, source: str, n: int | None):
        self.source = source
        self.tokens = _tokenize(source)
        self.pos = 0
        self.n = n
        self.max_coord = 0

    def peek(self, value=None):
        kind, val, _ = self.tokens[self.pos]
        if value is None:
            return kind, val
        return kind == "op" and val == value

    def error(self, message):
        raise ParseError(message, self.tokens[self.pos][2], self.source)

    def expect(self, value):
        if not self.peek(value):
            got = self.tokens[self.pos][1]
            self.error(f"expected {value!r}, got {got!r}")
        self.pos += 1

    def natural(self) -> int:
        kind, val = self.peek()
        if kind != "num":
            self.error("expected a nonnegative integer literal")
        self.pos += 1
        return val

    def parse(self) -> ScalarCoeff:
        if self.peek()[0] == "end":
            self.error("empty expression")
        value = self.expr()
        if self.peek()[0] != "end":
            self.error(f"unexpected token {self.tokens[self.pos][1]!r}")
        if self.n is not None and self.max_coord > 2 * self.n:
            raise ParseError(f"coordinate x[{self.max_coord}] exceeds 2n = {2 * self.n}", 0, self.source)
        return value

    def expr(self) -> ScalarCoeff:
        value = self.term()
        while self.peek("+") or self.peek("-"):
            op = self.tokens[self.pos][1]
            self.pos += 1
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> ScalarCoeff:
        value = self.factor()
        while self.peek("*"):
            self.pos += 1
            value = value * self.factor()
        return value

    def factor(self) -> ScalarCoeff:
        if self.peek("-"):
            # unary minus binds looser than '^': -x^2 == -(x^2)
            self.pos += 1
            return -self.factor()
        value = self.base()
        if self.peek("^"):
            self.pos += 1
            value = value ** self.natural()
        return value

    def base(self) -> ScalarCoeff:
        kind, val = self.peek()
        if kind == "num":
            num = self.natural()
            if self.peek("/"):
                self.pos += 1
                den = self.natural()
                if den == 0:
                    self.pos -= 1
                    self.error("zero denominator")
                return ScalarCoeff.const(Fraction(num, den))
            return ScalarCoeff.const(num)
        if self.peek("("):
            self.pos += 1
            value = self.expr()
            self.expect(")")
            return value
        if kind == "ident":
            if val == "i":
                self.pos += 1
                return ScalarCoeff.const(I)
            if val == "x":
                return ScalarCoeff.coord(self.coord())
            if val in RESERVED_NAMES:
                self.error(f"{val!r} is reserved")
            return self.func()
        if kind == "end":
            self.error("unexpected end of input")
        self.error(f"unexpected token {val!r}")

    def coord(self) -> int:
        self.pos += 1
        self.expect("[")
        idx = self.natural()
        if idx < 1:
            self.pos -= 1
            self.error("coordinate index must be positive")
        self.expect("]")
        self.max_coord = max(self.max_coord, idx)
        return idx

    def func(self) -> ScalarCoeff:
        name = self.tokens[self.pos][1]
        start = self.tokens[self.pos][2]
        self.pos += 1
        order = None
        if self.peek("^"):
            self.pos += 1
            self.expect("(")
            order = [self.natural()]
            while self.peek(","):
                self.pos += 1
                order.append(self.natural())
            self.expect(")")
        self.expect("(")
        args = [self.arg_coord()]
        while self.peek(","):
            self.pos += 1
            args.append(self.arg_coord())
        self.expect(")")
        if args != list(range(1, len(args) + 1)) or len(args) % 2:
            raise ParseError(f"arguments of {name} must be x[1],...,x[2n] in order", start, self.source)
        if self.n is None:
            self.n = len(args) // 2
        elif len(args) != 2 * self.n:
            raise ParseError(f"{name} takes {2 * self.n} arguments, got {len(args)}", start, self.source)
        if order is None:
            order = [0] * len(args)
        elif len(order) != len(args):
            raise ParseError(f"derivative order of {name} must have {len(args)} entries", start, self.source)
        return ScalarCoeff.func(name, order)

    def arg_coord(self) -> int:
        kind, val = self.peek()
        if kind != "ident" or val != "x":
            self.error("function arguments must be coordinates x[k]")
        return self.coord()


def parse_expr(source: str, n: int | None = None) -> ScalarCoeff:
    """Parse an expression in the coefficient grammar.

    ``n`` is the half-dimension; when omitted it is inferred from the
    argument lists of opaque functions.
    """
    return _Parser(source, n).parse()


# ---------------------------------------------------------------------------
# rendering

def _render_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _render_number(c: GaussianRational) -> str:
    if not c.im:
        return _render_rational(c.re)
    if not c.re:
        if c.im == 1:
            return "i"
        if c.im == -1:
            return "-i"
        return f"{_render_rational(c.im)}*i"
    im = c.im
    sign = "-" if im < 0 else "+"
    mag = abs(im)
    im_s = "i" if mag == 1 else f"{_render_rational(mag)}*i"
    return f"({_render_rational(c.re)}{sign}{im_s})"


def _render_atom(atom: tuple, style: str) -> str:
    if atom[0] == COORD:
        return f"x[{atom[1]}]"
    _, name, order = atom
    head = name if not any(order) else f"{name}^({','.join(map(str, order))})"
    if style == "human":
        return head
    args = ",".join(f"x[{k}]" for k in range(1, len(order) + 1))
    return f"{head}({args})"


def render_monomial(m: tuple, style: str = "machine") -> str:
    sep = "*" if style == "machine" else " "
    parts = []
    for atom, e in m:
        s = _render_atom(atom, style)
        parts.append(s if e == 1 else f"{s}^{e}")
    return sep.join(parts)


def render_term(c: GaussianRational, mono: str, style: str = "machine") -> str:
    """Render ``c * mono`` where ``mono`` is an already rendered product (may be empty)."""
    sep = "*" if style == "machine" else " "
    if not mono:
        return _render_number(c)
    if c == ONE:
        return mono
    if c == -1:
        return "-" + mono
    return _render_number(c) + sep + mono


def join_terms(parts) -> str:
    if not parts:
        return "0"
    out = parts[0]
    for p in parts[1:]:
        if p.startswith("-"):
            out += " - " + p[1:]
        else:
            out += " + " + p
    return out


def render_expr(a: ScalarCoeff, style: str = "machine") -> str:
    """Render a coefficient; ``machine`` output parses back with :func:`parse_expr`."""
    if style not in ("human", "machine"):
        raise ValueError(f"unknown style {style!r}")
    return join_terms([render_term(c, render_monomial(m, style), style) for m, c in a.sorted_terms()])
