"""Exact arithmetic kernel.

Sparse multivariate polynomials over named variables, rational functions,
and exact linear algebra over the rationals and over the rational-function
field.  All coefficients are `fractions.Fraction`; nothing here rounds.

A polynomial stores a chart (ordered tuple of variable names) and a sparse
term map from exponent tuples to nonzero coefficients:

    x^2*u + 3/2  on chart (x, u)  ->  {(2, 1): 1, (0, 0): 3/2}

Term order is graded lexicographic with respect to the declared variable
order; every printed or enumerated object follows it, which keeps output
byte-deterministic.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Mapping, Sequence, Union

from .errors import (
    ChartMismatchError,
    IncompletePointError,
    SingularPointError,
)

Scalar = Union[int, Fraction]
Exponent = tuple[int, ...]

_ZERO = Fraction(0)
_ONE = Fraction(1)


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


def term_key(exponent: Exponent) -> tuple:
    """Graded-lex sort key: grade first, then the exponent tuple itself."""
    return (sum(exponent), exponent)


class Poly:
    """Immutable sparse polynomial with exact rational coefficients."""

    __slots__ = ("chart", "terms")

    def __init__(self, chart: Sequence[str], terms: Mapping[Exponent, Scalar] | None = None):
        chart = tuple(chart)
        clean: dict[Exponent, Fraction] = {}
        if terms:
            width = len(chart)
            for exp, coeff in terms.items():
                c = as_fraction(coeff)
                if not c:
                    continue
                exp = tuple(exp)
                if len(exp) != width:
                    raise ChartMismatchError(
                        f"exponent {exp} does not match chart of size {width}"
                    )
                clean[exp] = c
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("Poly is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, chart: Sequence[str]) -> "Poly":
        return cls(chart, {})

    @classmethod
    def const(cls, chart: Sequence[str], value: Scalar) -> "Poly":
        c = as_fraction(value)
        if not c:
            return cls(chart, {})
        return cls(chart, {(0,) * len(chart): c})

    @classmethod
    def variable(cls, chart: Sequence[str], name: str) -> "Poly":
        chart = tuple(chart)
        try:
            i = chart.index(name)
        except ValueError:
            raise ChartMismatchError(f"unknown variable {name!r} in chart {chart}") from None
        exp = [0] * len(chart)
        exp[i] = 1
        return cls(chart, {tuple(exp): _ONE})

    # -- basic queries -----------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self.terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return self.terms.get((0,) * len(self.chart), _ZERO)

    def total_degree(self) -> int:
        """Total degree; the zero polynomial reports -1."""
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def degree_in(self, name: str) -> int:
        i = self._index(name)
        if not self.terms:
            return -1
        return max(e[i] for e in self.terms)

    def leading_term(self) -> tuple[Exponent, Fraction]:
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        exp = max(self.terms, key=term_key)
        return exp, self.terms[exp]

    def variables_used(self) -> tuple[str, ...]:
        used = [False] * len(self.chart)
        for exp in self.terms:
            for i, e in enumerate(exp):
                if e:
                    used[i] = True
        return tuple(v for v, u in zip(self.chart, used) if u)

    def _index(self, name: str) -> int:
        try:
            return self.chart.index(name)
        except ValueError:
            raise ChartMismatchError(f"unknown variable {name!r} in chart {self.chart}") from None

    def _check_chart(self, other: "Poly"):
        if self.chart != other.chart:
            raise ChartMismatchError(f"chart mismatch: {self.chart} vs {other.chart}")

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Poly.const(self.chart, other)
        if not isinstance(other, Poly):
            return NotImplemented
        self._check_chart(other)
        out = dict(self.terms)
        for exp, c in other.terms.items():
            s = out.get(exp, _ZERO) + c
            if s:
                out[exp] = s
            else:
                out.pop(exp, None)
        return Poly(self.chart, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.chart, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Poly.const(self.chart, other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = as_fraction(other)
            if not c:
                return Poly.zero(self.chart)
            return Poly(self.chart, {e: v * c for e, v in self.terms.items()})
        if not isinstance(other, Poly):
            return NotImplemented
        self._check_chart(other)
        out: dict[Exponent, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(e, _ZERO) + c1 * c2
                if s:
                    out[e] = s
                else:
                    out.pop(e, None)
        return Poly(self.chart, out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("polynomial powers must be nonnegative integers")
        result = Poly.const(self.chart, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self.chart == other.chart and self.terms == other.terms

    def __hash__(self):
        return hash((self.chart, frozenset(self.terms.items())))

    # -- calculus and evaluation -------------------------------------------

    def partial(self, name: str) -> "Poly":
        """Exact partial derivative with respect to a chart variable."""
        i = self._index(name)
        out: dict[Exponent, Fraction] = {}
        for exp, c in self.terms.items():
            e = exp[i]
            if e == 0:
                continue
            lowered = list(exp)
            lowered[i] = e - 1
            key = tuple(lowered)
            s = out.get(key, _ZERO) + c * e
            if s:
                out[key] = s
            else:
                out.pop(key, None)
        return Poly(self.chart, out)

    def eval(self, point: Mapping[str, Scalar]) -> Fraction:
        """Exact evaluation; every chart variable must be assigned."""
        values = []
        for v in self.chart:
            if v not in point:
                raise IncompletePointError(f"point is missing variable {v!r}")
            values.append(as_fraction(point[v]))
        total = _ZERO
        for exp, c in self.terms.items():
            term = c
            for val, e in zip(values, exp):
                if e:
                    term *= val**e
            total += term
        return total

    def on_chart(self, chart: Sequence[str]) -> "Poly":
        """Re-read this polynomial on a chart containing all its variables."""
        chart = tuple(chart)
        if chart == self.chart:
            return self
        positions = []
        for i, v in enumerate(self.chart):
            if v in chart:
                positions.append(chart.index(v))
            else:
                positions.append(-1)
        out: dict[Exponent, Fraction] = {}
        for exp, c in self.terms.items():
            new = [0] * len(chart)
            for i, e in enumerate(exp):
                if not e:
                    continue
                if positions[i] < 0:
                    raise ChartMismatchError(
                        f"variable {self.chart[i]!r} is absent from chart {chart}"
                    )
                new[positions[i]] = e
            out[tuple(new)] = c
        return Poly(chart, out)

    def substitute(
        self,
        assignment: Mapping[str, Union["Poly", Scalar]],
        chart: Sequence[str],
    ) -> "Poly":
        """Substitute polynomials for variables; unmapped variables carry over.

        The result lives on `chart`, which must contain every unmapped
        variable; every substituted value must already live on `chart`.
        """
        chart = tuple(chart)
        images: list[Poly] = []
        for v in self.chart:
            if v in assignment:
                val = assignment[v]
                if isinstance(val, (int, Fraction)):
                    val = Poly.const(chart, val)
                elif val.chart != chart:
                    val = val.on_chart(chart)
                images.append(val)
            else:
                images.append(Poly.variable(chart, v))
        # Cache image powers across terms; repeated exponents dominate cost.
        powers: list[list[Poly]] = [[Poly.const(chart, 1), img] for img in images]

        def power(i: int, e: int) -> Poly:
            cache = powers[i]
            while len(cache) <= e:
                cache.append(cache[-1] * cache[1])
            return cache[e]

        acc: dict[Exponent, Fraction] = {}
        for exp, c in self.terms.items():
            term = Poly.const(chart, c)
            for i, e in enumerate(exp):
                if e:
                    term = term * power(i, e)
            for key, value in term.terms.items():
                s = acc.get(key, _ZERO) + value
                if s:
                    acc[key] = s
                else:
                    acc.pop(key, None)
        return Poly(chart, acc)

    def eval_ratfunc(
        self,
        assignment: Mapping[str, Union["RatFunc", "Poly", Scalar]],
        chart: Sequence[str],
    ) -> "RatFunc":
        """Like substitute, but values may be rational functions."""
        chart = tuple(chart)
        images: list[RatFunc] = []
        for v in self.chart:
            if v in assignment:
                images.append(RatFunc.coerce(assignment[v], chart))
            else:
                images.append(RatFunc.from_poly(Poly.variable(chart, v)))
        total = RatFunc.from_scalar(chart, 0)
        for exp, c in self.terms.items():
            term = RatFunc.from_scalar(chart, c)
            for img, e in zip(images, exp):
                for _ in range(e):
                    term = term * img
            total = total + term
        return total

    # -- normal forms ------------------------------------------------------

    def content(self) -> Fraction:
        """Positive rational content (gcd of coefficients); 0 for the zero poly."""
        if not self.terms:
            return _ZERO
        num = 0
        den = 1
        for c in self.terms.values():
            num = gcd(num, c.numerator)
            den = den * c.denominator // gcd(den, c.denominator)
        return Fraction(num, den)

    def monomial_gcd(self) -> Exponent:
        if not self.terms:
            return (0,) * len(self.chart)
        mins = None
        for exp in self.terms:
            mins = exp if mins is None else tuple(map(min, mins, exp))
        return mins

    def divide_monomial(self, exponent: Exponent) -> "Poly":
        if not any(exponent):
            return self
        out = {}
        for exp, c in self.terms.items():
            new = tuple(a - b for a, b in zip(exp, exponent))
            if any(e < 0 for e in new):
                raise ValueError("monomial does not divide every term")
            out[new] = c
        return Poly(self.chart, out)

    def primitive(self) -> "Poly":
        """Divide by content and make the leading coefficient positive."""
        if not self.terms:
            return self
        c = self.content()
        if self.leading_term()[1] < 0:
            c = -c
        return self * (1 / c)

    # -- printing ----------------------------------------------------------

    def sorted_terms(self) -> list[tuple[Exponent, Fraction]]:
        return sorted(self.terms.items(), key=lambda t: term_key(t[0]), reverse=True)

    def __str__(self):
        if not self.terms:
            return "0"
        pieces = []
        for exp, c in self.sorted_terms():
            factors = []
            for v, e in zip(self.chart, exp):
                if e == 1:
                    factors.append(v)
                elif e > 1:
                    factors.append(f"{v}^{e}")
            mag = abs(c)
            if not factors:
                body = str(mag)
            elif mag == 1:
                body = "*".join(factors)
            else:
                body = str(mag) + "*" + "*".join(factors)
            sign = "-" if c < 0 else "+"
            pieces.append((sign, body))
        first_sign, first_body = pieces[0]
        text = ("-" if first_sign == "-" else "") + first_body
        for sign, body in pieces[1:]:
            text += f" {sign} {body}"
        return text

    def __repr__(self):
        return f"Poly({self})"


def poly_exact_div(p: Poly, q: Poly) -> Poly | None:
    """Exact division p / q, or None when q does not divide p.

    Long division against the graded-lex leading term of q.  This is not a
    gcd; it only recognizes exact multiples, which suffices for fraction
    normalization.
    """
    if q.is_zero:
        raise ZeroDivisionError("division by the zero polynomial")
    if p.chart != q.chart:
        raise ChartMismatchError("exact division requires a common chart")
    if p.is_zero:
        return p
    qexp, qc = q.leading_term()
    quotient: dict[Exponent, Fraction] = {}
    rem = p
    while not rem.is_zero:
        rexp, rc = rem.leading_term()
        diff = tuple(a - b for a, b in zip(rexp, qexp))
        if any(e < 0 for e in diff):
            return None
        factor = rc / qc
        quotient[diff] = factor
        rem = rem - q * Poly(p.chart, {diff: factor})
    return Poly(p.chart, quotient)


class RatFunc:
    """Quotient of two polynomials on a shared chart.

    Canonical form: a zero numerator forces denominator 1; common monomial
    factors are cancelled; the denominator is primitive (coprime integer
    coefficients, positive leading coefficient); an exact num/den division
    is applied when it succeeds.  Equality is decided by cross-multiplying,
    so unreduced common factors never affect correctness.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly):
        if num.chart != den.chart:
            raise ChartMismatchError("numerator and denominator charts differ")
        if den.is_zero:
            raise ZeroDivisionError("zero denominator")
        num, den = self._normalize(num, den)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, name, value):
        raise AttributeError("RatFunc is immutable")

    @staticmethod
    def _normalize(num: Poly, den: Poly) -> tuple[Poly, Poly]:
        chart = num.chart
        if num.is_zero:
            return num, Poly.const(chart, 1)
        common = tuple(map(min, num.monomial_gcd(), den.monomial_gcd()))
        if any(common):
            num = num.divide_monomial(common)
            den = den.divide_monomial(common)
        c = den.content()
        if den.leading_term()[1] < 0:
            c = -c
        if c != 1:
            inv = 1 / c
            num = num * inv
            den = den * inv
        if den.is_constant():
            return num, Poly.const(chart, 1)
        quotient = poly_exact_div(num, den)
        if quotient is not None:
            return quotient, Poly.const(chart, 1)
        return num, den

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_poly(cls, p: Poly) -> "RatFunc":
        return cls(p, Poly.const(p.chart, 1))

    @classmethod
    def from_scalar(cls, chart: Sequence[str], value: Scalar) -> "RatFunc":
        return cls.from_poly(Poly.const(chart, value))

    @classmethod
    def variable(cls, chart: Sequence[str], name: str) -> "RatFunc":
        return cls.from_poly(Poly.variable(chart, name))

    @classmethod
    def coerce(cls, value, chart: Sequence[str]) -> "RatFunc":
        chart = tuple(chart)
        if isinstance(value, RatFunc):
            if value.chart != chart:
                return cls(value.num.on_chart(chart), value.den.on_chart(chart))
            return value
        if isinstance(value, Poly):
            return cls.from_poly(value if value.chart == chart else value.on_chart(chart))
        return cls.from_scalar(chart, value)

    # -- queries -----------------------------------------------------------

    @property
    def chart(self) -> tuple[str, ...]:
        return self.num.chart

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    def __bool__(self):
        return not self.num.is_zero

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def constant_value(self) -> Fraction:
        return self.num.constant_value() / self.den.constant_value()

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def as_poly(self) -> Poly:
        if not self.is_polynomial():
            raise ValueError(f"{self} is not polynomial")
        return self.num * (1 / self.den.constant_value())

    def complexity(self) -> int:
        return max(self.num.total_degree(), 0) + max(self.den.total_degree(), 0)

    # -- arithmetic --------------------------------------------------------

    def _coerced(self, other) -> "RatFunc | None":
        if isinstance(other, RatFunc):
            if other.chart != self.chart:
                raise ChartMismatchError("rational functions on different charts")
            return other
        if isinstance(other, (Poly, int, Fraction)):
            return RatFunc.coerce(other, self.chart)
        return None

    def __add__(self, other):
        o = self._coerced(other)
        if o is None:
            return NotImplemented
        return RatFunc(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.den)

    def __sub__(self, other):
        o = self._coerced(other)
        if o is None:
            return NotImplemented
        return RatFunc(self.num * o.den - o.num * self.den, self.den * o.den)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerced(other)
        if o is None:
            return NotImplemented
        return RatFunc(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerced(other)
        if o is None:
            return NotImplemented
        if o.num.is_zero:
            raise ZeroDivisionError("division by the zero rational function")
        return RatFunc(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        o = self._coerced(other)
        if o is None:
            return NotImplemented
        return o / self

    def __eq__(self, other):
        if isinstance(other, (Poly, int, Fraction)):
            other = RatFunc.coerce(other, self.chart)
        if not isinstance(other, RatFunc):
            return NotImplemented
        return self.num * other.den == other.num * self.den

    def __hash__(self):
        # Hash only structural data that survives normalization of exact
        # multiples; collisions are resolved by __eq__.
        return hash((self.chart, self.num.is_zero))

    # -- calculus and evaluation -------------------------------------------

    def partial(self, name: str) -> "RatFunc":
        n = self.num.partial(name) * self.den - self.num * self.den.partial(name)
        return RatFunc(n, self.den * self.den)

    def eval(self, point: Mapping[str, Scalar]) -> Fraction:
        d = self.den.eval(point)
        if not d:
            raise SingularPointError(f"denominator {self.den} vanishes at {point}")
        return self.num.eval(point) / d

    def substitute(self, assignment, chart: Sequence[str]) -> "RatFunc":
        n = self.num.eval_ratfunc(assignment, chart)
        d = self.den.eval_ratfunc(assignment, chart)
        if d.is_zero:
            raise ZeroDivisionError("substitution sent the denominator to zero")
        return n / d

    def __str__(self):
        if self.den.is_constant() and self.den.constant_value() == 1:
            return str(self.num)
        return f"({self.num})/({self.den})"

    def __repr__(self):
        return f"RatFunc({self})"


# ---------------------------------------------------------------------------
# Exact linear algebra
# ---------------------------------------------------------------------------


def _entry_complexity(entry) -> int:
    if isinstance(entry, RatFunc):
        return entry.complexity()
    if isinstance(entry, Poly):
        return max(entry.total_degree(), 0)
    return 0


class ExactMatrix:
    """Rectangular matrix over Q or over a rational-function field.

    Entries must be uniform: all Fraction, or all RatFunc on one chart.
    `zero` and `one` carry the field's units so degenerate shapes (zero
    rows) still know their field.
    """

    __slots__ = ("entries", "rows", "cols", "zero", "one")

    def __init__(self, entries: Sequence[Sequence], cols: int | None = None,
                 zero=_ZERO, one=_ONE):
        rows = tuple(tuple(r) for r in entries)
        if rows:
            widths = {len(r) for r in rows}
            if len(widths) != 1:
                raise ValueError("ragged matrix")
            cols = widths.pop()
            if cols is None:
                raise ValueError("column count required")
            sample = rows[0][0] if cols else zero
            if isinstance(sample, RatFunc):
                zero = RatFunc.from_scalar(sample.chart, 0)
                one = RatFunc.from_scalar(sample.chart, 1)
        elif cols is None:
            raise ValueError("column count required for an empty matrix")
        self_set = object.__setattr__
        self_set(self, "entries", rows)
        self_set(self, "rows", len(rows))
        self_set(self, "cols", cols)
        self_set(self, "zero", zero)
        self_set(self, "one", one)

    def __setattr__(self, name, value):
        raise AttributeError("ExactMatrix is immutable")

    @classmethod
    def from_rows(cls, rows, cols=None, zero=_ZERO, one=_ONE):
        return cls(rows, cols=cols, zero=zero, one=one)

    @classmethod
    def identity(cls, n, zero=_ZERO, one=_ONE):
        return cls([[one if i == j else zero for j in range(n)] for i in range(n)],
                   cols=n, zero=zero, one=one)

    def row(self, i):
        return self.entries[i]

    def transpose(self) -> "ExactMatrix":
        return ExactMatrix(
            [[self.entries[r][c] for r in range(self.rows)] for c in range(self.cols)],
            cols=self.rows, zero=self.zero, one=self.one)

    def matmul(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch in matrix product")
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = self.zero
                for t in range(self.cols):
                    a = self.entries[i][t]
                    if not a:
                        continue
                    b = other.entries[t][j]
                    if not b:
                        continue
                    acc = acc + a * b
                row.append(acc)
            out.append(row)
        return ExactMatrix(out, cols=other.cols, zero=self.zero, one=self.one)

    def rref(self) -> tuple[list[list], tuple[int, ...]]:
        """Reduced row echelon form by exact field arithmetic.

        Pivot choice inside each column prefers the entry of least
        complexity (degree sum for rational functions), which keeps
        intermediate expressions small without affecting determinism.
        """
        m = [list(r) for r in self.entries]
        pivots: list[int] = []
        r = 0
        for c in range(self.cols):
            if r >= len(m):
                break
            best = None
            for i in range(r, len(m)):
                if m[i][c]:
                    key = (_entry_complexity(m[i][c]), i)
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                continue
            i = best[1]
            m[r], m[i] = m[i], m[r]
            piv = m[r][c]
            m[r] = [e / piv for e in m[r]]
            for i2 in range(len(m)):
                if i2 != r and m[i2][c]:
                    f = m[i2][c]
                    m[i2] = [a - f * b for a, b in zip(m[i2], m[r])]
            pivots.append(c)
            r += 1
        return m, tuple(pivots)

    def rank(self) -> int:
        return len(self.rref()[1])

    def kernel_basis(self) -> list[tuple]:
        """Exact basis of the right kernel, one vector per free column."""
        reduced, pivots = self.rref()
        pivot_set = set(pivots)
        free = [c for c in range(self.cols) if c not in pivot_set]
        basis = []
        for f in free:
            vec = [self.zero] * self.cols
            vec[f] = self.one
            for r, c in enumerate(pivots):
                entry = reduced[r][f]
                if entry:
                    vec[c] = -entry
            basis.append(tuple(vec))
        return basis

    def inverse(self) -> "ExactMatrix":
        if self.rows != self.cols:
            raise ValueError("only square matrices invert")
        n = self.rows
        aug = ExactMatrix(
            [list(self.entries[i]) + [self.one if j == i else self.zero for j in range(n)]
             for i in range(n)],
            cols=2 * n, zero=self.zero, one=self.one)
        reduced, pivots = aug.rref()
        if tuple(pivots) != tuple(range(n)):
            raise ValueError("matrix is singular")
        return ExactMatrix([r[n:] for r in reduced], cols=n, zero=self.zero, one=self.one)

    def at_point(self, point: Mapping[str, Scalar]) -> "ExactMatrix":
        """Evaluate a symbolic matrix at a rational point."""
        out = []
        for row in self.entries:
            new = []
            for e in row:
                if isinstance(e, (RatFunc, Poly)):
                    new.append(e.eval(point))
                else:
                    new.append(e)
            out.append(new)
        return ExactMatrix(out, cols=self.cols)

    def __str__(self):
        return "[" + "; ".join(", ".join(str(e) for e in row) for row in self.entries) + "]"


def kernel_basis(matrix: ExactMatrix) -> list[tuple]:
    return matrix.kernel_basis()


def generic_rank(matrix: ExactMatrix | Sequence[Sequence], chart: Sequence[str] | None = None) -> int:
    """Rank over the rational-function field via fraction-free elimination.

    Accepts Fraction, Poly, or RatFunc entries.  Rows are cleared of
    denominators (row scaling by nonzero field elements preserves rank),
    then eliminated without division; each step picks the nonzero pivot of
    lowest total degree and renormalizes rows by content and common
    monomials, all of which are units of the function field.
    """
    rows_in = matrix.entries if isinstance(matrix, ExactMatrix) else [tuple(r) for r in matrix]
    if not rows_in:
        return 0
    if chart is None:
        for row in rows_in:
            for e in row:
                if isinstance(e, (Poly, RatFunc)):
                    chart = e.chart
                    break
            if chart is not None:
                break
        if chart is None:
            chart = ()
    chart = tuple(chart)

    def to_poly_row(row):
        rfs = [RatFunc.coerce(e, chart) for e in row]
        scale = Poly.const(chart, 1)
        for rf in rfs:
            if not rf.den.is_constant():
                scale = scale * rf.den
        out = []
        for rf in rfs:
            q = poly_exact_div(scale, rf.den)
            out.append(rf.num * q)
        return out

    work = [to_poly_row(r) for r in rows_in]
    work = [row for row in work if any(not p.is_zero for p in row)]
    ncols = len(rows_in[0])
    active_cols = list(range(ncols))
    rank = 0
    while work and active_cols:
        best = None
        for ri, row in enumerate(work):
            for cj in active_cols:
                p = row[cj]
                if not p.is_zero:
                    key = (p.total_degree(), ri, cj)
                    if best is None or key < best:
                        best = key
        if best is None:
            break
        _, ri, cj = best
        pivot_row = work.pop(ri)
        pivot = pivot_row[cj]
        rank += 1
        new_work = []
        for row in work:
            if row[cj].is_zero:
                new_row = row
            else:
                f = row[cj]
                new_row = [pivot * a - f * b for a, b in zip(row, pivot_row)]
                gcd_mono = None
                nonzero = [p for p in new_row if not p.is_zero]
                if not nonzero:
                    continue
                for p in nonzero:
                    g = p.monomial_gcd()
                    gcd_mono = g if gcd_mono is None else tuple(map(min, gcd_mono, g))
                if any(gcd_mono):
                    new_row = [p.divide_monomial(gcd_mono) if not p.is_zero else p for p in new_row]
                contents = [p.content() for p in nonzero]
                num = 0
                den = 1
                for c in contents:
                    num = gcd(num, c.numerator)
                    den = den * c.denominator // gcd(den, c.denominator)
                c = Fraction(num, den)
                if c != 1:
                    inv = 1 / c
                    new_row = [p * inv for p in new_row]
            new_work.append(new_row)
        work = new_work
        active_cols.remove(cj)
    return rank
