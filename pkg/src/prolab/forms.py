"""Differential forms with exact rational-function coefficients.

A form stores its chart, its degree p, and a sparse map from strictly
increasing p-tuples of coordinate indices to coefficients.  Antisymmetry is
canonicalized at construction (indices sorted, sign absorbed, repeated
indices dropped), so structural equality is form equality.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Sequence, Union

from .algebra import Poly, RatFunc
from .errors import ChartMismatchError

Coefficient = Union[RatFunc, Poly, Fraction, int]


def _sort_sign(indices: Sequence[int]) -> tuple[tuple[int, ...], int]:
    idx = list(indices)
    sign = 1
    for i in range(1, len(idx)):
        j = i
        while j > 0 and idx[j - 1] > idx[j]:
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            sign = -sign
            j -= 1
    for i in range(1, len(idx)):
        if idx[i - 1] == idx[i]:
            return tuple(idx), 0
    return tuple(idx), sign


class DiffForm:
    """Exterior form of fixed degree on a named coordinate chart."""

    __slots__ = ("chart", "degree", "coeffs")

    def __init__(self, chart: Sequence[str], degree: int,
                 coeffs: Mapping[Sequence[int], Coefficient] | None = None):
        chart = tuple(chart)
        if degree < 0:
            raise ValueError("form degree must be nonnegative")
        clean: dict[tuple[int, ...], RatFunc] = {}
        if coeffs:
            for key, value in coeffs.items():
                key = tuple(key)
                if len(key) != degree:
                    raise ValueError(f"index tuple {key} does not match degree {degree}")
                for i in key:
                    if not 0 <= i < len(chart):
                        raise ChartMismatchError(f"coordinate index {i} outside chart")
                sorted_key, sign = _sort_sign(key)
                if sign == 0:
                    continue
                rf = RatFunc.coerce(value, chart)
                if sign < 0:
                    rf = -rf
                if sorted_key in clean:
                    rf = clean[sorted_key] + rf
                if rf:
                    clean[sorted_key] = rf
                else:
                    clean.pop(sorted_key, None)
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "coeffs", clean)

    def __setattr__(self, name, value):
        raise AttributeError("DiffForm is immutable")

    # -- constructors --------------------------------------------------------

    @classmethod
    def zero(cls, chart: Sequence[str], degree: int = 1) -> "DiffForm":
        return cls(chart, degree, {})

    @classmethod
    def d_coordinate(cls, chart: Sequence[str], name: str) -> "DiffForm":
        chart = tuple(chart)
        try:
            i = chart.index(name)
        except ValueError:
            raise ChartMismatchError(f"unknown coordinate {name!r}") from None
        return cls(chart, 1, {(i,): Fraction(1)})

    # -- queries --------------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def coefficient(self, key: Sequence[int]) -> RatFunc:
        skey, sign = _sort_sign(tuple(key))
        base = self.coeffs.get(skey)
        if base is None or sign == 0:
            return RatFunc.from_scalar(self.chart, 0)
        return base if sign > 0 else -base

    def _check(self, other: "DiffForm"):
        if self.chart != other.chart:
            raise ChartMismatchError("forms live on different charts")
        if self.degree != other.degree:
            raise ValueError(f"cannot add a {self.degree}-form and a {other.degree}-form")

    # -- algebra ---------------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, DiffForm):
            return NotImplemented
        self._check(other)
        out = dict(self.coeffs)
        for key, value in other.coeffs.items():
            s = out.get(key)
            s = value if s is None else s + value
            if s:
                out[key] = s
            else:
                out.pop(key, None)
        return DiffForm(self.chart, self.degree, out)

    def __neg__(self):
        return DiffForm(self.chart, self.degree,
                        {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other):
        if not isinstance(other, DiffForm):
            return NotImplemented
        return self + (-other)

    def __mul__(self, scalar):
        if isinstance(scalar, DiffForm):
            return NotImplemented
        rf = RatFunc.coerce(scalar, self.chart)
        if not rf:
            return DiffForm.zero(self.chart, self.degree)
        return DiffForm(self.chart, self.degree,
                        {k: v * rf for k, v in self.coeffs.items()})

    __rmul__ = __mul__

    def wedge(self, other: "DiffForm") -> "DiffForm":
        if self.chart != other.chart:
            raise ChartMismatchError("forms live on different charts")
        degree = self.degree + other.degree
        out: dict[tuple[int, ...], RatFunc] = {}
        for k1, v1 in self.coeffs.items():
            for k2, v2 in other.coeffs.items():
                key, sign = _sort_sign(k1 + k2)
                if sign == 0:
                    continue
                term = v1 * v2
                if sign < 0:
                    term = -term
                s = out.get(key)
                s = term if s is None else s + term
                if s:
                    out[key] = s
                else:
                    out.pop(key, None)
        return DiffForm(self.chart, degree, out)

    def __eq__(self, other):
        if not isinstance(other, DiffForm):
            return NotImplemented
        if self.chart != other.chart or self.degree != other.degree:
            return False
        if set(self.coeffs) != set(other.coeffs):
            return False
        return all(self.coeffs[k] == other.coeffs[k] for k in self.coeffs)

    def __hash__(self):
        return hash((self.chart, self.degree, frozenset(self.coeffs)))

    # -- calculus ----------------------------------------------------------------

    def exterior_derivative(self) -> "DiffForm":
        """d(omega); satisfies d(d(omega)) = 0 exactly."""
        out: dict[tuple[int, ...], RatFunc] = {}
        for key, value in self.coeffs.items():
            for i, name in enumerate(self.chart):
                dv = value.partial(name)
                if not dv:
                    continue
                new_key, sign = _sort_sign((i,) + key)
                if sign == 0:
                    continue
                term = dv if sign > 0 else -dv
                s = out.get(new_key)
                s = term if s is None else s + term
                if s:
                    out[new_key] = s
                else:
                    out.pop(new_key, None)
        return DiffForm(self.chart, self.degree + 1, out)

    def pullback(self, assignment: Mapping[str, Union[RatFunc, Poly]],
                 chart: Sequence[str]) -> "DiffForm":
        """Substitute coordinates; unmapped coordinates pass through.

        Every mapped coordinate contributes d(expression); every unmapped
        coordinate must be a coordinate of the output chart.
        """
        chart = tuple(chart)
        pulled_d: list[DiffForm] = []
        for name in self.chart:
            if name in assignment:
                expr = RatFunc.coerce(assignment[name], chart)
                pulled_d.append(differential(expr))
            else:
                pulled_d.append(DiffForm.d_coordinate(chart, name))
        result = DiffForm.zero(chart, self.degree)
        for key, value in self.coeffs.items():
            coeff = value.substitute(assignment, chart)
            if not coeff:
                continue
            term = DiffForm(chart, 0, {(): coeff})
            for i in key:
                term = term.wedge(pulled_d[i])
            result = result + term
        return result

    def at_point(self, point: Mapping[str, object]) -> dict[tuple[int, ...], Fraction]:
        return {k: v.eval(point) for k, v in self.coeffs.items()}

    # -- printing -----------------------------------------------------------------

    def __str__(self):
        if not self.coeffs:
            return "0"
        pieces = []
        for key in sorted(self.coeffs):
            value = self.coeffs[key]
            wedge = "^".join(f"d({self.chart[i]})" for i in key) if key else "1"
            text = str(value)
            if text == "1":
                body = wedge
            elif text == "-1":
                body = f"-{wedge}"
            elif ("+" in text[1:] or "-" in text[1:]) and not text.startswith("("):
                body = f"({text})*{wedge}"
            else:
                body = f"{text}*{wedge}"
            pieces.append(body)
        out = pieces[0]
        for p in pieces[1:]:
            out += " - " + p[1:] if p.startswith("-") else " + " + p
        return out

    def __repr__(self):
        return f"DiffForm({self})"


def differential(f: Union[RatFunc, Poly]) -> DiffForm:
    """The 1-form df."""
    if isinstance(f, Poly):
        f = RatFunc.from_poly(f)
    out = {}
    for i, name in enumerate(f.chart):
        df = f.partial(name)
        if df:
            out[(i,)] = df
    return DiffForm(f.chart, 1, out)


def exterior_derivative(form: DiffForm) -> DiffForm:
    return form.exterior_derivative()


def wedge_all(forms: Sequence[DiffForm]) -> DiffForm:
    if not forms:
        raise ValueError("empty wedge")
    out = forms[0]
    for f in forms[1:]:
        out = out.wedge(f)
    return out
