"""Canonical contact systems on jet charts.

The order-k contact system is generated by

    theta^a_alpha = d(u^a_alpha) - sum_i u^a_{alpha+1_i} d(x^i),   |alpha| <= k-1,

read on the order-k chart.  Pulling these back along the jet of a section
kills them exactly when the section data is holonomic, and the total Lie
derivative sends the top-grade generators onto the new generators one
order up.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping

from .algebra import Poly, RatFunc
from .errors import ChartMismatchError, IncompletePointError, UnsupportedFormError
from .forms import DiffForm, differential
from .jets import (
    JetChart,
    enumerate_multi_indices,
    index_bump,
    total_derivative,
)
from .pfaffian import PfaffSystem
from .systems import PdeSystem


class ContactSystem:
    """The generators of the canonical contact system on one jet chart."""

    __slots__ = ("chart", "generators", "labels")

    def __init__(self, chart: JetChart, generators, labels):
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "generators", tuple(generators))
        object.__setattr__(self, "labels", tuple(labels))

    def __setattr__(self, name, value):
        raise AttributeError("ContactSystem is immutable")

    def __len__(self):
        return len(self.generators)

    def __iter__(self):
        return iter(self.generators)

    def generator_for(self, a: int, alpha) -> DiffForm:
        alpha = tuple(alpha)
        for label, form in zip(self.labels, self.generators):
            if label == (a, alpha):
                return form
        raise KeyError(f"no generator for fiber {a}, index {alpha}")

    def as_pfaffian(self) -> PfaffSystem:
        return PfaffSystem(self.chart.variables(), self.generators)


def contact_generators(chart: JetChart) -> ContactSystem:
    """All theta^a_alpha with |alpha| <= k-1; empty when k = 0."""
    variables = chart.variables()
    generators = []
    labels = []
    if chart.order >= 1:
        base_index = {name: variables.index(name) for name in chart.base}
        for alpha in enumerate_multi_indices(chart.n, chart.order - 1):
            for a in range(chart.m):
                lead = variables.index(chart.jet_name(a, alpha))
                coeffs = {(lead,): Fraction(1)}
                for i in range(chart.n):
                    up = chart.jet_name(a, index_bump(alpha, i))
                    coeffs[(base_index[chart.base[i]],)] = -Poly.variable(variables, up)
                generators.append(DiffForm(variables, 1, coeffs))
                labels.append((a, alpha))
    return ContactSystem(chart, generators, labels)


def total_lie_derivative(chart: JetChart, omega: DiffForm, i: int,
                         out_chart: JetChart | None = None) -> DiffForm:
    """The derivation determined by L_i(f dg) = (D_i f) dg + f d(D_i g).

    The result lives one order above the input chart.  Applied to the
    contact generator theta^a_alpha it returns theta^a_{alpha+1_i}.
    """
    out = out_chart or chart.raise_order(1)
    out_vars = out.variables()
    if omega.chart != chart.variables():
        raise ChartMismatchError("form does not live on the given chart")

    def d_total(f: RatFunc) -> RatFunc:
        num = f.num
        den = f.den
        dnum = total_derivative(chart, num, i, out_chart=out)
        dden = total_derivative(chart, den, i, out_chart=out)
        n_out = num.on_chart(out_vars)
        d_out = den.on_chart(out_vars)
        return RatFunc(dnum * d_out - n_out * dden, d_out * d_out)

    # d(D_i c) for each coordinate c of the input chart, computed lazily.
    cache: dict[int, DiffForm] = {}

    def d_of_total_coordinate(idx: int) -> DiffForm:
        if idx not in cache:
            c = Poly.variable(chart.variables(), chart.variables()[idx])
            cache[idx] = differential(total_derivative(chart, c, i, out_chart=out))
        return cache[idx]

    result = DiffForm.zero(out_vars, omega.degree)
    for key, coeff in omega.coeffs.items():
        lifted = RatFunc(coeff.num.on_chart(out_vars), coeff.den.on_chart(out_vars))
        head = DiffForm(out_vars, 0, {(): d_total(coeff)})
        tail = [DiffForm.d_coordinate(out_vars, chart.variables()[j]) for j in key]
        term = head
        for t in tail:
            term = term.wedge(t)
        result = result + term
        for pos in range(len(key)):
            factors = [DiffForm(out_vars, 0, {(): lifted})]
            for at, j in enumerate(key):
                if at == pos:
                    factors.append(d_of_total_coordinate(j))
                else:
                    factors.append(DiffForm.d_coordinate(out_vars, chart.variables()[j]))
            term = factors[0]
            for f in factors[1:]:
                term = term.wedge(f)
            result = result + term
    return result


def restrict_contact(system: PdeSystem) -> PfaffSystem:
    """The contact system pulled back to an explicit equation locus.

    Solved coordinates are substituted into the generators; the result
    lives on the chart of the parametric coordinates.
    """
    if not system.is_explicit:
        raise UnsupportedFormError("contact restriction requires an explicit solved form")
    chart = system.chart
    parametric = system.parametric_names()
    solved = dict(system.solved)
    assignment = {name: RatFunc.from_poly(expr.on_chart(parametric))
                  for name, expr in solved.items()}
    generators = []
    for form in contact_generators(chart):
        pulled = form.pullback(assignment, parametric)
        if pulled:
            generators.append(pulled)
    return PfaffSystem(parametric, generators)


def is_holonomic_integral(chart: JetChart, tau: Mapping[str, Poly]) -> bool:
    """True iff the section data tau pulls every contact generator back to zero.

    `tau` assigns every jet coordinate a polynomial in the base variables.
    """
    for name, _, _ in chart.jet_coords():
        if name not in tau:
            raise IncompletePointError(f"assignment is missing jet coordinate {name!r}")
    assignment = {}
    for name, value in tau.items():
        kind = chart.resolve(name)
        if kind[0] != "jet":
            raise ChartMismatchError(f"{name!r} is not a jet coordinate")
        if value.chart != chart.base:
            value = value.on_chart(chart.base)
        assignment[name] = RatFunc.from_poly(value)
    for form in contact_generators(chart):
        if form.pullback(assignment, chart.base):
            return False
    return True
