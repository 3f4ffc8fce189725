import itertools
import random

import pytest

from prolab.algebra import Poly, RatFunc
from prolab.contact import (
    contact_generators,
    is_holonomic_integral,
    restrict_contact,
    total_lie_derivative,
)
from prolab.errors import IncompletePointError, UnsupportedFormError
from prolab.forms import DiffForm
from prolab.jets import JetChart, PolySection, section_jet_polys
from prolab.systems import PdeSystem, is_solution

from conftest import fr, random_poly, random_section


def _theta(chart, a, alpha):
    return contact_generators(chart).generator_for(a, alpha)


def test_generators_darboux_shape():
    chart = JetChart(("x",), ("u",), 1)
    gens = contact_generators(chart)
    assert len(gens) == 1
    variables = chart.variables()
    expected = DiffForm(variables, 1, {
        (variables.index("u"),): fr(1),
        (variables.index("x"),): -Poly.variable(variables, "u[1]")})
    assert gens.generators[0] == expected


def test_generators_order_two():
    chart = JetChart(("x",), ("u",), 2)
    gens = contact_generators(chart)
    assert [str(g) for g in gens] == [
        "-u[1]*d(x) + d(u)", "-u[2]*d(x) + d(u[1])"]


def test_generators_two_base_dirs():
    chart = JetChart(("x", "y"), ("u",), 1)
    gens = contact_generators(chart)
    assert [str(g) for g in gens] == ["-u[1,0]*d(x) - u[0,1]*d(y) + d(u)"]


def test_generator_count_and_zero_order():
    for n, m, k in ((1, 1, 3), (2, 2, 2), (2, 1, 3)):
        chart = JetChart(tuple(f"x{i}" for i in range(n)),
                         tuple(f"u{a}" for a in range(m)), k)
        from math import comb
        assert len(contact_generators(chart)) == m * comb(n + k - 1, k - 1)
    chart0 = JetChart(("x",), ("u",), 0)
    assert len(contact_generators(chart0)) == 0


def test_lie_derivative_examples():
    chart = JetChart(("x",), ("u",), 1)
    up = chart.raise_order(1)
    th0 = _theta(chart, 0, (0,))
    assert total_lie_derivative(chart, th0, 0) == _theta(up, 0, (1,))
    dx = DiffForm.d_coordinate(chart.variables(), "x")
    assert total_lie_derivative(chart, dx, 0).is_zero
    chart2 = JetChart(("x",), ("u",), 2)
    up2 = chart2.raise_order(1)
    assert total_lie_derivative(chart2, _theta(chart2, 0, (1,)), 0) == \
        _theta(up2, 0, (2,))


def test_lie_derivative_generates_next_contact_system():
    """The top-grade generators map exactly onto the new generators above."""
    for n, m, k in itertools.product((1, 2), (1, 2), (1, 2, 3)):
        chart = JetChart(tuple(f"x{i}" for i in range(n)) if n > 1 else ("x",),
                         tuple(f"u{a}" for a in range(m)) if m > 1 else ("u",), k)
        up = chart.raise_order(1)
        gens = contact_generators(chart)
        next_gens = contact_generators(up)
        new = [form for (a, alpha), form in zip(next_gens.labels, next_gens.generators)
               if sum(alpha) == k]
        images = []
        for (a, alpha), form in zip(gens.labels, gens.generators):
            for i in range(n):
                image = total_lie_derivative(chart, form, i)
                assert any(image == g for g in next_gens.generators)
                if sum(alpha) == k - 1:
                    images.append(image)
        for form in new:
            assert any(form == im for im in images)
        for im in images:
            assert any(form == im for form in new)


def test_pullback_of_lower_contact_included_upstairs():
    """Every generator of C_k, re-read one order up, is a generator of C_{k+1}."""
    for n, m, k in itertools.product((1, 2), (1, 2), (1, 2, 3)):
        chart = JetChart(tuple(f"x{i}" for i in range(n)) if n > 1 else ("x",),
                         tuple(f"u{a}" for a in range(m)) if m > 1 else ("u",), k)
        up = chart.raise_order(1)
        upstairs = contact_generators(up)
        for form in contact_generators(chart):
            lifted = form.pullback({}, up.variables())
            assert any(lifted == g for g in upstairs.generators)


def test_restrict_contact_examples():
    chart = JetChart(("x",), ("u",), 1)
    v = chart.variables()
    s = PdeSystem.make(chart, solve={"u[1]": Poly.variable(v, "u")})
    restricted = restrict_contact(s)
    assert restricted.chart == ("x", "u")
    assert [str(g) for g in restricted.generators] == ["-u*d(x) + d(u)"]

    chart2 = JetChart(("x",), ("u",), 2)
    s2 = PdeSystem.make(chart2, solve={"u[2]": Poly.zero(chart2.variables())})
    restricted2 = restrict_contact(s2)
    assert restricted2.chart == ("x", "u", "u[1]")
    assert [str(g) for g in restricted2.generators] == [
        "-u[1]*d(x) + d(u)", "d(u[1])"]

    trivial = PdeSystem.make(chart2, solve={})
    as_is = restrict_contact(trivial)
    assert [str(g) for g in as_is.generators] == \
        [str(g) for g in contact_generators(chart2).generators]


def test_restrict_contact_requires_explicit():
    chart = JetChart(("x",), ("u",), 1)
    v = chart.variables()
    implicit = PdeSystem(chart, [Poly.variable(v, "u[1]") ** 2])
    with pytest.raises(UnsupportedFormError):
        restrict_contact(implicit)


def test_restricted_generators_vanish_on_solutions():
    chart = JetChart(("x",), ("u",), 1)
    v = chart.variables()
    s = PdeSystem.make(chart, solve={"u[1]": Poly.variable(v, "u")})
    restricted = restrict_contact(s)
    # u = c * exp(x) is not polynomial; use the polynomial solution u = 0,
    # and independently check against on-locus sampled tangency below.
    zero_section = {"u": Poly.zero(("x",))}
    assignment = {"u": RatFunc.from_poly(zero_section["u"])}
    for form in restricted.generators:
        assert not form.pullback(assignment, ("x",))
    # A system with genuine polynomial solutions: u[2] = 0.
    chart2 = JetChart(("x",), ("u",), 2)
    s2 = PdeSystem.make(chart2, solve={"u[2]": Poly.zero(chart2.variables())})
    x = Poly.variable(("x",), "x")
    sigma = PolySection(("x",), ("u",), (3 * x + 1,))
    assert is_solution(s2, sigma)
    table = section_jet_polys(sigma, 2)
    sub = {name: RatFunc.from_poly(p) for name, p in table.items()
           if name in restrict_contact(s2).chart}
    for form in restrict_contact(s2).generators:
        assert not form.pullback(sub, ("x",))


def test_holonomic_examples():
    chart = JetChart(("x",), ("u",), 2)
    x = Poly.variable(("x",), "x")
    sigma = PolySection(("x",), ("u",), (x ** 3,))
    tau = section_jet_polys(sigma, 2)
    assert is_holonomic_integral(chart, tau)

    chart1 = JetChart(("x",), ("u",), 1)
    assert not is_holonomic_integral(chart1, {"u": x, "u[1]": Poly.zero(("x",))})
    assert is_holonomic_integral(chart, {
        "u": x * x, "u[1]": 2 * x, "u[2]": Poly.const(("x",), 2)})


def test_holonomic_requires_complete_assignment():
    chart = JetChart(("x",), ("u",), 1)
    with pytest.raises(IncompletePointError):
        is_holonomic_integral(chart, {"u": Poly.zero(("x",))})


def _holonomy_oracle(chart, tau):
    """Direct differentiation, no forms machinery."""
    for name, a, alpha in chart.jet_coords():
        if sum(alpha) >= chart.order:
            continue
        for i in range(chart.n):
            bumped = alpha[:i] + (alpha[i] + 1,) + alpha[i + 1:]
            upper = chart.jet_name(a, bumped)
            if tau[name].partial(chart.base[i]) != tau[upper]:
                return False
    return True


def test_holonomy_characterization_random():
    rng = random.Random(101)
    agree = 0
    for case in range(100):
        n = rng.choice((1, 2))
        m = rng.choice((1, 2))
        k = rng.randint(1, 3)
        sec = random_section(rng, n, m)
        chart = JetChart(sec.base, sec.fiber, k)
        tau = section_jet_polys(sec, k)
        if case % 2 == 1:
            victim = rng.choice([name for name, _, _ in chart.jet_coords()])
            tau = dict(tau)
            tau[victim] = tau[victim] + random_poly(rng, sec.base, degree=2, terms=1) \
                + Poly.const(sec.base, 1)
        got = is_holonomic_integral(chart, tau)
        assert got == _holonomy_oracle(chart, tau)
        agree += 1
    assert agree == 100
