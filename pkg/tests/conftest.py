"""Shared builders for the test suite.

Everything randomized is derived from explicit seeds so failures are
reproducible from the test name alone.
"""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from prolab.algebra import Poly
from prolab.jets import JetChart, JetOfMap, PolySection
from prolab.systems import PdeSystem


def fr(a, b=1) -> Fraction:
    return Fraction(a, b)


def random_fraction(rng: random.Random, span: int = 3) -> Fraction:
    return Fraction(rng.randint(-span, span), rng.choice((1, 1, 2, 3)))


def random_poly(rng: random.Random, chart, degree: int = 2, terms: int = 3) -> Poly:
    chart = tuple(chart)
    table = {}
    for _ in range(terms):
        exp = [0] * len(chart)
        budget = rng.randint(0, degree)
        for _ in range(budget):
            exp[rng.randrange(len(chart))] += 1
        coeff = random_fraction(rng)
        if coeff:
            table[tuple(exp)] = table.get(tuple(exp), Fraction(0)) + coeff
    return Poly(chart, {e: c for e, c in table.items() if c})


def random_section(rng: random.Random, n: int, m: int, degree: int = 3) -> PolySection:
    base = tuple(f"x{i+1}" for i in range(n)) if n > 1 else ("x",)
    fiber = tuple(f"u{a+1}" for a in range(m)) if m > 1 else ("u",)
    comps = tuple(random_poly(rng, base, degree=degree, terms=4) for _ in range(m))
    return PolySection(base, fiber, comps)


def random_jet(rng: random.Random, n: int, order: int) -> JetOfMap:
    source = tuple(random_fraction(rng) for _ in range(n))
    target = tuple(random_fraction(rng) for _ in range(n))
    while True:
        components = []
        for i in range(n):
            table = {}
            for grade in range(1, order + 1):
                for beta in _grade_indices(n, grade):
                    if rng.random() < 0.6:
                        value = random_fraction(rng, span=2)
                        if value:
                            table[beta] = value
            components.append(table)
        try:
            return JetOfMap(order, source, target, components)
        except ValueError:
            continue


def _grade_indices(n, grade):
    if n == 1:
        return [(grade,)]
    return [(i, grade - i) for i in range(grade, -1, -1)]


@pytest.fixture
def laplace() -> PdeSystem:
    chart = JetChart(("x", "y"), ("u",), 2)
    return PdeSystem.make(chart, solve={
        "u[2,0]": -Poly.variable(chart.variables(), "u[0,2]")})


@pytest.fixture
def wave() -> PdeSystem:
    chart = JetChart(("x", "y"), ("u",), 2)
    return PdeSystem.make(chart, solve={
        "u[2,0]": Poly.variable(chart.variables(), "u[0,2]")})
