import random

import pytest

from prolab.algebra import Poly
from prolab.errors import (
    ChartMismatchError,
    CompositionMismatchError,
    InverseVerificationError,
    OrderMismatchError,
)
from prolab.jets import (
    InvertibleMap,
    JetChart,
    JetOfMap,
    PolyMap,
    PolySection,
    conjugate_jet,
    enumerate_multi_indices,
    holonomic_jet,
    identity_jet,
    jet_compose,
    jet_dimension,
    jet_invert,
    jet_to_polymap,
    total_derivative,
)

from conftest import fr, random_jet, random_section


def test_jet_dimension_examples():
    assert jet_dimension(JetChart(("x",), ("u",), 1)) == 3
    assert jet_dimension(JetChart(("x", "y"), ("u",), 2)) == 8
    for n, m in ((1, 1), (2, 3), (3, 2)):
        chart = JetChart(tuple(f"x{i}" for i in range(n)),
                         tuple(f"u{a}" for a in range(m)), 0)
        assert jet_dimension(chart) == n + m


def test_enumerate_multi_indices():
    assert enumerate_multi_indices(1, 2) == ((0,), (1,), (2,))
    assert enumerate_multi_indices(2, 1) == ((0, 0), (1, 0), (0, 1))
    assert len(enumerate_multi_indices(3, 2)) == 10


def test_total_derivative_examples():
    chart = JetChart(("x",), ("u",), 1)
    out = chart.raise_order(1)
    assert total_derivative(chart, chart.var("u[1]"), 0) == out.var("u[2]")
    assert total_derivative(chart, chart.var("x") * chart.var("u"), 0) == \
        out.var("u") + out.var("x") * out.var("u[1]")
    chart2 = JetChart(("x", "y"), ("u",), 2)
    out2 = chart2.raise_order(1)
    f = chart2.var("u[2,0]") + chart2.var("u[0,2]")
    assert total_derivative(chart2, f, 0) == out2.var("u[3,0]") + out2.var("u[1,2]")


def test_total_derivatives_commute():
    rng = random.Random(3)
    chart = JetChart(("x", "y"), ("u", "v"), 2)
    big = chart.raise_order(2)
    variables = chart.variables()
    for _ in range(15):
        table = {}
        for _ in range(4):
            exp = [0] * len(variables)
            for _ in range(rng.randint(0, 2)):
                exp[rng.randrange(len(variables))] += 1
            table[tuple(exp)] = fr(rng.randint(-3, 3))
        f = Poly(variables, {e: c for e, c in table.items() if c})
        f = f.on_chart(big.variables())
        dxy = total_derivative(big, total_derivative(big, f, 0, big), 1, big)
        dyx = total_derivative(big, total_derivative(big, f, 1, big), 0, big)
        assert dxy == dyx


def test_holonomic_jet_examples():
    x = Poly.variable(("x",), "x")
    sec = PolySection(("x",), ("u",), (x * x,))
    jet = holonomic_jet(sec, {"x": 1}, 2)
    assert jet == {"x": 1, "u": 1, "u[1]": 2, "u[2]": 2}
    const = PolySection(("x",), ("u",), (Poly.const(("x",), 5),))
    jet_c = holonomic_jet(const, {"x": 3}, 3)
    assert jet_c["u"] == 5 and jet_c["u[1]"] == 0 and jet_c["u[3]"] == 0
    lin = PolySection(("x",), ("u",), (x,))
    assert holonomic_jet(lin, {"x": 0}, 3) == {
        "x": 0, "u": 0, "u[1]": 1, "u[2]": 0, "u[3]": 0}


def test_holonomic_jet_is_section_of_source():
    rng = random.Random(9)
    for _ in range(10):
        sec = random_section(rng, 2, 1)
        point = {"x1": fr(rng.randint(-2, 2)), "x2": fr(rng.randint(-2, 2))}
        jet = holonomic_jet(sec, point, 2)
        assert jet["x1"] == point["x1"] and jet["x2"] == point["x2"]


def test_jet_compose_example():
    A = JetOfMap(2, (0,), (1,), [{(1,): fr(1)}])            # x -> x + 1 at 0
    B = JetOfMap(2, (1,), (1,), [{(1,): fr(2), (2,): fr(1)}])  # y -> y^2 at 1
    C = jet_compose(B, A)
    assert C.source == (fr(0),) and C.target == (fr(1),)
    assert C.components[0] == {(1,): fr(2), (2,): fr(1)}


def test_jet_compose_linear_example():
    A = JetOfMap(3, (0,), (0,), [{(1,): fr(2)}])
    B = JetOfMap(3, (0,), (5,), [{(1,): fr(1)}])
    C = jet_compose(B, A)
    assert C.target == (fr(5),)
    assert C.components[0] == {(1,): fr(2)}


def test_jet_compose_mismatches():
    A = JetOfMap(2, (0,), (1,), [{(1,): fr(1)}])
    B = JetOfMap(2, (99,), (0,), [{(1,): fr(1)}])
    with pytest.raises(CompositionMismatchError):
        jet_compose(B, A)
    C = JetOfMap(3, (1,), (0,), [{(1,): fr(1)}])
    with pytest.raises(OrderMismatchError):
        jet_compose(C, A)


def test_jet_invert_examples():
    j = JetOfMap(2, (0,), (0,), [{(1,): fr(1), (2,): fr(1)}])   # x + x^2
    inv = jet_invert(j)
    assert inv.components[0] == {(1,): fr(1), (2,): fr(-1)}
    ident = identity_jet((fr(1, 2),), 3)
    assert jet_invert(ident) == ident
    lin = JetOfMap(1, (0,), (0,), [{(1,): fr(3)}])
    assert jet_invert(lin).components[0] == {(1,): fr(1, 3)}


def test_conjugate_jet_examples():
    names = ("x",)
    x = Poly.variable(names, "x")
    double = InvertibleMap(PolyMap(names, (2 * x,)),
                           PolyMap(names, (fr(1, 2) * x,)))
    A = JetOfMap(1, (0,), (1,), [{(1,): fr(1)}])       # x -> x + 1
    conj = conjugate_jet(double, A)
    assert conj.source == (fr(0),) and conj.target == (fr(2),)
    assert conj.components[0] == {(1,): fr(1)}
    ident_map = InvertibleMap(PolyMap.identity(names), PolyMap.identity(names))
    assert conjugate_jet(ident_map, A) == A
    curve = InvertibleMap(PolyMap(names, (x + x * x,)), PolyMap(names, (x - x * x,)))
    ident_jet = identity_jet((0,), 1)
    assert conjugate_jet(curve, ident_jet) == identity_jet((0,), 1)


def test_conjugate_jet_rejects_bad_inverse():
    names = ("x",)
    x = Poly.variable(names, "x")
    bad = InvertibleMap(PolyMap(names, (x + x * x,)), PolyMap(names, (x,)))
    with pytest.raises(InverseVerificationError):
        conjugate_jet(bad, JetOfMap(2, (0,), (0,), [{(1,): fr(1)}]))


def _oracle_compose(outer: JetOfMap, inner: JetOfMap) -> JetOfMap:
    """Independent route: full polynomial composition, then one truncation."""
    names = tuple(f"t{i}" for i in range(inner.n))
    p_outer = jet_to_polymap(outer, names)
    p_inner = jet_to_polymap(inner, names)
    return p_outer.compose(p_inner).taylor_jet(inner.source, inner.order)


def test_groupoid_laws_with_oracle():
    rng = random.Random(2024)
    for case in range(60):
        n = rng.choice((1, 2))
        order = rng.randint(1, 4)
        A = random_jet(rng, n, order)
        B = random_jet(rng, n, order)
        C = random_jet(rng, n, order)
        # align sources/targets so the triple composes
        B = JetOfMap(order, A.target, B.target, B.components)
        C = JetOfMap(order, B.target, C.target, C.components)
        BA = jet_compose(B, A)
        assert BA == _oracle_compose(B, A)
        assert jet_compose(C, BA) == jet_compose(jet_compose(C, B), A)
        assert jet_compose(identity_jet(A.target, order), A) == A
        assert jet_compose(A, identity_jet(A.source, order)) == A
        inv = jet_invert(A)
        assert jet_compose(inv, A) == identity_jet(A.source, order)
        assert jet_compose(A, inv) == identity_jet(A.target, order)


def test_chain_rule_matches_holonomic_jets():
    rng = random.Random(77)
    names = ("x",)
    checked = 0
    for _ in range(60):
        f = Poly(names, {(d,): fr(rng.randint(-3, 3)) for d in range(4)})
        g = Poly(names, {(d,): fr(rng.randint(-3, 3)) for d in range(4)})
        pf = PolyMap(names, (f,))
        pg = PolyMap(names, (g,))
        at = (fr(rng.randint(-2, 2)),)
        k = rng.randint(1, 4)
        try:
            lhs = pf.compose(pg).taylor_jet(at, k)
            rhs = jet_compose(pf.taylor_jet(pg.apply(at), k), pg.taylor_jet(at, k))
        except ValueError:
            continue            # a derivative vanished; the jets are not invertible
        assert lhs == rhs
        checked += 1
    assert checked >= 20


def test_taylor_jet_matches_section_derivatives():
    rng = random.Random(31)
    names = ("x",)
    for _ in range(10):
        sec = random_section(rng, 1, 1)
        pm = PolyMap(names, (sec.components[0].on_chart(names),))
        at = {"x": fr(rng.randint(-2, 2))}
        k = 3
        table = holonomic_jet(sec, at, k)
        try:
            jet = pm.taylor_jet((at["x"],), k)
        except ValueError:
            continue            # derivative vanished; not an invertible jet
        import math
        for d in range(1, k + 1):
            assert jet.coefficient(0, (d,)) * math.factorial(d) == table[f"u[{d}]"]


def test_top_order_guard():
    chart = JetChart(("x",), ("u",), 1)
    with pytest.raises(ChartMismatchError):
        total_derivative(chart, chart.var("u[1]"), 0, out_chart=chart)
