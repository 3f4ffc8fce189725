import pytest

from prolab.algebra import Poly
from prolab.equivalence import (
    ABSOLUTE_EQUIVALENT,
    MERIHEDRIC_EQUIVALENT,
    NECESSITY_CAVEAT,
    NOT_EQUIVALENT,
    RULE_EQUIVALENT,
    UNDETERMINED,
    FiberedMap,
    conjugation_membership,
    gate,
    gate_verdict,
    ode_nonsingular_rule,
    pfaff_rules,
    prolonged_action,
    verify_absolute,
    verify_merihedric,
)
from prolab.errors import (
    ChartMismatchError,
    InverseVerificationError,
    UnsupportedFormError,
)
from prolab.forms import DiffForm
from prolab.jets import InvertibleMap, JetChart, PolyMap, PolySection
from prolab.pfaffian import PfaffSystem, darboux_system, goursat_model
from prolab.systems import PdeSystem, is_solution

from conftest import fr

BN = ("x",)
FN = ("u",)
TOT = BN + FN


def _ode(rhs_builder) -> PdeSystem:
    chart = JetChart(BN, FN, 1)
    return PdeSystem.make(chart, solve={"u[1]": rhs_builder(chart)})


def _doubler() -> FiberedMap:
    x = Poly.variable(BN, "x")
    u = Poly.variable(TOT, "u")
    return FiberedMap(BN, FN, (x,), (2 * u,), (x,), (fr(1, 2) * u,))


def test_inverse_verification():
    _doubler().verify_inverse()
    x = Poly.variable(BN, "x")
    u = Poly.variable(TOT, "u")
    broken = FiberedMap(BN, FN, (x,), (2 * u,), (x,), (u,))
    with pytest.raises(InverseVerificationError):
        broken.verify_inverse()


def test_prolonged_action_on_scaling():
    chart = JetChart(BN, FN, 2)
    action = prolonged_action(_doubler(), chart)
    v = chart.variables()
    assert action["u"].as_poly() == 2 * Poly.variable(v, "u")
    assert action["u[1]"].as_poly() == 2 * Poly.variable(v, "u[1]")
    assert action["u[2]"].as_poly() == 2 * Poly.variable(v, "u[2]")


def test_prolonged_action_base_stretch():
    """(x, u) -> (2x, u) halves each derivative order."""
    chart = JetChart(BN, FN, 2)
    x = Poly.variable(BN, "x")
    u = Poly.variable(TOT, "u")
    stretch = FiberedMap(BN, FN, (2 * x,), (u,), (fr(1, 2) * x,), (u,))
    action = prolonged_action(stretch, chart)
    v = chart.variables()
    assert action["u[1]"].as_poly() == fr(1, 2) * Poly.variable(v, "u[1]")
    assert action["u[2]"].as_poly() == fr(1, 4) * Poly.variable(v, "u[2]")


def test_verify_absolute_scaling_example():
    square = _ode(lambda c: c.var("u") * c.var("u"))
    half_square = _ode(lambda c: fr(1, 2) * c.var("u") * c.var("u"))
    verdict = verify_absolute(square, half_square, _doubler())
    assert verdict.kind == ABSOLUTE_EQUIVALENT
    back = verify_absolute(half_square, square, _doubler().inverse())
    assert back.kind == ABSOLUTE_EQUIVALENT


def test_verify_absolute_identity_and_witness():
    growth = _ode(lambda c: c.var("u"))
    ident = FiberedMap.identity(BN, FN)
    assert verify_absolute(growth, growth, ident).kind == ABSOLUTE_EQUIVALENT

    shifted = _ode(lambda c: c.var("u") + 1)
    verdict = verify_absolute(growth, shifted, ident)
    assert verdict.kind == NOT_EQUIVALENT
    witness = verdict.witness
    assert witness == {"x": 0, "u": 0, "u[1]": 0}
    for eq in growth.equations:
        assert eq.eval(witness) == 0
    assert any(eq.eval(witness) != 0 for eq in shifted.equations)


def test_verify_absolute_shape_check():
    growth = _ode(lambda c: c.var("u"))
    chart2 = JetChart(BN, FN, 2)
    second = PdeSystem.make(chart2, solve={"u[2]": Poly.zero(chart2.variables())})
    with pytest.raises(ChartMismatchError):
        verify_absolute(growth, second, FiberedMap.identity(BN, FN))


def test_verify_absolute_sampled_mode():
    chart = JetChart(BN, FN, 1)
    v = chart.variables()
    u1 = Poly.variable(v, "u[1]")
    u = Poly.variable(v, "u")
    implicit = PdeSystem(chart, [u1 * u1 - u * u])           # no solved form
    ident = FiberedMap.identity(BN, FN)
    verdict = verify_absolute(implicit, implicit, ident)
    assert verdict.kind == UNDETERMINED
    assert verdict.certificate["mode"] == "sampled"

    linear = PdeSystem(chart, [u1 - u])                      # affine but not explicit
    other = PdeSystem(chart, [u1 - u - 1])
    verdict2 = verify_absolute(linear, other, ident)
    assert verdict2.kind == NOT_EQUIVALENT
    assert verdict2.witness is not None


def test_solution_transport():
    square = _ode(lambda c: c.var("u") * c.var("u"))
    half_square = _ode(lambda c: fr(1, 2) * c.var("u") * c.var("u"))
    phi = _doubler()
    assert verify_absolute(square, half_square, phi).kind == ABSOLUTE_EQUIVALENT
    sigma = PolySection(BN, FN, (Poly.zero(BN),))            # u = 0 solves both
    assert is_solution(square, sigma)
    transported = PolySection(BN, FN, (Poly.zero(BN),))      # phi fixes u = 0
    assert is_solution(half_square, transported)
    # nontrivial transport on a linear system: u' = u, sigma = 0 is dull, so
    # use u'' = 0 with sigma = x under (x, u) -> (x, 2u).
    chart2 = JetChart(BN, FN, 2)
    flat = PdeSystem.make(chart2, solve={"u[2]": Poly.zero(chart2.variables())})
    x = Poly.variable(BN, "x")
    sigma2 = PolySection(BN, FN, (x,))
    assert is_solution(flat, sigma2)
    transported2 = PolySection(BN, FN, (2 * x,))
    assert is_solution(flat, transported2)


def test_verify_merihedric_levels():
    square = _ode(lambda c: c.var("u") * c.var("u"))
    half_square = _ode(lambda c: fr(1, 2) * c.var("u") * c.var("u"))
    phi = _doubler()
    level0 = verify_merihedric(square, half_square, phi, 0)
    assert level0.kind == ABSOLUTE_EQUIVALENT
    level1 = verify_merihedric(square, half_square, phi, 1)
    assert level1.kind == MERIHEDRIC_EQUIVALENT and level1.level == 1
    level2 = verify_merihedric(square, half_square, phi, 2)
    assert level2.kind == MERIHEDRIC_EQUIVALENT and level2.level == 2


def test_projection_consistency():
    """Merihedric success at a positive level implies level-0 success."""
    square = _ode(lambda c: c.var("u") * c.var("u"))
    half_square = _ode(lambda c: fr(1, 2) * c.var("u") * c.var("u"))
    phi = _doubler()
    if verify_merihedric(square, half_square, phi, 1).kind == MERIHEDRIC_EQUIVALENT:
        assert verify_absolute(square, half_square, phi).kind == ABSOLUTE_EQUIVALENT


def test_ode_rule_examples():
    growth = _ode(lambda c: c.var("u"))
    square = _ode(lambda c: c.var("u") * c.var("u"))
    origin = {"x": 0, "u": 0}
    verdict = ode_nonsingular_rule(growth, square, origin, origin)
    assert verdict.kind == RULE_EQUIVALENT and verdict.rule == "ode-nonsingular"
    assert verdict.certificate["direction_fields"][0][0] == 1

    same = ode_nonsingular_rule(growth, growth, origin, origin)
    assert same.kind == RULE_EQUIVALENT

    chart2 = JetChart(BN, ("u", "v"), 1)
    v2 = chart2.variables()
    pair = PdeSystem.make(chart2, solve={
        "u[1]": Poly.variable(v2, "v"), "v[1]": -Poly.variable(v2, "u")})
    mismatch = ode_nonsingular_rule(growth, pair, origin, {"x": 0, "u": 0, "v": 0})
    assert mismatch.kind == NOT_EQUIVALENT
    assert mismatch.witness == {"unknowns": (1, 2)}


def test_ode_rule_rejects_wrong_shape(laplace):
    growth = _ode(lambda c: c.var("u"))
    with pytest.raises(UnsupportedFormError):
        ode_nonsingular_rule(growth, laplace, {"x": 0, "u": 0}, {})


def test_pfaff_rules_examples():
    ch4 = ("x", "y", "u", "v")
    closed = PfaffSystem(ch4, [DiffForm.d_coordinate(ch4, "u"),
                               DiffForm.d_coordinate(ch4, "v")])
    ch4b = ("p", "q", "r", "s")
    coords = PfaffSystem(ch4b, [DiffForm.d_coordinate(ch4b, "p"),
                                DiffForm.d_coordinate(ch4b, "q")])
    verdict = pfaff_rules(closed, coords)
    assert verdict.kind == RULE_EQUIVALENT and verdict.rule == "integrable"

    chu = ("x", "y", "u")
    du = PfaffSystem(chu, [DiffForm.d_coordinate(chu, "u")])
    verdict2 = pfaff_rules(darboux_system(), du)
    assert verdict2.rule == "first-order"
    assert verdict2.certificate["first_order_equivalent"] is True
    assert verdict2.certificate["integrable"] == (False, True)

    verdict3 = pfaff_rules(darboux_system(), goursat_model(2))
    assert verdict3.kind == NOT_EQUIVALENT
    assert verdict3.witness == {"rank_corank": ((1, 2), (2, 2))}


def test_gate_reflexive(laplace):
    report = gate(laplace, laplace, 2)
    assert report.overall == "PASS_NECESSARY"
    assert report.q0 == 2
    assert report.caveat == NECESSITY_CAVEAT
    assert gate_verdict(report).kind == "NECESSARY_PASS"


def test_gate_dimension_failure():
    chart = JetChart(("x", "y"), ("u",), 1)
    zero = Poly.zero(chart.variables())
    flat2 = PdeSystem.make(chart, solve={"u[1,0]": zero, "u[0,1]": zero})
    half = PdeSystem.make(chart, solve={"u[1,0]": zero})
    report = gate(flat2, half, 1)
    assert report.overall == "FAIL"
    assert report.first_failure == (0, "DIMENSION")
    assert report.condition(0, "DIMENSION").witness["dims"] == (3, 4)
    verdict = gate_verdict(report)
    assert verdict.kind == NOT_EQUIVALENT


def test_gate_laplace_vs_wave(laplace, wave):
    report = gate(laplace, wave, 2)
    assert report.overall == "PASS_NECESSARY"
    assert report.caveat is not None
    for level in (0, 1, 2):
        assert report.condition(level, "SYMBOLS").witness["dims"] == (2, 2)


def test_gate_shape_mismatch(laplace):
    growth = _ode(lambda c: c.var("u"))
    report = gate(laplace, growth, 1)
    assert report.overall == "FAIL"
    assert report.first_failure == (0, "DIMENSION")


def test_gate_monotone_failure():
    chart = JetChart(("x", "y"), ("u",), 1)
    zero = Poly.zero(chart.variables())
    flat2 = PdeSystem.make(chart, solve={"u[1,0]": zero, "u[0,1]": zero})
    half = PdeSystem.make(chart, solve={"u[1,0]": zero})
    for q_max in (1, 2):
        report = gate(flat2, half, q_max)
        assert report.first_failure == (0, "DIMENSION")


def test_gate_symmetry(laplace, wave):
    fwd = gate(laplace, wave, 1)
    back = gate(wave, laplace, 1)
    assert fwd.overall == back.overall == "PASS_NECESSARY"


def test_conjugation_membership_cases():
    names = ("x",)
    x = Poly.variable(names, "x")
    double = InvertibleMap(PolyMap(names, (2 * x,)),
                           PolyMap(names, (fr(1, 2) * x,)))
    chart = JetChart(("x",), ("u",), 1)
    full = PdeSystem.make(chart, solve={})
    report = conjugation_membership(double, full, samples=12)
    assert report.status == "ALL_PASS"
    assert report.pass_fraction == 1

    v = chart.variables()
    translations = PdeSystem.make(chart, solve={"u[1]": Poly.const(v, 1)})
    report2 = conjugation_membership(double, translations, samples=12)
    assert report2.status == "ALL_PASS"

    doubled = PdeSystem.make(chart, solve={"u[1]": Poly.const(v, 2)})
    report3 = conjugation_membership(double, translations, doubled, samples=12)
    assert report3.status == "COUNTEREXAMPLE"
    assert report3.first_counterexample is not None
    assert report3.passed == 0


def _transported_section(phi: FiberedMap, sigma: PolySection) -> PolySection:
    """phi_fiber(psi(x), sigma(psi(x))) on the primed base coordinates."""
    base = phi.base_names
    total = base + phi.fiber_names
    psi = {name: comp for name, comp in zip(base, phi.inv_base)}
    assignment = dict(psi)
    for name, comp in zip(phi.fiber_names, sigma.components):
        assignment[name] = comp.on_chart(base).substitute(psi, base)
    new_components = tuple(
        comp.substitute({k: v.on_chart(total) for k, v in assignment.items()}, total)
        .on_chart(base)
        for comp in phi.fiber)
    return PolySection(base, phi.fiber_names, new_components)


def test_solution_transport_computed_from_map():
    chart2 = JetChart(BN, FN, 2)
    flat = PdeSystem.make(chart2, solve={"u[2]": Poly.zero(chart2.variables())})
    x = Poly.variable(BN, "x")
    uu = Poly.variable(TOT, "u")
    stretch = FiberedMap(BN, FN, (2 * x,), (uu,), (fr(1, 2) * x,), (uu,))
    assert verify_absolute(flat, flat, stretch).kind == ABSOLUTE_EQUIVALENT
    sigma = PolySection(BN, FN, (3 * x + 1,))
    assert is_solution(flat, sigma)
    transported = _transported_section(stretch, sigma)
    assert transported.components[0] == fr(3, 2) * x + 1
    assert is_solution(flat, transported)

    scaled = _transported_section(_doubler(), sigma)
    assert scaled.components[0] == 6 * x + 2
    assert is_solution(flat, scaled)


def test_gate_reflexivity_over_corpus(laplace, wave):
    chart1 = JetChart(("x", "y"), ("u",), 1)
    zero1 = Poly.zero(chart1.variables())
    corpus = [
        laplace,
        wave,
        PdeSystem.make(chart1, solve={"u[1,0]": zero1, "u[0,1]": zero1}),
        PdeSystem.make(chart1, solve={"u[1,0]": zero1}),
        _ode(lambda c: c.var("u")),
        _ode(lambda c: c.var("u") * c.var("u")),
    ]
    for system in corpus:
        report = gate(system, system, 1)
        assert report.overall == "PASS_NECESSARY", report.first_failure
        assert report.caveat == NECESSITY_CAVEAT


def test_gate_accepts_supplied_sample_points(laplace):
    points = [{"x": 0, "y": 0, "u": 0, "u[1,0]": 0, "u[0,1]": 0,
               "u[2,0]": 1, "u[1,1]": 0, "u[0,2]": -1}]
    report = gate(laplace, laplace, 0, sample_points={"A": points, "B": points})
    assert report.overall == "PASS_NECESSARY"
    assert report.condition(0, "DIFFERENTIABILITY").status == "PASS"
