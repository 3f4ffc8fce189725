"""Equivalence decisions for PDE systems and jet-groupoid systems.

Three layers:

* direct verification, for a user-supplied fibered point transformation,
  that its prolonged action carries one equation locus onto another
  (`verify_absolute`), possibly after prolonging both sides
  (`verify_merihedric`);
* rule-based verdicts for explicit first-order ODE systems and for
  Pfaffian systems (rank/co-rank and integrability rules);
* the five-condition necessary gate comparing two systems order by
  order: regularity of the prolongations, generic dimensions, a
  transitivity surrogate (surjectivity of the source-target projection
  differential at sampled points), symbol dimensions, and Spencer
  cohomology dimensions with a common 2-acyclicity order.

Passing the gate never certifies equivalence; reports carry the
necessity caveat verbatim.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .algebra import ExactMatrix, Poly, RatFunc
from .errors import (
    ChartMismatchError,
    EmptyLocusError,
    InverseVerificationError,
    NotOnLocusError,
    SamplingError,
    UnsupportedFormError,
)
from .jets import (
    InvertibleMap,
    JetChart,
    JetOfMap,
    conjugate_jet,
    index_factorial,
    multi_indices_of_grade,
    total_derivative,
)
from .pfaffian import PfaffSystem, frobenius_test, rank_corank
from .sampling import rational, seeded
from .spencer import GENERIC, spencer_cohomology, symbol
from .systems import (
    PdeSystem,
    generic_dimension,
    inconsistency_certificate,
    prolong,
    reduce_mod_solved,
    regularity_check,
    sample_on_locus,
)

# Verdict kinds.
ABSOLUTE_EQUIVALENT = "ABSOLUTE_EQUIVALENT"
MERIHEDRIC_EQUIVALENT = "MERIHEDRIC_EQUIVALENT"
NOT_EQUIVALENT = "NOT_EQUIVALENT"
NECESSARY_PASS = "NECESSARY_PASS"
RULE_EQUIVALENT = "RULE_EQUIVALENT"
UNDETERMINED = "UNDETERMINED"

# Gate condition names, in the order they are decided.
CONDITIONS = ("DIFFERENTIABILITY", "DIMENSION", "TRANSITIVITY",
              "SYMBOLS", "DELTA_COHOMOLOGY")

NECESSITY_CAVEAT = (
    "Necessary conditions only: a failed check refutes local equivalence, "
    "but passing all five certifies nothing by itself.  For real-analytic "
    "data satisfying the transitivity hypothesis, Cartan's existence theorem "
    "then provides the local equivalence; no such guarantee survives for "
    "merely smooth (C-infinity) data, where 2-acyclic equations may admit "
    "no solution at all."
)


@dataclass(frozen=True)
class EquivalenceVerdict:
    kind: str
    level: int | None = None
    rule: str | None = None
    witness: dict | None = None
    certificate: dict = field(default_factory=dict)

    def __str__(self):
        if self.kind == MERIHEDRIC_EQUIVALENT:
            return f"MERIHEDRIC_EQUIVALENT(level={self.level})"
        if self.kind == RULE_EQUIVALENT:
            return f"RULE_EQUIVALENT({self.rule})"
        return self.kind


class FiberedMap:
    """A point transformation (x, u) -> (base(x), fiber(x, u)) with a
    declared inverse of the same shape.

    Both compositions with the inverse are verified to be the exact
    polynomial identity before the map is used, which keeps the prolonged
    action globally exact.
    """

    __slots__ = ("base_names", "fiber_names", "base", "fiber", "inv_base", "inv_fiber")

    def __init__(self, base_names, fiber_names, base, fiber, inv_base, inv_fiber):
        base_names = tuple(base_names)
        fiber_names = tuple(fiber_names)
        total = base_names + fiber_names
        base = tuple(p if p.chart == base_names else p.on_chart(base_names) for p in base)
        inv_base = tuple(p if p.chart == base_names else p.on_chart(base_names)
                         for p in inv_base)
        fiber = tuple(p if p.chart == total else p.on_chart(total) for p in fiber)
        inv_fiber = tuple(p if p.chart == total else p.on_chart(total) for p in inv_fiber)
        if len(base) != len(base_names) or len(inv_base) != len(base_names):
            raise ChartMismatchError("one base component per base variable required")
        if len(fiber) != len(fiber_names) or len(inv_fiber) != len(fiber_names):
            raise ChartMismatchError("one fiber component per fiber variable required")
        for slot, value in (("base_names", base_names), ("fiber_names", fiber_names),
                            ("base", base), ("fiber", fiber),
                            ("inv_base", inv_base), ("inv_fiber", inv_fiber)):
            object.__setattr__(self, slot, value)

    def __setattr__(self, name, value):
        raise AttributeError("FiberedMap is immutable")

    @classmethod
    def identity(cls, base_names, fiber_names) -> "FiberedMap":
        base_names = tuple(base_names)
        fiber_names = tuple(fiber_names)
        total = base_names + fiber_names
        base = tuple(Poly.variable(base_names, v) for v in base_names)
        fiber = tuple(Poly.variable(total, v) for v in fiber_names)
        return cls(base_names, fiber_names, base, fiber, base, fiber)

    def inverse(self) -> "FiberedMap":
        return FiberedMap(self.base_names, self.fiber_names,
                          self.inv_base, self.inv_fiber, self.base, self.fiber)

    def verify_inverse(self):
        """Both compositions must be the identity as exact polynomials."""
        total = self.base_names + self.fiber_names
        for fwd_b, fwd_f, back_b, back_f, tag in (
                (self.base, self.fiber, self.inv_base, self.inv_fiber, "inverse o map"),
                (self.inv_base, self.inv_fiber, self.base, self.fiber, "map o inverse")):
            assignment = {}
            for name, comp in zip(self.base_names, fwd_b):
                assignment[name] = comp.on_chart(total)
            for name, comp in zip(self.fiber_names, fwd_f):
                assignment[name] = comp
            for name, comp in zip(self.base_names, back_b):
                if comp.on_chart(total).substitute(assignment, total) != Poly.variable(total, name):
                    raise InverseVerificationError(
                        f"{tag} is not the identity on base variable {name!r}")
            for name, comp in zip(self.fiber_names, back_f):
                if comp.substitute(assignment, total) != Poly.variable(total, name):
                    raise InverseVerificationError(
                        f"{tag} is not the identity on fiber variable {name!r}")


def prolonged_action(phi: FiberedMap, chart: JetChart) -> dict[str, RatFunc]:
    """The induced action on jet coordinates, as exact rational functions.

    New base point:  X_i = base_i(x).  New fiber values: U_0 = fiber(x, u).
    Higher coordinates solve the chain rule D_j U_alpha = sum_i
    U_{alpha+1_i} D_j X_i, so each is rational with denominator a power of
    det(D base), which is a nonzero constant for polynomially invertible
    base maps.
    """
    if phi.base_names != chart.base or phi.fiber_names != chart.fiber:
        raise ChartMismatchError("map variables do not match the jet chart")
    variables = chart.variables()
    n, m, order = chart.n, chart.m, chart.order

    def lift(p: Poly) -> Poly:
        return p.on_chart(variables)

    x_images = [lift(p) for p in phi.base]
    jac_rows = [[RatFunc.from_poly(lift(phi.base[i].partial(chart.base[j])))
                 for j in range(n)] for i in range(n)]
    jacobian = ExactMatrix(jac_rows, cols=n)
    inverse_jac = jacobian.inverse().entries

    def d_total(f: RatFunc, j: int) -> RatFunc:
        dnum = total_derivative(chart, f.num, j, out_chart=chart)
        dden = total_derivative(chart, f.den, j, out_chart=chart)
        return RatFunc(dnum * f.den - f.num * dden, f.den * f.den)

    table: dict[tuple[int, tuple[int, ...]], RatFunc] = {}
    zero_index = (0,) * n
    for a in range(m):
        table[(a, zero_index)] = RatFunc.from_poly(lift(phi.fiber[a]))
    for grade in range(order):
        for alpha in multi_indices_of_grade(n, grade + 1):
            i0 = next(i for i, e in enumerate(alpha) if e)
            parent = alpha[:i0] + (alpha[i0] - 1,) + alpha[i0 + 1:]
            for a in range(m):
                derivatives = [d_total(table[(a, parent)], j) for j in range(n)]
                value = RatFunc.from_scalar(variables, 0)
                for j in range(n):
                    entry = inverse_jac[i0][j]
                    if entry:
                        value = value + entry * derivatives[j]
                table[(a, alpha)] = value
    action: dict[str, RatFunc] = {}
    for i, name in enumerate(chart.base):
        action[name] = RatFunc.from_poly(x_images[i])
    for (a, alpha), value in table.items():
        action[chart.jet_name(a, alpha)] = value
    return action


def _witness_point(system: PdeSystem, residue: Poly, denominators: list[Poly],
                   seed: int) -> dict[str, Fraction] | None:
    """A point of the system where `residue` and no denominator vanish."""
    solved = dict(system.solved)
    parametric = system.parametric_names()
    rng = seeded(seed, "witness")
    candidates = [{v: Fraction(0) for v in parametric}]
    for _ in range(400):
        candidates.append({v: rational(rng) for v in parametric})
    for params in candidates:
        padded = params | {name: Fraction(0) for name in solved}
        point = dict(params)
        for name in solved:
            point[name] = solved[name].eval(padded)
        if not residue.eval(point):
            continue
        if any(not den.eval(point) for den in denominators):
            continue
        return point
    return None


def _maps_onto(source: PdeSystem, target: PdeSystem, phi: FiberedMap,
               seed: int) -> tuple[bool, dict | None, dict]:
    """Check that the prolonged action sends the source locus into the target.

    Both systems share chart shape and variable names; the target equations
    are composed with the action and reduced modulo the source solved form.
    """
    action = prolonged_action(phi, source.chart)
    variables = source.chart.variables()
    solved = dict(source.solved)
    denominators = []
    for value in action.values():
        if not value.den.is_constant():
            denominators.append(value.den)
    for eq in target.equations:
        image = eq.eval_ratfunc(action, variables)
        residue = reduce_mod_solved(image.num, solved)
        if residue.is_zero:
            continue
        witness = _witness_point(source, residue, denominators + [image.den], seed)
        detail = {"violated_equation": str(eq), "residue": str(residue)}
        return False, witness, detail
    return True, None, {"equations_checked": len(target.equations)}


def verify_absolute(source: PdeSystem, target: PdeSystem, phi: FiberedMap,
                    seed: int = 0, samples: int = 50) -> EquivalenceVerdict:
    """Definition-level test of absolute equivalence under a given map.

    Exact mode needs explicit solved forms on both sides; the map and its
    inverse are then checked in both directions.  Without solved forms the
    test degrades to falsify-only sampling and reports UNDETERMINED when
    no violation is found.
    """
    if (source.chart.n, source.chart.m, source.chart.order) != \
            (target.chart.n, target.chart.m, target.chart.order):
        raise ChartMismatchError("systems live on different jet chart shapes")
    phi.verify_inverse()
    if source.is_explicit and target.is_explicit:
        ok, witness, detail = _maps_onto(source, target, phi, seed)
        if not ok:
            return EquivalenceVerdict(
                NOT_EQUIVALENT, witness=witness,
                certificate={"direction": "forward", "mode": "exact", **detail})
        ok_back, witness_back, detail_back = _maps_onto(target, source, phi.inverse(), seed)
        if not ok_back:
            return EquivalenceVerdict(
                NOT_EQUIVALENT, witness=witness_back,
                certificate={"direction": "backward", "mode": "exact", **detail_back})
        return EquivalenceVerdict(
            ABSOLUTE_EQUIVALENT,
            certificate={"mode": "exact", "forward": detail, "backward": detail_back})
    # Falsify-only sampling.
    action = prolonged_action(phi, source.chart)
    variables = source.chart.variables()
    rng = seeded(seed, "verify-sampled")
    try:
        points = sample_on_locus(source, samples, rng)
    except (SamplingError, EmptyLocusError) as exc:
        return EquivalenceVerdict(
            UNDETERMINED,
            certificate={"mode": "sampled", "checked": 0, "diagnostics": str(exc)})
    checked = 0
    for point in points:
        try:
            image_point = {name: value.eval(point) for name, value in action.items()}
        except Exception:
            continue
        checked += 1
        for eq in target.equations:
            if eq.eval(image_point):
                return EquivalenceVerdict(
                    NOT_EQUIVALENT, witness=point,
                    certificate={"mode": "sampled", "violated_equation": str(eq),
                                 "checked": checked})
    return EquivalenceVerdict(
        UNDETERMINED,
        certificate={"mode": "sampled", "checked": checked,
                     "note": "no violation found; sampling cannot certify equivalence"})


def verify_merihedric(source: PdeSystem, target: PdeSystem, phi: FiberedMap,
                      level: int, seed: int = 0) -> EquivalenceVerdict:
    """Absolute equivalence of the level-th prolongations."""
    if level < 0:
        raise ValueError("prolongation level must be nonnegative")
    verdict = verify_absolute(prolong(source, level), prolong(target, level),
                              phi, seed=seed)
    if verdict.kind == ABSOLUTE_EQUIVALENT and level > 0:
        return EquivalenceVerdict(MERIHEDRIC_EQUIVALENT, level=level,
                                  certificate=verdict.certificate)
    return verdict


def ode_nonsingular_rule(first: PdeSystem, second: PdeSystem,
                         point_first: Mapping, point_second: Mapping) -> EquivalenceVerdict:
    """Existence rule for explicit first-order ODE systems.

    In graph form u' = f(x, u) the direction field (1, f) never vanishes,
    so two systems with the same number of unknowns are locally equivalent
    at the given non-singular points.  The rule certifies existence only;
    no transformation is produced.
    """
    for system, tag in ((first, "first"), (second, "second")):
        if system.chart.n != 1 or system.chart.order != 1:
            raise UnsupportedFormError(f"{tag} system is not a first-order ODE system")
        if not system.is_explicit:
            raise UnsupportedFormError(f"{tag} system is not in explicit solved form")
        expected = {system.chart.jet_name(a, (1,)) for a in range(system.chart.m)}
        if set(system.solved_names()) != expected:
            raise UnsupportedFormError(
                f"{tag} system must solve every first-order coordinate")
    m1, m2 = first.chart.m, second.chart.m
    if m1 != m2:
        return EquivalenceVerdict(
            NOT_EQUIVALENT, witness={"unknowns": (m1, m2)},
            certificate={"rule": "ode-nonsingular",
                         "reason": "different numbers of dependent variables"})
    values = []
    for system, point in ((first, point_first), (second, point_second)):
        base_fiber = system.chart.base + system.chart.fiber
        assignment = {}
        for name in base_fiber:
            if name not in point:
                raise NotOnLocusError(f"point is missing coordinate {name!r}")
            assignment[name] = point[name]
        padded = {v: Fraction(0) for v in system.chart.variables()} | {
            k: Fraction(v) for k, v in assignment.items()}
        rhs = tuple(expr.eval(padded) for _, expr in system.solved)
        values.append(rhs)
    return EquivalenceVerdict(
        RULE_EQUIVALENT, rule="ode-nonsingular",
        certificate={"direction_fields": tuple((1,) + v for v in values),
                     "note": "existence only; vector fields (1, f) are nonvanishing"})


def pfaff_rules(first: PfaffSystem, second: PfaffSystem) -> EquivalenceVerdict:
    """Rank/co-rank rules for Pfaffian systems.

    Integrable systems are locally equivalent exactly when rank and
    co-rank agree; first-order equivalence needs only the rank/co-rank
    match and is always reported alongside.
    """
    rc1 = rank_corank(first)
    rc2 = rank_corank(second)
    int1 = frobenius_test(first)
    int2 = frobenius_test(second)
    matches = rc1 == rc2
    certificate = {
        "rank_corank": (rc1, rc2),
        "integrable": (int1, int2),
        "first_order_equivalent": matches,
    }
    if not matches:
        return EquivalenceVerdict(NOT_EQUIVALENT,
                                  witness={"rank_corank": (rc1, rc2)},
                                  certificate=certificate)
    if int1 and int2:
        return EquivalenceVerdict(RULE_EQUIVALENT, rule="integrable",
                                  certificate=certificate)
    certificate["integrable_rule"] = "not applicable (a system is non-integrable)"
    return EquivalenceVerdict(RULE_EQUIVALENT, rule="first-order",
                              certificate=certificate)


# ---------------------------------------------------------------------------
# The five-condition gate
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GateCondition:
    status: str                  # PASS / FAIL / UNDETERMINED
    witness: dict = field(default_factory=dict)


@dataclass(frozen=True)
class GateReport:
    shape: tuple[tuple[int, int, int], tuple[int, int, int]]
    orders: tuple[tuple[int, dict[str, GateCondition]], ...]
    overall: str                 # PASS_NECESSARY / FAIL / UNDETERMINED
    q0: int | None
    caveat: str | None
    first_failure: tuple[int, str] | None

    def condition(self, level: int, name: str) -> GateCondition:
        for lvl, conditions in self.orders:
            if lvl == level:
                return conditions[name]
        raise KeyError(level)


def _sample_or_none(system, count, rng):
    try:
        return sample_on_locus(system, count, rng)
    except (SamplingError, EmptyLocusError):
        return None


def _projection_full_rank(system: PdeSystem, points) -> tuple[bool, dict]:
    """Surjectivity of the source-target projection differential on the locus.

    The tangent space at each point is the kernel of the equations'
    Jacobian; projecting it onto the base and order-zero fiber coordinates
    must give the full n + m dimensions.
    """
    chart = system.chart
    variables = chart.variables()
    targets = [variables.index(v) for v in chart.base]
    targets += [variables.index(chart.jet_name(a, (0,) * chart.n))
                for a in range(chart.m)]
    want = len(targets)
    for point in points:
        if system.equations:
            rows = [[eq.partial(v).eval(point) for v in variables]
                    for eq in system.equations]
            tangent = ExactMatrix(rows, cols=len(variables)).kernel_basis()
        else:
            tangent = ExactMatrix([], cols=len(variables)).kernel_basis()
        projected = [[vec[i] for i in targets] for vec in tangent]
        if not projected:
            return False, {"point": _point_key(point), "rank": 0, "needed": want}
        rank = ExactMatrix(projected, cols=want).rank()
        if rank != want:
            return False, {"point": _point_key(point), "rank": rank, "needed": want}
    return True, {"points_checked": len(points), "rank": want}


def _point_key(point: Mapping) -> tuple:
    return tuple(sorted((k, str(v)) for k, v in point.items()))


def gate(system_a: PdeSystem, system_b: PdeSystem, q_max: int,
         sample_points: Mapping[str, Sequence[Mapping]] | None = None,
         seed: int = 0, sample_count: int = 3) -> GateReport:
    """Run the five necessary conditions for orders 0..q_max.

    The overall verdict is FAIL at the first failing condition,
    PASS_NECESSARY when every condition passes and a common 2-acyclicity
    order exists within range, and UNDETERMINED otherwise.  PASS_NECESSARY
    always carries the necessity caveat.
    """
    shape_a = (system_a.chart.n, system_a.chart.m, system_a.chart.order)
    shape_b = (system_b.chart.n, system_b.chart.m, system_b.chart.order)
    if shape_a != shape_b:
        conditions = {name: GateCondition("UNDETERMINED") for name in CONDITIONS}
        conditions["DIMENSION"] = GateCondition(
            "FAIL", {"shapes": (shape_a, shape_b),
                     "note": "jet chart shapes differ"})
        return GateReport((shape_a, shape_b), ((0, conditions),), "FAIL",
                          None, None, (0, "DIMENSION"))
    k = system_a.chart.order
    n = system_a.chart.n

    spencer_p = tuple(p for p in (1, 2) if p <= n)
    q_range = tuple(range(k, k + q_max + 1))
    spencer_reports = {}
    spencer_error = None
    try:
        spencer_reports["A"] = spencer_cohomology(system_a, q_range, spencer_p)
        spencer_reports["B"] = spencer_cohomology(system_b, q_range, spencer_p)
    except EmptyLocusError as exc:
        spencer_error = exc

    orders = []
    first_failure = None
    for level in range(q_max + 1):
        conditions: dict[str, GateCondition] = {}
        prolonged_a = prolong(system_a, level)
        prolonged_b = prolong(system_b, level)

        # 1. Differentiability: the prolonged loci are nonempty and the
        # Jacobian rank at sampled points matches the generic rank.
        cert_a = inconsistency_certificate(prolonged_a.equations)
        cert_b = inconsistency_certificate(prolonged_b.equations)
        if cert_a or cert_b:
            conditions["DIFFERENTIABILITY"] = GateCondition(
                "FAIL", {"inconsistency": {"A": cert_a, "B": cert_b}})
            points_a = points_b = None
        else:
            rng = seeded(seed, "gate-reg", level)
            if level == 0 and sample_points:
                points_a = list(sample_points.get("A", ())) or None
                points_b = list(sample_points.get("B", ())) or None
            else:
                points_a = points_b = None
            points_a = points_a or _sample_or_none(prolonged_a, sample_count, rng)
            points_b = points_b or _sample_or_none(prolonged_b, sample_count, rng)
            if points_a is None or points_b is None:
                conditions["DIFFERENTIABILITY"] = GateCondition(
                    "UNDETERMINED", {"note": "no exact sampling strategy applies"})
            else:
                rep_a = regularity_check(prolonged_a, points_a)
                rep_b = regularity_check(prolonged_b, points_b)
                if rep_a.is_regular and rep_b.is_regular:
                    conditions["DIFFERENTIABILITY"] = GateCondition(
                        "PASS", {"ranks": (rep_a.generic_rank, rep_b.generic_rank)})
                else:
                    bad = rep_a if not rep_a.is_regular else rep_b
                    conditions["DIFFERENTIABILITY"] = GateCondition(
                        "FAIL", {"singular_point": _point_key(bad.singular_point),
                                 "generic_rank": bad.generic_rank})

        # 2. Dimension.
        try:
            dim_a = generic_dimension(prolonged_a)
            dim_b = generic_dimension(prolonged_b)
            status = "PASS" if dim_a == dim_b else "FAIL"
            conditions["DIMENSION"] = GateCondition(status, {"dims": (dim_a, dim_b)})
        except EmptyLocusError as exc:
            conditions["DIMENSION"] = GateCondition(
                "UNDETERMINED", {"note": f"empty locus: {exc}"})

        # 3. Transitivity surrogate.
        if cert_a or cert_b or points_a is None or points_b is None:
            conditions["TRANSITIVITY"] = GateCondition(
                "UNDETERMINED", {"note": "needs sampled on-locus points"})
        else:
            ok_a, info_a = _projection_full_rank(prolonged_a, points_a)
            ok_b, info_b = _projection_full_rank(prolonged_b, points_b)
            if ok_a and ok_b:
                conditions["TRANSITIVITY"] = GateCondition(
                    "PASS", {"A": info_a, "B": info_b})
            else:
                conditions["TRANSITIVITY"] = GateCondition(
                    "FAIL", {"A": info_a, "B": info_b})

        # 4. Symbol dimensions at order k + level.
        try:
            sym_a = symbol(system_a, k + level, GENERIC).dim
            sym_b = symbol(system_b, k + level, GENERIC).dim
            status = "PASS" if sym_a == sym_b else "FAIL"
            conditions["SYMBOLS"] = GateCondition(status, {"dims": (sym_a, sym_b)})
        except EmptyLocusError as exc:
            conditions["SYMBOLS"] = GateCondition(
                "UNDETERMINED", {"note": f"empty locus: {exc}"})

        # 5. Spencer cohomology dimensions at order k + level.
        if spencer_error is not None:
            conditions["DELTA_COHOMOLOGY"] = GateCondition(
                "UNDETERMINED", {"note": f"empty locus: {spencer_error}"})
        else:
            q = k + level
            dims_a = tuple(spencer_reports["A"].dim(q, p) for p in spencer_p)
            dims_b = tuple(spencer_reports["B"].dim(q, p) for p in spencer_p)
            status = "PASS" if dims_a == dims_b else "FAIL"
            conditions["DELTA_COHOMOLOGY"] = GateCondition(
                status, {"p_degrees": spencer_p, "dims": (dims_a, dims_b)})

        orders.append((level, conditions))
        if first_failure is None:
            for name in CONDITIONS:
                if conditions[name].status == "FAIL":
                    first_failure = (level, name)
                    break

    q0 = None
    if spencer_error is None:
        qa = spencer_reports["A"].two_acyclic_from
        qb = spencer_reports["B"].two_acyclic_from
        if qa is not None and qb is not None:
            q0 = max(qa, qb)

    if first_failure is not None:
        overall = "FAIL"
        caveat = None
    else:
        all_pass = all(cond.status == "PASS"
                       for _, conds in orders for cond in conds.values())
        if all_pass and q0 is not None:
            overall = "PASS_NECESSARY"
            caveat = NECESSITY_CAVEAT
        else:
            overall = "UNDETERMINED"
            caveat = NECESSITY_CAVEAT if q0 is None else None
    return GateReport((shape_a, shape_b), tuple(orders), overall, q0,
                      caveat, first_failure)


def gate_verdict(report: GateReport) -> EquivalenceVerdict:
    if report.overall == "PASS_NECESSARY":
        return EquivalenceVerdict(NECESSARY_PASS,
                                  certificate={"q0": report.q0,
                                               "caveat": report.caveat})
    if report.overall == "FAIL":
        level, name = report.first_failure
        return EquivalenceVerdict(
            NOT_EQUIVALENT,
            witness=dict(report.condition(level, name).witness),
            certificate={"condition": name, "order": level})
    return EquivalenceVerdict(UNDETERMINED,
                              certificate={"note": "gate inconclusive"})


# ---------------------------------------------------------------------------
# Conjugation membership for jet groupoids
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConjugationReport:
    requested: int
    checked: int
    passed: int
    status: str                     # ALL_PASS / COUNTEREXAMPLE / UNDETERMINED
    first_counterexample: dict | None
    diagnostics: str = ""

    @property
    def pass_fraction(self) -> Fraction:
        if not self.checked:
            return Fraction(0)
        return Fraction(self.passed, self.checked)


def point_to_jet(chart: JetChart, point: Mapping[str, Fraction]) -> JetOfMap:
    """Read a point of a jet chart with m = n as an invertible jet of a map.

    Jet coordinates are derivatives; Taylor tables divide by the factorial.
    """
    if chart.m != chart.n:
        raise ChartMismatchError("jets of maps need fiber dimension = base dimension")
    source = tuple(Fraction(point[v]) for v in chart.base)
    components = []
    for a in range(chart.m):
        table = {}
        for alpha in _positive_indices(chart.n, chart.order):
            value = Fraction(point[chart.jet_name(a, alpha)])
            if value:
                table[alpha] = value / index_factorial(alpha)
        components.append(table)
    target = tuple(Fraction(point[chart.jet_name(a, (0,) * chart.n)])
                   for a in range(chart.m))
    return JetOfMap(chart.order, source, target, components)


def jet_to_point(chart: JetChart, jet: JetOfMap) -> dict[str, Fraction]:
    point = {}
    for i, name in enumerate(chart.base):
        point[name] = jet.source[i]
    for a in range(chart.m):
        point[chart.jet_name(a, (0,) * chart.n)] = jet.target[a]
        for alpha in _positive_indices(chart.n, chart.order):
            point[chart.jet_name(a, alpha)] = \
                jet.coefficient(a, alpha) * index_factorial(alpha)
    return point


def _positive_indices(n, order):
    out = []
    for g in range(1, order + 1):
        out.extend(multi_indices_of_grade(n, g))
    return out


def conjugation_membership(transform: InvertibleMap, groupoid: PdeSystem,
                           target_groupoid: PdeSystem | None = None,
                           samples: int = 20, seed: int = 0) -> ConjugationReport:
    """Sampled test that conjugation by a base transformation maps one
    groupoid system into another.

    Elements are sampled as on-locus points with invertible linear part,
    conjugated through their jets, and checked against the target
    equations.  Reports the pass fraction and the first counterexample.
    """
    target = target_groupoid if target_groupoid is not None else groupoid
    chart = groupoid.chart
    if chart.m != chart.n:
        raise ChartMismatchError("groupoid systems need fiber dimension = base dimension")
    if target.chart != chart:
        raise ChartMismatchError("groupoids must share one jet chart")
    rng = seeded(seed, "conjugation")
    checked = 0
    passed = 0
    attempts = 0
    first_counterexample = None
    while checked < samples and attempts < 50 * samples:
        attempts += 1
        try:
            point = sample_on_locus(groupoid, 1, rng)[0]
        except (SamplingError, EmptyLocusError) as exc:
            return ConjugationReport(samples, 0, 0, "UNDETERMINED", None,
                                     f"sampling failed: {exc}")
        try:
            jet = point_to_jet(chart, point)
        except ValueError:
            continue           # linear part not invertible; not in the groupoid
        conjugated = conjugate_jet(transform, jet)
        image_point = jet_to_point(chart, conjugated)
        checked += 1
        violated = None
        for eq in target.equations:
            if eq.eval(image_point):
                violated = eq
                break
        if violated is None:
            passed += 1
        elif first_counterexample is None:
            first_counterexample = {
                "sample": {k: str(v) for k, v in sorted(point.items())},
                "conjugated": {k: str(v) for k, v in sorted(image_point.items())},
                "violated_equation": str(violated),
            }
    if checked == 0:
        return ConjugationReport(samples, 0, 0, "UNDETERMINED", None,
                                 "no invertible samples found on the locus")
    status = "ALL_PASS" if passed == checked else "COUNTEREXAMPLE"
    return ConjugationReport(samples, checked, passed, status, first_counterexample)
