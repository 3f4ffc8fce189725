"""Partial differential equations as polynomial loci in jet charts.

A system is a jet chart plus a finite list of polynomial equations, with an
optional explicit solved form mapping leading jet coordinates to polynomial
expressions in the remaining (parametric) coordinates.  Prolongation
adjoins all total derivatives of the equations; its agreement with the
tangency description on explicit systems is checked by `tangency_oracle`.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .algebra import ExactMatrix, Poly, generic_rank, term_key
from .errors import (
    ChartMismatchError,
    EmptyLocusError,
    NotOnLocusError,
    SamplingError,
    UnsupportedFormError,
)
from .jets import (
    JetChart,
    PolySection,
    enumerate_multi_indices,
    index_bump,
    index_order,
    section_jet_polys,
    total_derivative,
)
from .sampling import rational, seeded


def _solved_sort_key(chart: JetChart):
    order = {name: i for i, name in enumerate(chart.variables())}
    return lambda item: order[item[0]]


class PdeSystem:
    """Polynomial equations on a jet chart, optionally in solved form."""

    __slots__ = ("chart", "equations", "solved")

    def __init__(self, chart: JetChart, equations: Sequence[Poly],
                 solved: Mapping[str, Poly] | None = None):
        variables = chart.variables()
        eqs = []
        seen = set()
        for eq in equations:
            if eq.chart != variables:
                eq = eq.on_chart(variables)
            if eq.is_zero:
                raise ValueError("zero polynomial is not an equation")
            if eq not in seen:
                seen.add(eq)
                eqs.append(eq)
        solved_items = None
        if solved is not None:
            solved_items = []
            names = set()
            for name, expr in solved.items():
                kind = chart.resolve(name)
                if kind[0] != "jet":
                    raise UnsupportedFormError(f"{name!r} is not a jet coordinate")
                if name in names:
                    raise UnsupportedFormError(f"coordinate {name!r} solved twice")
                names.add(name)
                if expr.chart != variables:
                    expr = expr.on_chart(variables)
                solved_items.append((name, expr))
            for name, expr in solved_items:
                for used in expr.variables_used():
                    if used in names:
                        raise UnsupportedFormError(
                            f"solved expression for {name!r} uses solved coordinate {used!r}")
            solved_items.sort(key=_solved_sort_key(chart))
            reduced = [reduce_mod_solved(eq, dict(solved_items)) for eq in eqs]
            for eq, r in zip(eqs, reduced):
                if not r.is_zero:
                    raise UnsupportedFormError(
                        f"equation {eq} does not vanish under the solved form")
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "equations", tuple(eqs))
        object.__setattr__(self, "solved", tuple(solved_items) if solved_items is not None else None)

    def __setattr__(self, name, value):
        raise AttributeError("PdeSystem is immutable")

    @classmethod
    def make(cls, chart: JetChart, equations: Sequence[Poly] = (),
             solve: Mapping[str, Poly] | None = None) -> "PdeSystem":
        """Build a system, adding `lead - expr` equations for solved entries."""
        variables = chart.variables()
        eqs = [e if e.chart == variables else e.on_chart(variables) for e in equations]
        if solve:
            for name, expr in solve.items():
                expr = expr if expr.chart == variables else expr.on_chart(variables)
                candidate = chart.var(name) - expr
                if candidate not in eqs:
                    eqs.append(candidate)
        return cls(chart, eqs, solve)

    @property
    def explicit_form(self) -> dict[str, Poly] | None:
        return dict(self.solved) if self.solved is not None else None

    @property
    def is_explicit(self) -> bool:
        return self.solved is not None

    @property
    def order(self) -> int:
        return self.chart.order

    def solved_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.solved) if self.solved else ()

    def parametric_names(self) -> tuple[str, ...]:
        solved = set(self.solved_names())
        return tuple(v for v in self.chart.variables() if v not in solved)

    def __eq__(self, other):
        if not isinstance(other, PdeSystem):
            return NotImplemented
        return (self.chart == other.chart and self.equations == other.equations
                and self.solved == other.solved)

    def __repr__(self):
        return f"PdeSystem(order={self.order}, equations={len(self.equations)})"


def reduce_mod_solved(p: Poly, solved: Mapping[str, Poly]) -> Poly:
    """Substitute solved coordinates until none remain (bounded fixpoint)."""
    if not solved:
        return p
    chart = p.chart
    for _ in range(len(solved) + 1):
        used = [v for v in p.variables_used() if v in solved]
        if not used:
            return p
        p = p.substitute({v: solved[v] for v in used}, chart)
    raise UnsupportedFormError("solved form does not terminate (cyclic substitution)")


def prolong(system: PdeSystem, levels: int) -> PdeSystem:
    """Adjoin all total derivatives D^beta F for |beta| <= levels.

    The result lives on the order (k + levels) chart.  When the input is
    explicit, a solved form for the new top coordinates is propagated by
    differentiating and reducing the solved expressions; a collision between
    two derivations of the same coordinate drops the explicit form (the
    equations still define the locus).
    """
    if levels < 0:
        raise ValueError("prolongation level must be nonnegative")
    if levels == 0:
        return system
    chart = system.chart
    big = chart.raise_order(levels)
    n = chart.n
    equations = []
    for eq in system.equations:
        lifted = eq.on_chart(big.variables())
        table = {(0,) * n: lifted}
        for beta in enumerate_multi_indices(n, levels):
            if index_order(beta) == 0:
                continue
            i = next(j for j, e in enumerate(beta) if e)
            parent = beta[:i] + (beta[i] - 1,) + beta[i + 1:]
            table[beta] = total_derivative(big, table[parent], i, out_chart=big)
        for beta in enumerate_multi_indices(n, levels):
            equations.append(table[beta])

    solved = None
    if system.is_explicit:
        solved = _prolong_solved(system, big, levels)
    if solved is not None:
        return PdeSystem(big, equations, solved)
    return PdeSystem(big, equations, None)


def _prolong_solved(system: PdeSystem, big: JetChart, levels: int) -> dict[str, Poly] | None:
    n = system.chart.n
    accumulated: dict[str, Poly] = {
        name: expr.on_chart(big.variables()) for name, expr in system.solved
    }
    frontier = [(name, system.chart.resolve(name), accumulated[name])
                for name, _ in system.solved]
    for _ in range(levels):
        new_frontier = []
        for name, (_, a, alpha), expr in frontier:
            for i in range(n):
                target = big.jet_name(a, index_bump(alpha, i))
                derived = total_derivative(big, expr, i, out_chart=big)
                derived = reduce_mod_solved(derived, accumulated)
                if target in accumulated:
                    if accumulated[target] != derived:
                        return None
                    continue
                accumulated[target] = derived
                new_frontier.append((target, big.resolve(target), derived))
        frontier = new_frontier
        # Reduce earlier entries against newly solved coordinates so every
        # stored expression stays parametric.
        for key in list(accumulated):
            accumulated[key] = reduce_mod_solved(accumulated[key], accumulated)
    for key, expr in accumulated.items():
        if key in expr.variables_used():
            return None
    return accumulated


def inconsistency_certificate(equations: Sequence[Poly]):
    """A linear combination of the equations equal to a nonzero constant.

    Returns None when no such combination exists among the given
    polynomials (viewed as vectors over their monomials).  This detects
    exactly the linear-algebra-visible empty loci, e.g. hidden
    integrability conditions reducing to 1 = 0.
    """
    if not equations:
        return None
    chart = equations[0].chart
    zero_exp = (0,) * len(chart)
    monomials = sorted({e for eq in equations for e in eq.terms if e != zero_exp},
                       key=term_key)
    cols = monomials + [zero_exp]
    index = {e: i for i, e in enumerate(cols)}
    rows = []
    for eq in equations:
        row = [Fraction(0)] * len(cols)
        for e, c in eq.terms.items():
            row[index[e]] = c
        rows.append(row)
    reduced, pivots = ExactMatrix(rows, cols=len(cols)).rref()
    for r, c in enumerate(pivots):
        if c == len(cols) - 1:
            return {"pivot_row": r, "note": "equations span a nonzero constant"}
    return None


def generic_dimension(system: PdeSystem) -> int:
    """Chart dimension minus the generic rank of the equations' Jacobian."""
    cert = inconsistency_certificate(system.equations)
    if cert is not None:
        raise EmptyLocusError("the equations have no common zero", certificate=cert)
    dim = system.chart.dimension()
    if not system.equations:
        return dim
    variables = system.chart.variables()
    jacobian = [[eq.partial(v) for v in variables] for eq in system.equations]
    return dim - generic_rank(jacobian, chart=variables)


@dataclass(frozen=True)
class RegularityReport:
    verdict: str                      # "REGULAR" or "SINGULAR"
    generic_rank: int
    point_ranks: tuple[tuple[tuple[tuple[str, Fraction], ...], int], ...]
    singular_point: dict | None = None

    @property
    def is_regular(self) -> bool:
        return self.verdict == "REGULAR"


def regularity_check(system: PdeSystem, points: Sequence[Mapping]) -> RegularityReport:
    """Compare the Jacobian rank at each supplied on-locus point to the generic rank."""
    variables = system.chart.variables()
    if not system.equations:
        checked = tuple((tuple(sorted(system.chart.check_point(p).items())), 0)
                        for p in points)
        return RegularityReport("REGULAR", 0, checked)
    grank = generic_rank([[eq.partial(v) for v in variables] for eq in system.equations],
                         chart=variables)
    results = []
    singular = None
    for raw in points:
        point = system.chart.check_point(raw)
        for eq in system.equations:
            if eq.eval(point):
                raise NotOnLocusError(f"point {point} does not satisfy {eq}")
        rows = [[eq.partial(v).eval(point) for v in variables] for eq in system.equations]
        rank = ExactMatrix(rows, cols=len(variables)).rank()
        results.append((tuple(sorted(point.items())), rank))
        if rank != grank and singular is None:
            singular = point
    if singular is not None:
        return RegularityReport("SINGULAR", grank, tuple(results), singular)
    return RegularityReport("REGULAR", grank, tuple(results))


def is_solution(system: PdeSystem, sigma: PolySection) -> bool:
    """True iff every equation vanishes identically on the jet of sigma."""
    chart = system.chart
    if sigma.base != chart.base or sigma.fiber != chart.fiber:
        raise ChartMismatchError("section does not match the system's fibration")
    table = section_jet_polys(sigma, chart.order)
    assignment: dict[str, Poly] = dict(table)
    for eq in system.equations:
        if not eq.substitute(assignment, sigma.base).is_zero:
            return False
    return True


def tangency_oracle(system: PdeSystem) -> PdeSystem:
    """First prolongation of an explicit system, by differentiating the
    solved form along the base directions.

    Independent of `prolong`: it never touches the raw equation
    polynomials, only the solved expressions.  On explicit systems the two
    must define the same locus.
    """
    if not system.is_explicit:
        raise UnsupportedFormError("tangency prolongation requires an explicit system")
    chart = system.chart
    big = chart.raise_order(1)
    n = chart.n
    equations = [eq.on_chart(big.variables()) for eq in system.equations]
    solve: dict[str, Poly] = {name: expr.on_chart(big.variables())
                              for name, expr in system.solved}
    for name, expr in system.solved:
        _, a, alpha = chart.resolve(name)
        lifted = expr.on_chart(big.variables())
        for i in range(n):
            target = big.jet_name(a, index_bump(alpha, i))
            derived = total_derivative(big, lifted, i, out_chart=big)
            equations.append(big.var(target) - derived)
            if target not in solve:
                solve[target] = reduce_mod_solved(derived, solve)
    return PdeSystem.make(big, equations, solve)


def same_locus(a: PdeSystem, b: PdeSystem) -> bool:
    """Mutual reduction: each system's equations vanish under the other's solved form."""
    if a.chart != b.chart:
        return False
    if not (a.is_explicit and b.is_explicit):
        raise UnsupportedFormError("locus comparison needs explicit forms on both sides")
    bs = dict(b.solved)
    as_ = dict(a.solved)
    return (all(reduce_mod_solved(eq, bs).is_zero for eq in a.equations)
            and all(reduce_mod_solved(eq, as_).is_zero for eq in b.equations))


def sample_on_locus(system: PdeSystem, count: int, rng: random.Random,
                    span: int = 3) -> list[dict[str, Fraction]]:
    """Exact rational points on the locus.

    Two strategies: evaluate the solved form at random parametric values,
    or, for affine-linear systems, solve the linear system exactly and
    perturb along its kernel.  Anything else raises SamplingError.
    """
    variables = system.chart.variables()
    points: list[dict[str, Fraction]] = []
    if not system.equations:
        for _ in range(count):
            points.append({v: rational(rng, span) for v in variables})
        return points
    if system.is_explicit:
        solved = dict(system.solved)
        parametric = system.parametric_names()
        for _ in range(count):
            point = {v: rational(rng, span) for v in parametric}
            # Solved expressions only use parametric coordinates; pad the
            # remaining slots so Poly.eval sees a complete point.
            padded = point | {name: Fraction(0) for name in solved}
            for name, _ in system.solved:
                point[name] = solved[name].eval(padded)
            points.append(point)
        return points
    if all(eq.total_degree() <= 1 for eq in system.equations):
        rows = []
        zero_exp = (0,) * len(variables)
        for eq in system.equations:
            row = [Fraction(0)] * len(variables)
            for exp, c in eq.terms.items():
                if exp == zero_exp:
                    continue
                row[next(i for i, e in enumerate(exp) if e)] = c
            rows.append(row + [-eq.terms.get(zero_exp, Fraction(0))])
        reduced, pivots = ExactMatrix(rows, cols=len(variables) + 1).rref()
        if any(c == len(variables) for c in pivots):
            raise EmptyLocusError("linear system is inconsistent")
        particular = [Fraction(0)] * len(variables)
        for r, c in enumerate(pivots):
            particular[c] = reduced[r][len(variables)]
        kernel = ExactMatrix([row[:len(variables)] for row in rows],
                             cols=len(variables)).kernel_basis()
        for _ in range(count):
            vec = list(particular)
            for basis_vec in kernel:
                t = rational(rng, span)
                vec = [a + t * b for a, b in zip(vec, basis_vec)]
            points.append(dict(zip(variables, vec)))
        return points
    raise SamplingError(
        "no exact sampling strategy: the system is neither explicit nor affine-linear")


@dataclass(frozen=True)
class ProlongationReport:
    levels: tuple[int, ...]
    systems: tuple[PdeSystem, ...]
    dimensions: tuple[int, ...]
    regularity: tuple[str, ...]


def prolongation_report(system: PdeSystem, levels: int, seed: int = 0,
                        points: Sequence[Mapping] | None = None,
                        sample_count: int = 3) -> ProlongationReport:
    """Dimensions and sampled regularity for each prolongation level."""
    out_levels = []
    out_systems = []
    out_dims = []
    out_reg = []
    for level in range(levels + 1):
        prolonged = prolong(system, level)
        out_levels.append(level)
        out_systems.append(prolonged)
        out_dims.append(generic_dimension(prolonged))
        rng = seeded(seed, "prolongation", level)
        try:
            if level == 0 and points:
                pts = list(points)
            else:
                pts = sample_on_locus(prolonged, sample_count, rng)
            verdict = regularity_check(prolonged, pts).verdict
        except SamplingError:
            verdict = "UNDETERMINED"
        out_reg.append(verdict)
    return ProlongationReport(tuple(out_levels), tuple(out_systems),
                              tuple(out_dims), tuple(out_reg))
