"""Exact Pfaffian-system calculus.

Derived systems and flags, rank/co-rank, Frobenius integrability,
pointwise characteristic spaces, flag classification, and the canonical
chained models.  Everything is computed generically over the rational-
function field of the chart; point evaluations are exact.

The membership test behind the derived system uses the ideal criterion
for independent 1-forms: a 2-form tau lies in span(S) ^ Lambda^1 exactly
when tau ^ theta_1 ^ ... ^ theta_s = 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Mapping, Sequence

from .algebra import ExactMatrix, Poly, RatFunc, generic_rank
from .errors import ChartMismatchError, SingularPointError
from .forms import DiffForm, exterior_derivative, wedge_all
from .sampling import rational, seeded


class PfaffSystem:
    """A finite set of generating 1-forms on a named coordinate chart."""

    __slots__ = ("chart", "generators")

    def __init__(self, chart: Sequence[str], generators: Sequence[DiffForm]):
        chart = tuple(chart)
        gens = []
        for g in generators:
            if g.degree != 1:
                raise ValueError("Pfaffian generators must be 1-forms")
            if g.chart != chart:
                raise ChartMismatchError("generator lives on a different chart")
            if g:
                gens.append(g)
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "generators", tuple(gens))

    def __setattr__(self, name, value):
        raise AttributeError("PfaffSystem is immutable")

    def __len__(self):
        return len(self.generators)

    def __iter__(self):
        return iter(self.generators)

    def coefficient_matrix(self) -> list[list[RatFunc]]:
        n = len(self.chart)
        return [[g.coefficient((i,)) for i in range(n)] for g in self.generators]

    def __repr__(self):
        return f"PfaffSystem(dim={len(self.chart)}, generators={len(self.generators)})"


def rank_corank(system: PfaffSystem) -> tuple[int, int]:
    """Generic rank of the generators and its complement in the chart."""
    if not system.generators:
        return 0, len(system.chart)
    rank = generic_rank(system.coefficient_matrix(), chart=system.chart)
    return rank, len(system.chart) - rank


def independent_generators(system: PfaffSystem) -> list[DiffForm]:
    """A deterministic generically independent generating subset."""
    chosen: list[DiffForm] = []
    rows: list[list[RatFunc]] = []
    rank = 0
    n = len(system.chart)
    for g in system.generators:
        candidate = rows + [[g.coefficient((i,)) for i in range(n)]]
        r = generic_rank(candidate, chart=system.chart)
        if r > rank:
            rank = r
            rows = candidate
            chosen.append(g)
    return chosen


def derived_system(system: PfaffSystem) -> PfaffSystem:
    """Forms in the span whose exterior derivative vanishes mod the system.

    With independent generators theta_j and Theta = theta_1 ^ ... ^ theta_s,
    a combination sum c_j theta_j survives iff sum c_j (d theta_j ^ Theta)
    vanishes; that is one exact linear system over the function field.
    """
    gens = independent_generators(system)
    if not gens:
        return PfaffSystem(system.chart, ())
    theta_top = wedge_all(gens)
    obstructions = [exterior_derivative(g).wedge(theta_top) for g in gens]
    s = len(gens)
    degree = obstructions[0].degree
    keys = sorted({k for ob in obstructions for k in ob.coeffs})
    if not keys:
        return PfaffSystem(system.chart, gens)
    zero = RatFunc.from_scalar(system.chart, 0)
    one = RatFunc.from_scalar(system.chart, 1)
    columns = ExactMatrix(
        [[obstructions[j].coefficient(key) for j in range(s)] for key in keys],
        cols=s, zero=zero, one=one)
    new_gens = []
    for combo in columns.kernel_basis():
        form = DiffForm.zero(system.chart, 1)
        for c, g in zip(combo, gens):
            if c:
                form = form + g * c
        if form:
            new_gens.append(_primitive_form(form))
    return PfaffSystem(system.chart, new_gens)


def _primitive_form(form: DiffForm) -> DiffForm:
    """Clear denominators and rational content from a form's coefficients."""
    chart = form.chart
    scale = Poly.const(chart, 1)
    for value in form.coeffs.values():
        if not value.den.is_constant():
            scale = scale * value.den
    cleared = form * RatFunc.from_poly(scale)
    contents = []
    for value in cleared.coeffs.values():
        if not value.is_polynomial():
            return cleared
        contents.append(value.as_poly().content())
    if not contents:
        return cleared
    common = contents[0]
    for c in contents[1:]:
        common = Fraction(
            gcd(common.numerator, c.numerator),
            (common.denominator * c.denominator) // gcd(common.denominator, c.denominator))
    if common and common != 1:
        cleared = cleared * (1 / common)
    lead_key = max(cleared.coeffs)
    lead = cleared.coeffs[lead_key]
    if lead.is_polynomial() and lead.as_poly().leading_term()[1] < 0:
        cleared = -cleared
    return cleared


@dataclass(frozen=True)
class DerivedFlag:
    systems: tuple[PfaffSystem, ...]
    ranks: tuple[int, ...]
    length: int


def derived_flag(system: PfaffSystem) -> DerivedFlag:
    """Iterate derived systems until the rank stabilizes or hits zero.

    `length` is the first index whose rank equals the final stabilized
    rank, so a genuine flag of length L reports ranks (L, ..., 1, 0) and
    length L, while an integrable system reports length 0.
    """
    systems = [system]
    ranks = [rank_corank(system)[0]]
    while True:
        nxt = derived_system(systems[-1])
        r = rank_corank(nxt)[0]
        systems.append(nxt)
        ranks.append(r)
        if r == 0 or r == ranks[-2]:
            break
    final = ranks[-1]
    length = next(i for i, r in enumerate(ranks) if r == final)
    return DerivedFlag(tuple(systems), tuple(ranks), length)


def frobenius_test(system: PfaffSystem) -> bool:
    """Wedge criterion: d(theta_i) ^ theta_1 ^ ... ^ theta_s = 0 for all i."""
    gens = independent_generators(system)
    if not gens:
        return True
    theta_top = wedge_all(gens)
    return all(not exterior_derivative(g).wedge(theta_top) for g in gens)


def characteristic_space(system: PfaffSystem, point: Mapping) -> tuple[int, list[tuple]]:
    """Vectors annihilated by the system whose contraction with every
    d(theta) stays inside the system, at one rational point."""
    chart = system.chart
    full_point = {}
    for name in chart:
        if name not in point:
            raise SingularPointError(f"point is missing coordinate {name!r}")
        full_point[name] = point[name]
    n = len(chart)
    gens = list(system.generators)
    rows = [[g.coefficient((i,)).eval(full_point) for i in range(n)] for g in gens]
    coeff = ExactMatrix(rows, cols=n)
    if gens and coeff.rank() != len(gens):
        raise SingularPointError("generators are dependent at the given point")
    annihilator = coeff.kernel_basis()
    constraints = [list(r) for r in rows]
    for g in gens:
        two_form = exterior_derivative(g).at_point(full_point)
        B = [[Fraction(0)] * n for _ in range(n)]
        for (i, j), v in two_form.items():
            B[i][j] = v
            B[j][i] = -v
        # (X -| d theta) must lie in the span of the theta rows, i.e. be
        # annihilated by every kernel vector of the coefficient matrix.
        for kv in annihilator:
            constraints.append([
                sum(kv[i] * B[i][j] for i in range(n)) for j in range(n)
            ])
    if not constraints:
        constraints_matrix = ExactMatrix([], cols=n)
    else:
        constraints_matrix = ExactMatrix(constraints, cols=n)
    basis = constraints_matrix.kernel_basis()
    return len(basis), basis


@dataclass(frozen=True)
class FlagVerdict:
    is_flag: bool
    length: int | None
    reason: str
    ranks: tuple[int, ...]
    corank: int

    def __str__(self):
        if self.is_flag:
            return f"FLAG({self.length})"
        return f"NOT_FLAG({self.reason})"


def flag_classify(system: PfaffSystem, seed: int = 0, samples: int = 5) -> FlagVerdict:
    """FLAG(length) iff co-rank 2, stepwise rank drops to zero, and
    vanishing characteristics at sampled points."""
    rank, corank = rank_corank(system)
    flag = derived_flag(system)
    if corank != 2:
        return FlagVerdict(False, None, f"co-rank is {corank}, not 2", flag.ranks, corank)
    expected = tuple(range(rank, -1, -1))
    if flag.ranks != expected:
        if flag.ranks[-1] == flag.ranks[-2] and flag.ranks[-1] > 0:
            reason = f"derived ranks {flag.ranks} stabilize above zero (integrable part)"
        else:
            reason = f"derived ranks {flag.ranks} do not drop by one to zero"
        return FlagVerdict(False, None, reason, flag.ranks, corank)
    rng = seeded(seed, "flag-classify")
    checked = 0
    attempts = 0
    while checked < samples and attempts < 40 * samples:
        attempts += 1
        point = {name: rational(rng) for name in system.chart}
        try:
            dim, _ = characteristic_space(system, point)
        except SingularPointError:
            continue
        if dim != 0:
            return FlagVerdict(False, None,
                               f"characteristics have dimension {dim} at a sampled point",
                               flag.ranks, corank)
        checked += 1
    if checked < samples:
        return FlagVerdict(False, None,
                           "could not sample enough regular points for characteristics",
                           flag.ranks, corank)
    return FlagVerdict(True, flag.length, "sampled characteristics vanish", flag.ranks, corank)


def goursat_model(length: int) -> PfaffSystem:
    """The chained model: coordinates (x, y0..yL), forms d(y_i) - y_{i+1} d(x)."""
    if length < 1:
        raise ValueError("the chained model needs length >= 1")
    chart = ("x",) + tuple(f"y{i}" for i in range(length + 1))
    gens = []
    for i in range(length):
        coeffs = {
            (chart.index(f"y{i}"),): Fraction(1),
            (0,): -Poly.variable(chart, f"y{i+1}"),
        }
        gens.append(DiffForm(chart, 1, coeffs))
    return PfaffSystem(chart, gens)


def darboux_system() -> PfaffSystem:
    """dy - z dx on (x, y, z), the length-1 chained model in classical names."""
    chart = ("x", "y", "z")
    return PfaffSystem(chart, [DiffForm(chart, 1, {
        (1,): Fraction(1),
        (0,): -Poly.variable(chart, "z"),
    })])
