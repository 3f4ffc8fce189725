"""Jet-space charts and the groupoid of invertible jets.

A chart `JetChart(base, fiber, order)` models the order-k jets of sections
of the trivial fibration R^n x R^m -> R^n on global coordinates.  Jet
coordinates are named after their fiber variable and multi-index, e.g.
`u[2,0]`; the plain fiber name stands for the empty multi-index.  Multi-
indices are enumerated grade by grade, lexicographically largest first
inside a grade, matching the polynomial term order.

Invertible jets of self-maps of R^n are stored as truncated Taylor tables
at the source point (not as polynomial representatives), so equality of
jets is plain structural equality and composition truncates eagerly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

from .algebra import ExactMatrix, Poly, as_fraction
from .errors import (
    ChartMismatchError,
    CompositionMismatchError,
    IncompletePointError,
    InverseVerificationError,
    OrderMismatchError,
)

MultiIndex = tuple[int, ...]


@lru_cache(maxsize=None)
def multi_indices_of_grade(n: int, grade: int) -> tuple[MultiIndex, ...]:
    """All multi-indices of length n with |alpha| = grade, lex-descending."""
    if n == 0:
        return ((),) if grade == 0 else ()
    if n == 1:
        return ((grade,),)
    out = []
    for first in range(grade, -1, -1):
        for rest in multi_indices_of_grade(n - 1, grade - first):
            out.append((first,) + rest)
    return tuple(out)


@lru_cache(maxsize=None)
def enumerate_multi_indices(n: int, k: int) -> tuple[MultiIndex, ...]:
    """All |alpha| <= k in graded order; count is C(n+k, k)."""
    out = []
    for g in range(k + 1):
        out.extend(multi_indices_of_grade(n, g))
    return tuple(out)


def index_order(alpha: MultiIndex) -> int:
    return sum(alpha)


def index_bump(alpha: MultiIndex, i: int) -> MultiIndex:
    if not 0 <= i < len(alpha):
        raise IndexError(f"direction {i} out of range for {alpha}")
    return alpha[:i] + (alpha[i] + 1,) + alpha[i + 1:]


def index_factorial(alpha: MultiIndex) -> int:
    out = 1
    for a in alpha:
        out *= math.factorial(a)
    return out


def format_multi_index(alpha: MultiIndex) -> str:
    return "[" + ",".join(str(a) for a in alpha) + "]"


@dataclass(frozen=True)
class JetChart:
    """Coordinates of J_k for the fibration R^n x R^m -> R^n."""

    base: tuple[str, ...]
    fiber: tuple[str, ...]
    order: int

    def __post_init__(self):
        names = self.base + self.fiber
        if len(set(names)) != len(names):
            raise ChartMismatchError(f"duplicate coordinate names in {names}")
        for name in names:
            if "[" in name or "]" in name or "," in name:
                raise ChartMismatchError(f"reserved characters in name {name!r}")
        if self.order < 0:
            raise ValueError("jet order must be nonnegative")
        if not self.base or not self.fiber:
            raise ChartMismatchError("base and fiber must both be nonempty")

    @property
    def n(self) -> int:
        return len(self.base)

    @property
    def m(self) -> int:
        return len(self.fiber)

    def jet_name(self, a: int, alpha: MultiIndex) -> str:
        if sum(alpha) == 0:
            return self.fiber[a]
        return self.fiber[a] + format_multi_index(alpha)

    def jet_coords(self) -> tuple[tuple[str, int, MultiIndex], ...]:
        return _jet_coords(self)

    def variables(self) -> tuple[str, ...]:
        return _variables(self)

    def dimension(self) -> int:
        return len(self.variables())

    def resolve(self, name: str):
        """Classify a coordinate name: ('base', i) or ('jet', a, alpha)."""
        table = _resolution(self)
        if name not in table:
            raise ChartMismatchError(f"unknown coordinate {name!r} on chart {self.variables()}")
        return table[name]

    def raise_order(self, by: int) -> "JetChart":
        return JetChart(self.base, self.fiber, self.order + by)

    def at_order(self, k: int) -> "JetChart":
        return JetChart(self.base, self.fiber, k)

    def var(self, name: str) -> Poly:
        return Poly.variable(self.variables(), name)

    def const(self, value) -> Poly:
        return Poly.const(self.variables(), value)

    def zero(self) -> Poly:
        return Poly.zero(self.variables())

    def top_grade(self, p: Poly) -> int:
        """Highest jet grade among coordinates appearing in p (base counts as 0)."""
        top = 0
        for name in p.variables_used():
            kind = self.resolve(name)
            if kind[0] == "jet":
                top = max(top, index_order(kind[2]))
        return top

    def check_point(self, point: Mapping[str, object]) -> dict[str, Fraction]:
        out = {}
        for v in self.variables():
            if v not in point:
                raise IncompletePointError(f"point is missing coordinate {v!r}")
            out[v] = as_fraction(point[v])
        return out


@lru_cache(maxsize=None)
def _jet_coords(chart: JetChart):
    out = []
    for alpha in enumerate_multi_indices(chart.n, chart.order):
        for a in range(chart.m):
            out.append((chart.jet_name(a, alpha), a, alpha))
    return tuple(out)


@lru_cache(maxsize=None)
def _variables(chart: JetChart):
    return chart.base + tuple(name for name, _, _ in _jet_coords(chart))


@lru_cache(maxsize=None)
def _resolution(chart: JetChart):
    table = {}
    for i, name in enumerate(chart.base):
        table[name] = ("base", i)
    for name, a, alpha in _jet_coords(chart):
        table[name] = ("jet", a, alpha)
    return table


def jet_dimension(chart: JetChart) -> int:
    """n + m * C(n+k, k), counted by explicit enumeration."""
    return chart.dimension()


def total_derivative(chart: JetChart, p: Poly, i: int,
                     out_chart: JetChart | None = None) -> Poly:
    """Total derivative D_i, raising the jet order by one.

    D_i F = dF/dx_i + sum over jet coordinates u^a_alpha of
    u^a_{alpha+1_i} * dF/du^a_alpha.  The result lives on `out_chart`
    (defaults to one order above `chart`); `p` may use coordinates up to
    out_chart.order - 1.
    """
    if not 0 <= i < chart.n:
        raise IndexError(f"base direction {i} out of range")
    out = out_chart or chart.raise_order(1)
    if out.base != chart.base or out.fiber != chart.fiber:
        raise ChartMismatchError("output chart must extend the input chart")
    p = p.on_chart(out.variables())
    if out.top_grade(p) > out.order - 1:
        raise ChartMismatchError(
            "polynomial involves coordinates of the output chart's top order; "
            "raise the output order by one")
    result = p.partial(out.base[i])
    for name, a, alpha in _jet_coords(out):
        if index_order(alpha) >= out.order:
            continue
        dp = p.partial(name)
        if dp.is_zero:
            continue
        result = result + dp * out.var(out.jet_name(a, index_bump(alpha, i)))
    return result


@dataclass(frozen=True)
class PolySection:
    """Polynomial section of R^n x R^m -> R^n: u^a = sigma^a(x)."""

    base: tuple[str, ...]
    fiber: tuple[str, ...]
    components: tuple[Poly, ...]

    def __post_init__(self):
        if len(self.components) != len(self.fiber):
            raise ChartMismatchError("one component per fiber variable required")
        for c in self.components:
            if c.chart != self.base:
                raise ChartMismatchError("section components must live on the base chart")

    @property
    def n(self):
        return len(self.base)

    @property
    def m(self):
        return len(self.fiber)

    def chart(self, k: int) -> JetChart:
        return JetChart(self.base, self.fiber, k)


def section_jet_polys(sigma: PolySection, k: int) -> dict[str, Poly]:
    """Symbolic holonomic jet: every u^a_alpha as a polynomial in x."""
    chart = sigma.chart(k)
    out: dict[str, Poly] = {}
    derivs: dict[tuple[int, MultiIndex], Poly] = {}
    for a, comp in enumerate(sigma.components):
        derivs[(a, (0,) * sigma.n)] = comp
    for alpha in enumerate_multi_indices(sigma.n, k):
        if index_order(alpha) == 0:
            continue
        i = next(j for j, e in enumerate(alpha) if e)
        parent = alpha[:i] + (alpha[i] - 1,) + alpha[i + 1:]
        for a in range(sigma.m):
            derivs[(a, alpha)] = derivs[(a, parent)].partial(sigma.base[i])
    for (a, alpha), p in derivs.items():
        out[chart.jet_name(a, alpha)] = p
    return out


def holonomic_jet(sigma: PolySection, x0: Mapping[str, object], k: int) -> dict[str, Fraction]:
    """Coordinates of j_k(sigma) at x0: u^a_alpha = (d^alpha sigma^a)(x0)."""
    point = {}
    for i, name in enumerate(sigma.base):
        if name not in x0:
            raise IncompletePointError(f"base point is missing {name!r}")
        point[name] = as_fraction(x0[name])
    table = section_jet_polys(sigma, k)
    out = dict(point)
    for name, p in table.items():
        out[name] = p.eval(point)
    return out


# ---------------------------------------------------------------------------
# Truncated Taylor tables and the jet groupoid
# ---------------------------------------------------------------------------

TaylorTable = Mapping[MultiIndex, Fraction]


def _tt_add(a: dict, b: TaylorTable) -> dict:
    out = dict(a)
    for k, v in b.items():
        s = out.get(k, Fraction(0)) + v
        if s:
            out[k] = s
        else:
            out.pop(k, None)
    return out


def _tt_scale(a: TaylorTable, c: Fraction) -> dict:
    if not c:
        return {}
    return {k: v * c for k, v in a.items()}


def _tt_mul(a: TaylorTable, b: TaylorTable, cap: int) -> dict:
    out: dict = {}
    for e1, c1 in a.items():
        g1 = sum(e1)
        for e2, c2 in b.items():
            if g1 + sum(e2) > cap:
                continue
            e = tuple(x + y for x, y in zip(e1, e2))
            s = out.get(e, Fraction(0)) + c1 * c2
            if s:
                out[e] = s
            else:
                out.pop(e, None)
    return out


class JetOfMap:
    """Invertible k-jet of a self-map of R^n, as a Taylor table at the source.

    `components[i]` maps multi-indices beta (1 <= |beta| <= order) to the
    Taylor coefficient of (x - source)^beta in the i-th component; the
    constant term is the target point.  The linear part must be invertible.
    """

    __slots__ = ("order", "source", "target", "components")

    def __init__(self, order: int, source: Sequence, target: Sequence,
                 components: Sequence[TaylorTable]):
        if order < 1:
            raise ValueError("jets of maps require order >= 1")
        source = tuple(as_fraction(v) for v in source)
        target = tuple(as_fraction(v) for v in target)
        n = len(source)
        if len(target) != n or len(components) != n:
            raise ChartMismatchError("source, target, and components must share a dimension")
        comps = []
        for table in components:
            clean = {}
            for beta, c in table.items():
                beta = tuple(beta)
                if len(beta) != n:
                    raise ChartMismatchError(f"multi-index {beta} has wrong length")
                g = sum(beta)
                if g < 1 or g > order:
                    if c:
                        raise ValueError(f"coefficient at grade {g} outside 1..{order}")
                    continue
                c = as_fraction(c)
                if c:
                    clean[beta] = c
            comps.append(clean)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "components", tuple(comps))
        if ExactMatrix(self.linear_part()).rank() != n:
            raise ValueError("linear part of the jet is not invertible")

    def __setattr__(self, name, value):
        raise AttributeError("JetOfMap is immutable")

    @property
    def n(self) -> int:
        return len(self.source)

    def linear_part(self) -> list[list[Fraction]]:
        n = self.n
        units = [tuple(1 if j == i else 0 for j in range(n)) for i in range(n)]
        return [[self.components[i].get(units[j], Fraction(0)) for j in range(n)]
                for i in range(n)]

    def coefficient(self, i: int, beta: MultiIndex) -> Fraction:
        return self.components[i].get(tuple(beta), Fraction(0))

    def __eq__(self, other):
        if not isinstance(other, JetOfMap):
            return NotImplemented
        return (self.order == other.order and self.source == other.source
                and self.target == other.target and self.components == other.components)

    def __hash__(self):
        return hash((self.order, self.source, self.target,
                     tuple(frozenset(c.items()) for c in self.components)))

    def __repr__(self):
        return (f"JetOfMap(order={self.order}, source={self.source}, "
                f"target={self.target})")


def identity_jet(point: Sequence, order: int) -> JetOfMap:
    point = tuple(as_fraction(v) for v in point)
    n = len(point)
    comps = []
    for i in range(n):
        beta = tuple(1 if j == i else 0 for j in range(n))
        comps.append({beta: Fraction(1)})
    return JetOfMap(order, point, point, comps)


def jet_compose(after: JetOfMap, before: JetOfMap) -> JetOfMap:
    """Composite jet after o before, truncated to the common order."""
    if after.order != before.order:
        raise OrderMismatchError(f"orders differ: {after.order} vs {before.order}")
    if after.n != before.n:
        raise CompositionMismatchError("jet dimensions differ")
    if before.target != after.source:
        raise CompositionMismatchError(
            f"target {before.target} of the first jet is not the source "
            f"{after.source} of the second")
    k = after.order
    n = after.n
    # Displacement of `before` output around after's source, as Taylor tables.
    inner = [dict(t) for t in before.components]
    powers: list[list[dict]] = [[{(0,) * n: Fraction(1)}, comp] for comp in inner]

    def inner_power(axis: int, e: int) -> dict:
        cache = powers[axis]
        while len(cache) <= e:
            cache.append(_tt_mul(cache[-1], cache[1], k))
        return cache[e]

    out_components = [{} for _ in range(n)]
    for j in range(n):
        for beta, c in after.components[j].items():
            term = {(0,) * n: Fraction(1)}
            for axis, e in enumerate(beta):
                if e:
                    term = _tt_mul(term, inner_power(axis, e), k)
            out_components[j] = _tt_add(out_components[j], _tt_scale(term, c))
    for j in range(n):
        out_components[j].pop((0,) * n, None)
    return JetOfMap(k, before.source, after.target, out_components)


def jet_invert(jet: JetOfMap) -> JetOfMap:
    """Inverse jet, solved order by order from q = L^-1 (id - N(q))."""
    n = jet.n
    k = jet.order
    lin = ExactMatrix(jet.linear_part())
    lin_inv = lin.inverse().entries
    units = [tuple(1 if j == i else 0 for j in range(n)) for i in range(n)]
    nonlinear = []
    for i in range(n):
        tail = {b: c for b, c in jet.components[i].items() if sum(b) >= 2}
        nonlinear.append(tail)
    # Seed with the linear inverse, then iterate; each pass fixes one grade.
    q = [{units[j]: lin_inv[i][j] for j in range(n) if lin_inv[i][j]} for i in range(n)]
    for _ in range(max(k - 1, 0)):
        powers: list[list[dict]] = [[{(0,) * n: Fraction(1)}, comp] for comp in q]

        def q_power(axis: int, e: int) -> dict:
            cache = powers[axis]
            while len(cache) <= e:
                cache.append(_tt_mul(cache[-1], cache[1], k))
            return cache[e]

        composed = []
        for i in range(n):
            acc: dict = {}
            for beta, c in nonlinear[i].items():
                term = {(0,) * n: Fraction(1)}
                for axis, e in enumerate(beta):
                    if e:
                        term = _tt_mul(term, q_power(axis, e), k)
                acc = _tt_add(acc, _tt_scale(term, c))
            composed.append(acc)
        q_next = []
        for i in range(n):
            acc: dict = {}
            for j in range(n):
                delta = _tt_add(_tt_scale(composed[j], Fraction(-1)), {units[j]: Fraction(1)})
                acc = _tt_add(acc, _tt_scale(delta, lin_inv[i][j]))
            q_next.append(acc)
        q = q_next
    return JetOfMap(k, jet.target, jet.source, q)


@dataclass(frozen=True)
class PolyMap:
    """Polynomial self-map of R^n on named coordinates."""

    names: tuple[str, ...]
    components: tuple[Poly, ...]

    def __post_init__(self):
        if len(self.components) != len(self.names):
            raise ChartMismatchError("a self-map needs one component per coordinate")
        for c in self.components:
            if c.chart != self.names:
                raise ChartMismatchError("components must live on the declared chart")

    @property
    def n(self):
        return len(self.names)

    @classmethod
    def identity(cls, names: Sequence[str]) -> "PolyMap":
        names = tuple(names)
        return cls(names, tuple(Poly.variable(names, v) for v in names))

    def apply(self, point: Sequence) -> tuple[Fraction, ...]:
        values = {v: as_fraction(p) for v, p in zip(self.names, point)}
        return tuple(c.eval(values) for c in self.components)

    def compose(self, inner: "PolyMap") -> "PolyMap":
        """self o inner, exact polynomial composition."""
        if inner.n != self.n:
            raise ChartMismatchError("composition dimension mismatch")
        assignment = {v: p.on_chart(inner.names) if p.chart != inner.names else p
                      for v, p in zip(self.names, inner.components)}
        comps = tuple(c.substitute(assignment, inner.names) for c in self.components)
        return PolyMap(inner.names, comps)

    def taylor_jet(self, at: Sequence, order: int) -> JetOfMap:
        """The order-k jet of this map at a point, as a Taylor table."""
        at = tuple(as_fraction(v) for v in at)
        n = self.n
        shifted = {v: Poly.variable(self.names, v) + Poly.const(self.names, a)
                   for v, a in zip(self.names, at)}
        target = []
        comps = []
        for c in self.components:
            expanded = c.substitute(shifted, self.names)
            table = {}
            const = Fraction(0)
            for exp, coeff in expanded.terms.items():
                g = sum(exp)
                if g == 0:
                    const = coeff
                elif g <= order:
                    table[exp] = coeff
            target.append(const)
            comps.append(table)
        return JetOfMap(order, at, target, comps)


def jet_to_polymap(jet: JetOfMap, names: Sequence[str]) -> PolyMap:
    """A polynomial representative of a jet (degree = jet order)."""
    names = tuple(names)
    if len(names) != jet.n:
        raise ChartMismatchError("name count must match the jet dimension")
    comps = []
    displacements = [Poly.variable(names, v) - Poly.const(names, s)
                     for v, s in zip(names, jet.source)]
    for i in range(jet.n):
        p = Poly.const(names, jet.target[i])
        for beta, c in sorted(jet.components[i].items()):
            term = Poly.const(names, c)
            for axis, e in enumerate(beta):
                if e:
                    term = term * displacements[axis] ** e
            p = p + term
        comps.append(p)
    return PolyMap(names, tuple(comps))


@dataclass(frozen=True)
class InvertibleMap:
    """A polynomial self-map bundled with its declared polynomial inverse."""

    forward: PolyMap
    inverse: PolyMap

    def __post_init__(self):
        if self.forward.names != self.inverse.names:
            raise ChartMismatchError("map and inverse must share coordinates")

    def verify_at(self, point: Sequence, order: int):
        """Check inverse o forward = identity to the given order at a point."""
        point = tuple(as_fraction(v) for v in point)
        fwd = self.forward.taylor_jet(point, order)
        image = self.forward.apply(point)
        back = self.inverse.taylor_jet(image, order)
        if jet_compose(back, fwd) != identity_jet(point, order):
            raise InverseVerificationError(
                f"declared inverse does not undo the map to order {order} at {point}")


def conjugate_jet(transform: InvertibleMap, jet: JetOfMap, verify: bool = True) -> JetOfMap:
    """Conjugation j_k(X) o A o j_k(X^-1), based at X(source(A))."""
    k = jet.order
    if verify:
        transform.verify_at(jet.source, k)
        if jet.target != jet.source:
            transform.verify_at(jet.target, k)
    src_image = transform.forward.apply(jet.source)
    back = transform.inverse.taylor_jet(src_image, k)
    if transform.inverse.apply(src_image) != jet.source:
        raise InverseVerificationError(
            "declared inverse does not return X(source) to the source point")
    fwd = transform.forward.taylor_jet(jet.target, k)
    return jet_compose(fwd, jet_compose(jet, back))
