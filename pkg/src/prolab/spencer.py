"""Symbols, the Spencer delta-complex, cohomology dimensions, and the
Cartan character test.

The symbol g_q of a system of order k at a point (or generically) is the
kernel of the top-order Jacobian of the (q-k)-th prolongation, viewed
inside S^q T* (x) R^m with basis indexed by (fiber, multi-index).  The
boundary map follows the coordinate rule

    delta(e_alpha (x) w (x) xi) = sum_i alpha_i e_{alpha-1_i} (x) w (x) (dx^i ^ xi),

so delta composed with delta is identically zero, and cohomology at
(q, p) is ker(delta on g_q (x) Lambda^p) modulo the image of
g_{q+1} (x) Lambda^{p-1}.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Mapping, Sequence, Union

from .algebra import ExactMatrix, RatFunc
from .errors import InternalInvariantError, NotOnLocusError
from .jets import index_factorial, multi_indices_of_grade
from .sampling import seeded
from .systems import PdeSystem, prolong

GENERIC = "GENERIC"

At = Union[str, Mapping[str, object]]


def symbol_index(n: int, m: int, q: int) -> tuple[tuple[int, tuple[int, ...]], ...]:
    """Basis order of S^q T* (x) R^m: multi-index major, fiber minor."""
    return tuple((a, alpha) for alpha in multi_indices_of_grade(n, q) for a in range(m))


@dataclass(frozen=True)
class SymbolSpace:
    order: int
    n: int
    m: int
    basis: tuple[tuple, ...]          # vectors in ambient coordinates
    at: object                        # GENERIC or the evaluation point
    index: tuple[tuple[int, tuple[int, ...]], ...]

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def ambient_dim(self) -> int:
        return len(self.index)

    def field_units(self):
        for vec in self.basis:
            for entry in vec:
                if isinstance(entry, RatFunc):
                    chart = entry.chart
                    return RatFunc.from_scalar(chart, 0), RatFunc.from_scalar(chart, 1)
        return Fraction(0), Fraction(1)


def symbol(system: PdeSystem, q: int, at: At = GENERIC) -> SymbolSpace:
    """g_q: kernel of the order-q Jacobian block of the prolonged equations."""
    k = system.chart.order
    if q < k:
        raise ValueError(f"symbol order {q} below the system order {k}")
    prolonged = prolong(system, q - k)
    chart = prolonged.chart
    index = symbol_index(chart.n, chart.m, q)
    names = [chart.jet_name(a, alpha) for a, alpha in index]
    if not prolonged.equations:
        zero, one = Fraction(0), Fraction(1)
        basis = tuple(tuple(one if j == i else zero for j in range(len(index)))
                      for i in range(len(index)))
        return SymbolSpace(q, chart.n, chart.m, basis, at, index)
    # Jet coordinates are derivative-normalized; the delta coordinate rule
    # below assumes the monomial normalization, which differs by a diagonal
    # alpha! rescale.  Scale the Jacobian columns so kernel vectors come
    # out monomial-normalized.
    scale = [index_factorial(alpha) for _, alpha in index]
    rows = [[eq.partial(name) * s for name, s in zip(names, scale)]
            for eq in prolonged.equations]
    if at == GENERIC:
        if all(p.is_constant() for row in rows for p in row):
            matrix = ExactMatrix([[p.constant_value() for p in row] for row in rows],
                                 cols=len(index))
        else:
            matrix = ExactMatrix(
                [[RatFunc.from_poly(p) for p in row] for row in rows], cols=len(index))
    else:
        point = chart.check_point(at)
        for eq in prolonged.equations:
            if eq.eval(point):
                raise NotOnLocusError(
                    f"point does not satisfy the prolonged equation {eq}")
        matrix = ExactMatrix([[p.eval(point) for p in row] for row in rows],
                             cols=len(index))
    basis = tuple(matrix.kernel_basis())
    return SymbolSpace(q, chart.n, chart.m, basis, at, index)


def _wedge_insert(i: int, subset: tuple[int, ...]) -> tuple[int, tuple[int, ...]] | None:
    """dx^i ^ e_subset as (sign, sorted subset), or None when i repeats."""
    if i in subset:
        return None
    position = sum(1 for j in subset if j < i)
    sign = -1 if position % 2 else 1
    merged = tuple(sorted(subset + (i,)))
    return sign, merged


def delta_matrix(space: SymbolSpace, p: int) -> ExactMatrix:
    """Matrix of delta: g_q (x) Lambda^p -> (S^{q-1} (x) R^m) (x) Lambda^{p+1}.

    Columns run over (basis vector, p-subset); rows over
    (ambient (a, beta) with |beta| = q-1, (p+1)-subset).  Entries are exact.
    """
    n, m, q = space.n, space.m, space.order
    zero, one = space.field_units()
    domain_subsets = list(itertools.combinations(range(n), p))
    codomain_subsets = list(itertools.combinations(range(n), p + 1))
    lower_index = symbol_index(n, m, q - 1) if q >= 1 else ()
    row_of = {}
    for r, (entry, subset) in enumerate(itertools.product(lower_index, codomain_subsets)):
        row_of[(entry, subset)] = r
    rows = len(lower_index) * len(codomain_subsets)
    cols = space.dim * len(domain_subsets)
    entries = [[zero] * cols for _ in range(rows)]
    col = 0
    for vec in space.basis:
        for subset in domain_subsets:
            for (a, alpha), value in zip(space.index, vec):
                if not value:
                    continue
                for i in range(n):
                    ai = alpha[i]
                    if not ai:
                        continue
                    ins = _wedge_insert(i, subset)
                    if ins is None:
                        continue
                    sign, merged = ins
                    lowered = alpha[:i] + (alpha[i] - 1,) + alpha[i + 1:]
                    r = row_of[((a, lowered), merged)]
                    entries[r][col] = entries[r][col] + value * (ai * sign)
            col += 1
    return ExactMatrix(entries, cols=cols, zero=zero, one=one)


def _lambda_block_columns(space: SymbolSpace, p: int) -> ExactMatrix:
    """Columns spanning g_q (x) Lambda^p inside the full ambient space."""
    n = space.n
    zero, one = space.field_units()
    subsets = list(itertools.combinations(range(n), p))
    rows = space.ambient_dim * len(subsets)
    cols = space.dim * len(subsets)
    entries = [[zero] * cols for _ in range(rows)]
    col = 0
    for vec in space.basis:
        for si, subset in enumerate(subsets):
            for amb, value in enumerate(vec):
                if value:
                    entries[amb * len(subsets) + si][col] = value
            col += 1
    return ExactMatrix(entries, cols=cols, zero=zero, one=one)


@dataclass(frozen=True)
class SpencerReport:
    dims: tuple[tuple[tuple[int, int], int], ...]   # ((q, p), dim H^{q,p})
    q_range: tuple[int, ...]
    p_range: tuple[int, ...]
    two_acyclic_from: int | None

    def dim(self, q: int, p: int) -> int:
        for (qq, pp), d in self.dims:
            if (qq, pp) == (q, p):
                return d
        raise KeyError((q, p))

    def as_dict(self) -> dict[tuple[int, int], int]:
        return {key: d for key, d in self.dims}


def spencer_cohomology(system: PdeSystem, q_range: Sequence[int],
                       p_range: Sequence[int], at: At = GENERIC) -> SpencerReport:
    """Exact dimensions of H^{q,p} over the requested ranges.

    2-acyclicity is scanned inside q_range: the reported order is the first
    q0 such that H^{q,1} = H^{q,2} = 0 for every q >= q0 in the range, or
    None when no such order exists within the range.
    """
    q_range = tuple(sorted(set(q_range)))
    p_range = tuple(sorted(set(p_range)))
    if not q_range or not p_range:
        raise ValueError("empty Spencer range")
    n = system.chart.n
    if max(p_range) > n:
        raise ValueError(f"form degree above the base dimension {n}")
    spaces: dict[int, SymbolSpace] = {}
    for q in range(min(q_range), max(q_range) + 2):
        spaces[q] = symbol(system, q, at)
    dims = []
    for q in q_range:
        for p in p_range:
            g = spaces[q]
            out_matrix = delta_matrix(g, p)
            domain_dim = g.dim * comb(n, p)
            kernel_dim = domain_dim - out_matrix.rank()
            image_dim = 0
            if p >= 1:
                gg = spaces[q + 1]
                in_matrix = delta_matrix(gg, p - 1)
                image_dim = in_matrix.rank()
                _check_image_in_subspace(g, p, in_matrix)
            h = kernel_dim - image_dim
            if h < 0:
                raise InternalInvariantError(
                    f"negative cohomology dimension at (q={q}, p={p})")
            dims.append(((q, p), h))
    report = {key: d for key, d in dims}
    two_from = None
    check_ps = [p for p in (1, 2) if p in p_range or p <= n]
    for q0 in q_range:
        ok = True
        for q in q_range:
            if q < q0:
                continue
            for p in (1, 2):
                if p > n:
                    continue
                d = report.get((q, p))
                if d is None:
                    g = spaces[q]
                    out_matrix = delta_matrix(g, p)
                    kernel_dim = g.dim * comb(n, p) - out_matrix.rank()
                    image_dim = delta_matrix(spaces[q + 1], p - 1).rank()
                    d = kernel_dim - image_dim
                    report[(q, p)] = d
                if d != 0:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            two_from = q0
            break
    return SpencerReport(tuple(dims), q_range, p_range, two_from)


def _check_image_in_subspace(g: SymbolSpace, p: int, image_matrix: ExactMatrix):
    """The image of delta must land inside g_q (x) Lambda^p."""
    block = _lambda_block_columns(g, p)
    base_rank = block.rank()
    combined_rows = []
    for r in range(block.rows):
        combined_rows.append(list(block.entries[r]) + list(image_matrix.entries[r]))
    combined = ExactMatrix(combined_rows, cols=block.cols + image_matrix.cols,
                           zero=block.zero, one=block.one)
    if combined.rank() != base_rank:
        raise InternalInvariantError(
            "delta image escapes the symbol subspace; symbols are not a complex")


@dataclass(frozen=True)
class CartanReport:
    characters: tuple[int, ...]
    involutive: bool
    symbol_dim: int
    next_dim: int
    cartan_bound: int

    @property
    def verdict(self) -> str:
        return "INVOLUTIVE" if self.involutive else "NOT_INVOLUTIVE"


def _directional_derivative_matrix(n: int, m: int, q: int, direction, zero, one):
    """Matrix of the derivative along `direction`: S^q (x) R^m -> S^{q-1} (x) R^m."""
    upper = symbol_index(n, m, q)
    lower = symbol_index(n, m, q - 1)
    row_of = {entry: r for r, entry in enumerate(lower)}
    entries = [[zero] * len(upper) for _ in range(len(lower))]
    for c, (a, alpha) in enumerate(upper):
        for i in range(n):
            if not alpha[i] or not direction[i]:
                continue
            lowered = alpha[:i] + (alpha[i] - 1,) + alpha[i + 1:]
            r = row_of[(a, lowered)]
            entries[r][c] = entries[r][c] + one * direction[i] * alpha[i]
    return ExactMatrix(entries, cols=len(upper), zero=zero, one=one)


def cartan_characters(system: PdeSystem, at: At = GENERIC,
                      seed: int = 0, draws: int = 5) -> CartanReport:
    """Characters for a random rational flag, redrawn up to `draws` times;
    the lexicographically largest character vector is kept.  The verdict is
    INVOLUTIVE exactly when dim g_{q+1} equals sum_i i * alpha_i."""
    q = system.chart.order
    n, m = system.chart.n, system.chart.m
    g = symbol(system, q, at)
    g_next = symbol(system, q + 1, at)
    zero, one = g.field_units()
    rng = seeded(seed, "cartan-flag")
    best: tuple[int, ...] | None = None
    for _ in range(draws):
        directions = []
        while len(directions) < n:
            cand = tuple(Fraction(rng.randint(-4, 4)) for _ in range(n))
            trial = directions + [cand]
            if ExactMatrix([list(v) for v in trial], cols=n).rank() == len(trial):
                directions.append(cand)
        dims = [g.dim]
        basis_cols = ExactMatrix([list(v) for v in g.basis], cols=g.ambient_dim).transpose() \
            if g.dim else None
        current = basis_cols
        for i in range(n):
            if current is None or current.cols == 0:
                dims.append(0)
                continue
            dmat = _directional_derivative_matrix(n, m, q, directions[i], zero, one)
            image = dmat.matmul(current)
            coeffs = image.kernel_basis()
            if not coeffs:
                dims.append(0)
                current = None
                continue
            coeff_matrix = ExactMatrix([list(v) for v in coeffs],
                                       cols=current.cols, zero=zero, one=one).transpose()
            current = current.matmul(coeff_matrix)
            dims.append(current.cols)
        characters = tuple(dims[i] - dims[i + 1] for i in range(n))
        if best is None or characters > best:
            best = characters
    bound = sum((i + 1) * a for i, a in enumerate(best))
    return CartanReport(best, g_next.dim == bound, g.dim, g_next.dim, bound)
