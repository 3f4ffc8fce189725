"""Input-file parser for systems, Pfaffian systems, maps, and points.

Grammar (semicolon-terminated items, '#' comments to end of line):

    file     := decl*
    decl     := system | pfaffian | map | point
    system   := "system" NAME "{" "base" ids ";" "fiber" ids ";"
                "order" INT ";" ( "eq" ":" expr ";" | "solve" var "=" expr ";" )* "}"
    pfaffian := "pfaffian" NAME "{" "coords" ids ";" ( "form" ":" expr ";" )+ "}"
    map      := "map" NAME "{" "base" ":" rules "fiber" ":" rules
                "inverse" "base" ":" rules "inverse" "fiber" ":" rules "}"
    rules    := ( NAME "->" expr ";" )+
    point    := "point" NAME "{" ( var "=" expr ";" )* "}"
    ids      := NAME ("," NAME)*
    var      := NAME ( "[" INT ("," INT)* "]" )?
    expr     := term (("+"|"-") term)* ; term := factor (("*"|"/") factor)*
    factor   := ("+"|"-") factor | atom ("^" INT)?
    atom     := INT | var | "(" expr ")" | "d" "(" NAME ")"

Jet coordinates are written with bracketed exponent vectors, `u[2,0]`;
an all-zero vector collapses to the plain fiber name.  Numeric literals
are exact rationals (`3`, `1/2`, `-5/3` via unary minus).  `d(...)` is
only meaningful inside Pfaffian form expressions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .algebra import Poly, RatFunc
from .equivalence import FiberedMap
from .errors import DslSyntaxError
from .forms import DiffForm
from .jets import JetChart
from .pfaffian import PfaffSystem
from .systems import PdeSystem

_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)|(?P<comment>#[^\n]*)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<int>[0-9]+)|(?P<arrow>->)|(?P<sym>[{}\[\]();,=:+\-*/^])")


@dataclass(frozen=True)
class Token:
    kind: str          # name / int / sym / arrow / eof
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    line = 1
    line_start = 0
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise DslSyntaxError(f"unexpected character {text[pos]!r}",
                                 line, pos - line_start + 1)
        kind = match.lastgroup
        chunk = match.group()
        if kind in ("ws", "comment"):
            newlines = chunk.count("\n")
            if newlines:
                line += newlines
                line_start = match.start() + chunk.rfind("\n") + 1
        else:
            tokens.append(Token(kind, chunk, line, match.start() - line_start + 1))
        pos = match.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


@dataclass(frozen=True)
class SystemDecl:
    name: str
    system: PdeSystem
    eq_texts: tuple[str, ...]
    solve_texts: tuple[tuple[str, str], ...]

    kind = "system"


@dataclass(frozen=True)
class PfaffianDecl:
    name: str
    system: PfaffSystem

    kind = "pfaffian"


@dataclass(frozen=True)
class MapDecl:
    name: str
    fibered: FiberedMap

    kind = "map"


@dataclass(frozen=True)
class PointDecl:
    name: str
    assignments: tuple[tuple[str, Fraction], ...]

    kind = "point"

    def as_dict(self) -> dict[str, Fraction]:
        return dict(self.assignments)


@dataclass(frozen=True)
class SourceFile:
    path: str
    text: str
    decls: tuple

    def declarations(self, kind: str | None = None):
        return [d for d in self.decls if kind is None or d.kind == kind]

    def find(self, name: str):
        for d in self.decls:
            if d.name == name:
                return d
        return None


# Resolver: (name, indices or None, token) -> canonical chart variable name.
Resolver = Callable[[str, tuple[int, ...] | None, Token], str]


class Parser:
    def __init__(self, text: str, path: str = "<input>"):
        self.path = path
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0

    # -- token plumbing -----------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, message: str, tok: Token | None = None):
        tok = tok or self.peek()
        raise DslSyntaxError(message, tok.line, tok.column)

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok.text != text:
            self.fail(f"expected {text!r}, found {tok.text!r}", tok)
        return self.advance()

    def expect_name(self, what: str = "identifier") -> Token:
        tok = self.peek()
        if tok.kind != "name":
            self.fail(f"expected {what}, found {tok.text!r}", tok)
        return self.advance()

    def expect_int(self) -> int:
        tok = self.peek()
        if tok.kind != "int":
            self.fail(f"expected an integer, found {tok.text!r}", tok)
        self.advance()
        return int(tok.text)

    def at(self, text: str) -> bool:
        return self.peek().text == text

    # -- file level ----------------------------------------------------------

    def parse_file(self) -> SourceFile:
        decls = []
        names = set()
        while self.peek().kind != "eof":
            tok = self.peek()
            if tok.text == "system":
                decl = self.parse_system()
            elif tok.text == "pfaffian":
                decl = self.parse_pfaffian()
            elif tok.text == "map":
                decl = self.parse_map()
            elif tok.text == "point":
                decl = self.parse_point()
            else:
                self.fail("expected a declaration (system, pfaffian, map, or point)")
            if decl.name in names:
                self.fail(f"duplicate declaration name {decl.name!r}", tok)
            names.add(decl.name)
            decls.append(decl)
        return SourceFile(self.path, self.text, tuple(decls))

    def parse_ids(self) -> tuple[str, ...]:
        out = [self.expect_name("a variable name").text]
        while self.at(","):
            self.advance()
            out.append(self.expect_name("a variable name").text)
        return tuple(out)

    def parse_varref(self) -> tuple[str, tuple[int, ...] | None, Token]:
        tok = self.expect_name("a variable")
        indices = None
        if self.at("["):
            self.advance()
            idx = [self.expect_int()]
            while self.at(","):
                self.advance()
                idx.append(self.expect_int())
            self.expect("]")
            indices = tuple(idx)
        return tok.text, indices, tok

    # -- declarations ----------------------------------------------------------

    def parse_system(self) -> SystemDecl:
        self.expect("system")
        name = self.expect_name("a declaration name").text
        self.expect("{")
        self.expect("base")
        base = self.parse_ids()
        self.expect(";")
        self.expect("fiber")
        fiber = self.parse_ids()
        self.expect(";")
        self.expect("order")
        order = self.expect_int()
        self.expect(";")
        try:
            chart = JetChart(base, fiber, order)
        except Exception as exc:
            self.fail(str(exc))
        resolver = self.jet_resolver(chart)
        equations: list[Poly] = []
        solve: dict[str, Poly] = {}
        eq_texts = []
        solve_texts = []
        while not self.at("}"):
            if self.at("eq"):
                self.advance()
                self.expect(":")
                start = self.pos
                poly = self.parse_poly(chart.variables(), resolver)
                eq_texts.append(self.slice_text(start))
                self.expect(";")
                equations.append(poly)
            elif self.at("solve"):
                self.advance()
                ref_name, indices, tok = self.parse_varref()
                lead = resolver(ref_name, indices, tok)
                kind = chart.resolve(lead)
                if kind[0] != "jet":
                    self.fail(f"{lead!r} is not a jet coordinate", tok)
                if lead in solve:
                    self.fail(f"coordinate {lead!r} solved twice", tok)
                self.expect("=")
                start = self.pos
                expr = self.parse_poly(chart.variables(), resolver)
                solve_texts.append((lead, self.slice_text(start)))
                self.expect(";")
                solve[lead] = expr
            else:
                self.fail("expected 'eq', 'solve', or '}'")
        self.expect("}")
        try:
            system = PdeSystem.make(chart, equations, solve if solve or not equations else None)
        except Exception as exc:
            self.fail(f"invalid system {name!r}: {exc}")
        return SystemDecl(name, system, tuple(eq_texts), tuple(solve_texts))

    def parse_pfaffian(self) -> PfaffianDecl:
        self.expect("pfaffian")
        name = self.expect_name("a declaration name").text
        self.expect("{")
        self.expect("coords")
        coords = self.parse_ids()
        if len(set(coords)) != len(coords):
            self.fail("duplicate coordinate names")
        self.expect(";")
        forms = []
        resolver = self.plain_resolver(coords)
        while not self.at("}"):
            self.expect("form")
            self.expect(":")
            value = self.parse_expr(coords, resolver, allow_d=True)
            self.expect(";")
            if isinstance(value, DiffForm):
                if value.degree != 1:
                    self.fail("Pfaffian generators must be 1-forms")
                forms.append(value)
            else:
                self.fail("a Pfaffian form must contain d(...) differentials")
        if not forms:
            self.fail("a Pfaffian declaration needs at least one form")
        self.expect("}")
        return PfaffianDecl(name, PfaffSystem(coords, forms))

    def parse_map(self) -> MapDecl:
        self.expect("map")
        name = self.expect_name("a declaration name").text
        self.expect("{")
        self.expect("base")
        self.expect(":")
        base_rules = self.parse_rules()
        base_names = tuple(r[0] for r in base_rules)
        self.expect("fiber")
        self.expect(":")
        fiber_rules = self.parse_rules()
        fiber_names = tuple(r[0] for r in fiber_rules)
        self.expect("inverse")
        self.expect("base")
        self.expect(":")
        inv_base_rules = self.parse_rules()
        self.expect("inverse")
        self.expect("fiber")
        self.expect(":")
        inv_fiber_rules = self.parse_rules()
        self.expect("}")
        total = base_names + fiber_names
        if len(set(total)) != len(total):
            self.fail("base and fiber variables must be distinct")
        if tuple(r[0] for r in inv_base_rules) != base_names:
            self.fail("inverse base rules must cover the base variables in order")
        if tuple(r[0] for r in inv_fiber_rules) != fiber_names:
            self.fail("inverse fiber rules must cover the fiber variables in order")

        def build(rules, chart):
            resolver = self.plain_resolver(chart)
            out = []
            for _, tokens_range in rules:
                out.append(self.eval_tokens_poly(tokens_range, chart, resolver))
            return tuple(out)

        base = build(base_rules, base_names)
        inv_base = build(inv_base_rules, base_names)
        fiber = build(fiber_rules, total)
        inv_fiber = build(inv_fiber_rules, total)
        try:
            fibered = FiberedMap(base_names, fiber_names, base, fiber, inv_base, inv_fiber)
        except Exception as exc:
            self.fail(f"invalid map {name!r}: {exc}")
        return MapDecl(name, fibered)

    def parse_rules(self) -> list[tuple[str, tuple[int, int]]]:
        rules = []
        while self.peek().kind == "name" and self.tokens[self.pos + 1].kind == "arrow":
            lhs = self.expect_name().text
            self.expect("->")
            start = self.pos
            depth = 0
            while True:
                tok = self.peek()
                if tok.kind == "eof":
                    self.fail("unterminated rule")
                if tok.text == "(" or tok.text == "[":
                    depth += 1
                elif tok.text == ")" or tok.text == "]":
                    depth -= 1
                elif tok.text == ";" and depth == 0:
                    break
                self.advance()
            end = self.pos
            self.expect(";")
            rules.append((lhs, (start, end)))
        if not rules:
            self.fail("expected at least one rule (name -> expression ;)")
        return rules

    def eval_tokens_poly(self, token_range, chart, resolver) -> Poly:
        saved = self.pos
        start, end = token_range
        self.pos = start
        poly = self.parse_poly(chart, resolver, stop=end)
        if self.pos != end:
            self.fail("unexpected trailing tokens in rule expression")
        self.pos = saved
        return poly

    def parse_point(self) -> PointDecl:
        self.expect("point")
        name = self.expect_name("a declaration name").text
        self.expect("{")
        assignments = []
        seen = set()
        while not self.at("}"):
            ref_name, indices, tok = self.parse_varref()
            if indices is not None and all(i == 0 for i in indices):
                key = ref_name
            elif indices is not None:
                key = ref_name + "[" + ",".join(str(i) for i in indices) + "]"
            else:
                key = ref_name
            if key in seen:
                self.fail(f"coordinate {key!r} assigned twice", tok)
            seen.add(key)
            self.expect("=")
            value = self.parse_expr((), self.constant_resolver(), allow_d=False)
            self.expect(";")
            if isinstance(value, DiffForm) or not value.is_constant():
                self.fail("point values must be rational constants", tok)
            assignments.append((key, value.constant_value()))
        self.expect("}")
        return PointDecl(name, tuple(assignments))

    # -- expression evaluation ----------------------------------------------------

    def jet_resolver(self, chart: JetChart) -> Resolver:
        def resolve(name, indices, tok):
            if indices is None:
                if name in chart.base or name in chart.fiber:
                    return name
                self.fail(f"unknown coordinate {name!r}", tok)
            if name not in chart.fiber:
                self.fail(f"{name!r} is not a fiber variable", tok)
            if len(indices) != chart.n:
                self.fail(f"multi-index {indices} needs {chart.n} entries", tok)
            if sum(indices) > chart.order:
                self.fail(f"multi-index {indices} exceeds order {chart.order}", tok)
            a = chart.fiber.index(name)
            return chart.jet_name(a, tuple(indices))
        return resolve

    def plain_resolver(self, chart: Sequence[str]) -> Resolver:
        chart = tuple(chart)

        def resolve(name, indices, tok):
            if indices is not None:
                self.fail(f"{name!r} does not take a multi-index here", tok)
            if name not in chart:
                self.fail(f"unknown coordinate {name!r}", tok)
            return name
        return resolve

    def constant_resolver(self) -> Resolver:
        def resolve(name, indices, tok):
            self.fail(f"variables are not allowed here ({name!r})", tok)
        return resolve

    def parse_poly(self, chart: Sequence[str], resolver: Resolver,
                   stop: int | None = None) -> Poly:
        tok = self.peek()
        value = self.parse_expr(chart, resolver, allow_d=False, stop=stop)
        if isinstance(value, DiffForm):
            self.fail("differential forms are not allowed here", tok)
        if not value.den.is_constant():
            self.fail("polynomial expression required (division by a variable)", tok)
        return value.as_poly()

    def parse_expr(self, chart, resolver, allow_d: bool, stop: int | None = None):
        value = self.parse_term(chart, resolver, allow_d, stop)
        while (stop is None or self.pos < stop) and self.peek().text in ("+", "-"):
            op_tok = self.advance()
            rhs = self.parse_term(chart, resolver, allow_d, stop)
            value = self._combine(value, rhs, op_tok)
        return value

    def _combine(self, lhs, rhs, op_tok: Token):
        negate = op_tok.text == "-"
        lhs_form = isinstance(lhs, DiffForm)
        rhs_form = isinstance(rhs, DiffForm)
        if lhs_form and rhs_form:
            return lhs - rhs if negate else lhs + rhs
        if not lhs_form and not rhs_form:
            return lhs - rhs if negate else lhs + rhs
        # Mixed: tolerated only when the scalar side is zero, e.g. "0 + d(x)".
        if lhs_form and not rhs:
            return lhs
        if rhs_form and not lhs:
            return -rhs if negate else rhs
        self.fail("cannot add a scalar and a differential form", op_tok)

    def parse_term(self, chart, resolver, allow_d, stop):
        value = self.parse_factor(chart, resolver, allow_d, stop)
        while (stop is None or self.pos < stop) and self.peek().text in ("*", "/"):
            op_tok = self.advance()
            rhs = self.parse_factor(chart, resolver, allow_d, stop)
            if op_tok.text == "*":
                if isinstance(value, DiffForm) and isinstance(rhs, DiffForm):
                    self.fail("wedge products are not supported in input expressions",
                              op_tok)
                if isinstance(rhs, DiffForm):
                    value = rhs * value
                elif isinstance(value, DiffForm):
                    value = value * rhs
                else:
                    value = value * rhs
            else:
                if isinstance(rhs, DiffForm):
                    self.fail("cannot divide by a differential form", op_tok)
                if rhs.is_zero:
                    self.fail("division by zero", op_tok)
                if isinstance(value, DiffForm):
                    one = RatFunc.from_scalar(value.chart, 1)
                    value = value * (one / rhs)
                else:
                    value = value / rhs
        return value

    def parse_factor(self, chart, resolver, allow_d, stop):
        tok = self.peek()
        if tok.text in ("+", "-"):
            self.advance()
            value = self.parse_factor(chart, resolver, allow_d, stop)
            return value if tok.text == "+" else -value
        value = self.parse_atom(chart, resolver, allow_d, stop)
        if (stop is None or self.pos < stop) and self.at("^"):
            caret = self.advance()
            exponent = self.expect_int()
            if isinstance(value, DiffForm):
                self.fail("differential forms cannot be raised to powers", caret)
            out = RatFunc.from_scalar(tuple(chart), 1)
            for _ in range(exponent):
                out = out * value
            return out
        return value

    def parse_atom(self, chart, resolver, allow_d, stop):
        tok = self.peek()
        chart = tuple(chart)
        if tok.kind == "int":
            self.advance()
            return RatFunc.from_scalar(chart, int(tok.text))
        if tok.text == "(":
            self.advance()
            value = self.parse_expr(chart, resolver, allow_d, stop)
            self.expect(")")
            return value
        if tok.kind == "name":
            if tok.text == "d" and self.tokens[self.pos + 1].text == "(":
                if not allow_d:
                    self.fail("d(...) is only allowed in Pfaffian form expressions", tok)
                self.advance()
                self.expect("(")
                inner = self.expect_name("a coordinate name")
                resolver(inner.text, None, inner)
                self.expect(")")
                return DiffForm.d_coordinate(chart, inner.text)
            name, indices, name_tok = self.parse_varref()
            canonical = resolver(name, indices, name_tok)
            return RatFunc.variable(chart, canonical)
        self.fail(f"unexpected token {tok.text!r} in expression", tok)

    def slice_text(self, start: int) -> str:
        """Raw source text between token `start` and the current position."""
        if start >= len(self.tokens) or self.pos == start:
            return ""
        first = self.tokens[start]
        last = self.tokens[self.pos - 1]
        begin = self._token_offset(first)
        end = self._token_offset(last) + len(last.text)
        return self.text[begin:end].strip()

    def _token_offset(self, tok: Token) -> int:
        lines = self.text.split("\n")
        return sum(len(l) + 1 for l in lines[:tok.line - 1]) + tok.column - 1


def parse(text: str, path: str = "<input>") -> SourceFile:
    return Parser(text, path).parse_file()


# ---------------------------------------------------------------------------
# Pretty-printing (round-trip support)
# ---------------------------------------------------------------------------


def render_decl(decl) -> str:
    if decl.kind == "system":
        system = decl.system
        chart = system.chart
        lines = [f"system {decl.name} {{"]
        lines.append(f"  base {', '.join(chart.base)};")
        lines.append(f"  fiber {', '.join(chart.fiber)};")
        lines.append(f"  order {chart.order};")
        derived = set()
        if system.solved is not None:
            for name, expr in system.solved:
                derived.add(chart.var(name) - expr)
        for eq in system.equations:
            if eq not in derived:
                lines.append(f"  eq: {eq};")
        if system.solved is not None:
            for name, expr in system.solved:
                lines.append(f"  solve {name} = {expr};")
        lines.append("}")
        return "\n".join(lines)
    if decl.kind == "pfaffian":
        system = decl.system
        lines = [f"pfaffian {decl.name} {{",
                 f"  coords {', '.join(system.chart)};"]
        for form in system.generators:
            lines.append(f"  form: {form};")
        lines.append("}")
        return "\n".join(lines)
    if decl.kind == "map":
        fm = decl.fibered
        lines = [f"map {decl.name} {{"]
        lines.append("  base:")
        for name, comp in zip(fm.base_names, fm.base):
            lines.append(f"    {name} -> {comp};")
        lines.append("  fiber:")
        for name, comp in zip(fm.fiber_names, fm.fiber):
            lines.append(f"    {name} -> {comp};")
        lines.append("  inverse base:")
        for name, comp in zip(fm.base_names, fm.inv_base):
            lines.append(f"    {name} -> {comp};")
        lines.append("  inverse fiber:")
        for name, comp in zip(fm.fiber_names, fm.inv_fiber):
            lines.append(f"    {name} -> {comp};")
        lines.append("}")
        return "\n".join(lines)
    if decl.kind == "point":
        lines = [f"point {decl.name} {{"]
        for key, value in decl.assignments:
            lines.append(f"  {key} = {value};")
        lines.append("}")
        return "\n".join(lines)
    raise ValueError(f"unknown declaration kind {decl.kind!r}")


def render_file(source: SourceFile) -> str:
    return "\n\n".join(render_decl(d) for d in source.decls) + "\n"
