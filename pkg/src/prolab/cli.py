"""Command-line frontend.

    plab <command> <files...> [--order N] [--orders N] [--levels N]
         [--point "x=...,u=..."] [--seed N] [--json] [--name NAME]

Commands: prolong, dimension, symbol, spencer, cartan, derived-flag,
classify-pfaff, frobenius, pfaff-equiv, ode-equiv, equiv-gate,
equiv-verify, jet-compose.

Exit status: 0 when a report was computed (whatever the verdict),
1 on usage or parse errors, 2 on an internal invariant violation.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from .algebra import term_key
from .dsl import SourceFile, parse
from .equivalence import (
    gate,
    ode_nonsingular_rule,
    pfaff_rules,
    verify_absolute,
    verify_merihedric,
)
from .errors import EmptyLocusError, InternalInvariantError, PlabError
from .jets import PolyMap, jet_compose
from .pfaffian import derived_flag, flag_classify, frobenius_test, rank_corank
from .report import Report
from .spencer import GENERIC, cartan_characters, spencer_cohomology, symbol
from .systems import generic_dimension, prolongation_report

CONDITION_ORDER = ("DIFFERENTIABILITY", "DIMENSION", "TRANSITIVITY",
                   "SYMBOLS", "DELTA_COHOMOLOGY")


class CliUsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise CliUsageError(message)


def build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(prog="plab", description=__doc__,
                             formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(command, files, **flags):
        p = sub.add_parser(command)
        for f in files:
            p.add_argument(f)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--json", action="store_true")
        for flag, kw in flags.items():
            p.add_argument(f"--{flag.replace('_', '-')}", **kw)
        return p

    add("prolong", ["file"], levels={"type": int, "default": 1},
        name={"default": None})
    add("dimension", ["file"], name={"default": None})
    add("symbol", ["file"], order={"type": int, "required": True},
        point={"default": None}, name={"default": None})
    add("spencer", ["file"], orders={"type": int, "default": 2},
        name={"default": None})
    add("cartan", ["file"], name={"default": None})
    add("derived-flag", ["file"], name={"default": None})
    add("classify-pfaff", ["file"], name={"default": None})
    add("frobenius", ["file"], name={"default": None})
    add("pfaff-equiv", ["file_a", "file_b"])
    add("ode-equiv", ["file_a", "file_b"],
        point_a={"required": True}, point_b={"required": True})
    add("equiv-gate", ["file_a", "file_b"],
        orders={"type": int, "default": 2})
    add("equiv-verify", ["file_a", "file_b", "map_file"],
        levels={"type": int, "default": 0}, map_name={"default": None})
    add("jet-compose", ["map_file", "first", "second"],
        order={"type": int, "required": True}, point={"required": True})
    return parser


def load_file(path: str, report: Report) -> SourceFile:
    p = Path(path)
    try:
        data = p.read_bytes()
    except OSError as exc:
        raise CliUsageError(f"cannot read {path}: {exc}") from None
    report.add_input(p.name, data)
    return parse(data.decode("utf-8"), path)


def pick(source: SourceFile, kind: str, name: str | None):
    if name is not None:
        decl = source.find(name)
        if decl is None:
            raise CliUsageError(f"no declaration named {name!r} in {source.path}")
        if decl.kind != kind:
            raise CliUsageError(f"{name!r} is a {decl.kind}, expected a {kind}")
        return decl
    decls = source.declarations(kind)
    if not decls:
        raise CliUsageError(f"no {kind} declaration in {source.path}")
    return decls[0]


def parse_point_argument(text: str, sources: list[SourceFile]) -> dict[str, Fraction]:
    """Inline "x=1,u[1]=1/2" assignments, or the name of a point declaration."""
    if "=" not in text:
        for source in sources:
            decl = source.find(text)
            if decl is not None and decl.kind == "point":
                return decl.as_dict()
        raise CliUsageError(f"no point declaration named {text!r}")
    out: dict[str, Fraction] = {}
    parts = []
    depth = 0
    current = ""
    for ch in text:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append(current)
            current = ""
        else:
            current += ch
    if current.strip():
        parts.append(current)
    for part in parts:
        if "=" not in part:
            raise CliUsageError(f"bad point assignment {part!r}")
        key, _, value = part.partition("=")
        key = key.strip().replace(" ", "")
        if key.endswith("]") and "[" in key:
            stem, _, inside = key[:-1].partition("[")
            indices = tuple(int(s) for s in inside.split(","))
            key = stem if not any(indices) else f"{stem}[{inside}]"
        try:
            out[key] = Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise CliUsageError(f"bad rational value in {part!r}") from None
    return out


# ---------------------------------------------------------------------------
# Command handlers
# ---------------------------------------------------------------------------


def cmd_prolong(args) -> Report:
    report = Report("prolong", seed=args.seed)
    source = load_file(args.file, report)
    decl = pick(source, "system", args.name)
    report.kv("system", decl.name)
    report.kv("operation", "prolong")
    try:
        result = prolongation_report(decl.system, args.levels, seed=args.seed)
    except EmptyLocusError as exc:
        report.kv("verdict", "EMPTY_LOCUS")
        report.warn(str(exc))
        return report
    rows = []
    for level, system, dim, reg in zip(result.levels, result.systems,
                                       result.dimensions, result.regularity):
        rows.append([level, system.chart.order, len(system.equations), dim, reg])
    report.table("prolongations", ["level", "order", "equations", "dimension",
                                   "regularity"], rows)
    for level, system in zip(result.levels, result.systems):
        for eq in system.equations:
            report.kv(f"level{level}.eq", eq)
    return report


def cmd_dimension(args) -> Report:
    report = Report("dimension", seed=args.seed)
    source = load_file(args.file, report)
    decl = pick(source, "system", args.name)
    report.kv("system", decl.name)
    report.kv("operation", "generic_dimension")
    try:
        report.kv("dimension", generic_dimension(decl.system))
    except EmptyLocusError as exc:
        report.kv("verdict", "EMPTY_LOCUS")
        report.warn(str(exc))
    return report


def cmd_symbol(args) -> Report:
    report = Report("symbol", seed=args.seed)
    source = load_file(args.file, report)
    decl = pick(source, "system", args.name)
    report.kv("system", decl.name)
    report.kv("operation", "symbol")
    report.kv("order", args.order)
    at = GENERIC
    if args.point:
        at = parse_point_argument(args.point, [source])
    space = symbol(decl.system, args.order, at)
    report.kv("at", "GENERIC" if at == GENERIC else dict(at))
    report.kv("ambient_dimension", space.ambient_dim)
    report.kv("dimension", space.dim)
    chart = decl.system.chart.at_order(args.order)
    for i, vector in enumerate(space.basis):
        parts = []
        for (a, alpha), value in zip(space.index, vector):
            if value:
                parts.append(f"{chart.jet_name(a, alpha)}: {value}")
        report.kv(f"basis[{i}]", "; ".join(parts))
    return report


def cmd_spencer(args) -> Report:
    report = Report("spencer", seed=args.seed)
    source = load_file(args.file, report)
    decl = pick(source, "system", args.name)
    system = decl.system
    k = system.chart.order
    n = system.chart.n
    report.kv("system", decl.name)
    report.kv("operation", "spencer_cohomology")
    q_range = tuple(range(k, k + args.orders + 1))
    p_range = tuple(p for p in range(0, min(n, 2) + 1))
    result = spencer_cohomology(system, q_range, p_range)
    rows = []
    for q in q_range:
        rows.append([q] + [result.dim(q, p) for p in p_range])
    report.table("cohomology dimensions", ["q"] + [f"H^(q,{p})" for p in p_range], rows)
    report.kv("two_acyclic_from",
              result.two_acyclic_from if result.two_acyclic_from is not None
              else "UNDETERMINED (not reached in range)")
    return report


def cmd_cartan(args) -> Report:
    report = Report("cartan", seed=args.seed)
    source = load_file(args.file, report)
    decl = pick(source, "system", args.name)
    result = cartan_characters(decl.system, seed=args.seed)
    report.kv("system", decl.name)
    report.kv("operation", "cartan_characters")
    report.kv("characters", result.characters)
    report.kv("symbol_dimension", result.symbol_dim)
    report.kv("next_symbol_dimension", result.next_dim)
    report.kv("cartan_bound", result.cartan_bound)
    report.kv("verdict", result.verdict)
    return report


def _pfaff_decl(args, report):
    source = load_file(args.file, report)
    return pick(source, "pfaffian", args.name)


def cmd_derived_flag(args) -> Report:
    report = Report("derived-flag", seed=args.seed)
    decl = _pfaff_decl(args, report)
    flag = derived_flag(decl.system)
    report.kv("pfaffian", decl.name)
    report.kv("operation", "derived_flag")
    report.kv("ranks", flag.ranks)
    report.kv("length", flag.length)
    for i, system in enumerate(flag.systems):
        for form in system.generators:
            report.kv(f"step{i}.form", form)
    return report


def cmd_classify_pfaff(args) -> Report:
    report = Report("classify-pfaff", seed=args.seed)
    decl = _pfaff_decl(args, report)
    verdict = flag_classify(decl.system, seed=args.seed)
    report.kv("pfaffian", decl.name)
    report.kv("operation", "flag_classify")
    report.kv("rank_corank", rank_corank(decl.system))
    report.kv("derived_ranks", verdict.ranks)
    report.kv("verdict", str(verdict))
    report.kv("detail", verdict.reason)
    if verdict.is_flag:
        report.warn("characteristics checked at seeded sample points only")
    return report


def cmd_frobenius(args) -> Report:
    report = Report("frobenius", seed=args.seed)
    decl = _pfaff_decl(args, report)
    report.kv("pfaffian", decl.name)
    report.kv("operation", "frobenius_test")
    report.kv("integrable", frobenius_test(decl.system))
    return report


def cmd_pfaff_equiv(args) -> Report:
    report = Report("pfaff-equiv", seed=args.seed)
    source_a = load_file(args.file_a, report)
    source_b = load_file(args.file_b, report)
    decl_a = pick(source_a, "pfaffian", None)
    decl_b = pick(source_b, "pfaffian", None)
    verdict = pfaff_rules(decl_a.system, decl_b.system)
    report.kv("first", decl_a.name)
    report.kv("second", decl_b.name)
    report.kv("operation", "pfaff_rules")
    report.kv("verdict", str(verdict))
    for key in sorted(verdict.certificate):
        report.kv(f"certificate.{key}", verdict.certificate[key])
    if verdict.witness:
        report.kv("witness", verdict.witness)
    return report


def cmd_ode_equiv(args) -> Report:
    report = Report("ode-equiv", seed=args.seed)
    source_a = load_file(args.file_a, report)
    source_b = load_file(args.file_b, report)
    decl_a = pick(source_a, "system", None)
    decl_b = pick(source_b, "system", None)
    point_a = parse_point_argument(args.point_a, [source_a, source_b])
    point_b = parse_point_argument(args.point_b, [source_a, source_b])
    verdict = ode_nonsingular_rule(decl_a.system, decl_b.system, point_a, point_b)
    report.kv("first", decl_a.name)
    report.kv("second", decl_b.name)
    report.kv("operation", "ode_nonsingular_rule")
    report.kv("verdict", str(verdict))
    for key in sorted(verdict.certificate):
        report.kv(f"certificate.{key}", verdict.certificate[key])
    if verdict.witness:
        report.kv("witness", verdict.witness)
    return report


def cmd_equiv_gate(args) -> Report:
    report = Report("equiv-gate", seed=args.seed)
    source_a = load_file(args.file_a, report)
    source_b = load_file(args.file_b, report)
    decl_a = pick(source_a, "system", None)
    decl_b = pick(source_b, "system", None)
    result = gate(decl_a.system, decl_b.system, args.orders, seed=args.seed)
    report.kv("first", decl_a.name)
    report.kv("second", decl_b.name)
    report.kv("operation", "gate")
    report.kv("shapes", result.shape)
    rows = []
    for level, conditions in result.orders:
        rows.append([level] + [conditions[c].status for c in CONDITION_ORDER])
    report.table("conditions", ["order"] + list(CONDITION_ORDER), rows)
    for level, conditions in result.orders:
        for name in CONDITION_ORDER:
            cond = conditions[name]
            if cond.witness:
                report.kv(f"order{level}.{name}", cond.witness)
    report.kv("two_acyclic_from",
              result.q0 if result.q0 is not None else "UNDETERMINED")
    if result.first_failure is not None:
        level, name = result.first_failure
        report.kv("verdict", f"FAIL({name}, order {level})")
    else:
        report.kv("verdict", result.overall)
    if result.caveat:
        report.warn(result.caveat)
    return report


def cmd_equiv_verify(args) -> Report:
    report = Report("equiv-verify", seed=args.seed)
    source_a = load_file(args.file_a, report)
    source_b = load_file(args.file_b, report)
    map_source = load_file(args.map_file, report)
    decl_a = pick(source_a, "system", None)
    decl_b = pick(source_b, "system", None)
    map_decl = pick(map_source, "map", args.map_name)
    report.kv("first", decl_a.name)
    report.kv("second", decl_b.name)
    report.kv("map", map_decl.name)
    if args.levels > 0:
        report.kv("operation", "verify_merihedric")
        verdict = verify_merihedric(decl_a.system, decl_b.system,
                                    map_decl.fibered, args.levels, seed=args.seed)
    else:
        report.kv("operation", "verify_absolute")
        verdict = verify_absolute(decl_a.system, decl_b.system,
                                  map_decl.fibered, seed=args.seed)
    report.kv("verdict", str(verdict))
    if verdict.witness:
        report.kv("witness", verdict.witness)
    for key in sorted(verdict.certificate):
        report.kv(f"certificate.{key}", verdict.certificate[key])
    if verdict.kind == "UNDETERMINED":
        report.warn("sampled mode cannot certify equivalence")
    return report


def cmd_jet_compose(args) -> Report:
    report = Report("jet-compose", seed=args.seed)
    source = load_file(args.map_file, report)
    first = pick(source, "map", args.first)
    second = pick(source, "map", args.second)
    point = parse_point_argument(args.point, [source])
    fm = second.fibered
    names = fm.base_names + fm.fiber_names
    if first.fibered.base_names + first.fibered.fiber_names != names:
        raise CliUsageError("maps must share base and fiber variables")

    def total_map(fibered) -> PolyMap:
        comps = tuple(p.on_chart(names) for p in fibered.base) + tuple(fibered.fiber)
        return PolyMap(names, comps)

    at = []
    for name in names:
        if name not in point:
            raise CliUsageError(f"--point is missing coordinate {name!r}")
        at.append(point[name])
    inner = total_map(second.fibered).taylor_jet(tuple(at), args.order)
    outer = total_map(first.fibered).taylor_jet(inner.target, args.order)
    composed = jet_compose(outer, inner)
    report.kv("operation", "jet_compose")
    report.kv("composite", f"{first.name} o {second.name}")
    report.kv("order", composed.order)
    report.kv("source", composed.source)
    report.kv("target", composed.target)
    for i, name in enumerate(names):
        table = composed.components[i]
        for beta in sorted(table, key=term_key):
            report.kv(f"coeff.{name}[{','.join(str(b) for b in beta)}]", table[beta])
    return report


HANDLERS = {
    "prolong": cmd_prolong,
    "dimension": cmd_dimension,
    "symbol": cmd_symbol,
    "spencer": cmd_spencer,
    "cartan": cmd_cartan,
    "derived-flag": cmd_derived_flag,
    "classify-pfaff": cmd_classify_pfaff,
    "frobenius": cmd_frobenius,
    "pfaff-equiv": cmd_pfaff_equiv,
    "ode-equiv": cmd_ode_equiv,
    "equiv-gate": cmd_equiv_gate,
    "equiv-verify": cmd_equiv_verify,
    "jet-compose": cmd_jet_compose,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except CliUsageError as exc:
        print(f"plab: usage error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 0
    try:
        report = HANDLERS[args.command](args)
    except CliUsageError as exc:
        print(f"plab: usage error: {exc}", file=sys.stderr)
        return 1
    except InternalInvariantError as exc:
        print(f"plab: internal invariant violation: {exc}", file=sys.stderr)
        return 2
    except PlabError as exc:
        print(f"plab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - anything unexpected is a bug
        print(f"plab: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(report.render_json() if args.json else report.render_text())
    return 0


if __name__ == "__main__":
    sys.exit(main())
