from fractions import Fraction
from pathlib import Path

import pytest

from prolab.dsl import parse, render_decl, render_file
from prolab.errors import DslSyntaxError

CORPUS = Path(__file__).parent / "corpus"


def test_parse_laplace_style_system():
    sf = parse("system L { base x, y; fiber u; order 2; eq: u[2,0] + u[0,2]; }")
    system = sf.find("L").system
    assert system.chart.n == 2 and system.chart.order == 2
    assert len(system.equations) == 1
    assert str(system.equations[0]) == "u[2,0] + u[0,2]"
    assert not system.is_explicit


def test_parse_darboux_pfaffian():
    sf = parse("pfaffian D { coords x, y, z; form: d(y) - z*d(x); }")
    system = sf.find("D").system
    assert system.chart == ("x", "y", "z")
    assert [str(g) for g in system.generators] == ["-z*d(x) + d(y)"]


def test_parse_error_missing_fiber():
    with pytest.raises(DslSyntaxError) as err:
        parse("system bad { base x; order 1; }")
    assert "fiber" in str(err.value)
    assert err.value.line == 1


def test_parse_error_locations():
    with pytest.raises(DslSyntaxError) as err:
        parse("system s {\n  base x;\n  fiber u;\n  order 1;\n  eq: u[9];\n}")
    assert err.value.line == 5


def test_duplicate_names_rejected():
    text = "point a { x = 0; }\npoint a { x = 1; }"
    with pytest.raises(DslSyntaxError):
        parse(text)


def test_rational_literals_and_powers():
    sf = parse("system s { base x; fiber u; order 1; solve u[1] = 3/2*u^2 - 1/3; }")
    system = sf.find("s").system
    expr = dict(system.solved)["u[1]"]
    assert str(expr) == "3/2*u^2 - 1/3"


def test_zero_multi_index_collapses():
    sf = parse("system s { base x; fiber u; order 1; eq: u[0] - x; }")
    system = sf.find("s").system
    assert str(system.equations[0]) == "-x + u" or str(system.equations[0]) == "u - x"


def test_point_declaration():
    sf = parse("point p { x = -1/2; u[1,0] = 3; u[0,0] = 0; }")
    point = sf.find("p").as_dict()
    assert point == {"x": Fraction(-1, 2), "u[1,0]": Fraction(3), "u": Fraction(0)}


def test_map_declaration_roundtrip():
    text = """map m {
      base: x -> 2*x;
      fiber: u -> u + x;
      inverse base: x -> 1/2*x;
      inverse fiber: u -> u - 1/2*x;
    }"""
    sf = parse(text)
    fm = sf.find("m").fibered
    fm.verify_inverse()
    rendered = render_decl(sf.find("m"))
    sf2 = parse(rendered)
    fm2 = sf2.find("m").fibered
    assert fm2.base == fm.base and fm2.fiber == fm.fiber


def test_d_rejected_outside_forms():
    with pytest.raises(DslSyntaxError):
        parse("system s { base x; fiber u; order 1; eq: d(x); }")


def test_division_by_variable_rejected_in_polynomials():
    with pytest.raises(DslSyntaxError):
        parse("system s { base x; fiber u; order 1; eq: 1/u; }")


def test_wedge_rejected():
    with pytest.raises(DslSyntaxError):
        parse("pfaffian p { coords x, y; form: d(x)*d(y); }")


def test_corpus_round_trip():
    for path in sorted(CORPUS.iterdir()):
        source = parse(path.read_text(), str(path))
        rendered = render_file(source)
        reparsed = parse(rendered, str(path) + ":rendered")
        assert len(reparsed.decls) == len(source.decls)
        for a, b in zip(source.decls, reparsed.decls):
            assert a.kind == b.kind and a.name == b.name
            if a.kind == "system":
                assert a.system == b.system
            elif a.kind == "pfaffian":
                assert a.system.chart == b.system.chart
                assert list(a.system.generators) == list(b.system.generators)
            elif a.kind == "map":
                assert a.fibered.base == b.fibered.base
                assert a.fibered.fiber == b.fibered.fiber
                assert a.fibered.inv_base == b.fibered.inv_base
                assert a.fibered.inv_fiber == b.fibered.inv_fiber
            elif a.kind == "point":
                assert a.assignments == b.assignments


def test_comments_and_whitespace():
    sf = parse("# heading\nsystem s {  base x;\n# inner\n fiber u; order 0; }")
    assert sf.find("s").system.chart.order == 0
