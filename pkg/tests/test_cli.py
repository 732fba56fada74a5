"""
Command-line interface.

Claims:
  - text results go to stdout, errors to stderr
  - exit codes: 0 success, 1 library failure, 2 syntax error, 64 usage
  - JSON output is deterministic
  - verify accepts every certificate certify emits
"""

import json
import random

import pytest

from cli import EXIT_FAILURE, EXIT_OK, EXIT_SYNTAX, EXIT_USAGE, parse_prefer, read_expression, run
from errors import ValidationError
from hybrid import PUNCTURED_LEAF
from oracle import random_grope
from trees import Bracket, PuncturedTree, UnrootedTree


@pytest.fixture(autouse=True)
def _no_color(monkeypatch):
    monkeypatch.setenv("NO_COLOR", "1")


def _write(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def _grope_file(tmp_path, bodies):
    return _write(tmp_path, "grope.json", {"bodies": bodies})


def test_degree(capsys):
    assert run(["degree", "((1,2),(3,4))"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "4"


def test_degree_json(capsys):
    assert run(["degree", "p((1,2),(3,4))", "--format", "json"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out) == {"degree": 3}


def test_normalize(capsys):
    assert run(["normalize", "--rooted", "((1,2),(3,4))"]) == EXIT_OK
    assert capsys.readouterr().out.split() == ["(1,(2,(3,4)))", "(2,(1,(3,4)))"]
    assert run(["normalize", "p(((1,2),(3,4)),(5,6))"]) == EXIT_OK
    assert len(capsys.readouterr().out.split()) >= 2


def test_ihx(capsys):
    assert run(["ihx", "p((1,2),(3,4))", "--edge", "99"]) == EXIT_FAILURE
    assert "error:" in capsys.readouterr().err


def test_syntax_error_exit_code(capsys):
    assert run(["degree", "(1,2"]) == EXIT_SYNTAX
    assert "offset 4" in capsys.readouterr().err


def test_usage_errors():
    assert run([]) == EXIT_USAGE
    assert run(["frobnicate"]) == EXIT_USAGE
    assert run(["certify", "sliceness", "x.json"]) == EXIT_USAGE


def test_missing_file(tmp_path, capsys):
    assert run(["class", str(tmp_path / "nope.json")]) == EXIT_FAILURE
    assert "No such file" in capsys.readouterr().err


def test_class_and_order(tmp_path, capsys):
    grope = _grope_file(tmp_path, {"1": ["(2,(3,3))", "(2,3)"], "2": ["((1,3),(1,3))"], "3": ["(1,2)"]})
    assert run(["class", grope]) == EXIT_OK
    assert capsys.readouterr().out.splitlines()[-1] == "class: 2"

    tower = _write(tmp_path, "tower.json", {"trees": []})
    assert run(["order", tower]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "∞ (unbounded)"

    raw = _write(tmp_path, "raw.json", {"surfaces": ["a", "b", "c"], "disks": {"W": ["a", "b"]}, "points": [["W", "c"]]})
    assert run(["order", raw, "--format", "json"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out) == {"order": 1}


def test_convert_both_ways(tmp_path, capsys):
    grope = _grope_file(tmp_path, {"i": ["(j,k)"]})
    assert run(["convert", "grope-to-tower", grope]) == EXIT_OK
    tower = json.loads(capsys.readouterr().out)
    assert [t["tree"] for t in tower["trees"]] == ["p(i,(j,k))"]

    path = _write(tmp_path, "tower.json", tower)
    assert run(["convert", "tower-to-grope", path, "--prefer", "i"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["bodies"] == {"i": ["(j,k)"]}


def test_grope_file_rejected_as_tower(tmp_path, capsys):
    grope = _grope_file(tmp_path, {"i": ["(j,k)"]})
    assert run(["order", grope]) == EXIT_FAILURE
    assert "grope payload" in capsys.readouterr().err


def test_k_slice_precondition(tmp_path, capsys):
    grope = _grope_file(tmp_path, {"1": ["(2,(2,2))"], "2": ["(1,(1,1))"]})
    assert run(["certify", "k-slice", grope, "--k", "2"]) == EXIT_FAILURE
    assert "class 3 < 2k" in capsys.readouterr().err


def test_certify_then_verify(tmp_path, capsys):
    grope = _grope_file(tmp_path, {"1": ["((2,2),(2,2))"], "2": ["((1,1),(1,1))"]})
    for kind in ("height", "half-grope", "k-slice"):
        assert run(["certify", kind, grope, "--k", "2"]) == EXIT_OK
        cert = _write(tmp_path, f"{kind}.json", json.loads(capsys.readouterr().out))
        assert run(["verify", cert]) == EXIT_OK
        assert "passed" in capsys.readouterr().out


_SYMMETRIC_SHAPES = (
    "({},{})",
    "({},({},{}))",
    "(({},{}),({},{}))",
    "(({},{}),(({},{}),({},{})))",
)


def _emitted_certificate(rng, tmp_path, i):
    kind = ("height", "half-grope", "k-slice")[i % 3]
    if kind == "height":
        shape = rng.choice(_SYMMETRIC_SHAPES)
        fields = shape.count("{}")
        bodies = {s: [shape.format(*(rng.choice("12") for _ in range(fields)))] for s in "12"}
        return kind, _write(tmp_path, "grope.json", {"bodies": bodies}), []
    if kind == "half-grope":
        g = random_grope(rng, rng.randint(1, 6))
        return kind, _write(tmp_path, "grope.json", g.to_json()), []
    k = rng.randint(1, 3)
    g = random_grope(rng, 2 * k, 2 * k + 1)
    return kind, _write(tmp_path, "grope.json", g.to_json()), ["--k", str(k)]


def test_verify_accepts_every_emitted_certificate(tmp_path, capsys):
    rng = random.Random(101)
    for i in range(1000):
        kind, grope, extra = _emitted_certificate(rng, tmp_path, i)
        assert run(["certify", kind, grope, *extra]) == EXIT_OK
        cert = _write(tmp_path, "cert.json", json.loads(capsys.readouterr().out))
        assert run(["verify", cert]) == EXIT_OK, kind
        capsys.readouterr()


def test_verify_failure_exit_code(tmp_path, capsys):
    grope = _grope_file(tmp_path, {"1": ["(2,2)"], "2": ["(1,1)"]})
    run(["certify", "height", grope])
    payload = json.loads(capsys.readouterr().out)
    payload["order"] = 5
    cert = _write(tmp_path, "bad.json", payload)
    assert run(["verify", cert]) == EXIT_FAILURE
    out = capsys.readouterr().out
    assert "failed" in out
    assert "tower order" in out


def test_empty_grope_exits_with_failure(tmp_path, capsys):
    grope = _grope_file(tmp_path, {})
    assert run(["certify", "height", grope]) == EXIT_FAILURE
    assert "at least one surface" in capsys.readouterr().err


def test_certify_text_report(tmp_path, capsys):
    grope = _grope_file(tmp_path, {"1": ["(2,2)"], "2": ["(1,1)"]})
    assert run(["certify", "height", grope, "--format", "text"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "HEIGHT CERTIFICATE REPORT" in out
    assert "END OF REPORT" in out


def test_report_csv(tmp_path, capsys):
    grope = _grope_file(tmp_path, {"1": ["(2,2)"], "2": ["(1,1)"]})
    run(["certify", "height", grope])
    cert = _write(tmp_path, "cert.json", json.loads(capsys.readouterr().out))
    assert run(["report", cert, "--format", "csv"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "tree,degree,ok,puncture,kind"
    assert len(lines) == 3


def test_enumerate(capsys):
    assert run(["enumerate", "--leaves", "1,2,3", "--format", "json"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["count"] == 3
    assert run(["enumerate", "--leaves", "1,2,3,4", "--unrooted"]) == EXIT_OK
    assert len(capsys.readouterr().out.split()) == 3


def test_render_dot(capsys):
    assert run(["render", "p((1,2),(3,4))"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("digraph")
    assert out.count("style=dashed") == 1
    assert run(["render", "((a,b),(a,b))"]) == EXIT_OK
    assert capsys.readouterr().out.count("->") == 6


def test_json_output_is_deterministic(tmp_path, capsys):
    grope = _grope_file(tmp_path, {"2": ["(1,(1,1))"], "1": ["(2,(2,2))"]})
    outputs = []
    for _ in range(2):
        assert run(["certify", "half-grope", grope]) == EXIT_OK
        outputs.append(capsys.readouterr().out)
    assert outputs[0] == outputs[1]
    assert list(json.loads(outputs[0])) == sorted(json.loads(outputs[0]))


def test_read_expression_forms():
    assert isinstance(read_expression("(1,2)"), Bracket)
    assert isinstance(read_expression("p(1,2)"), PuncturedTree)
    assert isinstance(read_expression("1:(2,3)"), UnrootedTree)


def test_parse_prefer():
    assert parse_prefer(None) is None
    assert parse_prefer("-, #3,@puncture,a") == [None, 3, PUNCTURED_LEAF, "a"]
    with pytest.raises(ValidationError):
        parse_prefer("#x")
