import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import contexts, fields_in
from weightedlin.cli import main
from weightedlin.parsing import ParseError, parse_field, parse_series, parse_time_field, parse_tuple, tokenize
from weightedlin.series import SeriesContext
from weightedlin.vectorfield import VectorField, format_field


def run_json(capsys, *argv):
    code = main([*argv, "--format", "json"])
    return code, json.loads(capsys.readouterr().out)


def test_parse_examples():
    ctx = SeriesContext.create((1, 2), 6)
    x, y = ctx.variables()
    X = parse_field("(x + y^2)*d/dx + 2*y*d/dy", ctx, ["x", "y"])
    assert X == VectorField(ctx, [x + y * y, y.scale(2)])
    assert parse_field("x**2*d/dy - 1/3*y*d/dx", ctx, ["x", "y"]) == VectorField(
        ctx, [y.scale(Fraction(-1, 3)), x * x]
    )
    assert parse_field("d/dx*(x - y)", ctx, ["x", "y"]) == VectorField(ctx, [x - y, ctx.zero()])
    assert parse_series("(x + y)^2 / 2", ctx, ["x", "y"]) == (x + y) * (x + y) * Fraction(1, 2)
    assert parse_tuple("x + y, y", ctx, ["x", "y"]) == [x + y, y]
    X_t = parse_time_field("t*y*d/dx", ctx, ["x", "y"])
    assert X_t.coefficient(1) == VectorField(ctx, [y, ctx.zero()])


@pytest.mark.parametrize(
    "text",
    ["x*d/dx*d/dy", "d/dx*d/dy", "x +* y", "x^y*d/dx", "(x*d/dx", "z*d/dx", "x/y*d/dx", "x $ y"],
)
def test_parse_errors(text):
    ctx = SeriesContext.create((1, 1), 4)
    with pytest.raises(ParseError):
        parse_field(text, ctx, ["x", "y"])


def test_parse_error_position():
    with pytest.raises(ParseError) as err:
        tokenize("x +\n  y $")
    assert (err.value.line, err.value.column) == (2, 5)


@given(st.data())
def test_format_parse_round_trip(data):
    ctx = data.draw(contexts(max_cutoff=5))
    X = data.draw(fields_in(ctx))
    names = [f"v{i}" for i in range(ctx.dimension)]
    assert parse_field(format_field(X, names), ctx, names) == X


def test_linearize_json_schema(capsys):
    code, doc = run_json(capsys, "linearize", "(x+y^2)*d/dx + 2*y*d/dy", "--vars", "x,y", "--weights", "1,2")
    assert code == 0
    assert set(doc) == {"version", "command", "weighting", "cutoff", "result", "certificates", "exactness"}
    assert doc["weighting"] == [1, 2] and doc["cutoff"] == 10 and doc["exactness"] == "exact"
    res = doc["result"]
    assert res["phi_inverse"]["text"] == "x - 1/3*y^2, y"
    assert res["verified"] is True and res["residual"]["text"] == "0"
    comp = res["phi_inverse"]["components"][0]
    assert comp["variable"] == "x"
    assert {"alpha": [0, 2], "coeff": "-1/3"} in comp["terms"]
    assert all(set(c) == {"degree", "dimension", "invertible", "determinant"} for c in doc["certificates"])
    assert doc["certificates"][0]["determinant"] == "1/1"


def test_methods_agree(capsys):
    field = "(x + y + x^2)*d/dx + (2*y + x*y)*d/dy"
    outs = {}
    for method in ("moser", "oracle"):
        code, doc = run_json(capsys, "linearize", field, "--vars", "x,y", "--weights", "1,2", "--order", "5",
                             "--method", method)
        assert code == 0 and doc["result"]["verified"]
        outs[method] = doc["result"]["phi"]["text"]
    assert outs["moser"] == outs["oracle"]


def test_exit_codes(capsys):
    field = "(x+y)*d/dx + 2*y*d/dy"
    assert main(["linearize", field, "--vars", "x,y", "--order", "3"]) == 3
    assert main(["linearize", "x*d/dy", "--vars", "x,y", "--weights", "1,2"]) == 2
    assert main(["linearize", "x*d/dx +", "--vars", "x,y"]) == 4
    assert main(["linearize", field]) == 4  # no --vars
    assert main(["linearize", field, "--vars", "x,y", "--weights", "1"]) == 4
    assert main(["flow", "x*d/dx", "--vars", "x", "--at", "1", "--order", "3"]) == 5
    assert main(["nonsense"]) == 4
    capsys.readouterr()


def test_singular_reports_kernel(capsys):
    code, doc = run_json(capsys, "linearize", "(x+y)*d/dx + 2*y*d/dy", "--vars", "x,y", "--order", "3")
    assert code == 3 and doc["result"]["degree"] == 1
    assert [k["text"] for k in doc["result"]["kernel"]] == [
        "(x^2 - 2*x*y + y^2)*d/dx + (x^2 - 2*x*y + y^2)*d/dy"
    ]


def test_non_evaluative_keeps_coefficients(capsys):
    code, doc = run_json(capsys, "flow", "x*d/dx", "--vars", "x", "--at", "1", "--order", "3")
    assert code == 5
    assert [c["components"][0]["text"] for c in doc["result"]["coefficients"]] == ["x", "x", "1/2*x", "1/6*x"]
    assert doc["result"]["tail_vanishes"] is False


def test_flow_and_exp(capsys):
    code, doc = run_json(capsys, "flow", "y*d/dx", "--vars", "x,y", "--at", "1")
    assert code == 0 and doc["result"]["value"]["text"] == "x + y, y"
    code, doc = run_json(capsys, "exp", "x^2*d/dx", "--vars", "x", "--order", "5", "--t-cap", "4")
    assert [c["components"][0]["text"] for c in doc["result"]["coefficients"]] == [
        "x", "x^2", "x^3", "x^4", "x^5"
    ]
    code, doc = run_json(capsys, "flow", "t*x^2*d/dx", "--vars", "x", "--order", "4")
    assert code == 0 and doc["result"]["coefficients"][2]["components"][0]["text"] == "1/2*x^2"


def test_bracket_and_pullback(capsys):
    code, doc = run_json(capsys, "bracket", "x*d/dy", "--with", "y*d/dx", "--vars", "x,y")
    assert code == 0 and doc["result"]["output"]["text"] == "(x)*d/dx + (-y)*d/dy"
    code, doc = run_json(capsys, "pullback", "x*d/dx + 2*y*d/dy", "--diffeo", "x+y, y", "--vars", "x,y",
                         "--order", "3")
    assert code == 0 and doc["result"]["output"]["text"] == "(x - y)*d/dx + (2*y)*d/dy"
    assert main(["pullback", "x*d/dx", "--diffeo", "x^2", "--vars", "x"]) == 4
    capsys.readouterr()


def test_analyze(capsys):
    code, doc = run_json(capsys, "analyze", "(x+y)*d/dx + 2*y*d/dy", "--vars", "x,y", "--order", "3")
    res = doc["result"]
    assert code == 0 and res["admissible"]
    assert res["eigenvalues"] == ["1/1", "2/1"] and res["hyperbolic"]
    assert res["resonances"] == [{"axis": "y", "alpha": [2, 0], "degree": 1}]
    assert not doc["certificates"][0]["invertible"] and doc["certificates"][0]["kernel"]
    code, doc = run_json(capsys, "analyze", "y*d/dx - x*d/dy", "--vars", "x,y", "--order", "2")
    assert doc["exactness"] == "heuristic" and doc["result"]["hyperbolic"] is False
    code, doc = run_json(capsys, "analyze", "x*d/dy", "--vars", "x,y", "--weights", "1,2")
    assert code == 2 and doc["result"]["witness"] == {"axis": "y", "alpha": [1, 0]}


def test_file_input_and_out(tmp_path, capsys):
    src = tmp_path / "field.txt"
    src.write_text("(x+y^2)*d/dx + 2*y*d/dy\n")
    out = tmp_path / "report.json"
    assert main(["linearize", "-f", str(src), "--vars", "x,y", "--weights", "1,2", "--order", "4",
                 "--format", "json", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    # a JSON report can be fed back in; variables and weights are taken from it
    assert main(["linearize", "-f", str(out), "--format", "json"]) == 0
    again = json.loads(capsys.readouterr().out)
    assert again["result"]["phi"] == doc["result"]["phi"]


def test_permute_weights(capsys):
    code, doc = run_json(capsys, "linearize", "2*y*d/dy + (x + y^2)*d/dx", "--vars", "y,x", "--weights", "2,1",
                         "--permute-weights")
    assert code == 0 and doc["weighting"] == [1, 2]
    assert doc["result"]["variables"] == ["x", "y"]
    assert main(["linearize", "x*d/dx", "--vars", "x,y", "--weights", "2,1"]) == 4
    capsys.readouterr()


def test_text_output(capsys):
    assert main(["linearize", "(x+y^2)*d/dx + 2*y*d/dy", "--vars", "x,y", "--weights", "1,2"]) == 0
    out = capsys.readouterr().out
    assert "phi^-1 = (x - 1/3*y^2, y)" in out and "verified: True" in out
