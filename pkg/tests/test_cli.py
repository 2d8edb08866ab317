"""Command-line behavior: output formats, exit codes, file writing."""

import json
import math
import os
from importlib import resources

import jsonschema
import pytest

from proxbound.cli import main


@pytest.fixture(scope="module")
def schema_validator():
    text = resources.files("proxbound.schemas").joinpath(
        "cli_output.schema.json").read_text()
    schema = json.loads(text)
    jsonschema.Draft202012Validator.check_schema(schema)
    return jsonschema.Draft202012Validator(schema)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# -- threshold --------------------------------------------------------------

def test_threshold_piece_one(capsys):
    code, out, _ = run(capsys, "threshold",
                       "piecewise{x<0: x^2; x>=0: -(x^2)}")
    assert code == 0
    assert "Exact(2.0)" in out
    assert "Thm3.3" in out


def test_threshold_zero_constant(capsys):
    code, out, _ = run(capsys, "threshold", "0")
    assert code == 0
    assert "Exact(0.0)" in out
    assert "Fact2.7" in out


def test_threshold_compose(capsys):
    code, out, _ = run(capsys, "threshold", "compose(-(1/2)*u^2, -2*x)")
    assert code == 0
    assert "Exact(4.0)" in out
    assert "CompProp.iii" in out


def test_threshold_npb_exit_three(capsys):
    code, out, _ = run(capsys, "threshold", "x^3")
    assert code == 3
    assert "NotProxBounded" in out


def test_threshold_unknown_exit_four(capsys):
    code, _, _ = run(capsys, "threshold", "compose(-(u^2), x^2)")
    assert code == 4


def test_parse_error_exit_two(capsys):
    code, _, err = run(capsys, "threshold", "x +")
    assert code == 2
    assert "position 3" in err


# -- envelope ---------------------------------------------------------------

def test_envelope_grid_csv_value(capsys):
    code, out, _ = run(capsys, "envelope", "abs(x)", "--r", "1",
                       "--range", "-5:5", "--steps", "101")
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "x,value"
    assert len(lines) == 102
    row = dict(line.split(",") for line in lines[1:])
    assert float(row["2.0"]) == pytest.approx(1.5, abs=1e-6)


def test_envelope_csv_reparses_bit_exact(capsys):
    code, out, _ = run(capsys, "envelope", "x^2", "--r", "2",
                       "--range", "-1:1", "--steps", "11", "--format", "csv")
    assert code == 0
    _, json_out, _ = run(capsys, "envelope", "x^2", "--r", "2",
                         "--range", "-1:1", "--steps", "11",
                         "--format", "json")
    rows = json.loads(json_out)["rows"]
    parsed = [[float(cell) for cell in line.split(",")]
              for line in out.strip().split("\n")[1:]]
    assert parsed == rows


def test_envelope_below_threshold_grid(capsys):
    code, out, err = run(capsys, "envelope", "-(x^2)", "--r", "1",
                         "--range", "-1:1", "--steps", "11")
    assert code == 3
    assert "r below threshold" in err
    values = {line.split(",")[1] for line in out.strip().split("\n")[1:]}
    assert values == {"-inf"}


def test_envelope_constant_column(capsys):
    code, out, _ = run(capsys, "envelope", "5", "--r", "7",
                       "--range", "0:1", "--steps", "2")
    assert code == 0
    values = [line.split(",")[1] for line in out.strip().split("\n")[1:]]
    assert [float(v) for v in values] == [5.0, 5.0]


def test_envelope_point_text(capsys):
    code, out, _ = run(capsys, "envelope", "abs(x)", "--r", "1", "--x", "2")
    assert code == 0
    assert "1.5" in out


def test_envelope_function_only_dumps_f(capsys):
    code, out, _ = run(capsys, "envelope", "-(x^2)", "--range", "0:2",
                       "--steps", "3", "--function-only")
    assert code == 0
    values = [float(line.split(",")[1])
              for line in out.strip().split("\n")[1:]]
    assert values == [0.0, -1.0, -4.0]


def test_envelope_needs_x_or_range(capsys):
    code, _, err = run(capsys, "envelope", "x^2", "--r", "1")
    assert code == 2
    assert "--x or --range" in err


def test_envelope_two_dim_grid(capsys):
    code, out, _ = run(capsys, "envelope", "norm(x, y)", "--r", "1",
                       "--range", "-1:1,-1:1", "--steps", "3")
    assert code == 0
    assert out.startswith("x,y,value")
    assert len(out.strip().split("\n")) == 10


# -- prox, conjugate --------------------------------------------------------

def test_prox_text(capsys):
    code, out, _ = run(capsys, "prox", "abs(x)", "--r", "1", "--x", "2")
    assert code == 0
    assert "1.0" in out


def test_prox_below_threshold_exit_three(capsys):
    code, _, err = run(capsys, "prox", "-(x^2)", "--r", "1", "--x", "0")
    assert code == 3
    assert "unbounded below" in err


def test_conjugate_text(capsys):
    code, out, _ = run(capsys, "conjugate", "(1/2)*x^2", "--x", "2")
    assert code == 0
    assert "2.0" in out


def test_conjugate_infinite_is_success(capsys):
    code, out, _ = run(capsys, "conjugate", "abs(x)", "--x", "2")
    assert code == 0
    assert "inf" in out


# -- estimate ---------------------------------------------------------------

def test_estimate_both(capsys):
    code, out, _ = run(capsys, "estimate", "-(x^2)", "--method", "both")
    assert code == 0
    assert "liminf" in out and "bisection" in out


def test_estimate_npb_suspected(capsys):
    code, out, _ = run(capsys, "estimate", "x^3")
    assert code == 3
    assert "suspected" in out


def test_estimate_bounded_near_zero(capsys):
    code, out, _ = run(capsys, "estimate", "sin(x)", "--format", "json")
    assert code == 0
    payload = json.loads(out)
    for est in payload["estimates"].values():
        assert est <= 0.05


# -- check ------------------------------------------------------------------

def test_check_single_expression(capsys):
    code, out, _ = run(capsys, "check",
                       "piecewise{x<0: -(x^2); x>=0: x^2}")
    assert code == 0
    assert "result: PASS" in out


def test_check_needs_exactly_one_target(capsys):
    code, _, err = run(capsys, "check")
    assert code == 2
    assert "exactly one" in err


# -- shared plumbing --------------------------------------------------------

def test_out_writes_file_atomically(tmp_path, capsys):
    target = tmp_path / "grid.csv"
    code, out, _ = run(capsys, "envelope", "x^2", "--r", "2",
                       "--range", "0:1", "--steps", "3",
                       "--out", str(target))
    assert code == 0
    assert out == ""  # nothing on stdout when writing to a file
    text = target.read_text()
    assert text.startswith("x,value\n")
    leftovers = [p for p in os.listdir(tmp_path) if p.startswith(".proxbound")]
    assert leftovers == []


def test_csv_rejected_outside_grids(capsys):
    code, _, err = run(capsys, "threshold", "x^2", "--format", "csv")
    assert code == 2
    assert "csv" in err.lower()


@pytest.mark.parametrize("argv", [
    ("threshold", "x^2"),
    ("threshold", "x^3"),
    ("threshold", "compose(-(u^2), x^2)"),
    ("envelope", "abs(x)", "--r", "1", "--x", "2"),
    ("envelope", "-(x^2)", "--r", "1", "--x", "0"),
    ("envelope", "abs(x)", "--r", "1", "--range", "-2:2", "--steps", "5"),
    ("envelope", "-(x^2)", "--r", "1", "--range", "-1:1", "--steps", "3"),
    ("envelope", "x*y", "--function-only", "--range", "0:1,0:1",
     "--steps", "2"),
    ("prox", "abs(x)", "--r", "1", "--x", "2"),
    ("conjugate", "abs(x)", "--x", "2"),
    ("estimate", "-(x^2)"),
    ("estimate", "x^3", "--method", "bisection"),
    ("check", "x^2"),
])
def test_json_output_validates(schema_validator, capsys, argv):
    code, out, err = run(capsys, *argv, "--format", "json")
    payload = json.loads(out)
    errors = list(schema_validator.iter_errors(payload))
    assert errors == []
    assert payload["exit_code"] == code


def test_solver_override_flags(capsys):
    code, out, _ = run(capsys, "envelope", "x^2", "--r", "2", "--x", "1",
                       "--max-radius", "64", "--divergence-bound", "1e9")
    assert code == 0
    assert "0.5" in out


def test_seed_determinism(capsys):
    a = run(capsys, "check", "x^2", "--seed", "7", "--format", "json")
    b = run(capsys, "check", "x^2", "--seed", "7", "--format", "json")
    pa, pb = json.loads(a[1]), json.loads(b[1])
    for p in (pa, pb):
        del p["elapsed_seconds"]
        for s in p["suites"]:
            del s["elapsed_seconds"]
    assert pa == pb
