import json
import logging

import numpy as np
import pytest

from blowup_dynamics import logger
from blowup_dynamics.cli import EXIT_FAILED, EXIT_OK, EXIT_USAGE, main
from blowup_dynamics.experiments import RUNNERS


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_fixed_set(capsys):
    code, report = run(capsys, "fixed-set")
    assert code == EXIT_OK
    assert report["passed"]
    assert report["schema"] == 1
    components = report["results"]["components"]
    assert [c["proj_dim"] for c in components] == [0, 0]
    assert report["results"]["sigma"] == "RP^1"
    assert report["results"]["oracle"]["agrees"]


def test_fixed_set_complex_field(capsys):
    rotation = "[[0, -1], [1, 0]]"
    code, report = run(capsys, "fixed-set", "--field", "C", "--matrix", rotation)
    assert code == EXIT_OK
    assert report["results"]["field"] == "C"
    assert len(report["results"]["components"]) == 2
    assert "oracle" not in report["results"]


def test_regularity_slope_jump(capsys):
    code, report = run(capsys, "regularity", "--m", "1")
    assert code == EXIT_OK
    assert report["results"]["jump"][0] == pytest.approx(2.0, abs=1e-3)
    assert report["results"]["expected_order"] == 0
    assert report["results"]["family"] == "paper_example_c1"


def test_euler(capsys):
    code, report = run(capsys, "euler", "--field", "R", "--n", "2", "--chi", "2")
    assert code == EXIT_OK
    assert report["results"]["euler_after"] == 1
    assert report["results"]["surface"]["global_effect"] == "crosscap"


def test_variant_demo(capsys):
    code, report = run(capsys, "variant-demo", "--samples", "500", "--allocations", "5")
    assert code == EXIT_OK
    assert report["results"]["classical"]["components"] == []
    assert [c["proj_dim"] for c in report["results"]["variant"]["components"]] == [1]
    assert report["results"]["allocations"]["mismatches"] == []


def test_no_lift_demo(capsys):
    code, report = run(capsys, "no-lift-demo")
    assert code == EXIT_OK
    assert report["results"]["verdict"] == "no_continuous_lift"
    assert len(report["results"]["cluster_points"]) == 2


def test_lift_check(capsys):
    code, report = run(
        capsys,
        "lift-check",
        "--family",
        "linear",
        "--samples",
        "200",
        "--pairs",
        "2",
        "--functoriality-samples",
        "50",
    )
    assert code == EXIT_OK
    assert {c["family"] for c in report["results"]["commutation"]} == {"linear"}
    assert len(report["results"]["functoriality"]) == 2


def test_lift_check_all_families(capsys):
    code, report = run(
        capsys,
        "lift-check",
        "--samples",
        "100",
        "--pairs",
        "6",
        "--functoriality-samples",
        "20",
    )
    assert code == EXIT_OK
    commutation = report["results"]["commutation"]
    assert {c["family"] for c in commutation} == {
        "linear",
        "paper_example_c1",
        "abs_kink",
        "polynomial",
        "rotation_scaling",
        "composite",
    }
    assert all(c["passed"] is True for c in commutation)
    assert all(f["passed"] is True for f in report["results"]["functoriality"])


def test_lift_check_named_example(capsys):
    code, report = run(
        capsys,
        "lift-check",
        "--spec",
        '{"family": "paper_example_c1"}',
        "--samples",
        "200",
        "--pairs",
        "1",
        "--functoriality-samples",
        "50",
    )
    assert code == EXIT_OK
    (commutation,) = report["results"]["commutation"]
    assert commutation["family"] == "paper_example_c1"
    assert commutation["max_base_residual"] <= 1e-12


@pytest.mark.parametrize(
    "argv",
    [
        ["nope"],
        ["fixed-set", "--matrix", "[1,"],
        ["fixed-set", "--matrix", "[[1, 2]]"],
        ["fixed-set", "--matrix", "[[1, 2], [3]]"],
        ["orbit", "--matrix", "[[1, 2], [3]]"],
        ["lift-check", "--spec", '{"family": "paper_example_c1", "order": 2}'],
        ["fixed-set", "--tol", "-1"],
        ["euler", "--n", "1"],
    ],
)
def test_usage_errors(capsys, argv):
    assert main(argv) == EXIT_USAGE
    assert "blowup-dynamics: error:" in capsys.readouterr().err


def test_ragged_matrix_message(capsys):
    assert main(["fixed-set", "--matrix", "[[1, 2], [3]]"]) == EXIT_USAGE
    assert "expected a square matrix" in capsys.readouterr().err


def test_missing_config_file(capsys, tmp_path):
    assert main(["euler", "--config", str(tmp_path / "missing.json")]) == EXIT_USAGE
    assert "cannot read config" in capsys.readouterr().err


def test_failed_property_exit_code(capsys, mocker):
    mocker.patch.dict(
        RUNNERS,
        {"euler": lambda _config: ({"euler_before": 2, "euler_after": 2}, ["broken"])},
    )
    code, report = run(capsys, "euler")
    assert code == EXIT_FAILED
    assert report["failures"] == ["broken"]
    assert not report["passed"]


def test_report_rerun_is_reproducible(capsys, tmp_path):
    first = tmp_path / "first.json"
    second = tmp_path / "second.json"
    argv = ["orbit", "--steps", "12", "--start", "[0.3, -2.0]", "--seed", "5"]
    assert main([*argv, "--output", str(first)]) == EXIT_OK
    assert main(["orbit", "--config", str(first), "--output", str(second)]) == EXIT_OK
    a = json.loads(first.read_text())
    b = json.loads(second.read_text())
    assert a["config"] == b["config"]
    assert a["results"] == b["results"]
    assert b["config"]["options"]["steps"] == 12


def test_orbit_outputs(capsys, tmp_path):
    csv = tmp_path / "out" / "orbit.csv"
    svg = tmp_path / "out" / "orbit.svg"
    code, report = run(capsys, "orbit", "--csv", str(csv), "--svg", str(svg))
    assert code == EXIT_OK
    assert report["config"]["outputs"] == {"csv": str(csv), "svg": str(svg)}

    header = csv.read_text().splitlines()[0]
    assert header == "step,x0,x1,y0,y1"
    rows = np.loadtxt(csv, delimiter=",", skiprows=1)
    assert rows.shape == (21, 5)
    assert rows[:, 0].tolist() == list(range(21))

    text = svg.read_text()
    assert text.startswith("<svg")
    assert text.count("<polyline") == 1 + report["config"]["samples"]


def test_orbit_svg_needs_plane(capsys, tmp_path):
    argv = [
        "orbit",
        "--matrix",
        "[[2, 0, 0], [0, 3, 0], [0, 0, 0.5]]",
        "--start",
        "[1, 1, 1]",
        "--svg",
        str(tmp_path / "orbit.svg"),
    ]
    assert main(argv) == EXIT_USAGE


def test_log_level_flag(capsys):
    level = logger.level
    try:
        assert main(["euler", "--log-level", "DEBUG"]) == EXIT_OK
        assert logger.getEffectiveLevel() == logging.DEBUG
    finally:
        logger.setLevel(level)
