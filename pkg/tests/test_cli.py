import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from maxboot.cli import build_config, main
from maxboot.datagen import Dependence
from maxboot.stat_core import MaxMode


def run_cli(*argv):
    proc = subprocess.run(
        [sys.executable, "-m", "maxboot.cli", *argv],
        capture_output=True,
        text=True,
    )
    return proc


# ---------------------------------------------------------------------------
# config resolution
# ---------------------------------------------------------------------------


def parse_args(*argv):
    from maxboot.cli import _build_parser

    return _build_parser().parse_args(["run", *argv])


def test_defaults_match_full_scale():
    config, values = build_config(parse_args())
    assert (config.n, config.p) == (200, 400)
    assert (config.outer_reps, config.truth_reps, config.b_reps) == (500, 5000, 500)
    assert config.copula.structure is Dependence.AR1
    assert [p.name for p in config.schemes] == ["gaussian", "mammen", "rademacher", "empirical"]


def test_desk_preset():
    config, _ = build_config(parse_args("--preset", "desk"))
    assert (config.outer_reps, config.truth_reps, config.b_reps, config.p) == (100, 2000, 200, 100)
    assert config.n == 200


def test_cli_flag_overrides_preset():
    config, _ = build_config(parse_args("--preset", "desk", "--outer", "7"))
    assert config.outer_reps == 7
    assert config.truth_reps == 2000


def test_config_file_and_cli_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        """
        # comment line
        experiment = I
        rho = 0.8
        outer = 12
        schemes = m,e
        """
    )
    config, _ = build_config(parse_args("--config", str(cfg), "--rho", "0.5"))
    assert config.experiment == "I"
    assert config.copula.rho == 0.5  # CLI wins over file
    assert config.outer_reps == 12
    assert [p.name for p in config.schemes] == ["mammen", "empirical"]


def test_config_file_preset_key(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("preset = desk\ntruth = 44\n")
    config, _ = build_config(parse_args("--config", str(cfg)))
    assert config.outer_reps == 100  # from preset
    assert config.truth_reps == 44  # file overrides preset member


def test_config_file_rejects_unknown_key(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("bogus = 3\n")
    with pytest.raises(ValueError):
        build_config(parse_args("--config", str(cfg)))


def test_mixed_scheme_with_p0():
    config, _ = build_config(parse_args("--schemes", "mix:0.3,e"))
    assert config.schemes[0].p0 == 0.3
    assert config.schemes[0].name == "mixed"


def test_mode_parsing():
    config, _ = build_config(parse_args("--mode", "abs"))
    assert config.mode is MaxMode.ABSOLUTE


# ---------------------------------------------------------------------------
# subcommands end to end
# ---------------------------------------------------------------------------


def test_run_writes_csv_and_figure_data(tmp_path):
    out = tmp_path / "rows.csv"
    fig = tmp_path / "fig.csv"
    code = main(
        [
            "run", "--experiment", "II", "--rho", "0.2", "--shape", "1",
            "--n", "16", "--p", "4", "--outer", "5", "--truth", "40",
            "--breps", "12", "--seed", "3", "--schemes", "m,e",
            "--out", str(out), "--figure-data", str(fig),
        ]
    )
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 4
    fig_rows = list(csv.DictReader(fig.open()))
    assert len(fig_rows) == 10  # 2 schemes x 5 outer reps


def test_run_exit_code_on_bad_config():
    assert main(["run", "--schemes", "zzz", "--truth", "5"]) == 1
    assert main(["run", "--mode", "sideways"]) == 1  # argparse usage error maps to 1
    assert main(["--help"]) == 0


def test_run_json_output(tmp_path):
    out = tmp_path / "rows.json"
    code = main(
        [
            "run", "--n", "16", "--p", "4", "--outer", "3", "--truth", "20",
            "--breps", "8", "--schemes", "e", "--format", "json", "--out", str(out),
        ]
    )
    assert code == 0
    parsed = json.loads(out.read_text())
    assert {r["metric"] for r in parsed} == {"KS", "Coverage"}


def test_check_subcommand_json_lines():
    proc = run_cli("check", "--suite", "lindeberg", "--seed", "5")
    assert proc.returncode == 0
    lines = [json.loads(line) for line in proc.stdout.splitlines()]
    assert len(lines) == 20  # n in 2..6, p in {1,2}, two test functions
    assert all(line["passed"] for line in lines)


def test_check_smoothmax_suite_quick():
    proc = run_cli("check", "--suite", "smoothmax", "--trials", "300", "--seed", "2")
    assert proc.returncode == 0
    names = [json.loads(line)["name"] for line in proc.stdout.splitlines()]
    assert names == ["smoothmax_sandwich", "fbeta_l1_bounds", "softmax_stability"]


def test_certify_subcommand(tmp_path):
    rng = np.random.default_rng(8)
    path = tmp_path / "matrix.csv"
    np.savetxt(path, rng.gamma(2.0, 1.0, (40, 5)), delimiter=",")
    proc = run_cli("certify", "--input", str(path))
    assert proc.returncode == 0
    payload = json.loads(proc.stdout)
    assert payload["n"] == 40 and payload["p"] == 5
    assert payload["certificates"]["empirical"]["gamma_star"] > 0
    assert payload["certificates"]["wild"]["gamma_star"] > 0
    # minimal admissible M differs by exactly the factor two
    assert payload["certificates"]["empirical"]["M"] == pytest.approx(
        2.0 * payload["certificates"]["wild"]["M"], rel=1e-9
    )


def test_certify_missing_file():
    proc = run_cli("certify", "--input", "/nonexistent/m.csv")
    assert proc.returncode == 1
    assert "m.csv" in proc.stderr
