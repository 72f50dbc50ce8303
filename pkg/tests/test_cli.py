import csv
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from noisepump import cli
from noisepump.config import ExperimentConfig, apply_overrides, loads, parse_override_value
from noisepump.errors import ConfigError, ConvergenceError


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def test_default_config_round_trips():
    cfg = ExperimentConfig()
    assert loads(cfg.to_toml()) == cfg


@settings(max_examples=30)
@given(
    omega=st.floats(0.0, 3.0),
    tau_c=st.floats(0.5, 20.0),
    shape=st.sampled_from(["OU", "SE", "PL"]),
    T=st.floats(0.0, 2.0),
    seed=st.integers(0, 2**64 - 1),
)
def test_echo_round_trips(omega, tau_c, shape, T, seed):
    cfg = apply_overrides(ExperimentConfig(), {"noise.omega": omega, "noise.tau_c": tau_c,
                                               "noise.shape": shape, "system.temperature": T,
                                               "run.seed": seed})
    assert loads(cfg.to_toml()) == cfg


def test_unknown_keys_and_sections_all_reported():
    with pytest.raises(ConfigError) as err:
        loads("[noise]\nomegaa = 1\n[extra]\nx = 1\n[grid]\nt_max = -1\n")
    problems = err.value.problems
    assert any("noise.omegaa" in p for p in problems)
    assert any("[extra]" in p for p in problems)


def test_bounds_listed_with_values():
    with pytest.raises(ConfigError) as err:
        loads("[grid]\nh = 0.5\n[run]\ntrajectories = 10\nfrom_t = 1\n")
    assert any("run.from_t" in p for p in err.value.problems)
    with pytest.raises(ConfigError) as err:
        loads("[grid]\nh = 0.5\n[run]\ntrajectories = 10\n")
    msgs = " ".join(err.value.problems)
    assert "0.0628319" in msgs and "trajectories=10" in msgs


def test_type_errors():
    with pytest.raises(ConfigError, match="must be a number"):
        loads('[noise]\nomega = "big"\n')


@pytest.mark.parametrize("text, value", [("0.91", 0.91), ("3", 3), ("true", True), ("SE", "SE"), ('"PL"', "PL")])
def test_override_value_parsing(text, value):
    assert parse_override_value(text) == value


def test_measure_reports_reference_value(tmp_path):
    assert cli.main(["measure", "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "measure.json").read_text())
    assert set(doc) == {"manifest", "results"}
    res = doc["results"]
    assert res["N_ACHL"] == pytest.approx(0.0546, rel=1e-3)
    assert res["N_BLP"] == 0.0 and res["N_RHP"] == res["N_ACHL"]
    manifest = json.loads((tmp_path / "measure.manifest.json").read_text())
    assert manifest == doc["manifest"]
    assert loads(manifest["config"]).noise.omega == 0.91


def test_rates_without_noise_are_constant(tmp_path):
    assert cli.main(["rates", "--noise.omega", "0", "--out", str(tmp_path), "--format", "csv"]) == 0
    header, data = read_csv(tmp_path / "rates.csv")
    assert header == ["t", "eta", "shift", "gamma1", "gamma2"]
    assert np.ptp(data[:, 3]) == 0 and np.ptp(data[:, 4]) == 0
    assert not (tmp_path / "rates.json").exists()


def test_csv_uses_nine_significant_digits(tmp_path):
    cli.main(["rates", "--out", str(tmp_path), "--format", "csv"])
    raw = (tmp_path / "rates.csv").read_bytes()
    assert b"\r" not in raw
    cell = raw.split(b"\n")[2].split(b",")[3].decode()
    assert len(cell.replace(".", "").replace("-", "").lstrip("0").split("e")[0]) <= 9


def test_outputs_are_byte_identical(tmp_path):
    for d in ("a", "b"):
        assert cli.main(["threshold", "--out", str(tmp_path / d), "--seed", "9"]) == 0
    for name in ("threshold.csv", "threshold.json", "threshold.manifest.json"):
        assert (tmp_path / "a" / name).read_bytes().replace(b"/a", b"/b") == (tmp_path / "b" / name).read_bytes()


def test_mc_validate_small_run(tmp_path):
    args = ["mc-validate", "--out", str(tmp_path), "--noise.omega", "0.1", "--run.trajectories", "200",
            "--run.mc_t_max", "5"]
    assert cli.main(args) == 0
    res = json.loads((tmp_path / "mc-validate.json").read_text())["results"]
    assert res["trajectories"] == 200 and len(res["max_z"]) == 3
    header, data = read_csv(tmp_path / "mc-validate.csv")
    assert header[:4] == ["t", "mc_nx", "mc_ny", "mc_nz"] and data.shape[1] == 10


@pytest.mark.parametrize(
    "args, code",
    [
        (["rates", "--noise.omega", "-1"], 2),
        (["rates", "--nope.key", "1"], 2),
        (["evolve", "--grid.t_max", "12"], 4),
    ],
)
def test_exit_codes_and_error_record(tmp_path, capsys, args, code):
    assert cli.main(args + ["--out", str(tmp_path)]) == code
    record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert record["exit_code"] == code and record["error"] and record["message"]


def test_convergence_error_exit_code(tmp_path, capsys, monkeypatch):
    def boom(cfg):
        raise ConvergenceError("residual bound 1 >= 1e-05")

    monkeypatch.setitem(cli.COMMANDS, "measure", boom)
    assert cli.main(["measure", "--out", str(tmp_path)]) == 3
    assert json.loads(capsys.readouterr().err)["error"] == "ConvergenceError"


def test_evolve_record_mode(tmp_path):
    args = ["evolve", "--grid.t_max", "12", "--run.on_unphysical", "record", "--out", str(tmp_path)]
    assert cli.main(args) == 0
    doc = json.loads((tmp_path / "evolve.json").read_text())
    assert doc["manifest"]["residuals"]["max_radius"] > 1.0
    header, data = read_csv(tmp_path / "evolve.csv")
    assert header[-1] == "delta_energy"
    np.testing.assert_allclose(data[:, 6], data[:, 4] - data[:, 5], atol=2e-9)


def test_scan_subcommand(tmp_path):
    assert cli.main(["scan", "--run.x_min", "4", "--run.x_max", "14", "--run.n_points", "11",
                     "--out", str(tmp_path), "--format", "json"]) == 0
    res = json.loads((tmp_path / "scan.json").read_text())["results"]
    assert res["argmin"] == pytest.approx(8.4, abs=0.05)
