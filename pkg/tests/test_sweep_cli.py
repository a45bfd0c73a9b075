from __future__ import annotations

import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from doublelambda.coefficients import MasterCoefficients
from doublelambda.errors import ConfigError
from doublelambda.regimes import reit_coefficients
from doublelambda.sweep.cli import main
from doublelambda.sweep.config import bundled_configs, load_config, validate_config
from doublelambda.sweep.runner import (
    EXIT_CONFIG,
    EXIT_FINDING,
    EXIT_NUMERICAL,
    EXIT_OK,
    oracle_horizon,
    run,
)

ATOM = {"omega_p": 1.0, "omega_c": 25.0, "delta_p": 40.0}


def write(tmp_path, raw, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(raw))
    return str(p)


def read_rows(path):
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


# ---------------------------------------------------------------- config validation


def test_bundled_configs_validate():
    names = bundled_configs()
    assert {"fig2", "fig2_dephasing", "fig3", "fig3_negative", "fig4a", "fig4b", "drr",
            "oracle", "coeffs", "steady"} <= set(names)
    for name in names:
        cfg = load_config(name)
        assert cfg.mode


@pytest.mark.parametrize(
    "raw, match",
    [
        ({"mode": "scan-reit", "atom": ATOM, "grid": {"phi": [], "omega_c": [20.0]}}, "empty"),
        ({"mode": "evolve", "atom": ATOM}, "times"),
        ({"mode": "scan-reit", "atom": ATOM, "grid": {"phi": [0.0]}}, "omega_c"),
        ({"mode": "oracle-compare", "atom": ATOM}, "oracle"),
        ({"mode": "steady", "atom": {"omega_p": "fast"}}, "omega_p"),
        ({"mode": "steady", "atom": ATOM, "bogus": 1}, "bogus"),
        ({"mode": "steady", "atom": {**ATOM, "gamma": -1.0}}, "atom"),
        ({"mode": "scan-drr", "atom": ATOM, "grid": {"omega": [1.0], "kappa": [1.0]},
          "coefficients": {"kind": "reit", "xi": 0.1}}, "pipeline"),
        ({"mode": "scan-reit", "atom": ATOM,
          "grid": {"phi": {"start": 0, "stop": 1, "num": 3, "spacing": "log"}, "omega_c": [20.0]}},
         "positive"),
    ],
)
def test_invalid_configs_are_rejected(raw, match):
    with pytest.raises(ConfigError, match=match):
        validate_config(raw)


def test_mode_mismatch_is_rejected():
    with pytest.raises(ConfigError, match="does not match"):
        validate_config({"mode": "steady", "atom": ATOM}, mode="evolve")


def test_degree_grids_are_converted():
    cfg = validate_config({"mode": "scan-reit", "atom": {**ATOM, "phi": 90.0}, "angle_unit": "deg",
                           "grid": {"phi": [0.0, 180.0], "omega_c": {"start": 10, "stop": 40, "num": 4}}})
    assert cfg.grid["phi"] == pytest.approx([0.0, 3.141592653589793])
    assert cfg.atom.phi == pytest.approx(1.5707963267948966)
    assert cfg.grid["omega_c"] == [10.0, 20.0, 30.0, 40.0]


def test_unknown_config_name():
    with pytest.raises(ConfigError, match="not found"):
        load_config("no_such_config")


# ---------------------------------------------------------------- exit codes


def test_cli_config_errors_exit_two(tmp_path, capsys):
    assert main(["steady", "--config", "no_such_config", "--out", str(tmp_path)]) == EXIT_CONFIG
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["steady", "--config", str(bad), "--out", str(tmp_path)]) == EXIT_CONFIG
    path = write(tmp_path, {"mode": "evolve", "atom": ATOM})
    assert main(["evolve", "--config", path, "--out", str(tmp_path)]) == EXIT_CONFIG
    assert main(["steady", "--config", "steady", "--workers", "0"]) == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_cli_numerical_failure_exits_four(tmp_path):
    raw = {"mode": "steady", "atom": ATOM,
           "coefficients": {"kind": "explicit", "values": {"c_loss1": [0, 0], "c_loss2": [0, 0]}}}
    assert main(["steady", "--config", write(tmp_path, raw), "--out", str(tmp_path)]) == EXIT_NUMERICAL


def test_cli_runaway_evolution_exits_four(tmp_path):
    raw = {"mode": "evolve", "atom": ATOM, "times": {"t_end": 10.0, "num": 11},
           "coefficients": {"kind": "explicit",
                            "values": {"c_loss1": [-500, 0], "c_loss2": [-500, 0],
                                       "c2": [0, 1], "c4": [0, -1]}}}
    with np.errstate(all="ignore"):
        code = main(["evolve", "--config", write(tmp_path, raw), "--out", str(tmp_path)])
    assert code == EXIT_NUMERICAL


def test_cli_steady_ok_prints_summary(tmp_path, capsys):
    assert main(["steady", "--config", "steady", "--out", str(tmp_path)]) == EXIT_OK
    summary = json.loads(capsys.readouterr().out)
    assert summary["mode"] == "steady" and summary["exit_code"] == 0
    assert summary["summary"]["closed_vs_linear"] < 1e-9


# ---------------------------------------------------------------- outputs


def test_csv_and_manifest(tmp_path):
    cfg = load_config("coeffs")
    res = run(cfg, tmp_path)
    text = (tmp_path / "coeffs.csv").read_text().splitlines()
    assert text[0].startswith("# doublelambda coeffs; columns: group, name, re, im")
    assert text[1] == "group,name,re,im"
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["mode"] == "coeffs" and man["exit_code"] == res.exit_code == 0
    assert man["outputs"] == ["coeffs.csv"]
    assert man["resolved_atom"]["omega_c"] == 25.0
    assert set(man["versions"]) >= {"doublelambda", "numpy", "scipy", "python", "fock_backend"}
    assert man["summary"]["relation_residual"] < 1e-12


def _scan_cfg(tmp_path):
    return write(tmp_path, {
        "mode": "scan-reit", "atom": ATOM, "angle_unit": "deg",
        "grid": {"phi": {"start": 0, "stop": 360, "num": 13}, "omega_c": [15.0, 20.0, 25.0, 30.0]},
    })


def test_output_is_byte_identical_across_runs_and_workers(tmp_path):
    path = _scan_cfg(tmp_path)
    outs = []
    for i, workers in enumerate((1, 1, 3)):
        d = tmp_path / f"run{i}"
        assert main(["scan-reit", "--config", path, "--out", str(d), "--workers", str(workers)]) == 0
        outs.append((d / "scan-reit.csv").read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_drr_scan_workers_identical(tmp_path):
    raw = {"mode": "scan-drr", "atom": {"omega_p": 1.0, "omega_c": 1.0},
           "grid": {"omega": {"start": 0.1, "stop": 50, "num": 4, "spacing": "log"},
                    "kappa": [0.3, 1.0, 5.0], "phi": [0.0, 1.5, 3.1]}}
    path = write(tmp_path, raw)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["scan-drr", "--config", path, "--out", str(a)]) == EXIT_OK
    assert main(["scan-drr", "--config", path, "--out", str(b), "--workers", "2"]) == EXIT_OK
    assert (a / "scan-drr.csv").read_bytes() == (b / "scan-drr.csv").read_bytes()
    rows = read_rows(a / "scan-drr.csv")
    assert len(rows) == 4 * 3 * 3
    assert all(float(r["duan_d"]) >= 2 - 1e-9 for r in rows if r["stable"] == "true")


def test_fig3_bundled_scan(tmp_path):
    res = run(load_config("fig3"), tmp_path)
    assert res.exit_code == EXIT_OK
    s = res.summary
    assert s["min_duan_d"] < 2 and s["phi_deg_at_min"] == pytest.approx(90.0, abs=5.0)
    assert s["expected_entangled_region"] and s["found_entangled_region"]


def test_fig3_negative_detuning_bundled_scan(tmp_path):
    res = run(load_config("fig3_negative"), tmp_path)
    assert res.exit_code == EXIT_OK
    assert res.summary["entangled_points"] == 0


def test_expectation_mismatch_exits_three(tmp_path):
    raw = json.loads(open(str(load_config("fig3_negative").source)).read())
    raw["expect"] = {"entangled_region": True, "phi_range": [0, 180]}
    assert main(["scan-reit", "--config", write(tmp_path, raw), "--out", str(tmp_path)]) == EXIT_FINDING


def test_fig4b_bundled_scan(tmp_path):
    res = run(load_config("fig4b"), tmp_path)
    assert res.exit_code == EXIT_OK
    assert res.summary["max_n_entangled"] == pytest.approx(500.0, rel=0.05)


def test_evolve_columns(tmp_path):
    raw = {"mode": "evolve", "atom": {**ATOM, "kappa_s": 1.0, "kappa_a": 1.0, "phi": 1.5707963},
           "coefficients": {"kind": "reit", "xi": 0.5}, "times": {"t_end": 5.0, "num": 11}}
    assert main(["evolve", "--config", write(tmp_path, raw), "--out", str(tmp_path)]) == EXIT_OK
    rows = read_rows(tmp_path / "evolve.csv")
    assert list(rows[0]) == ["t", "n1", "n2", "re_w", "im_w", "g2", "duan_d"]
    assert len(rows) == 11 and rows[0]["g2"] == "" and float(rows[0]["duan_d"]) == 2.0
    assert float(rows[-1]["duan_d"]) < 2.0


# ---------------------------------------------------------------- oracle comparison


def test_pure_loss_oracle_has_zero_divergence(tmp_path):
    raw = {"mode": "oracle-compare", "atom": {**ATOM, "kappa_s": 1.0, "kappa_a": 2.0},
           "coefficients": {"kind": "pure-loss"}, "oracle": {"n_max": 4, "num": 5}}
    res = run(validate_config(raw), tmp_path)
    assert res.exit_code == EXIT_OK
    assert res.summary["max_abs_dn1"] == res.summary["max_abs_dn2"] == res.summary["max_abs_dw"] == 0.0


def test_bundled_oracle_passes_and_dumps_populations(tmp_path):
    res = run(load_config("oracle"), tmp_path)
    assert res.exit_code == EXIT_OK and res.summary["passed"]
    assert res.summary["max_abs_dn1"] < 1e-4
    pops = read_rows(tmp_path / "populations.csv")
    assert len(pops) == 13 * 13
    assert sum(float(r["p"]) for r in pops) == pytest.approx(1.0, abs=1e-10)


def test_corrupted_moment_equations_are_caught(tmp_path):
    raw = json.loads(open(str(load_config("oracle").source)).read())
    raw["oracle"]["corrupt"] = "c2-sign"
    raw["output"] = {"path": "oracle.csv"}
    assert main(["oracle-compare", "--config", write(tmp_path, raw), "--out", str(tmp_path)]) == EXIT_FINDING


def test_oracle_horizon_policy():
    assert oracle_horizon(MasterCoefficients.pure_loss(0.5, 2.0)) == 20.0
    unstable = reit_coefficients(2.0, 1.0, 1.0)
    # growth rate 2*(xi - kappa) = 2
    assert oracle_horizon(unstable) == pytest.approx(5.0 / 2.0, rel=1e-9)
    assert oracle_horizon(MasterCoefficients.pure_loss(1.0, 1.0), 3.0) == 3.0


def test_seeded_random_coefficients_are_reproducible(tmp_path):
    raw = {"mode": "steady", "atom": {**ATOM, "kappa_s": 1.0, "kappa_a": 1.0},
           "coefficients": {"kind": "random-weak", "scale": 0.2}}
    path = write(tmp_path, raw)
    outs = []
    for seed, d in ((7, "a"), (7, "b"), (8, "c")):
        assert main(["steady", "--config", path, "--out", str(tmp_path / d), "--seed", str(seed)]) == 0
        outs.append((tmp_path / d / "steady.csv").read_bytes())
    assert outs[0] == outs[1] != outs[2]


def test_console_module_runs():
    out = subprocess.run([sys.executable, "-m", "doublelambda.sweep.cli", "--help"],
                         capture_output=True, text=True, check=True)
    for sub in ("coeffs", "evolve", "steady", "scan-reit", "scan-drr", "oracle-compare"):
        assert sub in out.stdout
