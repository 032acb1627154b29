import json
import subprocess
import sys
from pathlib import Path

import pytest

from panelbounds.cli import main

MODEL = {"family": "binary_dynamic", "T": 2, "y0_status": "observed"}
THETA = {"beta": [1.0], "gamma": [0.5]}
GU = {"family": "gaussian_iid", "params": [1.0]}
DGP = {
    "model": MODEL,
    "theta": THETA,
    "gu": GU,
    "cells": [
        {"z": [[0], [0]], "weight": 0.5},
        {"z": [[0], [1]], "weight": 0.5},
    ],
    "v_dist": {"c": {"base": 0.1, "u_coef": 0.4, "sd": 1.0}, "y0": {"base": 0.2, "c_coef": 0.5}},
}


def _write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


@pytest.fixture
def configs(tmp_path):
    return {
        "model": _write(tmp_path, "model.json", MODEL),
        "theta": _write(tmp_path, "theta.json", THETA),
        "gu": _write(tmp_path, "gu.json", GU),
        "dgp": _write(tmp_path, "dgp.json", DGP),
        "tmp": tmp_path,
    }


class TestTables:
    def test_diff_clean(self, capsys):
        assert main(["tables"]) == 0
        out = capsys.readouterr().out
        assert "DIFFERS" not in out and out.count(": ok") == 13

    def test_subset_selection(self, capsys):
        assert main(["tables", "--which", "cdc_ses2"]) == 0

    def test_mismatch_detected(self, tmp_path, capsys, monkeypatch):
        import panelbounds.cli as cli

        real = cli._golden_text

        def tampered(name):
            return real(name) + "tampered\n"

        monkeypatch.setattr(cli, "_golden_text", tampered)
        assert main(["tables", "--which", "ustar_oc3"]) == 1


class TestRuns:
    def test_simulate_then_check_truth_passes(self, configs):
        panel = str(configs["tmp"] / "panel.csv")
        assert main(["simulate", "--dgp", configs["dgp"], "--n", "40000", "--seed", "3", "--out", panel]) == 0
        rc = main(
            [
                "check",
                "--model", configs["model"],
                "--theta", configs["theta"],
                "--gu", configs["gu"],
                "--f", panel,
                "--tol", "0.02",
                "--out", str(configs["tmp"] / "report.json"),
            ]
        )
        assert rc == 0
        rep = json.loads((configs["tmp"] / "report.json").read_text())
        assert rep["pass"] is True

    def test_check_fails_on_distorted_theta(self, configs):
        panel = str(configs["tmp"] / "panel.csv")
        main(["simulate", "--dgp", configs["dgp"], "--n", "40000", "--seed", "3", "--out", panel])
        bad = _write(configs["tmp"], "bad.json", {"beta": [-4.0], "gamma": [-3.0]})
        rc = main(
            ["check", "--model", configs["model"], "--theta", bad, "--gu", configs["gu"], "--f", panel]
        )
        assert rc == 1

    def test_identify_profile_and_outer(self, configs):
        panel = str(configs["tmp"] / "panel.csv")
        main(["simulate", "--dgp", configs["dgp"], "--n", "20000", "--seed", "5", "--out", panel])
        grid = _write(
            configs["tmp"],
            "grid.json",
            {"axes": {"beta": [0.0, 1.0, 2.0], "gamma": [-0.5, 0.5, 1.5]}},
        )
        out = str(configs["tmp"] / "ident")
        assert main(["identify", "--model", configs["model"], "--grid", grid, "--f", panel, "--out", out]) == 0
        doc = json.loads(Path(out + ".json").read_text())
        assert doc["kind"] == "identified" and len(doc["points"]) == 9
        assert Path(out + ".csv").read_text().startswith("beta,gamma")
        assert main(["profile", "--model", configs["model"], "--grid", grid, "--f", panel, "--out", str(configs["tmp"] / "prof")]) == 0
        assert main(["outer", "--model", configs["model"], "--grid", grid, "--f", panel, "--out", str(configs["tmp"] / "outer")]) == 0

    def test_thread_count_does_not_change_output(self, configs):
        panel = str(configs["tmp"] / "panel.csv")
        main(["simulate", "--dgp", configs["dgp"], "--n", "20000", "--seed", "5", "--out", panel])
        grid = _write(
            configs["tmp"], "grid.json", {"axes": {"beta": [0.0, 1.0], "gamma": [0.0, 1.0]}}
        )
        outs = []
        for threads, tag in ((1, "a"), (3, "b")):
            out = str(configs["tmp"] / f"scan_{tag}")
            main(
                [
                    "identify",
                    "--model", configs["model"],
                    "--grid", grid,
                    "--f", panel,
                    "--threads", str(threads),
                    "--out", out,
                ]
            )
            outs.append(Path(out + ".json").read_bytes())
        assert outs[0] == outs[1]

    def test_linear(self, configs, capsys):
        moments = _write(configs["tmp"], "moments.json", {"moments": [[1.5, 1.0], [3.0, 2.0]]})
        assert main(["linear", "--moments", moments]) == 0
        assert capsys.readouterr().out.strip() == "1.5"

    def test_usage_error_exit_2(self, configs):
        missing = str(configs["tmp"] / "nope.json")
        assert main(["check", "--model", missing, "--theta", missing, "--gu", missing, "--f", missing]) == 2

    def test_console_entry_point(self):
        proc = subprocess.run(
            [sys.executable, "-m", "panelbounds.cli", "tables", "--which", "ustar_mdc3"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert "ustar_mdc3: ok" in proc.stdout

    def test_ustar_and_cdc_commands(self, configs, capsys):
        zfile = _write(configs["tmp"], "z.json", {"z": [[0], [1]]})
        assert main(
            ["ustar", "--model", configs["model"], "--theta", configs["theta"], "--z", zfile, "--y0", "1"]
        ) == 0
        out = capsys.readouterr().out
        assert "(0,0) | FULL" in out
        assert main(
            ["cdc", "--model", configs["model"], "--theta", configs["theta"], "--z", zfile, "--y0", "1", "--emit-table"]
        ) == 0
        out = capsys.readouterr().out
        assert "retained: 2" in out
