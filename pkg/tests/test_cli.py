"""End-to-end command line checks, run in process through main()."""

import csv
import json
import math
import xml.etree.ElementTree as ET

import pytest

import chbreak
from chbreak.cli import CSV_COLUMNS, SWEEP_COLUMNS, _workers, main
from chbreak.riccati import two_sided_bound

SMOOTH = """\
[grid]
half_length = 30.0
n_points = 512

[datum]
family = sech_squared
amplitude = 0.4
width = 1.0

[dissipation]
kind = constant
value = 0.2

[solver]
t_end = 0.3
"""

# decays like e^-8 at the near edge: datum passes admission, the first
# step's nonlocal term does not
EDGE_LOSS = """\
[grid]
half_length = 30.0
n_points = 1024

[datum]
family = sech_squared
amplitude = 0.5
width = 0.4
center = 22.0

[dissipation]
kind = constant
value = 0.0

[solver]
t_end = 1.0
"""


@pytest.fixture
def smooth_cfg(tmp_path):
    p = tmp_path / "smooth.ini"
    p.write_text(SMOOTH)
    return str(p)


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestSimulate:
    def test_outputs_and_exit_code(self, smooth_cfg, tmp_path, capsys):
        records = tmp_path / "records.csv"
        summary = tmp_path / "summary.json"
        code = main(["simulate", smooth_cfg, "--records-csv", str(records),
                     "--summary-json", str(summary)])
        assert code == 0
        out = capsys.readouterr().out
        assert "outcome: reached_horizon" in out
        assert "elapsed:" in out

        rows = _read_csv(records)
        assert tuple(rows[0]) == CSV_COLUMNS
        assert float(rows[1][0]) == 0.0
        for row in rows[1:]:
            assert all(math.isfinite(float(cell)) for cell in row)

        with open(summary) as fh:
            payload = json.load(fh)
        assert payload["version"] == chbreak.__version__
        assert payload["outcome"] == "reached_horizon"
        assert payload["t_switch"] is None
        assert payload["blowup"] is None
        assert payload["bound_checks"]["t_star"] is None
        assert payload["n_records"] == len(rows) - 1
        assert payload["criterion1"]["satisfied"] is False
        assert payload["tracks"] == []
        # wall time never lands in machine output
        assert "elapsed" not in summary.read_text()

    def test_config_echo_roundtrip(self, smooth_cfg, tmp_path):
        summary = tmp_path / "summary.json"
        main(["simulate", smooth_cfg, "--summary-json", str(summary)])
        with open(summary) as fh:
            payload = json.load(fh)
        echoed = chbreak.parse_config(payload["config"])
        assert echoed == chbreak.load_config(smooth_cfg)

    def test_reruns_byte_identical(self, smooth_cfg, tmp_path):
        pair = []
        for tag in ("a", "b"):
            records = tmp_path / f"{tag}.csv"
            summary = tmp_path / f"{tag}.json"
            assert main(["simulate", smooth_cfg, "--records-csv", str(records),
                         "--summary-json", str(summary)]) == 0
            pair.append((records.read_bytes(), summary.read_bytes()))
        assert pair[0] == pair[1]

    def test_paths_from_config_file(self, tmp_path):
        text = SMOOTH + (f"\n[outputs]\nrecords_csv = {tmp_path}/r.csv\n"
                         f"summary_json = {tmp_path}/s.json\n")
        p = tmp_path / "with_outputs.ini"
        p.write_text(text)
        assert main(["simulate", str(p)]) == 0
        assert (tmp_path / "r.csv").exists()
        assert (tmp_path / "s.json").exists()

    def test_plots_written(self, smooth_cfg, tmp_path):
        plots = tmp_path / "plots"
        assert main(["simulate", smooth_cfg, "--plots-dir", str(plots)]) == 0
        for name in ("slope_min.svg", "reciprocal_slope.svg", "energy_law.svg"):
            ET.parse(plots / name)

    def test_tracks_in_summary(self, smooth_cfg, tmp_path):
        text = SMOOTH + "\n[characteristics]\nseeds = 0.0 1.5\n"
        p = tmp_path / "seeded.ini"
        p.write_text(text)
        summary = tmp_path / "summary.json"
        assert main(["simulate", str(p), "--summary-json", str(summary)]) == 0
        with open(summary) as fh:
            payload = json.load(fh)
        seeds = [tr["seed"] for tr in payload["tracks"]]
        assert seeds == [0.0, 1.5]
        for tr in payload["tracks"]:
            assert tr["n_samples"] > 0
            assert not tr["edge_contaminated"]

    def test_run_failure_exit_code(self, tmp_path, capsys):
        p = tmp_path / "edge.ini"
        p.write_text(EDGE_LOSS)
        assert main(["simulate", str(p)]) == 3
        assert "edge_decay_lost" in capsys.readouterr().err

    def test_missing_config_exit_code(self, tmp_path, capsys):
        assert main(["simulate", str(tmp_path / "absent.ini")]) == 2
        assert capsys.readouterr().err.startswith("error:")

    def test_invalid_config_exit_code(self, tmp_path, capsys):
        p = tmp_path / "bad.ini"
        p.write_text(SMOOTH.replace("kind = constant", "kind = mystery"))
        assert main(["simulate", str(p)]) == 2
        assert "must be one of" in capsys.readouterr().err


class TestCriteria:
    def test_console_report(self, smooth_cfg, capsys):
        assert main(["criteria", smooth_cfg]) == 0
        out = capsys.readouterr().out
        assert "slope_only: not satisfied" in out
        assert "mixed: not satisfied" in out
        assert "margin:" in out

    def test_json_report(self, smooth_cfg, tmp_path):
        dest = tmp_path / "criteria.json"
        assert main(["criteria", smooth_cfg, "--json", str(dest)]) == 0
        with open(dest) as fh:
            payload = json.load(fh)
        assert payload["version"] == chbreak.__version__
        assert payload["criterion1"]["kind"] == "slope_only"
        assert payload["criterion2"]["kind"] == "mixed"
        assert payload["criterion1"]["satisfied"] is False


class TestRiccati:
    def test_scalar_rows(self, capsys):
        assert main(["riccati", "--forcing", "0.0", "--omega0", "-1.0"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "case,start,blew_up,t_numeric,t_bound"
        kind, start, blew, t_num, bound = lines[1].split(",")
        assert (kind, start, blew) == ("scalar", "-1.0", "true")
        assert abs(float(t_num) - 2.0) < 1e-3
        assert float(bound) == 2.0

    def test_scalar_subcritical_row_empty(self, capsys):
        assert main(["riccati", "--forcing", "0.5",
                     "--omega0", "-3.0 -0.1"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 3
        assert lines[1].split(",")[2] == "true"
        assert lines[2].split(",")[2:] == ["false", "", ""]

    def test_coupled(self, capsys):
        assert main(["riccati", "--coupled", "--delta", "0.1",
                     "--forcing", "1.0"]) == 0
        line = capsys.readouterr().out.strip().splitlines()[1]
        kind, start, blew, t_num, bound = line.split(",")
        assert (kind, start, blew) == ("coupled", "-3.0", "true")
        expected = two_sided_bound(0.1, 1.0, 3.0)
        assert float(bound) == expected
        assert float(t_num) <= expected + 1e-3

    def test_csv_matches_console(self, tmp_path, capsys):
        dest = tmp_path / "riccati.csv"
        assert main(["riccati", "--forcing", "2.0", "--omega0", "-3.0",
                     "--csv", str(dest)]) == 0
        console = capsys.readouterr().out.strip().splitlines()
        file_rows = dest.read_text().strip().replace("\r", "").splitlines()
        assert file_rows == console


class TestSweep:
    def test_serial_sweep(self, smooth_cfg, tmp_path, capsys):
        dest = tmp_path / "sweep.csv"
        code = main(["sweep", smooth_cfg, "--amplitudes", "0.2 0.4",
                     "--widths", "1.0", "--workers", "1", "--csv", str(dest)])
        assert code == 0
        rows = _read_csv(dest)
        assert tuple(rows[0]) == SWEEP_COLUMNS
        assert len(rows) == 3
        assert [r[0] for r in rows[1:]] == ["0", "1"]
        for row in rows[1:]:
            record = dict(zip(SWEEP_COLUMNS, row))
            assert record["status"] == "ok"
            assert record["outcome"] == "reached_horizon"
            assert record["criterion1"] == "false"
            assert float(record["energy"]) > 0.0
        assert [r[2] for r in rows[1:]] == ["0.2", "0.4"]
        assert "2 cells, 0 failed" in capsys.readouterr().err

    def test_sweep_stdout(self, smooth_cfg, capsys):
        code = main(["sweep", smooth_cfg, "--amplitudes", "0.3",
                     "--widths", "1.0", "--workers", "1"])
        assert code == 0
        captured = capsys.readouterr()
        assert captured.out.startswith(",".join(SWEEP_COLUMNS))
        assert "1 cells" in captured.err

    def test_sweep_rejects_samples_template(self, tmp_path, capsys):
        vals = " ".join(["0.0"] * 256)
        text = SMOOTH.replace(
            "family = sech_squared\namplitude = 0.4\nwidth = 1.0",
            f"family = samples\nvalues = {vals}")
        p = tmp_path / "samples.ini"
        p.write_text(text)
        assert main(["sweep", str(p), "--amplitudes", "0.3",
                     "--widths", "1.0", "--workers", "1"]) == 2
        assert "analytic datum family" in capsys.readouterr().err

    def test_deltas_need_constant_profile(self, tmp_path, capsys):
        text = SMOOTH.replace(
            "kind = constant\nvalue = 0.2",
            "kind = sinusoidal\noffset = 0.1\namplitude = 0.1\nomega = 1.0\n"
            "delta_sup = 0.2")
        p = tmp_path / "sin.ini"
        p.write_text(text)
        assert main(["sweep", str(p), "--amplitudes", "0.3", "--widths", "1.0",
                     "--deltas", "0.0 0.1", "--workers", "1"]) == 2
        assert "constant dissipation" in capsys.readouterr().err

    def test_worker_count_precedence(self, monkeypatch):
        monkeypatch.delenv("CHBREAK_WORKERS", raising=False)
        assert _workers(4) == 4
        assert _workers(0) == 1
        monkeypatch.setenv("CHBREAK_WORKERS", "3")
        assert _workers(None) == 3
        assert _workers(2) == 2
        monkeypatch.delenv("CHBREAK_WORKERS")
        assert _workers(None) >= 1


def test_version(capsys):
    assert main(["version"]) == 0
    assert capsys.readouterr().out.strip() == f"chbreak {chbreak.__version__}"
