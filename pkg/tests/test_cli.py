import csv
import io
import json
import math
import subprocess
import sys

import pytest

from cftrace.cli import OUTPUT_DIR_ENV, run


def invoke(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def read_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestCommands:
    def test_compare_salih(self, capsys):
        code, out, err = invoke(capsys, "compare", "--kind", "salih", "--bit", "0", "--M", "8", "--N", "400", "--epsilon", "0.01")
        assert code == 0
        (row,) = read_csv(out)
        assert float(row["trace_detect_prob"]) == pytest.approx(5.95e-5, rel=0.2)
        assert row["verdict"] == "not counterfactual"
        assert "weak-coupling" in err

    def test_simulate_li_bit1(self, capsys):
        code, out, _ = invoke(capsys, "simulate", "--kind", "li", "--bit", "1", "--M", "8", "--N", "8", "--epsilon", "0")
        assert code == 0
        rows = {r["outcome"]: float(r["probability"]) for r in read_csv(out)}
        assert rows["D2"] == pytest.approx(1.0)

    def test_trace_table(self, capsys):
        code, out, _ = invoke(capsys, "trace", "--kind", "zeno", "--N", "6", "--delta", "0.1")
        rows = read_csv(out)
        assert code == 0 and len(rows) == 5
        assert float(rows[2]["weak_value_re"]) == pytest.approx(0.5)

    def test_standard(self, capsys):
        code, out, _ = invoke(capsys, "standard", "--N", "4", "--epsilon", "0.01")
        (row,) = read_csv(out)
        assert float(row["detect_prob"]) == pytest.approx(2.5e-5, rel=0.01)

    def test_sweep_sorted(self, capsys):
        code, out, _ = invoke(capsys, "sweep", "--kind", "li", "--M-list", "16,8", "--N-list", "16,8", "--bits", "1,0", "--epsilon", "0.001")
        rows = read_csv(out)
        assert code == 0
        keys = [(int(r["M"]), int(r["N"]), int(r["bit"])) for r in rows]
        assert keys == sorted(keys) and len(keys) == 8

    def test_eve(self, capsys):
        code, out, _ = invoke(capsys, "eve", "--kind", "salih", "--M", "8", "--N", "80", "--bit", "1", "--eve-location", "3")
        rows = read_csv(out)
        hit = [r for r in rows if r["eve_click"] == "true" and r["outcome"] == "D2"]
        assert code == 0 and float(hit[0]["probability"]) == 0.0

    def test_keydist(self, capsys):
        code, out, _ = invoke(capsys, "keydist", "--N", "20", "--rounds", "2000", "--seed", "5")
        (row,) = read_csv(out)
        assert code == 0 and row["n_errors"] == "0"

    def test_bohm(self, capsys):
        code, out, _ = invoke(capsys, "bohm", "--kind", "li", "--M", "32", "--N", "32", "--format", "json")
        doc = json.loads(out)
        assert doc["rows"][0]["cross_expectation"] == pytest.approx(3.084, rel=0.1)


class TestErrors:
    @pytest.mark.parametrize(
        "argv",
        [
            ["keydist", "--rounds", "0"],
            ["compare", "--kind", "li", "--M", "7", "--N", "8", "--epsilon", "0.01"],
            ["simulate", "--M", "3"],
            ["simulate", "--kind", "zeno", "--epsilon", "0.1", "--delta", "0.1"],
            ["simulate", "--kind", "zeno", "--epsilon", "1.5"],
            ["eve", "--kind", "salih", "--M", "8", "--N", "80"],
            ["eve", "--kind", "salih", "--M", "8", "--N", "80", "--eve-location", "9"],
            ["frobnicate"],
            ["simulate", "--kind", "zeno", "--M", "x"],
        ],
    )
    def test_usage_error(self, capsys, argv):
        code, out, err = invoke(capsys, *argv)
        assert code == 2
        assert out == ""
        assert err

    def test_failed_run_leaves_no_file(self, capsys, tmp_path):
        target = tmp_path / "out.csv"
        code, _, _ = invoke(capsys, "compare", "--kind", "zeno", "--N", "10", "--output", str(target))
        assert code != 0
        assert not target.exists()
        assert list(tmp_path.iterdir()) == []


class TestOutput:
    ARGS = ["compare", "--kind", "li", "--M", "16", "--N", "32", "--bit", "1", "--epsilon", "0.001"]

    def test_byte_identical(self, capsys, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert invoke(capsys, *self.ARGS, "--format", "json", "--output", str(a))[0] == 0
        assert invoke(capsys, *self.ARGS, "--format", "json", "--output", str(b))[0] == 0
        assert a.read_bytes() == b.read_bytes()

    def test_json_schema(self, capsys):
        _, out, _ = invoke(capsys, *self.ARGS, "--format", "json")
        doc = json.loads(out)
        assert doc["schema_version"] == 1
        assert doc["config"]["kind"] == "li"
        assert all(math.isfinite(v) for v in doc["rows"][0].values() if isinstance(v, float))

    def test_csv_float_format(self, capsys):
        _, out, _ = invoke(capsys, *self.ARGS)
        (row,) = read_csv(out)
        assert "e" in row["trace_detect_prob"] and "E" not in row["trace_detect_prob"]
        assert float(row["epsilon"]) == 0.001

    def test_output_dir_env(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path / "runs"))
        assert invoke(capsys, *self.ARGS, "--output", "r.csv")[0] == 0
        assert (tmp_path / "runs" / "r.csv").exists()

    def test_config_file_and_override(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# zeno run\nkind = zeno\nN = 50\nepsilon = 0.001\n")
        _, out, _ = invoke(capsys, "compare", "--config", str(cfg), "--N", "60")
        (row,) = read_csv(out)
        assert row["kind"] == "ZenoChain" and row["N"] == "60"

    def test_bad_config_file(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("colour = blue\n")
        assert invoke(capsys, "compare", "--config", str(cfg))[0] == 2


def test_console_script():
    proc = subprocess.run(
        [sys.executable, "-m", "cftrace.cli", "simulate", "--kind", "ifm", "--format", "json"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["rows"][1]["probability"] == pytest.approx(1.0)
