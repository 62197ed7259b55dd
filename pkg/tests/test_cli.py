"""CLI tests: subcommands, exit codes, determinism, JSON contracts."""

import json

import pytest

from bandclt.cli import main
from bandclt.matgen import load_bandmat_header

SIM_ARGS = ["--n", "100", "--bandwidth", "3", "--topology", "periodic-zero",
            "--profile", "uniform", "--functions", "z,z2",
            "--replicates", "40", "--seed", "17"]


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestTheory:
    def test_sinc_integral(self, capsys):
        code, out, _ = run_cli(capsys, "theory", "sinc_integral", "--l", "5")
        assert code == 0
        payload = json.loads(out)
        assert payload["value"] == pytest.approx(115 / 192)
        assert payload["params"]["exact"] == "115/192"

    def test_eulerian(self, capsys):
        code, out, _ = run_cli(capsys, "theory", "eulerian", "--n", "5", "--m", "2")
        assert code == 0
        assert json.loads(out)["value"] == 66

    def test_monomial_variance(self, capsys):
        code, out, _ = run_cli(capsys, "theory", "monomial_variance",
                               "--nu", "1", "--l", "4", "--profile", "uniform")
        assert code == 0
        assert json.loads(out)["value"] == pytest.approx(4.0, abs=1e-10)

    def test_covariance(self, capsys):
        code, out, _ = run_cli(capsys, "theory", "covariance",
                               "--nu", "1", "--fi", "z2", "--fj", "z2")
        assert code == 0
        payload = json.loads(out)
        assert payload["value"][0] == pytest.approx(2.0, abs=1e-8)
        assert payload["method"] == "ContourQuadrature"

    def test_unknown_quantity(self, capsys):
        code, _, err = run_cli(capsys, "theory", "bogus")
        assert code == 2
        assert "unknown quantity" in err

    def test_bad_params(self, capsys):
        code, _, _ = run_cli(capsys, "theory", "sinc_integral", "--l", "0")
        assert code == 2


class TestSimulate:
    def test_smoke(self, capsys, tmp_path):
        out_dir = str(tmp_path / "out")
        code, _, _ = run_cli(capsys, "simulate", *SIM_ARGS, "--out", out_dir)
        assert code == 0
        report = json.loads((tmp_path / "out" / "report.json").read_text())
        assert report["replicates"] == 40
        csv = (tmp_path / "out" / "samples.csv").read_text()
        assert csv.startswith("replicate,function,re,im\n")
        assert len(csv.strip().split("\n")) == 1 + 40 * 2

    def test_missing_config(self, capsys, tmp_path):
        code, _, _ = run_cli(capsys, "simulate", "--config",
                             str(tmp_path / "none.json"))
        assert code == 2
        assert not (tmp_path / "report.json").exists()

    def test_invalid_geometry(self, capsys, tmp_path):
        code, _, err = run_cli(capsys, "simulate", "--n", "8",
                               "--bandwidth", "5", "--replicates", "5",
                               "--out", str(tmp_path))
        assert code == 2

    def test_config_file_with_overrides(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "n": 100, "b_n": 3, "topology": "periodic-zero",
            "profile": {"kind": "uniform"}, "functions": ["z"],
            "replicates": 10, "seed": 1}))
        out_dir = str(tmp_path / "out")
        code, _, _ = run_cli(capsys, "simulate", "--config", str(cfg),
                             "--replicates", "12", "--out", out_dir)
        assert code == 0
        report = json.loads((tmp_path / "out" / "report.json").read_text())
        assert report["replicates"] == 12

    def test_seed_determines_samples_bytes(self, capsys, tmp_path):
        a, b = str(tmp_path / "a"), str(tmp_path / "b")
        assert run_cli(capsys, "simulate", *SIM_ARGS, "--out", a)[0] == 0
        assert run_cli(capsys, "simulate", *SIM_ARGS, "--out", b)[0] == 0
        assert ((tmp_path / "a" / "samples.csv").read_bytes()
                == (tmp_path / "b" / "samples.csv").read_bytes())

    def test_bandwidth_exponent(self, capsys, tmp_path):
        out_dir = str(tmp_path / "out")
        code, _, _ = run_cli(capsys, "simulate", "--n", "1000",
                             "--bandwidth-exponent", "0.3",
                             "--topology", "periodic-zero",
                             "--functions", "z", "--replicates", "5",
                             "--seed", "1", "--out", out_dir)
        assert code == 0
        report = json.loads((tmp_path / "out" / "report.json").read_text())
        assert report["config"]["b_n"] == 7  # floor(1000^0.3)

    def test_half_bandwidth(self, capsys, tmp_path):
        out_dir = str(tmp_path / "out")
        code, _, _ = run_cli(capsys, "simulate", "--n", "101", "--half",
                             "--topology", "periodic-nu", "--nu", "1",
                             "--functions", "z", "--replicates", "5",
                             "--seed", "1", "--out", out_dir)
        assert code == 0
        report = json.loads((tmp_path / "out" / "report.json").read_text())
        assert report["config"]["b_n"] == 50


class TestTableCompare:
    @pytest.fixture()
    def report_path(self, capsys, tmp_path):
        out_dir = tmp_path / "out"
        assert run_cli(capsys, "simulate", *SIM_ARGS,
                       "--out", str(out_dir))[0] == 0
        return out_dir / "report.json"

    def test_table_reproduces_report(self, capsys, report_path):
        code, out, _ = run_cli(capsys, "table", "--report", str(report_path),
                               "--json")
        assert code == 0
        rows = json.loads(out)
        report = json.loads(report_path.read_text())
        for row, entry in zip(rows, report["functions"]):
            assert row["mc_variance"] == entry["variance"]
            assert row["theory_variance"] == entry["theory_value"]
            assert row["z_score"] == entry["z_score"]

    def test_table_aligned_output(self, capsys, report_path):
        code, out, _ = run_cli(capsys, "table", "--report", str(report_path))
        assert code == 0
        lines = out.strip().split("\n")
        assert "theory" in lines[0]
        assert "1.000000" in lines[1]

    def test_table_corrupt_report(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert run_cli(capsys, "table", "--report", str(bad))[0] == 3

    def test_table_empty_report(self, capsys, tmp_path):
        empty = tmp_path / "empty.json"
        empty.write_text(json.dumps({"functions": []}))
        assert run_cli(capsys, "table", "--report", str(empty))[0] == 3

    def test_compare_pass(self, capsys, report_path):
        code, out, _ = run_cli(capsys, "compare", "--report",
                               str(report_path), "--json")
        assert code == 0
        assert all(r["pass"] for r in json.loads(out))

    def test_compare_tight_threshold_fails(self, capsys, report_path):
        code, _, _ = run_cli(capsys, "compare", "--report", str(report_path),
                             "--z-max", "1e-12")
        assert code == 3


class TestDump:
    def test_dump_and_sidecar(self, capsys, tmp_path):
        out_dir = tmp_path / "dumps"
        code, out, _ = run_cli(capsys, "dump", "--n", "32", "--bandwidth", "3",
                               "--topology", "periodic-zero", "--seed", "5",
                               "--replicate", "2", "--out", str(out_dir))
        assert code == 0
        path = out_dir / "bandmat-5-2.bin"
        hdr = load_bandmat_header(path)
        assert hdr["n"] == 32 and hdr["replicate"] == 2
        sidecar = json.loads((out_dir / "bandmat-5-2.bin.json").read_text())
        assert sidecar["format"] == "bandmat v1"
        assert sidecar["topology"] == "periodic-zero"
