"""Dataset ingestion and the command-line interface."""

import csv
import hashlib
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from cpucopula.cli import (
    EXIT_CONFIG,
    EXIT_NUMERIC,
    EXIT_OK,
    EXIT_PARSE,
    broadcast,
    main,
    parse_config,
    parse_int_range,
)
from cpucopula.datasets import DATASET_FILES, ingest_csv, load_dataset, parse_csv
from cpucopula.errors import ParseError, SpecError
from cpucopula.tail import lambda_u_gamma_analytic

from reference_values import CORRELATIONS_B


def run(args):
    out, err = io.StringIO(), io.StringIO()
    code = main(args, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


class TestIngest:
    def test_dataset_a(self, dataset_a):
        assert dataset_a.columns == ["X1", "X2"]
        assert dataset_a.data.shape == (20, 2)
        assert dataset_a.data[0].tolist() == [0.468, 0.966]

    def test_dataset_b(self, dataset_b):
        assert dataset_b.data.shape == (20, 19)
        assert dataset_b.columns[0] == "Area 1" and dataset_b.columns[-1] == "Area 19"
        assert np.all(dataset_b.data > 0)

    def test_hash_pins(self):
        from importlib import resources
        for name, (filename, digest) in DATASET_FILES.items():
            raw = resources.files("cpucopula.data").joinpath(filename).read_bytes()
            assert hashlib.sha256(raw).hexdigest() == digest

    def test_unknown_dataset(self):
        with pytest.raises(SpecError):
            load_dataset("C")

    def test_single_column(self, tmp_path):
        path = tmp_path / "one.csv"
        path.write_text("x\n1.5\n2\n")
        table = ingest_csv(path)
        assert table.data.shape == (2, 1) and table.columns == ["x"]

    @pytest.mark.parametrize("text,row,column", [
        ("a,b\n1,2\n3\n", 3, None),
        ("a,b\n1,2\n3,zz\n", 3, 2),
        ("a,b\n1,nan\n", 2, 2),
    ])
    def test_parse_errors_located(self, text, row, column):
        with pytest.raises(ParseError) as info:
            parse_csv(text)
        assert info.value.row == row and info.value.column == column

    @pytest.mark.parametrize("text", ["", "\n\n", "a,b\n"])
    def test_empty(self, text):
        with pytest.raises(ParseError):
            parse_csv(text)

    def test_quoted_header(self):
        table = parse_csv('"loss, area 1",b\n1,2\n')
        assert table.columns == ["loss, area 1", "b"]


class TestHelpers:
    def test_int_range(self):
        assert parse_int_range("1..5", "a") == [1, 2, 3, 4, 5]
        assert parse_int_range("2,7", "a") == [2, 7]

    def test_broadcast(self):
        assert broadcast([10.0], 3, "a") == (10.0, 10.0, 10.0)
        assert broadcast([1.0, 2.0], 2, "a") == (1.0, 2.0)
        with pytest.raises(SpecError):
            broadcast([1.0, 2.0], 3, "a")

    def test_seed_from_environment(self, monkeypatch):
        monkeypatch.setenv("CPUCOPULA_SEED", "99")
        assert parse_config(["simulate", "--a", "1"]).seed == 99
        assert parse_config(["simulate", "--a", "1", "--seed", "3"]).seed == 3

    def test_config_file(self, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"sims": 77, "a": "4"}))
        parsed = parse_config(["--config", str(cfg), "simulate"])
        assert parsed.sims == 77 and parsed.a == "4"

    def test_config_unknown_key(self, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"simz": 77}))
        code, _, err = run(["--config", str(cfg), "simulate"])
        assert code == EXIT_CONFIG and "simz" in err


class TestTaildep:
    def test_analytic_table(self):
        code, out, _ = run(["taildep", "--analytic", "--a", "1..5"])
        assert code == EXIT_OK
        rows = json.loads(out)["analytic"]
        assert [r["lambda_u"] for r in rows[:2]] == [0.5, 0.625]
        for r in rows:
            assert r["quadrature"] == pytest.approx(lambda_u_gamma_analytic(r["a"]), rel=1e-10)

    def test_empirical_from_samples(self, tmp_path):
        samples = tmp_path / "s.csv"
        code, _, _ = run(["simulate", "--copula", "gamma", "--driver", "uf", "--a", "5",
                          "--sims", "20000", "--output", str(samples)])
        assert code == EXIT_OK
        code, out, _ = run(["taildep", "--samples", str(samples), "--thresholds", "0.9,0.95"])
        rows = json.loads(out)["empirical"]
        assert [r["threshold"] for r in rows] == [0.9, 0.95]
        assert all(0 < r["value"] <= 1.5 for r in rows)

    def test_needs_mode(self):
        assert run(["taildep"])[0] == EXIT_CONFIG


class TestSimulate:
    def test_power_rook_example(self, tmp_path):
        out = tmp_path / "fig.csv"
        code, _, _ = run(["simulate", "--dataset", "A", "--copula", "power", "--driver", "rook",
                          "--beta", "8", "--sims", "2000", "--output", str(out)])
        assert code == EXIT_OK
        rows = list(csv.reader(out.open()))
        assert rows[0] == ["v_1", "v_2"] and len(rows) == 2001
        values = np.array(rows[1:], dtype=float)
        assert np.all((values > 0) & (values < 1))
        meta = json.loads((tmp_path / "fig.csv.json").read_text())
        assert meta["beta"] == [8.0, 8.0] and meta["driver"]["kind"] == "rook" and meta["seed"] == 0

    def test_latent_columns(self, tmp_path):
        out = tmp_path / "s.csv"
        run(["simulate", "--a", "2,3", "--sims", "10", "--latent", "--output", str(out)])
        assert out.read_text().splitlines()[0] == "v_1,v_2,s_1,s_2"

    def test_byte_identical(self, tmp_path):
        args = ["simulate", "--dataset", "B", "--copula", "gamma", "--driver", "patchwork",
                "--rho", "0.6", "--a", "10", "--sims", "3000", "--seed", "5"]
        run(args + ["--output", str(tmp_path / "x.csv")])
        run(args + ["--output", str(tmp_path / "y.csv")])
        assert (tmp_path / "x.csv").read_bytes() == (tmp_path / "y.csv").read_bytes()
        assert (tmp_path / "x.csv.json").read_bytes() == (tmp_path / "y.csv.json").read_bytes()

    def test_chunking_does_not_change_stream_layout(self, tmp_path):
        base = ["simulate", "--a", "3", "--sims", "1000", "--seed", "1", "--chunk-size", "400"]
        run(base + ["--output", str(tmp_path / "x.csv")])
        text = (tmp_path / "x.csv").read_text().splitlines()
        assert len(text) == 1001
        meta = json.loads((tmp_path / "x.csv.json").read_text())
        assert meta["n_streams"] == 3 and meta["chunk_size"] == 400

    @pytest.mark.parametrize("args", [
        ["simulate", "--copula", "gamma"],
        ["simulate", "--a", "1,2,3"],
        ["simulate", "--driver", "patchwork", "--a", "1"],
        ["simulate", "--copula", "power", "--beta", "2"],
        ["simulate", "--dataset", "B", "--driver", "lf", "--a", "1"],
        ["simulate", "--bogus"],
        ["simulate", "--a", "1", "--sims", "0"],
    ])
    def test_config_errors(self, args):
        assert run(args)[0] == EXIT_CONFIG

    def test_parse_error_exit(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b\n1,x\n")
        code, _, err = run(["simulate", "--input", str(bad), "--a", "1"])
        assert code == EXIT_PARSE and "row 2, column 2" in err

    def test_missing_file(self, tmp_path):
        assert run(["corr", "--input", str(tmp_path / "none.csv")])[0] == EXIT_PARSE

    def test_numeric_error_exit(self, tmp_path):
        constant = tmp_path / "c.csv"
        constant.write_text("a,b\n1,2\n1,3\n1,4\n")
        assert run(["simulate", "--input", str(constant), "--a", "1"])[0] == EXIT_NUMERIC


class TestDensity:
    def test_grid(self):
        code, out, _ = run(["density", "--a", "2", "--grid", "3"])
        rows = list(csv.reader(io.StringIO(out)))
        assert code == EXIT_OK and rows[0] == ["u", "v", "density"] and len(rows) == 10

    def test_kinds_agree(self):
        closed = np.array(list(csv.reader(io.StringIO(run(["density", "--a", "3", "--grid", "4"])[1])))[1:],
                          dtype=float)
        quad = np.array(list(csv.reader(io.StringIO(
            run(["density", "--kind", "quad", "--a", "3", "--grid", "4"])[1])))[1:], dtype=float)
        np.testing.assert_allclose(closed, quad, rtol=1e-9)

    def test_nb(self):
        assert run(["density", "--kind", "nb", "--a", "2", "--grid", "2"])[0] == EXIT_OK

    def test_non_integer_closed(self):
        assert run(["density", "--a", "2.5"])[0] == EXIT_CONFIG


class TestVarAndCorr:
    def test_var_report(self):
        code, out, _ = run(["var", "--dataset", "B", "--copula", "gaussian", "--sims", "20000",
                            "--seed", "42"])
        report = json.loads(out)
        assert code == EXIT_OK and report["copula"] == "gaussian" and report["n_sims"] == 20000
        assert [r["level"] for r in report["rows"]] == [0.1, 0.05, 0.01, 0.005]
        assert len(report["marginals"]) == 19

    def test_var_uf_gamma_example_deterministic(self):
        args = ["var", "--dataset", "B", "--copula", "gamma", "--driver", "uf", "--a", "10",
                "--sims", "100000", "--levels", "0.1,0.05,0.01,0.005", "--seed", "42"]
        first, second = run(args)[1], run(args)[1]
        assert first == second
        rows = json.loads(first)["rows"]
        assert len(rows) == 4 and all(a["var"] < b["var"] for a, b in zip(rows, rows[1:]))

    def test_corr_matches_numpy(self, dataset_b):
        code, out, _ = run(["corr", "--dataset", "B"])
        rows = list(csv.reader(io.StringIO(out)))
        assert code == EXIT_OK and rows[0][1:] == dataset_b.columns
        np.testing.assert_allclose(np.array([r[1:] for r in rows[1:]], dtype=float),
                                   np.corrcoef(dataset_b.data.T), atol=1e-14)

    def test_corr_two_decimals(self):
        rows = list(csv.reader(io.StringIO(run(["corr", "--dataset", "B", "--decimals", "2"])[1])))
        printed = np.array([r[1:] for r in rows[1:]], dtype=float)
        assert all(len(x.split(".")[1]) == 2 for r in rows[1:] for x in r[1:])
        # Within one unit of the last printed digit everywhere.
        assert np.max(np.abs(printed - CORRELATIONS_B)) <= 0.01 + 1e-12

    def test_module_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "cpucopula", "taildep", "--analytic", "--a", "1"],
                              capture_output=True, text=True, check=False)
        assert proc.returncode == 0 and json.loads(proc.stdout)["analytic"][0]["lambda_u"] == 0.5

    def test_help_exits_zero(self):
        assert run(["--help"])[0] == EXIT_OK
