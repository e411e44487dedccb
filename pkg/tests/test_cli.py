import csv
import io
import json
import math
from dataclasses import replace

import numpy as np
import pytest

from qcorr import cli
from qcorr.frameworks import closed_form_bell
from qcorr.reports import StateFileError, dump_state_file, format_text, load_state_file, parse_state
from qcorr.states import UnphysicalStateError, build_rho_star
from qcorr.verification import run_verification, sample_bell_vectors

FAST = ["--grid", "400"]


@pytest.fixture
def bell_file(tmp_path):
    path = tmp_path / "bell.json"
    dump_state_file(path, bell_diagonal=[0.3, 0.2, 0.1], label="example")
    return path


def write(tmp_path, text, name="state.json"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


class TestStateFiles:
    def test_round_trip_matrix(self, tmp_path):
        rho = build_rho_star(0.5)
        path = tmp_path / "m.json"
        dump_state_file(path, state=rho)
        loaded = load_state_file(path)
        np.testing.assert_array_equal(loaded.state.matrix, rho.matrix)
        assert loaded.state.tag == "bell_diagonal"

    def test_bad_json_reports_position(self, tmp_path):
        path = write(tmp_path, '{\n  "bell_diagonal": [0.1, 0.2,\n}')
        with pytest.raises(StateFileError, match="line 3"):
            load_state_file(path)

    @pytest.mark.parametrize(
        "doc, fragment",
        [
            ({"bell_diagonal": [0.1, 0.2]}, "list of 3"),
            ({"bell_diagonal": [0.1, "x", 0.2]}, r"bell_diagonal\[1\]"),
            ({}, "exactly one"),
            ({"bell_diagonal": [0, 0, 0], "matrix": []}, "exactly one"),
            ({"bell_diagonal": [0, 0, 0], "colour": 1}, "unknown field"),
            ({"matrix": [[[0.25, 0]] * 4] * 3}, "4 rows"),
            ({"matrix": [[[0.25, 0], [0, 0], [0, 0], [0, 0]]] * 4}, "Hermitian"),
            ([1, 2], "object"),
        ],
    )
    def test_field_diagnostics(self, doc, fragment):
        with pytest.raises(StateFileError, match=fragment):
            parse_state(doc, "f.json")

    def test_unphysical_is_distinct(self):
        with pytest.raises(UnphysicalStateError):
            parse_state({"bell_diagonal": [1, 1, 1]})

    def test_missing_file(self, tmp_path):
        with pytest.raises(StateFileError, match="cannot read"):
            load_state_file(tmp_path / "absent.json")


class TestTextFormat:
    def test_dotted_keys(self):
        text = format_text({"a": {"b": 0.123456789, "c": None, "d": True}, "e": [1.0, 2.5]})
        assert text == "a.b: 0.123457\na.c: n/a\na.d: true\ne: [1, 2.5]\n"

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            format_text({"x": float("nan")})


class TestAnalyze:
    def test_example_report(self, capsys, bell_file):
        code, out, _ = run(capsys, "analyze", bell_file, "--json", *FAST)
        assert code == 0
        report = json.loads(out)
        ind = report["frameworks"]["independent_optimization"]
        assert ind["q"] == pytest.approx(0.2, abs=1e-8)
        assert ind["c"] == pytest.approx(0.3, abs=1e-8)
        assert report["closed_form"]["c_prime"] == pytest.approx(closed_form_bell([0.3, 0.2, 0.1]).c_prime)
        assert report["frameworks"]["measurement_based_a"]["note"] == "ambiguous under degeneracy"
        assert report["input"]["label"] == "example"
        assert report["settings"]["seed"] == 0

    def test_zero_state(self, capsys, tmp_path):
        path = write(tmp_path, '{"bell_diagonal": [0, 0, 0]}')
        code, out, _ = run(capsys, "analyze", path, "--json", *FAST)
        assert code == 0
        report = json.loads(out)
        for triple in report["frameworks"].values():
            assert (triple["q"], triple["c"], triple["t"]) == (0.0, 0.0, 0.0)
        assert report["ambiguity"]["is_ambiguous"] is False

    def test_rho_star_matrix_is_ambiguous(self, capsys, tmp_path):
        path = tmp_path / "rho_star.json"
        dump_state_file(path, state=build_rho_star(0.5))
        code, out, _ = run(capsys, "analyze", path, *FAST)
        assert code == 0
        assert "ambiguity.is_ambiguous: true" in out.splitlines()

    def test_byte_identical(self, tmp_path, bell_file):
        outs = []
        for k in range(2):
            target = tmp_path / f"r{k}.txt"
            assert cli.main(["analyze", str(bell_file), "--seed", "3", "--out", str(target), *FAST]) == 0
            outs.append(target.read_bytes())
        assert outs[0] == outs[1]

    def test_malformed_exit_2(self, capsys, tmp_path):
        code, _, err = run(capsys, "analyze", write(tmp_path, '{"bell_diagonal": [0.1, 0.2, }'))
        assert code == 2
        assert "line 1" in err

    def test_unphysical_exit_3(self, capsys, tmp_path):
        code, _, err = run(capsys, "analyze", write(tmp_path, '{"bell_diagonal": [1, 1, 1]}'))
        assert code == 3
        assert "-0.5" in err

    def test_bad_threads_env(self, capsys, monkeypatch, bell_file):
        monkeypatch.setenv("QCORR_THREADS", "many")
        code, _, err = run(capsys, "analyze", bell_file)
        assert code == 2
        assert "QCORR_THREADS" in err


class TestScan:
    def test_scan_json(self, capsys, bell_file):
        code, out, _ = run(capsys, "scan", bell_file, "--json", *FAST)
        assert code == 0
        deg = json.loads(out)["degeneracy"]
        assert deg["is_ambiguous"] is True
        assert deg["c_min"] == pytest.approx(math.sqrt(0.06), abs=1e-6)

    def test_threshold_flag(self, capsys, bell_file):
        code, out, _ = run(capsys, "scan", bell_file, "--threshold", "0.1", *FAST)
        assert code == 0
        assert "degeneracy.is_ambiguous: false" in out


class TestSweep:
    def test_example_rows(self, capsys):
        code, out, _ = run(capsys, "sweep", "--family", "rho-star", "--c", "0.5", "--nz", "0,0.6,1")
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert [float(r["C_numeric"]) for r in rows] == pytest.approx([0.5, 0.4, 0.0], abs=1e-12)
        assert float(rows[0]["Q_numeric"]) == pytest.approx(0.5, abs=1e-12)
        assert float(rows[1]["C_prime_analytic"]) == pytest.approx(2 * (math.sqrt(1.4) - 1))

    def test_csv_round_trip(self, tmp_path):
        path = tmp_path / "sweep.csv"
        assert cli.main(["sweep", "--c", "0:0.5:6", "--nz", "9", "--out", str(path)]) == 0
        raw = path.read_bytes()
        assert b"\r" not in raw
        lines = raw.decode().splitlines()
        assert lines[0] == ",".join(cli.SWEEP_COLUMNS)
        assert len(lines) == 1 + 6 * 9
        for line in lines[1:]:
            fields = line.split(",")
            assert all(format(float(f), ".17g") == f for f in fields)

    def test_zero_c_rows(self, capsys):
        _, out, _ = run(capsys, "sweep", "--c", "0:0:1", "--nz", "5")
        for row in csv.DictReader(io.StringIO(out)):
            assert all(float(row[k]) == 0.0 for k in cli.SWEEP_COLUMNS if k != "n_z")

    def test_custom_axis(self, capsys):
        code, out, _ = run(capsys, "sweep", "--family", "custom-axis", "--axis", "1,0.5,0.2",
                           "--c", "0.4", "--nz", "0.5")
        assert code == 0
        row = next(csv.DictReader(io.StringIO(out)))
        expected = 0.4 * math.sqrt(0.75 + 0.04 * 0.25)
        assert float(row["C_numeric"]) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("c_range", ["0.6:0.2:3", "0:1.5:3", "a:b:c", "0:1", "0.1:0.2:1"])
    def test_invalid_range_exit_2(self, capsys, c_range):
        assert run(capsys, "sweep", "--c", c_range, "--nz", "5")[0] == 2

    @pytest.mark.parametrize("nz", ["1", "0,2", "x"])
    def test_invalid_nz_exit_2(self, capsys, nz):
        assert run(capsys, "sweep", "--c", "0.5", "--nz", nz)[0] == 2

    def test_unphysical_family_exit_3(self, capsys):
        assert run(capsys, "sweep", "--c", "0:1:3", "--nz", "5")[0] == 3

    def test_self_check_exit_4(self, capsys, monkeypatch):
        monkeypatch.setattr(cli, "c_at", lambda rho, n: np.ones(len(n)))
        code, _, err = run(capsys, "sweep", "--c", "0.5", "--nz", "3")
        assert code == 4
        assert "self-check" in err


class TestVerify:
    def test_sampling_is_physical_and_seeded(self):
        a, b = sample_bell_vectors(50, 7), sample_bell_vectors(50, 7)
        np.testing.assert_array_equal(a, b)
        assert np.all(np.abs(a) <= 1)

    def test_injected_zero_vector(self):
        result = run_verification(1, seed=7, vectors=[[0.0, 0.0, 0.0]])
        assert result.passed
        assert result.summary() == "PASS: 1 states, seed 7, 0 failures"

    def test_corrupted_closed_form_fails(self):
        result = run_verification(
            vectors=[[0.3, 0.2, 0.1]], closed_form=lambda c: _shift(closed_form_bell(c)), restarts=3
        )
        assert not result.passed
        assert {f.check for f in result.failures} == {"Q''", "C'"}
        assert "c=(0.29999999999999999, 0.20000000000000001" in str(result.failures[0])

    def test_cli_failure_exit_4(self, capsys, monkeypatch):
        real = cli.run_verification

        def broken(n, seed, **kw):
            return real(n, seed, closed_form=lambda c: _shift(closed_form_bell(c)), **kw)

        monkeypatch.setattr(cli, "run_verification", broken)
        code, out, _ = run(capsys, "verify", "--n", "2", "--restarts", "2", *FAST)
        assert code == 4
        assert out.startswith("FAIL Q''")
        assert out.rstrip().endswith("failures")

    def test_small_run_passes(self, capsys):
        code, out, _ = run(capsys, "verify", "--n", "5", "--seed", "7")
        assert code == 0
        assert out == "PASS: 5 states, seed 7, 0 failures\n"

    def test_bad_n_exit_2(self, capsys):
        assert run(capsys, "verify", "--n", "0")[0] == 2

    @pytest.mark.slow
    def test_full_run(self, capsys):
        code, out, _ = run(capsys, "verify", "--n", "500", "--seed", "7")
        assert code == 0
        assert out == "PASS: 500 states, seed 7, 0 failures\n"


def _shift(ref):
    # off by far more than any tolerance
    return replace(ref, q=ref.q + 0.01, c_prime=ref.c_prime + 0.01)
