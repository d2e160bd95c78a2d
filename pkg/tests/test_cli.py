import csv
import json

import pytest

from sminlab import cli
from sminlab.errors import InvalidInputError
from sminlab.samplers import ShiftSpec


class TestParsers:
    def test_linear_grid(self):
        grid = cli.parse_grid("0.05:0.5:10")
        assert len(grid) == 10
        assert grid[0] == pytest.approx(0.05)
        assert grid[-1] == pytest.approx(0.5)
        assert grid[1] == pytest.approx(0.1)

    def test_geometric_grid(self):
        grid = cli.parse_grid("0.01:1.0:3", geom=True)
        assert grid == pytest.approx((0.01, 0.1, 1.0))

    def test_explicit_list(self):
        assert cli.parse_grid("1,2,4") == (1.0, 2.0, 4.0)

    def test_malformed_grid(self):
        with pytest.raises(InvalidInputError):
            cli.parse_grid("1:2")

    def test_shift_specs(self):
        assert cli.parse_shift("zero") == ShiftSpec.zero()
        assert cli.parse_shift("scaled-identity:2.5") == ShiftSpec.scaled_identity(2.5)
        assert cli.parse_shift("diagonal:1,2,3") == ShiftSpec.diagonal([1.0, 2.0, 3.0])
        assert cli.parse_shift("counterexample:100") == ShiftSpec.counterexample(100.0)
        with pytest.raises(InvalidInputError):
            cli.parse_shift("rotation:3")


class TestDispatch:
    def test_unknown_verb_is_usage_error(self, capsys):
        assert cli.parse_and_dispatch(["bogus"]) == 2
        capsys.readouterr()

    def test_unknown_flag_is_usage_error(self, capsys):
        assert cli.parse_and_dispatch(["tail", "--frobnicate", "1"]) == 2
        capsys.readouterr()

    def test_help_exits_zero(self, capsys):
        assert cli.parse_and_dispatch(["--help"]) == 0
        capsys.readouterr()

    def test_every_verb_lists_defaults_in_help(self, capsys):
        for verb in (
            "tail",
            "counterexample",
            "distance-profile",
            "lemma-check",
            "alphaeta-demo",
            "graph-decompose",
        ):
            assert cli.parse_and_dispatch([verb, "--help"]) == 0
            out = capsys.readouterr().out
            assert "default" in out

    def test_tail_writes_csv(self, tmp_path, capsys):
        out = tmp_path / "tail.csv"
        code = cli.parse_and_dispatch(
            [
                "tail",
                "--dist", "gaussian",
                "--n", "8",
                "--trials", "20",
                "--shift", "zero",
                "--t-grid", "0.05:0.5:10",
                "--seed", "42",
                "--out", str(out),
            ]
        )
        assert code == 0
        with open(out, newline="") as fh:
            rows = list(csv.reader(fh))
        assert len(rows) == 11  # header + 10 grid points
        captured = capsys.readouterr().out
        assert "config:" in captured

    def test_tail_from_config_file(self, tmp_path, capsys):
        config = {
            "dist": {"kind": "uniform_entry"},
            "shift": {"kind": "scaled_identity", "tau": 5.0},
            "n": 6,
            "trials": 10,
            "t_grid": [0.1, 0.2],
            "master_seed": 7,
            "statistic": {"kind": "smin_scaled"},
        }
        path = tmp_path / "config.json"
        path.write_text(json.dumps(config))
        out = tmp_path / "result.json"
        code = cli.parse_and_dispatch(
            ["tail", "--config", str(path), "--out", str(out), "--format", "json"]
        )
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["config"]["n"] == 6
        capsys.readouterr()

    def test_counterexample_runs(self, tmp_path, capsys):
        out = tmp_path / "ce.json"
        code = cli.parse_and_dispatch(
            [
                "counterexample",
                "--n", "8",
                "--tau", "16",
                "--trials", "12",
                "--seed", "1",
                "--out", str(out),
            ]
        )
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["trials"] == 12
        capsys.readouterr()

    def test_distance_profile_runs(self, capsys):
        code = cli.parse_and_dispatch(
            [
                "distance-profile",
                "--dist", "gaussian",
                "--n", "6",
                "--trials", "10",
                "--k", "1",
                "--a", "1000000",
                "--seed", "2",
            ]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "1.000000" in out

    def test_lemma_check_pass_and_report(self, tmp_path, capsys):
        out = tmp_path / "suite.json"
        code = cli.parse_and_dispatch(
            [
                "lemma-check",
                "--suite", "alpharho",
                "--instances", "5",
                "--seed", "7",
                "--out", str(out),
            ]
        )
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["failures"] == 0
        capsys.readouterr()

    def test_alphaeta_demo(self, capsys):
        code = cli.parse_and_dispatch(
            ["alphaeta-demo", "--cube", "--n", "4", "--k", "10", "--atoms", "40"]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "0.1420609375" in out
        assert "0.4" in out

    def test_graph_decompose(self, tmp_path, capsys):
        graph_file = tmp_path / "star.txt"
        graph_file.write_text("2 3\n2 4\n2 5\n")
        code = cli.parse_and_dispatch(
            [
                "graph-decompose",
                "--graph", str(graph_file),
                "--n", "5",
                "--vertex", "1",
                "--depth", "2",
            ]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "|E|=0" in out

    def test_graph_decompose_non_isolated_vertex(self, tmp_path, capsys):
        graph_file = tmp_path / "edge.txt"
        graph_file.write_text("1 2\n")
        code = cli.parse_and_dispatch(
            ["graph-decompose", "--graph", str(graph_file), "--vertex", "1", "--depth", "1"]
        )
        assert code == 2
        assert "error:" in capsys.readouterr().err

    def test_missing_graph_file(self, capsys):
        code = cli.parse_and_dispatch(
            ["graph-decompose", "--graph", "/nonexistent/g.txt", "--vertex", "1"]
        )
        assert code == 2
        capsys.readouterr()
