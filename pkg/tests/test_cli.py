import json
import subprocess
import sys

import pytest

try:
    import jsonschema
except ImportError:  # pragma: no cover
    jsonschema = None

from muchniklab.cli import main

SCHEMA_PATH = "src/muchniklab/schemas/report.schema.json"


def run_cli(*argv, cwd=None):
    proc = subprocess.run(
        [sys.executable, "-m", "muchniklab", *argv],
        capture_output=True,
        text=True,
        cwd=cwd,
    )
    return proc


@pytest.fixture(scope="module")
def schema():
    with open(SCHEMA_PATH, "r", encoding="utf-8") as fh:
        return json.load(fh)


def check_schema(schema, payload):
    if jsonschema is not None:
        jsonschema.validate(payload, schema)


@pytest.fixture()
def diamond_file(tmp_path):
    path = tmp_path / "diamond.json"
    path.write_text(
        json.dumps(
            {
                "points": ["0", "a", "b", "t"],
                "leq": [["0", "a"], ["0", "b"], ["a", "t"], ["b", "t"]],
            }
        )
    )
    return str(path)


class TestExitCodes:
    def test_valid_formula(self):
        assert main(["decide", "--logic", "ipc", "p -> p"]) == 0

    def test_invalid_formula(self):
        assert main(["decide", "--logic", "ipc", "p | ~p"]) == 1

    def test_countermodel_found(self, capsys):
        assert main(["countermodel", "~p | ~~p"]) == 1
        out = capsys.readouterr().out
        assert "tower level 3" in out

    def test_usage_error(self):
        assert main(["parse", "p & | q"]) == 2

    def test_budget_exhausted(self):
        code = main(
            ["countermodel", "p -> p", "--tower-max", "2", "--max-poset-points", "2"]
        )
        assert code == 3

    def test_unknown_decision_exit(self):
        # an instance-schedule miss with a tiny refutation bound gives unknown
        code = main(
            ["decide", "--logic", "kc", "~~p | ~~~p", "--kc-points", "1"]
        )
        assert code in (0, 3)


class TestJsonReports:
    @pytest.mark.parametrize(
        "argv",
        [
            ["parse", "p -> q -> p"],
            ["eval", "~p", "--lattice", "I2", "--set", "p=1", "--semantics", "heyting"],
            ["valid", "~p | ~~p", "--lattice", "I2"],
            ["countermodel", "p | ~p"],
            ["decide", "--logic", "kc", "p | ~p", "--emit-countermodel"],
            ["decide", "--logic", "ipc", "p -> p", "--emit-proof"],
            ["tower", "sizes"],
            ["tower", "check-wp", "2"],
            ["analyze", "prod(I2, I2)"],
        ],
    )
    def test_schema_validates(self, argv, schema, capsys):
        main([*argv, "--format", "json"])
        payload = json.loads(capsys.readouterr().out)
        check_schema(schema, payload)

    def test_muchnik_reports(self, schema, capsys, diamond_file, tmp_path):
        main(
            [
                "muchnik", "leq", "a", "b", "--poset", diamond_file,
                "--format", "json",
            ]
        )
        check_schema(schema, json.loads(capsys.readouterr().out))
        main(
            [
                "muchnik", "arrow", "a", "b", "--poset", diamond_file,
                "--format", "json",
            ]
        )
        payload = json.loads(capsys.readouterr().out)
        check_schema(schema, payload)
        assert payload["members"] == ["b", "t"]
        main(
            [
                "muchnik", "interval", "0", "-", "--poset", diamond_file,
                "--format", "json",
            ]
        )
        payload = json.loads(capsys.readouterr().out)
        check_schema(schema, payload)
        assert payload["size"] == 6

    def test_construct_verify_cycle(self, schema, capsys, tmp_path):
        out = tmp_path / "construction.json"
        code = main(
            [
                "muchnik", "construct",
                "--levels", "B1; dual(I2)",
                "-o", str(out),
                "--format", "json",
            ]
        )
        assert code == 0
        check_schema(schema, json.loads(capsys.readouterr().out))
        report_dir = tmp_path / "report"
        code = main(
            [
                "muchnik", "verify", str(out),
                "--report-dir", str(report_dir),
                "--format", "json",
            ]
        )
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        check_schema(schema, payload)
        assert payload["passed"] is True
        assert (report_dir / "report.json").exists()
        assert (report_dir / "checks.csv").exists()
        assert (report_dir / "master_poset.png").exists()
        saved = json.loads((report_dir / "report.json").read_text())
        assert saved == payload


class TestDeterminism:
    @pytest.mark.parametrize(
        "argv",
        [
            ["valid", "(p -> q) | (q -> p)", "--lattice", "I3", "--format", "json"],
            ["decide", "--logic", "ipc", "~p | ~~p", "--format", "json",
             "--emit-countermodel"],
            ["countermodel", "((p -> q) -> p) -> p", "--format", "json"],
        ],
    )
    def test_threads_do_not_change_bytes(self, argv):
        one = run_cli(*argv, "--threads", "1", cwd="/root/pkg")
        four = run_cli(*argv, "--threads", "4", cwd="/root/pkg")
        assert one.stdout == four.stdout
        assert one.returncode == four.returncode


class TestDotAndFigures:
    def test_export_dot_lattice(self, capsys):
        assert main(["export-dot", "lattice", "I2"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("digraph")
        assert "->" in out

    def test_export_dot_poset_png(self, tmp_path, diamond_file):
        png = tmp_path / "d.png"
        dot = tmp_path / "d.dot"
        code = main(
            ["export-dot", "poset", diamond_file, "-o", str(dot), "--png", str(png)]
        )
        assert code == 0
        assert dot.read_text().startswith("digraph")
        assert png.stat().st_size > 0

    def test_tower_plot(self, tmp_path, capsys):
        fig = tmp_path / "sizes.png"
        assert main(["tower", "sizes", "--plot", str(fig)]) == 0
        assert fig.stat().st_size > 0

    def test_missing_file_is_usage_error(self):
        assert main(["export-dot", "poset", "/nonexistent.json"]) == 2
