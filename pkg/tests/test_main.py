import json

import pytest

from app.config.settings import Settings
from app.layout.spec_io import write_spec
from app.main import dispatch
from app.storage.results_exporter import ResultsExporter


@pytest.fixture
def settings(tmp_path):
    return Settings(output_dir=str(tmp_path / "output"), log_file=str(tmp_path / "app.log"))


@pytest.fixture
def three_button_file(tmp_path, three_button):
    return write_spec(tmp_path / "three_button.spec", three_button)


class TestSolve:

    def test_prints_solution(self, three_button_file, settings, capsys):
        code = dispatch(["solve", "--strategy", "ip", "--tol", "1e-3", str(three_button_file)], settings)
        out = capsys.readouterr().out
        assert code == 0
        assert "status: optimal" in out
        assert "strategy: InteriorPoint" in out
        for name in ("w1", "w2", "w3"):
            assert f"{name} = 100.000000" in out
        assert "suboptimal (tol=0.001): 3" in out

    def test_json_output(self, three_button_file, settings, tmp_path):
        target = tmp_path / "solution.json"
        code = dispatch(["solve", "--strategy", "as", "--json", str(target), str(three_button_file)], settings)
        assert code == 0
        assert json.loads(target.read_text(encoding="utf-8"))["strategy"] == "as"

    def test_unknown_strategy(self, three_button_file, settings, capsys):
        assert dispatch(["solve", "--strategy", "bogus", str(three_button_file)], settings) == 2
        assert "invalid choice" in capsys.readouterr().err

    def test_missing_file(self, tmp_path, settings):
        assert dispatch(["solve", str(tmp_path / "absent.spec")], settings) == 2

    def test_malformed_file(self, tmp_path, settings, capsys):
        path = tmp_path / "bad.spec"
        path.write_text("vars 1\nc H x5*1 EQ 1\n", encoding="utf-8")
        assert dispatch(["solve", str(path)], settings) == 2
        assert "line 2" in capsys.readouterr().err

    def test_infeasible_spec(self, tmp_path, settings):
        path = tmp_path / "infeasible.spec"
        path.write_text("vars 1\nc H x0*1 LE 0\nc H x0*1 GE 1\n", encoding="utf-8")
        for strategy in ("ip", "as", "simplex"):
            assert dispatch(["solve", "--strategy", strategy, str(path)], settings) == 1

    def test_nonpositive_tolerance(self, three_button_file, settings):
        assert dispatch(["solve", "--tol", "0", str(three_button_file)], settings) == 2

    def test_invalid_barrier_parameter(self, three_button_file, settings):
        assert dispatch(["solve", "--mu", "0.5", str(three_button_file)], settings) == 2


def test_no_command(settings):
    assert dispatch([], settings) == 2


def test_generate_is_deterministic(tmp_path, settings):
    args = ["generate", "--min", "4", "--max", "40", "--step", "12", "--per-size", "2", "--seed", "5"]
    assert dispatch(args + ["--out", str(tmp_path / "a")], settings) == 0
    assert dispatch(args + ["--out", str(tmp_path / "b")], settings) == 0
    first = sorted((tmp_path / "a").iterdir())
    second = sorted((tmp_path / "b").iterdir())
    assert [p.name for p in first] == [p.name for p in second]
    assert len(first) == 8
    for a, b in zip(first, second):
        assert a.read_bytes() == b.read_bytes()


def test_generate_rejects_bad_step(tmp_path, settings):
    assert dispatch(["generate", "--step", "6", "--out", str(tmp_path)], settings) == 2


def test_bench_is_deterministic_apart_from_time(tmp_path, settings):
    specs = tmp_path / "specs"
    assert dispatch(["generate", "--min", "4", "--max", "12", "--per-size", "1", "--out", str(specs)],
                    settings) == 0
    runs = []
    for name in ("one.csv", "two.csv"):
        out = tmp_path / name
        code = dispatch(["bench", "--specs", str(specs), "--repeats", "1", "--warmup", "0",
                         "--out", str(out)], settings)
        assert code == 0
        runs.append(out.read_text(encoding="utf-8").splitlines())

    header = "strategy,constraints,run,time_ms,suboptimal,iterations,status"
    assert runs[0][0] == runs[1][0] == header
    assert len(runs[0]) == 1 + 3 * 3
    for a, b in zip(runs[0][1:], runs[1][1:]):
        a_cells, b_cells = a.split(","), b.split(",")
        del a_cells[3], b_cells[3]
        assert a_cells == b_cells


def test_bench_rejects_unknown_strategy(tmp_path, settings):
    code = dispatch(["bench", "--strategies", "ip,nope", "--max", "8", "--out", str(tmp_path / "x.csv")],
                    settings)
    assert code == 2


def _write_cubic_csv(path, strategy="simplex"):
    lines = ["strategy,constraints,run,time_ms,suboptimal,iterations,status"]
    for c in range(4, 44, 4):
        t = 1 + 2 * c + 3 * c ** 2 + 4 * c ** 3
        lines.append(f"{strategy},{c},0,{t:.6f},0,1,optimal")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


class TestFit:

    def test_exact_cubic(self, tmp_path, settings, capsys):
        path = tmp_path / "results.csv"
        _write_cubic_csv(path)
        assert dispatch(["fit", str(path), "--strategy", "simplex"], settings) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[1].split() == ["Simplex", "cubic", "1", "2", "3", "4", "1.0000"]

    def test_model_comparison(self, tmp_path, settings, capsys):
        path = tmp_path / "results.csv"
        _write_cubic_csv(path, "ip")
        assert dispatch(["fit", str(path), "--models"], settings) == 0
        models = [line.split()[1] for line in capsys.readouterr().out.splitlines()[1:]]
        assert models == ["cubic", "linear", "quadratic", "log"]

    def test_too_few_sizes(self, tmp_path, settings):
        path = tmp_path / "results.csv"
        path.write_text(
            "strategy,constraints,run,time_ms,suboptimal,iterations,status\n"
            "as,4,0,1.0,0,1,optimal\nas,8,0,2.0,0,1,optimal\n",
            encoding="utf-8",
        )
        assert dispatch(["fit", str(path)], settings) == 1

    def test_missing_csv(self, tmp_path, settings):
        assert dispatch(["fit", str(tmp_path / "absent.csv")], settings) == 2

    def test_round_trip_with_exporter(self, tmp_path, settings):
        path = tmp_path / "results.csv"
        _write_cubic_csv(path, "as")
        records = ResultsExporter(settings.output_dir).read_records(path)
        assert len(records) == 10
