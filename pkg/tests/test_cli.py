import json

import pytest

from slqp.cli import main
from slqp.network import NetworkInstance


@pytest.fixture
def instance_file(tmp_path):
    path = tmp_path / "inst.json"
    assert main(["generate", "--users-per-cell", "2", "--seed", "3", "-o", str(path)]) == 0
    return path


class TestCli:
    def test_generate_stdout(self, capsys):
        assert main(["generate", "--users-per-cell", "1", "--seed", "0"]) == 0
        inst = NetworkInstance.from_json(capsys.readouterr().out)
        assert inst.K == 7

    def test_solve(self, instance_file, tmp_path, capsys):
        trace = tmp_path / "t.csv"
        assert main(["solve", str(instance_file), "--q", "50", "--algo", "lft", "--seed", "1",
                     "--max-outer", "30", "--tol", "1e-6", "--trace", str(trace)]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["Kq"] == 7 and out["algorithm"] == "LFT"
        assert len(trace.read_text().splitlines()) == out["outer_iters"] + 2
        assert main(["solve", str(instance_file), "--q", "50", "--bits"]) == 0
        bits = json.loads(capsys.readouterr().out)
        assert bits["units"] == "bits"

    def test_solve_trace_needs_mm(self, instance_file, tmp_path):
        assert main(["solve", str(instance_file), "--algo", "RANDOM", "--trace", str(tmp_path / "x.csv")]) == 1

    @pytest.mark.parametrize("argv", [
        ["solve", "missing.json"],
        ["solve"],
        ["solve", "x.json", "--algo", "WMMSE"],
        ["verify", "nonsense"],
        ["frobnicate"],
    ])
    def test_validation_exit_code(self, argv, capsys):
        with pytest.raises(SystemExit) as exc:
            raise SystemExit(main(argv))
        assert exc.value.code == 1

    def test_bad_q(self, instance_file):
        assert main(["solve", str(instance_file), "--q", "0"]) == 1

    def test_bench_sweep_plot(self, tmp_path, capsys):
        cfg = tmp_path / "c.ini"
        cfg.write_text("users_per_cell = 1\nrealizations = 1\nalgorithms = QFT, RANDOM\nq = 50\n"
                       "pmax_sweep_dbm = 20, 40\nmax_outer = 3\n")
        out = tmp_path / "out"
        assert main(["bench", str(cfg), "-o", str(out)]) == 0
        assert (out / "results.csv").exists()
        assert main(["sweep", str(cfg), "-o", str(out)]) == 0
        assert main(["plot", str(out / "sweep_results.csv"), "--kind", "sweep"]) == 0
        assert (out / "sweep_results_sweep.svg").exists()
        bad = tmp_path / "bad.ini"
        bad.write_text("q = 0\n")
        assert main(["bench", str(bad)]) == 1

    def test_verify(self, capsys, monkeypatch):
        assert main(["verify", "hardness"]) == 0
        assert "PASS" in capsys.readouterr().out
        from slqp import verify
        monkeypatch.setitem(verify.SUITES, "hardness", lambda: [verify.Check("forced", 1.0, 0.0)])
        assert main(["verify", "hardness"]) == 2
