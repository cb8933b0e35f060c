import json
import random
import subprocess
import sys

import pytest

from mementohash import MementoHash, cli, oracle
from mementohash.hashing import jump, keyed_hash


def run_cli(*argv):
    return cli.main(list(argv))


def write_fig_state(path):
    engine = MementoHash(6)
    for b in (0, 3, 5):
        engine.remove(b)
    path.write_bytes(engine.save_state())
    return engine


def find_fig_digest(predicate):
    rng = random.Random(12)
    while True:
        key = rng.getrandbits(64)
        if jump(key, 6) != 3:
            continue
        if predicate(keyed_hash(key, 3) % 4, keyed_hash(key, 5) % 3):
            return key


class TestStateCommand:
    def test_worked_example_flow(self, tmp_path, capsys):
        state = str(tmp_path / "s.json")
        assert run_cli("state", "init", "10", "--file", state) == 0
        assert run_cli("state", "remove", "9", "--file", state) == 0
        assert run_cli("state", "show", "--file", state) == 0
        shown = capsys.readouterr().out
        assert "size=9 working=9 removed=0 last_removed=9" in shown

        assert run_cli("state", "remove", "5", "--file", state) == 0
        assert run_cli("state", "remove", "1", "--file", state) == 0
        assert run_cli("state", "show", "--file", state) == 0
        shown = capsys.readouterr().out
        assert "size=9 working=7 removed=2 last_removed=1" in shown
        assert "5 -> 8 (previous 9)" in shown
        assert "1 -> 7 (previous 5)" in shown

    def test_double_removal_fails(self, tmp_path, capsys):
        state = str(tmp_path / "s.json")
        run_cli("state", "init", "10", "--file", state)
        run_cli("state", "remove", "5", "--file", state)
        capsys.readouterr()
        assert run_cli("state", "remove", "5", "--file", state) == 1
        assert "not working" in capsys.readouterr().err

    def test_add_restores(self, tmp_path, capsys):
        state = str(tmp_path / "s.json")
        run_cli("state", "init", "10", "--file", state)
        run_cli("state", "remove", "5", "--file", state)
        capsys.readouterr()
        assert run_cli("state", "add", "--file", state) == 0
        assert "added bucket 5" in capsys.readouterr().out

    def test_missing_file_is_usage_error(self, tmp_path):
        assert run_cli("state", "show", "--file", str(tmp_path / "nope.json")) == 2

    def test_corrupt_file_is_usage_error(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{broken")
        assert run_cli("state", "show", "--file", str(bad)) == 2


class TestTraceCommand:
    def test_empty_table_single_jump(self, tmp_path, capsys):
        state = tmp_path / "s.json"
        state.write_bytes(MementoHash(9).save_state())
        assert run_cli("trace", "--file", str(state), "--key", "order-7421") == 0
        out = capsys.readouterr().out
        assert "jump(key, 9) ->" in out
        assert "external passes: 0" in out

    def test_single_pass_path(self, tmp_path, capsys):
        state = tmp_path / "fig.json"
        write_fig_state(state)
        digest = find_fig_digest(lambda d1, d2: d1 == 1)
        assert run_cli("trace", "--file", str(state), "--key-hex", f"{digest:016x}") == 0
        out = capsys.readouterr().out
        assert "jump(key, 6) -> 3" in out
        assert "result: bucket 1" in out
        assert "external passes: 1" in out

    def test_chained_path(self, tmp_path, capsys):
        state = tmp_path / "fig.json"
        write_fig_state(state)
        digest = find_fig_digest(lambda d1, d2: d1 == 0 and d2 == 0)
        assert run_cli("trace", "--file", str(state), "--key-hex", f"{digest:016x}") == 0
        out = capsys.readouterr().out
        assert "chain: 0 -> 5" in out
        assert "chain: 0 -> 5 -> 3 -> 4" in out
        assert "result: bucket 4" in out
        assert "external passes: 2" in out

    def test_key_string_is_digested(self, tmp_path, capsys):
        state = tmp_path / "s.json"
        engine = MementoHash(32)
        state.write_bytes(engine.save_state())
        assert run_cli("trace", "--file", str(state), "--key", "user:42") == 0
        out = capsys.readouterr().out
        from mementohash.hashing import digest_key

        assert f"result: bucket {engine.lookup(digest_key(b'user:42'))}" in out

    def test_bad_hex_is_usage_error(self, tmp_path):
        state = tmp_path / "s.json"
        state.write_bytes(MementoHash(4).save_state())
        assert run_cli("trace", "--file", str(state), "--key-hex", "zz") == 2


class TestBenchCommand:
    def test_stable_two_algorithms(self, tmp_path, capsys):
        out = tmp_path / "o.csv"
        code = run_cli(
            "bench", "--scenario", "stable", "--algos", "memento,jump",
            "--size", "1000", "--keys", "2000", "--reps", "1",
            "--seed", "7", "--out", str(out),
        )
        assert code == 0
        header, *rows = out.read_text().splitlines()
        assert header.startswith("algorithm,scenario,w_initial")
        algorithms = {row.split(",")[0] for row in rows}
        assert algorithms == {"memento", "jump"}
        assert "# config scenario=stable" in capsys.readouterr().err

    def test_jump_random_removals_exit_2(self):
        code = run_cli(
            "bench", "--scenario", "oneshot", "--order", "random",
            "--algos", "jump", "--size", "100", "--keys", "100", "--reps", "1",
        )
        assert code == 2

    def test_sensitivity_sweeps_ratios(self, tmp_path):
        out = tmp_path / "o.csv"
        code = run_cli(
            "bench", "--scenario", "sensitivity", "--algos", "anchor,dx,memento",
            "--size", "40", "--keys", "500", "--reps", "1", "--out", str(out),
        )
        assert code == 0
        ratios = {row.split(",")[5] for row in out.read_text().splitlines()[1:]}
        assert ratios == {"5.0", "10.0", "20.0", "50.0", "100.0"}

    def test_stdout_when_no_out_flag(self, capsys):
        code = run_cli(
            "bench", "--scenario", "stable", "--algos", "jump",
            "--size", "50", "--keys", "200", "--reps", "1",
        )
        assert code == 0
        assert capsys.readouterr().out.startswith("algorithm,scenario")

    def test_figures_rendered(self, tmp_path):
        out = tmp_path / "o.csv"
        figs = tmp_path / "figs"
        code = run_cli(
            "bench", "--scenario", "stable", "--algos", "memento,jump",
            "--size", "20,100", "--keys", "500", "--reps", "1",
            "--out", str(out), "--figures", str(figs),
        )
        assert code == 0
        rendered = sorted(p.name for p in figs.glob("*.png"))
        assert "stable_lookup_ns_median.png" in rendered
        assert "stable_memory_entries.png" in rendered

    def test_bad_size_exit_2(self):
        assert run_cli("bench", "--scenario", "stable", "--size", "ten") == 2

    def test_unknown_flag_exit_2(self):
        with pytest.raises(SystemExit) as excinfo:
            run_cli("bench", "--scenario", "stable", "--warp", "9")
        assert excinfo.value.code == 2


class TestVerifyCommand:
    def test_equivalence_suite(self, capsys):
        code = run_cli(
            "verify", "--suite", "equivalence", "--size", "32",
            "--seed", "1", "--cases", "15", "--keys", "1000",
        )
        assert code == 0
        assert "suite equivalence: 15/15" in capsys.readouterr().err

    def test_balance_suite(self):
        assert run_cli("verify", "--suite", "balance", "--size", "1000", "--seed", "1") == 0

    def test_all_suites(self):
        code = run_cli(
            "verify", "--suite", "all", "--size", "48",
            "--seed", "2", "--cases", "8", "--keys", "1000",
        )
        assert code == 0

    def test_corrupted_engine_fails_with_reproduction(self, capsys, monkeypatch):
        class Skewed(MementoHash):
            def lookup_many(self, keys):
                return (super().lookup_many(keys) + 1) % self.size

        def broken_replay(events):
            engine = Skewed(events[0][1])
            for ev in events[1:]:
                engine.remove(ev[1]) if ev[0] == "remove" else engine.add()
            return engine

        monkeypatch.setattr(oracle, "replay_engine", broken_replay)
        code = run_cli(
            "verify", "--suite", "equivalence", "--size", "16",
            "--seed", "3", "--cases", "4", "--keys", "200",
        )
        assert code == 1
        out = capsys.readouterr().out
        report = json.loads(out.splitlines()[0])
        assert report["passed"] is False
        assert "events" in report["reproduction"]

    def test_unknown_suite_exit_2(self):
        with pytest.raises(SystemExit) as excinfo:
            run_cli("verify", "--suite", "everything")
        assert excinfo.value.code == 2


class TestConsoleScript:
    def test_module_entry_point(self, tmp_path):
        state = tmp_path / "s.json"
        proc = subprocess.run(
            [sys.executable, "-m", "mementohash.cli", "state", "init", "4", "--file", str(state)],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert state.exists()
        proc = subprocess.run(
            [sys.executable, "-m", "mementohash.cli", "trace", "--file", str(state), "--key", "a"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert "result: bucket" in proc.stdout
