import json
import math
import random

import numpy as np
import pytest

from mementohash import MementoHash
from mementohash import oracle
from mementohash.oracle import (
    ReferenceModel,
    add_event,
    breach_budget,
    check_balance,
    check_equivalence,
    check_iteration_bounds,
    check_minimal_disruption,
    check_monotonicity,
    init_event,
    naive_lookup,
    random_history,
    remove_event,
    replay_engine,
    run_suite,
)
from mementohash.hashing import jump


WORKED_LOG = [init_event(10), remove_event(9), remove_event(5), remove_event(1)]


class TestReferenceModel:
    def test_plain_init_equals_jump(self, uniform_keys):
        model = ReferenceModel([init_event(10)])
        for key in uniform_keys(500, seed=1):
            assert model.lookup(int(key)) == jump(int(key), 10)

    def test_worked_example_agreement(self, uniform_keys):
        model = ReferenceModel(WORKED_LOG)
        engine = replay_engine(WORKED_LOG)
        keys = uniform_keys(5_000, seed=2)
        fast = engine.lookup_many(keys)
        assert all(model.lookup(int(k)) == fast[i] for i, k in enumerate(keys))

    def test_state_mirrors_engine(self):
        rng = random.Random(5)
        for _ in range(60):
            events = random_history(rng, max_n=32)
            model = ReferenceModel(events)
            engine = replay_engine(events)
            assert model.size == engine.size
            assert model.working_count == engine.working_count
            assert model.last_removed == engine.last_removed
            assert model.working_buckets() == engine.working_buckets()

    def test_random_logs_agree(self, uniform_keys):
        rng = random.Random(6)
        for case in range(60):
            events = random_history(rng, max_n=32, max_events=20)
            model = ReferenceModel(events)
            engine = replay_engine(events)
            keys = uniform_keys(600, seed=case)
            fast = engine.lookup_many(keys)
            assert all(model.lookup(int(k)) == fast[i] for i, k in enumerate(keys))

    @pytest.mark.parametrize(
        "events",
        [
            [],
            [remove_event(1)],
            [init_event(0)],
            [init_event(4), init_event(4)],
            [init_event(4), remove_event(4)],
            [init_event(4), remove_event(1), remove_event(1)],
            [init_event(2), remove_event(0), remove_event(1)],
            [init_event(4), ("grow",)],
        ],
    )
    def test_invalid_logs_rejected(self, events):
        with pytest.raises(ValueError):
            ReferenceModel(events)

    def test_naive_lookup_one_shot(self):
        assert naive_lookup([init_event(10)], 1234) == jump(1234, 10)


class TestRandomHistory:
    def test_prefix_closed_and_replayable(self):
        rng = random.Random(7)
        for _ in range(100):
            events = random_history(rng, max_n=24)
            for cut in range(1, len(events) + 1):
                replay_engine(events[:cut])  # every prefix must be legal


class TestMinimalDisruption:
    def test_tail_removal_exact(self, uniform_keys):
        report = check_minimal_disruption([init_event(12)], 11, uniform_keys(4_000, seed=1))
        assert report.passed
        assert report.observed["structural_violations"] == 0

    def test_fraction_reported(self, uniform_keys):
        report = check_minimal_disruption([init_event(10)], 5, uniform_keys(20_000, seed=2))
        assert report.passed
        assert abs(report.observed["moved_z"]) <= 3.0
        assert report.bound["moved_expected"] == pytest.approx(2_000.0)

    def test_stepwise_removals(self, uniform_keys):
        rng = random.Random(8)
        events = [init_event(64)]
        keys = uniform_keys(3_000, seed=3)
        for _ in range(20):
            engine = replay_engine(events)
            b = rng.choice(engine.working_buckets())
            report = check_minimal_disruption(events, b, keys)
            assert report.passed
            events.append(remove_event(b))

    def test_reproduction_on_failure(self, uniform_keys, monkeypatch):
        class Skewed(MementoHash):
            def lookup_many(self, keys):
                out = super().lookup_many(keys)
                out[0] = (out[0] + 1) % max(self.working_count, 1)
                return out

        def broken_replay(events):
            engine = Skewed(events[0][1])
            for ev in events[1:]:
                engine.remove(ev[1]) if ev[0] == "remove" else engine.add()
            return engine

        monkeypatch.setattr(oracle, "replay_engine", broken_replay)
        report = check_minimal_disruption([init_event(10)], 5, uniform_keys(100, seed=4), seed=77)
        assert not report.passed
        assert report.reproduction["seed"] == 77
        assert report.reproduction["events"] == [["init", 10]]


class TestMonotonicity:
    def test_tail_growth_exact(self, uniform_keys):
        report = check_monotonicity([init_event(9)], uniform_keys(4_000, seed=5))
        assert report.passed
        assert report.observed["added_bucket"] == 9

    def test_worked_example_restore(self, uniform_keys):
        report = check_monotonicity(WORKED_LOG, uniform_keys(40_000, seed=6))
        assert report.passed
        assert report.observed["added_bucket"] == 1
        assert report.bound["moved_expected"] == pytest.approx(40_000 / 8)
        assert abs(report.observed["moved_z"]) <= 3.0

    def test_randomized_histories(self, uniform_keys):
        rng = random.Random(9)
        keys = uniform_keys(2_000, seed=7)
        for _ in range(100):
            report = check_monotonicity(random_history(rng, max_n=32), keys)
            assert report.passed


class TestBalance:
    def test_single_bucket_holds_everything(self, uniform_keys):
        engine = MementoHash(3)
        engine.remove(0)
        engine.remove(1)
        report = check_balance(engine, uniform_keys(5_000, seed=8))
        assert report.passed
        assert report.observed["worst_abs_deviation"] == 0.0

    def test_three_way_split(self, uniform_keys):
        engine = MementoHash(6)
        for b in (0, 3, 5):
            engine.remove(b)
        report = check_balance(engine, uniform_keys(120_000, seed=9))
        assert report.passed

    def test_partial_removal_large(self, uniform_keys):
        engine = MementoHash(1_000)
        order = list(range(1_000))
        random.Random(10).shuffle(order)
        for b in order[:200]:
            engine.remove(b)
        report = check_balance(engine, uniform_keys(200_000, seed=10))
        assert report.passed


class TestIterationBounds:
    def test_empty_table_trivial(self, uniform_keys):
        report = check_iteration_bounds(MementoHash(100), uniform_keys(5_000, seed=11))
        assert report.passed
        assert report.observed["ext_mean"] == 0.0

    def test_two_thirds_removed(self, uniform_keys):
        engine = MementoHash(1_000)
        order = list(range(1_000))
        random.Random(12).shuffle(order)
        for b in order[:650]:
            engine.remove(b)
        report = check_iteration_bounds(engine, uniform_keys(50_000, seed=12))
        assert report.passed
        assert report.observed["ext_mean"] <= 1 + math.log(1_000 / 350)

    def test_ninety_percent_removed(self, uniform_keys):
        engine = MementoHash(1_000)
        order = list(range(1_000))
        random.Random(13).shuffle(order)
        for b in order[:900]:
            engine.remove(b)
        report = check_iteration_bounds(engine, uniform_keys(50_000, seed=13))
        assert report.passed
        assert report.observed["ext_mean"] <= 1 + math.log(10)


class TestEquivalence:
    def test_worked_example(self, uniform_keys):
        report = check_equivalence(WORKED_LOG, uniform_keys(2_000, seed=14))
        assert report.passed

    def test_detects_divergence(self, uniform_keys, monkeypatch):
        class Skewed(MementoHash):
            def lookup_many(self, keys):
                out = super().lookup_many(keys)
                return (out + 1) % self.size

        monkeypatch.setattr(oracle, "replay_engine", lambda ev: Skewed(ev[0][1]))
        report = check_equivalence([init_event(8)], uniform_keys(50, seed=15), seed=5)
        assert not report.passed
        assert report.reproduction["first_mismatch"] is not None


class TestSuites:
    def test_deterministic_reports(self):
        first, ok1 = run_suite("equivalence", size=32, seed=1, cases=10, keys=500)
        second, ok2 = run_suite("equivalence", size=32, seed=1, cases=10, keys=500)
        assert ok1 and ok2
        assert [r.to_json() for r in first] == [r.to_json() for r in second]

    def test_all_suites_pass(self):
        for suite in oracle.SUITES:
            reports, ok = run_suite(suite, size=64, seed=3, cases=15, keys=2_000)
            assert ok, f"{suite} failed: {[r.to_json() for r in reports if not r.passed]}"

    def test_unknown_suite_rejected(self):
        with pytest.raises(ValueError):
            run_suite("nope")

    def test_report_json_round_trips(self, uniform_keys):
        report = check_balance(MementoHash(8), uniform_keys(2_000, seed=16))
        doc = json.loads(report.to_json())
        assert doc["property"] == "balance"
        assert doc["passed"] is True

    def test_breach_budget_envelope(self):
        assert breach_budget(1) >= 1
        assert breach_budget(1_000) <= 13
