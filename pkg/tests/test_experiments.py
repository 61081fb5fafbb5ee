import json

import pandas as pd
import pytest

from innloops import __version__
from innloops.experiments import (MLT_SPECIAL_ORDER, MLT_TRIVIAL_ORDER, THETA_COUNT,
                                  ExperimentRunner, chmu_item, greedy_item, make_rng, mlt_item,
                                  pair_item, run_experiment, theta_item)
from innloops.shared.models import ExperimentName, ExperimentSpec, LoopCategory


def spec_for(name, **kwargs):
    return ExperimentSpec(name=name, seed=kwargs.pop("seed", 7), **kwargs)


def test_rng_is_reproducible():
    first, second = make_rng(42), make_rng(42)
    draws = [rng.integers(0, 2 ** 21, size=5).tolist() for rng in (first, second)]
    assert draws[0] == draws[1]


class TestPlans:
    def test_theta_family(self):
        plan = ExperimentRunner(spec_for(ExperimentName.THETA_FAMILY)).plan()
        assert len(plan) == THETA_COUNT
        assert plan[5] == (theta_item, (5,))

    def test_single_delta_params(self):
        plan = ExperimentRunner(spec_for(ExperimentName.SINGLE_DELTA_PARAMS)).plan()
        assert len(plan) == 21
        assert all(func is chmu_item for func, _ in plan)
        assert [args[1] for _, args in plan] == [1 << k for k in range(21)]

    def test_random_pairs_follow_the_seed(self):
        spec = spec_for(ExperimentName.RANDOM_MU_PAIRS, pairs=6, seed=99)
        plan = ExperimentRunner(spec).plan()
        assert len(plan) == 6
        assert all(func is pair_item for func, _ in plan)
        assert ExperimentRunner(spec).plan() == plan
        other = ExperimentRunner(spec.model_copy(update=dict(seed=100))).plan()
        assert other != plan

    def test_greedy_descent_is_one_item(self):
        runner = ExperimentRunner(spec_for(ExperimentName.GREEDY_DESCENT, workers=4))
        assert len(runner.plan()) == 1


class TestExecution:
    def test_interrupt_keeps_finished_items(self, tmp_path, monkeypatch):
        def stop():
            raise KeyboardInterrupt

        plan = [(lambda: dict(k=0), ()), (stop, ()), (lambda: dict(k=2), ())]
        monkeypatch.setattr(ExperimentRunner, "plan", lambda self: plan)
        out = tmp_path / "partial.json"
        report = run_experiment(spec_for(ExperimentName.THETA_FAMILY, output=out))
        assert not report.complete
        assert report.items == [dict(k=0)]
        assert report.summary == {}
        saved = json.loads(out.read_text())
        assert saved["complete"] is False
        assert saved["tool_version"] == __version__

    def test_report_carries_seed_and_prng(self, monkeypatch):
        monkeypatch.setattr(ExperimentRunner, "plan", lambda self: [])
        report = run_experiment(spec_for(ExperimentName.RANDOM_MU_PAIRS, seed=123))
        assert report.seed == 123
        assert report.prng == "PCG64"
        assert report.summary == dict(pairs=0, isomorphic_pairs=0)


def test_theta_item_for_a_group():
    item = theta_item(42)
    assert item["mu_count"] == 0
    assert item["category"] == LoopCategory.GROUP.value
    assert item["inn_abelian"] is None


@pytest.mark.slow
def test_chmu_item_properties():
    item = chmu_item(0, 0x1234, 0x11)
    assert item["order"] == 128
    assert item["center_is_a"]
    assert item["nilpotency_class"] == 3
    assert item["inn_elementary_abelian_2"]
    assert item["delta"] == "001234" and item["mu"] == "11"


@pytest.mark.slow
def test_theta_family_summary():
    report = run_experiment(spec_for(ExperimentName.THETA_FAMILY))
    categories = report.summary["categories"]
    assert categories[LoopCategory.GROUP.value] == [32, 34, 40, 42]
    assert categories[LoopCategory.CLASS3_ABELIAN_INN.value] == [1, 3, 9, 11, 33, 35, 41, 43]
    assert report.summary["groups_isomorphic"]
    assert report.summary["class3_isomorphic_to_cbar"]


@pytest.mark.slow
def test_random_pairs_rerun_writes_identical_bytes(tmp_path):
    out, csv = tmp_path / "pairs.json", tmp_path / "pairs.csv"
    spec = spec_for(ExperimentName.RANDOM_MU_PAIRS, pairs=2, output=out, summary_csv=csv)
    run_experiment(spec)
    first_json, first_csv = out.read_bytes(), csv.read_bytes()
    run_experiment(spec)
    assert out.read_bytes() == first_json
    assert csv.read_bytes() == first_csv
    assert json.loads(first_json)["summary"]["pairs"] == 2
    frame = pd.read_csv(csv)
    assert list(frame.columns) == ["first", "second", "isomorphic"]
    assert len(frame) == 2


@pytest.mark.slow
def test_multiplication_group_orders():
    assert mlt_item(0, 0, 0)["mlt_order"] == MLT_TRIVIAL_ORDER
    # flipping only mu(t2, t2) doubles the order four times over
    assert mlt_item(0, 0, 1)["mlt_order"] == 2 ** 17
    assert MLT_SPECIAL_ORDER == 2 ** 16


@pytest.mark.slow
def test_single_delta_loops_are_pairwise_nonisomorphic():
    report = run_experiment(spec_for(ExperimentName.SINGLE_DELTA_PARAMS))
    assert report.complete
    assert report.summary["loops"] == 21
    assert len(report.summary["classes"]) == 21
    assert report.summary["pairwise_nonisomorphic"]


@pytest.mark.slow
def test_chmu_properties_across_all_groups(isolated_settings):
    report = run_experiment(spec_for(ExperimentName.CHMU_PROPERTIES, samples=20))
    assert report.summary == dict(samples=20, failures=0)
    assert len({item["squaring_code"] for item in report.items}) == 10
    assert all(item["order"] == 128 and item["center_size"] == 2 for item in report.items)


@pytest.mark.slow
def test_greedy_descent_reaches_cbar():
    item = greedy_item()
    history = item["history"]
    assert history["steps"]
    assert history["final_mu_count"] < history["initial_mu_count"]
    assert item["isomorphic_to_cbar"]
    assert not item["isomorphic_to_c"]
    assert item["analysis"]["nilpotency_class"] == 3
