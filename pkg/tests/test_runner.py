"""Batch execution, results persistence, summaries, and reports."""
import math

import pytest

from mcsim import SimConfig
from mcsim.baselines import make_policy
from mcsim.domain import EmptyResultsError
from mcsim.reward import PRESETS
from mcsim.runner import (
    RESULT_FIELDS,
    TIMING_FIELD,
    episode_seed,
    format_curve_summary,
    format_report,
    load_curves,
    load_results,
    play_episode,
    preset_label,
    reward_proportions,
    run_episodes,
    run_grid,
    run_policy_by_name,
    summarize,
    write_results,
)
from mcsim.simulator import Simulator

BASE = SimConfig(
    intervals_per_episode=3,
    max_tasks_per_interval=2,
    num_participants=4,
    cancel_prob=0.0,
    seed=11,
)


def test_episode_seeds_are_base_plus_index():
    assert [episode_seed(11, i) for i in range(4)] == [11, 12, 13, 14]
    rows = run_policy_by_name(BASE, "npf", 3)
    assert [r.seed for r in rows] == [11, 12, 13]
    assert [r.episode for r in rows] == [0, 1, 2]
    shifted = run_policy_by_name(BASE, "npf", 2, base_seed=100)
    assert [r.seed for r in shifted] == [100, 101]


def test_rows_carry_setting_and_preset():
    rows = run_policy_by_name(BASE, "npf", 2)
    for row in rows:
        assert (row.s, row.t, row.p) == (3, 2, 4)
        assert row.preset == "balanced"
        assert row.policy == "npf"
        assert len(row.components) == 5
        assert not row.error


def test_preset_label_prefers_custom():
    from mcsim import RewardWeights

    assert preset_label(SimConfig(preset="energy_first")) == "energy_first"
    assert preset_label(SimConfig(preset=None)) == "balanced"
    assert preset_label(SimConfig(weights=RewardWeights(1, 0, 0, 0, 0))) == "custom"


def test_zero_episodes_is_legal():
    assert run_policy_by_name(BASE, "npf", 0) == []
    with pytest.raises(EmptyResultsError):
        run_policy_by_name(BASE, "npf", -1)


def test_reruns_are_identical():
    a = run_policy_by_name(BASE, "random", 3)
    b = run_policy_by_name(BASE, "random", 3)
    assert [r.episode_return for r in a] == [r.episode_return for r in b]
    assert [tuple(r.components) for r in a] == [tuple(r.components) for r in b]


def test_failed_episode_marked_not_fatal():
    # the oracle refuses this instance, so every episode fails but the
    # batch still returns one marked row per episode
    big = SimConfig(seed=1)
    rows = run_episodes(big, make_policy("oracle", big), 2)
    assert len(rows) == 2
    for row in rows:
        assert row.error == "SEARCH_TOO_LARGE"
        assert math.isnan(row.episode_return)
        assert all(math.isnan(v) for v in row.components)
    with pytest.raises(EmptyResultsError):
        summarize(rows)


def test_run_grid_covers_cross_product():
    rows = run_grid(BASE, "npf", [(2, 2, 3), (3, 2, 4)], ["balanced", "profit_first"], 2)
    combos = {(r.s, r.t, r.p, r.preset) for r in rows}
    assert len(rows) == 8
    assert combos == {
        (2, 2, 3, "balanced"),
        (2, 2, 3, "profit_first"),
        (3, 2, 4, "balanced"),
        (3, 2, 4, "profit_first"),
    }
    assert {r.seed for r in rows} == {11, 12}


def test_run_grid_none_preset_keeps_base_weights():
    rows = run_grid(BASE, "npf", [(2, 2, 3)], [None], 1)
    assert rows[0].preset == "balanced"


def test_write_and_load_results(tmp_path):
    rows = run_policy_by_name(BASE, "npf", 2)
    path = tmp_path / "results.csv"
    write_results(str(path), rows)
    header = path.read_text().splitlines()[0]
    assert header == ",".join(RESULT_FIELDS)
    loaded = load_results(str(path))
    assert len(loaded) == 2
    assert loaded[0]["policy"] == "npf"
    assert loaded[0]["return"] == pytest.approx(rows[0].episode_return)
    assert loaded[0]["o_fairness"] == pytest.approx(rows[0].components[3])


def test_timings_column_is_optional(tmp_path):
    rows = run_policy_by_name(BASE, "npf", 1)
    bare = tmp_path / "bare.csv"
    timed = tmp_path / "timed.csv"
    write_results(str(bare), rows)
    write_results(str(timed), rows, timings=True)
    assert TIMING_FIELD not in bare.read_text()
    assert TIMING_FIELD in timed.read_text().splitlines()[0]
    assert load_results(str(timed))[0][TIMING_FIELD] >= 0.0


def test_load_results_empty_file_errors(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text(",".join(RESULT_FIELDS) + "\n")
    with pytest.raises(EmptyResultsError):
        load_results(str(path))


def test_summarize_aggregates():
    rows = run_policy_by_name(BASE, "npf", 4)
    summary = summarize(rows)
    assert summary["episodes"] == 4.0
    assert summary["failed"] == 0.0
    returns = [r.episode_return for r in rows]
    assert summary["mean_return"] == pytest.approx(sum(returns) / 4)
    assert summary["mean_generated"] >= 0.0


def test_reward_proportions_examples():
    names = ("o_assign_dist", "o_trip_dist", "o_time", "o_fairness", "o_energy")

    def row(values):
        return dict(zip(names, values))

    lone = reward_proportions([row((1, 0, 0, 0, 0))], PRESETS["balanced"])
    assert lone == (1.0, 0.0, 0.0, 0.0, 0.0)
    pair = reward_proportions([row((0.3, -0.3, 0, 0, 0))], PRESETS["balanced"])
    assert pair == (0.5, 0.5, 0.0, 0.0, 0.0)
    zeros = reward_proportions([row((0, 0, 0, 0, 0))], PRESETS["balanced"])
    assert zeros == (0.0,) * 5
    weighted = reward_proportions([row((1, 0, 0, 1, 0))], PRESETS["fairness_first"])
    assert weighted == (0.2, 0.0, 0.0, 0.8, 0.0)
    total = reward_proportions(
        [row((0.5, 0.1, -0.2, 0.1, -0.1))] * 3, PRESETS["profit_first"]
    )
    assert sum(total) == pytest.approx(1.0)


def test_format_report_grid_and_proportions(tmp_path):
    rows = run_grid(BASE, "npf", [(2, 2, 3), (3, 2, 4)], ["balanced"], 2)
    rows += run_grid(BASE, "random", [(2, 2, 3)], ["balanced"], 2)
    path = tmp_path / "r.csv"
    write_results(str(path), rows)
    report = format_report(load_results(str(path)))
    assert "preset=balanced" in report
    assert "npf" in report and "random" in report
    assert "2,2,3" in report and "3,2,4" in report
    assert "proportions" in report
    # random has no 3,2,4 rows; its cell (last column) shows a dash
    line = next(l for l in report.splitlines() if l.startswith("3,2,4"))
    assert line.rstrip().endswith("-")


def test_format_report_skips_failed_rows(tmp_path):
    ok = run_policy_by_name(BASE, "npf", 1)
    big = SimConfig(seed=1)
    failed = run_episodes(big, make_policy("oracle", big), 1)
    path = tmp_path / "mixed.csv"
    write_results(str(path), ok + failed)
    report = format_report(load_results(str(path)))
    assert "oracle" not in report
    only_failed = tmp_path / "failed.csv"
    write_results(str(only_failed), failed)
    with pytest.raises(EmptyResultsError):
        format_report(load_results(str(only_failed)))


def test_custom_weights_report_has_no_proportions(tmp_path):
    from dataclasses import replace
    from mcsim import RewardWeights

    custom = replace(BASE, weights=RewardWeights(1, 0, 0, 0, 0))
    rows = run_policy_by_name(custom, "npf", 1)
    assert rows[0].preset == "custom"
    path = tmp_path / "c.csv"
    write_results(str(path), rows)
    report = format_report(load_results(str(path)))
    assert "preset=custom" in report
    assert "proportions" not in report


def test_play_episode_runs_to_completion():
    sim = Simulator(BASE)
    result = play_episode(sim, make_policy("npf", BASE), 11)
    assert sim.done
    assert result.wall_time_ms > 0.0
    assert result.counts["generated"] >= 0


def test_curves_round_trip(tmp_path):
    path = tmp_path / "curve.csv"
    path.write_text(
        "epoch,mean_cumulative_reward,stderr\n0,-1.0,0.1\n1,-0.5,0.1\n2,-0.25,0.05\n"
    )
    curve = load_curves(str(path))
    assert len(curve) == 3
    summary = format_curve_summary(curve)
    assert "epochs=3" in summary and "final=-0.2500" in summary
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y\n1,2\n")
    with pytest.raises(EmptyResultsError):
        load_curves(str(bad))
