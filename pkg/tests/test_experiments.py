import math

import numpy as np
import pytest

import hemidefense.experiments as X
from hemidefense.engine import GameConfig, GameMode, run_game
from hemidefense.exceptions import ConfigError, SimulationError
from hemidefense.experiments import (
    CompareSpec,
    SummaryRow,
    SweepSpec,
    compare_spec_from_dict,
    default_radii,
    generate_trials,
    run_comparison,
    run_sweep,
    spec_to_dict,
    sweep_configs,
    sweep_spec_from_dict,
)
from hemidefense.strategies import StrategyKind


def test_default_radii():
    r = default_radii()
    assert len(r) == 22 and r[0] == pytest.approx(3.0) and r[-1] == pytest.approx(300.0)
    assert np.allclose(np.diff(np.log(r)), np.log(100) / 21)


@pytest.mark.parametrize(
    "kwargs",
    [dict(radii=[]), dict(radii=[3, -1]), dict(radii=[10, 3]), dict(trials_per_radius=0), dict(step_scaling="log")],
)
def test_sweep_spec_invalid(kwargs):
    with pytest.raises(ConfigError):
        SweepSpec(**kwargs)


def test_compare_spec_invalid():
    with pytest.raises(ConfigError):
        CompareSpec(n_trials=0)
    with pytest.raises(ConfigError):
        CompareSpec(r0_range=(0.9, 2.0))
    with pytest.raises(ConfigError):
        run_comparison(CompareSpec(base_config=GameConfig()))


class TestTrials:
    def test_deterministic_and_distinct(self):
        a, b = generate_trials(CompareSpec(seed=3)), generate_trials(CompareSpec(seed=3))
        assert a == b
        assert len({(c.psi0, c.phi0, c.r0) for c in a}) == 7
        assert generate_trials(CompareSpec(seed=4)) != a

    def test_ranges(self):
        for c in generate_trials(CompareSpec(n_trials=200)):
            assert 0.3 <= c.psi0 <= 1.5
            assert 0.15 * math.pi <= c.phi0 <= 0.45 * math.pi
            assert 1.5 * c.R <= c.r0 <= 3.0 * c.R and c.r0 > c.R


def test_sweep_jitter_is_shared_across_radii():
    items = sweep_configs(SweepSpec(radii=[3.0, 30.0], trials_per_radius=3, seed=7))
    by_trial = {}
    for (R, j), cfg in items:
        by_trial.setdefault(j, set()).add(cfg.psi0)
    assert by_trial[0] == {0.9}
    assert all(len(v) == 1 for v in by_trial.values())
    assert all(abs(next(iter(v)) - 0.9) <= 0.02 for v in by_trial.values())


def test_proportional_sweep_is_scale_invariant():
    res = run_sweep(SweepSpec(radii=[3.0, 30.0, 300.0], trials_per_radius=1, step_scaling="proportional"))
    vals = [r.over_R(r.l_d) for r in res.runs]
    assert all(r.winner == "intruder" for r in res.runs)
    assert max(vals) - min(vals) <= 1e-9 * max(vals)


def test_fixed_sweep_keeps_step_length():
    for (R, _), cfg in sweep_configs(SweepSpec(radii=[3.0, 300.0], trials_per_radius=1)):
        assert cfg.dl == 0.72 and cfg.dl_prime == 0.72 and cfg.R == R


def test_summary_rows_recompute():
    res = run_sweep(SweepSpec(radii=[5.0, 50.0], trials_per_radius=4))
    for row in res.summary:
        v = np.array(row.values)
        assert row.n == 4
        assert row.mean == pytest.approx(v.mean(), rel=1e-15)
        assert row.std == pytest.approx(v.std(ddof=1), rel=1e-12) and row.std >= 0
        assert row.min <= row.mean <= row.max


def test_summary_row_edge_cases():
    empty = SummaryRow.from_values("g", "m", [None, math.nan])
    assert empty.n == 0 and math.isnan(empty.mean)
    single = SummaryRow.from_values("g", "m", [2.0])
    assert single.std == 0.0 and single.mean == 2.0


def test_failed_game_is_recorded(monkeypatch):
    real = X.run_game

    def failing(cfg, record_trajectory=True):
        if cfg.R == 5.0:
            raise SimulationError("solver gave up", 7)
        return real(cfg, record_trajectory)

    monkeypatch.setattr(X, "run_game", failing)
    res = run_sweep(SweepSpec(radii=[5.0, 6.0], trials_per_radius=2))
    winners = [r.winner for r in res.runs]
    assert winners == ["failed", "failed", "intruder", "intruder"]
    assert res.summary[0].n == 0
    assert "5.0,0,failed,,,," in res.to_csv()


def test_csv_layout_and_parallel_equivalence():
    spec = SweepSpec(radii=[3.0, 10.0], trials_per_radius=2)
    serial, parallel = run_sweep(spec), run_sweep(spec, jobs=2)
    assert serial.to_csv() == parallel.to_csv()
    assert serial.summary_csv() == parallel.summary_csv()
    assert serial.to_csv().splitlines()[0] == "radius,trial,winner,t_f,ticks,l_d,l_d_over_R"
    assert serial.summary_csv().splitlines()[0] == "group,metric,mean,std,min,max,n"


def test_comparison_layout():
    res = run_comparison(CompareSpec(n_trials=3))
    lines = res.to_csv().splitlines()
    assert lines[0] == "trial,strategy,winner,t_f,l_s,l_s_over_R,psi0,phi0,r0"
    assert len(lines) == 7
    assert [r.group for r in res.summary] == ["optimal_defender", "baseline_defender"]
    assert len(res.pairs()) == 3
    for opt, base in res.pairs():
        assert opt.config.replace(defender_strategy=StrategyKind.BASELINE_DEFENDER) == base.config


def test_flagged_matches_pairs():
    res = run_comparison(CompareSpec(n_trials=7))
    expected = [o.key[0] for o, b in res.pairs() if b.l_s is not None and o.l_s is not None and b.l_s > o.l_s]
    assert res.flagged() == expected


def test_paired_intruder_until_divergence():
    for cfg in generate_trials(CompareSpec(n_trials=7)):
        opt = run_game(cfg.replace(defender_strategy=StrategyKind.OPTIMAL_DEFENDER))
        base = run_game(cfg.replace(defender_strategy=StrategyKind.BASELINE_DEFENDER))
        first = next(
            i for i, (a, b) in enumerate(zip(opt.trajectory, base.trajectory)) if abs(a.theta_abs - b.theta_abs) > 1e-12
        )
        for a, b in zip(opt.trajectory[: first + 1], base.trajectory[: first + 1]):
            np.testing.assert_array_equal(a.intruder_pos, b.intruder_pos)


def test_spec_dict_round_trip():
    spec = SweepSpec(radii=[3.0, 9.0], trials_per_radius=2, step_scaling="proportional", seed=5)
    assert sweep_spec_from_dict(spec_to_dict(spec)) == spec
    cspec = CompareSpec(n_trials=2, seed=9)
    assert compare_spec_from_dict(spec_to_dict(cspec)) == cspec
    partial = compare_spec_from_dict({"base_config": {"R": 20.0}})
    assert partial.base_config.R == 20.0 and partial.base_config.mode is GameMode.UNTIL_DEFENDER_ARRIVES


@pytest.mark.parametrize(
    "data",
    [{"radius": [3]}, {"base_config": {"Radius": 3}}, {"trials_per_radius": 0}],
)
def test_spec_dict_rejects(data):
    with pytest.raises(ConfigError):
        sweep_spec_from_dict(data)
