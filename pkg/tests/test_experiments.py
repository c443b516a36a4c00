import math

import numpy as np
import pytest

from defzeros.errors import InvalidArgument, ResolutionFailure
from defzeros.experiments import (ExperimentConfig, empirical_tail, rotation_invariance_test,
                                  run_campaign, run_config_file, summarize, with_trials)
from defzeros.io import read_csv

CIRCLE = {"family": "circle", "center": "0,0", "radius": "1"}


def config(**kw):
    base = dict(kind="curve_zero_count", n=2, d=9, trials=40, seed=3, gamma=dict(CIRCLE))
    base.update(kw)
    return ExperimentConfig(**base)


def test_from_mapping():
    cfg = ExperimentConfig.from_mapping({
        "kind": "tail", "n": "2", "d": "16", "trials": "10", "seed": "0x1f",
        "gamma.family": "circle", "gamma.radius": "0.5", "t_list": "1, 2,4",
    })
    assert cfg.seed == 31
    assert cfg.gamma == {"family": "circle", "radius": "0.5"}
    assert cfg.t_list == (1.0, 2.0, 4.0)


@pytest.mark.parametrize("bad", [
    {"kind": "nope"},
    {"trials": 0},
    {"n": 4},
    {"kind": "surface_crit"},
    {"kind": "tail"},
    {"kind": "tail", "t_list": (0.0,)},
    {"gamma": {}},
    {"workers": 0},
])
def test_invalid_configs(bad):
    with pytest.raises(InvalidArgument):
        config(**bad)


def test_unknown_and_missing_keys():
    with pytest.raises(InvalidArgument):
        ExperimentConfig.from_mapping({"kind": "tail"})
    with pytest.raises(InvalidArgument):
        ExperimentConfig.from_mapping({"kind": "curve_zero_count", "n": "2", "d": "3",
                                       "trials": "1", "seed": "0", "gamma.family": "circle",
                                       "colour": "red"})


def test_campaign_is_reproducible_and_worker_independent():
    a = run_campaign(config())
    b = run_campaign(config(workers=2))
    assert [r["count"] for r in a.rows] == [r["count"] for r in b.rows]
    assert a.summary.mean == b.summary.mean
    assert [r["trial_index"] for r in a.rows] == list(range(40))


def test_prefix_of_trials_is_stable():
    a = run_campaign(config(trials=20))
    b = run_campaign(with_trials(config(), 40))
    assert [r["count"] for r in a.rows] == [r["count"] for r in b.rows[:20]]


def test_summary_requires_stable_trials():
    with pytest.raises(ResolutionFailure):
        summarize([2, 2, 2], [True, True, False])
    s = summarize([2, 4, 6] * 40, [True] * 120)
    assert s.mean == pytest.approx(4.0)
    assert s.std_error == pytest.approx(s.sample_std / math.sqrt(120))


def test_tail_campaign():
    cfg = config(kind="tail", d=16, trials=150, t_list=(0.25, 0.5, 1.0, 2.0, 2.125))
    res, rows = empirical_tail(cfg)
    surv = [r["survival"] for r in rows]
    assert surv == sorted(surv, reverse=True)
    for r in rows:
        assert r["survival"] <= r["markov"]
        assert not r["violation"]
    # Bezout ceiling: a conic meets a degree-16 curve in at most 32 points
    assert rows[-1]["survival"] == 0.0
    assert max(res.counts) <= 32


def test_identity_rotation_gives_identical_counts():
    cfg = config(kind="rotation_invariance", gamma={"family": "circle", "radius": "0.5"})
    rr = rotation_invariance_test(cfg, rotation=np.eye(3))
    assert [r["count"] for r in rr.original.rows] == [r["count"] for r in rr.rotated.rows]
    assert rr.passed
    assert rr.length_rotated == pytest.approx(rr.length_original, rel=1e-12)


def test_random_rotation_preserves_length():
    cfg = config(kind="rotation_invariance", gamma={"family": "circle", "radius": "0.5"},
                 d=5, trials=60)
    rr = rotation_invariance_test(cfg)
    assert rr.length_rotated == pytest.approx(rr.length_original, rel=1e-7)
    assert np.allclose(rr.rotation @ rr.rotation.T, np.eye(3), atol=1e-12)


def test_surface_crit_campaign():
    cfg = config(kind="surface_crit", n=3, d=4, trials=6,
                 gamma={"family": "sphere", "radius": "1"}, f=(0.0, 0.0, 1.0))
    res = run_campaign(cfg)
    for r in res.rows:
        assert r["morse_ok"]
        assert r["count"] >= 2 * r["components"]


def test_config_file_outputs(tmp_path):
    cfg = tmp_path / "tail.cfg"
    cfg.write_text("kind=tail\nn=2\nd=8\ntrials=30\nseed=5\n"
                   "gamma.family=projective_line\nt_list=0.5,1\n")
    report = run_config_file(cfg, tmp_path / "out")
    assert "markov" in report
    trials = read_csv(tmp_path / "out" / "trials.csv")
    assert len(trials) == 30
    assert set(trials[0]) == {"trial_index", "mode", "count", "min_margin", "resolution_stable"}
    summary = read_csv(tmp_path / "out" / "summary.csv")
    assert summary[0]["kind"] == "tail"
    survival = read_csv(tmp_path / "out" / "survival.csv")
    assert [float(r["t"]) for r in survival] == [0.5, 1.0]
    # on a projective line the count has the parity of d
    assert all(int(r["count"]) % 2 == 0 for r in trials)
