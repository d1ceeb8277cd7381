import math

import pytest

import coexist


def test_config_defaults_and_round_trip():
    cfg = coexist.Config("desk")
    assert cfg.duration_s == 20.0
    again = coexist.Config.parse(cfg.to_text())
    assert again == cfg
    assert again.hash_hex() == cfg.hash_hex()
    assert "fl.eta" in coexist.config_keys()


def test_bad_eta_rejected():
    with pytest.raises(coexist.ConfigError):
        coexist.Config.parse("fl.eta = 1.3\n")


def test_required_uploads():
    assert coexist.required_uploads(0.4, 60) == 24
    assert coexist.required_uploads(0.35, 10) == 4


def test_iteration_delay():
    assert coexist.iteration_delay([5.0, 1.0, 3.0], 2, 1.0) == pytest.approx(4.0)
    with pytest.raises(ValueError):
        coexist.iteration_delay([1.0], 2)


def test_availability_and_survival():
    ms = 1_000_000
    # X down on [15, 20) ms over a 100 ms horizon
    x = [(15 * ms, 0), (20 * ms, 1)]
    assert coexist.availability(x, 100 * ms) == pytest.approx(0.95)
    assert coexist.survival(x, 100 * ms, 5 * ms) == []
    assert coexist.availability(x, 100 * ms, 4 * ms) == pytest.approx(0.99)


def test_percentile_nearest_rank():
    s = [float(v) for v in range(1, 101)]
    assert coexist.percentile(s, 0.01) == 1.0
    assert coexist.percentile(s, 0.5) == 50.0


def test_short_run():
    cfg = coexist.Config.parse("sim.duration_s = 1\nfl.N = 4\nfl.params = 20000\n", "desk")
    r = coexist.run_scenario(cfg, 3)
    assert r["n_devices"] == 4
    assert len(r["urllc"]) == 10
    assert r["diag"]["priority_violations"] == 0
    assert all(0.0 <= d["avail_combined"] <= 1.0 for d in r["urllc"])
    assert r["rounds"]
    assert all(math.isfinite(k["d_k_ai_s"]) for k in r["rounds"])
    assert coexist.run_scenario(cfg, 3) == r
