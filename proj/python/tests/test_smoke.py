import math
import pathlib

import pytest

import mdim

LOG2 = math.log(2.0)


def test_full_shift_counts_match_word_counts():
    system = mdim.System("full_shift", window=6)
    K = mdim.enumerate_points(system, -2, 9)
    for n in range(2, 7):
        # closed d_n-balls at 1/4 fix coordinates -1..n
        assert mdim.separated_count(system, K, n, 0.25)["value"] == 2 ** (n + 2)
        assert mdim.spanning_count(system, K, n, 0.25)["bound"] == "exact"


def test_growth_and_mdim():
    system = mdim.System("full_shift", window=9)
    K = mdim.enumerate_points(system, -9, 9)
    rate = mdim.growth_rate(system, K, 0.25, list(range(2, 9)), statistic="increment")
    assert rate["value"] == pytest.approx(LOG2)
    est = mdim.mdim_estimate(system, K, [0.5, 0.25, 0.125], list(range(2, 9)))
    assert abs(est["slope"]) < 1e-9


def test_bernoulli_entropies():
    system = mdim.System("full_shift")
    mu = mdim.Measure("bernoulli", system, weights=[0.5, 0.5])
    assert mu.shannon_entropy() == pytest.approx(LOG2)
    katok = mdim.katok_entropy(mu, system, 0.125, 0.5, list(range(20, 41, 4)))
    assert abs(katok["value"] - LOG2) < 0.02
    bk = mdim.brin_katok_entropy(mu, system, 0.125, 8, list(range(20, 41, 4)))
    assert abs(bk["center"] - LOG2) < 0.02
    K = mdim.enumerate_points(system, 0, 11)
    sh = mdim.shapira_entropy(mu, system, K, 1, 0.5, list(range(2, 13)))
    assert sh["upper"]["value"] == pytest.approx(LOG2)


def test_example_and_window_error():
    rep = mdim.reproduce_example(eps=[0.125, 0.0625, 0.03125], points=4)
    assert all(row["in_band"] for row in rep["rows"])
    with pytest.raises(mdim.WindowError):
        mdim.reproduce_example(window=6)


def test_suite_reports_chains():
    chains = mdim.run_inequality_suite(eps=[0.5], n_ladder=[2, 3, 4])
    ids = {c["chain_id"] for c in chains}
    assert {"spanning_separated", "shapira_katok_upper", "greedy_separated"} <= ids
    assert all(c["violations"] == 0 for c in chains if c["chain_id"] == "spanning_separated")


def test_run_config_is_deterministic(tmp_path: pathlib.Path):
    cfg = tmp_path / "run.ini"
    cfg.write_text(
        "seed = 5\ntasks = growth\n[system]\nkind = full_shift\n[ladder]\neps = 2^-1..2^-2\nn = 2..5\n"
    )
    a = mdim.run_config(str(cfg), out=str(tmp_path / "a"))
    b = mdim.run_config(str(cfg), out=str(tmp_path / "b"), jobs=2)
    assert a["exit_code"] == 0
    for name in a["files"]:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert len(mdim.config_hash(str(cfg))) == 16


def test_config_errors_raise():
    with pytest.raises(mdim.ConfigError):
        mdim.config_hash("/nonexistent/config.ini")
