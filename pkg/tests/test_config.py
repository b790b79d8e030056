import pytest
from hypothesis import given, settings, strategies as st

from logcleaner.config import ConfigError, RunConfig


def test_defaults_match_documented_values():
    c = RunConfig()
    assert (c.cutoff, c.theta_anti, c.theta_dup, c.xi, c.alphas) == (0.1, 0.0, 2, 0.05, (0.02,))
    assert (c.miner_depth, c.miner_sim, c.epsilon) == (4, 0.5, 0.005)


@settings(max_examples=100, deadline=None)
@given(cutoff=st.floats(0, 1), theta_anti=st.floats(0, 1), theta_dup=st.integers(2, 10),
       window=st.one_of(st.just("session"), st.integers(1, 10_000).map(str)),
       seed=st.integers(0, 2**31), mm=st.booleans(),
       alpha=st.lists(st.floats(0, 0.99), min_size=1, max_size=4))
def test_round_trip(cutoff, theta_anti, theta_dup, window, seed, mm, alpha):
    c = RunConfig(cutoff=cutoff, theta_anti=theta_anti, theta_dup=theta_dup, window=window, seed=seed,
                  miller_madow=mm, alpha=",".join(repr(a) for a in alpha))
    assert RunConfig.from_text(c.to_text()) == c


@pytest.mark.parametrize("changes", [{"window": "0"}, {"window": "abc"}, {"cutoff": "1.5"},
                                     {"theta_dup": "1"}, {"alpha": "1.0"}, {"dataset": "nope"},
                                     {"xi": "0"}, {"seed": "x"}, {"bogus": "1"}])
def test_rejects_bad_values(changes):
    with pytest.raises(ConfigError):
        RunConfig().updated(changes)


def test_precedence_file_env_flags(tmp_path):
    p = tmp_path / "run.conf"
    p.write_text("# comment\ncutoff = 0.2\nseed = 3\ntheta-dup = 4\n")
    c = RunConfig.load(p)
    assert (c.cutoff, c.seed, c.theta_dup) == (0.2, 3, 4)
    c = c.with_env({"LOGCLEANER_SEED": "9", "OTHER": "1"})
    assert c.seed == 9 and c.cutoff == 0.2
    c = c.updated({"cutoff": 0.3, "seed": None})
    assert c.cutoff == 0.3 and c.seed == 9


def test_thunderbird_prefix_default():
    assert RunConfig(dataset="thunderbird").line_limit == 100_000
    assert RunConfig(dataset="hdfs").line_limit is None
    assert RunConfig(dataset="thunderbird", limit=50).line_limit == 50
