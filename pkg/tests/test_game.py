import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import preset_game
from oracles import random_simplex_profile, rate_loop
from icnash import (ChannelSpec, GameSpec, Info, PowerPolicy, StrategyProfile,
                    Visibility, build_gain_distribution, enumerate_states,
                    epsilon_ne_check, expand_policy, expand_profile, is_feasible,
                    rate, rates, sinr, sum_rate)
from icnash.errors import VisibilityMismatch


def uniform(values):
    return build_gain_distribution(values, [1 / len(values)] * len(values))


def single_state(n, direct, cross, budgets):
    spec = ChannelSpec(n, uniform([direct]), uniform([cross]))
    return GameSpec(spec, budgets, Info.FULL)


def test_sinr_examples():
    assert sinr([2.0], np.array([[1.0]]), 0) == 2.0
    g = np.array([[0.5, 0.2], [0.1, 1.0]])
    assert sinr([2.0, 5.0], g, 0) == pytest.approx(0.5)
    assert sinr([0.0, 0.0], g, 0) == 0.0


def test_rate_single_user_waterfilling_point():
    spec = ChannelSpec(1, uniform([0.3, 1]), uniform([1]))
    game = GameSpec(spec, (2.0,), Info.FULL)
    prof = StrategyProfile(Info.FULL, [[2.5 / 3, 9.5 / 3]])
    want = 0.5 * np.log(1.25) + 0.5 * np.log(1 + 9.5 / 3)
    assert rate(0, prof, game) == pytest.approx(want, rel=1e-12)
    assert want == pytest.approx(0.8251, abs=1e-4)
    zero = StrategyProfile(Info.FULL, [[0.0, 0.0]])
    assert rate(0, zero, game) == 0.0


def test_rate_two_user_single_state():
    spec = ChannelSpec(2, uniform([1.0]), uniform([0.5]))
    game = GameSpec(spec, (1.0, 1.0), Info.FULL)
    prof = StrategyProfile(Info.FULL, [[1.0], [1.0]])
    assert rate(0, prof, game) == pytest.approx(np.log(1 + 1 / 1.5))
    assert rate(0, prof, game) == pytest.approx(0.5108, abs=1e-4)
    assert sum_rate(prof, game) == pytest.approx(2 * np.log(1 + 1 / 1.5))
    assert sum_rate(StrategyProfile(Info.FULL, [[0.0], [0.0]]), game) == 0.0


def test_expand_policy_counts():
    spec = ChannelSpec(2, uniform([0.3, 1]), uniform([0.2, 0.1]))
    full = enumerate_states(spec, Visibility.full())
    assert len(full) == 16
    pol = PowerPolicy(0, Visibility.direct(0), np.array([1.0, 2.0]))
    e = expand_policy(pol, full)
    assert np.sum(e == 1.0) == 8 and np.sum(e == 2.0) == 8
    np.testing.assert_array_equal(e[full.states[:, 0, 0] == 1.0], 2.0)
    fp = PowerPolicy(0, Visibility.full(), np.arange(16.0))
    np.testing.assert_array_equal(expand_policy(fp, full), np.arange(16.0))
    with pytest.raises(VisibilityMismatch):
        expand_policy(PowerPolicy(0, Visibility.direct(1), np.ones(2)), full)


def test_expand_policy_incident_preimages():
    game = preset_game("example1", 10.0, "I")
    pol = PowerPolicy(0, Visibility.incident(0), np.arange(8.0))
    e = expand_policy(pol, game.full_space)
    assert e.shape == (512,)
    np.testing.assert_array_equal(np.bincount(e.astype(int)), 64)


@pytest.mark.parametrize("info", ["A", "I", "D"])
def test_rates_match_loop_oracle(info, rng):
    game = preset_game("example2", 5.0, info)
    P = random_simplex_profile(rng, game.visible_weights, game.budgets)
    prof = StrategyProfile(game.info, P)
    exp = expand_profile(prof, game)
    got = rates(prof, game)
    for i in range(3):
        assert got[i] == pytest.approx(rate_loop(i, exp, game.gains,
                                                 game.full_space.probs), rel=1e-12)


@pytest.mark.parametrize("info", ["I", "D"])
def test_expand_preserves_expected_power(info, rng):
    game = preset_game("example3", 10.0, info)
    P = rng.uniform(size=(2, game.n_visible))
    exp = expand_profile(StrategyProfile(game.info, P), game)
    np.testing.assert_allclose(exp @ game.full_space.probs,
                               np.einsum("iv,iv->i", game.visible_weights, P),
                               atol=1e-12)


@given(st.integers(0, 2), st.integers(0, 7), st.floats(0.01, 5.0),
       st.integers(0, 2**32 - 1))
def test_rate_nondecreasing_in_own_power(i, v, bump, seed):
    game = preset_game("example1", 10.0, "I")
    rng = np.random.default_rng(seed)
    P = random_simplex_profile(rng, game.visible_weights, game.budgets)
    before = rates(StrategyProfile(game.info, P), game)
    P2 = P.copy()
    P2[i, v] += bump
    after = rates(StrategyProfile(game.info, P2), game)
    assert after[i] >= before[i]
    assert np.all(np.isfinite(before)) and np.all(before >= 0)


def test_feasibility():
    game = preset_game("example1", 0.0, "D")
    assert is_feasible(StrategyProfile(game.info, np.ones((3, 2))), game)
    assert not is_feasible(StrategyProfile(game.info, np.full((3, 2), 1.1)), game)
    assert not is_feasible(StrategyProfile(game.info, [[2, -0.1]] * 3), game)


def test_ne_check_single_state_point():
    game = single_state(2, 1.0, 0.5, (1.0, 2.0))
    rep = epsilon_ne_check(StrategyProfile(Info.FULL, [[1.0], [2.0]]), game, 1e-9)
    assert rep.is_ne and rep.max_gain <= 1e-12


def test_ne_check_half_budget_fails():
    spec = ChannelSpec(1, uniform([0.3, 1]), uniform([1]))
    game = GameSpec(spec, (2.0,), Info.FULL)
    rep = epsilon_ne_check(StrategyProfile(Info.FULL, [[0.5, 0.5]]), game, 1e-3)
    assert not rep.is_ne and rep.max_gain > 0.1


def test_ne_check_branches_agree(rng):
    game = preset_game("example1", 10.0, "A")
    from icnash import SolverConfig, fixed_point_solve
    res = fixed_point_solve(game, SolverConfig(max_phase1=500, epsilon=1e-8))
    with_br = epsilon_ne_check(res.profile, game, 1e-6)
    rand_only = epsilon_ne_check(res.profile, game, 1e-6, use_best_response=False)
    assert with_br.is_ne and rand_only.is_ne
    P = random_simplex_profile(rng, game.visible_weights, game.budgets)
    off = StrategyProfile(game.info, P)
    assert not epsilon_ne_check(off, game, 1e-6).is_ne
    assert not epsilon_ne_check(off, game, 1e-6, use_best_response=False).is_ne
