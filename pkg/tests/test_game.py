import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from irasolve.domains import build_domain, build_test_game
from irasolve.game import CHANCE, P1, P2, GameBuilder, GameError, check_perfect_recall, Game
from irasolve.strategy import random_strategy
from oracle import leaf_probabilities, walk_value


def three_way_deal():
    b = GameBuilder("deal")
    c = b.add_chance(None, [1 / 3] * 3)
    leaves = [b.add_terminal(c, float(i)) for i in range(3)]
    return b.build(), leaves


def two_deep():
    """P1 moves twice in a row, 2 actions each."""
    b = GameBuilder("two_deep")
    r = b.add_decision(None, P1, "r", ["a", "b"])
    for x in "ab":
        n = b.add_decision(r, P1, x, ["c", "d"])
        b.add_terminal(n, 1.0)
        b.add_terminal(n, -1.0)
    return b.build()


def test_chance_reach_root_and_deal():
    g, leaves = three_way_deal()
    assert g.chance_reach(0) == 1.0
    for z in leaves:
        assert g.chance_reach(z) == pytest.approx(1 / 3)


def test_chance_reach_two_draws_without_replacement():
    # deck {A, A, B}: first draw, then second draw from what is left
    b = GameBuilder("deck")
    c1 = b.add_chance(None, [2 / 3, 1 / 3])
    c2 = b.add_chance(c1, [1 / 2, 1 / 2])  # after A: {A, B}
    aa, ab = b.add_terminal(c2, 0.0), b.add_terminal(c2, 0.0)
    c3 = b.add_chance(c1, [1.0])  # after B: {A, A}
    ba = b.add_terminal(c3, 0.0)
    g = b.build()
    assert g.chance_reach(aa) == pytest.approx(1 / 3)
    assert g.chance_reach(ab) == pytest.approx(1 / 3)
    assert g.chance_reach(ba) == pytest.approx(1 / 3)


def test_player_reach_examples():
    g = two_deep()
    u = g.uniform_strategy()
    assert g.player_reach(u, P1, 0) == 1.0
    deep = g.terminals
    assert all(g.player_reach(u, P1, int(z)) == pytest.approx(0.25) for z in deep)
    pure = g.pure_strategy(np.zeros(g.n_infosets, dtype=np.int64))
    z = int(deep[0])
    assert g.player_reach(pure, P1, z) == 1.0


def test_player_reach_missing_entry_names_infoset():
    g = build_test_game("matching_pennies")
    bad = g.uniform_strategy()
    bad[g.slots(0)] = np.nan
    with pytest.raises(GameError, match="information set"):
        g.player_reach(bad, P1)


def test_expected_utility_matching_pennies():
    g = build_test_game("matching_pennies")
    assert g.expected_utility(g.uniform_strategy()) == 0.0
    first = g.pure_strategy(np.zeros(g.n_infosets, dtype=np.int64))
    assert g.expected_utility(first) == 1.0


def test_expected_utility_gs3_uniform_matches_walk():
    g = build_domain("GS3")
    u = g.uniform_strategy()
    assert g.expected_utility(u) == pytest.approx(walk_value(g, u), abs=1e-12)


def test_incomplete_strategy_rejected():
    g = build_test_game("matching_pennies")
    with pytest.raises(GameError):
        g.expected_utility(np.array([0.5, 0.5, 0.5]))


def test_builder_validation():
    b = GameBuilder()
    with pytest.raises(GameError):
        b.add_chance(None, [0.5, 0.6])
    b = GameBuilder()
    r = b.add_decision(None, P1, "x", ["a", "b"])
    b.add_terminal(r, 0.0)
    with pytest.raises(GameError):
        b.build()
    b = GameBuilder()
    r = b.add_chance(None, [0.5, 0.5])
    b.add_decision(r, P1, "k", ["a", "b"])
    with pytest.raises(GameError, match="inconsistent"):
        b.add_decision(r, P1, "k", ["a"])


def test_perfect_recall_fig2():
    g = build_test_game("fig2_game")
    ok, bad = check_perfect_recall(g)
    assert ok and bad == []
    from irasolve.abstraction import init_abstraction
    m = init_abstraction(g)
    ok, bad = check_perfect_recall(g, m.phi)
    assert not ok
    # the violators are the two merged P1 sets
    assert sorted(bad) == sorted(m.abstracted_ids(P1))
    assert len(bad) == 2


def test_perfect_recall_single_decision():
    b = GameBuilder()
    r = b.add_decision(None, P1, "x", ["a", "b"])
    b.add_terminal(r, 1.0)
    b.add_terminal(r, 0.0)
    assert check_perfect_recall(b.build()) == (True, [])


@pytest.mark.parametrize("name", ["P111", "GS3", "GS4", "GP3", "fig2_game", "oscillator", "example2_game"])
def test_domains_perfect_recall(name):
    assert check_perfect_recall(build_domain(name))[0]


def test_metrics_fig2():
    g = build_test_game("fig2_game")
    m = g.metrics
    assert m.u_max == 3.0 and m.delta == 6.0 and m.a_max == 2
    assert np.all(m.delta_I <= m.delta + 1e-12)


def test_json_round_trip():
    g = build_domain("GS3")
    h = Game.from_json(g.to_json())
    for attr in ("parent", "kind", "node_infoset", "chance_prob", "utility", "iset_player", "iset_n_actions"):
        assert np.array_equal(getattr(g, attr), getattr(h, attr))
    assert h.expected_utility(h.uniform_strategy()) == pytest.approx(g.expected_utility(g.uniform_strategy()))


SMALL = ["matching_pennies", "fig2_game", "example2_game", "oscillator", "GS2", "GS3", "GP2", "P111"]


@settings(max_examples=30, deadline=None)
@given(name=st.sampled_from(SMALL), seed=st.integers(0, 2**31), sparsity=st.floats(0, 0.8))
def test_leaf_reach_is_distribution(name, seed, sparsity):
    g = build_domain(name)
    probs = random_strategy(g, np.random.default_rng(seed), sparsity)
    r = g.reach(probs)
    assert r[g.terminals].sum() == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=25, deadline=None)
@given(name=st.sampled_from(["fig2_game", "example2_game", "GS2", "GS3", "GP2"]), seed=st.integers(0, 2**31))
def test_reach_and_value_match_recursive_walk(name, seed):
    g = build_domain(name)
    probs = random_strategy(g, np.random.default_rng(seed), 0.3)
    leaf = leaf_probabilities(g, probs)
    r = g.reach(probs)
    for z, p in leaf.items():
        assert r[z] == pytest.approx(p, abs=1e-12)
    assert g.expected_utility(probs) == pytest.approx(walk_value(g, probs), abs=1e-9)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31), lam=st.floats(0, 1))
def test_expected_utility_bilinear_in_one_set(seed, lam):
    g = build_domain("GS3")
    rng = np.random.default_rng(seed)
    base = random_strategy(g, rng)
    k = int(rng.integers(g.n_infosets))
    x, y = base.copy(), base.copy()
    x[g.slots(k)] = rng.dirichlet(np.ones(g.iset_n_actions[k]))
    y[g.slots(k)] = rng.dirichlet(np.ones(g.iset_n_actions[k]))
    mix = base.copy()
    mix[g.slots(k)] = lam * x[g.slots(k)] + (1 - lam) * y[g.slots(k)]
    lhs = g.expected_utility(mix)
    rhs = lam * g.expected_utility(x) + (1 - lam) * g.expected_utility(y)
    assert lhs == pytest.approx(rhs, abs=1e-9)


def test_chance_nodes_own_no_infosets():
    g = build_domain("P111")
    assert np.all(g.node_infoset[g.kind == CHANCE] == -1)
    assert set(np.unique(g.iset_player)) == {P1, P2}
