import numpy as np
import pytest

from irasolve.domains import (GoofspielConfig, GraphPursuitConfig, PokerConfig, build_domain,
                              build_goofspiel, build_graph_pursuit, build_poker, build_test_game,
                              read_graph_file)
from irasolve.game import P1, P2, GameError, check_perfect_recall

# infoset counts of the generated domains, frozen on first build
GOLDEN_INFOSETS = {"P111": 504, "GS3": 72, "GS4": 738, "GP3": 157, "GP4": 1352}


@pytest.mark.parametrize("name,count", sorted(GOLDEN_INFOSETS.items()))
def test_golden_infoset_counts(name, count):
    assert build_domain(name).n_infosets == count


@pytest.mark.slow
@pytest.mark.parametrize("name,count", [("P222", 14040), ("GS5", 9948), ("GP5", 11776)])
def test_medium_domains_are_order_1e4(name, count):
    g = build_domain(name)
    assert g.n_infosets == count
    assert 5_000 <= g.n_infosets <= 50_000


def test_poker_structure():
    g = build_poker(PokerConfig(1, 1, 1))
    # 12 cards, 4 ranks: first deal uniform over ranks, second conditional
    root_children = g.node_children(0)
    assert len(root_children) == 4
    assert np.allclose(g.chance_prob[root_children], 0.25)
    labels = {tuple(l) for l in g.iset_labels}
    assert ("check", "bet1") in labels and ("fold", "call", "raise1") in labels and ("fold", "call") in labels
    assert check_perfect_recall(g)[0]


def test_poker_bet_values_default_and_validation():
    assert PokerConfig(2, 3, 1).bet_values == (1, 2)
    assert PokerConfig(2, 3, 1).raise_values == (1, 2, 3)
    with pytest.raises(GameError):
        PokerConfig(0, 1, 1)
    with pytest.raises(GameError):
        PokerConfig(1, 1, 1, bet_values=(1, 2))


def test_poker_largest_pot():
    # ante 1 plus a bet of 1 and a raise of 1 in each of the two rounds
    g = build_domain("P111")
    assert abs(g.utility).max() == 5.0


def test_goofspiel_gs2_hand_values():
    g = build_goofspiel(GoofspielConfig(2))
    # both bid their high card first: the round ties, then low cards tie: 0
    high_first = np.zeros(g.n_infosets, dtype=np.int64)
    for k in range(g.n_infosets):
        if g.iset_n_actions[k] == 2:
            high_first[k] = 1
    assert g.expected_utility(g.pure_strategy(high_first)) == 0.0
    # P1 bids high (2) on the first prize (1), P2 bids low: P1 wins 1, then loses 2 -> -1
    ch = high_first.copy()
    for k in g.infosets_of(P2):
        if g.iset_n_actions[k] == 2:
            ch[k] = 0
    assert g.expected_utility(g.pure_strategy(ch)) == -1.0


def test_goofspiel_order_validation():
    with pytest.raises(GameError):
        GoofspielConfig(3, (1, 1, 2))
    g = build_goofspiel(GoofspielConfig(3, (3, 1, 2)))
    assert g.n_infosets == 72


def test_goofspiel_p2_does_not_see_p1_bid():
    g = build_domain("GS3")
    root_set = g.node_infoset[g.node_children(0)]
    assert len(set(root_set.tolist())) == 1  # P2's first decision is one set


def test_graph_pursuit_unguarded_goal():
    cfg = GraphPursuitConfig(edges=((0, 1), (1, 2), (2, 3), (3, 4), (4, 5)), start_attacker=0, goal=1,
                             defender_starts=(4, 5), move_limit=1)
    g = build_graph_pursuit(cfg)
    assert g.expected_utility(g.uniform_strategy()) == 2.0


def test_graph_pursuit_all_moves_covered():
    cfg = GraphPursuitConfig(edges=((0, 1), (1, 2), (1, 3)), start_attacker=0, goal=3,
                             defender_starts=(2, 3), move_limit=1)
    g = build_graph_pursuit(cfg)
    assert g.expected_utility(g.uniform_strategy()) == -1.0


def test_graph_pursuit_limit_gives_zero():
    cfg = GraphPursuitConfig(edges=((0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7)), start_attacker=1,
                             goal=7, defender_starts=(5, 6), move_limit=1)
    g = build_graph_pursuit(cfg)
    # attacker moves to 0 or 2, defenders stay far away: nothing happens
    assert g.expected_utility(g.uniform_strategy()) == 0.0


def test_graph_pursuit_edge_swap_is_capture():
    cfg = GraphPursuitConfig(edges=((0, 1), (1, 2)), start_attacker=0, goal=2,
                             defender_starts=(1, 2), move_limit=1)
    g = build_graph_pursuit(cfg)
    # attacker 0->1 while the defender on 1 must move to 0 or 2; moving to 0 swaps
    z = g.terminals
    assert -1.0 in set(g.utility[z].tolist())


def test_graph_validation(tmp_path):
    with pytest.raises(GameError, match="connected"):
        GraphPursuitConfig(edges=((0, 1), (2, 3)), start_attacker=0, goal=1, defender_starts=(2, 3))
    with pytest.raises(GameError):
        GraphPursuitConfig(edges=((0, 0),))
    f = tmp_path / "g.txt"
    f.write_text("# tiny\n0 1\n1,2\n\n")
    assert read_graph_file(f) == ((0, 1), (1, 2))


def test_graph_file_domain(tmp_path):
    f = tmp_path / "g.txt"
    f.write_text("\n".join(f"{u} {v}" for u, v in GraphPursuitConfig().edges))
    assert build_domain("GP3", f).n_infosets == 157


def test_generators_deterministic():
    for name in ("P111", "GS3", "GP3"):
        a, b = build_domain(name), build_domain(name)
        assert np.array_equal(a.parent, b.parent) and np.array_equal(a.utility, b.utility)
        assert a.iset_keys == b.iset_keys


def test_domain_string_errors():
    for bad in ("P11", "GS", "XYZ", "GP0"):
        with pytest.raises(GameError):
            build_domain(bad)
    with pytest.raises(GameError):
        build_test_game("nope")


def test_test_games_shapes():
    mp = build_test_game("matching_pennies")
    assert mp.n_infosets == 2
    f2 = build_test_game("fig2_game")
    p1 = f2.infosets_of(P1)
    assert len(p1) == 5 and len(f2.infosets_of(P2)) == 1
    assert sorted(f2.iset_seq_len[p1].tolist()) == [0, 1, 1, 2, 2]
    osc = build_test_game("oscillator")
    assert len(osc.infosets_of(P1)) == 2 and len(osc.infosets_of(P2)) == 1


def test_zero_sum_and_chance_normalized():
    for name in ("P111", "GS3", "GP3", "oscillator"):
        g = build_domain(name)
        for h in np.nonzero(g.kind == 2)[0]:
            assert g.chance_prob[g.node_children(h)].sum() == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(g.utility_for(P2), -g.utility_for(P1))
