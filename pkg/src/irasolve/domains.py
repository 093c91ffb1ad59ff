"""Benchmark domain generators and small hand-built test games."""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

from .game import P1, P2, Game, GameBuilder, GameError

RANKS = 4
COPIES = 3


# ---------------------------------------------------------------- poker
@dataclass(frozen=True)
class PokerConfig:
    bets: int = 1
    raises: int = 1
    max_raises: int = 1
    bet_values: tuple[int, ...] | None = None
    raise_values: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.bets < 1 or self.raises < 0 or self.max_raises < 0:
            raise GameError(f"invalid poker config {self}")
        if self.bet_values is None:
            object.__setattr__(self, "bet_values", tuple(range(1, self.bets + 1)))
        if self.raise_values is None:
            object.__setattr__(self, "raise_values", tuple(range(1, self.raises + 1)))
        if len(self.bet_values) != self.bets or len(self.raise_values) != self.raises:
            raise GameError("bet/raise value lists must match the configured counts")
        if min(self.bet_values + self.raise_values, default=1) <= 0:
            raise GameError("bet and raise values must be positive")


def _showdown(c1: int, c2: int, pub: int) -> int:
    pair1, pair2 = c1 == pub, c2 == pub
    if pair1 != pair2:
        return 1 if pair1 else -1
    if c1 == c2:
        return 0
    return 1 if c1 > c2 else -1


def build_poker(config: PokerConfig = PokerConfig()) -> Game:
    """Two-round poker with a 4-rank, 3-copy deck, ante 1 and one shared card."""
    cfg = config
    b = GameBuilder(f"P{cfg.bets}{cfg.raises}{cfg.max_raises}")

    def betting(parent, cards, pub, hist, rnd, pot, to_act, facing, nraises, checked):
        player = to_act
        key = (cards[player], pub, hist)
        if facing:
            labels = ["fold", "call"]
            if nraises < cfg.max_raises:
                labels += [f"raise{v}" for v in cfg.raise_values]
        else:
            labels = ["check"] + [f"bet{v}" for v in cfg.bet_values]
        node = b.add_decision(parent, player, key, labels)
        other = 1 - player
        for lab in labels:
            h = hist + ((rnd, player, lab),)
            if lab == "fold":
                b.add_terminal(node, -pot[0] if player == P1 else pot[1])
            elif lab == "call" or (lab == "check" and checked):
                newpot = (pot[other], pot[other]) if lab == "call" else pot
                end_round(node, cards, pub, h, rnd, newpot)
            elif lab == "check":
                betting(node, cards, pub, h, rnd, pot, other, False, 0, True)
            else:
                amount = int(lab[5:]) if lab.startswith("raise") else int(lab[3:])
                p = list(pot)
                p[player] = pot[other] + amount
                betting(node, cards, pub, h, rnd, tuple(p), other, True,
                        nraises + (1 if lab.startswith("raise") else 0), False)

    def end_round(parent, cards, pub, hist, rnd, pot):
        if rnd == 1:
            used = [cards.count(r) for r in range(RANKS)]
            probs = [(COPIES - used[r]) / (RANKS * COPIES - 2) for r in range(RANKS)]
            ranks = [r for r in range(RANKS) if probs[r] > 0]
            node = b.add_chance(parent, [probs[r] for r in ranks])
            for r in ranks:
                betting(node, cards, r, hist + (("deal", r),), 2, pot, P1, False, 0, False)
        else:
            res = _showdown(cards[0], cards[1], pub)
            b.add_terminal(parent, res * pot[1] if res > 0 else res * pot[0])

    root = b.add_chance(None, [1.0 / RANKS] * RANKS)
    for r1 in range(RANKS):
        probs = [(COPIES - (r == r1)) / (RANKS * COPIES - 1) for r in range(RANKS)]
        n2 = b.add_chance(root, probs)
        for r2 in range(RANKS):
            betting(n2, (r1, r2), None, (), 1, (1, 1), P1, False, 0, False)
    return b.build()


# ------------------------------------------------------------- goofspiel
@dataclass(frozen=True)
class GoofspielConfig:
    n: int = 3
    order: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.n < 2:
            raise GameError("goofspiel needs at least two cards")
        if self.order is None:
            object.__setattr__(self, "order", tuple(range(1, self.n + 1)))
        if sorted(self.order) != list(range(1, self.n + 1)):
            raise GameError("middle deck order must be a permutation of 1..n")


def build_goofspiel(config: GoofspielConfig = GoofspielConfig()) -> Game:
    """Goofspiel where each round's bids stay hidden; only win/loss/tie is announced.

    P1 bids first and P2's information hides P1's bid.  The forced final
    round is played as a one-action decision for both players.
    """
    n = config.n
    b = GameBuilder(f"GS{n}")
    full = tuple(range(1, n + 1))

    def p1_turn(parent, h1, h2, own1, own2, outcomes, score):
        rnd = len(outcomes)
        if rnd == n:
            b.add_terminal(parent, score)
            return
        node = b.add_decision(parent, P1, (own1, outcomes), [str(c) for c in h1])
        for c1 in h1:
            n2 = b.add_decision(node, P2, (own2, outcomes), [str(c) for c in h2])
            for c2 in h2:
                prize = config.order[rnd]
                res = (c1 > c2) - (c1 < c2)
                p1_turn(n2, tuple(c for c in h1 if c != c1), tuple(c for c in h2 if c != c2),
                        own1 + (c1,), own2 + (c2,), outcomes + (res,), score + res * prize)

    p1_turn(None, full, full, (), (), (), 0)
    return b.build()


# ---------------------------------------------------------- graph pursuit
DEFAULT_GRAPH_EDGES = (
    (0, 1), (0, 2), (1, 3), (2, 4), (3, 4), (3, 5), (4, 6), (5, 7), (6, 8), (7, 9), (8, 9),
)


@dataclass(frozen=True)
class GraphPursuitConfig:
    edges: tuple[tuple[int, int], ...] = DEFAULT_GRAPH_EDGES
    start_attacker: int = 0
    goal: int = 9
    defender_starts: tuple[int, int] = (5, 6)
    move_limit: int = 3
    radius: int = 2
    adjacency: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        adj: dict[int, list[int]] = {}
        for u, v in self.edges:
            if u == v:
                raise GameError("self-loops are not allowed")
            adj.setdefault(u, []).append(v)
            adj.setdefault(v, []).append(u)
        nodes = sorted(adj)
        for k in (self.start_attacker, self.goal, *self.defender_starts):
            if k not in adj:
                raise GameError(f"node {k} is not in the graph")
        seen, todo = {nodes[0]}, [nodes[0]]
        while todo:
            for w in adj[todo.pop()]:
                if w not in seen:
                    seen.add(w)
                    todo.append(w)
        if len(seen) != len(nodes):
            raise GameError("graph must be connected")
        if self.move_limit < 1:
            raise GameError("move limit must be positive")
        object.__setattr__(self, "adjacency", {k: sorted(v) for k, v in adj.items()})


def read_graph_file(path: str | Path) -> tuple[tuple[int, int], ...]:
    """Edges from a text file with one ``u v`` pair per line; ``#`` starts a comment."""
    edges = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            u, v = line.replace(",", " ").split()
            edges.append((int(u), int(v)))
    return tuple(edges)


def _distances(adj):
    dist = {}
    for s in adj:
        d = {s: 0}
        q = deque([s])
        while q:
            u = q.popleft()
            for w in adj[u]:
                if w not in d:
                    d[w] = d[u] + 1
                    q.append(w)
        dist[s] = d
    return dist


def build_graph_pursuit(config: GraphPursuitConfig = GraphPursuitConfig()) -> Game:
    """Attacker (P1) races to the goal while two defender units (P2) try to intercept.

    Both sides move simultaneously each round (attacker first, hidden from
    the defender); every unit must move along an edge.  Each player sees
    which nodes within the observation radius of its own units hold enemy
    units.
    """
    cfg = config
    adj = cfg.adjacency
    dist = _distances(adj)
    near = {v: frozenset(w for w, d in dist[v].items() if d <= cfg.radius) for v in adj}
    b = GameBuilder(f"GP{cfg.move_limit}")

    def observe(a, d1, d2):
        seen_a = tuple(sorted(x for x in (d1, d2) if x in near[a]))
        seen_d = a if a in near[d1] or a in near[d2] else None
        return seen_a, seen_d

    def play(parent, a, d, hist_a, hist_d, moves):
        if moves == cfg.move_limit:
            b.add_terminal(parent, 0.0)
            return
        a_moves = adj[a]
        na = b.add_decision(parent, P1, hist_a, [f"to{w}" for w in a_moves])
        d_moves = [(x, y) for x in adj[d[0]] for y in adj[d[1]]]
        for a2 in a_moves:
            nd = b.add_decision(na, P2, hist_d, [f"to{x},{y}" for x, y in d_moves])
            for d2 in d_moves:
                caught = any(a2 == d2[k] or (a2 == d[k] and d2[k] == a) for k in (0, 1))
                if caught:
                    b.add_terminal(nd, -1.0)
                elif a2 == cfg.goal:
                    b.add_terminal(nd, 2.0)
                else:
                    oa, od = observe(a2, *d2)
                    play(nd, a2, d2, hist_a + ((a2, oa),), hist_d + ((d2, od),), moves + 1)

    a0, d0 = cfg.start_attacker, tuple(cfg.defender_starts)
    oa, od = observe(a0, *d0)
    play(None, a0, d0, ((a0, oa),), ((d0, od),), 0)
    return b.build()


# ------------------------------------------------------------ test games
OSCILLATOR_REACH = 8e-4


def _matching_pennies() -> Game:
    b = GameBuilder("matching_pennies")
    root = b.add_decision(None, P1, "p1", ["heads", "tails"])
    for i in range(2):
        n = b.add_decision(root, P2, "p2", ["heads", "tails"])
        for j in range(2):
            b.add_terminal(n, 1.0 if i == j else -1.0)
    return b.build()


def _fig2_game() -> Game:
    # P1 acts, then faces one of two follow-up decisions; one branch of each
    # leads to a third own decision, the other to a hidden P2 move.
    b = GameBuilder("fig2_game")
    root = b.add_decision(None, P1, "root", ["a", "b"])
    deep_utils = {"I3": (2.0, -1.0), "I4": (-2.0, 3.0)}
    p2_utils = {"I1": (1.0, -3.0), "I2": (-1.0, 2.0)}
    for first, mid, deep, labels, deep_labels in (
        ("a", "I1", "I3", ["c", "d"], ["g", "h"]),
        ("b", "I2", "I4", ["e", "f"], ["i", "j"]),
    ):
        m = b.add_decision(root, P1, mid, labels)
        n3 = b.add_decision(m, P1, deep, deep_labels)
        for u in deep_utils[deep]:
            b.add_terminal(n3, u)
        n2 = b.add_decision(m, P2, "J", ["k", "l"])
        for u in p2_utils[mid]:
            b.add_terminal(n2, u)
    return b.build()


def _example2_game() -> Game:
    # P1 picks a/b, P2 picks e/f without seeing it, then P1 acts again
    # without seeing P2's choice.
    util = {
        ("a", "e"): (1.5, 2.75), ("a", "f"): (0.0, -1.0),
        ("b", "e"): (3.0, 1.5), ("b", "f"): (-2.0, 0.0),
    }
    b = GameBuilder("example2_game")
    root = b.add_decision(None, P1, "root", ["a", "b"])
    for first, labels in (("a", ["t", "u"]), ("b", ["v", "w"])):
        p2 = b.add_decision(root, P2, "J", ["e", "f"])
        for second in ("e", "f"):
            n = b.add_decision(p2, P1, first, labels)
            for u in util[(first, second)]:
                b.add_terminal(n, u)
    return b.build()


def _oscillator(reach: float = OSCILLATOR_REACH) -> Game:
    """Two P1 sets whose preferred actions keep alternating under regret matching.

    Chance enters the interesting region with small probability ``reach``
    and then picks branch A or B.  P2 moves L/R without seeing the branch,
    then P1 moves c/d knowing the branch but not P2's move.
    """
    table = {
        ("A", "L"): (0.0, 1.0), ("A", "R"): (10.0, 0.0),
        ("B", "L"): (0.0, 10.0), ("B", "R"): (1.0, 0.0),
    }
    b = GameBuilder("oscillator")
    root = b.add_chance(None, [reach, 1.0 - reach])
    split = b.add_chance(root, [0.5, 0.5])
    for branch in ("A", "B"):
        p2 = b.add_decision(split, P2, "J", ["L", "R"])
        for move in ("L", "R"):
            n = b.add_decision(p2, P1, branch, ["c", "d"])
            for u in table[(branch, move)]:
                b.add_terminal(n, u)
    b.add_terminal(root, 0.0)
    return b.build()


TEST_GAMES = {
    "matching_pennies": _matching_pennies,
    "fig2_game": _fig2_game,
    "example2_game": _example2_game,
    "oscillator": _oscillator,
}


def build_test_game(name: str) -> Game:
    try:
        return TEST_GAMES[name]()
    except KeyError:
        raise GameError(f"unknown test game {name!r}; choose from {sorted(TEST_GAMES)}") from None


_DOMAIN_RE = re.compile(r"^(?:P(\d)(\d)(\d)|GS(\d+)|GP(\d+))$")


def build_domain(spec: str, graph_file: str | Path | None = None) -> Game:
    """Build a game from a short name: ``P<b><r><c>``, ``GS<n>``, ``GP<x>`` or a test game name."""
    if spec in TEST_GAMES:
        return build_test_game(spec)
    m = _DOMAIN_RE.match(spec)
    if not m:
        raise GameError(f"unrecognised domain {spec!r}")
    if m.group(1):
        return build_poker(PokerConfig(int(m.group(1)), int(m.group(2)), int(m.group(3))))
    if m.group(4):
        return build_goofspiel(GoofspielConfig(int(m.group(4))))
    kw = {"move_limit": int(m.group(5))}
    if graph_file is not None:
        kw["edges"] = read_graph_file(graph_file)
    return build_graph_pursuit(GraphPursuitConfig(**kw))
