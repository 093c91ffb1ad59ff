"""Explicit two-player zero-sum extensive-form game trees.

A :class:`Game` stores the whole tree in flat numpy arrays.  Nodes are
numbered in depth-first order by the builder, information sets in order of
first visit, and every action of every information set owns one global
*slot*: the actions of information set ``k`` occupy slots
``offset[k] .. offset[k] + n_actions[k] - 1``.  A behavioral strategy for
either player (or a full profile) is then just a float vector over slots.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

P1, P2, CHANCE, TERMINAL = 0, 1, 2, -1

_KIND_NAMES = {P1: "p1", P2: "p2", CHANCE: "chance", TERMINAL: "terminal"}
_KIND_CODES = {v: k for k, v in _KIND_NAMES.items()}


class GameError(ValueError):
    pass


@dataclass(frozen=True)
class GameMetrics:
    u_max: float
    delta: float
    delta_I: np.ndarray
    a_max: int


class GameBuilder:
    """Incremental constructor; call the ``add_*`` methods in depth-first order.

    Each ``add_*`` call attaches a child to ``parent`` (``None`` for the
    root).  Children of a node must be added in action order, and the
    number of children must match the node's declared action count.
    """

    def __init__(self, name: str = "game"):
        self.name = name
        self._parent: list[int] = []
        self._kind: list[int] = []
        self._iset: list[int] = []
        self._nact: list[int] = []
        self._prob: list[float] = []
        self._util: list[float] = []
        self._chance: dict[int, list[float]] = {}
        self._nchild: list[int] = []
        self._iset_ids: dict[tuple[int, Hashable], int] = {}
        self._iset_player: list[int] = []
        self._iset_nact: list[int] = []
        self._iset_labels: list[list[str]] = []
        self._iset_keys: list[Hashable] = []

    def _attach(self, parent, kind, iset, nact, util) -> int:
        nid = len(self._parent)
        prob = 1.0
        if parent is None:
            if nid != 0:
                raise GameError("only the first node may be the root")
        else:
            k = self._nchild[parent]
            if k >= self._nact[parent]:
                raise GameError(f"node {parent} already has all its children")
            if self._kind[parent] == CHANCE:
                prob = self._chance[parent][k]
            self._nchild[parent] += 1
        self._parent.append(-1 if parent is None else parent)
        self._kind.append(kind)
        self._iset.append(iset)
        self._nact.append(nact)
        self._prob.append(prob)
        self._util.append(util)
        self._nchild.append(0)
        return nid

    def add_decision(self, parent, player: int, key: Hashable, labels: Sequence[str]) -> int:
        if player not in (P1, P2):
            raise GameError(f"bad player {player}")
        n = len(labels)
        if n < 1:
            raise GameError("a decision node needs at least one action")
        ikey = (player, key)
        iset = self._iset_ids.get(ikey)
        if iset is None:
            iset = len(self._iset_player)
            self._iset_ids[ikey] = iset
            self._iset_player.append(player)
            self._iset_nact.append(n)
            self._iset_labels.append([str(x) for x in labels])
            self._iset_keys.append(key)
        elif self._iset_nact[iset] != n:
            raise GameError(f"information set {key!r} has inconsistent action counts")
        return self._attach(parent, player, iset, n, 0.0)

    def add_chance(self, parent, probs: Sequence[float]) -> int:
        p = [float(x) for x in probs]
        if not p or min(p) < 0 or abs(sum(p) - 1.0) > 1e-12:
            raise GameError(f"chance probabilities must be a distribution, got {p}")
        nid = self._attach(parent, CHANCE, -1, len(p), 0.0)
        self._chance[nid] = p
        return nid

    def add_terminal(self, parent, utility_p1: float) -> int:
        return self._attach(parent, TERMINAL, -1, 0, float(utility_p1))

    def build(self) -> "Game":
        for nid, (n, k) in enumerate(zip(self._nact, self._nchild)):
            if n != k:
                raise GameError(f"node {nid} has {k} children, expected {n}")
        return Game(
            name=self.name,
            parent=np.asarray(self._parent, dtype=np.int64),
            kind=np.asarray(self._kind, dtype=np.int64),
            node_infoset=np.asarray(self._iset, dtype=np.int64),
            chance_prob=np.asarray(self._prob, dtype=np.float64),
            utility=np.asarray(self._util, dtype=np.float64),
            iset_player=np.asarray(self._iset_player, dtype=np.int64),
            iset_n_actions=np.asarray(self._iset_nact, dtype=np.int64),
            iset_labels=self._iset_labels,
            iset_keys=self._iset_keys,
        )


@dataclass(eq=False)
class Game:
    """Immutable game tree.  Build it with :class:`GameBuilder` or a domain generator."""

    name: str
    parent: np.ndarray
    kind: np.ndarray
    node_infoset: np.ndarray
    chance_prob: np.ndarray
    utility: np.ndarray
    iset_player: np.ndarray
    iset_n_actions: np.ndarray
    iset_labels: list = field(repr=False)
    iset_keys: list = field(repr=False)

    def __post_init__(self):
        n = len(self.parent)
        self.n_nodes = n
        self.n_infosets = len(self.iset_player)

        self.iset_offset = np.zeros(self.n_infosets, dtype=np.int64)
        if self.n_infosets:
            self.iset_offset[1:] = np.cumsum(self.iset_n_actions)[:-1]
        self.n_slots = int(self.iset_n_actions.sum())
        self.slot_infoset = np.repeat(np.arange(self.n_infosets), self.iset_n_actions)
        self.slot_position = np.arange(self.n_slots) - self.iset_offset[self.slot_infoset]
        self.slot_player = self.iset_player[self.slot_infoset]

        # children are contiguous runs in DFS order only per parent, so build CSR
        self.parent_kind = np.full(n, TERMINAL, dtype=np.int64)
        self.parent_kind[1:] = self.kind[self.parent[1:]]
        order = np.argsort(self.parent[1:], kind="stable") + 1
        counts = np.bincount(self.parent[1:], minlength=n) if n > 1 else np.zeros(n, dtype=np.int64)
        self.child_ptr = np.zeros(n + 1, dtype=np.int64)
        self.child_ptr[1:] = np.cumsum(counts)
        self.children = order
        self.incoming_index = np.zeros(n, dtype=np.int64)
        self.incoming_index[order] = np.arange(len(order)) - self.child_ptr[self.parent[order]]

        # slot of the action taken on the edge into each node (-1 for chance edges / root)
        self.edge_slot = np.full(n, -1, dtype=np.int64)
        dec = np.nonzero((self.parent_kind == P1) | (self.parent_kind == P2))[0]
        self.edge_slot[dec] = self.iset_offset[self.node_infoset[self.parent[dec]]] + self.incoming_index[dec]

        # level lists for vectorised top-down / bottom-up passes
        self.levels = [np.zeros(1, dtype=np.int64)]
        while True:
            lvl = self.levels[-1]
            cnt = self.child_ptr[lvl + 1] - self.child_ptr[lvl]
            if cnt.sum() == 0:
                break
            idx = np.repeat(self.child_ptr[lvl] - np.cumsum(cnt) + cnt, cnt) + np.arange(cnt.sum())
            self.levels.append(self.children[idx])
        self.depth = np.zeros(n, dtype=np.int64)
        pos = np.zeros(n, dtype=np.int64)
        for d, lvl in enumerate(self.levels):
            self.depth[lvl] = d
            pos[lvl] = np.arange(len(lvl))
        self.level_parent = [None] + [pos[self.parent[lvl]] for lvl in self.levels[1:]]

        self.last_slot = np.full((2, n), -1, dtype=np.int64)
        self.seq_len = np.zeros((2, n), dtype=np.int64)
        for lvl in self.levels[1:]:
            par = self.parent[lvl]
            self.last_slot[:, lvl] = self.last_slot[:, par]
            self.seq_len[:, lvl] = self.seq_len[:, par]
            for p in (P1, P2):
                m = self.parent_kind[lvl] == p
                self.last_slot[p, lvl[m]] = self.edge_slot[lvl[m]]
                self.seq_len[p, lvl[m]] += 1

        self.terminals = np.nonzero(self.kind == TERMINAL)[0]
        self.decision_nodes = np.nonzero(self.node_infoset >= 0)[0]
        mem_order = np.argsort(self.node_infoset[self.decision_nodes], kind="stable")
        members_flat = self.decision_nodes[mem_order]
        mcounts = np.bincount(self.node_infoset[self.decision_nodes], minlength=self.n_infosets)
        self.member_ptr = np.zeros(self.n_infosets + 1, dtype=np.int64)
        self.member_ptr[1:] = np.cumsum(mcounts)
        self.members_flat = members_flat
        first = members_flat[self.member_ptr[:-1]] if self.n_infosets else np.zeros(0, dtype=np.int64)
        self.iset_first_member = first
        own = self.iset_player
        self.iset_seq_len = self.seq_len[own, first] if self.n_infosets else np.zeros(0, dtype=np.int64)
        self.iset_parent_slot = self.last_slot[own, first] if self.n_infosets else np.zeros(0, dtype=np.int64)

        self._movers = {k: np.nonzero(self.parent_kind == k)[0] for k in (P1, P2, CHANCE)}
        self._metrics = None
        self._chance_reach = None
        self._validate()

    # ------------------------------------------------------------------ checks
    def _validate(self):
        if self.n_nodes == 0 or self.parent[0] != -1:
            raise GameError("game must have a root at index 0")
        for k in range(self.n_infosets):
            mem = self.members(k)
            if len(mem) == 0:
                raise GameError(f"information set {k} has no members")
        nonterm = self.kind != TERMINAL
        nch = np.diff(self.child_ptr)
        if np.any(nch[nonterm] == 0):
            raise GameError("non-terminal node without children")
        dn = self.decision_nodes
        if np.any(nch[dn] != self.iset_n_actions[self.node_infoset[dn]]):
            raise GameError("member node action count differs from its information set")
        if np.any(self.iset_player[self.node_infoset[dn]] != self.kind[dn]):
            raise GameError("information set owner differs from node owner")
        chance = np.nonzero(self.kind == CHANCE)[0]
        if len(chance):
            sums = np.bincount(self.parent[self.parent_kind == CHANCE],
                               weights=self.chance_prob[self.parent_kind == CHANCE], minlength=self.n_nodes)
            if np.any(np.abs(sums[chance] - 1.0) > 1e-12):
                raise GameError("chance probabilities do not sum to one")

    # ------------------------------------------------------------------ access
    def members(self, iset: int) -> np.ndarray:
        return self.members_flat[self.member_ptr[iset]:self.member_ptr[iset + 1]]

    def node_children(self, node: int) -> np.ndarray:
        return self.children[self.child_ptr[node]:self.child_ptr[node + 1]]

    def infosets_of(self, player: int) -> np.ndarray:
        return np.nonzero(self.iset_player == player)[0]

    def slots_of(self, player: int) -> np.ndarray:
        return np.nonzero(self.slot_player == player)[0]

    def slots(self, iset: int) -> slice:
        o = int(self.iset_offset[iset])
        return slice(o, o + int(self.iset_n_actions[iset]))

    def sequence(self, node: int, player: int) -> tuple[int, ...]:
        """Slots of ``player``'s own actions on the root-to-node path."""
        seq = []
        v = node
        while v > 0:
            if self.parent_kind[v] == player:
                seq.append(int(self.edge_slot[v]))
            v = self.parent[v]
        return tuple(reversed(seq))

    @property
    def metrics(self) -> GameMetrics:
        if self._metrics is None:
            self._metrics = _compute_metrics(self)
        return self._metrics

    def summary(self) -> dict:
        return {
            "name": self.name,
            "nodes": self.n_nodes,
            "terminals": len(self.terminals),
            "infosets": self.n_infosets,
            "infosets_p1": int(np.sum(self.iset_player == P1)),
            "infosets_p2": int(np.sum(self.iset_player == P2)),
            "actions": self.n_slots,
        }

    # ------------------------------------------------------------ primitives
    def uniform_strategy(self) -> np.ndarray:
        return 1.0 / self.iset_n_actions[self.slot_infoset].astype(np.float64)

    def pure_strategy(self, choice: np.ndarray | dict) -> np.ndarray:
        """One-hot slot vector from an infoset -> action-position map (missing sets get action 0)."""
        probs = np.zeros(self.n_slots)
        pos = np.zeros(self.n_infosets, dtype=np.int64)
        if isinstance(choice, dict):
            for k, a in choice.items():
                pos[k] = a
        else:
            pos[:] = choice
        probs[self.iset_offset + pos] = 1.0
        return probs

    def edge_factor(self, probs: np.ndarray, players=(P1, P2), chance: bool = True) -> np.ndarray:
        """Per-node probability of the incoming edge, restricted to the given movers."""
        f = np.ones(self.n_nodes)
        if chance:
            m = self._movers[CHANCE]
            f[m] = self.chance_prob[m]
        for p in players:
            m = self._movers[p]
            f[m] = probs[self.edge_slot[m]]
        return f

    def top_down(self, factor: np.ndarray) -> np.ndarray:
        r = np.empty(self.n_nodes)
        r[0] = 1.0
        for lvl, lp, prev in zip(self.levels[1:], self.level_parent[1:], self.levels[:-1]):
            r[lvl] = r[prev][lp] * factor[lvl]
        return r

    def bottom_up(self, leaf_value: np.ndarray, factor: np.ndarray) -> np.ndarray:
        """Expected value at every node: terminals take ``leaf_value``, others sum factor*child."""
        v = np.where(self.kind == TERMINAL, leaf_value, 0.0)
        for d in range(len(self.levels) - 1, 0, -1):
            lvl, prev = self.levels[d], self.levels[d - 1]
            acc = np.bincount(self.level_parent[d], weights=factor[lvl] * v[lvl], minlength=len(prev))
            nt = self.kind[prev] != TERMINAL
            v[prev[nt]] = acc[nt]
        return v

    def chance_reach(self, node: int | None = None):
        """Chance-only reach of every node (computed once, returned read-only)."""
        if self._chance_reach is None:
            r = self.top_down(self.edge_factor(None, players=()))
            r.flags.writeable = False
            self._chance_reach = r
        r = self._chance_reach
        return r if node is None else float(r[node])

    def player_reach(self, probs: np.ndarray, player: int, node: int | None = None):
        probs = self._check_probs(probs, player)
        r = self.top_down(self.edge_factor(probs, players=(player,), chance=False))
        return r if node is None else float(r[node])

    def reach(self, probs: np.ndarray) -> np.ndarray:
        """Joint reach probability (chance and both players) of every node."""
        return self.top_down(self.edge_factor(probs))

    def expected_utility(self, probs_p1: np.ndarray, probs_p2: np.ndarray | None = None) -> float:
        """P1's expected utility; with one argument it is read as a full profile."""
        prof = self.profile(probs_p1, probs_p2)
        r = self.reach(prof)
        z = self.terminals
        return float(np.dot(r[z], self.utility[z]))

    def profile(self, probs_p1: np.ndarray, probs_p2: np.ndarray | None = None) -> np.ndarray:
        if probs_p2 is None:
            return self._check_probs(probs_p1, None)
        a = self._check_probs(probs_p1, P1)
        b = self._check_probs(probs_p2, P2)
        return np.where(self.slot_player == P1, a, b)

    def _check_probs(self, probs, player):
        probs = np.asarray(probs, dtype=np.float64)
        if probs.shape != (self.n_slots,):
            raise GameError(f"strategy has {probs.shape} entries, expected ({self.n_slots},)")
        mask = np.ones(self.n_slots, bool) if player is None else self.slot_player == player
        bad = mask & ~np.isfinite(probs)
        if np.any(bad):
            k = int(self.slot_infoset[np.nonzero(bad)[0][0]])
            raise GameError(f"strategy missing an entry for information set {k} ({self.iset_keys[k]!r})")
        return probs

    def utility_for(self, player: int) -> np.ndarray:
        return self.utility if player == P1 else -self.utility

    # ------------------------------------------------------------------- JSON
    def to_json(self) -> str:
        nodes = []
        for v in range(self.n_nodes):
            d = {"kind": _KIND_NAMES[int(self.kind[v])], "parent": int(self.parent[v])}
            if self.kind[v] == TERMINAL:
                d["utility"] = float(self.utility[v])
            elif self.kind[v] == CHANCE:
                d["probs"] = [float(self.chance_prob[c]) for c in self.node_children(v)]
            else:
                d["infoset"] = int(self.node_infoset[v])
            nodes.append(d)
        isets = [
            {"player": int(self.iset_player[k]), "key": repr(self.iset_keys[k]),
             "actions": list(self.iset_labels[k])}
            for k in range(self.n_infosets)
        ]
        return json.dumps({"name": self.name, "nodes": nodes, "infosets": isets})

    @classmethod
    def from_json(cls, text: str) -> "Game":
        data = json.loads(text)
        isets = data["infosets"]
        b = GameBuilder(data.get("name", "game"))
        for v, d in enumerate(data["nodes"]):
            parent = None if d["parent"] < 0 else d["parent"]
            kind = _KIND_CODES[d["kind"]]
            if kind == TERMINAL:
                b.add_terminal(parent, d["utility"])
            elif kind == CHANCE:
                b.add_chance(parent, d["probs"])
            else:
                info = isets[d["infoset"]]
                b.add_decision(parent, kind, ("json", d["infoset"]), info["actions"])
        g = b.build()
        g.iset_keys = [info["key"] for info in isets]
        return g


def _compute_metrics(g: Game) -> GameMetrics:
    z = g.terminals
    u_max = float(np.max(np.abs(g.utility[z]))) if len(z) else 0.0
    # utility range over leaves below each information set: min/max per node bottom-up
    hi = np.where(g.kind == TERMINAL, g.utility, -np.inf)
    lo = np.where(g.kind == TERMINAL, g.utility, np.inf)
    for d in range(len(g.levels) - 1, 0, -1):
        lvl = g.levels[d]
        np.maximum.at(hi, g.parent[lvl], hi[lvl])
        np.minimum.at(lo, g.parent[lvl], lo[lvl])
    dn = g.decision_nodes
    ih = np.full(g.n_infosets, -np.inf)
    il = np.full(g.n_infosets, np.inf)
    np.maximum.at(ih, g.node_infoset[dn], hi[dn])
    np.minimum.at(il, g.node_infoset[dn], lo[dn])
    a_max = int(g.iset_n_actions.max()) if g.n_infosets else 0
    return GameMetrics(u_max=u_max, delta=2 * u_max, delta_I=ih - il, a_max=a_max)


def check_perfect_recall(game: Game, phi: np.ndarray | None = None) -> tuple[bool, list[int]]:
    """Whether every (possibly abstracted) information set has one own-action history.

    With ``phi`` (original infoset -> abstract id) the check runs on the
    abstraction and histories are compared modulo the induced positional
    action map; violating abstract ids are returned.
    """
    if phi is None:
        phi = np.arange(game.n_infosets)
    phi = np.asarray(phi)

    def abstract_seq(node, player):
        return tuple(
            (int(phi[game.slot_infoset[s]]), int(game.slot_position[s]))
            for s in game.sequence(node, player)
        )

    seen: dict[int, tuple] = {}
    bad: set[int] = set()
    for v in game.decision_nodes:
        k = int(phi[game.node_infoset[v]])
        s = abstract_seq(int(v), int(game.kind[v]))
        if k not in seen:
            seen[k] = s
        elif seen[k] != s:
            bad.add(k)
    return not bad, sorted(bad)
