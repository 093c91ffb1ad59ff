"""Behavioral strategies, best responses, averaging and exploitability.

Strategies are float vectors over a game's action slots (see
:mod:`irasolve.game`).  Two best-response routes are provided:

* :func:`best_response` works bottom-up over the responder's sequences
  with numpy; it is what the solvers call.
* :func:`best_response_tree` is a recursive depth-first search with a
  per-node value cache and upper-bound pruning of dominated actions.  It
  is slower but exercises the cache accounting and serves as a
  cross-check.

Both break ties toward the lowest action index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .game import CHANCE, P1, P2, TERMINAL, Game

TIE_TOL = 1e-10


@dataclass
class BehavioralStrategy:
    """A player's strategy over the action slots of one game or abstraction."""

    owner: int
    probs: np.ndarray
    offsets: np.ndarray
    n_actions: np.ndarray

    def table(self, ids=None) -> dict[int, np.ndarray]:
        ids = range(len(self.offsets)) if ids is None else ids
        return {int(k): self.probs[self.offsets[k]:self.offsets[k] + self.n_actions[k]].copy() for k in ids}

    @classmethod
    def of(cls, game: Game, player: int, probs: np.ndarray) -> "BehavioralStrategy":
        return cls(player, np.asarray(probs, float), game.iset_offset, game.iset_n_actions)


@dataclass
class PureBestResponse:
    owner: int
    value: float
    choice: np.ndarray        # action position per infoset of the game (owner's sets only meaningful)
    prescribed: np.ndarray    # bool per infoset: reachable under own choices with opponent support
    own_reachable: np.ndarray  # bool per infoset: reachable under own choices

    def table(self) -> dict[int, int]:
        return {int(k): int(self.choice[k]) for k in np.nonzero(self.prescribed)[0]}

    def probs(self, game: Game) -> np.ndarray:
        """One-hot slot vector; unprescribed sets play their chosen (default lowest) action."""
        out = np.zeros(game.n_slots)
        mine = game.infosets_of(self.owner)
        out[game.iset_offset[mine] + self.choice[mine]] = 1.0
        return out


# ------------------------------------------------------------ sequence plan
class _SequencePlan:
    """Per-player grouping of information sets by own sequence length."""

    def __init__(self, game: Game, player: int):
        isets = game.infosets_of(player)
        self.player = player
        self.groups = []
        lens = game.iset_seq_len[isets]
        for s in sorted(set(lens.tolist()), reverse=True):
            ks = isets[lens == s]
            amax = int(game.iset_n_actions[ks].max())
            pad = game.iset_offset[ks][:, None] + np.arange(amax)[None, :]
            valid = np.arange(amax)[None, :] < game.iset_n_actions[ks][:, None]
            slots = np.where(valid, pad, 0)
            self.groups.append((ks, slots, valid, game.iset_parent_slot[ks]))
        z = game.terminals
        ls = game.last_slot[player, z]
        self.leaf_slot = ls
        self.leaf_has_seq = ls >= 0


def _plan(game: Game, player: int) -> _SequencePlan:
    cache = game.__dict__.setdefault("_seq_plans", {})
    if player not in cache:
        cache[player] = _SequencePlan(game, player)
    return cache[player]


def pure_max(game: Game, player: int, leaf_weight: np.ndarray, tol: float = TIE_TOL):
    """Maximise ``sum_z pi_player(z) * w(z)`` over pure strategies of ``player``.

    ``leaf_weight`` is indexed like ``game.terminals``.  Returns the
    optimum, the chosen action position of every information set (all of
    the game's sets; other players' entries are 0) and the per-slot
    continuation values.
    """
    plan = _plan(game, player)
    cv = np.bincount(plan.leaf_slot[plan.leaf_has_seq], weights=leaf_weight[plan.leaf_has_seq],
                     minlength=game.n_slots).astype(float)
    root = float(leaf_weight[~plan.leaf_has_seq].sum())
    choice = np.zeros(game.n_infosets, dtype=np.int64)
    for ks, slots, valid, parent in plan.groups:
        vals = np.where(valid, cv[slots], -np.inf)
        best = vals.max(axis=1)
        pick = np.argmax(vals >= (best - tol)[:, None], axis=1)
        choice[ks] = pick
        has = parent >= 0
        np.add.at(cv, parent[has], best[has])
        root += float(best[~has].sum())
    return root, choice, cv


def own_reachable_sets(game: Game, player: int, choice: np.ndarray) -> np.ndarray:
    """Information sets of ``player`` reachable when following the pure ``choice``."""
    plan = _plan(game, player)
    reach = np.zeros(game.n_infosets, dtype=bool)
    slot_on = np.zeros(game.n_slots, dtype=bool)
    for ks, _, _, parent in reversed(plan.groups):
        r = np.where(parent >= 0, slot_on[np.maximum(parent, 0)], True)
        reach[ks] = r
        slot_on[game.iset_offset[ks[r]] + choice[ks[r]]] = True
    return reach


def opponent_reach(game: Game, player: int, probs: np.ndarray) -> np.ndarray:
    """Chance-and-opponent reach of every node, from ``player``'s point of view."""
    return game.top_down(game.edge_factor(probs, players=(1 - player,), chance=True))


def best_response(game: Game, player: int, opp_probs: np.ndarray, tol: float = TIE_TOL) -> PureBestResponse:
    """Pure best response of ``player`` against the opponent's slot vector."""
    opp_probs = game._check_probs(opp_probs, 1 - player)
    r = opponent_reach(game, player, opp_probs)
    z = game.terminals
    w = r[z] * game.utility_for(player)[z]
    value, choice, _ = pure_max(game, player, w, tol)
    own = own_reachable_sets(game, player, choice)
    active = np.zeros(game.n_infosets, dtype=bool)
    dn = game.decision_nodes
    np.logical_or.at(active, game.node_infoset[dn], r[dn] > 0)
    mine = game.iset_player == player
    return PureBestResponse(player, value, choice, own & active & mine, own & mine)


def active_node_count(game: Game, player: int, opp_probs: np.ndarray) -> int:
    """Non-terminal nodes with positive chance-and-opponent reach (cache size of an unpruned search)."""
    r = opponent_reach(game, player, opp_probs)
    return int(np.sum((r > 0) & (game.kind != TERMINAL)))


# ------------------------------------------------------------ tree search
class ValueCache(dict):
    @property
    def peak(self) -> int:
        return len(self)


def subtree_max(game: Game, values: np.ndarray) -> np.ndarray:
    """Maximum of ``values`` (given at terminals) over the leaves below each node."""
    hi = np.where(game.kind == TERMINAL, values, -np.inf)
    for d in range(len(game.levels) - 1, 0, -1):
        lvl = game.levels[d]
        np.maximum.at(hi, game.parent[lvl], hi[lvl])
    return hi


def tree_pure_max(game: Game, player: int, weight: np.ndarray, active: np.ndarray,
                  upper: np.ndarray | None = None, tol: float = TIE_TOL):
    """Depth-first pure-strategy maximisation with a node cache.

    ``weight`` holds the leaf contribution of every terminal node (already
    multiplied by the chance/opponent reach) and ``active`` marks nodes
    worth visiting.  With ``upper`` (an upper bound on each node's value)
    actions that cannot beat the best one found so far are abandoned.
    Returns (value, choice dict, cache).
    """
    cache = ValueCache()
    choice: dict[int, int] = {}
    kind, infoset = game.kind, game.node_infoset
    cptr, children = game.child_ptr, game.children

    def child(h, a):
        return children[cptr[h] + a]

    def visit(h):
        v = cache.get(h)
        if v is not None:
            return v
        if not active[h]:
            return 0.0
        k = kind[h]
        if k == TERMINAL:
            return float(weight[h])
        if k == player:
            iset = int(infoset[h])
            mem = [int(m) for m in game.members(iset) if active[m]]
            n = int(game.iset_n_actions[iset])
            totals = np.full(n, -np.inf)
            best_v = -np.inf
            for a in range(n):
                total = 0.0
                for idx, m in enumerate(mem):
                    if upper is not None and best_v > -np.inf:
                        rest = sum(upper[child(mm, a)] for mm in mem[idx:])
                        if total + rest < best_v - tol:
                            total = -np.inf
                            break
                    total += visit(int(child(m, a)))
                totals[a] = total
                best_v = max(best_v, total)
            best_a = int(np.argmax(totals >= best_v - tol))
            choice[iset] = best_a
            for m in mem:
                cache[m] = visit(int(child(m, best_a)))
            return cache[h]
        v = 0.0
        for c in children[cptr[h]:cptr[h + 1]]:
            v += visit(int(c))
        cache[h] = v
        return v

    value = visit(0)
    return value, choice, cache


def best_response_tree(game: Game, player: int, opp_probs: np.ndarray, prune: bool = True,
                       tol: float = TIE_TOL) -> tuple[PureBestResponse, int]:
    """Recursive best response; returns the response and the peak cache size."""
    opp_probs = game._check_probs(opp_probs, 1 - player)
    r = opponent_reach(game, player, opp_probs)
    u = game.utility_for(player)
    weight = np.where(game.kind == TERMINAL, r * u, 0.0)
    upper = r * subtree_max(game, u) if prune else None
    value, table, cache = tree_pure_max(game, player, weight, r > 0, upper, tol)
    choice = np.zeros(game.n_infosets, dtype=np.int64)
    for k, a in table.items():
        choice[k] = a
    own = own_reachable_sets(game, player, choice)
    visited = np.zeros(game.n_infosets, dtype=bool)
    visited[list(table)] = True
    mine = game.iset_player == player
    return PureBestResponse(player, value, choice, own & visited & mine, own & mine), cache.peak


# ------------------------------------------------------- reach & averaging
def infoset_reach(game: Game, player: int, probs: np.ndarray) -> np.ndarray:
    """Own reach probability of every information set (0 for the other player's sets)."""
    r = game.top_down(game.edge_factor(probs, players=(player,), chance=False))
    out = r[game.iset_first_member]
    out[game.iset_player != player] = 0.0
    return out


def realization_plan(game: Game, player: int, probs: np.ndarray) -> np.ndarray:
    """Own reach probability of every terminal (ordered like ``game.terminals``)."""
    return game.player_reach(probs, player)[game.terminals]


def average_combine(game: Game, player: int, b: np.ndarray, b_prime: np.ndarray,
                    lam1: float, lam2: float) -> np.ndarray:
    """Behavioral strategy realising ``lam1 * plan(b) + lam2 * plan(b_prime)``.

    Sets unreachable under both inputs keep ``b``'s distribution.
    """
    if abs(lam1 + lam2 - 1.0) > 1e-12 or lam1 < 0 or lam2 < 0:
        raise ValueError(f"weights must be a convex pair, got {lam1}, {lam2}")
    pb = infoset_reach(game, player, b)
    pbp = infoset_reach(game, player, b_prime)
    return combine_with_reach(game, b, b_prime, lam1 * pb, lam2 * pbp, player)


def combine_with_reach(game: Game, b, b_prime, wb, wbp, player=None):
    den = wb + wbp
    frac = np.divide(wbp, den, out=np.zeros_like(den), where=den > 0)
    step = frac[game.slot_infoset]
    out = b + step * (b_prime - b)
    if player is not None:
        out = np.where(game.slot_player == player, out, b)
    return out


# ----------------------------------------------------------- exploitability
@dataclass
class Exploitability:
    e1: float
    e2: float
    total: float
    br1: PureBestResponse
    br2: PureBestResponse

    def __iter__(self):
        return iter((self.e1, self.e2, self.total))


def exploitability(game: Game, probs_p1: np.ndarray, probs_p2: np.ndarray) -> Exploitability:
    """Best-response gaps of a profile.

    ``total = u1(BR1, b2) - u1(b1, BR2)``; ``e1`` is what P2 gains over the
    current profile by deviating (how exploitable ``b1`` is), ``e2`` the
    same for P1 against ``b2``.
    """
    br1 = best_response(game, P1, probs_p2)
    br2 = best_response(game, P2, probs_p1)
    u = game.expected_utility(probs_p1, probs_p2)
    return Exploitability(u + br2.value, br1.value - u, br1.value + br2.value, br1, br2)


def infoset_values(game: Game, player: int, profile: np.ndarray) -> np.ndarray:
    """Expected utility of ``player`` conditioned on reaching each of its information sets.

    Sets with zero chance-and-opponent reach get NaN.
    """
    f = game.edge_factor(profile)
    v = game.bottom_up(game.utility_for(player), f)
    r = opponent_reach(game, player, profile)
    dn = game.decision_nodes
    num = np.bincount(game.node_infoset[dn], weights=r[dn] * v[dn], minlength=game.n_infosets)
    den = np.bincount(game.node_infoset[dn], weights=r[dn], minlength=game.n_infosets)
    out = np.divide(num, den, out=np.full(game.n_infosets, np.nan), where=den > 0)
    out[game.iset_player != player] = np.nan
    return out


def random_strategy(game: Game, rng: np.random.Generator, sparsity: float = 0.0) -> np.ndarray:
    """Random behavioral profile; with ``sparsity`` some actions get probability zero."""
    x = rng.random(game.n_slots)
    if sparsity > 0:
        x[rng.random(game.n_slots) < sparsity] = 0.0
    tot = np.bincount(game.slot_infoset, weights=x, minlength=game.n_infosets)
    empty = tot[game.slot_infoset] == 0
    x[empty & (game.slot_position == 0)] = 1.0
    tot = np.bincount(game.slot_infoset, weights=x, minlength=game.n_infosets)
    return x / tot[game.slot_infoset]


__all__ = [
    "BehavioralStrategy", "PureBestResponse", "ValueCache", "Exploitability",
    "pure_max", "best_response", "best_response_tree", "tree_pure_max", "own_reachable_sets",
    "opponent_reach", "active_node_count", "subtree_max", "infoset_reach", "realization_plan",
    "average_combine", "combine_with_reach", "exploitability", "infoset_values", "random_strategy",
    "CHANCE", "P1", "P2",
]
