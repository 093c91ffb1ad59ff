"""Fictitious play, plain and over a refinable imperfect-recall abstraction.

Both solvers alternate updates (P1 on odd iterations, P2 on even ones),
start from the pure strategy that picks the lowest action everywhere and
mix each new best response into the running average with weight
``1 / (updates + 1)``.

The abstraction variant stores its average only per abstract set.  Before
each update it splits abstract sets whose members the best response treats
differently, averages inside the abstraction, and checks whether that
changed the value of any opponent pure strategy compared with averaging in
the original game.  If it did, the abstract sets the best response touches
are broken up so the exact original-game average can be stored.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .abstraction import AbstractionMapping, init_abstraction
from .game import P1, P2, TERMINAL, Game
from .strategy import (PureBestResponse, active_node_count, combine_with_reach, exploitability,
                       infoset_reach, pure_max, tree_pure_max)
from .trace import RunTrace, TraceRow

DELTA_TOL = 1e-12


def acting_player(t: int) -> int:
    return P1 if t % 2 == 1 else P2


@dataclass
class SolveResult:
    probs: np.ndarray  # original-game profile covering both players' slots
    trace: RunTrace
    converged: bool
    mapping: AbstractionMapping | None = None
    state: dict = field(default_factory=dict)


# ------------------------------------------------------------ refinements
def refine_for_br(mapping: AbstractionMapping, br: PureBestResponse, avg: np.ndarray,
                  moved: np.ndarray | None = None) -> np.ndarray:
    """Split abstract sets whose prescribed members prefer different abstract actions.

    ``moved`` (default: the prescribed sets) marks the members the update
    pushes towards the response; the others stay together in one extra block.
    New sets inherit the old set's average; returns the grown average table.
    """
    player = br.owner
    for aid in mapping.abstracted_ids(player):
        mem = mapping.members[aid]
        reached = (br.prescribed if moved is None else moved)[mem]
        if not reached.any():
            continue
        acts = br.choice[mem]
        blocks = [mem[reached & (acts == a)] for a in np.unique(acts[reached])]
        if len(blocks) <= 1:
            continue
        if (~reached).any():
            blocks.append(mem[~reached])
        old = avg[mapping.slots(aid)].copy()
        new = mapping.split(aid, blocks)
        avg = mapping.grow(avg)
        for nid in new:
            avg[mapping.slots(nid)] = old
    return avg


def refine_case2(mapping: AbstractionMapping, br: PureBestResponse, avg: np.ndarray,
                 moved: np.ndarray | None = None, stored: np.ndarray | None = None) -> np.ndarray:
    """Break up abstracted sets so that the original-game average fits exactly.

    Moved members (default: the prescribed ones) are separated from the
    rest of their set.  Without ``stored`` each gets its own set.  With
    ``stored`` (the original-game slot vector about to be written) moved
    members sharing the same row stay together, and those whose row equals
    the set's current one remain with the unmoved members.
    """
    g = mapping.game
    mask = br.prescribed if moved is None else moved
    for aid in mapping.abstracted_ids(br.owner):
        mem = mapping.members[aid]
        reached = mask[mem]
        if not reached.any():
            continue
        old = avg[mapping.slots(aid)].copy()
        rest = [int(k) for k in mem[~reached]]
        if stored is None:
            blocks = [[int(k)] for k in mem[reached]]
        else:
            groups: dict[bytes, list[int]] = {}
            for k in mem[reached]:
                groups.setdefault(stored[g.slots(int(k))].tobytes(), []).append(int(k))
            if rest:
                rest += groups.pop(old.tobytes(), [])
            blocks = list(groups.values())
        if rest:
            blocks.append(rest)
        if len(blocks) <= 1:
            continue
        new = mapping.split(aid, blocks)
        avg = mapping.grow(avg)
        for nid in new:
            avg[mapping.slots(nid)] = old
    return avg


def completed_response(game: Game, br: PureBestResponse, avg: np.ndarray,
                       avg_reach: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Mix the pure response with the current average where the response is free.

    Sets without opponent support do not affect the response's value, so in
    the ones the average already reaches we keep the average's behaviour and
    the update leaves them alone.  Unreached ones take the pure choice, which
    keeps the result a function of the average's realization plan.

    Returns the slot vector and the per-set mask of sets the update moves
    towards the pure choice (reached under the completed response).
    """
    free = ~br.prescribed & (avg_reach > 0) & (game.iset_player == br.owner)
    out = br.probs(game)
    keep = free[game.slot_infoset]
    out[keep] = avg[keep]
    reach = infoset_reach(game, br.owner, out)
    moved = (reach > 0) & ~free & (game.iset_player == br.owner)
    return out, moved


# ------------------------------------------------------------------ delta
def delta_leaf_weights(game: Game, player: int, b_hat: np.ndarray, b_tilde: np.ndarray) -> np.ndarray:
    """Chance-weighted change in the opponent's leaf utility between two strategies of ``player``."""
    z = game.terminals
    own_hat = game.player_reach(b_hat, player)[z]
    own_tilde = game.player_reach(b_tilde, player)[z]
    chance = game.chance_reach()[z]
    return chance * (own_tilde - own_hat) * game.utility_for(1 - player)[z]


def compute_delta(game: Game, player: int, b_hat: np.ndarray, b_tilde: np.ndarray) -> float:
    """Largest change of any opponent pure strategy's value between ``b_hat`` and ``b_tilde``."""
    w = delta_leaf_weights(game, player, b_hat, b_tilde)
    up, _, _ = pure_max(game, 1 - player, w)
    down, _, _ = pure_max(game, 1 - player, -w)
    return max(up, down, 0.0)


def compute_delta_tree(game: Game, player: int, b_hat: np.ndarray, b_tilde: np.ndarray) -> tuple[float, int]:
    """Depth-first variant of :func:`compute_delta`; also returns the peak cache size."""
    own_hat = game.player_reach(b_hat, player)
    own_tilde = game.player_reach(b_tilde, player)
    chance = game.chance_reach()
    u = game.utility_for(1 - player)
    w = np.where(game.kind == TERMINAL, chance * (own_tilde - own_hat) * u, 0.0)
    active = (chance > 0) & ((own_hat > 0) | (own_tilde > 0))
    up, _, c1 = tree_pure_max(game, 1 - player, w, active)
    down, _, c2 = tree_pure_max(game, 1 - player, -w, active)
    return max(up, down, 0.0), max(c1.peak, c2.peak)


def delta_cache_size(game: Game, player: int, b_hat: np.ndarray, b_tilde: np.ndarray) -> int:
    own = (game.player_reach(b_hat, player) > 0) | (game.player_reach(b_tilde, player) > 0)
    return int(np.sum(own & (game.chance_reach() > 0) & (game.kind != TERMINAL)))


# ---------------------------------------------------------------- solvers
def _words_row(t, expl, mapping_words, strategy_words, aux, cache_peak, br_peak, t0, n_sets):
    return TraceRow(iteration=t, exploitability_sum=expl, abstract_infoset_count=n_sets,
                    mapping_words=mapping_words, strategy_words=strategy_words, regret_words=0,
                    aux_words=aux, cache_peak_words=cache_peak, br_strategy_peak_words=br_peak,
                    wall_seconds=time.perf_counter() - t0)


def fp_solve(game: Game, epsilon: float, max_iterations: int,
             initial: np.ndarray | None = None, callback=None) -> SolveResult:
    """Fictitious play with alternating updates in the original game."""
    t0 = time.perf_counter()
    avg = game.pure_strategy(np.zeros(game.n_infosets, dtype=np.int64)) if initial is None else initial.copy()
    updates = [0, 0]
    trace = RunTrace()
    cache_peak = br_peak = 0
    converged = False
    for t in range(1, max_iterations + 2):
        ex = exploitability(game, avg, avg)
        trace.append(_words_row(t - 1, ex.total, 0, game.n_slots, 0, cache_peak, br_peak, t0,
                                game.n_infosets))
        if callback is not None:
            callback(t - 1, avg, ex)
        if ex.total <= epsilon:
            converged = True
            break
        if t > max_iterations:
            break
        i = acting_player(t)
        br = ex.br1 if i == P1 else ex.br2
        cache_peak = max(cache_peak, active_node_count(game, i, avg))
        br_peak = max(br_peak, int(br.prescribed.sum()))
        updates[i] += 1
        lam2 = 1.0 / (updates[i] + 1)
        pi_b = infoset_reach(game, i, avg)
        brp, _ = completed_response(game, br, avg, pi_b)
        pi_br = infoset_reach(game, i, brp)
        avg = combine_with_reach(game, avg, brp, (1 - lam2) * pi_b, lam2 * pi_br, i)
    return SolveResult(avg, trace, converged)


def fpira_solve(game: Game, epsilon: float, max_iterations: int,
                mapping: AbstractionMapping | None = None, initial: np.ndarray | None = None,
                callback=None, delta_tol: float = DELTA_TOL, share_equal: bool = True) -> SolveResult:
    """Fictitious play over an abstraction that is refined on demand.

    ``initial`` (abstract slot vector) defaults to the lowest action in every
    abstract set.  ``callback(t, mapping, avg_original, info)`` is invoked
    after each checked iteration for instrumentation.  With ``share_equal``
    the refinement after a failed check keeps members with identical exact
    averages together instead of isolating every reached member.
    """
    t0 = time.perf_counter()
    mapping = init_abstraction(game) if mapping is None else mapping
    avg = mapping.lowest_action_strategy() if initial is None else mapping.grow(initial.copy())
    updates = [0, 0]
    trace = RunTrace()
    cache_peak = br_peak = aux = 0
    converged = False
    info: dict = {}
    for t in range(1, max_iterations + 2):
        orig = mapping.to_original(avg)
        ex = exploitability(game, orig, orig)
        trace.append(_words_row(t - 1, ex.total, mapping.word_count(), sum(mapping.n_actions[a] for a in mapping.ids()),
                                aux, cache_peak, br_peak, t0, mapping.n_sets))
        if callback is not None:
            callback(t - 1, mapping, orig, info)
        if ex.total <= epsilon:
            converged = True
            break
        if t > max_iterations:
            break
        i = acting_player(t)
        br = ex.br1 if i == P1 else ex.br2
        cache_peak = max(cache_peak, active_node_count(game, i, orig))
        br_peak = max(br_peak, int(br.prescribed.sum()))

        pi_b = infoset_reach(game, i, orig)
        brp, moved = completed_response(game, br, orig, pi_b)
        avg = refine_for_br(mapping, br, avg, moved)
        updates[i] += 1
        lam2 = 1.0 / (updates[i] + 1)
        lam1 = 1.0 - lam2

        # averaging inside the abstraction: abstract-set reach sums its members' reach
        pi_br = infoset_reach(game, i, brp)
        n_abs = len(mapping.owner)
        abs_b = np.bincount(mapping.phi, weights=pi_b, minlength=n_abs)
        abs_br = np.bincount(mapping.phi, weights=pi_br, minlength=n_abs)
        hit = np.nonzero(moved)[0]
        abs_hit = np.bincount(mapping.phi[hit], weights=pi_br[hit], minlength=n_abs)
        target = np.zeros(mapping.n_slots)
        target[np.asarray(mapping.offset)[mapping.phi[hit]] + br.choice[hit]] = 1.0
        sos = mapping.set_of_slot()
        den = lam1 * abs_b + lam2 * abs_br
        frac = np.divide(lam2 * abs_hit, den, out=np.zeros_like(den), where=den > 0)
        mine = np.asarray(mapping.owner)[sos] == i
        step = np.where(mine & (abs_hit[sos] > 0), frac[sos], 0.0)
        b_hat = avg + step * (target - avg)

        # averaging in the original game
        b_tilde = combine_with_reach(game, orig, brp, lam1 * pi_b, lam2 * pi_br, i)
        b_hat_orig = mapping.to_original(b_hat)
        delta = compute_delta(game, i, b_hat_orig, b_tilde)
        cache_peak = max(cache_peak, delta_cache_size(game, i, b_hat_orig, b_tilde))
        in_abs = mapping.phi[hit]
        sizes = np.array([len(mapping.members[a]) for a in in_abs], dtype=np.int64)
        aux = max(aux, int(game.iset_n_actions[hit][sizes > 1].sum()) if len(hit) else 0)
        info = {"delta": delta, "player": i, "refined": delta > delta_tol}
        if delta > delta_tol:
            avg = refine_case2(mapping, br, avg, moved, b_tilde if share_equal else None)
            avg = _store_original(mapping, b_tilde, avg, i)
        else:
            avg = b_hat
    return SolveResult(mapping.to_original(avg), trace, converged, mapping, {"avg": avg})


def _store_original(mapping: AbstractionMapping, orig: np.ndarray, avg: np.ndarray, player: int) -> np.ndarray:
    g = mapping.game
    avg = mapping.grow(avg)
    for aid in mapping.ids():
        if mapping.owner[aid] != player:
            continue
        m = int(mapping.members[aid][0])
        avg[mapping.slots(aid)] = orig[g.slots(m)]
    return avg
