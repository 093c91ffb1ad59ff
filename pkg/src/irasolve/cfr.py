"""CFR+ and CFR+ over a refinable imperfect-recall abstraction (CFR+IRA).

Both run alternating CFR+ sweeps: P1 updates on odd iterations, P2 on even
ones.  Regrets and average-strategy numerators live on abstract action
slots; play in the original game follows the abstraction through its
action map.

The abstraction is refined in two ways:

* a *bound* update tracks, for up to ``k_b`` original sets resampled on a
  doubling schedule, regrets accumulated since the last resample and
  splits off any set whose average exceeds ``threshold(t)``;
* a *heuristic* update tracks single-iteration regrets of up to ``k_h``
  sets of the acting player, resampled every iteration, and separates
  members of an abstract set that disagree on which actions are nearly
  best.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .abstraction import AbstractionMapping, identity_abstraction, init_abstraction
from .fpira import SolveResult, acting_player
from .game import P1, P2, Game
from .strategy import exploitability, infoset_reach
from .trace import RunTrace, TraceRow


def regret_matching_plus(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if np.any(q < 0):
        raise ValueError("regret-matching+ accumulators must be non-negative")
    s = q.sum()
    return q / s if s > 0 else np.full(len(q), 1.0 / len(q))


def current_strategy(mapping: AbstractionMapping, q: np.ndarray) -> np.ndarray:
    """Regret-matching+ over every abstract set at once (abstract slot vector)."""
    sos = mapping.set_of_slot()
    tot = np.bincount(sos, weights=q, minlength=len(mapping.owner))
    n = np.asarray(mapping.n_actions, dtype=float)
    den = tot[sos]
    return np.where(den > 0, q / np.where(den > 0, den, 1.0), 1.0 / n[sos])


def average_strategy(mapping: AbstractionMapping, s: np.ndarray) -> np.ndarray:
    """Normalised average from numerators; sets without mass are uniform."""
    return current_strategy(mapping, s)


def default_threshold(game: Game):
    """``t -> delta_I * sqrt(|A(I)|) / (100 sqrt(t))`` per original set."""
    scale = game.metrics.delta_I * np.sqrt(game.iset_n_actions) / 100.0

    def threshold(iset: int, t: int, t_last: int) -> float:
        return float(scale[iset] / math.sqrt(t))

    return threshold


def sample_information_sets(mapping: AbstractionMapping, player: int | None, k: int,
                            rng: np.random.Generator) -> np.ndarray:
    """``min(k, eligible)`` originals from abstracted sets, each with equal probability.

    Abstracted sets are laid out in random order (members shuffled within
    each set) on a circle and a window of ``k`` consecutive originals is
    taken from a uniformly random offset.  Only the two sets at the window
    ends can be cut, and every eligible original is included with
    probability exactly ``k / eligible``.
    """
    ids = mapping.abstracted_ids(player)
    if k <= 0 or not ids:
        return np.zeros(0, dtype=np.int64)
    ring = np.concatenate([rng.permutation(mapping.members[ids[i]]) for i in rng.permutation(len(ids))])
    n = len(ring)
    if k >= n:
        return np.sort(ring).astype(np.int64)
    start = int(rng.integers(n))
    return np.sort(ring[(start + np.arange(k)) % n]).astype(np.int64)


@dataclass
class CfrState:
    game: Game
    mapping: AbstractionMapping
    q: np.ndarray
    s: np.ndarray
    t: int = 1
    t_next: int = 1
    t_last: int = 0
    j: int = 0
    sampled_b: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    sampled_h: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    r_b: np.ndarray | None = None   # over original slots, meaningful on sampled_b
    r_h: np.ndarray | None = None   # over original slots, meaningful on sampled_h
    raw: np.ndarray | None = None   # optional unclamped cumulative regrets per abstract slot
    splits_bound: int = 0
    splits_heuristic: int = 0

    def sync(self):
        m = self.mapping
        self.q = m.grow(self.q)
        self.s = m.grow(self.s)
        if self.raw is not None:
            self.raw = m.grow(self.raw)

    def reset_sets(self, aids):
        for a in aids:
            sl = self.mapping.slots(a)
            self.q[sl] = 0.0
            self.s[sl] = 0.0
            if self.raw is not None:
                self.raw[sl] = 0.0

    def average(self) -> np.ndarray:
        """Average strategy translated to the original game."""
        return self.mapping.to_original(average_strategy(self.mapping, self.s))

    def current(self) -> np.ndarray:
        return self.mapping.to_original(current_strategy(self.mapping, self.q))

    def words(self) -> dict:
        g, m = self.game, self.mapping
        na = sum(m.n_actions[a] for a in m.ids())
        aux = int(g.iset_n_actions[self.sampled_b].sum() + g.iset_n_actions[self.sampled_h].sum())
        return {"mapping_words": m.word_count(), "strategy_words": 0, "regret_words": 2 * na,
                "aux_words": aux, "cache_peak_words": 0, "br_strategy_peak_words": 0}


def compute_regrets(state: CfrState, player: int, delay: int) -> float:
    """One CFR+ sweep for ``player``; returns the root value of the current profile.

    Updates the clamped regrets of the abstraction, the average-strategy
    numerators (after ``delay``), the single-iteration regrets of the
    heuristic sample and the running regrets of the bound sample.
    """
    g, m = state.game, state.mapping
    sigma_abs = current_strategy(m, state.q)
    probs = m.to_original(sigma_abs)
    factor = g.edge_factor(probs)
    opp = g.top_down(g.edge_factor(probs, players=(1 - player,), chance=True))
    v = g.bottom_up(g.utility_for(player), factor)
    nodes = g._movers[player]
    par = g.parent[nodes]
    r_orig = np.bincount(g.edge_slot[nodes], weights=opp[par] * (v[nodes] - v[par]), minlength=g.n_slots)
    r_abs = np.bincount(m.slot_map, weights=r_orig, minlength=m.n_slots)
    mine = np.asarray(m.owner)[m.set_of_slot()] == player
    state.q = np.where(mine, np.maximum(state.q + r_abs, 0.0), state.q)
    if state.raw is not None:
        state.raw = state.raw + np.where(mine, r_abs, 0.0)
    if state.t > delay:
        reach = infoset_reach(g, player, probs)
        contrib = reach[g.slot_infoset] * probs * (g.slot_player == player)
        state.s = state.s + state.t * np.bincount(m.slot_map, weights=contrib, minlength=m.n_slots)
    state.r_h = r_orig
    if len(state.sampled_b):
        own = state.sampled_b[g.iset_player[state.sampled_b] == player]
        if len(own):
            sl = np.concatenate([np.arange(g.iset_offset[k], g.iset_offset[k] + g.iset_n_actions[k]) for k in own])
            state.r_b[sl] += r_orig[sl]
    return float(v[0])


def update_abstraction_for_bound(state: CfrState, threshold) -> list[int]:
    """Split off sampled originals whose average tracked regret exceeds the threshold."""
    g, m = state.game, state.mapping
    span = state.t - state.t_last
    if span <= 0 or not len(state.sampled_b):
        return []
    removed = []
    for k in state.sampled_b:
        k = int(k)
        aid = int(m.phi[k])
        if not m.is_abstracted(aid):
            continue
        r = state.r_b[g.slots(k)]
        if r.max() / span > threshold(k, state.t, state.t_last):
            rest = [int(x) for x in m.members[aid] if x != k]
            new = m.split(aid, [[k], rest])
            state.sync()
            state.reset_sets(new)
            removed.append(k)
            state.splits_bound += 1
    if removed:
        keep = ~np.isin(state.sampled_b, removed)
        _drop_b(state, state.sampled_b[~keep])
        state.sampled_b = state.sampled_b[keep]
    return removed


def update_abstraction_for_heuristic(state: CfrState, player: int) -> list[int]:
    """Separate sampled members whose near-best action sets differ this iteration."""
    g, m = state.game, state.mapping
    if not len(state.sampled_h):
        return []
    band = 1.0 / (5.0 * math.sqrt(state.t))
    by_set: dict[int, list[int]] = {}
    for k in state.sampled_h:
        aid = int(m.phi[k])
        if m.owner[aid] == player and m.is_abstracted(aid):
            by_set.setdefault(aid, []).append(int(k))
    created = []
    for aid, sampled in by_set.items():
        groups: dict[tuple, list[int]] = {}
        for k in sampled:
            r = state.r_h[g.slots(k)]
            gamma = tuple(np.nonzero(r >= r.max() - band)[0].tolist())
            groups.setdefault(gamma, []).append(k)
        if len(groups) <= 1:
            continue
        blocks = sorted(groups.values(), key=lambda b: (-len(b), min(b)))
        sampled_set = set(sampled)
        unsampled = [int(x) for x in m.members[aid] if int(x) not in sampled_set]
        blocks[0] = blocks[0] + unsampled
        members = m.members[aid]
        new = m.split(aid, blocks)
        state.sync()
        state.reset_sets(new)
        created.extend(new)
        state.splits_heuristic += 1
        gone = state.sampled_b[np.isin(state.sampled_b, members)]
        if len(gone):
            _drop_b(state, gone)
            state.sampled_b = state.sampled_b[~np.isin(state.sampled_b, members)]
    return created


def _drop_b(state: CfrState, isets):
    g = state.game
    for k in isets:
        state.r_b[g.slots(int(k))] = 0.0


def _row(state: CfrState, expl: float, t0: float) -> TraceRow:
    w = state.words()
    return TraceRow(iteration=state.t - 1, exploitability_sum=expl,
                    abstract_infoset_count=state.mapping.n_sets, wall_seconds=time.perf_counter() - t0, **w)


def run_cfr(game: Game, mapping: AbstractionMapping, epsilon: float, max_iterations: int,
            k_b: int = 0, k_h: int = 0, delay: int = 100, seed: int = 0, check_every: int = 1,
            threshold=None, callback=None, track_raw: bool = False) -> SolveResult:
    """Shared CFR+ / CFR+IRA loop; see :func:`cfr_ira_solve`."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    threshold = default_threshold(game) if threshold is None else threshold
    state = CfrState(game, mapping, np.zeros(mapping.n_slots), np.zeros(mapping.n_slots),
                     r_b=np.zeros(game.n_slots), r_h=np.zeros(game.n_slots),
                     raw=np.zeros(mapping.n_slots) if track_raw else None)
    trace = RunTrace()
    converged = False
    while True:
        t = state.t
        if (t - 1) % check_every == 0 or t - 1 == max_iterations:
            avg = state.average()
            ex = exploitability(game, avg, avg)
            trace.append(_row(state, ex.total, t0))
            if ex.total <= epsilon:
                converged = True
                break
        if t > max_iterations:
            break
        i = acting_player(t)
        state.sampled_h = sample_information_sets(mapping, i, k_h, rng)
        if t == state.t_next:
            state.sampled_b = sample_information_sets(mapping, None, k_b, rng)
            state.r_b[:] = 0.0
            state.t_last = t
            state.t_next = t + 2 ** state.j
            state.j += 1
        compute_regrets(state, i, delay)
        if k_h > 0:
            update_abstraction_for_heuristic(state, i)
        if t != state.t_last and k_b > 0:
            update_abstraction_for_bound(state, threshold)
        if callback is not None:
            callback(state)
        state.t += 1
    return SolveResult(state.average(), trace, converged, mapping, {"cfr": state})


def cfr_ira_solve(game: Game, epsilon: float, k_b: int = 10, k_h: int = 90, delay: int = 100,
                  max_iterations: int = 10**6, seed: int = 0, check_every: int = 1,
                  threshold=None, callback=None, mapping: AbstractionMapping | None = None) -> SolveResult:
    """CFR+ on the coarse initial abstraction, refined by the bound and heuristic updates.

    Stops when the exploitability of the translated average strategies is
    at most ``epsilon`` (checked every ``check_every`` iterations) or
    after ``max_iterations``.
    """
    mapping = init_abstraction(game) if mapping is None else mapping
    return run_cfr(game, mapping, epsilon, max_iterations, k_b, k_h, delay, seed, check_every,
                   threshold, callback)


def cfr_plus_solve(game: Game, epsilon: float, delay: int = 100, max_iterations: int = 10**6,
                   check_every: int = 1, callback=None, track_raw: bool = False) -> SolveResult:
    """CFR+ with alternating updates on the unabstracted game."""
    return run_cfr(game, identity_abstraction(game), epsilon, max_iterations, 0, 0, delay, 0,
                   check_every, None, callback, track_raw)


__all__ = [
    "regret_matching_plus", "current_strategy", "average_strategy", "sample_information_sets",
    "compute_regrets", "update_abstraction_for_bound", "update_abstraction_for_heuristic",
    "cfr_ira_solve", "cfr_plus_solve", "run_cfr", "CfrState", "default_threshold", "P1", "P2",
]
