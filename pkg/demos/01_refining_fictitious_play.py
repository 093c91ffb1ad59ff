"""Fictitious play over a coarse abstraction, watched one update at a time.

The game: P1 picks a or b, P2 picks e or f without seeing it, then P1 moves
again without seeing P2's choice.  The starting abstraction merges P1's two
second-move sets because they look alike (same sequence length, same
number of actions).  We follow the first few updates and see when the
merged set has to be broken up.
"""
# %%
import numpy as np

from irasolve.abstraction import init_abstraction
from irasolve.domains import build_test_game
from irasolve.fpira import fp_solve, fpira_solve

game = build_test_game("example2_game")
mapping = init_abstraction(game)
print(mapping.dump())

# %% start from: b at the root, the second action in the merged set, e for P2
root, a_set, j = (game.iset_keys.index(k) for k in ("root", "a", "J"))
start = np.zeros(mapping.n_slots)
start[mapping.slots(int(mapping.phi[root])).start + 1] = 1.0
start[mapping.slots(int(mapping.phi[a_set])).start + 1] = 1.0
start[mapping.slots(int(mapping.phi[j])).start] = 1.0


def show(t, m, orig, info):
    if not info:
        return
    print(f"update {t}: player {info['player'] + 1}, delta {info['delta']:.4f}, "
          f"{'refined' if info['refined'] else 'kept'} -> {m.n_sets} abstract sets")
    for key in ("root", "a", "b"):
        k = game.iset_keys.index(key)
        print(f"    {key:>4}: {np.round(orig[game.slots(k)], 3).tolist()}")


res = fpira_solve(game, 1e-3, 6, mapping=mapping, initial=start, callback=show)

# %% the abstraction never changes the exploitability trajectory
plain = fp_solve(game, -1.0, 50).trace.column("exploitability_sum")
abstract = fpira_solve(game, -1.0, 50).trace.column("exploitability_sum")
print("largest difference over 50 updates:", max(abs(x - y) for x, y in zip(plain, abstract)))
