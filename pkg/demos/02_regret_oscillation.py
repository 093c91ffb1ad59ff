"""Why the sampled heuristic alone can get stuck.

Two P1 sets share an abstract set.  Whatever P2 does, one member prefers
c and the other d by the same margin, and the preference flips with P2's
move.  The heuristic only compares which actions look best, so it sees
agreement and never splits; the merged strategy stays uniform.  The
regret-bound update looks at accumulated regret instead and eventually
separates them.
"""
# %%
from irasolve.cfr import cfr_ira_solve, cfr_plus_solve
from irasolve.domains import build_test_game
from irasolve.game import P1
from irasolve.strategy import infoset_values

game = build_test_game("oscillator")
members = [game.iset_keys.index("A"), game.iset_keys.index("B")]


def member_values(result):
    return infoset_values(game, P1, result.probs)[members].round(4).tolist()


# %% heuristic only
heur = cfr_ira_solve(game, -1.0, k_b=0, k_h=90, max_iterations=10_000, check_every=10_000)
print("heuristic only:", heur.mapping.n_sets, "abstract sets, member values", member_values(heur))

# %% plain CFR+ in the original game
plus = cfr_plus_solve(game, -1.0, max_iterations=10_000, check_every=10_000)
print("CFR+:", member_values(plus))

# %% the bound update splits the pair once regret piles up
first_split = {}


def watch(state):
    if "t" not in first_split and state.mapping.n_sets > 2:
        first_split["t"] = state.t


bound = cfr_ira_solve(game, -1.0, k_b=10, k_h=0, max_iterations=50_000, check_every=50_000, callback=watch)
print("bound update split at iteration", first_split.get("t"), "member values", member_values(bound))
