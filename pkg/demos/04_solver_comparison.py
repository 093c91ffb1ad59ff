"""Exploitability against iterations for the four solvers on one game.

Fictitious play and its abstraction-refining variant produce the same
curve; CFR+ and CFR+IRA converge much faster.  Pass a domain name
(default P111) and an iteration budget (default 400).
"""
# %%
import sys

from irasolve.bench import ExperimentConfig, run

domain = sys.argv[1] if len(sys.argv) > 1 else "P111"
budget = int(sys.argv[2]) if len(sys.argv) > 2 else 400

curves = {}
for alg in ("fp", "fpira", "cfr_plus", "cfr_ira"):
    res = run(ExperimentConfig(domain, alg, epsilon=-1.0, max_iterations=budget, check_every=20))
    curves[alg] = {row.iteration: row.exploitability_sum for row in res.trace}
    print(f"{alg:>8}: final exploitability {res.trace.final.exploitability_sum:.4f}, "
          f"{res.trace.final.abstract_infoset_count}/{res.n_infosets} sets, {res.trace.final.wall_seconds:.1f}s")

# %%
marks = sorted(set(curves["cfr_plus"]) & set(curves["fp"]))
print("\niteration " + " ".join(f"{a:>9}" for a in curves))
for t in marks[:: max(1, len(marks) // 10)]:
    print(f"{t:9d} " + " ".join(f"{curves[a].get(t, float('nan')):9.4f}" for a in curves))
