"""How large does the abstraction get before the strategies are good enough?

Runs CFR+IRA with 10 bound samples and 90 heuristic samples per iteration
on three mid-sized games and reports the fraction of the original
information sets the abstraction holds when exploitability reaches 0.05,
together with the memory breakdown.  Takes a few minutes on one core.
"""
# %%
import sys

from irasolve.bench import ExperimentConfig, aggregate, run, word_count

domains = sys.argv[1:] or ["GS4", "GP4", "GS5"]
for name in domains:
    results = [run(ExperimentConfig(name, "cfr_ira", epsilon=0.05, seed=s, max_iterations=4000, check_every=20))
               for s in range(3)]
    fracs = [r.final_fraction for r in results]
    print(f"{name}: converged {sum(r.converged for r in results)}/3, "
          f"abstraction {100 * sum(fracs) / len(fracs):.1f}% of {results[0].n_infosets} sets")
    print("   words at the end of seed 0:", word_count(results[0]))
    agg = aggregate(results, columns=["abstract_infoset_count"])
    for thr, mean in list(zip(agg["thresholds"], agg["abstract_infoset_count"]["mean"]))[::5]:
        print(f"   exploitability {thr:8.4f}: {mean:8.1f} sets on average")
