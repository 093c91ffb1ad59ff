"""Command line: ``irasolve solve ...`` for one run, ``irasolve bench --config batch.json`` for many."""

from __future__ import annotations

import argparse
import json
import sys

from .bench import ALGORITHMS, ConfigError, ExperimentConfig, run, run_batch, word_count
from .game import GameError

EXIT_OK, EXIT_USAGE, EXIT_NOT_CONVERGED = 0, 2, 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="irasolve")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve one game instance and write its trace")
    s.add_argument("--domain", required=True, help="P<b><r><c>, GS<n>, GP<x> or a test game name")
    s.add_argument("--alg", required=True, choices=ALGORITHMS)
    s.add_argument("--eps", type=float, default=0.05)
    s.add_argument("--kb", type=int, default=None)
    s.add_argument("--kh", type=int, default=None)
    s.add_argument("--delay", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--max-iterations", "--max-iter", dest="max_iter", type=int, default=100_000)
    s.add_argument("--check-every", type=int, default=1)
    s.add_argument("--graph", default=None, help="edge list file for graph pursuit")
    s.add_argument("--out", default=None, help="CSV trace path")

    b = sub.add_parser("bench", help="run a JSON batch of configurations")
    b.add_argument("--config", required=True)
    b.add_argument("--workers", type=int, default=None,
                   help="parallel runs (default: $IRASOLVE_WORKERS or 1)")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "solve":
            cfg = ExperimentConfig(
                domain=args.domain, algorithm=args.alg, epsilon=args.eps, k_b=args.kb, k_h=args.kh,
                delay=args.delay, seed=args.seed, max_iterations=args.max_iter,
                check_every=args.check_every, out=args.out, graph_file=args.graph)
            r = run(cfg)
            summary = {"converged": r.converged, "iterations": r.trace.final.iteration,
                       "exploitability": r.trace.final.exploitability_sum,
                       "abstract_infosets": r.trace.final.abstract_infoset_count,
                       "original_infosets": r.n_infosets, "words": word_count(r)}
            print(json.dumps(summary))
            return EXIT_OK if r.converged else EXIT_NOT_CONVERGED
        index = run_batch(args.config, args.workers)
        print(json.dumps({"runs": len(index["runs"]),
                          "converged": sum(r["converged"] for r in index["runs"])}))
        return EXIT_OK if all(r["converged"] for r in index["runs"]) else EXIT_NOT_CONVERGED
    except (ConfigError, GameError, FileNotFoundError) as e:
        print(f"irasolve: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
