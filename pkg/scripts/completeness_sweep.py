"""Propositional completeness sweep.

Enumerates every propositional formula up to a size bound over a small
atom set, runs the automation on `==> formula`, and compares the outcome
against a truth-table oracle.  Reports throughput and any disagreements
(there should be none).

    python3 scripts/completeness_sweep.py --max-size 6 --limit 8000
"""

import argparse
import sys
import time
from dataclasses import dataclass
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from psdbg.calculus import ProofTree, auto_strategy
from psdbg.fol import Sequent, Signature, render_formula

from oracles import enumerate_prop_formulas, truth_table_valid


@dataclass
class SweepConfig:
    atoms: tuple[str, ...] = ("p", "q", "r")
    max_size: int = 6
    limit: int = 8000  # 0 = no cap
    budget: int = 10000


def sweep(cfg: SweepConfig) -> int:
    sig = Signature()
    for a in cfg.atoms:
        sig.declare_pred(a, 0)

    total = valid = closed = disagreements = 0
    t0 = time.time()
    for f in enumerate_prop_formulas(list(cfg.atoms), cfg.max_size):
        if cfg.limit and total >= cfg.limit:
            break
        total += 1
        seq = Sequent((), (f,))
        tree = ProofTree(seq, sig.clone())
        auto_strategy(tree, tree.root_id, budget=cfg.budget, inst_limit=0)
        got = tree.node(tree.root_id).closed
        want = truth_table_valid(seq)
        valid += want
        closed += got
        if got != want:
            disagreements += 1
            print(f"DISAGREEMENT on {render_formula(f)}: "
                  f"auto={'closed' if got else 'open'} oracle={want}")
    elapsed = time.time() - t0

    rate = total / elapsed if elapsed else float("inf")
    print(f"{total} formulas over {cfg.atoms}, size <= {cfg.max_size}")
    print(f"  truth-table valid : {valid}")
    print(f"  closed by auto    : {closed}")
    print(f"  disagreements     : {disagreements}")
    print(f"  {elapsed:.2f}s ({rate:.0f} formulas/s)")
    return 1 if disagreements else 0


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--atoms", default="p,q,r")
    ap.add_argument("--max-size", type=int, default=6)
    ap.add_argument("--limit", type=int, default=8000)
    ap.add_argument("--budget", type=int, default=10000)
    args = ap.parse_args()
    cfg = SweepConfig(
        atoms=tuple(a for a in args.atoms.split(",") if a),
        max_size=args.max_size,
        limit=args.limit,
        budget=args.budget,
    )
    return sweep(cfg)


if __name__ == "__main__":
    sys.exit(main())
