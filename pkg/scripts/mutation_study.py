"""Which suite catches each single-unit mutation of a certificate."""

import argparse
from collections import Counter
from pathlib import Path

from teichlimit import RunConfig, load_curve, synthesize, verify_certificate
from teichlimit.verify import mutation_corpus

CURVES = Path(__file__).resolve().parents[1] / "curves"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--curve", default="triangle")
    ap.add_argument("--k", type=int, default=25)
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    cert = synthesize(load_curve(CURVES / f"{args.curve}.json"), args.k, RunConfig(K=args.k))
    caught_by = Counter()
    missed = []
    for label, mutant in mutation_corpus(cert, args.count, args.seed):
        failing = verify_certificate(mutant).failing_suites()
        print(f"{label:<24} audit={'pass' if mutant.passed else 'fail':<5} caught by: {', '.join(failing) or '-'}")
        caught_by.update(failing)
        if not failing:
            missed.append(label)
    print("\nsuite hit counts:", dict(caught_by))
    print(f"missed: {len(missed)}")


if __name__ == "__main__":
    main()
