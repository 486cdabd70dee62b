"""Distribution of exact-vs-coarse gaps on random relaxed schedules.

Prints the worst |coarse - exact| per schedule as a coarse histogram so the
gap can be compared with the additive budget L.
"""

import argparse
from collections import Counter

from teichlimit.coarse import error_budget
from teichlimit.verify import cross_validate, random_relaxed_schedules


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--count", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    L = float(error_budget().L)
    hist = Counter()
    worst = 0.0
    for sch in random_relaxed_schedules(args.seed, args.count):
        gap = float(cross_validate([sch]).notes["worst_gap"])
        worst = max(worst, gap)
        hist[min(int(gap / 0.02), 10)] += 1
    print(f"L = {L:.6f}, worst gap over {args.count} schedules = {worst:.6f}")
    for b in sorted(hist):
        label = f">= {0.02 * b:.2f}" if b == 10 else f"[{0.02 * b:.2f}, {0.02 * (b + 1):.2f})"
        print(f"{label:>14}  {'#' * max(1, hist[b] * 60 // args.count)} {hist[b]}")


if __name__ == "__main__":
    main()
