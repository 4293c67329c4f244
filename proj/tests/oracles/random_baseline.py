#!/usr/bin/env python3
"""Brute-force random-assignment baseline for a scenario file.

Each episode samples n beams without replacement, places each at a uniformly
drawn (group, slot) cell with the start pulled back so the beam fits, and
counts beams that violate no constraint against any other placed beam.
Prints the mean count over all episodes.
"""

import argparse
import json
import random
import statistics


def violates(a, b, kind):
    (ga, sa, wa), (gb, sb, wb) = a, b
    if not (sa < sb + wb and sb < sa + wa):
        return False
    if kind == "intra":
        return ga == gb
    return ga % 2 == gb % 2


def episode(rng, beams, pairs, n, n_fg, n_fs):
    chosen = rng.sample(beams, n)
    placed = {}
    for b in chosen:
        g = rng.randrange(n_fg)
        s = rng.randrange(n_fs)
        placed[b["id"]] = (g, min(s, n_fs - b["bw"]), b["bw"])
    bad = set()
    for kind, plist in pairs.items():
        for i, j in plist:
            if i in placed and j in placed and violates(placed[i], placed[j], kind):
                bad.add(i)
                bad.add(j)
    return len(placed) - len(bad)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("scenario")
    ap.add_argument("--beams", type=int, default=100)
    ap.add_argument("--episodes", type=int, default=4000)
    ap.add_argument("--seed", type=int, default=12345)
    args = ap.parse_args()

    with open(args.scenario) as f:
        sc = json.load(f)
    rng = random.Random(args.seed)
    pairs = {"intra": [tuple(p) for p in sc["intra"]], "inter": [tuple(p) for p in sc["inter"]]}
    counts = [episode(rng, sc["beams"], pairs, args.beams, sc["n_fg"], sc["n_fs"]) for _ in range(args.episodes)]
    print(f"{statistics.fmean(counts):.6f} {statistics.pstdev(counts):.6f}")


if __name__ == "__main__":
    main()
