"""Exhaustive check of (k+1)^score >= count over small decomposition trees."""
import argparse
from dataclasses import dataclass

from hopda.scores import all_trees, score_bound_holds, treescore


@dataclass
class Config:
    max_nodes: int = 9
    max_degree: int = 3


def main(cfg: Config):
    n = bad = 0
    worst = {}
    for t in all_trees(cfg.max_nodes, cfg.max_degree, labels=(None, "c1", "c2")):
        n += 1
        for c in ("c1", "c2"):
            if not score_bound_holds(t, c, cfg.max_degree):
                bad += 1
                print("violation:", t)
            k = t.count(c)
            worst[k] = min(worst.get(k, 99), treescore(t, c))
    print(f"{n} trees, {bad} violations")
    for k in sorted(worst):
        print(f"  count {k}: minimum score {worst[k]}")
    return bad


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-nodes", type=int, default=Config.max_nodes)
    ap.add_argument("--max-degree", type=int, default=Config.max_degree)
    raise SystemExit(1 if main(Config(**vars(ap.parse_args()))) else 0)
