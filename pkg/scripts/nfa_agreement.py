"""Cross-check the SCC diagonal algorithm against the counting oracle on random NFAs."""
import argparse
import random
from collections import Counter
from dataclasses import dataclass

from hopda.base0 import nfa_accepts, nfa_diagonal, nfa_diagonal_oracle, pump_word
from hopda.randgen import random_nfa


@dataclass
class Config:
    n: int = 500
    max_states: int = 6
    max_chars: int = 3
    density: float = 0.3
    pump: int = 5
    seed: int = 0


def main(cfg: Config):
    stats = Counter()
    for i in range(cfg.n):
        rng = random.Random(cfg.seed + i)
        N = random_nfa(rng, rng.randint(1, cfg.max_states), rng.randint(1, cfg.max_chars), cfg.density)
        chars = rng.sample(N.alphabet, rng.randint(1, len(N.alphabet)))
        res = nfa_diagonal(N, chars)
        stats["positive"] += res.holds
        if res.holds != nfa_diagonal_oracle(N, chars):
            stats["disagree"] += 1
            print("disagreement at seed", cfg.seed + i)
        if res.holds:
            for t in range(1, cfg.pump + 1):
                w = pump_word(res, t, N.initial)
                if not nfa_accepts(N, w) or any(w.count(c) < t for c in chars):
                    stats["bad_witness"] += 1
                    break
    print(f"{cfg.n} NFAs: {stats['positive']} unbounded, {stats['disagree']} disagreements, "
          f"{stats['bad_witness']} bad witnesses")
    return stats["disagree"] + stats["bad_witness"]


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    for k, v in vars(Config()).items():
        ap.add_argument(f"--{k.replace('_', '-')}", type=type(v), default=v)
    raise SystemExit(1 if main(Config(**vars(ap.parse_args()))) else 0)
