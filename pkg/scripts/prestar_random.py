"""pre* on random alternating systems, checked against the bounded run oracle."""
import argparse
import random
import time
from dataclasses import dataclass

from hopda.hostack import stack_size
from hopda.randgen import random_alternating, random_automaton, random_stack
from hopda.saturate import member_oracle, prestar
from hopda.stackaut import ConfigSet


@dataclass
class Config:
    systems: int = 100
    samples: int = 40
    bound: int = 12
    confirm_bound: int = 20
    max_size: int = 4
    seed: int = 0


def main(cfg: Config):
    missed = flagged = confirmed = 0
    t0 = time.perf_counter()
    for i in range(cfg.systems):
        rng = random.Random(cfg.seed + i)
        order = rng.choice([1, 2])
        S = random_alternating(rng, order, n_controls=rng.randint(2, 3), n_rules=rng.randint(4, 9),
                               n_alt=rng.randint(0, 2))
        aut = random_automaton(rng, order, S.alphabet, n_states=rng.randint(2, 3))
        A = ConfigSet(aut.body, {q: (aut.finals if rng.random() < 0.4 else frozenset()) for q in S.controls})
        P = prestar(S, A)
        for _ in range(cfg.samples):
            q = rng.choice(S.controls)
            s = random_stack(rng, order, S.alphabet, 2, 1 if rng.random() < 0.7 else 0)
            if stack_size(s) > cfg.max_size:
                continue
            if member_oracle(S, A, (q, s), cfg.bound) == "yes":
                confirmed += 1
                if not P.accepts(q, s):
                    missed += 1
                    print("missed:", cfg.seed + i, q, s)
            elif P.accepts(q, s) and member_oracle(S, A, (q, s), cfg.confirm_bound) != "yes":
                flagged += 1
                print("flag:", cfg.seed + i, q, s)
    print(f"{cfg.systems} systems: {confirmed} confirmed, {missed} missed, {flagged} flagged "
          f"in {time.perf_counter() - t0:.1f}s")
    return missed + flagged


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    for k, v in vars(Config()).items():
        ap.add_argument(f"--{k.replace('_', '-')}", type=type(v), default=v)
    raise SystemExit(1 if main(Config(**vars(ap.parse_args()))) else 0)
