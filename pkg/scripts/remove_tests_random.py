"""Test removal on random machines whose test actually matters."""
import argparse
import random
from dataclasses import dataclass, replace

from hopda.machine import enumerate_parikh, intermediate_controls, machine_stats
from hopda.randgen import random_machine
from hopda.reduce import remove_tests


@dataclass
class Config:
    machines: int = 50
    depth: int = 8
    cap: int = 3
    max_seeds: int = 5000
    verbose: bool = False


def parikh(M, cfg):
    return enumerate_parikh(M, cfg.depth, cfg.cap, free=intermediate_controls(M))


def main(cfg: Config):
    checked = diffs = 0
    for seed in range(cfg.max_seeds):
        if checked == cfg.machines:
            break
        rng = random.Random(seed)
        M = random_machine(rng, rng.choice([0, 1, 2, 2]), n_controls=rng.choice([3, 4]),
                           n_rules=rng.randint(8, 14), with_test=True, branches=rng.choice([1, 2]),
                           acceptance=rng.choice(["control", "control", "empty"]))
        a = parikh(M, cfg)
        ignored = M.with_(rules=tuple(replace(r, tests=()) for r in M.rules), tests={})
        deleted = M.with_(rules=tuple(r for r in M.rules if not r.tests), tests={})
        if not a or (a == parikh(ignored, cfg) and a == parikh(deleted, cfg)):
            continue
        checked += 1
        R = remove_tests(M)
        b = parikh(R, cfg)
        if cfg.verbose:
            print(seed, M.order, machine_stats(M)["rules"], "->", machine_stats(R)["rules"], a == b)
        if a != b:
            diffs += 1
            print("difference at seed", seed, a, b)
    print(f"{checked} machines, {diffs} differences")
    return diffs


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--machines", type=int, default=Config.machines)
    ap.add_argument("--depth", type=int, default=Config.depth)
    ap.add_argument("--cap", type=int, default=Config.cap)
    ap.add_argument("-v", "--verbose", action="store_true")
    raise SystemExit(1 if main(Config(**vars(ap.parse_args()))) else 0)
