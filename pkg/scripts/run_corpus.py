"""Decide every curated corpus case and print verdicts with timings."""
import argparse
import json
import time
from dataclasses import asdict, dataclass
from pathlib import Path

from hopda.reduce import Budgets, decide_diagonal
from hopda.textio import load_machine

CORPUS = Path(__file__).resolve().parent.parent / "corpus"

CASES = [
    ("finite", "c1,c2", "bounded"),
    ("anbn", "c1,c2", "unbounded"),
    ("star_union", "c1,c2", "bounded"),
    ("star_union", "c1", "unbounded"),
    ("star_union", "c2", "unbounded"),
    ("exp2", "c1", "unbounded"),
    ("motivating", "c1,c2", "unbounded"),
    ("mixed", "c1,c2", "bounded"),
    ("mixed", "c1", "unbounded"),
    ("fork", "c1,c2", "unbounded"),
    ("loop0", "c1,c2", "unbounded"),
    ("empty", "c1", "bounded"),
]


@dataclass
class Config:
    saturation: int = 200_000
    annotation: int = 1_000_000
    json: bool = False


def main(cfg: Config):
    budgets = Budgets(saturation=cfg.saturation, annotation=cfg.annotation)
    rows, wrong = [], 0
    for name, chars, expected in CASES:
        t0 = time.perf_counter()
        v = decide_diagonal(load_machine(CORPUS / f"{name}.hopda"), chars.split(","), budgets)
        dt = time.perf_counter() - t0
        wrong += v.verdict != expected
        rows.append({"machine": name, "chars": chars, "expected": expected, "verdict": v.verdict,
                     "seconds": round(dt, 2), "levels": [(l["order"], l["controls"], l["rules"]) for l in v.levels]})
    if cfg.json:
        print(json.dumps({"config": asdict(cfg), "rows": rows}, indent=2))
    else:
        for r in rows:
            mark = "ok " if r["verdict"] == r["expected"] else "BAD"
            print(f"{mark} {r['machine']:<11} {{{r['chars']}}}  {r['verdict']:<9} {r['seconds']:>6.2f}s  {r['levels']}")
        print(f"{len(rows) - wrong}/{len(rows)} correct")
    return wrong


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--saturation", type=int, default=Config.saturation)
    ap.add_argument("--annotation", type=int, default=Config.annotation)
    ap.add_argument("--json", action="store_true")
    raise SystemExit(1 if main(Config(**vars(ap.parse_args()))) else 0)
