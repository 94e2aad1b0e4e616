"""Solve the default scenario and print the per-battery transmit thresholds."""
import argparse
import math
from pathlib import Path

from vaoi_ring.experiments import run_structure, spec_from_config

ROOT = Path(__file__).resolve().parents[1]

parser = argparse.ArgumentParser()
parser.add_argument("--config", default=ROOT / "configs" / "paper_defaults.toml")
parser.add_argument("--out", default="results/structure")
args = parser.parse_args()

out = run_structure(spec_from_config("structure", args.config, args.out))
res, thr = out["result"], out["thresholds"]
print(f"average VAoI at the CS: {res.average_cost:.6f} ({res.iterations_used} iterations)")
print(f"threshold policy: {thr.is_threshold}, non-increasing in battery: {thr.non_increasing_in_battery}")
for b, t in enumerate(thr.values):
    print(f"  b={b:2d}  transmit from delta >= {'never' if t == math.inf else t}")
