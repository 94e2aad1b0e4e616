"""Exact vs large-horizon network VAoI as the horizon grows."""
import argparse
import logging
from pathlib import Path

from vaoi_ring.experiments import run_horizon_error, spec_from_config

ROOT = Path(__file__).resolve().parents[1]

parser = argparse.ArgumentParser()
parser.add_argument("--config", default=ROOT / "configs" / "paper_defaults.toml")
parser.add_argument("--out", default="results/horizon_error")
args = parser.parse_args()
logging.basicConfig(level=logging.INFO, format="%(message)s")

rows = run_horizon_error(spec_from_config("horizon-error", args.config, args.out))
print(f"{'T':>6} {'T/N':>6} {'exact':>8} {'approx':>8} {'error %':>8}")
for T, exact, approx, err, _, _, ratio in rows:
    print(f"{T:6d} {ratio:6.1f} {exact:8.3f} {approx:8.3f} {err:8.2f}")
