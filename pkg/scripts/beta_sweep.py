"""Average network VAoI of optimal, greedy and RS policies over the energy grid."""
import argparse
import logging
from pathlib import Path

from vaoi_ring.experiments import run_beta_sweep, spec_from_config

ROOT = Path(__file__).resolve().parents[1]

parser = argparse.ArgumentParser()
parser.add_argument("--config", default=ROOT / "configs" / "paper_defaults.toml")
parser.add_argument("--out", default="results/beta_sweep")
parser.add_argument("--workers", type=int, default=1)
parser.add_argument("--iterations", type=int, help="override sim.iterations (e.g. 8000)")
args = parser.parse_args()
logging.basicConfig(level=logging.INFO, format="%(message)s")

spec = spec_from_config("beta-sweep", args.config, args.out, workers=args.workers)
if args.iterations:
    spec.params = spec.params.replace(mc_iterations=args.iterations)
rows = run_beta_sweep(spec)

print(f"{'beta':>5} " + " ".join(f"{name:>10}" for name in dict.fromkeys(r[0] for r in rows)))
for beta in spec.betas:
    print(f"{beta:5.2f} " + " ".join(f"{r[4]:10.3f}" for r in rows if r[1] == beta))
