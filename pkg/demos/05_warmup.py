"""Pick a warm-up length from the cross-run mean of oligarch profit.

    python demos/05_warmup.py [runs]
"""
import sys

from oligo import ModelConfig, RunSpec, run_many
from oligo.engine import estimate_warmup
from oligo.rng import derive_seed

runs = int(sys.argv[1]) if len(sys.argv) > 1 else 20
traces = run_many([RunSpec(ModelConfig(), 1300, 0, derive_seed(0, 0, r)) for r in range(runs)])
est = estimate_warmup(traces, "mean_oligarch_profit")
ma = est.moving_average
for c in range(0, 1300, 100):
    print(f"cycle {c:4d}  raw mean {est.cross_run_mean[c]:7.2f}  smoothed {ma[c]:7.2f}")
print(f"\nsuggested warm-up: {est.suggested_cycles} cycles")
print("with few runs this moves a lot between seeds; rerun with more runs to tighten it")
