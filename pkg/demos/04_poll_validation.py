"""How volatile is simulated red support compared with a decade of monthly polls?

Uses the built-in reference row unless a poll CSV (period,red_support,blue_support)
is given.

    python demos/04_poll_validation.py [runs] [polls.csv]
"""
import sys

from oligo import ModelConfig, RunSpec, run_many
from oligo.experiments import GALLUP_REFERENCE, compare_to_polls, validation_metrics
from oligo.io import ingest_polls
from oligo.rng import derive_seed

runs = int(sys.argv[1]) if len(sys.argv) > 1 else 20
polls = ingest_polls(sys.argv[2]) if len(sys.argv) > 2 else GALLUP_REFERENCE

for variant in ("IIM", "PIMM"):
    specs = [RunSpec(ModelConfig(variant=variant), 420, 300, derive_seed(0, 0, r)) for r in range(runs)]
    metrics = [validation_metrics(t, 120) for t in run_many(specs)]
    print(f"\n{variant}: {runs} windows of 120 cycles")
    for m, c in compare_to_polls(metrics, polls).items():
        print(f"  {m:16s} model {c.model_mean:7.2f} (sd {c.model_sd:5.2f})  polls {c.poll_mean:6.2f}"
              f"  d {c.cohens_d:6.2f}")
