"""One base run: watch the tax rate, party positions and voter salience move together.

    python demos/01_single_run.py [seed]
"""
import sys

import numpy as np

from oligo import ModelConfig, RunSpec, run

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
trace = run(RunSpec(ModelConfig(), total_cycles=1300, warmup_cycles=300, seed=seed))

print(f"seed {seed}: {len(trace)} cycles, the first 300 discarded as warm-up\n")
print("cycle   tax   red(ideo,olig)    blue(ideo,olig)   salience  red vote")
for c in range(300, 1300, 100):
    print(f"{c:5d}  {trace.column('tax_rate')[c]:.3f}  "
          f"({trace.column('red_ideo')[c]:6.1f},{trace.column('red_olig')[c]:6.1f})  "
          f"({trace.column('blue_ideo')[c]:6.1f},{trace.column('blue_olig')[c]:6.1f})  "
          f"{trace.column('mean_voter_salience')[c]:.3f}    {trace.column('red_vote_pct')[c]:.0f}%")

tax = trace.measurement("tax_rate")
print(f"\nmean tax {tax.mean():.3f}; the cap is 0.5, so oligarchs hold it well below that")
print(f"mean party olig {trace.measurement('mean_party_olig').mean():.1f} "
      f"(voters all sit at -100 on this axis)")
gap = np.abs(trace.measurement("red_olig") - trace.measurement("blue_olig")).mean()
print(f"mean distance between the parties on the olig axis {gap:.1f}")
