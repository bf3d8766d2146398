"""The four parameter sweeps, summarised as Spearman correlations with the swept value.

    python demos/03_sweeps.py [runs per condition]
"""
import sys

from oligo.experiments import named_experiment, run_experiment

runs = int(sys.argv[1]) if len(sys.argv) > 1 else 5
cols = ("mean_profit", "mean_donation_size", "mean_tax", "olig_defeats_center")
print(f"{'sweep':28s}" + "".join(f"{c:>22s}" for c in cols))
for name in ("ad_decay_sweep", "memory_sweep", "salience_sweep", "donation_size_sweep"):
    table = run_experiment(named_experiment(name, runs=runs))
    rows = [(name, table.correlations)]
    if name == "salience_sweep":
        # above 0.6 the model collapses onto the olig axis alone
        rows.append(("  salience <= 0.6", table.subset((0.0, 0.2, 0.4, 0.6)).correlations))
    for label, corr in rows:
        print(f"{label:28s}" + "".join(f"{corr.get(c, float('nan')):22.3f}" for c in cols))
