"""Calibration checks on the base model, then the salience and donation cross-correlations.

    python demos/02_verification.py [runs]
"""
import sys

from oligo import stats
from oligo.experiments import named_experiment, run_experiment, verification_battery

runs = int(sys.argv[1]) if len(sys.argv) > 1 else 30
table = run_experiment(named_experiment("base", runs=runs), keep_traces=True)

print(f"base model, {runs} runs\n")
for name, res in verification_battery(table).items():
    lo, hi = res.confidence_interval
    print(f"{name:26s} estimate {res.estimate:9.3f}  p {res.p_value:.2g}  CI ({lo:.2f}, {hi:.2f})")

traces = table.condition().traces
sal = [t.measurement("mean_voter_salience") for t in traces]
for label, field in (("tax", "tax_rate"), ("donation size", "mean_donation_size")):
    cc = stats.mean_cross_correlation([t.measurement(field) for t in traces], sal)
    row = "  ".join(f"{lag:+d}:{v:.2f}" for lag, v in zip(cc.lags, cc.mean))
    print(f"\n{label} vs salience by lag (negative lag: {label} leads)\n  {row}")
