"""
How fast does the error shrink?
===============================

A small replicated study: the median estimation error over a grid of
horizons, and the slope of log(error) against log(T). A slope near -1/2
is the square-root rate.
"""

import numpy as np

from langevin_care import NoiseSpec, OUModel
from langevin_care.montecarlo import run_study, summarize

model = OUModel(np.eye(1), NoiseSpec.fractional([0.65]))
rows = run_study(model, t=1.0, T_grid=[250, 1000, 4000], n_reps=30, base_seed=3)
summary = summarize(rows)

for T, med, zc in zip(summary["T_grid"], summary["median_error"], summary["zero_convention_count"]):
    print(f"T={T:>7.0f}  median |theta_hat - theta| = {med:.4f}  zero-convention fallbacks: {zc}")
print("log-log slope:", round(summary["slope"], 3))
