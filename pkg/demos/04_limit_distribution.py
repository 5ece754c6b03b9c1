"""
Checking the Gaussian limit of the estimator
============================================

The covariance of sqrt(T)(theta_hat - theta) is predicted by pushing the
limit covariance of the empirical cross-covariance through two linear maps.
Here the prediction is compared with a Monte Carlo sample.
"""

import numpy as np

from langevin_care import NoiseSpec, OUModel, mc_clt_check

model = OUModel(np.eye(1), NoiseSpec.brownian(1))
rep = mc_clt_check(model, t=1.0, T=2000.0, n_reps=100, seed=4)

print("predicted variance:", rep.predicted_cov[0, 0])
print("empirical variance:", rep.empirical_cov[0, 0])
print("relative discrepancy:", round(rep.rel_frobenius, 3))
print("z-score of the mean:", rep.mean_z_scores)
