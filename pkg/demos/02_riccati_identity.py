"""
The Riccati identity with exact covariances
===========================================

With the true stationary covariance gamma in place of its estimate, the
coefficients (B, C, D) make the true drift an exact root of
B^T X + X B - X C X + D = 0. This isolates numerical error from sampling error.
"""

import numpy as np

from langevin_care import (
    NoiseSpec, build_coefficients, solve_care, theoretical_gamma, variance_fn,
)

theta = np.array([[2.0, 0.5], [0.5, 1.0]])
vfn = variance_fn(NoiseSpec.fractional([0.5, 0.7]))

lags = np.arange(0, 2.0001, 1e-3)
gamma = theoretical_gamma(theta, vfn, lags)
print("gamma(0) =\n", gamma.at(0.0))

for t in (0.5, 1.0, 2.0):
    coef = build_coefficients(gamma, vfn, t)
    res = np.linalg.norm(coef.residual(theta), 2)
    sol = solve_care(coef)
    print(f"t={t}: residual at true theta {res:.1e}, "
          f"solver error {np.abs(sol.theta_hat - theta).max():.1e}, "
          f"max Re eig(B - C theta_hat) {np.linalg.eigvals(sol.phi).real.max():.3f}")
