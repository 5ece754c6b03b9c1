"""
A computable error bound for the perturbed Riccati equation
===========================================================

Perturb the coefficients slightly, re-solve, and compare the actual change
in the solution with the a-priori bound eps_star.
"""

import numpy as np

from langevin_care import (
    CareCoefficients, NoiseSpec, build_coefficients, perturbation_bound, solve_care,
    theoretical_gamma, variance_fn,
)

theta = np.array([[2.0, 0.5], [0.5, 1.0]])
vfn = variance_fn(NoiseSpec.brownian(2))
coef = build_coefficients(theoretical_gamma(theta, vfn, np.linspace(0, 1, 201)), vfn, 1.0)
base = solve_care(coef).theta_hat

rng = np.random.default_rng(5)
for size in (1e-4, 1e-3, 1e-2):
    m = size * rng.standard_normal((3, 2, 2))
    hat = CareCoefficients(coef.b + m[0], coef.c + m[1] @ m[1].T, coef.d + m[2] + m[2].T)
    d = perturbation_bound(coef, hat, base, solve_care(hat).theta_hat)
    bound = "n/a" if d.eps_star is None else f"{d.eps_star:.2e}"
    print(f"size {size:.0e}: actual {d.error:.2e}  bound {bound}  condition holds {d.condition_holds}")
