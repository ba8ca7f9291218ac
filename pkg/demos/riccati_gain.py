"""
Riccati gain for a crowd of particles
=====================================

The optimal feedback for ``N`` controlled particles comes from a
``2N x 2N`` matrix Riccati equation.  Solving it without exploiting any
structure shows that only the velocity block survives, and that block is
a multiple of the identity whose scalar obeys a closed-form law.
"""
import numpy as np

from crowdctl import ControlProblem, closed_form_y, solve_matrix_riccati

###############################################################################
# Backward solve for three particles.
problem = ControlProblem(alpha=1e-2, horizon_T=1.0, n_particles=3)
sol = solve_matrix_riccati(problem, steps=2000)

K0 = sol.full(0)
np.set_printoptions(precision=4, suppress=True)
print("K(0) =")
print(K0)

###############################################################################
# The velocity block against ``d(t) Id`` with ``d = y / N``.
d = closed_form_y(sol.time_grid, problem) / problem.n_particles
dev = np.abs(sol.K22 - d[:, None, None] * np.eye(3)).max()
print(f"max |K22 - d Id| over time: {dev:.2e}")

###############################################################################
# The scalar gain for a few weights: it saturates at sqrt(alpha)/2.
for alpha in (1.0, 1e-2, 1e-4):
    p = ControlProblem(alpha)
    print(f"alpha={alpha:g}: y(0)={closed_form_y(0.0, p):.6f}  bound={p.gain_bound:.6f}")
