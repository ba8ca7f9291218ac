"""
Decay of the controlled particle system
=======================================

250 particles start uniformly on [0, 1] with velocities
``exp(x sin 2 pi x)`` plus a little uniform noise.  The Riccati feedback
drives the velocities to zero and the Lyapunov functional stays below
its exponential bound.
"""
import numpy as np

from crowdctl import run_particle_experiment

results = {}
for alpha in (1e-2, 1e-3, 1e-4):
    series, traj = run_particle_experiment(alpha, n_particles=250, seed=42)
    results[alpha] = series
    print(f"alpha={alpha:g}: {len(traj.times)} accepted steps, "
          f"{traj.n_rejected} rejected, L(0.5)/L(0) = {series.value_at(0.5) / series.lyapunov[0]:.3e}, "
          f"bound holds: {series.bound_violation(1e-6) <= 0}")

###############################################################################
# Plot when matplotlib is around.
try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    fig, ax = plt.subplots()
    for (alpha, s), colour in zip(results.items(), ("black", "blue", "red")):
        ax.semilogy(s.times, s.lyapunov, "x", color=colour, markersize=3, label=f"alpha={alpha:g}")
        ax.semilogy(s.times, s.bound, "-", color=colour)
    ax.set_xlabel("t")
    ax.legend()
    fig.savefig("particle_decay.png", dpi=120)
    print("wrote particle_decay.png")
