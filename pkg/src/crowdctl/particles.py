"""Controlled particle system ``x' = v, v' = -(2/alpha) y(t) v``.

The gain ``y`` is taken from its closed form and held constant over each
accepted integrator step, and the system is advanced with the adaptive
Bogacki-Shampine pair from :mod:`crowdctl.rk23`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rk23
from .errors import DomainError
from .riccati import ControlProblem, ControlSchedule, closed_form_y, decay_rate

__all__ = [
    "ParticleEnsemble",
    "InitialConditionSpec",
    "DecaySeries",
    "Trajectory",
    "sample_initial_conditions",
    "rhs",
    "integrate",
    "lyapunov_particle",
    "run_particle_experiment",
]

# Largest (2/alpha) y h for which the propagated third-order update factor
# 1 + z + z^2/2 + z^3/6 of the pair stays in (0, 1); keeps the sign of every
# velocity and makes |v| decrease even once |v| drops below atol.
STEP_DAMPING_CAP = 1.5


@dataclass(frozen=True)
class ParticleEnsemble:
    """Positions ``x`` and velocities ``v`` of ``N`` particles at time ``t``."""

    x: np.ndarray
    v: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        x = np.array(self.x, dtype=float).ravel()
        v = np.array(self.v, dtype=float).ravel()
        if x.shape != v.shape or x.size < 1:
            raise DomainError(f"x and v must have equal non-zero length, got {x.size} and {v.size}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
            raise DomainError("particle states must be finite")
        x.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "v", v)

    @property
    def n(self) -> int:
        return self.x.size


@dataclass(frozen=True)
class InitialConditionSpec:
    """Random initial data: uniform positions on [0, 1], smooth velocity plus noise.

    ``velocity_form`` selects ``"additive"`` (``exp(x sin 2 pi x) + xi``) or
    ``"exponent"`` (``exp(x sin 2 pi x + xi)``).
    """

    n_particles: int = 250
    seed: int = 42
    noise_low: float = 0.0
    noise_high: float = 0.2
    velocity_form: str = "additive"

    def __post_init__(self):
        if self.n_particles < 1:
            raise DomainError("n_particles must be >= 1")
        if self.noise_low > self.noise_high:
            raise DomainError("noise_low must not exceed noise_high")
        if self.velocity_form not in ("additive", "exponent"):
            raise DomainError(f"unknown velocity_form {self.velocity_form!r}")


def initial_velocity_profile(x):
    """Noise-free initial velocity ``exp(x sin(2 pi x))``."""
    x = np.asarray(x, dtype=float)
    return np.exp(x * np.sin(2.0 * np.pi * x))


def sample_initial_conditions(spec: InitialConditionSpec) -> ParticleEnsemble:
    rng = np.random.default_rng(spec.seed)
    x = rng.uniform(0.0, 1.0, spec.n_particles)
    xi = rng.uniform(spec.noise_low, spec.noise_high, spec.n_particles)
    g = x * np.sin(2.0 * np.pi * x)
    if spec.velocity_form == "additive":
        v = np.exp(g) + xi
    else:
        v = np.exp(g + xi)
    return ParticleEnsemble(x, v, 0.0)


def rhs(ensemble: ParticleEnsemble, y: float, alpha: float):
    """Time derivatives ``(dx, dv)`` of the controlled system at gain ``y``."""
    if y < 0:
        raise DomainError(f"gain must be non-negative, got {y}")
    return ensemble.v.copy(), -(2.0 / alpha) * y * ensemble.v


def lyapunov_particle(ensemble: ParticleEnsemble, y: float) -> float:
    """``L = (y/N) sum_i v_i^2``, i.e. ``w^T K w`` for the Riccati solution ``K``."""
    if y < 0:
        raise DomainError(f"gain must be non-negative, got {y}")
    return float(y * np.dot(ensemble.v, ensemble.v) / ensemble.n)


@dataclass(frozen=True)
class Trajectory:
    """Particle states on the accepted-step grid of an adaptive run.

    Attributes
    ----------
    times : ndarray, shape (nt,)
    x, v : ndarray, shape (nt, N)
    step_gains : ndarray, shape (nt - 1,)
        Gain held constant over each accepted step.
    schedule : ControlSchedule
        Exact gain and midpoint decay rate on ``times``.
    output_index : ndarray of int
        Indices into ``times`` of the requested output times.
    n_rejected : int
    """

    times: np.ndarray
    x: np.ndarray
    v: np.ndarray
    step_gains: np.ndarray
    schedule: ControlSchedule
    output_index: np.ndarray
    n_rejected: int

    def __len__(self):
        return len(self.times)

    def ensemble(self, k: int) -> ParticleEnsemble:
        return ParticleEnsemble(self.x[k], self.v[k], float(self.times[k]))

    def at_outputs(self):
        return [self.ensemble(k) for k in self.output_index]


def integrate(ensemble: ParticleEnsemble, problem: ControlProblem, abs_tol: float = 1e-6,
              rel_tol: float = 1e-6, output_times=None, gain_sampling: str = "midpoint") -> Trajectory:
    """Advance the ensemble from ``ensemble.t`` to ``T``.

    Parameters
    ----------
    output_times : array_like, optional
        Times in ``[t, T]`` on which accepted steps must land.
    gain_sampling : {"midpoint", "left"}
        Where in each step the closed-form gain is sampled before being
        held constant.  ``"midpoint"`` matches the midpoint rule used for
        the decay rate, so the discrete damping equals ``exp(-r)`` on the
        same grid.
    """
    if abs_tol <= 0 or rel_tol <= 0:
        raise DomainError("tolerances must be positive")
    if gain_sampling not in ("midpoint", "left"):
        raise DomainError(f"unknown gain_sampling {gain_sampling!r}")
    T = problem.horizon_T
    t0 = float(ensemble.t)
    if not 0 <= t0 < T:
        raise DomainError(f"start time {t0} outside [0, {T})")
    outs = np.array([] if output_times is None else output_times, dtype=float)
    if outs.size and (outs.min() < t0 or outs.max() > T * (1 + 1e-12)):
        raise DomainError(f"output times must lie in [{t0}, {T}]")

    n = ensemble.n
    rate = 2.0 / problem.alpha
    held = {"y": 0.0}
    step_gain = {}

    def freeze(t, h):
        s = t + 0.5 * h if gain_sampling == "midpoint" else t
        held["y"] = closed_form_y(min(s, T), problem)
        step_gain[t] = held["y"]

    def f(t, w):
        dw = np.empty_like(w)
        dw[:n] = w[n:]
        dw[n:] = -rate * held["y"] * w[n:]
        return dw

    def cap(t, w):
        y = closed_form_y(t, problem)
        c = rate * y
        h = np.inf if c == 0 else STEP_DAMPING_CAP / c
        # holding the gain constant is a midpoint rule for r, invisible to
        # the embedded estimate; bound its error rate |y''| h^3 / 12 |v|
        vmax = float(np.max(np.abs(w[n:])))
        y2 = abs(2.0 * rate * y * (-0.5 + rate * y * y))
        if vmax > 0 and y2 > 0:
            h = min(h, (12.0 * (abs_tol + rel_tol * vmax) / (rate * y2 * vmax)) ** (1.0 / 3.0))
        return h

    w0 = np.concatenate([ensemble.x, ensemble.v])
    ts, ws, n_rej = rk23.solve(f, (t0, T), w0, atol=abs_tol, rtol=rel_tol, t_eval=outs,
                               max_step=cap, freeze=freeze)
    gains = np.array([step_gain[t] for t in ts[:-1]])
    y_grid = np.atleast_1d(closed_form_y(ts, problem))
    r_grid = decay_rate(ts, problem) if t0 == 0 else decay_rate(ts, problem) - decay_rate([t0], problem)[0]
    schedule = ControlSchedule(ts, y_grid, y_grid / problem.n_particles, r_grid)
    idx = np.array([int(np.argmin(np.abs(ts - s))) for s in outs], dtype=int)
    return Trajectory(ts, ws[:, :n], ws[:, n:], gains, schedule, idx, n_rej)


@dataclass(frozen=True)
class DecaySeries:
    """Lyapunov values next to the bound ``L(0) exp(-r(t))``."""

    times: np.ndarray
    lyapunov: np.ndarray
    bound: np.ndarray
    rate: np.ndarray
    alpha: float = float("nan")

    def __post_init__(self):
        lengths = {len(self.times), len(self.lyapunov), len(self.bound), len(self.rate)}
        if len(lengths) != 1:
            raise DomainError("series columns differ in length")

    def bound_violation(self, rel_slack: float = 0.0, abs_slack: float = 0.0) -> float:
        """Largest ``L - bound*(1 + rel_slack) - abs_slack``; non-positive means the bound holds."""
        excess = self.lyapunov - self.bound * (1.0 + rel_slack) - abs_slack
        return float(np.max(excess))

    def value_at(self, t: float) -> float:
        return float(np.interp(t, self.times, self.lyapunov))


def decay_series_from_trajectory(traj: Trajectory, alpha: float) -> DecaySeries:
    n = traj.v.shape[1]
    L = traj.schedule.y_values * np.einsum("ij,ij->i", traj.v, traj.v) / n
    bound = L[0] * np.exp(-traj.schedule.r_values)
    return DecaySeries(traj.times, L, bound, traj.schedule.r_values, alpha)


def run_particle_experiment(alpha: float = 1e-2, horizon_T: float = 1.0, n_particles: int = 250,
                            seed: int = 42, abs_tol: float = 1e-6, rel_tol: float = 1e-6,
                            noise_low: float = 0.0, noise_high: float = 0.2,
                            velocity_form: str = "additive", gain_sampling: str = "midpoint",
                            initial: ParticleEnsemble | None = None):
    """Particle-scale decay experiment on the integrator's accepted-step grid.

    Returns
    -------
    series : DecaySeries
    trajectory : Trajectory
    """
    problem = ControlProblem(alpha, horizon_T, n_particles)
    if initial is None:
        spec = InitialConditionSpec(n_particles, seed, noise_low, noise_high, velocity_form)
        initial = sample_initial_conditions(spec)
    traj = integrate(initial, problem, abs_tol, rel_tol, gain_sampling=gain_sampling)
    return decay_series_from_trajectory(traj, alpha), traj
