"""Riccati feedback for the linear-quadratic particle control problem.

Each of ``N`` particles obeys ``x' = v, v' = q`` and the joint cost is

    J(q) = int_0^T (1/N) sum_i (v_i^2 / 2 + alpha q_i^2 / 2) dt.

The optimal feedback is ``q = -(2N/alpha) B^T K(t) w`` where ``K`` solves a
2N x 2N matrix Riccati equation backwards from ``K(T) = 0``.  The matrix
solution collapses to ``K = diag(0, d(t) Id)`` and the scalar gain
``y = N d`` obeys

    -y' = 1/2 - (2/alpha) y^2,    y(T) = 0,

with solution ``y(t) = (sqrt(alpha)/2) tanh((T - t)/sqrt(alpha))``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, DomainError

__all__ = [
    "ControlProblem",
    "ControlSchedule",
    "MatrixRiccatiSolution",
    "closed_form_y",
    "exact_rate",
    "solve_scalar_gain",
    "integrate_gain_backward",
    "decay_rate",
    "system_matrices",
    "solve_matrix_riccati",
    "feedback_control",
    "DEFAULT_RICCATI_STEPS",
    "MAX_DENSE_PARTICLES",
]

DEFAULT_RICCATI_STEPS = 10_000
MAX_DENSE_PARTICLES = 64
# slack for round-off when checking t against [0, T]
_T_SLACK = 1e-12


@dataclass(frozen=True)
class ControlProblem:
    """Parameters of the linear-quadratic particle control problem.

    Parameters
    ----------
    alpha : float
        Control cost weight, ``alpha > 0``.
    horizon_T : float
        Terminal time, ``T > 0``.
    n_particles : int
        Number of particles ``N >= 1``.
    """

    alpha: float
    horizon_T: float = 1.0
    n_particles: int = 1

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and self.alpha > 0):
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        if not (np.isfinite(self.horizon_T) and self.horizon_T > 0):
            raise DomainError(f"horizon_T must be positive, got {self.horizon_T}")
        if int(self.n_particles) != self.n_particles or self.n_particles < 1:
            raise DomainError(f"n_particles must be a positive integer, got {self.n_particles}")

    @property
    def sqrt_alpha(self) -> float:
        return float(np.sqrt(self.alpha))

    @property
    def gain_bound(self) -> float:
        """Upper bound ``sqrt(alpha)/2`` of the scalar gain."""
        return 0.5 * self.sqrt_alpha


def _check_times(t, problem):
    t = np.asarray(t, dtype=float)
    T = problem.horizon_T
    if np.any(~np.isfinite(t)) or np.any(t < -_T_SLACK * T) or np.any(t > T * (1 + _T_SLACK)):
        raise DomainError(f"time outside [0, {T}]: {t}")
    return np.clip(t, 0.0, T)


def closed_form_y(t, problem: ControlProblem):
    """Scalar gain ``y(t) = (sqrt(alpha)/2) tanh((T - t)/sqrt(alpha))``.

    Accepts a scalar or an array of times in ``[0, T]``.  The value does
    not depend on the number of particles.
    """
    tt = _check_times(t, problem)
    sa = problem.sqrt_alpha
    y = 0.5 * sa * np.tanh((problem.horizon_T - tt) / sa)
    return float(y) if y.ndim == 0 else y


def _log_cosh(z):
    z = np.abs(z)
    return z + np.log1p(np.exp(-2.0 * z)) - np.log(2.0)


def exact_rate(t, problem: ControlProblem):
    """Closed-form decay rate ``r(t) = int_0^t (2/alpha) y(s) ds``.

    Equals ``log cosh(T/sqrt(alpha)) - log cosh((T - t)/sqrt(alpha))``,
    evaluated in a form that does not overflow for small ``alpha``.
    """
    tt = _check_times(t, problem)
    sa = problem.sqrt_alpha
    T = problem.horizon_T
    r = _log_cosh(T / sa) - _log_cosh((T - tt) / sa)
    r = np.maximum(r, 0.0)
    return float(r) if r.ndim == 0 else r


def _gain_rhs(y, alpha):
    # dy/dt, from -y' = 1/2 - (2/alpha) y^2
    return -0.5 + (2.0 / alpha) * y * y


def _rk4_step(f, y, h):
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate_gain_backward(problem: ControlProblem, grid, steps: int = DEFAULT_RICCATI_STEPS):
    """Backward RK4 integration of the scalar gain ODE onto ``grid``.

    The interval ``[t_k, t_{k+1}]`` is subdivided so that no substep
    exceeds ``T/steps``.

    Returns
    -------
    ndarray
        Gain values at the grid points.
    """
    grid = _check_grid(grid, problem)
    alpha = problem.alpha
    T = problem.horizon_T
    hmax = T / steps
    f = lambda y: _gain_rhs(y, alpha)  # noqa: E731

    out = np.empty_like(grid)
    knots = np.append(grid, T) if grid[-1] < T else grid
    y = 0.0
    vals = np.empty_like(knots)
    vals[-1] = 0.0
    for k in range(len(knots) - 1, 0, -1):
        span = knots[k] - knots[k - 1]
        nsub = max(1, int(np.ceil(span / hmax - 1e-9)))
        h = -span / nsub
        for _ in range(nsub):
            y = _rk4_step(f, y, h)
        vals[k - 1] = y
    out[:] = vals[: len(grid)]
    return out


def _check_grid(grid, problem):
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    if grid.size == 0:
        raise DomainError("empty time grid")
    if np.any(np.diff(grid) <= 0):
        raise DomainError("time grid must be strictly ascending")
    return _check_times(grid, problem)


@dataclass(frozen=True)
class ControlSchedule:
    """Scalar gain, per-particle gain ``d = y/N`` and decay rate on a grid."""

    time_grid: np.ndarray
    y_values: np.ndarray
    d_values: np.ndarray
    r_values: np.ndarray

    def __post_init__(self):
        for name in ("time_grid", "y_values", "d_values", "r_values"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self):
        return len(self.time_grid)


def decay_rate(schedule, problem: ControlProblem):
    """Midpoint-rule decay rate ``r(t_k)`` on a time grid.

    ``r(t_k) = sum_{j<k} (2/alpha) y((t_j + t_{j+1})/2) (t_{j+1} - t_j)`` with
    the exact gain at the midpoints.  A grid not starting at zero gets an
    implicit leading interval ``[0, t_0]``.

    Parameters
    ----------
    schedule : ControlSchedule or array_like
        Schedule (only its grid is used) or the grid itself.
    problem : ControlProblem
    """
    grid = schedule.time_grid if isinstance(schedule, ControlSchedule) else schedule
    grid = _check_grid(grid, problem)
    knots = np.concatenate(([0.0], grid)) if grid[0] > 0 else grid
    h = np.diff(knots)
    mid = 0.5 * (knots[:-1] + knots[1:])
    incr = (2.0 / problem.alpha) * closed_form_y(mid, problem) * h if h.size else h
    r = np.concatenate(([0.0], np.cumsum(incr)))
    return r[-len(grid):]


def solve_scalar_gain(problem: ControlProblem, grid, method: str = "closed-form",
                      steps: int = DEFAULT_RICCATI_STEPS) -> ControlSchedule:
    """Scalar gain schedule on ``grid``.

    Parameters
    ----------
    method : {"closed-form", "numerical"}
        ``"numerical"`` integrates the gain ODE backwards with RK4 and is
        meant as a cross-check of the closed form.
    """
    grid = _check_grid(grid, problem)
    if method == "closed-form":
        y = np.atleast_1d(closed_form_y(grid, problem))
    elif method == "numerical":
        y = integrate_gain_backward(problem, grid, steps)
    else:
        raise DomainError(f"unknown gain method {method!r}")
    r = decay_rate(grid, problem)
    return ControlSchedule(grid, y, y / problem.n_particles, r)


def system_matrices(n: int):
    """State matrices ``A``, ``B`` and weight ``M`` of the stacked system ``w = (x, v)``."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    A = np.block([[zero, eye], [zero, zero]])
    B = np.vstack([zero, eye])
    M = np.block([[zero, zero], [zero, eye]])
    return A, B, M


@dataclass(frozen=True)
class MatrixRiccatiSolution:
    """Block trajectory of the matrix Riccati solution.

    Each block array has shape ``(len(time_grid), N, N)``.
    """

    time_grid: np.ndarray
    K11: np.ndarray
    K12: np.ndarray
    K21: np.ndarray
    K22: np.ndarray

    def full(self, k: int) -> np.ndarray:
        """Assembled 2N x 2N matrix at grid index ``k``."""
        return np.block([[self.K11[k], self.K12[k]], [self.K21[k], self.K22[k]]])


def solve_matrix_riccati(problem: ControlProblem, steps: int = DEFAULT_RICCATI_STEPS,
                         max_particles: int = MAX_DENSE_PARTICLES) -> MatrixRiccatiSolution:
    """Backward RK4 solve of the full matrix Riccati equation.

    Integrates ``-K' = M/(2N) + K A + A^T K - (2N/alpha) K B B^T K`` from
    ``K(T) = 0`` on a uniform grid of ``steps`` intervals, without using
    the block structure of the solution.
    """
    n = problem.n_particles
    if n > max_particles:
        raise CapacityError(f"N={n} exceeds dense Riccati cap {max_particles}")
    if steps < 100:
        raise DomainError(f"steps must be >= 100, got {steps}")
    A, B, M = system_matrices(n)
    BBt = B @ B.T
    src = M / (2.0 * n)
    gain = 2.0 * n / problem.alpha

    def f(K):
        # dK/dt
        return -(src + K @ A + A.T @ K - gain * (K @ BBt @ K))

    T = problem.horizon_T
    h = -T / steps
    grid = np.linspace(0.0, T, steps + 1)
    traj = np.empty((steps + 1, 2 * n, 2 * n))
    K = np.zeros((2 * n, 2 * n))
    traj[-1] = K
    for k in range(steps, 0, -1):
        K = _rk4_step(f, K, h)
        traj[k - 1] = K
    return MatrixRiccatiSolution(
        grid, traj[:, :n, :n].copy(), traj[:, :n, n:].copy(),
        traj[:, n:, :n].copy(), traj[:, n:, n:].copy(),
    )


def feedback_control(y, velocities, problem: ControlProblem):
    """Closed-loop control ``q_i = -(2/alpha) y v_i``."""
    if y < 0:
        raise DomainError(f"gain must be non-negative, got {y}")
    return -(2.0 / problem.alpha) * y * np.asarray(velocities, dtype=float)
