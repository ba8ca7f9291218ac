"""Second-order alignment dynamics with instantaneous (receding-horizon) control.

    x_i' = v_i,
    v_i' = (1/N) sum_j P(x_i, x_j) (v_j - v_i) + q,

with Cucker-Smale weights ``P = K / (gamma^2 + |x_i - x_j|^2)^delta`` or the
Motsch-Tadmor normalization of the same kernel.  A single scalar control
``q`` acts on all particles and is recomputed every ``horizon_dt``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "AlignmentKernelSpec",
    "InstantaneousControlSpec",
    "AlignmentTrajectory",
    "kernel_value",
    "interaction_weights",
    "alignment_rhs",
    "instantaneous_control",
    "tracking_objective",
    "tracking_cost",
    "integrate_alignment",
]


@dataclass(frozen=True)
class AlignmentKernelSpec:
    """Interaction kernel ``K / (gamma^2 + r^2)^delta``.

    ``kind`` is ``"cucker-smale"`` or ``"motsch-tadmor"``.
    """

    kind: str = "cucker-smale"
    strength_K: float = 1.0
    gamma: float = 1.0
    delta: float = 0.5

    def __post_init__(self):
        if self.kind not in ("cucker-smale", "motsch-tadmor"):
            raise DomainError(f"unknown kernel kind {self.kind!r}")
        if not self.strength_K > 0 or not self.gamma > 0 or self.delta < 0:
            raise DomainError("kernel needs K > 0, gamma > 0, delta >= 0")


@dataclass(frozen=True)
class InstantaneousControlSpec:
    """Regularization ``beta``, target velocity and receding horizon length."""

    beta: float = 1e-2
    v_desired: float = 0.0
    horizon_dt: float = 1e-2

    def __post_init__(self):
        if not self.beta > 0:
            raise DomainError("beta must be positive")
        if not self.horizon_dt > 0:
            raise DomainError("horizon_dt must be positive")


def kernel_value(xi, xj, spec: AlignmentKernelSpec):
    """``K / (gamma^2 + |xi - xj|^2)^delta``.

    For Motsch-Tadmor this is the unnormalized weight; the normalization is
    applied in :func:`interaction_weights`.
    """
    d2 = np.square(np.asarray(xi, dtype=float) - np.asarray(xj, dtype=float))
    return spec.strength_K / (spec.gamma ** 2 + d2) ** spec.delta


def interaction_weights(x, spec: AlignmentKernelSpec) -> np.ndarray:
    """Matrix ``P_ij`` entering ``(1/N) sum_j P_ij (v_j - v_i)``."""
    x = np.asarray(x, dtype=float)
    H = kernel_value(x[:, None], x[None, :], spec)
    if spec.kind == "cucker-smale":
        return H
    row_mean = H.mean(axis=1, keepdims=True)
    if np.any(row_mean <= 0):
        raise DomainError("Motsch-Tadmor normalization with vanishing interaction")
    return H / row_mean


def _alignment_term(x, v, spec):
    P = interaction_weights(x, spec)
    n = v.size
    return (P @ v - P.sum(axis=1) * v) / n


def alignment_rhs(x, v, q: float, spec: AlignmentKernelSpec):
    """Time derivatives ``(dx, dv)`` under the common control ``q``."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if x.shape != v.shape:
        raise DomainError("x and v must have the same shape")
    return v.copy(), _alignment_term(x, v, spec) + q


def tracking_objective(q, x, v, spec: AlignmentKernelSpec, ctrl: InstantaneousControlSpec):
    """Discretized horizon cost as a function of the scalar control ``q``.

    One explicit Euler step over the horizon gives the predicted velocity
    ``v+ = v + dt (A + q)``, and the cost is the rectangle rule
    ``(dt/2) [(1/N) sum (v+ - v_d)^2 + (beta/2) q^2]``.  Vectorized in ``q``.
    """
    dt = ctrl.horizon_dt
    v = np.asarray(v, dtype=float)
    v_pred = v + dt * _alignment_term(np.asarray(x, dtype=float), v, spec)
    q = np.asarray(q, dtype=float)
    dev = v_pred[None, :] + dt * q.reshape(-1, 1) - ctrl.v_desired
    J = 0.5 * dt * (np.mean(dev ** 2, axis=1) + 0.5 * ctrl.beta * q.ravel() ** 2)
    return J.reshape(q.shape)


def instantaneous_control(x, v, spec: AlignmentKernelSpec, ctrl: InstantaneousControlSpec) -> float:
    """Minimizer ``q* = -dt mean(v_pred - v_d) / (dt^2 + beta/2)`` of :func:`tracking_objective`."""
    dt = ctrl.horizon_dt
    v = np.asarray(v, dtype=float)
    v_pred = v + dt * _alignment_term(np.asarray(x, dtype=float), v, spec)
    return float(-dt * np.mean(v_pred - ctrl.v_desired) / (dt * dt + 0.5 * ctrl.beta))


def tracking_cost(v, v_desired: float = 0.0) -> float:
    """``(1/N) sum (v_i - v_d)^2``."""
    v = np.asarray(v, dtype=float)
    return float(np.mean((v - v_desired) ** 2))


@dataclass(frozen=True)
class AlignmentTrajectory:
    """States at every time step and the control applied on each horizon.

    ``controls[k]`` is applied from ``control_times[k]`` until the next
    recomputation.
    """

    times: np.ndarray
    x: np.ndarray
    v: np.ndarray
    control_times: np.ndarray
    controls: np.ndarray

    def recompute_index(self) -> np.ndarray:
        """Indices into ``times`` of the control recomputation instants, plus the final time."""
        idx = np.searchsorted(self.times, self.control_times - 1e-12)
        return np.append(idx, len(self.times) - 1)


def integrate_alignment(x0, v0, spec: AlignmentKernelSpec, ctrl: InstantaneousControlSpec,
                        T: float = 1.0, dt: float | None = None) -> AlignmentTrajectory:
    """Heun (two-stage, second-order) stepping with receding-horizon control.

    ``q*`` is recomputed from the current state every ``horizon_dt`` and
    held constant in between.  ``dt`` defaults to ``horizon_dt`` and must
    divide it into an integer number of steps.
    """
    dt = ctrl.horizon_dt if dt is None else float(dt)
    if dt <= 0 or dt > ctrl.horizon_dt * (1 + 1e-12):
        raise DomainError("need 0 < dt <= horizon_dt")
    sub = int(round(ctrl.horizon_dt / dt))
    if abs(sub * dt - ctrl.horizon_dt) > 1e-9 * ctrl.horizon_dt:
        raise DomainError("dt must divide horizon_dt")
    n_steps = int(round(T / dt))
    if abs(n_steps * dt - T) > 1e-9 * T:
        raise DomainError("dt must divide T")

    x = np.array(x0, dtype=float).ravel()
    v = np.array(v0, dtype=float).ravel()
    if x.shape != v.shape:
        raise DomainError("x0 and v0 must have the same length")
    times, xs, vs = [0.0], [x.copy()], [v.copy()]
    ctimes, controls = [], []
    q = 0.0
    for k in range(n_steps):
        if k % sub == 0:
            q = instantaneous_control(x, v, spec, ctrl)
            ctimes.append(k * dt)
            controls.append(q)
        dx1, dv1 = alignment_rhs(x, v, q, spec)
        xp, vp = x + dt * dx1, v + dt * dv1
        dx2, dv2 = alignment_rhs(xp, vp, q, spec)
        x = x + 0.5 * dt * (dx1 + dx2)
        v = v + 0.5 * dt * (dv1 + dv2)
        times.append((k + 1) * dt)
        xs.append(x.copy())
        vs.append(v.copy())
    return AlignmentTrajectory(np.array(times), np.array(xs), np.array(vs),
                               np.array(ctimes), np.array(controls))
