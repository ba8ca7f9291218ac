"""Damped pressureless gas dynamics on a periodic 1D grid.

Solves

    rho_t + (rho u)_x = 0,
    (rho u)_t + (rho u^2 + p)_x = -(2/alpha) y(t) rho u,

with ``p = 0`` (mono-kinetic closure) or ``p = g1 rho^g2`` (Grad closure).
Transport uses Rusanov interface fluxes, either first order or with
minmod-limited MUSCL reconstruction of ``(rho, u)`` and two-stage SSP time
stepping.  The damping is split off (Strang) and integrated exactly with
the closed-form gain.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError, PositivityError
from .riccati import ControlProblem, closed_form_y, exact_rate

__all__ = [
    "HydroField",
    "Closure",
    "HydroSeries",
    "init_hydro",
    "physical_flux",
    "rusanov_flux",
    "cfl_dt",
    "advance",
    "hydro_lyapunov",
    "run_hydro_experiment",
    "write_field",
    "read_field",
    "EPS_VACUUM",
    "C_MIN",
]

EPS_VACUUM = 1e-12
C_MIN = 1e-10


@dataclass(frozen=True)
class HydroField:
    """Cell averages of density and momentum on ``Nx`` periodic cells."""

    rho: np.ndarray
    mom: np.ndarray
    dx: float
    t: float = 0.0

    def __post_init__(self):
        rho = np.array(self.rho, dtype=float).ravel()
        mom = np.array(self.mom, dtype=float).ravel()
        if rho.shape != mom.shape or rho.size < 4:
            raise DomainError(f"need matching rho/mom with Nx >= 4, got {rho.size}, {mom.size}")
        if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(mom))):
            raise DomainError("field values must be finite")
        if np.any(rho < 0):
            raise DomainError("density must be non-negative")
        if not self.dx > 0:
            raise DomainError("dx must be positive")
        rho.setflags(write=False)
        mom.setflags(write=False)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "mom", mom)

    @property
    def nx(self) -> int:
        return self.rho.size

    @property
    def x(self) -> np.ndarray:
        """Cell centers ``i dx``."""
        return np.arange(self.nx) * self.dx

    @property
    def velocity(self) -> np.ndarray:
        return self.mom / np.maximum(self.rho, EPS_VACUUM)

    def mass(self) -> float:
        return math.fsum(self.rho) * self.dx

    def momentum(self) -> float:
        return math.fsum(self.mom) * self.dx


@dataclass(frozen=True)
class Closure:
    """Pressure law: ``"mono-kinetic"`` (``p = 0``) or ``"grad"`` (``p = g1 rho^g2``)."""

    kind: str = "mono-kinetic"
    grad_coeff: float = 1.0
    grad_exponent: float = 1.0

    def __post_init__(self):
        if self.kind not in ("mono-kinetic", "grad"):
            raise DomainError(f"unknown closure {self.kind!r}")
        if self.kind == "grad":
            if self.grad_coeff < 0:
                raise DomainError("grad_coeff must be >= 0")
            if not 1.0 <= self.grad_exponent <= 3.0:
                raise DomainError("grad_exponent must lie in [1, 3]")

    @property
    def pressureless(self) -> bool:
        return self.kind == "mono-kinetic"

    def pressure(self, rho):
        rho = np.asarray(rho, dtype=float)
        if self.pressureless:
            return np.zeros_like(rho)
        return self.grad_coeff * rho ** self.grad_exponent

    def sound_speed(self, rho):
        """``sqrt(p'(rho))``."""
        rho = np.asarray(rho, dtype=float)
        if self.pressureless:
            return np.zeros_like(rho)
        dp = self.grad_coeff * self.grad_exponent * rho ** (self.grad_exponent - 1.0)
        return np.sqrt(dp)


def physical_flux(rho, mom, closure: Closure):
    """``F(U) = (rho u, rho u^2 + p)`` with the vacuum floor on ``rho``."""
    rho = np.asarray(rho, dtype=float)
    mom = np.asarray(mom, dtype=float)
    return mom, mom * mom / np.maximum(rho, EPS_VACUUM) + closure.pressure(rho)


def _wave_speed(rho, mom, closure):
    return np.abs(mom / np.maximum(rho, EPS_VACUUM)) + closure.sound_speed(rho)


def rusanov_flux(UL, UR, closure: Closure):
    """Rusanov flux between left state ``UL = (rho, mom)`` and right state ``UR``.

    ``F = (F(UL) + F(UR))/2 - c (UR - UL)/2`` with
    ``c = max(|uL| + sqrt(p'(rhoL)), |uR| + sqrt(p'(rhoR)))``, floored at
    ``C_MIN``.  Works elementwise on arrays of interface states.
    """
    rl, ml = (np.asarray(a, dtype=float) for a in UL)
    rr, mr = (np.asarray(a, dtype=float) for a in UR)
    fl0, fl1 = physical_flux(rl, ml, closure)
    fr0, fr1 = physical_flux(rr, mr, closure)
    c = np.maximum(np.maximum(_wave_speed(rl, ml, closure), _wave_speed(rr, mr, closure)), C_MIN)
    return 0.5 * (fl0 + fr0) - 0.5 * c * (rr - rl), 0.5 * (fl1 + fr1) - 0.5 * c * (mr - ml)


def cfl_dt(field: HydroField, closure: Closure, cfl: float = 0.9, t_stop: float | None = None) -> float:
    """Time step ``cfl dx / max_i c_i``, clipped so that ``t + dt <= t_stop``."""
    if not 0 < cfl <= 1:
        raise DomainError(f"cfl must lie in (0, 1], got {cfl}")
    cmax = max(float(np.max(_wave_speed(field.rho, field.mom, closure))), C_MIN)
    dt = cfl * field.dx / cmax
    if t_stop is not None:
        dt = min(dt, t_stop - field.t)
    return dt


def _minmod(a, b):
    return np.where(a * b > 0, np.sign(a) * np.minimum(np.abs(a), np.abs(b)), 0.0)


def _interface_states(rho, mom, order):
    """Left/right states at interfaces ``i + 1/2`` (interface ``i`` sits right of cell ``i``)."""
    if order == 1:
        return (rho, mom), (np.roll(rho, -1), np.roll(mom, -1))
    u = mom / np.maximum(rho, EPS_VACUUM)
    out = []
    for q in (rho, u):
        dq = np.roll(q, -1) - q  # q_{i+1} - q_i
        slope = _minmod(np.roll(dq, 1), dq)
        out.append((q + 0.5 * slope, np.roll(q - 0.5 * slope, -1)))
    (rl, rr), (ul, ur) = out
    return (rl, rl * ul), (rr, rr * ur)


def _transport_rhs(rho, mom, dx, closure, order):
    UL, UR = _interface_states(rho, mom, order)
    f0, f1 = rusanov_flux(UL, UR, closure)
    return -(f0 - np.roll(f0, 1)) / dx, -(f1 - np.roll(f1, 1)) / dx


def _transport(rho, mom, dt, dx, closure, order):
    d0, d1 = _transport_rhs(rho, mom, dx, closure, order)
    r1, m1 = rho + dt * d0, mom + dt * d1
    if order == 1:
        return r1, m1
    if np.any(r1 < 0):
        raise PositivityError(f"negative density {r1.min():.3e} in transport stage")
    d0, d1 = _transport_rhs(r1, m1, dx, closure, order)
    return 0.5 * (rho + r1 + dt * d0), 0.5 * (mom + m1 + dt * d1)


def damping_factor(problem: ControlProblem, t: float, dt: float) -> float:
    """Exact damping ``exp(-(r(t + dt) - r(t)))`` of ``m' = -(2/alpha) y(t) m`` over one step."""
    t1 = min(t + dt, problem.horizon_T)
    return math.exp(-(exact_rate(t1, problem) - exact_rate(t, problem)))


def advance(field: HydroField, problem: ControlProblem, dt: float, closure: Closure,
            order: int = 2) -> HydroField:
    """One Strang-split step: half damping, transport, half damping.

    The damping substeps are solved exactly, so apart from transport the
    momentum is multiplied by ``exp(-(r(t + dt) - r(t)))``.
    """
    if order not in (1, 2):
        raise DomainError(f"order must be 1 or 2, got {order}")
    if dt <= 0:
        raise DomainError(f"dt must be positive, got {dt}")
    half = math.sqrt(damping_factor(problem, field.t, dt))
    rho = field.rho
    mom = field.mom * half
    rho, mom = _transport(rho, mom, dt, field.dx, closure, order)
    if np.any(rho < 0):
        raise PositivityError(f"negative density {rho.min():.3e} at t={field.t + dt:.6g}")
    mom = mom * half
    return HydroField(rho, mom, field.dx, field.t + dt)


def hydro_lyapunov(field: HydroField, y: float) -> float:
    """Midpoint-rule ``y int rho u^2 dx``."""
    if y < 0:
        raise DomainError(f"gain must be non-negative, got {y}")
    return float(y * math.fsum(field.mom ** 2 / np.maximum(field.rho, EPS_VACUUM)) * field.dx)


def init_hydro(nx: int = 250, seed: int = 42, noise_low: float = 0.0, noise_high: float = 0.2,
               momentum_profile=None) -> HydroField:
    """Initial data ``rho = 1``, ``rho u = exp(x) sin(2 pi x) + noise`` at cell centers ``i/nx``."""
    if nx < 4:
        raise DomainError("nx must be >= 4")
    if noise_low > noise_high:
        raise DomainError("noise_low must not exceed noise_high")
    dx = 1.0 / nx
    x = np.arange(nx) * dx
    rng = np.random.default_rng(seed)
    noise = rng.uniform(noise_low, noise_high, nx)
    base = np.exp(x) * np.sin(2.0 * np.pi * x) if momentum_profile is None else momentum_profile(x)
    return HydroField(np.ones(nx), base + noise, dx, 0.0)


@dataclass(frozen=True)
class HydroSeries:
    """Lyapunov functional with its bound, plus conserved quantities at output times."""

    times: np.ndarray
    lyapunov: np.ndarray
    bound: np.ndarray
    mass: np.ndarray
    momentum: np.ndarray
    rate: np.ndarray
    min_density: np.ndarray
    closure: Closure = Closure()
    alpha: float = float("nan")
    n_steps: int = 0

    def __post_init__(self):
        n = len(self.times)
        if any(len(getattr(self, k)) != n for k in
               ("lyapunov", "bound", "mass", "momentum", "rate", "min_density")):
            raise DomainError("series columns differ in length")

    def value_at(self, t: float) -> float:
        return float(np.interp(t, self.times, self.lyapunov))


def run_hydro_experiment(alpha: float = 1e-2, horizon_T: float = 1.0, nx: int = 250,
                         cfl: float = 0.9, seed: int = 42, noise_low: float = 0.0,
                         noise_high: float = 0.2, closure: Closure | None = None, order: int = 2,
                         output_times=None, initial: HydroField | None = None):
    """March the hydrodynamic system to ``T`` and record the decay series.

    Returns
    -------
    series : HydroSeries
    field : HydroField
        State at ``T``.
    """
    closure = closure or Closure()
    problem = ControlProblem(alpha, horizon_T)
    field = initial if initial is not None else init_hydro(nx, seed, noise_low, noise_high)
    if output_times is None:
        output_times = np.linspace(0.0, horizon_T, 101)
    stops = np.unique(np.concatenate([[field.t], np.asarray(output_times, dtype=float), [horizon_T]]))
    stops = stops[(stops >= field.t) & (stops <= horizon_T)]

    rows = []

    def record(f, r):
        y = closed_form_y(f.t, problem)
        rows.append((f.t, hydro_lyapunov(f, y), f.mass(), f.momentum(), r, float(f.rho.min())))

    record(field, 0.0)
    n_steps = 0
    for t_stop in stops[1:]:
        while field.t < t_stop:
            dt = cfl_dt(field, closure, cfl, t_stop)
            if dt <= 1e-14 * horizon_T:
                field = HydroField(field.rho, field.mom, field.dx, t_stop)
                break
            landing = field.t + dt >= t_stop
            field = advance(field, problem, dt, closure, order)
            if landing:
                field = HydroField(field.rho, field.mom, field.dx, float(t_stop))
            n_steps += 1
        record(field, exact_rate(field.t, problem))

    cols = np.array(rows)
    times, lyap, mass, mom, rate, rmin = cols.T
    bound = lyap[0] * np.exp(-rate)
    series = HydroSeries(times, lyap, bound, mass, mom, rate, rmin, closure, alpha, n_steps)
    return series, field


def write_field(field: HydroField, path) -> None:
    """Snapshot rows ``x rho mom``."""
    lines = ["# x rho mom"]
    for x, r, m in zip(field.x.tolist(), field.rho.tolist(), field.mom.tolist()):
        lines.append(f"{x!r} {r!r} {m!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_field(path, t: float = 0.0) -> HydroField:
    """Inverse of :func:`write_field`; assumes uniformly spaced centers."""
    data = np.loadtxt(path, comments="#", ndmin=2)
    if data.shape[1] != 3:
        raise DomainError(f"expected 3 columns 'x rho mom', got {data.shape[1]}")
    dx = 1.0 / data.shape[0]
    return HydroField(data[:, 1], data[:, 2], dx, t)
