"""Mean-field scale: characteristic flow on empirical measures.

The kinetic equation ``f_t + (v f)_x - (2/alpha) y (v f)_v = 0`` is solved
exactly by pushing measures forward along its characteristics

    Xi_2(t) = v0 exp(-r(t)),    Xi_1(t) = x0 + v0 int_0^t exp(-r(s)) ds,

so empirical measures stay empirical and can be compared with the exact
1-Wasserstein distance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import quad
from scipy.optimize import linear_sum_assignment, linprog

from .errors import DomainError, UnsupportedInputError
from .riccati import ControlProblem, exact_rate

__all__ = [
    "EmpiricalMeasure",
    "CharacteristicFlow",
    "DobrushinBound",
    "DobrushinReport",
    "characteristic_flow",
    "push_forward",
    "wasserstein1",
    "dobrushin_constant",
    "verify_dobrushin",
    "meanfield_lyapunov",
    "read_measure",
    "write_measure",
    "MAX_ASSIGNMENT_SIZE",
    "MAX_LP_SIZE",
]

MAX_ASSIGNMENT_SIZE = 2048
MAX_LP_SIZE = 64
_WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Weighted point cloud in phase space ``(x, v)``.

    Parameters
    ----------
    points : array_like, shape (n, 2)
    weights : array_like, shape (n,), optional
        Non-negative weights summing to one; uniform if omitted.
    """

    points: np.ndarray
    weights: np.ndarray = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1 and pts.size == 2:
            pts = pts.reshape(1, 2)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 1:
            raise DomainError(f"points must have shape (n, 2), got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise DomainError("points must be finite")
        n = pts.shape[0]
        w = np.full(n, 1.0 / n) if self.weights is None else np.array(self.weights, dtype=float).ravel()
        if w.shape != (n,):
            raise DomainError("one weight per point required")
        if np.any(w < 0) or abs(math.fsum(w) - 1.0) > _WEIGHT_TOL:
            raise DomainError("weights must be non-negative and sum to 1")
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_particles(cls, x, v):
        """Uniform empirical measure on the particle states."""
        return cls(np.column_stack([np.ravel(x), np.ravel(v)]))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def x(self):
        return self.points[:, 0]

    @property
    def v(self):
        return self.points[:, 1]

    @property
    def is_uniform(self) -> bool:
        return bool(np.all(np.abs(self.weights - 1.0 / self.n) <= _WEIGHT_TOL))


@dataclass(frozen=True)
class CharacteristicFlow:
    """Characteristic map ``(t, xi0) -> Xi(t, xi0)`` for a control problem."""

    problem: ControlProblem
    quad_tol: float = 1e-10
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def velocity_factor(self, t: float) -> float:
        """``exp(-r(t))``."""
        return float(np.exp(-exact_rate(t, self.problem)))

    def position_factor(self, t: float) -> float:
        """``int_0^t exp(-r(s)) ds`` by adaptive quadrature."""
        t = float(t)
        if t not in self._cache:
            exact_rate(t, self.problem)  # domain check
            if t == 0.0:
                val = 0.0
            else:
                val, _ = quad(lambda s: np.exp(-exact_rate(s, self.problem)), 0.0, t,
                              epsabs=self.quad_tol, epsrel=self.quad_tol, limit=200)
            self._cache[t] = val
        return self._cache[t]

    def __call__(self, t, points):
        pts = np.asarray(points, dtype=float)
        out = np.empty_like(pts)
        out[..., 0] = pts[..., 0] + pts[..., 1] * self.position_factor(t)
        out[..., 1] = pts[..., 1] * self.velocity_factor(t)
        return out


def characteristic_flow(xi0, t: float, flow: CharacteristicFlow) -> np.ndarray:
    """Image of the phase point ``xi0 = (x0, v0)`` under the flow at time ``t``."""
    return flow(t, np.asarray(xi0, dtype=float))


def push_forward(measure: EmpiricalMeasure, t: float, flow: CharacteristicFlow) -> EmpiricalMeasure:
    """Push ``measure`` forward along the characteristics to time ``t``."""
    return EmpiricalMeasure(flow(t, measure.points), measure.weights)


def _cost_matrix(a, b):
    diff = a[:, None, :] - b[None, :, :]
    return np.hypot(diff[..., 0], diff[..., 1])


def _assignment_w1(a, b):
    cost = _cost_matrix(a, b)
    rows, cols = linear_sum_assignment(cost)
    return math.fsum(cost[rows, cols]) / a.shape[0]


def _lp_w1(mu, nu):
    n, m = mu.n, nu.n
    cost = _cost_matrix(mu.points, nu.points)
    a_eq = np.zeros((n + m, n * m))
    for i in range(n):
        a_eq[i, i * m:(i + 1) * m] = 1.0
    for j in range(m):
        a_eq[n + j, j::m] = 1.0
    b_eq = np.concatenate([mu.weights, nu.weights])
    res = linprog(cost.ravel(), A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if not res.success:
        raise UnsupportedInputError(f"transport LP failed: {res.message}")
    plan = np.clip(res.x, 0.0, None)
    return math.fsum(plan * cost.ravel())


def wasserstein1(mu: EmpiricalMeasure, nu: EmpiricalMeasure) -> float:
    """Exact 1-Wasserstein distance with Euclidean ground cost.

    Uniform measures are solved as an assignment problem; unequal counts
    ``n, m`` are handled by repeating atoms up to ``lcm(n, m)`` points,
    which leaves both measures unchanged.  Weighted measures with at most
    ``MAX_LP_SIZE`` atoms each go through a transport linear program.
    """
    if mu.is_uniform and nu.is_uniform:
        size = math.lcm(mu.n, nu.n)
        if size <= MAX_ASSIGNMENT_SIZE:
            a = np.repeat(mu.points, size // mu.n, axis=0)
            b = np.repeat(nu.points, size // nu.n, axis=0)
            return _assignment_w1(a, b)
    if mu.n <= MAX_LP_SIZE and nu.n <= MAX_LP_SIZE:
        return _lp_w1(mu, nu)
    raise UnsupportedInputError(
        f"no exact solver for sizes ({mu.n}, {nu.n}): uniform measures need "
        f"lcm <= {MAX_ASSIGNMENT_SIZE}, weighted ones <= {MAX_LP_SIZE} atoms")


@dataclass(frozen=True)
class DobrushinBound:
    """Lipschitz constant of the characteristic field and the stability constant."""

    lipschitz_CL: float
    constant_C1: float


def dobrushin_constant(problem: ControlProblem) -> DobrushinBound:
    """``C_L = max(1, 1/sqrt(alpha))`` and ``C_1 = max(1, 4 T exp(C_L T / 2))``."""
    cl = max(1.0, 1.0 / problem.sqrt_alpha)
    T = problem.horizon_T
    c1 = max(1.0, 4.0 * T * math.exp(0.5 * cl * T))
    return DobrushinBound(cl, c1)


@dataclass(frozen=True)
class DobrushinReport:
    """Rows ``(t, W(t), C_1 W(0), passed)`` of a stability check."""

    times: np.ndarray
    distances: np.ndarray
    bound: float
    initial_distance: float
    constants: DobrushinBound

    @property
    def passed_each(self) -> np.ndarray:
        return self.distances <= self.bound

    @property
    def passed(self) -> bool:
        return bool(np.all(self.passed_each))

    @property
    def max_ratio(self) -> float:
        """``max_t W(t) / W(0)``; zero when both measures coincide."""
        if self.initial_distance == 0:
            return 0.0 if np.all(self.distances == 0) else math.inf
        return float(np.max(self.distances) / self.initial_distance)

    def rows(self):
        return [(float(t), float(w), self.bound, bool(ok))
                for t, w, ok in zip(self.times, self.distances, self.passed_each)]


def verify_dobrushin(mu0: EmpiricalMeasure, nu0: EmpiricalMeasure, times,
                     flow: CharacteristicFlow) -> DobrushinReport:
    """Check ``W(mu(t), nu(t)) <= C_1 W(mu0, nu0)`` at the given times."""
    consts = dobrushin_constant(flow.problem)
    w0 = wasserstein1(mu0, nu0)
    times = np.asarray(times, dtype=float)
    dist = np.array([wasserstein1(push_forward(mu0, t, flow), push_forward(nu0, t, flow))
                     for t in times])
    return DobrushinReport(times, dist, consts.constant_C1 * w0, w0, consts)


def meanfield_lyapunov(measure: EmpiricalMeasure, y: float) -> float:
    """``y int v^2 dmu`` for an empirical measure."""
    if y < 0:
        raise DomainError(f"gain must be non-negative, got {y}")
    return float(y * math.fsum(measure.weights * measure.v ** 2))


def read_measure(source) -> EmpiricalMeasure:
    """Parse ``x v [weight]`` rows; ``#`` starts a comment.

    ``source`` is a path or the text itself (anything containing a newline
    is treated as text).
    """
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise DomainError(f"line {lineno}: expected 'x v [weight]', got {raw!r}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise DomainError(f"line {lineno}: {exc}") from None
    if not rows:
        raise DomainError("measure file has no points")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise DomainError("either all rows or none carry a weight")
    arr = np.array(rows)
    return EmpiricalMeasure(arr[:, :2], arr[:, 2] if arr.shape[1] == 3 else None)


def write_measure(measure: EmpiricalMeasure, path, weights: bool | None = None) -> None:
    """Write ``x v [weight]`` rows; weights are written unless the measure is uniform."""
    if weights is None:
        weights = not measure.is_uniform
    lines = ["# x v weight" if weights else "# x v"]
    for (x, v), w in zip(measure.points.tolist(), measure.weights.tolist()):
        lines.append(f"{x!r} {v!r} {w!r}" if weights else f"{x!r} {v!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
