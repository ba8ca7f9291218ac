"""Bogacki-Shampine 3(2) embedded pair with local error control.

Four stages, first-same-as-last: the fourth stage is the derivative at the
accepted point and is reused as the first stage of the next step.  The
third-order solution is propagated; the second-order solution only serves
the error estimate.
"""
from __future__ import annotations

import numpy as np

from .errors import StiffnessError

# Butcher tableau
C = np.array([0.0, 0.5, 0.75, 1.0])
A = (
    (),
    (0.5,),
    (0.0, 0.75),
    (2.0 / 9.0, 1.0 / 3.0, 4.0 / 9.0),
)
B3 = np.array([2.0 / 9.0, 1.0 / 3.0, 4.0 / 9.0, 0.0])
B2 = np.array([7.0 / 24.0, 0.25, 1.0 / 3.0, 0.125])
E = B3 - B2

ORDER = 3
ERROR_ORDER = 2
SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0


def error_norm(err, y_old, y_new, atol, rtol):
    """Mixed absolute/relative max-norm of a local error estimate."""
    scale = atol + rtol * np.maximum(np.abs(y_old), np.abs(y_new))
    return float(np.max(np.abs(err) / scale))


def step(f, t, y, h, k1):
    """One Bogacki-Shampine step.

    Returns
    -------
    y_new, err, k4
        Third-order solution, local error estimate and the derivative at
        ``(t + h, y_new)``.
    """
    k2 = f(t + C[1] * h, y + h * A[1][0] * k1)
    k3 = f(t + C[2] * h, y + h * A[2][1] * k2)
    y_new = y + h * (B3[0] * k1 + B3[1] * k2 + B3[2] * k3)
    k4 = f(t + h, y_new)
    err = h * (E[0] * k1 + E[1] * k2 + E[2] * k3 + E[3] * k4)
    return y_new, err, k4


def initial_step(f, t0, y0, f0, t_end, atol, rtol):
    """Starting step size from the usual two-derivative heuristic."""
    span = t_end - t0
    scale = atol + rtol * np.abs(y0)
    d0 = np.max(np.abs(y0) / scale)
    d1 = np.max(np.abs(f0) / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, span)
    y1 = y0 + h0 * f0
    f1 = f(t0 + h0, y1)
    d2 = np.max(np.abs(f1 - f0) / scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / ORDER)
    return min(100 * h0, h1, span)


def solve(f, t_span, y0, atol=1e-6, rtol=1e-6, t_eval=None, max_step=None, first_step=None,
          freeze=None):
    """Integrate ``y' = f(t, y)`` adaptively over ``t_span``.

    Parameters
    ----------
    f : callable
        Right-hand side ``f(t, y) -> ndarray``.  Within one step the
        integrator calls ``f`` at times inside ``[t, t + h]``.
    t_span : (float, float)
    y0 : array_like
    atol, rtol : float
        Absolute and relative tolerances of the mixed max-norm.
    t_eval : array_like, optional
        Times that accepted steps are forced to land on.
    max_step : callable or float, optional
        Either a constant cap or ``max_step(t, y)`` returning a cap for the
        next step taken from state ``(t, y)``.
    first_step : float, optional
    freeze : callable, optional
        ``freeze(t, h)`` is called before every trial step ``[t, t + h]``
        so that time-dependent coefficients of ``f`` can be held constant
        over the step.  The first-same-as-last stage is then recomputed at
        the start of each step, since it was evaluated with the previous
        step's coefficients.

    Returns
    -------
    t : ndarray
        Accepted step times, including both endpoints.
    y : ndarray
        States at those times, shape ``(len(t), len(y0))``.
    n_rejected : int
    """
    t0, t_end = map(float, t_span)
    y = np.array(y0, dtype=float)
    stops = [] if t_eval is None else sorted(float(s) for s in t_eval if t0 < s < t_end)
    stops.append(t_end)

    if callable(max_step):
        cap = max_step
    else:
        cap_value = np.inf if max_step is None else float(max_step)
        cap = lambda t, y: cap_value  # noqa: E731

    t = t0
    if freeze is not None:
        freeze(t, 0.0)
    k1 = f(t, y)
    h = first_step or initial_step(f, t, y, k1, t_end, atol, rtol)
    h_min = 1e-14 * (t_end - t0)
    ts, ys = [t], [y.copy()]
    n_rejected = 0
    stop_idx = 0
    while t < t_end:
        target = stops[stop_idx]
        h = min(h, cap(t, y))
        landing = t + h >= target - 1e-12 * max(1.0, abs(target))
        h_try = target - t if landing else h
        if not landing and h_try < h_min:
            raise StiffnessError(f"step size {h_try:.3e} underflow at t={t:.6g}")
        if freeze is not None:
            freeze(t, h_try)
            k1 = f(t, y)
        y_new, err, k4 = step(f, t, y, h_try, k1)
        en = error_norm(err, y, y_new, atol, rtol)
        if en <= 1.0:
            t = target if landing else t + h_try
            y = y_new
            k1 = k4
            ts.append(t)
            ys.append(y.copy())
            if landing:
                stop_idx += 1
            fac = MAX_FACTOR if en == 0 else min(MAX_FACTOR, SAFETY * en ** (-1.0 / (ERROR_ORDER + 1)))
            # a short landing step says nothing about the natural step size
            h = max(h, h_try * fac) if landing else h_try * fac
        else:
            n_rejected += 1
            h = h_try * max(MIN_FACTOR, SAFETY * en ** (-1.0 / (ERROR_ORDER + 1)))
    return np.array(ts), np.array(ys), n_rejected
