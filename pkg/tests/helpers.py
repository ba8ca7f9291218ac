"""Shared numerical helpers for the hydrodynamic order checks."""
import numpy as np

from crowdctl.hydro import HydroField, run_hydro_experiment


def smooth_field(nx):
    """Noise-free smooth periodic data ``rho = 1``, ``rho u = sin(2 pi x)``."""
    x = np.arange(nx) / nx
    return HydroField(np.ones(nx), np.sin(2 * np.pi * x), 1.0 / nx)


def final_state(nx, order, alpha=1e-2, T=0.1):
    _, f = run_hydro_experiment(alpha, T, nx=nx, order=order, output_times=[T], initial=smooth_field(nx))
    return f


def l1_error(coarse, fine):
    """L1 distance of (rho, mom) at the coarse cell centers, which are also fine centers."""
    k = fine.nx // coarse.nx
    return float(np.sum(np.abs(coarse.rho - fine.rho[::k]) + np.abs(coarse.mom - fine.mom[::k])) * coarse.dx)


def order_study(alpha=1e-2, T=0.1, ref_nx=1000):
    ref = final_state(ref_nx, 2, alpha, T)
    errs = {o: [l1_error(final_state(n, o, alpha, T), ref) for n in (125, 250)] for o in (1, 2)}
    orders = {o: float(np.log2(e[0] / e[1])) for o, e in errs.items()}
    return errs, orders
