"""Experiment configuration plus orchestration of runs and their data export."""
from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import alignment, hydro, meanfield, particles, riccati
from .errors import CapacityError, ConfigError, DomainError

__all__ = [
    "SCALES",
    "ExperimentConfig",
    "SeriesRecord",
    "RunResult",
    "parse_config",
    "apply_overrides",
    "run",
    "emit_plot_data",
    "write_csv",
    "default_output_dir",
    "OUTPUT_ENV",
]

SCALES = ("particle", "meanfield", "hydro", "nonlinear", "riccati-check")
OUTPUT_ENV = "CROWDCTL_OUT"

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_CONFIG = 2

# line colours of the decay figures, keyed by alpha
ALPHA_COLORS = {1e-4: "red", 1e-3: "blue", 1e-2: "black"}
_FALLBACK_COLORS = ("tab:green", "tab:orange", "tab:purple", "tab:brown", "tab:gray")

PARTICLE_BOUND_SLACK = 1e-6
MEANFIELD_BOUND_SLACK = 1e-10
HYDRO_LYAPUNOV_SLACK = 5e-2
MASS_TOL = 1e-12
MOMENTUM_TOL = 1e-10
STRUCTURE_TOL = 1e-8
GAIN_TOL = 1e-6


def default_output_dir() -> str:
    return os.environ.get(OUTPUT_ENV, "crowdctl-out")


@dataclass
class ExperimentConfig:
    """All knobs of a run; field names double as configuration keys."""

    scale: str = "particle"
    alpha: tuple = (1e-2,)
    T: float = 1.0
    N: int = 250
    Nx: int = 250
    seed: int = 42
    abs_tol: float = 1e-6
    rel_tol: float = 1e-6
    cfl: float = 0.9
    noise_low: float = 0.0
    noise_high: float = 0.2
    velocity_form: str = "additive"
    gain_sampling: str = "midpoint"
    closure: str = "mono-kinetic"
    grad_coeff: float = 1.0
    grad_exponent: float = 1.0
    scheme_order: int = 2
    n_outputs: int = 100
    riccati_steps: int = riccati.DEFAULT_RICCATI_STEPS
    kernel: str = "cucker-smale"
    kernel_K: float = 1.0
    kernel_gamma: float = 1.0
    kernel_delta: float = 0.5
    beta: float = 1e-2
    v_desired: float = 0.0
    horizon_dt: float = 1e-2
    dt: float = 5e-3
    out: str = field(default_factory=default_output_dir)


_ALIASES = {"horizon_t": "T", "t": "T", "n": "N", "n_particles": "N", "nx": "Nx",
            "output": "out", "out_dir": "out"}
_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
_CHOICES = {
    "scale": SCALES,
    "velocity_form": ("additive", "exponent"),
    "gain_sampling": ("midpoint", "left"),
    "closure": ("mono-kinetic", "grad"),
    "kernel": ("cucker-smale", "motsch-tadmor"),
}


def _canonical_key(key):
    if key in _FIELDS:
        return key
    return _ALIASES.get(key.lower(), key)


def _convert(key, raw, line=None):
    ftype = type(getattr(ExperimentConfig(out="."), key))
    try:
        if key == "alpha":
            vals = tuple(float(s) for s in raw.replace(";", ",").split(",") if s.strip())
            if not vals:
                raise ValueError("empty list")
            return vals
        if ftype is int:
            f = float(raw)
            if f != int(f):
                raise ValueError(f"not an integer: {raw}")
            return int(f)
        if ftype is float:
            return float(raw)
        return raw.strip()
    except ValueError as exc:
        raise ConfigError(f"cannot parse value {raw!r}: {exc}", key=key, line=line) from None


def _validate(cfg: ExperimentConfig, lines=None):
    lines = lines or {}

    def bad(key, msg):
        raise ConfigError(msg, key=key, line=lines.get(key))

    for key, choices in _CHOICES.items():
        if getattr(cfg, key) not in choices:
            bad(key, f"must be one of {', '.join(choices)}, got {getattr(cfg, key)!r}")
    if any(not (math.isfinite(a) and a > 0) for a in cfg.alpha):
        bad("alpha", f"must be positive, got {cfg.alpha}")
    positive = ("T", "abs_tol", "rel_tol", "kernel_K", "kernel_gamma", "beta", "horizon_dt", "dt")
    for key in positive:
        v = getattr(cfg, key)
        if not (math.isfinite(v) and v > 0):
            bad(key, f"must be positive, got {v}")
    if cfg.N < 1:
        bad("N", f"must be >= 1, got {cfg.N}")
    if cfg.Nx < 4:
        bad("Nx", f"must be >= 4, got {cfg.Nx}")
    if not 0 < cfg.cfl <= 1:
        bad("cfl", f"must lie in (0, 1], got {cfg.cfl}")
    if cfg.noise_low > cfg.noise_high:
        bad("noise_low", "must not exceed noise_high")
    if cfg.grad_coeff < 0:
        bad("grad_coeff", "must be >= 0")
    if not 1 <= cfg.grad_exponent <= 3:
        bad("grad_exponent", f"must lie in [1, 3], got {cfg.grad_exponent}")
    if cfg.scheme_order not in (1, 2):
        bad("scheme_order", "must be 1 or 2")
    if cfg.n_outputs < 1:
        bad("n_outputs", "must be >= 1")
    if cfg.riccati_steps < 100:
        bad("riccati_steps", "must be >= 100")
    if cfg.kernel_delta < 0:
        bad("kernel_delta", "must be >= 0")
    if cfg.dt > cfg.horizon_dt * (1 + 1e-12):
        bad("dt", "must not exceed horizon_dt")
    if cfg.seed < 0:
        bad("seed", "must be non-negative")
    return cfg


def parse_config(source=None) -> ExperimentConfig:
    """Read ``key = value`` lines into an :class:`ExperimentConfig`.

    ``source`` is a path, configuration text (anything containing a newline
    or an ``=``), or ``None`` for the defaults.  ``#`` starts a comment;
    unknown keys and out-of-range values raise :class:`ConfigError` naming
    the key and line.  ``alpha`` accepts a comma-separated sweep.
    """
    if source is None:
        text = ""
    elif isinstance(source, Path) or (source.strip() and "\n" not in source and "=" not in source):
        try:
            text = Path(source).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read {source}: {exc}") from None
    else:
        text = source
    values, lines = {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", line=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        ckey = _canonical_key(key)
        if ckey not in _FIELDS:
            raise ConfigError("unknown key", key=key, line=lineno)
        if ckey in values:
            raise ConfigError("duplicate key", key=key, line=lineno)
        values[ckey] = _convert(ckey, value, lineno)
        lines[ckey] = lineno
    return _validate(ExperimentConfig(**values), lines)


def apply_overrides(cfg: ExperimentConfig, **overrides) -> ExperimentConfig:
    """Return a copy with the non-``None`` overrides converted and applied."""
    updates = {}
    for key, value in overrides.items():
        if value is None:
            continue
        ckey = _canonical_key(key)
        if ckey not in _FIELDS:
            raise ConfigError("unknown key", key=key)
        updates[ckey] = _convert(ckey, str(value)) if isinstance(value, str) else value
        if ckey == "alpha" and not isinstance(updates[ckey], tuple):
            updates[ckey] = (float(updates[ckey]),)
    return _validate(dataclasses.replace(cfg, **updates))


@dataclass(frozen=True)
class SeriesRecord:
    """Column-named table with a strictly ascending ``t`` column."""

    columns: tuple
    rows: np.ndarray
    label: str = ""
    alpha: float | None = None

    def __post_init__(self):
        rows = np.atleast_2d(np.asarray(self.rows, dtype=float))
        cols = tuple(self.columns)
        if not cols or cols[0] != "t":
            raise DomainError("first column must be 't'")
        if rows.shape[1] != len(cols):
            raise DomainError(f"{rows.shape[1]} values per row for {len(cols)} columns")
        if rows.shape[0] > 1 and np.any(np.diff(rows[:, 0]) <= 0):
            raise DomainError("t must be strictly ascending")
        if not np.all(np.isfinite(rows)):
            raise DomainError("series contains NaN or Inf")
        object.__setattr__(self, "columns", cols)
        object.__setattr__(self, "rows", rows)

    def __len__(self):
        return self.rows.shape[0]

    def column(self, name) -> np.ndarray:
        return self.rows[:, self.columns.index(name)]


def write_csv(record: SeriesRecord, path) -> Path:
    """UTF-8 CSV with a header row and shortest round-trip float formatting."""
    path = Path(path)
    lines = [",".join(record.columns)]
    for row in record.rows.tolist():
        lines.append(",".join(repr(v) for v in row))
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def _alpha_color(alpha, k):
    for a, colour in ALPHA_COLORS.items():
        if alpha is not None and math.isclose(alpha, a, rel_tol=1e-9):
            return colour
    return _FALLBACK_COLORS[k % len(_FALLBACK_COLORS)]


_PLOT_TEMPLATE = '''"""Semi-log decay plot generated by crowdctl."""
import csv
import os
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

SERIES = {series!r}
HERE = os.path.dirname(os.path.abspath(__file__))


def load(path):
    with open(path, encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return {{k: [float(r[k]) for r in rows] for k in rows[0]}}


fig, ax = plt.subplots(figsize=(7, 4.5))
for path, label, colour in SERIES:
    d = load(os.path.join(HERE, path))
    ax.semilogy(d["t"], d["{value}"], "x-", color=colour, markersize=3, label=label)
    ax.semilogy(d["t"], d["bound"], "-", color=colour, linewidth=1.5)
ax.set_xlabel("t")
ax.set_ylabel("{ylabel}")
ax.legend()
fig.tight_layout()
fig.savefig(sys.argv[1] if len(sys.argv) > 1 else "{png}", dpi=150)
'''


def emit_plot_data(series, path, value_column: str = "L", ylabel: str | None = None):
    """Write each series as CSV plus one overlay plot script.

    Parameters
    ----------
    series : SeriesRecord or list of SeriesRecord
    path : str or Path
        Path prefix; CSVs become ``<prefix>_<label>.csv`` (or
        ``<prefix>.csv`` for a single unlabeled series) and the script
        ``<prefix>_plot.py``.

    Returns
    -------
    list of Path
        Written files, CSVs first.
    """
    records = [series] if isinstance(series, SeriesRecord) else list(series)
    if not records:
        raise DomainError("no series to emit")
    for rec in records:
        if len(rec) < 2:
            raise DomainError(f"degenerate series {rec.label!r} with {len(rec)} row(s)")
        if value_column not in rec.columns or "bound" not in rec.columns:
            raise DomainError(f"series needs '{value_column}' and 'bound' columns")
    prefix = Path(path)
    written, entries = [], []
    for k, rec in enumerate(records):
        suffix = f"_{rec.label}" if rec.label and len(records) > 1 else ""
        csv_path = write_csv(rec, prefix.with_name(prefix.name + suffix + ".csv"))
        written.append(csv_path)
        label = rec.label or prefix.name
        if rec.alpha is not None:
            label = f"alpha={rec.alpha:g}"
        entries.append((csv_path.name, label, _alpha_color(rec.alpha, k)))
    script = prefix.with_name(prefix.name + "_plot.py")
    script.write_text(_PLOT_TEMPLATE.format(series=entries, value=value_column,
                                            ylabel=ylabel or value_column,
                                            png=prefix.name + ".png"),
                      encoding="utf-8", newline="\n")
    written.append(script)
    return written


@dataclass
class RunResult:
    """Outcome of :func:`run`: exit status, per-check results and written files."""

    exit_status: int
    checks: list = field(default_factory=list)
    artifacts: list = field(default_factory=list)
    summary: str = ""
    data: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.exit_status == EXIT_OK


class _Checks:
    def __init__(self):
        self.items = []
        self.notes = []

    def add(self, name, ok, detail=""):
        self.items.append((name, bool(ok), detail))

    def note(self, text):
        self.notes.append(text)

    @property
    def ok(self):
        return all(ok for _, ok, _ in self.items)


def _alpha_tag(a):
    return f"alpha{a:g}"


def _output_times(cfg):
    return np.linspace(0.0, cfg.T, cfg.n_outputs + 1)


def _run_particle(cfg, checks, data):
    records = []
    for a in cfg.alpha:
        series, traj = particles.run_particle_experiment(
            a, cfg.T, cfg.N, cfg.seed, cfg.abs_tol, cfg.rel_tol, cfg.noise_low, cfg.noise_high,
            cfg.velocity_form, cfg.gain_sampling)
        tag = _alpha_tag(a)
        viol = series.bound_violation(PARTICLE_BOUND_SLACK)
        checks.add(f"{tag}: L <= L(0) exp(-r) (1+{PARTICLE_BOUND_SLACK:g})", viol <= 0,
                   f"max excess {viol:.3e} over {len(series.times)} steps")
        if series.lyapunov[0] > 0:
            dec = bool(np.all(np.diff(series.lyapunov) < 0))
            checks.add(f"{tag}: L strictly decreasing", dec)
        else:
            checks.add(f"{tag}: L identically zero", np.all(series.lyapunov == 0))
        records.append(SeriesRecord(("t", "L", "bound", "r"),
                                    np.column_stack([series.times, series.lyapunov, series.bound,
                                                     series.rate]), tag, a))
        data[a] = series
    _decay_order_check(cfg, checks, data, "L")
    return records, "L"


def _decay_order_check(cfg, checks, data, name):
    if len(cfg.alpha) < 2:
        return
    t_mid = min(0.5, cfg.T)
    alphas = sorted(cfg.alpha)
    ratios = [data[a].value_at(t_mid) / data[a].lyapunov[0] if data[a].lyapunov[0] > 0 else 0.0
              for a in alphas]
    ok = all(r1 < r2 for r1, r2 in zip(ratios, ratios[1:]))
    detail = ", ".join(f"alpha={a:g}: {r:.3e}" for a, r in zip(alphas, ratios))
    checks.add(f"smaller alpha decays faster at t={t_mid:g} ({name}(t)/{name}(0))", ok, detail)


def _run_meanfield(cfg, checks, data):
    if cfg.N > meanfield.MAX_ASSIGNMENT_SIZE:
        raise ConfigError(f"meanfield scale supports N <= {meanfield.MAX_ASSIGNMENT_SIZE}", key="N")
    spec0 = particles.InitialConditionSpec(cfg.N, cfg.seed, cfg.noise_low, cfg.noise_high,
                                           cfg.velocity_form)
    spec1 = dataclasses.replace(spec0, seed=cfg.seed + 1)
    ens0 = particles.sample_initial_conditions(spec0)
    ens1 = particles.sample_initial_conditions(spec1)
    mu0 = meanfield.EmpiricalMeasure.from_particles(ens0.x, ens0.v)
    nu0 = meanfield.EmpiricalMeasure.from_particles(ens1.x, ens1.v)
    times = _output_times(cfg)
    records = []
    for a in cfg.alpha:
        tag = _alpha_tag(a)
        problem = riccati.ControlProblem(a, cfg.T, cfg.N)
        flow = meanfield.CharacteristicFlow(problem)
        y = np.atleast_1d(riccati.closed_form_y(times, problem))
        r = np.atleast_1d(riccati.exact_rate(times, problem))
        L = np.array([meanfield.meanfield_lyapunov(meanfield.push_forward(mu0, t, flow), yt)
                      for t, yt in zip(times, y)])
        bound = L[0] * np.exp(-r)
        excess = float(np.max(L - bound * (1 + MEANFIELD_BOUND_SLACK)))
        checks.add(f"{tag}: mean-field L <= L(0) exp(-r) (1+{MEANFIELD_BOUND_SLACK:g})", excess <= 0,
                   f"max excess {excess:.3e}")
        dob_times = times[:: max(1, len(times) // 10)]
        report = meanfield.verify_dobrushin(mu0, nu0, dob_times, flow)
        checks.add(f"{tag}: W(mu(t), nu(t)) <= C1 W(mu0, nu0)", report.passed,
                   f"C1={report.constants.constant_C1:.6g}, max W(t)/W(0)={report.max_ratio:.4f}")
        traj = particles.integrate(ens0, problem, cfg.abs_tol, cfg.rel_tol, output_times=times,
                                   gain_sampling=cfg.gain_sampling)
        gap = max(float(np.max(np.abs(flow(t, mu0.points)
                                      - np.column_stack([traj.x[k], traj.v[k]]))))
                  for t, k in zip(times, traj.output_index))
        tol = 100 * max(cfg.abs_tol, cfg.rel_tol)
        checks.add(f"{tag}: push-forward matches integrated particles", gap <= tol,
                   f"max deviation {gap:.3e} (tol {tol:.1e})")
        records.append(SeriesRecord(("t", "L", "bound", "r"), np.column_stack([times, L, bound, r]),
                                    tag, a))
        records.append(SeriesRecord(("t", "W", "bound"),
                                    np.column_stack([report.times, report.distances,
                                                     np.full(len(report.times), report.bound)]),
                                    tag + "_dobrushin", None))
        data[a] = particles.DecaySeries(times, L, bound, r, a)
    _decay_order_check(cfg, checks, data, "L")
    return records, "L"


def _run_hydro(cfg, checks, data):
    closure = hydro.Closure(cfg.closure, cfg.grad_coeff, cfg.grad_exponent)
    records = []
    for a in cfg.alpha:
        tag = _alpha_tag(a)
        series, _ = hydro.run_hydro_experiment(a, cfg.T, cfg.Nx, cfg.cfl, cfg.seed, cfg.noise_low,
                                               cfg.noise_high, closure, cfg.scheme_order,
                                               _output_times(cfg))
        m0, p0 = series.mass[0], series.momentum[0]
        mass_err = float(np.max(np.abs(series.mass - m0)) / abs(m0))
        checks.add(f"{tag}: mass conserved to {MASS_TOL:g}", mass_err <= MASS_TOL,
                   f"relative drift {mass_err:.3e}")
        mom_err = float(np.max(np.abs(series.momentum - p0 * np.exp(-series.rate))))
        scale = abs(p0) if p0 != 0 else 1.0
        checks.add(f"{tag}: momentum = M1(0) exp(-r) to {MOMENTUM_TOL:g}",
                   mom_err <= MOMENTUM_TOL * scale, f"relative error {mom_err / scale:.3e}")
        checks.add(f"{tag}: density non-negative", np.all(series.min_density >= 0),
                   f"min rho {series.min_density.min():.4g}")
        if closure.pressureless:
            excess = float(np.max(series.lyapunov - series.bound
                                  - HYDRO_LYAPUNOV_SLACK * series.lyapunov[0]))
            checks.add(f"{tag}: Lyapunov bound (+{HYDRO_LYAPUNOV_SLACK:g} L(0))", excess <= 0,
                       f"max excess {excess:.3e}")
        else:
            checks.note(f"{tag}: Lyapunov bound check skipped; no decay estimate holds "
                        "for the Grad closure")
        records.append(SeriesRecord(
            ("t", "L", "bound", "r", "mass", "momentum"),
            np.column_stack([series.times, series.lyapunov, series.bound, series.rate,
                             series.mass, series.momentum]), tag, a))
        data[a] = series
    if closure.pressureless:
        _decay_order_check(cfg, checks, data, "L")
    return records, "L"


def _run_nonlinear(cfg, checks, data):
    spec = alignment.AlignmentKernelSpec(cfg.kernel, cfg.kernel_K, cfg.kernel_gamma, cfg.kernel_delta)
    ctrl = alignment.InstantaneousControlSpec(cfg.beta, cfg.v_desired, cfg.horizon_dt)
    ens = particles.sample_initial_conditions(particles.InitialConditionSpec(
        cfg.N, cfg.seed, cfg.noise_low, cfg.noise_high, cfg.velocity_form))
    traj = alignment.integrate_alignment(ens.x, ens.v, spec, ctrl, cfg.T, cfg.dt)
    idx = traj.recompute_index()
    cost = np.array([alignment.tracking_cost(traj.v[k], cfg.v_desired) for k in idx])
    ok = bool(np.all(np.diff(cost) < 0))
    checks.add("tracking cost decreases across every recomputation", ok,
               f"{cost[0]:.4g} -> {cost[-1]:.4g} over {len(idx) - 1} horizons")
    q = np.append(traj.controls, traj.controls[-1])
    data["trajectory"] = traj
    rec = SeriesRecord(("t", "cost", "q"), np.column_stack([traj.times[idx], cost, q]),
                       "tracking", None)
    return [rec], None


def _run_riccati(cfg, checks, data):
    records = []
    for a in cfg.alpha:
        tag = _alpha_tag(a)
        problem = riccati.ControlProblem(a, cfg.T, cfg.N)
        sol = riccati.solve_matrix_riccati(problem, cfg.riccati_steps)
        d = np.atleast_1d(riccati.closed_form_y(sol.time_grid, problem)) / cfg.N
        off = np.max(np.abs(np.concatenate([sol.K11, sol.K12, sol.K21], axis=1)), axis=(1, 2))
        eye = np.eye(cfg.N)
        dev = np.max(np.abs(sol.K22 - d[:, None, None] * eye), axis=(1, 2))
        checks.add(f"{tag}: K11, K12, K21 vanish to {STRUCTURE_TOL:g}", off.max() <= STRUCTURE_TOL,
                   f"max |K_off| {off.max():.3e}")
        checks.add(f"{tag}: K22 = d(t) Id to {GAIN_TOL:g}", dev.max() <= GAIN_TOL,
                   f"max deviation {dev.max():.3e}")
        y_num = riccati.integrate_gain_backward(problem, sol.time_grid, cfg.riccati_steps)
        gain_err = float(np.max(np.abs(y_num - d * cfg.N)))
        checks.add(f"{tag}: numerical gain matches closed form to {GAIN_TOL:g}", gain_err <= GAIN_TOL,
                   f"max error {gain_err:.3e}")
        stride = max(1, cfg.riccati_steps // 1000)
        sel = slice(None, None, stride)
        records.append(SeriesRecord(("t", "y", "y_numeric", "K22_dev", "offdiag"),
                                    np.column_stack([sol.time_grid[sel], (d * cfg.N)[sel],
                                                     y_num[sel], dev[sel], off[sel]]), tag, a))
    return records, None


_RUNNERS = {
    "particle": _run_particle,
    "meanfield": _run_meanfield,
    "hydro": _run_hydro,
    "nonlinear": _run_nonlinear,
    "riccati-check": _run_riccati,
}


def _summary(cfg, checks, artifacts):
    lines = [f"crowdctl {cfg.scale}: alpha={','.join(f'{a:g}' for a in cfg.alpha)} T={cfg.T:g} "
             f"seed={cfg.seed}"]
    for name, ok, detail in checks.items:
        lines.append(f"[{'PASS' if ok else 'FAIL'}] {name}" + (f"  ({detail})" if detail else ""))
    for note in checks.notes:
        lines.append(f"[SKIP] {note}")
    lines.append("artifacts: " + ", ".join(str(p) for p in artifacts))
    lines.append("status: " + ("all checks passed" if checks.ok else "invariant violation"))
    return "\n".join(lines) + "\n"


def run(config: ExperimentConfig) -> RunResult:
    """Run one experiment, write CSV series, plot script and summary.

    Exit status is 0 when every check passes, 1 on an invariant violation
    and 2 on a configuration error.
    """
    checks = _Checks()
    data = {}
    try:
        _validate(config)
        records, value_col = _RUNNERS[config.scale](config, checks, data)
    except (ConfigError, CapacityError, DomainError) as exc:
        return RunResult(EXIT_CONFIG, summary=f"configuration error: {exc}\n")
    out = Path(config.out)
    prefix = out / config.scale.replace("-", "_")
    artifacts = []
    if value_col is not None:
        curves = [r for r in records if "bound" in r.columns and value_col in r.columns]
        artifacts += emit_plot_data(curves, prefix, value_col,
                                    ylabel="L(t)" if config.scale != "hydro" else "Lyapunov (hydro)")
        extra = [r for r in records if not any(r is c for c in curves)]
    else:
        extra = records
    for rec in extra:
        artifacts.append(write_csv(rec, prefix.with_name(f"{prefix.name}_{rec.label}.csv")))
    summary_path = prefix.with_name(prefix.name + "_summary.txt")
    text = _summary(config, checks, artifacts)
    summary_path.write_text(text, encoding="utf-8", newline="\n")
    artifacts.append(summary_path)
    status = EXIT_OK if checks.ok else EXIT_VIOLATION
    return RunResult(status, checks.items, artifacts, text, data)
