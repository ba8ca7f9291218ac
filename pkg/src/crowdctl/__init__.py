"""Riccati-controlled particle systems, from single particles up to their fluid limit."""
from .errors import (CapacityError, ConfigError, CrowdCtlError, DomainError, PositivityError,
                     StiffnessError, UnsupportedInputError)
from .riccati import (ControlProblem, ControlSchedule, MatrixRiccatiSolution, closed_form_y,
                      decay_rate, exact_rate, feedback_control, solve_matrix_riccati,
                      solve_scalar_gain)
from .particles import (DecaySeries, InitialConditionSpec, ParticleEnsemble, integrate,
                        lyapunov_particle, run_particle_experiment, sample_initial_conditions)
from .meanfield import (CharacteristicFlow, EmpiricalMeasure, dobrushin_constant, meanfield_lyapunov,
                        push_forward, verify_dobrushin, wasserstein1)
from .hydro import Closure, HydroField, HydroSeries, init_hydro, run_hydro_experiment
from .alignment import (AlignmentKernelSpec, InstantaneousControlSpec, instantaneous_control,
                        integrate_alignment, tracking_cost)
from .harness import ExperimentConfig, SeriesRecord, emit_plot_data, parse_config, run

__version__ = "0.1.0"
