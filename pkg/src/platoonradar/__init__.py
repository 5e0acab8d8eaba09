"""Cooperative TDM scheduling and target detection for a radar platoon.

A convoy of radar-equipped vehicles shares one coherent processing
interval: each pulse is assigned to one transmit antenna, every vehicle
receives, and the lead vehicle fuses the per-vehicle detection
statistics.  The package builds the stacked space-time steering model,
optimizes the pulse-to-antenna schedule as a quadratic assignment
problem, and evaluates the resulting detector analytically and by
Monte Carlo.
"""

__version__ = "0.1.0"

from .assignment import Assignment, assignment_to_matrix, hungarian_min
from .detection import (DetectorInputs, RocCurve, analytic_pd, analytic_pfa,
                        detection_probability_at_pfa, hypoexp_cdf, mean_h1,
                        read_roc_csv, roc_from_statistics, roc_monte_carlo,
                        simulate_test_statistics, test_statistic, whitened_energy,
                        write_roc_csv)
from .matio import read_complex_matrices, write_complex_matrices
from .scenario import (CovarianceModel, Dims, NumericalError, Scenario,
                       ScenarioError, SelectionMatrix, SelectionReport,
                       SteeringVector, Target, Vehicle, apply_tdm, array_steering,
                       doppler_steering, doppler_velocity, load_scenario,
                       scenario_fingerprint, scenario_from_dict,
                       sequential_schedule, silence_vehicle_columns, snapshot,
                       stacked_steering, target_direction, ula_positions,
                       validate_selection, vehicle_steering)
from .scheduler import (QuadraticForm, ScheduleResult, build_q,
                        build_quadratic_form, build_s_matrix, detection_weights,
                        diagonal_load, dump_objective_trace, dump_quadratic_form,
                        objective, optimize_schedule, power_iterations)
from .cli import (ConfigError, ExperimentConfig, ExperimentReport,
                  InfeasibleError, main, parse_config, run_compare, run_evaluate,
                  run_optimize, run_roc)
