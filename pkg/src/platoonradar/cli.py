"""Experiment runner: load a config, schedule, simulate, write artifacts.

The config is a single JSON object.  Sections radar/vehicles/target/noise
describe the scenario; optimizer/monte_carlo/experiment control the run
and are parsed here.  Unknown keys anywhere are hard errors so a typo
never silently falls back to a default.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .detection import (ALPHA_MODELS, NUM_THRESHOLDS_DEFAULT, DetectorInputs,
                        detection_probability_at_pfa, mean_h1, roc_from_statistics,
                        simulate_test_statistics, write_roc_csv)
from .scenario import (NumericalError, Scenario, ScenarioError, SelectionMatrix,
                       _as_number, _as_section, _pop, _reject_unknown,
                       scenario_fingerprint, scenario_from_dict, sequential_schedule,
                       silence_vehicle_columns)
from .scheduler import (EPSILON_DEFAULT, MAX_ITER_DEFAULT, build_quadratic_form,
                        objective, optimize_schedule)

MODES = ("optimize", "evaluate", "roc", "compare")

#: operating points reported alongside the full ROC curves
PFA_GRID = (0.05, 0.1, 0.2)


class ConfigError(ValueError):
    """Experiment configuration is malformed or inconsistent."""


class InfeasibleError(ValueError):
    """The requested mode cannot run at the configured problem size."""


@dataclass(frozen=True)
class ExperimentConfig:
    scenario_path: Path
    mode: str = "compare"
    epsilon: float = EPSILON_DEFAULT
    max_iter: int = MAX_ITER_DEFAULT
    restarts: int = 1
    seed: int = 0
    trials: int = 10_000
    alpha_model: str = "fluctuating"
    output_dir: Path = Path("out")
    num_thresholds: int = NUM_THRESHOLDS_DEFAULT
    vehicle_subset: tuple | None = None


@dataclass(frozen=True, eq=False)
class ExperimentReport:
    """Everything needed to reconstruct a run: schedule, trace, objectives,
    artifact paths, timings and the configuration that produced them."""

    mode: str
    permutation: tuple | None
    objective_trace: tuple
    objectives: dict
    roc_files: tuple
    timings: dict
    config_echo: dict
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        payload = {
            "mode": self.mode,
            "permutation": list(self.permutation) if self.permutation is not None else None,
            "objective_trace": list(self.objective_trace),
            "objectives": dict(self.objectives),
            "roc_files": list(self.roc_files),
            "timings_s": dict(self.timings),
            "config": dict(self.config_echo),
        }
        payload.update(self.extras)
        return payload


# ---------------------------------------------------------------------------
# configuration


def _vehicle_subset(value, num_vehicles: int) -> tuple:
    path = "monte_carlo.vehicle_subset"
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError(f"{path}: expected a nonempty list of vehicle indices")
    indices = {int(_as_number(v, f"{path}[{i}]", minimum=0, integer=True))
               for i, v in enumerate(value)}
    subset = tuple(sorted(indices))
    if subset[-1] >= num_vehicles:
        raise ConfigError(f"{path}: vehicle {subset[-1]} out of range, "
                          f"scenario has {num_vehicles} vehicles")
    return subset


def parse_config(path: str | Path) -> tuple[ExperimentConfig, Scenario]:
    """Read an experiment JSON file into a config plus the scenario it embeds.

    The optimizer/monte_carlo/experiment sections are consumed here; the
    rest of the document goes through the scenario schema.  Every error
    names the offending key path.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    data = dict(data)

    try:
        optimizer = _as_section(data.pop("optimizer", {}), "optimizer")
        epsilon = _as_number(_pop(optimizer, "epsilon", "optimizer", EPSILON_DEFAULT),
                             "optimizer.epsilon", positive=True)
        max_iter = _as_number(_pop(optimizer, "max_iter", "optimizer", MAX_ITER_DEFAULT),
                              "optimizer.max_iter", minimum=1, integer=True)
        restarts = _as_number(_pop(optimizer, "restarts", "optimizer", 1),
                              "optimizer.restarts", minimum=1, integer=True)
        _reject_unknown(optimizer, "optimizer")

        monte_carlo = _as_section(data.pop("monte_carlo", {}), "monte_carlo")
        trials = _as_number(_pop(monte_carlo, "trials", "monte_carlo", 10_000),
                            "monte_carlo.trials", minimum=1, integer=True)
        seed = _as_number(_pop(monte_carlo, "seed", "monte_carlo", 0),
                          "monte_carlo.seed", minimum=0, integer=True)
        alpha_model = _pop(monte_carlo, "alpha_model", "monte_carlo", "fluctuating")
        if alpha_model not in ALPHA_MODELS:
            raise ConfigError(f"monte_carlo.alpha_model: must be one of "
                              f"{ALPHA_MODELS}, got {alpha_model!r}")
        thresholds = _as_number(
            _pop(monte_carlo, "thresholds", "monte_carlo", NUM_THRESHOLDS_DEFAULT),
            "monte_carlo.thresholds", minimum=2, integer=True)
        subset_raw = _pop(monte_carlo, "vehicle_subset", "monte_carlo", None)
        _reject_unknown(monte_carlo, "monte_carlo")

        experiment = _as_section(data.pop("experiment", {}), "experiment")
        mode = _pop(experiment, "mode", "experiment", "compare")
        if mode not in MODES:
            raise ConfigError(f"experiment.mode: must be one of {MODES}, got {mode!r}")
        output_dir = _pop(experiment, "output_dir", "experiment", "out")
        if not isinstance(output_dir, str) or not output_dir:
            raise ConfigError("experiment.output_dir: expected a nonempty string")
        _reject_unknown(experiment, "experiment")
    except ScenarioError as exc:
        raise ConfigError(str(exc)) from exc

    scenario = scenario_from_dict(data, base_dir=path.parent)
    subset = None if subset_raw is None else _vehicle_subset(subset_raw, scenario.num_vehicles)

    config = ExperimentConfig(scenario_path=path, mode=mode, epsilon=epsilon,
                              max_iter=max_iter, restarts=restarts, seed=seed,
                              trials=trials, alpha_model=alpha_model,
                              output_dir=Path(output_dir), num_thresholds=thresholds,
                              vehicle_subset=subset)
    return config, scenario


def _check_overrides(config: ExperimentConfig) -> None:
    if config.trials < 1:
        raise ConfigError("--trials must be >= 1")
    if config.seed < 0:
        raise ConfigError("--seed must be >= 0")
    if config.restarts < 1:
        raise ConfigError("--restarts must be >= 1")
    if not config.epsilon > 0:
        raise ConfigError("--epsilon must be positive")


def _config_echo(config: ExperimentConfig) -> dict:
    echo = dataclasses.asdict(config)
    echo["scenario_path"] = str(config.scenario_path)
    echo["output_dir"] = str(config.output_dir)
    if config.vehicle_subset is not None:
        echo["vehicle_subset"] = list(config.vehicle_subset)
    return echo


# ---------------------------------------------------------------------------
# runners


def _package_version() -> str:
    from platoonradar import __version__
    return __version__


def _ensure_scenario(config: ExperimentConfig, scenario: Scenario | None) -> Scenario:
    if scenario is None:
        scenario = parse_config(config.scenario_path)[1]
    return scenario


def _require_square(scenario: Scenario, mode: str) -> None:
    size = scenario.num_vehicles * scenario.num_tx
    if scenario.num_pulses != size:
        raise InfeasibleError(f"{mode} mode requires num_pulses = K*N "
                              f"(L={scenario.num_pulses}, K*N={size})")


def _require_feasible(scenario: Scenario, mode: str) -> None:
    size = scenario.num_vehicles * scenario.num_tx
    if scenario.num_pulses < size:
        raise InfeasibleError(f"{mode} mode requires num_pulses >= K*N "
                              f"(L={scenario.num_pulses}, K*N={size})")


def _recheck_trace(trace) -> None:
    """The scheduler already guarantees a nondecreasing trace; re-assert it
    here so a report never ships with a regression in it."""
    values = np.asarray(trace, dtype=float)
    if values.size < 2:
        return
    slack = 1e-9 * np.maximum(np.abs(values[:-1]), 1.0)
    drops = np.flatnonzero(np.diff(values) < -slack)
    if drops.size:
        raise NumericalError(f"objective trace decreased at iteration {int(drops[0]) + 1}")


def _masked(schedule: SelectionMatrix, config: ExperimentConfig,
            scenario: Scenario) -> SelectionMatrix:
    if config.vehicle_subset is None:
        return schedule
    return silence_vehicle_columns(schedule, config.vehicle_subset, scenario.num_tx)


def _schedule_columns(schedule: SelectionMatrix) -> list:
    """Active column per pulse; None for silent pulses (L > K*N tail)."""
    columns = []
    for row in schedule.entries:
        hits = np.flatnonzero(row)
        columns.append(int(hits[0]) if hits.size else None)
    return columns


def _write_report(report: ExperimentReport, config: ExperimentConfig) -> Path:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    target = out / "report.json"
    target.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    return target


def _roc_products(scenario: Scenario, schedule: SelectionMatrix,
                  config: ExperimentConfig):
    """Simulate once, then derive the curve and the spot P_D values."""
    zeta0, zeta1 = simulate_test_statistics(scenario, schedule, config.trials,
                                            config.seed, config.alpha_model)
    curve = roc_from_statistics(zeta0, zeta1, config.trials, config.seed,
                                config.num_thresholds)
    pd_at = {str(p): detection_probability_at_pfa(zeta0, zeta1, p) for p in PFA_GRID}
    return curve, pd_at


def run_optimize(config: ExperimentConfig, scenario: Scenario | None = None) -> ExperimentReport:
    """Build the quadratic form, optimize the schedule, report the trace."""
    scenario = _ensure_scenario(config, scenario)
    _require_square(scenario, "optimize")
    timings = {}
    start = time.perf_counter()
    form = build_quadratic_form(scenario)
    timings["build_form"] = time.perf_counter() - start
    start = time.perf_counter()
    result = optimize_schedule(form, restarts=config.restarts, seed=config.seed,
                               epsilon=config.epsilon, max_iter=config.max_iter)
    timings["optimize"] = time.perf_counter() - start
    _recheck_trace(result.objective_trace)
    identity = SelectionMatrix.identity(scenario.num_pulses)
    objectives = {"identity": objective(form, identity),
                  "optimized": objective(form, result.schedule)}
    report = ExperimentReport(
        mode="optimize",
        permutation=tuple(int(p) for p in result.schedule.to_permutation()),
        objective_trace=tuple(float(f) for f in result.objective_trace),
        objectives=objectives,
        roc_files=(),
        timings=timings,
        config_echo=_config_echo(config),
        extras={"iterations": result.iterations, "converged": result.converged,
                "scenario_hash": scenario_fingerprint(scenario),
                "version": _package_version()},
    )
    _write_report(report, config)
    return report


def run_evaluate(config: ExperimentConfig, scenario: Scenario | None = None) -> ExperimentReport:
    """Analytic figures for the sequential baseline: objective, whitened
    energies, H1 means.  No Monte Carlo."""
    scenario = _ensure_scenario(config, scenario)
    _require_feasible(scenario, "evaluate")
    schedule = _masked(sequential_schedule(scenario.num_pulses,
                                           scenario.num_vehicles * scenario.num_tx),
                       config, scenario)
    timings = {}
    start = time.perf_counter()
    form = build_quadratic_form(scenario)
    objectives = {"sequential": objective(form, schedule)}
    timings["build_form"] = time.perf_counter() - start
    inputs = DetectorInputs.from_scenario(scenario, schedule)
    report = ExperimentReport(
        mode="evaluate",
        permutation=None,
        objective_trace=(),
        objectives=objectives,
        roc_files=(),
        timings=timings,
        config_echo=_config_echo(config),
        extras={"schedule_columns": _schedule_columns(schedule),
                "whitened_energies": [float(c) for c in inputs.energies],
                "mean_h1_exact": mean_h1(inputs),
                "mean_h1_simplified": mean_h1(inputs, simplified=True),
                "scenario_hash": scenario_fingerprint(scenario),
                "version": _package_version()},
    )
    _write_report(report, config)
    return report


def run_roc(config: ExperimentConfig, scenario: Scenario | None = None) -> ExperimentReport:
    """Monte Carlo ROC for the sequential baseline schedule."""
    scenario = _ensure_scenario(config, scenario)
    _require_feasible(scenario, "roc")
    schedule = _masked(sequential_schedule(scenario.num_pulses,
                                           scenario.num_vehicles * scenario.num_tx),
                       config, scenario)
    fingerprint = scenario_fingerprint(scenario)
    timings = {}
    start = time.perf_counter()
    curve, pd_at = _roc_products(scenario, schedule, config)
    timings["simulate"] = time.perf_counter() - start
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    roc_path = out / "roc_sequential.csv"
    write_roc_csv(curve, roc_path, fingerprint)
    report = ExperimentReport(
        mode="roc",
        permutation=None,
        objective_trace=(),
        objectives={},
        roc_files=(str(roc_path),),
        timings=timings,
        config_echo=_config_echo(config),
        extras={"pd_at_pfa": {"sequential": pd_at},
                "schedule_columns": _schedule_columns(schedule),
                "scenario_hash": fingerprint,
                "version": _package_version()},
    )
    _write_report(report, config)
    return report


def run_compare(config: ExperimentConfig, scenario: Scenario | None = None) -> ExperimentReport:
    """Optimize the schedule, then run paired-seed Monte Carlo for it and
    the identity baseline; writes both ROC curves and the report."""
    scenario = _ensure_scenario(config, scenario)
    _require_square(scenario, "compare")
    timings = {}
    total_start = time.perf_counter()

    start = time.perf_counter()
    form = build_quadratic_form(scenario)
    timings["build_form"] = time.perf_counter() - start

    start = time.perf_counter()
    result = optimize_schedule(form, restarts=config.restarts, seed=config.seed,
                               epsilon=config.epsilon, max_iter=config.max_iter)
    timings["optimize"] = time.perf_counter() - start
    _recheck_trace(result.objective_trace)

    identity = SelectionMatrix.identity(scenario.num_pulses)
    objectives = {"identity": objective(form, identity),
                  "optimized": objective(form, result.schedule)}

    fingerprint = scenario_fingerprint(scenario)
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    roc_files, pd_at_pfa, means = [], {}, {}
    start = time.perf_counter()
    for label, schedule in (("identity", identity), ("optimized", result.schedule)):
        masked = _masked(schedule, config, scenario)
        curve, pd_at = _roc_products(scenario, masked, config)
        roc_path = out / f"roc_{label}.csv"
        write_roc_csv(curve, roc_path, fingerprint)
        roc_files.append(str(roc_path))
        pd_at_pfa[label] = pd_at
        means[label] = mean_h1(DetectorInputs.from_scenario(scenario, masked))
    timings["simulate"] = time.perf_counter() - start
    timings["total"] = time.perf_counter() - total_start

    report = ExperimentReport(
        mode="compare",
        permutation=tuple(int(p) for p in result.schedule.to_permutation()),
        objective_trace=tuple(float(f) for f in result.objective_trace),
        objectives=objectives,
        roc_files=tuple(roc_files),
        timings=timings,
        config_echo=_config_echo(config),
        extras={"pd_at_pfa": pd_at_pfa, "mean_h1_exact": means,
                "iterations": result.iterations, "converged": result.converged,
                "scenario_hash": fingerprint,
                "version": _package_version()},
    )
    _write_report(report, config)
    return report


_RUNNERS = {"optimize": run_optimize, "evaluate": run_evaluate,
            "roc": run_roc, "compare": run_compare}


# ---------------------------------------------------------------------------
# entry point


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="platoonradar",
        description="TDM schedule optimization and detection experiments "
                    "for a cooperative vehicle platoon radar.")
    parser.add_argument("--config", required=True, type=Path,
                        help="experiment JSON file")
    parser.add_argument("--mode", choices=MODES, help="override experiment.mode")
    parser.add_argument("--seed", type=int, help="override monte_carlo.seed")
    parser.add_argument("--trials", type=int, help="override monte_carlo.trials")
    parser.add_argument("--out", type=Path, help="override experiment.output_dir")
    parser.add_argument("--restarts", type=int, help="override optimizer.restarts")
    parser.add_argument("--epsilon", type=float, help="override optimizer.epsilon")
    return parser


def _summary_lines(report: ExperimentReport, config: ExperimentConfig) -> list:
    lines = [f"mode: {report.mode}"]
    for name in sorted(report.objectives):
        lines.append(f"objective[{name}]: {report.objectives[name]:.6g}")
    pd_at_pfa = report.extras.get("pd_at_pfa", {})
    for name in sorted(pd_at_pfa):
        spots = "  ".join(f"pd@pfa={pfa}: {value:.4f}"
                          for pfa, value in sorted(pd_at_pfa[name].items()))
        lines.append(f"{name}: {spots}")
    lines.append(f"report: {Path(config.output_dir) / 'report.json'}")
    return lines


def main(argv=None) -> int:
    args = build_arg_parser().parse_args(argv)
    try:
        config, scenario = parse_config(args.config)
        overrides = {}
        if args.mode is not None:
            overrides["mode"] = args.mode
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.trials is not None:
            overrides["trials"] = args.trials
        if args.out is not None:
            overrides["output_dir"] = args.out
        if args.restarts is not None:
            overrides["restarts"] = args.restarts
        if args.epsilon is not None:
            overrides["epsilon"] = args.epsilon
        if overrides:
            config = dataclasses.replace(config, **overrides)
            _check_overrides(config)
        report = _RUNNERS[config.mode](config, scenario=scenario)
    except (ConfigError, ScenarioError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except InfeasibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    for line in _summary_lines(report, config):
        print(line)
    return 0


if __name__ == "__main__":
    sys.exit(main())
