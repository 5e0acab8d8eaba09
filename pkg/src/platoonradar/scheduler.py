"""TDM schedule optimization.

Builds the Hermitian objective matrix S whose quadratic form over
vectorized schedules equals the schedule-dependent part of the mean
detection statistic, loads it to positive semidefiniteness, and runs
power-method-like iterations: each step solves a linear assignment
problem on the linearized objective and the objective value never
decreases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg

from .assignment import assignment_to_matrix, hungarian_min
from .matio import write_complex_matrices
from .scenario import (CovarianceModel, Dims, NumericalError, Scenario, ScenarioError,
                       SelectionMatrix, SteeringVector, stacked_steering, validate_selection)

EPSILON_DEFAULT = 1e-6
MAX_ITER_DEFAULT = 100


@dataclass(frozen=True, eq=False)
class QuadraticForm:
    """Hermitian objective matrix S and its diagonally loaded version."""

    matrix: np.ndarray   # S, (K*N*L) x (K*N*L)
    loaded: np.ndarray   # lambda_m * I + S, positive semidefinite
    lambda_m: float


@dataclass(frozen=True, eq=False)
class ScheduleResult:
    schedule: SelectionMatrix
    objective_trace: tuple
    iterations: int
    converged: bool


def build_q(steering: SteeringVector, covariance: CovarianceModel) -> list:
    """Per-vehicle blocks of Q = Diag(s)^H R^-1 Diag(s).

    R is white or block-diagonal over vehicles, so Q is returned as K
    dense (N*L*M)-square blocks; the full K*N*L*M square is never formed.
    """
    dims = steering.dims
    if len(steering.axes) != 4:
        raise ScenarioError("build_q expects the stacked steering vector")
    chunk = dims.tx * dims.pulses * dims.rx
    blocks = []
    for k in range(dims.vehicles):
        s_k = steering.values[k * chunk : (k + 1) * chunk]
        if covariance.kind == "white":
            blocks.append(np.diag(np.abs(s_k) ** 2 / covariance.noise_power).astype(complex))
            continue
        r_k = covariance.blocks[k]
        try:
            factor = scipy.linalg.cho_factor(r_k)
            r_inv = scipy.linalg.cho_solve(factor, np.eye(chunk, dtype=complex))
        except (scipy.linalg.LinAlgError, np.linalg.LinAlgError) as exc:
            raise NumericalError(f"covariance block {k} factorization failed: {exc}") from exc
        blocks.append(np.conj(s_k)[:, None] * r_inv * s_k[None, :])
    return blocks


def detection_weights(scenario: Scenario) -> np.ndarray:
    """Entry weights carrying the per-vehicle 2|alpha_k|^2 scaling of the
    mean statistic; length K*N*L, constant within each vehicle block."""
    dims = scenario.dims
    per_vehicle = np.sqrt(2.0) * np.abs(np.asarray(scenario.reflectivity, dtype=complex))
    return np.repeat(per_vehicle, dims.tx * dims.pulses)


def build_s_matrix(q_blocks, dims: Dims, weights=None) -> np.ndarray:
    """Collapse Q to the schedule-level Hermitian matrix S.

    The repetition map G = I_{KNL} kron 1_M turns S = G^H Q G into M x M
    block sums: S[a][b] = w_a w_b sum_{m,m'} Q[a*M+m][b*M+m'].
    """
    K, N, L, M = dims
    per_vehicle = N * L
    size = K * per_vehicle
    if len(q_blocks) != K:
        raise ScenarioError(f"expected {K} Q blocks, got {len(q_blocks)}")
    s = np.zeros((size, size), dtype=complex)
    for k, q_k in enumerate(q_blocks):
        q_k = np.asarray(q_k, dtype=complex)
        if q_k.shape != (per_vehicle * M, per_vehicle * M):
            raise ScenarioError(f"Q block {k} must be {per_vehicle * M} square, got {q_k.shape}")
        summed = q_k.reshape(per_vehicle, M, per_vehicle, M).sum(axis=(1, 3))
        lo = k * per_vehicle
        s[lo : lo + per_vehicle, lo : lo + per_vehicle] = summed
    if weights is not None:
        w = np.asarray(weights, dtype=float)
        if w.shape != (size,):
            raise ScenarioError(f"weights must have length {size}")
        s *= w[:, None] * w[None, :]
    return 0.5 * (s + s.conj().T)


def diagonal_load(s_matrix, eps_load: float | None = None) -> QuadraticForm:
    """Shift S by lambda_m = max(0, -lambda_min) + eps_load.

    The shift adds the constant lambda_m * L to the objective of every
    permutation, so the argmax is unchanged while the loaded matrix is
    positive semidefinite.
    """
    s = np.array(s_matrix, dtype=complex)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ScenarioError("S must be square")
    scale = float(np.max(np.abs(s))) if s.size else 0.0
    if scale and float(np.max(np.abs(s - s.conj().T))) > 1e-10 * scale:
        raise NumericalError("S is not Hermitian")
    try:
        evals = np.linalg.eigvalsh(s)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed on S: {exc}") from exc
    spectral_norm = max(abs(float(evals[0])), abs(float(evals[-1])))
    if eps_load is None:
        eps_load = 1e-9 * spectral_norm
    lambda_m = max(0.0, -float(evals[0])) + eps_load
    loaded = s + lambda_m * np.eye(s.shape[0])
    for arr in (s, loaded):
        arr.setflags(write=False)
    return QuadraticForm(matrix=s, loaded=loaded, lambda_m=float(lambda_m))


def _loaded_matrix(form) -> np.ndarray:
    if isinstance(form, QuadraticForm):
        return form.loaded
    return np.asarray(form, dtype=complex)


def objective(form, schedule: SelectionMatrix) -> float:
    """Real value of vec(J)^H S vec(J); raises if the form is materially complex."""
    matrix = _loaded_matrix(form)
    x = schedule.vec()
    if matrix.shape != (x.size, x.size):
        raise ScenarioError(f"matrix is {matrix.shape}, schedule vec has length {x.size}")
    value = complex(x @ (matrix @ x))
    if abs(value.imag) > 1e-10 * max(abs(value.real), 1.0):
        raise NumericalError(f"quadratic form is not real: {value}")
    return value.real


def power_iterations(form, j0: SelectionMatrix, epsilon: float = EPSILON_DEFAULT,
                     max_iter: int = MAX_ITER_DEFAULT) -> ScheduleResult:
    """Maximize vec(J)^H S_loaded vec(J) over permutation schedules.

    Each iteration linearizes at the current schedule and solves the
    resulting assignment problem; stops when the relative objective
    change drops below epsilon or max_iter is hit.  A zero objective
    denominator is degenerate and treated as converged.
    """
    if epsilon <= 0:
        raise ScenarioError("epsilon must be positive")
    if max_iter < 1:
        raise ScenarioError("max_iter must be >= 1")
    report = validate_selection(j0)
    if not report.ok or j0.num_pulses != j0.num_columns:
        raise ScenarioError(f"J0 is not a permutation schedule: {report.violation or 'not square'}")
    matrix = _loaded_matrix(form)
    size = j0.num_pulses
    if matrix.shape != (size * size, size * size):
        raise ScenarioError(f"loaded matrix is {matrix.shape}, schedule needs {(size * size,) * 2}")

    current = j0
    x = current.vec()
    previous = objective(matrix, current)
    trace = [previous]
    iterations = 0
    converged = False
    for _ in range(max_iter):
        linearized = -(matrix @ x).reshape((size, size), order="F")
        step = hungarian_min(linearized.real)
        current = assignment_to_matrix(step, size)
        x = current.vec()
        value = objective(matrix, current)
        trace.append(value)
        iterations += 1
        if previous == 0.0:
            converged = True
            break
        if abs(value - previous) / abs(previous) < epsilon:
            converged = True
            break
        previous = value
    return ScheduleResult(schedule=current, objective_trace=tuple(trace),
                          iterations=iterations, converged=converged)


def optimize_schedule(form, restarts: int = 1, seed: int | None = None,
                      epsilon: float = EPSILON_DEFAULT, max_iter: int = MAX_ITER_DEFAULT) -> ScheduleResult:
    """Best-of-restarts wrapper around power_iterations.

    Restart 0 starts from the identity schedule; further restarts use
    seeded random permutations.  Ties keep the lowest restart index.
    """
    if restarts < 1:
        raise ScenarioError("restarts must be >= 1")
    matrix = _loaded_matrix(form)
    size = math.isqrt(matrix.shape[0])
    if size * size != matrix.shape[0]:
        raise ScenarioError("loaded matrix dimension is not a perfect square")
    rng = np.random.default_rng(seed)
    best = None
    for restart in range(restarts):
        if restart == 0:
            start = SelectionMatrix.identity(size)
        else:
            start = SelectionMatrix.from_permutation(rng.permutation(size))
        result = power_iterations(matrix, start, epsilon=epsilon, max_iter=max_iter)
        if best is None or result.objective_trace[-1] > best.objective_trace[-1]:
            best = result
    return best


def build_quadratic_form(scenario: Scenario) -> QuadraticForm:
    """Scenario-to-QAP pipeline: steering, Q blocks, weighted S, loading."""
    steering = stacked_steering(scenario)
    q_blocks = build_q(steering, scenario.covariance)
    s = build_s_matrix(q_blocks, scenario.dims, weights=detection_weights(scenario))
    return diagonal_load(s)


def dump_quadratic_form(form: QuadraticForm, path: str | Path) -> None:
    """Write the loaded matrix for offline inspection (matio record format)."""
    write_complex_matrices(path, [form.loaded])


def dump_objective_trace(trace, path: str | Path) -> None:
    Path(path).write_text("\n".join(f"{float(v):.17g}" for v in trace) + "\n")
