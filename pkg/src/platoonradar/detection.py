"""Detection statistics and Monte Carlo ROC estimation.

The per-vehicle matched-filter outputs are independent, so under H0
the test statistic is a sum of independent exponentials and its CDF is
hypo-exponential.  Monte Carlo trials draw circular complex Gaussian
noise per vehicle, optionally adding a fluctuating target whose
reflectivity is zero-mean complex Gaussian with E|alpha_k|^2 = 2|a_k|^2,
which reproduces the analytic H1 mean by construction.
"""

from __future__ import annotations

import json
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg

from .scenario import (CovarianceModel, NumericalError, Scenario, ScenarioError,
                       SelectionMatrix, apply_tdm, stacked_steering)

ALPHA_MODELS = ("fixed", "fluctuating")
NUM_THRESHOLDS_DEFAULT = 512

#: trials per RNG block; fixed so that trial i's variates depend only on
#: (seed, i) and block-parallel execution reproduces serial results
TRIAL_BLOCK = 4096

THREAD_ENV_VAR = "PLATOONRADAR_THREADS"


@dataclass(frozen=True, eq=False)
class DetectorInputs:
    """Masked per-vehicle steering, covariance and reflectivity, with the
    whitened quantities the statistic needs precomputed."""

    masked_steering: tuple
    covariance: CovarianceModel
    reflectivity: tuple
    whitened: tuple = field(init=False, repr=False)
    energies: np.ndarray = field(init=False, repr=False)
    _chol: tuple | None = field(init=False, repr=False)

    def __post_init__(self):
        steering = tuple(np.asarray(s, dtype=complex).ravel() for s in self.masked_steering)
        if not steering:
            raise ScenarioError("at least one vehicle is required")
        dim = steering[0].size
        if any(s.size != dim for s in steering):
            raise ScenarioError("per-vehicle steering vectors must share one length")
        alphas = tuple(complex(a) for a in self.reflectivity)
        if len(alphas) != len(steering):
            raise ScenarioError("reflectivity must list one value per vehicle")
        chol = None
        if self.covariance.kind == "white":
            sigma = np.sqrt(self.covariance.noise_power)
            whitened = tuple(s / sigma for s in steering)
        else:
            if len(self.covariance.blocks) != len(steering) or self.covariance.block_dim != dim:
                raise ScenarioError("covariance blocks do not match steering dimensions")
            chol, whitened = [], []
            for k, s_k in enumerate(steering):
                try:
                    factor = np.linalg.cholesky(self.covariance.blocks[k])
                except np.linalg.LinAlgError as exc:
                    raise NumericalError(f"covariance block {k} factorization failed") from exc
                chol.append(factor)
                whitened.append(scipy.linalg.solve_triangular(factor, s_k, lower=True))
            chol, whitened = tuple(chol), tuple(whitened)
        energies = np.array([float(np.vdot(g, g).real) for g in whitened])
        object.__setattr__(self, "masked_steering", steering)
        object.__setattr__(self, "reflectivity", alphas)
        object.__setattr__(self, "whitened", whitened)
        object.__setattr__(self, "energies", energies)
        object.__setattr__(self, "_chol", chol)

    @classmethod
    def from_scenario(cls, scenario: Scenario, schedule: SelectionMatrix) -> "DetectorInputs":
        masked = apply_tdm(schedule, stacked_steering(scenario))
        chunk = scenario.num_tx * scenario.num_pulses * scenario.num_rx
        parts = tuple(masked.values[k * chunk : (k + 1) * chunk]
                      for k in range(scenario.num_vehicles))
        return cls(parts, scenario.covariance, scenario.reflectivity)

    @property
    def num_vehicles(self) -> int:
        return len(self.masked_steering)

    @property
    def denominators(self) -> np.ndarray:
        """Per-vehicle |alpha_k|^2 / 2 + C_k."""
        amag2 = np.abs(np.asarray(self.reflectivity)) ** 2
        return amag2 / 2.0 + self.energies

    def whiten(self, vehicle: int, vector: np.ndarray) -> np.ndarray:
        vector = np.asarray(vector, dtype=complex).ravel()
        if vector.size != self.masked_steering[vehicle].size:
            raise ScenarioError(f"measurement for vehicle {vehicle} has wrong length")
        if self._chol is None:
            return vector / np.sqrt(self.covariance.noise_power)
        return scipy.linalg.solve_triangular(self._chol[vehicle], vector, lower=True)


@dataclass(frozen=True, eq=False)
class RocCurve:
    thresholds: np.ndarray
    pfa: np.ndarray
    pd: np.ndarray
    trials: int
    rng_seed: int


def whitened_energy(masked_steering, covariance_block) -> float:
    """C_k = s^H R^-1 s for one vehicle; real and nonnegative."""
    s = np.asarray(masked_steering, dtype=complex).ravel()
    r = np.asarray(covariance_block, dtype=complex)
    if r.shape != (s.size, s.size):
        raise ScenarioError(f"covariance is {r.shape}, steering has length {s.size}")
    try:
        factor = scipy.linalg.cho_factor(r)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"covariance factorization failed: {exc}") from exc
    value = complex(np.vdot(s, scipy.linalg.cho_solve(factor, s)))
    if abs(value.imag) > 1e-10 * max(abs(value.real), 1.0):
        raise NumericalError(f"whitened energy is not real: {value}")
    return max(value.real, 0.0)


def test_statistic(measurements, inputs: DetectorInputs) -> float:
    """zeta = sum_k |s_k^H R_k^-1 y_k|^2 / (|alpha_k|^2/2 + C_k).

    Vehicles whose masked steering is identically zero contribute
    nothing and are skipped.
    """
    if len(measurements) != inputs.num_vehicles:
        raise ScenarioError(f"expected {inputs.num_vehicles} measurement vectors")
    denominators = inputs.denominators
    value = 0.0
    for k, y_k in enumerate(measurements):
        if inputs.energies[k] == 0.0:
            continue
        z = np.vdot(inputs.whitened[k], inputs.whiten(k, y_k))
        value += abs(z) ** 2 / denominators[k]
    return float(value)


def mean_h1(inputs: DetectorInputs, simplified: bool = False) -> float:
    """Mean of the statistic under H1 with fluctuating reflectivity.

    The simplified form sum_k (1 + 2|alpha_k|^2 C_k) assumes
    C_k >> |alpha_k|^2 / 2 and warns when C_k < 10 * |alpha_k|^2 / 2.
    """
    amag2 = np.abs(np.asarray(inputs.reflectivity)) ** 2
    c = inputs.energies
    if simplified:
        low = np.flatnonzero(c < 10.0 * amag2 / 2.0)
        if low.size:
            warnings.warn(f"simplified H1 mean is inaccurate for vehicles {low.tolist()}: "
                          "C_k < 10*|alpha_k|^2/2", RuntimeWarning, stacklevel=2)
        return float(np.sum(1.0 + 2.0 * amag2 * c))
    return float(np.sum((c + 2.0 * amag2 * c**2) / (amag2 / 2.0 + c)))


def hypoexp_cdf(rates, t):
    """CDF of a sum of independent exponentials with the given rates.

    Uses the distinct-rate closed form; any pair of rates closer than a
    1e-6 relative gap switches to the matrix exponential of the
    bidiagonal generator, which stays stable through Erlang limits.
    Accepts scalar or array t; t < 0 maps to 0.
    """
    lam = np.atleast_1d(np.asarray(rates, dtype=float))
    if lam.size == 0 or not np.all(np.isfinite(lam)) or np.any(lam <= 0):
        raise ValueError("rates must be a nonempty list of positive finite numbers")
    t_arr = np.asarray(t, dtype=float)
    out = np.zeros(t_arr.shape if t_arr.ndim else (1,))
    t_flat = np.atleast_1d(t_arr)
    positive = t_flat > 0

    gaps = np.abs(lam[:, None] - lam[None, :]) / np.maximum(lam[:, None], lam[None, :])
    near_equal = np.any(gaps[np.triu_indices(lam.size, k=1)] < 1e-6) if lam.size > 1 else False
    if near_equal:
        generator = np.diag(-lam) + np.diag(lam[:-1], k=1)
        values = np.empty(int(np.count_nonzero(positive)))
        for i, ti in enumerate(t_flat[positive]):
            values[i] = 1.0 - scipy.linalg.expm(generator * ti)[0, :].sum().real
        out[positive] = values
    else:
        weights = np.array([np.prod([lj / (lj - lk) for lj in lam if lj != lk]) for lk in lam])
        out[positive] = 1.0 - np.exp(-np.outer(t_flat[positive], lam)) @ weights
    out = np.clip(out, 0.0, 1.0)
    return out.reshape(t_arr.shape) if t_arr.ndim else float(out[0])


def _h0_rates(inputs: DetectorInputs) -> np.ndarray:
    """Rates of the per-vehicle exponential terms under H0; zero-energy
    vehicles contribute no term and are dropped with a warning."""
    c = inputs.energies
    dropped = np.flatnonzero(c == 0.0)
    if dropped.size:
        warnings.warn(f"vehicles {dropped.tolist()} have zero whitened energy; "
                      "their terms are dropped", RuntimeWarning, stacklevel=3)
    active = c > 0.0
    return inputs.denominators[active] / c[active]


def analytic_pfa(inputs: DetectorInputs, gamma) -> float:
    """P_FA = 1 - F_H0(gamma) with per-vehicle rates (|a|^2/2 + C_k)/C_k."""
    rates = _h0_rates(inputs)
    if rates.size == 0:
        return 1.0 if np.any(np.asarray(gamma) <= 0) else 0.0
    return 1.0 - hypoexp_cdf(rates, gamma)


def analytic_pd(inputs: DetectorInputs, gamma) -> float:
    """P_D under the fluctuating-reflectivity model, where each term is
    exponential with mean (C_k + 2|alpha_k|^2 C_k^2)/(|alpha_k|^2/2 + C_k)."""
    c = inputs.energies
    active = c > 0.0
    if not np.any(active):
        return 1.0 if np.any(np.asarray(gamma) <= 0) else 0.0
    amag2 = (np.abs(np.asarray(inputs.reflectivity)) ** 2)[active]
    c = c[active]
    rates = inputs.denominators[active] / (c + 2.0 * amag2 * c**2)
    return 1.0 - hypoexp_cdf(rates, gamma)


# ---------------------------------------------------------------------------
# Monte Carlo


def _thread_count() -> int:
    raw = os.environ.get(THREAD_ENV_VAR, "1")
    try:
        count = int(raw)
    except ValueError:
        raise ScenarioError(f"{THREAD_ENV_VAR} must be an integer, got {raw!r}")
    return max(1, count)


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))


def simulate_test_statistics(scenario: Scenario, schedule: SelectionMatrix, trials: int,
                             seed: int, alpha_model: str = "fluctuating"):
    """Draw the statistic under both hypotheses; returns (zeta_h0, zeta_h1).

    Trial i's random variates depend only on (seed, i): trials are
    generated in fixed-size blocks with one child stream per block, so
    block-parallel and serial execution agree bit for bit.
    """
    inputs = DetectorInputs.from_scenario(scenario, schedule)
    return _simulate(inputs, trials, seed, alpha_model)


def _simulate(inputs: DetectorInputs, trials: int, seed: int, alpha_model: str):
    if trials < 1:
        raise ScenarioError("trials must be >= 1")
    if alpha_model not in ALPHA_MODELS:
        raise ScenarioError(f"alpha_model must be one of {ALPHA_MODELS}, got {alpha_model!r}")
    num_vehicles = inputs.num_vehicles
    dim = inputs.masked_steering[0].size
    whitened = np.stack(inputs.whitened)          # (K, dim)
    energies = inputs.energies
    denominators = inputs.denominators
    weights = np.where(denominators > 0.0, 1.0 / np.where(denominators > 0.0, denominators, 1.0), 0.0)
    alpha_abs = np.abs(np.asarray(inputs.reflectivity))
    alpha_fixed = np.asarray(inputs.reflectivity)

    zeta0 = np.empty(trials)
    zeta1 = np.empty(trials)

    def run_block(block: int) -> None:
        start = block * TRIAL_BLOCK
        stop = min(start + TRIAL_BLOCK, trials)
        count = stop - start
        rng = _block_rng(seed, block)
        z0 = np.empty((count, num_vehicles), dtype=complex)
        for k in range(num_vehicles):
            xy = rng.standard_normal((count, dim, 2))
            noise = (xy[..., 0] + 1j * xy[..., 1]) * np.sqrt(0.5)
            z0[:, k] = noise @ np.conj(whitened[k])
        if alpha_model == "fluctuating":
            ab = rng.standard_normal((count, num_vehicles, 2))
            alpha = (ab[..., 0] + 1j * ab[..., 1]) * alpha_abs
        else:
            alpha = np.broadcast_to(alpha_fixed, (count, num_vehicles))
        zeta0[start:stop] = (np.abs(z0) ** 2) @ weights
        zeta1[start:stop] = (np.abs(alpha * energies + z0) ** 2) @ weights

    blocks = range((trials + TRIAL_BLOCK - 1) // TRIAL_BLOCK)
    threads = _thread_count()
    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run_block, blocks))
    else:
        for block in blocks:
            run_block(block)
    return zeta0, zeta1


def roc_from_statistics(zeta_h0: np.ndarray, zeta_h1: np.ndarray, trials: int, seed: int,
                        num_thresholds: int = NUM_THRESHOLDS_DEFAULT) -> RocCurve:
    """Empirical ROC on a quantile grid of the pooled statistics."""
    if num_thresholds < 2:
        raise ScenarioError("num_thresholds must be >= 2")
    pooled = np.concatenate([zeta_h0, zeta_h1])
    thresholds = np.quantile(pooled, np.linspace(0.0, 1.0, num_thresholds))
    sorted0 = np.sort(zeta_h0)
    sorted1 = np.sort(zeta_h1)
    pfa = 1.0 - np.searchsorted(sorted0, thresholds, side="right") / zeta_h0.size
    pd = 1.0 - np.searchsorted(sorted1, thresholds, side="right") / zeta_h1.size
    for arr in (thresholds, pfa, pd):
        arr.setflags(write=False)
    return RocCurve(thresholds=thresholds, pfa=pfa, pd=pd, trials=trials, rng_seed=seed)


def roc_monte_carlo(scenario: Scenario, schedule: SelectionMatrix, trials: int, seed: int,
                    alpha_model: str = "fluctuating",
                    num_thresholds: int = NUM_THRESHOLDS_DEFAULT) -> RocCurve:
    """Simulate both hypotheses and sweep thresholds; reproducible from seed."""
    zeta0, zeta1 = simulate_test_statistics(scenario, schedule, trials, seed, alpha_model)
    return roc_from_statistics(zeta0, zeta1, trials, seed, num_thresholds)


def detection_probability_at_pfa(zeta_h0: np.ndarray, zeta_h1: np.ndarray, pfa: float) -> float:
    """P_D at the threshold set to the empirical (1 - pfa) quantile of H0."""
    if not 0.0 < pfa < 1.0:
        raise ScenarioError("pfa must lie strictly between 0 and 1")
    gamma = np.quantile(zeta_h0, 1.0 - pfa)
    return float(np.mean(zeta_h1 > gamma))


# ---------------------------------------------------------------------------
# serialization


def write_roc_csv(curve: RocCurve, path: str | Path, scenario_hash: str = "") -> None:
    """Write (threshold, pfa, pd) rows plus a JSON sidecar with the seed,
    trial count and scenario hash."""
    path = Path(path)
    lines = ["threshold,pfa,pd"]
    for gamma, pfa, pd in zip(curve.thresholds, curve.pfa, curve.pd):
        lines.append(f"{gamma:.17g},{pfa:.17g},{pd:.17g}")
    path.write_text("\n".join(lines) + "\n")
    sidecar = {"seed": int(curve.rng_seed), "trials": int(curve.trials),
               "scenario_hash": scenario_hash}
    path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")


def read_roc_csv(path: str | Path) -> RocCurve:
    path = Path(path)
    rows = path.read_text().splitlines()
    if not rows or rows[0] != "threshold,pfa,pd":
        raise ValueError(f"{path}: missing ROC header")
    data = np.array([[float(v) for v in row.split(",")] for row in rows[1:]])
    sidecar = json.loads(path.with_suffix(".json").read_text())
    return RocCurve(thresholds=data[:, 0], pfa=data[:, 1], pd=data[:, 2],
                    trials=int(sidecar["trials"]), rng_seed=int(sidecar["seed"]))
