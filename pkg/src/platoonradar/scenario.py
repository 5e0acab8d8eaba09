"""Platoon geometry, target kinematics and space-time steering vectors.

A scene couples K cooperating radar vehicles with a single point
target.  Vehicle 0 is the platoon lead and the only receiver; every
vehicle carries N transmit and M receive antennas and the coherent
processing interval spans L pulses.

Index ordering contract: flat vectors over the grid are laid out as

    flat = ((k * N + n) * L + l) * M + m

with the vehicle index k outermost and the receiver index m innermost.
All public indices are 0-based.  This module is the single place that
defines the ordering; everything else derives from it.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .matio import read_complex_matrices

SPEED_OF_LIGHT = 299792458.0  # m/s

DOPPLER_MODES = ("relative", "literal")
COVARIANCE_KINDS = ("white", "block_diagonal")

#: grid axes from outermost to innermost flat-index position
AXIS_ORDER = ("vehicle", "transmitter", "pulse", "receiver")


class ScenarioError(ValueError):
    """Invalid scene description or inconsistent arguments."""


class NumericalError(RuntimeError):
    """A matrix factorization or eigensolve failed."""


class Dims(NamedTuple):
    vehicles: int  # K
    tx: int        # N
    pulses: int    # L
    rx: int        # M

    def axis_length(self, axis: str) -> int:
        return self[AXIS_ORDER.index(axis)]


def _readonly(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


def _check_positions(values, label: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 1:
        raise ScenarioError(f"{label} must be a nonempty list of 2-vectors")
    if not np.all(np.isfinite(arr)):
        raise ScenarioError(f"{label} entries must be finite")
    return arr


def _check_vec2(values, label: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.shape != (2,):
        raise ScenarioError(f"{label} must be a 2-vector")
    if not np.all(np.isfinite(arr)):
        raise ScenarioError(f"{label} entries must be finite")
    return arr


@dataclass(frozen=True, eq=False)
class Vehicle:
    """One platoon member: antenna layout in metres, velocity in m/s."""

    tx_positions: np.ndarray
    rx_positions: np.ndarray
    velocity: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "tx_positions",
                           _readonly(_check_positions(self.tx_positions, "tx_positions"), float))
        object.__setattr__(self, "rx_positions",
                           _readonly(_check_positions(self.rx_positions, "rx_positions"), float))
        object.__setattr__(self, "velocity", _readonly(_check_vec2(self.velocity, "velocity"), float))

    @property
    def num_tx(self) -> int:
        return self.tx_positions.shape[0]

    @property
    def num_rx(self) -> int:
        return self.rx_positions.shape[0]


@dataclass(frozen=True, eq=False)
class Target:
    """Point target: position in metres, velocity in m/s."""

    position: np.ndarray
    velocity: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "position", _readonly(_check_vec2(self.position, "target position"), float))
        object.__setattr__(self, "velocity", _readonly(_check_vec2(self.velocity, "target velocity"), float))


@dataclass(frozen=True, eq=False)
class CovarianceModel:
    """Per-vehicle noise-plus-interference covariance.

    ``white`` uses ``noise_power * I`` for every vehicle.
    ``block_diagonal`` carries one user-supplied Hermitian
    positive-definite matrix per vehicle, each of size (N*L*M)**2.
    """

    kind: str = "white"
    noise_power: float = 1.0
    blocks: tuple | None = None

    def __post_init__(self):
        if self.kind not in COVARIANCE_KINDS:
            raise ScenarioError(f"covariance kind must be one of {COVARIANCE_KINDS}, got {self.kind!r}")
        if self.kind == "white":
            if self.blocks is not None:
                raise ScenarioError("white covariance takes no matrix blocks")
            if not (np.isfinite(self.noise_power) and self.noise_power > 0):
                raise ScenarioError("noise_power must be a positive finite number")
            return
        if not self.blocks:
            raise ScenarioError("block_diagonal covariance requires per-vehicle matrices")
        checked = []
        for k, block in enumerate(self.blocks):
            arr = np.asarray(block, dtype=complex)
            if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
                raise ScenarioError(f"covariance block {k} must be square")
            scale = float(np.max(np.abs(arr))) if arr.size else 0.0
            if scale == 0.0 or not np.all(np.isfinite(arr)):
                raise ScenarioError(f"covariance block {k} must be finite and nonzero")
            if float(np.max(np.abs(arr - arr.conj().T))) >= 1e-12 * scale:
                raise ScenarioError(f"covariance block {k} is not Hermitian")
            try:
                np.linalg.cholesky(arr)
            except np.linalg.LinAlgError as exc:
                raise ScenarioError(f"covariance block {k} is not positive definite") from exc
            checked.append(_readonly(arr, complex))
        object.__setattr__(self, "blocks", tuple(checked))

    @property
    def block_dim(self) -> int | None:
        return None if self.blocks is None else self.blocks[0].shape[0]


@dataclass(frozen=True, eq=False)
class Scenario:
    """Complete scene: waveform parameters, platoon, target, noise model."""

    carrier_frequency_hz: float
    chirp_time_s: float
    num_pulses: int
    vehicles: tuple
    target: Target
    reflectivity: tuple
    covariance: CovarianceModel = field(default_factory=CovarianceModel)
    doppler_mode: str = "relative"
    speed_of_light_m_s: float = SPEED_OF_LIGHT

    def __post_init__(self):
        for name in ("carrier_frequency_hz", "chirp_time_s", "speed_of_light_m_s"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ScenarioError(f"{name} must be a positive finite number")
        if int(self.num_pulses) != self.num_pulses or self.num_pulses < 1:
            raise ScenarioError("num_pulses must be an integer >= 1")
        object.__setattr__(self, "num_pulses", int(self.num_pulses))
        vehicles = tuple(self.vehicles)
        if not vehicles:
            raise ScenarioError("at least one vehicle is required")
        n0, m0 = vehicles[0].num_tx, vehicles[0].num_rx
        for k, veh in enumerate(vehicles):
            if veh.num_tx != n0 or veh.num_rx != m0:
                raise ScenarioError(f"vehicle {k} antenna counts differ from vehicle 0")
        object.__setattr__(self, "vehicles", vehicles)
        alphas = tuple(complex(a) for a in self.reflectivity)
        if len(alphas) != len(vehicles):
            raise ScenarioError("reflectivity must list one complex value per vehicle")
        if not all(np.isfinite(a.real) and np.isfinite(a.imag) for a in alphas):
            raise ScenarioError("reflectivity entries must be finite")
        object.__setattr__(self, "reflectivity", alphas)
        if self.doppler_mode not in DOPPLER_MODES:
            raise ScenarioError(f"doppler_mode must be one of {DOPPLER_MODES}, got {self.doppler_mode!r}")
        if self.covariance.kind == "block_diagonal":
            expected = n0 * self.num_pulses * m0
            if len(self.covariance.blocks) != len(vehicles):
                raise ScenarioError("covariance must provide one block per vehicle")
            if self.covariance.block_dim != expected:
                raise ScenarioError(
                    f"covariance blocks are {self.covariance.block_dim}x{self.covariance.block_dim}, "
                    f"expected {expected}x{expected} (N*L*M)")

    @property
    def num_vehicles(self) -> int:
        return len(self.vehicles)

    @property
    def num_tx(self) -> int:
        return self.vehicles[0].num_tx

    @property
    def num_rx(self) -> int:
        return self.vehicles[0].num_rx

    @property
    def dims(self) -> Dims:
        return Dims(self.num_vehicles, self.num_tx, self.num_pulses, self.num_rx)

    @property
    def wavelength(self) -> float:
        return self.speed_of_light_m_s / self.carrier_frequency_hz


@dataclass(frozen=True, eq=False)
class SteeringVector:
    """Complex phase signature over a suffix of the (k, n, l, m) grid.

    ``axes`` names the grid axes the vector spans, outermost first; the
    flat layout follows the module-level index ordering contract.
    """

    values: np.ndarray
    dims: Dims
    axes: tuple

    def __post_init__(self):
        arr = _readonly(np.asarray(self.values, dtype=complex), complex)
        axes = tuple(self.axes)
        if arr.ndim != 1:
            raise ScenarioError("steering values must be a flat vector")
        if any(a not in AXIS_ORDER for a in axes) or tuple(sorted(axes, key=AXIS_ORDER.index)) != axes:
            raise ScenarioError(f"axes must be an ordered subset of {AXIS_ORDER}")
        expected = int(np.prod([self.dims.axis_length(a) for a in axes])) if axes else 1
        if arr.shape[0] != expected:
            raise ScenarioError(f"steering vector over {axes} must have length {expected}, got {arr.shape[0]}")
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "axes", axes)

    def __len__(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class SelectionMatrix:
    """Binary L x (K*N) TDM schedule; column (k*N + n) holds the firing
    pulse of transmit antenna n on vehicle k."""

    entries: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.entries)
        if arr.ndim != 2 or arr.size == 0:
            raise ScenarioError("selection matrix must be a nonempty 2-D array")
        if not np.isin(arr, (0, 1)).all():
            raise ScenarioError("selection matrix entries must be 0 or 1")
        object.__setattr__(self, "entries", _readonly(arr, np.int8))

    @property
    def num_pulses(self) -> int:
        return self.entries.shape[0]

    @property
    def num_columns(self) -> int:
        return self.entries.shape[1]

    def vec(self) -> np.ndarray:
        """Column-major vectorization, aligned with the flat (k, n, l) order."""
        return self.entries.astype(float).ravel(order="F")

    def block(self, vehicle: int, num_tx: int) -> np.ndarray:
        return self.entries[:, vehicle * num_tx : (vehicle + 1) * num_tx]

    def to_permutation(self) -> np.ndarray:
        report = validate_selection(self)
        if self.num_pulses != self.num_columns or not report.ok:
            raise ScenarioError(f"not a permutation schedule: {report.violation or 'non-square'}")
        return np.argmax(self.entries, axis=1)

    @classmethod
    def identity(cls, num_pulses: int) -> "SelectionMatrix":
        return cls(np.eye(num_pulses, dtype=np.int8))

    @classmethod
    def from_permutation(cls, permutation) -> "SelectionMatrix":
        perm = np.asarray(permutation, dtype=np.int64)
        size = perm.shape[0]
        if perm.ndim != 1 or size == 0 or not np.array_equal(np.sort(perm), np.arange(size)):
            raise ScenarioError("permutation must be a bijection on 0..L-1")
        entries = np.zeros((size, size), dtype=np.int8)
        entries[np.arange(size), perm] = 1
        return cls(entries)


def sequential_schedule(num_pulses: int, num_columns: int) -> SelectionMatrix:
    """Schedule where column c fires on pulse c (identity when square)."""
    if num_columns > num_pulses:
        raise ScenarioError(f"{num_columns} transmitters cannot fire once each in {num_pulses} pulses")
    entries = np.zeros((num_pulses, num_columns), dtype=np.int8)
    entries[np.arange(num_columns), np.arange(num_columns)] = 1
    return SelectionMatrix(entries)


@dataclass(frozen=True)
class SelectionReport:
    ok: bool
    violation: str | None = None

    def __bool__(self) -> bool:
        return self.ok


def validate_selection(candidate) -> SelectionReport:
    """Check TDM schedule constraints; reports the first violation, never raises."""
    if isinstance(candidate, SelectionMatrix):
        matrix = candidate
    else:
        try:
            matrix = SelectionMatrix(candidate)
        except ScenarioError as exc:
            return SelectionReport(False, str(exc))
    entries = matrix.entries
    col_sums = entries.sum(axis=0)
    bad = np.flatnonzero(col_sums != 1)
    if bad.size:
        return SelectionReport(False, f"column {bad[0]} sums to {col_sums[bad[0]]}, expected 1")
    if matrix.num_pulses == matrix.num_columns:
        row_sums = entries.sum(axis=1)
        bad = np.flatnonzero(row_sums != 1)
        if bad.size:
            return SelectionReport(False, f"row {bad[0]} sums to {row_sums[bad[0]]}, expected 1")
    return SelectionReport(True)


# ---------------------------------------------------------------------------
# steering construction


def target_direction(scenario: Scenario, vehicle_index: int, target: Target | None = None) -> np.ndarray:
    """Unit vector from the vehicle reference point (its first receive
    antenna) toward the target."""
    if not 0 <= vehicle_index < scenario.num_vehicles:
        raise ScenarioError(f"vehicle index {vehicle_index} out of range [0, {scenario.num_vehicles})")
    target = target or scenario.target
    offset = target.position - scenario.vehicles[vehicle_index].rx_positions[0]
    distance = float(np.hypot(*offset))
    if distance == 0.0:
        raise ScenarioError(f"target coincides with vehicle {vehicle_index} reference position")
    return offset / distance


def doppler_velocity(scenario: Scenario, vehicle_index: int, target: Target | None = None) -> float:
    """Radial velocity seen on the path between the target and a vehicle.

    Relative mode projects v_t - v_k onto the line of sight; literal
    mode projects the target velocity alone.
    """
    direction = target_direction(scenario, vehicle_index, target)
    target = target or scenario.target
    velocity = target.velocity
    if scenario.doppler_mode == "relative":
        velocity = velocity - scenario.vehicles[vehicle_index].velocity
    return float(velocity @ direction)


def doppler_steering(nu: float, stride: int, length: int, scenario: Scenario) -> np.ndarray:
    """Doppler phase ramp: element i is exp(-j*2*pi*f_c*nu/c * i*stride*T_c)."""
    if length < 1 or int(length) != length:
        raise ScenarioError("doppler steering length must be a positive integer")
    if stride < 1 or int(stride) != stride:
        raise ScenarioError("doppler steering stride must be a positive integer")
    rate = scenario.carrier_frequency_hz * nu / scenario.speed_of_light_m_s
    phases = -2.0 * np.pi * rate * scenario.chirp_time_s * stride * np.arange(length)
    return np.exp(1j * phases)


def array_steering(positions, direction, scenario: Scenario) -> np.ndarray:
    """Narrowband array response: element i is exp(+j*2*pi*(f_c/c) * p_i . u)."""
    pos = _check_positions(positions, "positions")
    u = _check_vec2(direction, "direction")
    if abs(float(np.hypot(*u)) - 1.0) > 1e-9:
        raise ScenarioError("direction must be unit-norm")
    phases = 2.0 * np.pi * (scenario.carrier_frequency_hz / scenario.speed_of_light_m_s) * (pos @ u)
    return np.exp(1j * phases)


def _pulse_and_rx_factors(scenario: Scenario, vehicle_index: int):
    """Pulse-axis and receiver-axis factors of the snapshot for echoes
    transmitted by *vehicle_index* and received at the platoon lead."""
    dims = scenario.dims
    nu_k = doppler_velocity(scenario, vehicle_index)
    nu_rx = doppler_velocity(scenario, 0)
    pulse = (doppler_steering(nu_k, dims.tx, dims.pulses, scenario)
             * doppler_steering(nu_rx, dims.rx, dims.pulses, scenario))
    rx = (array_steering(scenario.vehicles[0].rx_positions, target_direction(scenario, 0), scenario)
          * doppler_steering(nu_rx, 1, dims.rx, scenario))
    return pulse, rx


def snapshot(scenario: Scenario, vehicle_index: int, tx_index: int) -> SteeringVector:
    """Per-pulse snapshot over (pulse, receiver) for one transmit antenna.

    The value is common to all transmit antennas of the vehicle; the
    per-antenna factor enters in vehicle_steering.  tx_index is only
    range-checked.
    """
    if not 0 <= tx_index < scenario.num_tx:
        raise ScenarioError(f"transmitter index {tx_index} out of range [0, {scenario.num_tx})")
    pulse, rx = _pulse_and_rx_factors(scenario, vehicle_index)
    return SteeringVector(np.kron(pulse, rx), scenario.dims, ("pulse", "receiver"))


def vehicle_steering(scenario: Scenario, vehicle_index: int) -> SteeringVector:
    """Space-time signature of one vehicle's echoes, over (tx, pulse, rx)."""
    dims = scenario.dims
    nu_k = doppler_velocity(scenario, vehicle_index)
    tx = (array_steering(scenario.vehicles[vehicle_index].tx_positions,
                         target_direction(scenario, vehicle_index), scenario)
          * doppler_steering(nu_k, 1, dims.tx, scenario))
    pulse, rx = _pulse_and_rx_factors(scenario, vehicle_index)
    values = np.kron(tx, np.kron(pulse, rx))
    return SteeringVector(values, dims, ("transmitter", "pulse", "receiver"))


def stacked_steering(scenario: Scenario) -> SteeringVector:
    """Full multistatic steering vector: vehicle blocks concatenated in order."""
    values = np.concatenate([vehicle_steering(scenario, k).values
                             for k in range(scenario.num_vehicles)])
    return SteeringVector(values, scenario.dims, AXIS_ORDER)


def apply_tdm(schedule: SelectionMatrix, steering: SteeringVector) -> SteeringVector:
    """Mask the stacked steering vector by the TDM schedule.

    Computes (vec(J) kron 1_M) * s; entry (k, n, l, m) survives iff
    J[l, k*N + n] = 1.
    """
    dims = steering.dims
    if steering.axes != AXIS_ORDER:
        raise ScenarioError("apply_tdm expects the stacked steering vector")
    expected = (dims.pulses, dims.vehicles * dims.tx)
    got = (schedule.num_pulses, schedule.num_columns)
    if got != expected:
        raise ScenarioError(f"schedule is {got[0]}x{got[1]}, scenario needs {expected[0]}x{expected[1]}")
    mask = np.repeat(schedule.vec(), dims.rx)
    return SteeringVector(mask * steering.values, dims, steering.axes)


def silence_vehicle_columns(schedule: SelectionMatrix, active_vehicles, num_tx: int) -> SelectionMatrix:
    """Zero the schedule columns of every vehicle not listed as active.

    The result is an evaluation mask, not a valid schedule: silenced
    columns no longer sum to 1.
    """
    if num_tx < 1 or schedule.num_columns % num_tx:
        raise ScenarioError(f"schedule has {schedule.num_columns} columns, not a multiple of {num_tx}")
    num_vehicles = schedule.num_columns // num_tx
    active = sorted(set(int(v) for v in active_vehicles))
    if not active or any(v < 0 or v >= num_vehicles for v in active):
        raise ScenarioError(f"active vehicles must be a nonempty subset of 0..{num_vehicles - 1}")
    entries = np.array(schedule.entries)
    for k in range(num_vehicles):
        if k not in active:
            entries[:, k * num_tx : (k + 1) * num_tx] = 0
    return SelectionMatrix(entries)


# ---------------------------------------------------------------------------
# ingestion from JSON-style mappings


_MISSING = object()


def _pop(mapping: dict, key: str, path: str, default=_MISSING):
    if key in mapping:
        return mapping.pop(key)
    if default is _MISSING:
        raise ScenarioError(f"{path}.{key}: missing required key")
    return default


def _reject_unknown(mapping: dict, path: str) -> None:
    if mapping:
        raise ScenarioError(f"{path}.{sorted(mapping)[0]}: unknown key")


def _as_number(value, path: str, *, minimum=None, positive=False, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{path}: expected a number, got {type(value).__name__}")
    if not np.isfinite(value):
        raise ScenarioError(f"{path}: must be finite")
    if integer and int(value) != value:
        raise ScenarioError(f"{path}: expected an integer")
    if positive and value <= 0:
        raise ScenarioError(f"{path}: must be positive")
    if minimum is not None and value < minimum:
        raise ScenarioError(f"{path}: must be >= {minimum}")
    return int(value) if integer else float(value)


def _as_section(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise ScenarioError(f"{path}: expected an object")
    return dict(value)


def _as_pair(value, path: str) -> list:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ScenarioError(f"{path}: expected a pair [a, b]")
    return [_as_number(v, f"{path}[{i}]") for i, v in enumerate(value)]


def _as_position_list(value, path: str) -> list:
    if not isinstance(value, (list, tuple)) or not value:
        raise ScenarioError(f"{path}: expected a nonempty list of [x, y] pairs")
    return [_as_pair(v, f"{path}[{i}]") for i, v in enumerate(value)]


def _vehicle_from_dict(data, path: str) -> tuple:
    section = _as_section(data, path)
    tx = _as_position_list(_pop(section, "tx_positions", path), f"{path}.tx_positions")
    rx = _as_position_list(_pop(section, "rx_positions", path), f"{path}.rx_positions")
    velocity = _as_pair(_pop(section, "velocity", path), f"{path}.velocity")
    alpha = _as_pair(_pop(section, "reflectivity", path, default=[1.0, 0.0]), f"{path}.reflectivity")
    _reject_unknown(section, path)
    return Vehicle(tx, rx, velocity), complex(alpha[0], alpha[1])


def scenario_from_dict(data: dict, base_dir: str | Path | None = None) -> Scenario:
    """Build a Scenario from the nested mapping layout of the config file.

    Recognized sections: radar, vehicles, target, noise.  Unknown keys
    raise with the offending key path.  Covariance matrices referenced
    by noise.matrix_file are resolved relative to *base_dir*.
    """
    top = _as_section(data, "config")

    radar = _as_section(_pop(top, "radar", "config"), "radar")
    fc = _as_number(_pop(radar, "carrier_frequency_hz", "radar"), "radar.carrier_frequency_hz", positive=True)
    tc = _as_number(_pop(radar, "chirp_time_s", "radar"), "radar.chirp_time_s", positive=True)
    pulses = _as_number(_pop(radar, "num_pulses", "radar"), "radar.num_pulses", minimum=1, integer=True)
    _as_number(_pop(radar, "bandwidth_hz", "radar", default=0.0), "radar.bandwidth_hz", minimum=0.0)
    light = _as_number(_pop(radar, "speed_of_light_m_s", "radar", default=SPEED_OF_LIGHT),
                       "radar.speed_of_light_m_s", positive=True)
    mode = _pop(radar, "doppler_mode", "radar", default="relative")
    if mode not in DOPPLER_MODES:
        raise ScenarioError(f"radar.doppler_mode: must be one of {DOPPLER_MODES}")
    _reject_unknown(radar, "radar")

    raw_vehicles = _pop(top, "vehicles", "config")
    if not isinstance(raw_vehicles, list) or not raw_vehicles:
        raise ScenarioError("vehicles: expected a nonempty list")
    vehicles, alphas = [], []
    for i, entry in enumerate(raw_vehicles):
        vehicle, alpha = _vehicle_from_dict(entry, f"vehicles[{i}]")
        vehicles.append(vehicle)
        alphas.append(alpha)

    target_section = _as_section(_pop(top, "target", "config"), "target")
    target = Target(_as_pair(_pop(target_section, "position", "target"), "target.position"),
                    _as_pair(_pop(target_section, "velocity", "target"), "target.velocity"))
    _reject_unknown(target_section, "target")

    noise = _as_section(_pop(top, "noise", "config", default={}), "noise")
    kind = _pop(noise, "kind", "noise", default="white")
    if kind == "white":
        power = _as_number(_pop(noise, "power", "noise", default=1.0), "noise.power", positive=True)
        covariance = CovarianceModel("white", power)
    elif kind == "block_diagonal":
        filename = _pop(noise, "matrix_file", "noise")
        if not isinstance(filename, str):
            raise ScenarioError("noise.matrix_file: expected a file path string")
        if "power" in noise:
            raise ScenarioError("noise.power: not allowed for block_diagonal covariance")
        path = Path(base_dir or ".") / filename
        if not path.is_file():
            raise ScenarioError(f"noise.matrix_file: no such file {path}")
        try:
            blocks = read_complex_matrices(path)
        except ValueError as exc:
            raise ScenarioError(f"noise.matrix_file: {exc}") from exc
        covariance = CovarianceModel("block_diagonal", blocks=tuple(blocks))
    else:
        raise ScenarioError(f"noise.kind: must be one of {COVARIANCE_KINDS}")
    _reject_unknown(noise, "noise")

    _reject_unknown(top, "config")
    return Scenario(carrier_frequency_hz=fc, chirp_time_s=tc, num_pulses=pulses,
                    vehicles=tuple(vehicles), target=target, reflectivity=tuple(alphas),
                    covariance=covariance, doppler_mode=mode, speed_of_light_m_s=light)


def load_scenario(path: str | Path) -> Scenario:
    """Load a scenario-only JSON file (sections radar/vehicles/target/noise)."""
    path = Path(path)
    with open(path) as handle:
        data = json.load(handle)
    return scenario_from_dict(data, base_dir=path.parent)


def scenario_fingerprint(scenario: Scenario) -> str:
    """Stable hash of everything that influences simulation results."""
    payload = {
        "carrier_frequency_hz": scenario.carrier_frequency_hz,
        "chirp_time_s": scenario.chirp_time_s,
        "num_pulses": scenario.num_pulses,
        "speed_of_light_m_s": scenario.speed_of_light_m_s,
        "doppler_mode": scenario.doppler_mode,
        "vehicles": [{"tx": v.tx_positions.tolist(), "rx": v.rx_positions.tolist(),
                      "velocity": v.velocity.tolist()} for v in scenario.vehicles],
        "target": {"position": scenario.target.position.tolist(),
                   "velocity": scenario.target.velocity.tolist()},
        "reflectivity": [[a.real, a.imag] for a in scenario.reflectivity],
        "covariance": {"kind": scenario.covariance.kind,
                       "noise_power": scenario.covariance.noise_power,
                       "blocks": None if scenario.covariance.blocks is None else
                       [[b.real.tolist(), b.imag.tolist()] for b in scenario.covariance.blocks]},
    }
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def ula_positions(count: int, spacing: float, origin=(0.0, 0.0), axis=(1.0, 0.0)) -> np.ndarray:
    """Uniform linear array positions: origin + i*spacing*axis."""
    if count < 1:
        raise ScenarioError("array needs at least one element")
    axis = _check_vec2(axis, "axis")
    origin = _check_vec2(origin, "origin")
    return origin + spacing * np.outer(np.arange(count), axis)
