"""Shared builders for randomized platoon scenarios."""

import numpy as np
import scipy.linalg

import platoonradar as pr

CARRIER_HZ = 77e9
CHIRP_S = 8e-6
WAVELENGTH = 299792458.0 / CARRIER_HZ


def platoon_vehicle(offset_m, velocity, num_tx, num_rx, spacing=WAVELENGTH / 2):
    return pr.Vehicle(
        tx_positions=pr.ula_positions(num_tx, spacing, origin=(offset_m, 0.0)),
        rx_positions=pr.ula_positions(num_rx, spacing, origin=(offset_m, 1.0)),
        velocity=velocity,
    )


def ar1_blocks(rng, dims, rho_range=(0.4, 0.9), power_range=(0.5, 4.0)):
    """Per-vehicle covariance correlated across pulses: I_N kron (p T_rho) kron I_M.

    Pulse-to-pulse correlation is what makes the schedule matter; white or
    per-slot-diagonal noise leaves the objective blind to the assignment.
    """
    blocks = []
    for _ in range(dims.vehicles):
        rho = rng.uniform(*rho_range)
        power = rng.uniform(*power_range)
        toeplitz = scipy.linalg.toeplitz(rho ** np.arange(dims.pulses))
        blocks.append(np.kron(np.eye(dims.tx),
                              np.kron(power * toeplitz, np.eye(dims.rx))).astype(complex))
    return tuple(blocks)


def dense_blocks(rng, num_vehicles, dim):
    """Generic Hermitian-PD blocks A A^H + dim * I."""
    blocks = []
    for _ in range(num_vehicles):
        a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        blocks.append(a @ a.conj().T + dim * np.eye(dim))
    return tuple(blocks)


def make_scenario(seed=0, num_vehicles=3, num_tx=2, num_rx=2, num_pulses=None,
                  noise="white", noise_power=1.0, reflectivity=None,
                  doppler_mode="relative"):
    """Random but physically sane platoon: half-wavelength ULAs spaced a few
    meters apart, target tens of meters out, road-speed velocities."""
    rng = np.random.default_rng(seed)
    if num_pulses is None:
        num_pulses = num_vehicles * num_tx
    vehicles = tuple(
        platoon_vehicle(4.0 * k + rng.uniform(-0.5, 0.5),
                        rng.uniform(-30.0, 30.0, size=2), num_tx, num_rx)
        for k in range(num_vehicles))
    target = pr.Target(position=(rng.uniform(30.0, 80.0), rng.uniform(10.0, 50.0)),
                       velocity=rng.uniform(-20.0, 20.0, size=2))
    if reflectivity is None:
        reflectivity = tuple(rng.uniform(0.5, 1.5) * np.exp(1j * rng.uniform(0.0, 2 * np.pi))
                             for _ in range(num_vehicles))
    dims = pr.Dims(num_vehicles, num_tx, num_pulses, num_rx)
    if noise == "white":
        covariance = pr.CovarianceModel(kind="white", noise_power=noise_power)
    elif noise == "ar1":
        covariance = pr.CovarianceModel(kind="block_diagonal",
                                        blocks=ar1_blocks(rng, dims))
    elif noise == "dense":
        covariance = pr.CovarianceModel(
            kind="block_diagonal",
            blocks=dense_blocks(rng, num_vehicles, num_tx * num_pulses * num_rx))
    else:
        raise ValueError(f"unknown noise preset {noise!r}")
    return pr.Scenario(carrier_frequency_hz=CARRIER_HZ, chirp_time_s=CHIRP_S,
                       num_pulses=num_pulses, vehicles=vehicles, target=target,
                       reflectivity=reflectivity, covariance=covariance,
                       doppler_mode=doppler_mode)


def scalar_steering_entry(scenario, k, n, l, m):
    """Stacked steering entry recomputed from the flat phase formula, one
    scalar at a time; the production code goes through Kronecker products."""
    fc = scenario.carrier_frequency_hz
    c = scenario.speed_of_light_m_s
    tc = scenario.chirp_time_s
    dims = scenario.dims
    u_k = pr.target_direction(scenario, k)
    u_0 = pr.target_direction(scenario, 0)
    nu_k = pr.doppler_velocity(scenario, k)
    nu_0 = pr.doppler_velocity(scenario, 0)
    spatial = float(scenario.vehicles[k].tx_positions[n] @ u_k
                    + scenario.vehicles[0].rx_positions[m] @ u_0)
    temporal = nu_k * (n + dims.tx * l) + nu_0 * (dims.rx * l + m)
    phase = 2.0 * np.pi * (fc / c) * (spatial - tc * temporal)
    return np.exp(1j * phase)
