#!/usr/bin/env python3
"""Regenerate the committed experiment configs under configs/.

All three scenarios share the same platoon geometry: three vehicles
spaced 6 m apart, half-wavelength ULAs at 77 GHz, lead vehicle receiving.
They differ in array size and interference:

  desk.json          2x2 arrays, 6 pulses, white noise; runs in well under
                     a second and is the starting point for new experiments
  interference.json  same arrays, per-vehicle interference correlated
                     across pulses (AR(1) Toeplitz); the case where the
                     schedule visibly matters
  full_scale.json    8x8 arrays, 24 pulses, white noise; the heavy config
                     used for timing runs
"""

import json
from pathlib import Path

import numpy as np

from platoonradar import write_complex_matrices

SPEED_OF_LIGHT = 299792458.0
CARRIER_HZ = 77.0e9
CHIRP_S = 8.0e-6
HALF_WAVELENGTH = SPEED_OF_LIGHT / CARRIER_HZ / 2.0

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

# interference shape per vehicle: total power and pulse-to-pulse correlation
INTERFERENCE_POWERS = (30.0, 75.0, 21.0)
INTERFERENCE_RHOS = (0.85, 0.6, 0.75)


def ula(count, origin_x, y):
    return [[origin_x + i * HALF_WAVELENGTH, y] for i in range(count)]


def platoon(num_tx, num_rx, velocities):
    vehicles = []
    for k, velocity in enumerate(velocities):
        x = 6.0 * k
        vehicles.append({
            "tx_positions": ula(num_tx, x, 0.0),
            "rx_positions": ula(num_rx, x, 0.5),
            "velocity": list(velocity),
        })
    return vehicles


def radar(num_pulses):
    return {
        "carrier_frequency_hz": CARRIER_HZ,
        "bandwidth_hz": 150.0e6,
        "chirp_time_s": CHIRP_S,
        "num_pulses": num_pulses,
    }


def write(name, data):
    path = CONFIG_DIR / name
    path.write_text(json.dumps(data, indent=2) + "\n")
    print(f"wrote {path}")


def desk_config():
    return {
        "radar": radar(num_pulses=6),
        "vehicles": platoon(2, 2, [(20.0, 0.0), (22.0, 0.0), (18.0, 0.0)]),
        "target": {"position": [60.0, 40.0], "velocity": [5.0, 0.0]},
        "noise": {"kind": "white", "power": 2.5},
        "monte_carlo": {"trials": 10000, "seed": 0},
    }


def interference_blocks():
    """Per-vehicle covariance kron(I_tx, kron(T_pulse, I_rx)) with an AR(1)
    Toeplitz pulse factor; rho sets how much a bad pulse slot costs."""
    pulses = np.arange(6)
    blocks = []
    for power, rho in zip(INTERFERENCE_POWERS, INTERFERENCE_RHOS):
        toeplitz = power * rho ** np.abs(np.subtract.outer(pulses, pulses))
        blocks.append(np.kron(np.eye(2), np.kron(toeplitz, np.eye(2))).astype(complex))
    return blocks


def interference_config():
    data = {
        "radar": radar(num_pulses=6),
        "vehicles": platoon(2, 2, [(20.0, 0.0), (22.0, 0.0), (18.0, 0.0)]),
        "target": {"position": [60.0, 40.0], "velocity": [5.0, 0.0]},
        "noise": {"kind": "block_diagonal", "matrix_file": "interference_cov.txt"},
        "optimizer": {"restarts": 6},
        "monte_carlo": {"trials": 20000, "seed": 0},
    }
    for vehicle, alpha in zip(data["vehicles"], (1.5, 2.0, 1.2)):
        vehicle["reflectivity"] = [alpha, 0.0]
    return data


def full_scale_config():
    data = {
        "radar": radar(num_pulses=24),
        "vehicles": platoon(8, 8, [(20.0, 20.0), (-10.0, -20.0), (30.0, 15.0)]),
        "target": {"position": [60.0, 40.0], "velocity": [5.0, 0.0]},
        "noise": {"kind": "white", "power": 60.0},
        "optimizer": {"restarts": 3},
        "monte_carlo": {"trials": 10000, "seed": 0},
    }
    for vehicle in data["vehicles"]:
        vehicle["reflectivity"] = [0.5, 0.0]
    return data


def main():
    CONFIG_DIR.mkdir(exist_ok=True)
    write("desk.json", desk_config())
    write_complex_matrices(CONFIG_DIR / "interference_cov.txt", interference_blocks())
    print(f"wrote {CONFIG_DIR / 'interference_cov.txt'}")
    write("interference.json", interference_config())
    write("full_scale.json", full_scale_config())


if __name__ == "__main__":
    main()
