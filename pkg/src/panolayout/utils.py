"""
utils.py

Small helpers shared across the package: counter-based random generators and angle
arithmetic. Every stochastic stage draws from its own stream addressed by
`(master_seed, key...)`; there is no shared global generator.
"""

import numpy as np


def make_rng(master_seed: int, *key: int) -> np.random.Generator:
    """
    Build an independent generator addressed by `master_seed` and an integer key path.

    Args:
        master_seed (int): Run-level seed.
        *key (int): Stream address, e.g. `(room_index, STREAM_NOISE)`.

    Returns:
        np.random.Generator: A PCG64 generator, identical for identical arguments.
    """

    seq = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(seq)


def wrap_degrees(angle):
    """Wrap an angle (scalar or array) into [0, 360)."""

    wrapped = np.mod(angle, 360.0)
    # np.mod returns 360.0 for tiny negative inputs
    wrapped = np.where(wrapped >= 360.0, 0.0, wrapped)
    return float(wrapped) if wrapped.ndim == 0 else wrapped


def circular_difference(a, b):
    """Minimal absolute difference between two angles in degrees, in [0, 180]."""

    d = np.abs(np.mod(np.asarray(a, dtype=float) - np.asarray(b, dtype=float), 360.0))
    d = np.minimum(d, 360.0 - d)
    return float(d) if np.ndim(d) == 0 else d


def unit_vector(theta_deg: float) -> np.ndarray:
    """(cos, sin) of an angle given in degrees."""

    t = np.deg2rad(theta_deg)
    return np.array([np.cos(t), np.sin(t)])


def derive_seed(master_seed: int, *key: int) -> int:
    """A 32-bit integer seed for the stream `(master_seed, key...)`, e.g. a room seed."""

    seq = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in key))
    return int(seq.generate_state(1)[0])
