"""Deterministic input states on the Bloch sphere."""

from __future__ import annotations

import numpy as np

from .model import DIM

GOLDEN = (1 + np.sqrt(5)) / 2


def fibonacci_nodes(n: int) -> np.ndarray:
    """``n`` near-uniform unit vectors, shape ``(n, 3)``.

    Heights are the midpoints ``z_k = 1 - (2k - 1)/n``. Azimuths step by
    the golden angle ``2*pi*GOLDEN`` and are indexed from the middle of
    the list, ``k - (n + 1)/2``. Point ``k`` and point ``n + 1 - k`` are
    then mirror images ``(x, -y, -z)``, so the set is invariant under a
    pi rotation about the x axis.
    """
    if n < 1:
        raise ValueError(f"need at least one node, got {n}")
    k = np.arange(1, n + 1)
    z = 1 - (2 * k - 1) / n
    # reduce mod 1 before scaling by 2*pi to keep the phase accurate
    az = 2 * np.pi * np.mod(GOLDEN * (k - (n + 1) / 2), 1.0)
    r = np.sqrt(1 - z * z)
    return np.column_stack([r * np.cos(az), r * np.sin(az), z])


def bloch_to_state(p, dim: int = DIM) -> np.ndarray:
    x, y, z = p
    theta = np.arccos(np.clip(z, -1.0, 1.0))
    azimuth = np.arctan2(y, x)
    psi = np.zeros(dim, dtype=np.complex128)
    psi[0] = np.cos(theta / 2)
    psi[1] = np.exp(1j * azimuth) * np.sin(theta / 2)
    return psi


def two_qubit_inputs() -> list[np.ndarray]:
    """``|++>, |+->, |-+>, |-->`` embedded in the 16-level two-ion space."""
    plus = np.zeros(DIM, dtype=np.complex128)
    minus = np.zeros(DIM, dtype=np.complex128)
    plus[:2] = np.array([1, 1]) / np.sqrt(2)
    minus[:2] = np.array([1, -1]) / np.sqrt(2)
    return [np.kron(a, b) for a in (plus, minus) for b in (plus, minus)]
