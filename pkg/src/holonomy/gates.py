"""Ideal holonomies and the named gate catalog."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .model import DIM, LoopParams

I2 = np.eye(2, dtype=np.complex128)
PAULI = (
    np.array([[0, 1], [1, 0]], dtype=np.complex128),
    np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    np.array([[1, 0], [0, -1]], dtype=np.complex128),
)

GATE_NAMES = ("X", "NOT", "H", "Z", "S", "phase-shift", "single-pulse", "CZ")


class UnknownGateError(ValueError):
    pass


def bloch_vector(theta: float, phi: float) -> np.ndarray:
    return LoopParams(theta, phi).bloch


def _sigma_dot(v) -> np.ndarray:
    return sum(c * p for c, p in zip(v, PAULI))


def _check_unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (3,) or abs(v @ v - 1) > 1e-12:
        raise ValueError(f"expected a unit 3-vector, got {v}")
    return v


def holonomy_single(n) -> np.ndarray:
    """``n . sigma``: the holonomy of one loop with rotation axis ``n``."""
    return _sigma_dot(_check_unit(n))


def holonomy_double(n, m) -> np.ndarray:
    """Loop ``n`` followed by loop ``m``: ``(n.m) I - i sigma.(n x m)``."""
    n, m = _check_unit(n), _check_unit(m)
    return (n @ m) * I2 - 1j * _sigma_dot(np.cross(n, m))


def ideal_two_qubit(theta: float, phi: float) -> np.ndarray:
    """Two-ion holonomy on ``(|00>, |01>, |10>, |11>)``.

    The ``|01>``, ``|10>`` block is the identity. ``theta = 0`` gives CZ.
    """
    u = np.eye(4, dtype=np.complex128)
    u[0, 0] = np.cos(theta)
    u[0, 3] = np.exp(-1j * phi) * np.sin(theta)
    u[3, 0] = np.exp(1j * phi) * np.sin(theta)
    u[3, 3] = -np.cos(theta)
    return u


@dataclass(frozen=True)
class GateSpec:
    """A target gate together with the loops that implement it.

    ``kind`` is ``"single"`` (one loop), ``"double"`` (two loops, applied
    in order) or ``"two-qubit"`` (one two-ion loop with angles
    ``loops[0]``).
    """

    name: str
    kind: Literal["single", "double", "two-qubit"]
    loops: tuple[LoopParams, ...]

    def __post_init__(self):
        expected = {"single": 1, "double": 2, "two-qubit": 1}[self.kind]
        if len(self.loops) != expected:
            raise ValueError(f"{self.kind} gate needs {expected} loop(s), got {len(self.loops)}")

    @property
    def n_qubits(self) -> int:
        return 2 if self.kind == "two-qubit" else 1

    @property
    def bloch_vectors(self) -> tuple[np.ndarray, ...]:
        return tuple(loop.bloch for loop in self.loops)

    def ideal(self) -> np.ndarray:
        if self.kind == "two-qubit":
            return ideal_two_qubit(self.loops[0].theta, self.loops[0].phi)
        if self.kind == "single":
            return holonomy_single(self.loops[0].bloch)
        n, m = self.bloch_vectors
        return holonomy_double(n, m)

    def embedded(self) -> np.ndarray:
        return embed_qubit_unitary(self.ideal(), DIM ** self.n_qubits)


def single_loop(theta: float, phi: float = 0.0, name: str = "single-pulse") -> GateSpec:
    return GateSpec(name, "single", (LoopParams(theta, phi),))


def phase_shift(dphi: float, phi: float = 0.0, name: str = "phase-shift") -> GateSpec:
    """Equatorial loops at ``phi`` then ``phi + dphi``; diag(1, e^{2i dphi}) up to phase."""
    return GateSpec(name, "double", (LoopParams(np.pi / 2, phi), LoopParams(np.pi / 2, phi + dphi)))


def two_qubit(theta: float, phi: float = 0.0, name: str = "two-qubit") -> GateSpec:
    return GateSpec(name, "two-qubit", (LoopParams(theta, phi),))


def catalog(name: str, theta: float | None = None, phi: float | None = None,
            dphi: float | None = None) -> GateSpec:
    """Look up a named gate (case-insensitive).

    ``single-pulse`` takes ``theta`` and ``phi``. ``phase-shift`` takes
    ``dphi`` and an optional base ``phi``.
    """
    key = name.strip().lower()
    if key in ("x", "not"):
        return single_loop(np.pi / 2, 0.0, "X")
    if key in ("h", "hadamard"):
        return single_loop(np.pi / 4, 0.0, "H")
    if key == "z":
        return single_loop(0.0, 0.0, "Z")
    if key == "s":
        return phase_shift(np.pi / 4, 0.0, "S")
    if key == "phase-shift":
        if dphi is None:
            raise ValueError("phase-shift needs dphi")
        return phase_shift(dphi, phi or 0.0)
    if key == "single-pulse":
        if theta is None:
            raise ValueError("single-pulse needs theta")
        return single_loop(theta, phi or 0.0)
    if key == "cz":
        return two_qubit(0.0, 0.0, "CZ")
    raise UnknownGateError(f"unknown gate {name!r}; valid names: {', '.join(GATE_NAMES)}")


def computational_indices(dim: int) -> np.ndarray:
    if dim == DIM:
        return np.array([0, 1])
    if dim == DIM * DIM:
        return np.array([DIM * a + b for a in (0, 1) for b in (0, 1)])
    raise ValueError(f"unsupported dimension {dim}")


def embed_qubit_unitary(u, dim: int) -> np.ndarray:
    """Place ``u`` on the computational levels, identity on ``|e>``/``|g>``."""
    u = np.asarray(u, dtype=np.complex128)
    idx = computational_indices(dim)
    if u.shape != (idx.size, idx.size):
        raise ValueError(f"cannot embed a {u.shape} unitary into dimension {dim}")
    out = np.eye(dim, dtype=np.complex128)
    out[np.ix_(idx, idx)] = u
    return out
