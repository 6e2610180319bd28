"""Λ-system Hamiltonians in the interaction picture, with and without the RWA.

Single-ion basis order is ``(|0>, |1>, |e>, |g>)``. ``|g>`` only receives
population through decay of ``|e>``. Two-ion states use the tensor product
with the first ion as the slow index, so ``|ab>`` sits at ``4*a + b``.

Besides the direct matrix builders, this module also expresses every
Hamiltonian as a :class:`PulseTerms` object:

    H(t) = Ω(t) * Σ_j amp_j * exp(i * freq_j * t) |row_j><col_j|

The Hermitian-conjugate entries are stored explicitly. The compiled
integrator in :mod:`holonomy.solver` only consumes this sparse form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

DIM = 4
Q0, Q1, E, G = 0, 1, 2, 3
DEFAULT_HALF_WIDTH = 10.0  # in units of 1/beta


@dataclass(frozen=True)
class LoopParams:
    theta: float
    phi: float

    @property
    def weights(self) -> tuple[complex, complex]:
        return omega_weights(self)

    @property
    def bloch(self) -> np.ndarray:
        """Rotation axis n of the holonomy produced by this loop."""
        st = np.sin(self.theta)
        return np.array([st * np.cos(self.phi), st * np.sin(self.phi), np.cos(self.theta)])


@dataclass(frozen=True)
class PulseShape:
    """Truncated sech envelope ``beta * sech(beta * (t - center))``.

    ``half_width`` defaults to ``10 / beta``. The envelope is exactly zero
    outside ``[center - half_width, center + half_width]``.
    """

    beta: float
    center: float = 0.0
    half_width: float | None = None

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if self.half_width is None:
            object.__setattr__(self, "half_width", DEFAULT_HALF_WIDTH / self.beta)
        if not self.half_width > 0:
            raise ValueError(f"half_width must be positive, got {self.half_width}")

    @property
    def start(self) -> float:
        return self.center - self.half_width

    @property
    def end(self) -> float:
        return self.center + self.half_width

    def area(self) -> float:
        """Closed-form area of the truncated envelope, ``2 gd(beta * half_width)``."""
        return 4.0 * np.arctan(np.tanh(0.5 * self.beta * self.half_width))


@dataclass(frozen=True)
class DriveConfig:
    f0e: float = 1.0
    f1e: float = 1.0
    gamma: float = 0.0
    rwa: bool = False

    def __post_init__(self):
        if not (self.f0e > 0 and self.f1e > 0):
            raise ValueError(f"counter-rotating frequencies must be positive, got {self.f0e}, {self.f1e}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be non-negative, got {self.gamma}")


@dataclass(frozen=True)
class PulseSequence:
    entries: tuple[tuple[LoopParams, PulseShape], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        for (_, a), (_, b) in zip(self.entries, self.entries[1:]):
            if not b.center > a.center:
                raise ValueError("pulse centers must be strictly increasing")
            if b.center - a.center < a.half_width + b.half_width - 1e-12 * abs(b.center):
                raise ValueError(
                    f"pulses at {a.center:g} and {b.center:g} overlap "
                    f"(half widths {a.half_width:g}, {b.half_width:g})"
                )

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @classmethod
    def back_to_back(cls, loops: Sequence[LoopParams], beta: float, gap: float = 0.0,
                     half_width: float | None = None) -> "PulseSequence":
        """Lay out one pulse per loop starting at t = 0.

        ``gap`` is the idle time between the end of one truncation window and
        the start of the next.
        """
        hw = DEFAULT_HALF_WIDTH / beta if half_width is None else half_width
        entries = []
        t = 0.0
        for loop in loops:
            entries.append((loop, PulseShape(beta, t + hw, hw)))
            t += 2 * hw + gap
        return cls(tuple(entries))

    @property
    def end(self) -> float:
        return self.entries[-1][1].end if self.entries else 0.0


@dataclass(frozen=True)
class TwoQubitConfig:
    theta: float = 0.0
    phi: float = 0.0
    f0e: float = 1.0
    f1e: float = 1.0
    gamma: float = 0.0
    pulse: PulseShape = field(default_factory=lambda: PulseShape(1.0, DEFAULT_HALF_WIDTH))
    rwa: bool = False

    def __post_init__(self):
        DriveConfig(self.f0e, self.f1e, self.gamma, self.rwa)


def omega_weights(loop: LoopParams) -> tuple[complex, complex]:
    w0 = np.sin(loop.theta / 2) * np.exp(1j * loop.phi)
    w1 = -np.cos(loop.theta / 2)
    return complex(w0), complex(w1)


def sech_envelope(t, pulse: PulseShape):
    """Envelope value(s) at ``t``; zero outside the truncation window."""
    s = np.asarray(t, dtype=float) - pulse.center
    out = np.where(np.abs(s) <= pulse.half_width, pulse.beta / np.cosh(pulse.beta * s), 0.0)
    return float(out) if out.ndim == 0 else out


def _counter(f: float, t: float, rwa: bool) -> complex:
    return 1.0 if rwa else 1.0 + np.exp(-2j * f * t)


def hamiltonian_single(t: float, loop: LoopParams, pulse: PulseShape, drive: DriveConfig) -> np.ndarray:
    w0, w1 = omega_weights(loop)
    omega = sech_envelope(t, pulse)
    h = np.zeros((DIM, DIM), dtype=np.complex128)
    h[E, Q0] = omega * w0 * _counter(drive.f0e, t, drive.rwa)
    h[E, Q1] = omega * w1 * _counter(drive.f1e, t, drive.rwa)
    return h + h.conj().T


def bright_dark_states(loop: LoopParams) -> tuple[np.ndarray, np.ndarray]:
    w0, w1 = omega_weights(loop)
    bright = np.array([np.conj(w0), np.conj(w1), 0, 0], dtype=np.complex128)
    dark = np.array([-w1, w0, 0, 0], dtype=np.complex128)
    return bright, dark


def bright_dark_basis(loop: LoopParams) -> np.ndarray:
    """Unitary whose columns are ``|b>, |d>, |e>, |g>`` in the bare basis."""
    b, d = bright_dark_states(loop)
    v = np.zeros((DIM, DIM), dtype=np.complex128)
    v[:, 0], v[:, 1] = b, d
    v[E, 2] = v[G, 3] = 1.0
    return v


def hamiltonian_bright_dark(t: float, loop: LoopParams, pulse: PulseShape, drive: DriveConfig) -> np.ndarray:
    """Same Hamiltonian as :func:`hamiltonian_single`, written in the
    ``(|b>, |d>, |e>, |g>)`` basis."""
    w0, w1 = omega_weights(loop)
    omega = sech_envelope(t, pulse)
    h = np.zeros((DIM, DIM), dtype=np.complex128)
    if drive.rwa:
        h[2, 0] = omega
    else:
        p0 = np.exp(-2j * drive.f0e * t)
        p1 = np.exp(-2j * drive.f1e * t)
        h[2, 0] = omega * (1 + abs(w0) ** 2 * p0 + abs(w1) ** 2 * p1)
        h[2, 1] = omega * w0 * w1 * (p1 - p0)
    return h + h.conj().T


def _idx2(a: int, b: int) -> int:
    return DIM * a + b


def hamiltonian_two_qubit(t: float, cfg: TwoQubitConfig) -> np.ndarray:
    """Effective two-ion Hamiltonian.

    The full branch keeps the counter-rotating factors ``(1 + e^{-2ift})^2``
    on the doubly excited coupling and ``4 cos^2(f t)`` on the exchange
    coupling. The latter averages to 2, not to the unit coefficient of the
    RWA branch; both are kept as printed and the mismatch is documented in
    the README.
    """
    env = sech_envelope(t, cfg.pulse)
    s, c = np.sin(cfg.theta / 2), np.cos(cfg.theta / 2)
    if cfg.rwa:
        a00 = a11 = x0 = x1 = 1.0
    else:
        a00 = (1 + np.exp(-2j * cfg.f0e * t)) ** 2
        a11 = (1 + np.exp(-2j * cfg.f1e * t)) ** 2
        x0 = 4 * np.cos(cfg.f0e * t) ** 2
        x1 = 4 * np.cos(cfg.f1e * t) ** 2
    h = np.zeros((DIM * DIM, DIM * DIM), dtype=np.complex128)
    ee = _idx2(E, E)
    h[ee, _idx2(Q0, Q0)] += a00 * s * np.exp(0.5j * cfg.phi)
    h[ee, _idx2(Q1, Q1)] += -a11 * c * np.exp(-0.5j * cfg.phi)
    h[_idx2(E, Q0), _idx2(Q0, E)] += x0 * s
    h[_idx2(E, Q1), _idx2(Q1, E)] += -x1 * c
    return env * (h + h.conj().T)


# --- sparse harmonic form -------------------------------------------------

@dataclass(frozen=True)
class PulseTerms:
    """One pulse window of ``H(t) = env(t) Σ amp e^{i freq t} |row><col|``.

    Entries of the Hermitian conjugate are included, so the list is closed
    under ``(row, col, amp, freq) -> (col, row, conj(amp), -freq)``.
    """

    dim: int
    pulse: PulseShape
    rows: np.ndarray
    cols: np.ndarray
    amps: np.ndarray
    freqs: np.ndarray

    @classmethod
    def from_couplings(cls, dim: int, pulse: PulseShape, couplings) -> "PulseTerms":
        """Build from ``(row, col, amp, freq)`` couplings, adding conjugates.

        Couplings with zero amplitude are dropped so that a vanishing weight
        removes the corresponding frequency from the dynamics exactly.
        """
        rows, cols, amps, freqs = [], [], [], []
        for r, c, a, f in couplings:
            if a == 0:
                continue
            rows += [r, c]
            cols += [c, r]
            amps += [a, np.conj(a)]
            freqs += [f, -f]
        return cls(
            dim,
            pulse,
            np.array(rows, dtype=np.int64),
            np.array(cols, dtype=np.int64),
            np.array(amps, dtype=np.complex128),
            np.array(freqs, dtype=np.float64),
        )

    def matrix(self, t: float) -> np.ndarray:
        h = np.zeros((self.dim, self.dim), dtype=np.complex128)
        env = sech_envelope(t, self.pulse)
        np.add.at(h, (self.rows, self.cols), env * self.amps * np.exp(1j * self.freqs * t))
        return h

    __call__ = matrix


def single_qubit_terms(loop: LoopParams, pulse: PulseShape, drive: DriveConfig) -> PulseTerms:
    w0, w1 = omega_weights(loop)
    couplings = [(E, Q0, w0, 0.0), (E, Q1, w1, 0.0)]
    if not drive.rwa:
        couplings += [(E, Q0, w0, -2 * drive.f0e), (E, Q1, w1, -2 * drive.f1e)]
    return PulseTerms.from_couplings(DIM, pulse, couplings)


def two_qubit_terms(cfg: TwoQubitConfig) -> PulseTerms:
    s, c = np.sin(cfg.theta / 2), np.cos(cfg.theta / 2)
    ee, q00, q11 = _idx2(E, E), _idx2(Q0, Q0), _idx2(Q1, Q1)
    a0 = s * np.exp(0.5j * cfg.phi)
    a1 = -c * np.exp(-0.5j * cfg.phi)
    e0, oe = _idx2(E, Q0), _idx2(Q0, E)
    e1, ie = _idx2(E, Q1), _idx2(Q1, E)
    if cfg.rwa:
        couplings = [(ee, q00, a0, 0.0), (ee, q11, a1, 0.0), (e0, oe, s, 0.0), (e1, ie, -c, 0.0)]
    else:
        f0, f1 = cfg.f0e, cfg.f1e
        couplings = []
        # (1 + e^{-2ift})^2 = 1 + 2 e^{-2ift} + e^{-4ift}
        for col, amp, f in ((q00, a0, f0), (q11, a1, f1)):
            couplings += [(ee, col, amp, 0.0), (ee, col, 2 * amp, -2 * f), (ee, col, amp, -4 * f)]
        # 4 cos^2(ft) = 2 + e^{2ift} + e^{-2ift}
        for (row, col), amp, f in (((e0, oe), s, f0), ((e1, ie), -c, f1)):
            couplings += [(row, col, 2 * amp, 0.0), (row, col, amp, 2 * f), (row, col, amp, -2 * f)]
    return PulseTerms.from_couplings(DIM * DIM, cfg.pulse, couplings)
