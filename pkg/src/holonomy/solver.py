"""Lindblad master equation with time-dependent Hamiltonians.

The generator follows the sign convention

    dρ/dt = i[ρ, H] + Σ_k γ_k (L_k ρ L_k† - ½{L_k† L_k, ρ})

States may be a single ``(d, d)`` matrix or a batch ``(k, d, d)``. A
batch shares one adaptive step sequence. The evolution is linear, so a
batch of Hermitian operator-basis elements propagates every input state
at once.

Integration uses the Dormand-Prince 5(4) embedded pair. Hamiltonians
given as :class:`~holonomy.model.PulseTerms` go through a compiled
kernel. Any other callable ``t -> H(t)`` uses the pure-numpy path, which
has the same step controller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np
from numba import njit
from scipy.linalg import expm

from . import model
from .linalg import ShapeError

MAX_STEP_BETA = 0.05
INITIAL_STEP_BETA = 1e-3


class IntegrationError(RuntimeError):
    def __init__(self, t: float, msg: str = "step size underflow"):
        self.t = t
        super().__init__(f"{msg} at t = {t:.9g}")


@dataclass(frozen=True)
class DecayChannel:
    jump: np.ndarray
    rate: float

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError(f"decay rate must be non-negative, got {self.rate}")
        object.__setattr__(self, "jump", np.asarray(self.jump, dtype=np.complex128))


@dataclass(frozen=True)
class IntegratorSettings:
    """Tolerances and step bounds.

    ``initial_step`` and ``max_step`` left as ``None`` are filled in per
    pulse: ``1e-3/beta`` and ``0.05/beta``.
    """

    rel_tol: float = 1e-9
    abs_tol: float = 1e-11
    initial_step: float | None = None
    max_step: float | None = None

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")

    def for_pulse(self, beta: float) -> "IntegratorSettings":
        return replace(
            self,
            initial_step=self.initial_step or INITIAL_STEP_BETA / beta,
            max_step=self.max_step or MAX_STEP_BETA / beta,
        )


@dataclass
class Monitor:
    """Collects step statistics and state-validity diagnostics.

    Every ``check_every`` accepted steps, each probe state is checked for
    trace and positivity. Probes are real coefficient vectors over the
    batch, so ``probes[p] @ batch`` is a physical density matrix even when
    the batch holds operator-basis elements. Without probes, each batch
    member is checked directly.
    """

    check_every: int = 10
    probes: np.ndarray | None = None
    min_eigenvalue: float = math.inf
    max_trace_error: float = 0.0
    max_hermiticity_error: float = 0.0
    steps: int = 0
    rejected: int = 0
    checks: int = 0

    def probe_matrix(self, k: int) -> np.ndarray:
        if self.probes is None:
            return np.eye(k)
        p = np.asarray(self.probes, dtype=np.float64)
        if p.ndim != 2 or p.shape[1] != k:
            raise ShapeError("Monitor.probes", p.shape, (k,))
        return p

    def check(self, batch: np.ndarray) -> None:
        """Check the probe states of ``batch`` once (used outside the kernel)."""
        for m in np.einsum("pk,kij->pij", self.probe_matrix(batch.shape[0]), batch):
            self.max_hermiticity_error = max(self.max_hermiticity_error, float(np.max(np.abs(m - m.conj().T))))
            self.max_trace_error = max(self.max_trace_error, abs(np.trace(m) - 1))
            self.min_eigenvalue = min(self.min_eigenvalue, float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0]))
        self.checks += 1


def amplitude_damping(gamma: float, dim: int = model.DIM) -> DecayChannel:
    jump = np.zeros((dim, dim), dtype=np.complex128)
    jump[model.G, model.E] = 1.0
    return DecayChannel(jump, gamma)


def two_ion_damping(gamma: float) -> list[DecayChannel]:
    """Independent ``|g><e|`` decay on each ion at the same rate."""
    single = amplitude_damping(gamma).jump
    eye = np.eye(model.DIM)
    return [DecayChannel(np.kron(single, eye), gamma), DecayChannel(np.kron(eye, single), gamma)]


def lindblad_rhs(rho: np.ndarray, h: np.ndarray, channels: Sequence[DecayChannel] = ()) -> np.ndarray:
    rho = np.asarray(rho, dtype=np.complex128)
    h = np.asarray(h, dtype=np.complex128)
    d = rho.shape[-1]
    if rho.shape[-2] != d or h.shape != (d, d):
        raise ShapeError("lindblad_rhs", rho.shape, h.shape)
    out = 1j * (rho @ h - h @ rho)
    for ch in channels:
        if ch.jump.shape != (d, d):
            raise ShapeError("lindblad_rhs", rho.shape, ch.jump.shape)
        if ch.rate == 0:
            continue
        l, ld = ch.jump, ch.jump.conj().T
        ldl = ld @ l
        out = out + ch.rate * (l @ rho @ ld - 0.5 * (ldl @ rho + rho @ ldl))
    return out


def hermitize(rho: np.ndarray) -> np.ndarray:
    return 0.5 * (rho + np.swapaxes(rho, -1, -2).conj())


# --- compiled kernel --------------------------------------------------------

_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
# fifth-order weights minus embedded fourth-order weights
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


@njit(cache=True)
def _rhs_kernel(t, rho, out, beta, center, hw, hr, hc, ha, hf, hv, lch, lr, lc, lv, kr, kc, kv):
    nb, d, _ = rho.shape
    nh = hr.size
    if nh > 0:
        s = t - center
        env = beta / math.cosh(beta * s) if abs(s) <= hw else 0.0
        for j in range(nh):
            hv[j] = env * ha[j] * np.exp(1j * hf[j] * t)
    out[:] = 0.0
    for b in range(nb):
        for j in range(nh):
            r = hr[j]
            c = hc[j]
            mh = -1j * hv[j]
            for m in range(d):
                out[b, r, m] += mh * rho[b, c, m]
                out[b, m, c] -= mh * rho[b, m, r]
        for p in range(lr.size):
            for q in range(lr.size):
                if lch[p] == lch[q]:
                    out[b, lr[p], lr[q]] += lv[p] * rho[b, lc[p], lc[q]] * np.conj(lv[q])
        for j in range(kr.size):
            r = kr[j]
            c = kc[j]
            kval = 0.5 * kv[j]
            for m in range(d):
                out[b, r, m] -= kval * rho[b, c, m]
                out[b, m, c] -= kval * rho[b, m, r]


@njit(cache=True)
def _hermitize_inplace(y):
    nb, d, _ = y.shape
    for b in range(nb):
        for i in range(d):
            y[b, i, i] = y[b, i, i].real
            for j in range(i + 1, d):
                a = 0.5 * (y[b, i, j] + np.conj(y[b, j, i]))
                y[b, i, j] = a
                y[b, j, i] = np.conj(a)


@njit(cache=True)
def _check_probes(y, probes, stats):
    nb, d, _ = y.shape
    m = np.empty((d, d), dtype=np.complex128)
    for p in range(probes.shape[0]):
        m[:] = 0.0
        for b in range(nb):
            m += probes[p, b] * y[b]
        tr = 0.0
        for i in range(d):
            tr += m[i, i].real
        stats[0] = min(stats[0], np.linalg.eigvalsh(m)[0])
        stats[1] = max(stats[1], abs(tr - 1.0))
    stats[2] += 1.0


@njit(cache=True)
def _dp45_kernel(y0, t0, t1, h0, hmax, rtol, atol, beta, center, hw, hr, hc, ha, hf,
                 lch, lr, lc, lv, kr, kc, kv, probes, check_every, a, c, e):
    """Returns (y, status, t, steps, rejected, stats); status 1 is underflow."""
    nb, d, _ = y0.shape
    y = y0.copy()
    ks = np.empty((7, nb, d, d), dtype=np.complex128)
    tmp = np.empty_like(y)
    ynew = np.empty_like(y)
    hv = np.empty(hr.size, dtype=np.complex128)
    stats = np.array([np.inf, 0.0, 0.0])
    span = t1 - t0
    hmin = 1e-12 * span
    t = t0
    h = min(h0, hmax, span)
    steps = 0
    rejected = 0
    status = 0
    _rhs_kernel(t, y, ks[0], beta, center, hw, hr, hc, ha, hf, hv, lch, lr, lc, lv, kr, kc, kv)
    if check_every > 0:
        _check_probes(y, probes, stats)
    while t < t1:
        last = t + h >= t1
        if last:
            h = t1 - t
        for s in range(1, 7):
            tmp[:] = y
            for j in range(s):
                if a[s, j] != 0.0:
                    tmp += (h * a[s, j]) * ks[j]
            _rhs_kernel(t + c[s] * h, tmp, ks[s], beta, center, hw, hr, hc, ha, hf, hv,
                        lch, lr, lc, lv, kr, kc, kv)
        # stage 7 is evaluated at the fifth-order solution, so tmp holds ynew
        ynew[:] = tmp
        err = 0.0
        scale = 0.0
        for b in range(nb):
            for i in range(d):
                for j in range(d):
                    acc = 0.0j
                    for s in range(7):
                        acc += e[s] * ks[s, b, i, j]
                    err = max(err, abs(h * acc))
                    scale = max(scale, abs(y[b, i, j]), abs(ynew[b, i, j]))
        tol = atol + rtol * scale
        if err <= tol:
            t = t1 if last else t + h
            y[:] = ynew
            _hermitize_inplace(y)
            ks[0] = ks[6]
            _hermitize_inplace(ks[0])
            steps += 1
            if check_every > 0 and (steps % check_every == 0 or t >= t1):
                _check_probes(y, probes, stats)
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * (tol / err) ** 0.2))
        else:
            rejected += 1
            fac = max(0.2, 0.9 * (tol / err) ** 0.2)
            fac = min(fac, 1.0)
        if t >= t1:
            break
        h = min(h * fac, hmax)
        if h < hmin:
            status = 1
            break
    return y, status, t, steps, rejected, stats


_A_ARR = np.zeros((7, 7))
for _i, _row in enumerate(_A):
    _A_ARR[_i, : len(_row)] = _row
_C_ARR = np.array(_C)
_E_ARR = np.array(_E)


def _channel_arrays(channels: Sequence[DecayChannel], d: int):
    lch, lr, lc, lv = [], [], [], []
    k = np.zeros((d, d), dtype=np.complex128)
    for idx, ch in enumerate(channels):
        if ch.jump.shape != (d, d):
            raise ShapeError("integrate", (d, d), ch.jump.shape)
        if ch.rate == 0:
            continue
        lt = math.sqrt(ch.rate) * ch.jump
        for r, c in zip(*np.nonzero(lt)):
            lch.append(idx)
            lr.append(r)
            lc.append(c)
            lv.append(lt[r, c])
        k += lt.conj().T @ lt
    kr, kc = np.nonzero(k)
    return (
        np.array(lch, dtype=np.int64),
        np.array(lr, dtype=np.int64),
        np.array(lc, dtype=np.int64),
        np.array(lv, dtype=np.complex128),
        kr.astype(np.int64),
        kc.astype(np.int64),
        k[kr, kc].astype(np.complex128),
    )


def _as_batch(rho0) -> tuple[np.ndarray, bool]:
    rho = np.asarray(rho0, dtype=np.complex128)
    if rho.ndim == 2:
        return rho[None].copy(), True
    if rho.ndim != 3 or rho.shape[1] != rho.shape[2]:
        raise ShapeError("integrate", rho.shape)
    return rho.copy(), False


def _integrate_terms(y, terms, channels, t0, t1, settings, monitor):
    d = y.shape[-1]
    if terms is None:
        pulse_args = (1.0, 0.0, 0.0)
        hr = hc = np.zeros(0, dtype=np.int64)
        ha = np.zeros(0, dtype=np.complex128)
        hf = np.zeros(0)
    else:
        if terms.dim != d:
            raise ShapeError("integrate", y.shape, (terms.dim, terms.dim))
        p = terms.pulse
        pulse_args = (float(p.beta), float(p.center), float(p.half_width))
        hr, hc, ha, hf = terms.rows, terms.cols, terms.amps, terms.freqs
    check_every = monitor.check_every if monitor is not None else 0
    probes = monitor.probe_matrix(y.shape[0]) if monitor is not None else np.zeros((0, y.shape[0]))
    h0, hmax = _step_bounds(settings, t0, t1)
    out, status, t, steps, rej, stats = _dp45_kernel(
        y, float(t0), float(t1), h0, hmax, settings.rel_tol, settings.abs_tol, *pulse_args,
        hr, hc, ha, hf, *_channel_arrays(channels, d), np.ascontiguousarray(probes, dtype=np.float64),
        int(check_every), _A_ARR, _C_ARR, _E_ARR,
    )
    if monitor is not None:
        monitor.steps += steps
        monitor.rejected += rej
        if check_every > 0:
            monitor.min_eigenvalue = min(monitor.min_eigenvalue, float(stats[0]))
            monitor.max_trace_error = max(monitor.max_trace_error, float(stats[1]))
            monitor.checks += int(stats[2])
    if status:
        raise IntegrationError(t)
    return out


def _step_bounds(settings, t0, t1):
    span = t1 - t0
    hmax = settings.max_step or span
    h0 = settings.initial_step or 1e-3 * hmax
    return float(h0), float(hmax)


def _integrate_callable(y, hamiltonian, channels, t0, t1, settings, monitor):
    def f(t, rho):
        return lindblad_rhs(rho, hamiltonian(t), channels)

    h0, hmax = _step_bounds(settings, t0, t1)
    span = t1 - t0
    t, h = t0, min(h0, hmax, span)
    ks = [f(t, y)] + [None] * 6
    steps = 0
    if monitor is not None:
        monitor.check(y)
    while t < t1:
        last = t + h >= t1
        if last:
            h = t1 - t
        for s in range(1, 7):
            tmp = y + h * sum(_A[s][j] * ks[j] for j in range(s) if _A[s][j])
            ks[s] = f(t + _C[s] * h, tmp)
        ynew = tmp
        err = float(np.max(np.abs(h * sum(_E[s] * ks[s] for s in range(7) if _E[s]))))
        tol = settings.abs_tol + settings.rel_tol * max(np.max(np.abs(y)), np.max(np.abs(ynew)))
        if err <= tol:
            t = t1 if last else t + h
            y = hermitize(ynew)
            ks[0] = hermitize(ks[6])
            steps += 1
            if monitor is not None:
                monitor.steps += 1
                if steps % monitor.check_every == 0 or t >= t1:
                    monitor.check(y)
            fac = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * (tol / err) ** 0.2))
        else:
            if monitor is not None:
                monitor.rejected += 1
            fac = min(1.0, max(0.2, 0.9 * (tol / err) ** 0.2))
        if t >= t1:
            break
        h = min(h * fac, hmax)
        if h < 1e-12 * span:
            raise IntegrationError(t)
    return y


def integrate(
    rho0,
    hamiltonian: model.PulseTerms | Callable[[float], np.ndarray] | None,
    channels: Sequence[DecayChannel],
    t0: float,
    t1: float,
    settings: IntegratorSettings = IntegratorSettings(),
    monitor: Monitor | None = None,
) -> np.ndarray:
    """Integrate from ``t0`` to ``t1`` and return the final state(s).

    ``hamiltonian=None`` means H = 0. The result has the same shape as
    ``rho0`` and is Hermitized after every accepted step.
    """
    if not t1 > t0:
        raise ValueError(f"need t1 > t0, got [{t0}, {t1}]")
    y, single = _as_batch(rho0)
    if hamiltonian is None or isinstance(hamiltonian, model.PulseTerms):
        y = _integrate_terms(y, hamiltonian, channels, t0, t1, settings, monitor)
    else:
        y = _integrate_callable(y, hamiltonian, channels, t0, t1, settings, monitor)
    return y[0] if single else y


def dissipator_superoperator(channels: Sequence[DecayChannel], d: int) -> np.ndarray:
    """Row-major superoperator of the dissipator: ``vec(D(ρ)) = S @ vec(ρ)``."""
    eye = np.eye(d)
    sup = np.zeros((d * d, d * d), dtype=np.complex128)
    for ch in channels:
        l = ch.jump
        ldl = l.conj().T @ l
        sup += ch.rate * (np.kron(l, l.conj()) - 0.5 * np.kron(ldl, eye) - 0.5 * np.kron(eye, ldl.T))
    return sup


def idle_evolve(rho, channels: Sequence[DecayChannel], duration: float, monitor: Monitor | None = None) -> np.ndarray:
    """Exact free evolution (H = 0) under the decay channels."""
    y, single = _as_batch(rho)
    if duration > 0 and any(ch.rate > 0 for ch in channels):
        d = y.shape[-1]
        prop = expm(duration * dissipator_superoperator(channels, d))
        y = hermitize((y.reshape(len(y), d * d) @ prop.T).reshape(y.shape))
        if monitor is not None and monitor.check_every > 0:
            monitor.check(y)
    return y[0] if single else y


def run_protocol(
    rho0,
    sequence: model.PulseSequence | model.TwoQubitConfig,
    drive: model.DriveConfig | None = None,
    settings: IntegratorSettings = IntegratorSettings(),
    monitor: Monitor | None = None,
) -> np.ndarray:
    """Drive ``rho0`` through every pulse window and idle gap, from t = 0.

    For a :class:`~holonomy.model.TwoQubitConfig` the drive settings come
    from the config itself and ``drive`` is ignored.
    """
    if isinstance(sequence, model.TwoQubitConfig):
        cfg = sequence
        channels = two_ion_damping(cfg.gamma)
        segments = [(cfg.pulse, model.two_qubit_terms(cfg))]
    else:
        if drive is None:
            raise ValueError("a DriveConfig is required for single-qubit sequences")
        channels = [amplitude_damping(drive.gamma)]
        segments = [(p, model.single_qubit_terms(loop, p, drive)) for loop, p in sequence]
    y = np.asarray(rho0, dtype=np.complex128)
    t = 0.0
    for pulse, terms in segments:
        if pulse.start > t:
            y = idle_evolve(y, channels, pulse.start - t, monitor)
        y = integrate(y, terms, channels, pulse.start, pulse.end, settings.for_pulse(pulse.beta), monitor)
        t = pulse.end
    return y
