"""Gate fidelities and the parameter studies built on them.

All physical inputs are ratios. Sweeps over ``beta/f_i`` fix
``f0e = f1e = 1``. Frequency grids and ratio sweeps fix ``beta = 1``.

Single-qubit averages propagate the four Hermitian operators
``|0><0|, |1><1|, X, Y`` on the qubit block rather than each input state.
Every input density matrix is a real combination of these four, and the
master equation is linear, so one propagation serves any number of
inputs.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from . import gates, model, sampling, solver
from .gates import GateSpec
from .model import DIM

DEFAULT_N_STATES = 100
BETA_SWEEP_DT = 10.0
RATIO_SWEEP_DT = 20.0
FIDELITY_CEILING = 1 + 1e-9


class PointError(RuntimeError):
    def __init__(self, index: int, point: Any, cause: BaseException):
        self.index = index
        self.point = point
        self.cause = cause
        super().__init__(f"point {index} ({point!r}) failed: {cause}")

    def __reduce__(self):
        # crosses process boundaries from pool workers
        return type(self), (self.index, self.point, self.cause)


@dataclass(frozen=True)
class FidelityStats:
    mean: float
    min: float
    max: float
    n_states: int

    def __post_init__(self):
        if not (0 <= self.min <= self.mean + 1e-15 and self.mean <= self.max + 1e-15
                and self.max <= FIDELITY_CEILING):
            raise ValueError(f"inconsistent fidelity stats {self}")

    @classmethod
    def from_values(cls, values) -> "FidelityStats":
        v = np.asarray(values, dtype=float)
        return cls(float(np.mean(v)), float(np.min(v)), float(np.max(v)), int(v.size))

    @property
    def mean_infidelity(self) -> float:
        return 1.0 - self.mean

    @property
    def min_infidelity(self) -> float:
        return 1.0 - self.max

    @property
    def max_infidelity(self) -> float:
        return 1.0 - self.min


@dataclass
class SweepResult:
    """Fidelity statistics on a one- or two-axis grid.

    ``axes`` lists ``(name, values)`` from the outer to the inner axis.
    ``stats`` and ``rwa`` are object arrays with one :class:`FidelityStats`
    per grid point.
    """

    kind: str
    axes: list[tuple[str, np.ndarray]]
    stats: np.ndarray
    rwa: np.ndarray | None = None
    ridge: list[tuple[float, float, float]] | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.axes = [(name, np.asarray(vals, dtype=float)) for name, vals in self.axes]
        for name, vals in self.axes:
            steps = np.diff(vals)
            if steps.size and not (np.all(steps > 0) or np.all(steps < 0)):
                raise ValueError(f"axis {name} is not strictly monotone")
        shape = tuple(len(v) for _, v in self.axes)
        if self.stats.shape != shape or (self.rwa is not None and self.rwa.shape != shape):
            raise ValueError(f"stats shape {self.stats.shape} does not match axes {shape}")

    def __len__(self):
        return self.stats.size

    def axis(self, name: str) -> np.ndarray:
        return dict(self.axes)[name]

    def mean_infidelity(self, rwa: bool = False) -> np.ndarray:
        src = self.rwa if rwa else self.stats
        return np.vectorize(lambda s: s.mean_infidelity, otypes=[float])(src)


# --- fidelity -----------------------------------------------------------------

def gate_fidelity(rho_final, ideal, psi0) -> float:
    """``<psi0| U† rho U |psi0>``, clamped to ``[0, 1 + 1e-9]``."""
    target = np.asarray(ideal) @ np.asarray(psi0)
    f = np.real(np.vdot(target, np.asarray(rho_final) @ target))
    return float(np.clip(f, 0.0, FIDELITY_CEILING))


def qubit_operator_basis(dim: int = DIM) -> np.ndarray:
    """``|0><0|, |1><1|, X, Y`` on the qubit block, shape ``(4, dim, dim)``."""
    out = np.zeros((4, dim, dim), dtype=np.complex128)
    out[0, 0, 0] = out[1, 1, 1] = 1.0
    out[2, :2, :2] = gates.PAULI[0]
    out[3, :2, :2] = gates.PAULI[1]
    return out


def basis_coefficients(states: Sequence[np.ndarray], basis: np.ndarray) -> np.ndarray:
    """Real ``c[i, k]`` with ``|psi_i><psi_i| = sum_k c[i, k] basis[k]``."""
    psi = np.asarray(states)
    norms = np.einsum("kij,kji->k", basis, basis).real
    overlaps = np.einsum("ni,kij,nj->nk", psi.conj(), basis, psi).real
    return overlaps / norms


def _gate_protocol(gate: GateSpec, drive: model.DriveConfig, beta: float, gap: float):
    if gate.kind == "two-qubit":
        hw = model.DEFAULT_HALF_WIDTH / beta
        loop = gate.loops[0]
        return model.TwoQubitConfig(loop.theta, loop.phi, drive.f0e, drive.f1e, drive.gamma,
                                    model.PulseShape(beta, hw, hw), drive.rwa)
    return model.PulseSequence.back_to_back(gate.loops, beta, gap)


def input_states(gate: GateSpec, n_states: int) -> list[np.ndarray]:
    if gate.kind == "two-qubit":
        return sampling.two_qubit_inputs()
    return [sampling.bloch_to_state(p) for p in sampling.fibonacci_nodes(n_states)]


def state_fidelities(
    gate: GateSpec,
    drive: model.DriveConfig,
    beta: float,
    n_states: int = DEFAULT_N_STATES,
    gap: float | None = None,
    settings: solver.IntegratorSettings = solver.IntegratorSettings(),
    monitor: solver.Monitor | None = None,
) -> np.ndarray:
    """Per-input fidelities of ``gate`` for one parameter point.

    ``gap`` is the idle time between pulse windows of a two-loop gate
    (default ``10/beta``).
    """
    if n_states < 1:
        raise ValueError("n_states must be at least 1")
    gap = BETA_SWEEP_DT / beta if gap is None else gap
    protocol = _gate_protocol(gate, drive, beta, gap)
    states = input_states(gate, n_states)
    ideal = gate.embedded()
    dim = ideal.shape[0]
    targets = np.array([ideal @ s for s in states])
    if gate.kind == "two-qubit":
        rho0 = np.array([np.outer(s, s.conj()) for s in states])
        final = solver.run_protocol(rho0, protocol, drive, settings, monitor)
        f = np.einsum("ni,nij,nj->n", targets.conj(), final, targets).real
    else:
        basis = qubit_operator_basis(dim)
        coeffs = basis_coefficients(states, basis)
        if monitor is not None:
            monitor.probes = coeffs
        final = solver.run_protocol(basis, protocol, drive, settings, monitor)
        per_basis = np.einsum("ni,kij,nj->nk", targets.conj(), final, targets).real
        f = np.einsum("nk,nk->n", coeffs, per_basis)
    return np.clip(f, 0.0, FIDELITY_CEILING)


def average_fidelity(
    gate: GateSpec,
    drive: model.DriveConfig,
    pulse: model.PulseShape | float,
    n_states: int = DEFAULT_N_STATES,
    gap: float | None = None,
    settings: solver.IntegratorSettings = solver.IntegratorSettings(),
    monitor: solver.Monitor | None = None,
) -> FidelityStats:
    """Mean, min and max fidelity over the sampled inputs.

    Single-qubit gates use ``fibonacci_nodes(n_states)`` as inputs. CZ-type
    gates use the four ``|±±>`` product states.
    """
    beta = pulse.beta if isinstance(pulse, model.PulseShape) else float(pulse)
    return FidelityStats.from_values(state_fidelities(gate, drive, beta, n_states, gap, settings, monitor))


def asymptotic_infidelity(gate: GateSpec, n_states: int = 1000) -> float:
    """Infidelity of the do-nothing channel against ``gate``."""
    if gate.kind == "two-qubit":
        raise ValueError("asymptotic_infidelity is defined for single-qubit gates")
    if n_states < 1:
        raise ValueError("n_states must be at least 1")
    u = gate.ideal()
    psi = np.array([sampling.bloch_to_state(p, 2) for p in sampling.fibonacci_nodes(n_states)])
    overlap = np.einsum("ni,ij,nj->n", psi.conj(), u, psi)
    return float(1 - np.mean(np.abs(overlap) ** 2))


# --- parallel evaluation ------------------------------------------------------------

def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("HOLONOMY_WORKERS", "1")))
    except ValueError:
        return 1


def _call(evaluator, index, point):
    try:
        return evaluator(point)
    except Exception as exc:  # noqa: BLE001 - re-raised with the point attached
        raise PointError(index, point, exc) from exc


def parallel_map(points: Sequence, evaluator: Callable, workers: int | None = None) -> list:
    """Evaluate ``evaluator`` on every point, keeping input order.

    Each point runs single-threaded, so results do not depend on the
    worker count. ``evaluator`` must be picklable when ``workers > 1``.
    """
    points = list(points)
    workers = default_workers() if workers is None else workers
    if workers <= 1 or len(points) <= 1:
        return [_call(evaluator, i, p) for i, p in enumerate(points)]
    with ProcessPoolExecutor(max_workers=min(workers, len(points))) as pool:
        futures = [pool.submit(_call, evaluator, i, p) for i, p in enumerate(points)]
        return [f.result() for f in futures]


@dataclass(frozen=True)
class Point:
    """One simulation: gate, drive and pulse timing."""

    gate: GateSpec
    drive: model.DriveConfig
    beta: float
    gap: float
    n_states: int
    settings: solver.IntegratorSettings


def evaluate_point(p: Point) -> FidelityStats:
    return average_fidelity(p.gate, p.drive, p.beta, p.n_states, p.gap, p.settings)


def _run_grid(points: list[Point], shape, workers) -> np.ndarray:
    out = np.empty(len(points), dtype=object)
    out[:] = parallel_map(points, evaluate_point, workers)
    return out.reshape(shape)


# --- studies ------------------------------------------------------------------------

def sweep_beta(
    gate: GateSpec,
    gamma_over_fi: Sequence[float],
    beta_over_fi: Sequence[float],
    f_i: float = 1.0,
    n_states: int = DEFAULT_N_STATES,
    dt_factor: float = BETA_SWEEP_DT,
    settings: solver.IntegratorSettings = solver.IntegratorSettings(),
    workers: int | None = None,
) -> SweepResult:
    """Infidelity against ``beta/f_i`` with ``f0e = f1e = f_i``.

    Each point is run with the full Hamiltonian and with the RWA one. Both
    runs include decay. The idle gap between pulses is ``dt_factor/beta``.
    """
    gammas = np.asarray(gamma_over_fi, dtype=float)
    betas = np.asarray(beta_over_fi, dtype=float)
    points = []
    for rwa in (False, True):
        for g in gammas:
            for b in betas:
                drive = model.DriveConfig(f_i, f_i, g * f_i, rwa)
                points.append(Point(gate, drive, b * f_i, dt_factor / (b * f_i), n_states, settings))
    shape = (len(gammas), len(betas))
    res = _run_grid(points, (2,) + shape, workers)
    return SweepResult(
        "beta",
        [("gamma_over_fi", gammas), ("beta_over_fi", betas)],
        res[0],
        rwa=res[1],
        meta={"gate": gate.name, "dt_factor": dt_factor, "n_states": n_states},
    )


def find_beta_opt(
    gate: GateSpec,
    gamma_over_fi: float,
    search_interval: tuple[float, float] = (0.03, 0.3),
    n_points: int = 40,
    n_states: int = DEFAULT_N_STATES,
    dt_factor: float = BETA_SWEEP_DT,
    settings: solver.IntegratorSettings = solver.IntegratorSettings(),
    workers: int | None = None,
    objective: Callable[[float], float] | None = None,
) -> tuple[float, float]:
    """Grid search for the ``beta/f_i`` minimizing mean infidelity.

    The grid is linear over ``search_interval``. Ties resolve to the smaller
    beta. ``objective`` replaces the simulation (``beta -> infidelity``).
    """
    lo, hi = search_interval
    if not (0 < lo < hi) or n_points < 2:
        raise ValueError("need 0 < lo < hi and n_points >= 2")
    grid = np.linspace(lo, hi, n_points)
    if objective is None:
        points = [
            Point(gate, model.DriveConfig(1.0, 1.0, gamma_over_fi, False), b, dt_factor / b, n_states, settings)
            for b in grid
        ]
        values = np.array([s.mean_infidelity for s in parallel_map(points, evaluate_point, workers)])
    else:
        values = np.array(parallel_map(grid, objective, workers), dtype=float)
    i = int(np.argmin(values))  # first occurrence, i.e. smallest beta on ties
    return float(grid[i]), float(values[i])


def frequency_grid(
    gate: GateSpec,
    f0e_grid: Sequence[float],
    f1e_grid: Sequence[float],
    gamma_over_beta: float = 0.02,
    n_states: int = DEFAULT_N_STATES,
    dt_factor: float = BETA_SWEEP_DT,
    settings: solver.IntegratorSettings = solver.IntegratorSettings(),
    workers: int | None = None,
) -> SweepResult:
    """Infidelity over ``(f0e/beta, f1e/beta)`` with the optimal ``f1e`` per ``f0e``."""
    f0 = np.asarray(f0e_grid, dtype=float)
    f1 = np.asarray(f1e_grid, dtype=float)
    points = [
        Point(gate, model.DriveConfig(a, b, gamma_over_beta, False), 1.0, dt_factor, n_states, settings)
        for a in f0 for b in f1
    ]
    stats = _run_grid(points, (len(f0), len(f1)), workers)
    result = SweepResult(
        "grid",
        [("f0e_over_beta", f0), ("f1e_over_beta", f1)],
        stats,
        meta={"gate": gate.name, "gamma_over_beta": gamma_over_beta, "n_states": n_states},
    )
    inf = result.mean_infidelity()
    best = np.argmin(inf, axis=1)
    result.ridge = [(float(f0[i]), float(f1[j]), float(inf[i, j])) for i, j in enumerate(best)]
    return result


def frequency_ratio_sweep(
    gate: GateSpec,
    ratio_grid: Sequence[float],
    f0e_over_beta: float = 10.0,
    gamma_over_beta: float = 1e-3,
    dt_over_beta: float = RATIO_SWEEP_DT,
    n_states: int = DEFAULT_N_STATES,
    settings: solver.IntegratorSettings = solver.IntegratorSettings(),
    workers: int | None = None,
) -> SweepResult:
    """Infidelity against ``f1e/f0e`` at fixed ``f0e/beta``."""
    ratios = np.asarray(ratio_grid, dtype=float)
    if np.any(ratios <= 0):
        raise ValueError("frequency ratios must be positive")
    points = [
        Point(gate, model.DriveConfig(f0e_over_beta, r * f0e_over_beta, gamma_over_beta, False),
              1.0, dt_over_beta, n_states, settings)
        for r in ratios
    ]
    return SweepResult(
        "ratio",
        [("f1e_over_f0e", ratios)],
        _run_grid(points, (len(ratios),), workers),
        meta={"gate": gate.name, "f0e_over_beta": f0e_over_beta, "gamma_over_beta": gamma_over_beta},
    )
