import numpy as np
import pytest

from holonomy import model, sampling, solver
from holonomy.model import E, G, DriveConfig, LoopParams, PulseShape


def proj(i, d=4):
    p = np.zeros((d, d), dtype=complex)
    p[i, i] = 1
    return p


def pure(psi):
    return np.outer(psi, np.conj(psi))


def random_hermitian(rng, d=4):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return a + a.conj().T


def random_state(rng, d=4):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def test_rhs_closed_system(rng):
    rho, h = random_state(rng), random_hermitian(rng)
    np.testing.assert_allclose(solver.lindblad_rhs(rho, h, []), 1j * (rho @ h - h @ rho), atol=1e-14)


def test_rhs_pure_decay():
    gamma = 0.37
    out = solver.lindblad_rhs(proj(E), np.zeros((4, 4)), [solver.amplitude_damping(gamma)])
    np.testing.assert_allclose(out, gamma * (proj(G) - proj(E)), atol=1e-15)


def test_rhs_trace_free(rng):
    for _ in range(20):
        out = solver.lindblad_rhs(random_hermitian(rng), random_hermitian(rng), [solver.amplitude_damping(0.8)])
        assert abs(np.trace(out)) < 1e-12


def test_rhs_dimension_mismatch():
    with pytest.raises(ValueError):
        solver.lindblad_rhs(np.eye(4), np.eye(3))


def test_no_dynamics_is_identity(rng):
    rho = random_state(rng)
    out = solver.integrate(rho, None, [], 0.0, 10.0)
    assert np.max(np.abs(out - rho)) <= 1e-10


@pytest.mark.parametrize("route", ["kernel", "callable"])
def test_free_decay_matches_exponential(route):
    gamma = 0.2
    ham = None if route == "kernel" else (lambda t: np.zeros((4, 4)))
    out = solver.integrate(proj(E), ham, [solver.amplitude_damping(gamma)], 0.0, 5 / gamma)
    assert out[E, E].real == pytest.approx(np.exp(-5), abs=1e-6)
    assert out[G, G].real == pytest.approx(1 - np.exp(-5), abs=1e-6)


def test_idle_map_is_exact(rng):
    rho = random_state(rng)
    ch = [solver.amplitude_damping(0.3)]
    exact = solver.idle_evolve(rho, ch, 4.0)
    numeric = solver.integrate(rho, None, ch, 0.0, 4.0)
    assert np.max(np.abs(exact - numeric)) < 1e-9
    assert exact[E, E].real == pytest.approx(rho[E, E].real * np.exp(-1.2), rel=1e-12)
    assert abs(exact[E, 0]) == pytest.approx(abs(rho[E, 0]) * np.exp(-0.6), rel=1e-12)


def test_rwa_pulse_flips_bright_state():
    loop = LoopParams(1.1, 0.4)
    b, _ = model.bright_dark_states(loop)
    seq = model.PulseSequence.back_to_back([loop], beta=1.0)
    out = solver.run_protocol(pure(b), seq, DriveConfig(rwa=True))
    # -|b> up to a global phase is the same density matrix as |b>
    assert np.real(np.vdot(b, out @ b)) >= 1 - 1e-6


def test_kernel_matches_numpy_route(rng):
    """The compiled path and the pure-numpy path agree on a driven, decaying run."""
    loop = LoopParams(0.9, 0.7)
    pulse = PulseShape(1.0, 10.0)
    drive = DriveConfig(2.0, 3.0, 0.05)
    ch = [solver.amplitude_damping(drive.gamma)]
    rho = random_state(rng)
    settings = solver.IntegratorSettings(max_step=0.05)
    a = solver.integrate(rho, model.single_qubit_terms(loop, pulse, drive), ch, 0.0, 20.0, settings)
    b = solver.integrate(rho, lambda t: model.hamiltonian_single(t, loop, pulse, drive), ch, 0.0, 20.0, settings)
    assert np.max(np.abs(a - b)) < 1e-8


def test_batch_matches_individual(rng):
    loop = LoopParams(1.3, -0.2)
    seq = model.PulseSequence.back_to_back([loop], beta=0.5)
    drive = DriveConfig(1.0, 1.5, 1e-2)
    states = np.array([random_state(rng) for _ in range(3)])
    batch = solver.run_protocol(states, seq, drive)
    for s, out in zip(states, batch):
        assert np.max(np.abs(solver.run_protocol(s, seq, drive) - out)) < 1e-8


def test_empty_protocol_is_identity(rng):
    rho = random_state(rng)
    out = solver.run_protocol(rho, model.PulseSequence(()), DriveConfig())
    np.testing.assert_array_equal(out, rho)


def test_single_pulse_x_gate():
    seq = model.PulseSequence.back_to_back([LoopParams(np.pi / 2, 0.0)], beta=1.0)
    out = solver.run_protocol(proj(0), seq, DriveConfig(rwa=True))
    assert out[1, 1].real >= 1 - 1e-6


def test_repeated_loop_is_identity(rng):
    loop = LoopParams(0.8, 1.9)
    seq = model.PulseSequence.back_to_back([loop, loop], beta=1.0, gap=10.0)
    for _ in range(5):
        psi = sampling.bloch_to_state(sampling.fibonacci_nodes(7)[rng.integers(7)])
        out = solver.run_protocol(pure(psi), seq, DriveConfig(rwa=True))
        assert np.real(np.vdot(psi, out @ psi)) >= 1 - 1e-6


def test_state_validity_along_trajectory():
    mon = solver.Monitor(check_every=10)
    seq = model.PulseSequence.back_to_back([LoopParams(np.pi / 2, 0.0), LoopParams(np.pi / 2, 0.6)], 0.3, 3.0)
    psi = sampling.bloch_to_state((0.6, 0.0, 0.8))
    solver.run_protocol(pure(psi), seq, DriveConfig(1.0, 1.0, 1e-2), monitor=mon)
    assert mon.checks > 10
    assert mon.max_trace_error <= 1e-8
    assert mon.min_eigenvalue >= -1e-8


def test_purity_conserved_without_decay():
    seq = model.PulseSequence.back_to_back([LoopParams(np.pi / 2, 0.0), LoopParams(np.pi / 2, 0.6)], 0.5, 5.0)
    psi = sampling.bloch_to_state((0.0, 0.6, 0.8))
    out = solver.run_protocol(pure(psi), seq, DriveConfig(1.0, 1.0, 0.0))
    assert abs(np.trace(out @ out).real - 1) <= 1e-7


def test_parallel_transport():
    """Along the RWA evolution the qubit subspace sees no Hamiltonian matrix."""
    loop = LoopParams(1.2, 0.5)
    pulse = PulseShape(1.0, 10.0)
    drive = DriveConfig(rwa=True)
    x = np.zeros((4, 4), dtype=complex)
    x[0, 1] = x[1, 0] = 1
    y = np.zeros((4, 4), dtype=complex)
    y[0, 1], y[1, 0] = -1j, 1j
    basis = np.array([proj(0), proj(1), x, y])
    terms = model.single_qubit_terms(loop, pulse, drive)
    for t1 in (3.0, 8.0, 10.0, 12.5, 17.0, 20.0):
        p0, p1, xt, yt = solver.integrate(basis, terms, [], 0.0, t1, solver.IntegratorSettings(max_step=0.05))
        h = model.hamiltonian_single(t1, loop, pulse, drive)
        k0_l1 = 0.5 * (xt + 1j * yt)  # |psi_0><psi_1|
        matrix = [np.trace(h @ p0), np.trace(h @ p1), np.trace(h @ k0_l1)]
        assert max(abs(v) for v in matrix) <= 1e-9


def test_step_underflow_raises():
    """A coupling switched on at t = 0.5 is too fast for any admissible step."""
    x = np.zeros((4, 4), dtype=complex)
    x[E, G] = x[G, E] = 1.0

    def ham(t):
        return 1e14 * x if t >= 0.5 else 0 * x

    with pytest.raises(solver.IntegrationError, match="at t =") as info:
        solver.integrate(proj(E), ham, [], 0.0, 1.0)
    assert 0.49 < info.value.t <= 0.5


def test_two_qubit_protocol_cz_rwa():
    cfg = model.TwoQubitConfig(0.0, 0.0, pulse=PulseShape(1.0, 10.0), rwa=True)
    states = sampling.two_qubit_inputs()
    out = solver.run_protocol(np.array([pure(s) for s in states]), cfg)
    cz = np.ones(16, dtype=complex)
    cz[4 * 1 + 1] = -1
    for s, rho in zip(states, out):
        target = cz * s
        assert np.real(np.vdot(target, rho @ target)) >= 1 - 1e-6


def test_settings_validation():
    with pytest.raises(ValueError):
        solver.IntegratorSettings(rel_tol=0.0)
    with pytest.raises(ValueError):
        solver.integrate(np.eye(4) / 4, None, [], 1.0, 1.0)
