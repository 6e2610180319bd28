import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from holonomy import gates, model
from holonomy.gates import PAULI

X, Y, Z = PAULI
I2 = np.eye(2)
angles = st.floats(-np.pi, np.pi, allow_nan=False)


def unit(theta, phi):
    return np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])


@pytest.mark.parametrize("n, expected", [
    ((0, 0, 1), Z),
    ((1, 0, 0), X),
    ((1 / np.sqrt(2), 0, 1 / np.sqrt(2)), (X + Z) / np.sqrt(2)),
])
def test_holonomy_single_examples(n, expected):
    np.testing.assert_allclose(gates.holonomy_single(n), expected, atol=1e-12)


@given(angles, angles)
def test_holonomy_single_matches_matrix_form(theta, phi):
    u = gates.holonomy_single(unit(theta, phi))
    expected = np.array([[np.cos(theta), np.exp(-1j * phi) * np.sin(theta)],
                         [np.exp(1j * phi) * np.sin(theta), -np.cos(theta)]])
    np.testing.assert_allclose(u, expected, atol=1e-12)
    np.testing.assert_allclose(u, u.conj().T, atol=1e-12)
    np.testing.assert_allclose(u @ u, I2, atol=1e-12)
    assert abs(np.trace(u)) < 1e-12


def test_holonomy_double_examples():
    n = np.array([1.0, 0, 0])
    np.testing.assert_allclose(gates.holonomy_double(n, n), I2, atol=1e-12)
    np.testing.assert_allclose(gates.holonomy_double(n, [0, 1, 0]), np.diag([-1j, 1j]), atol=1e-12)


@given(angles, angles)
def test_equatorial_pair_is_phase_shift(phi, phi2):
    u = gates.holonomy_double(unit(np.pi / 2, phi), unit(np.pi / 2, phi2))
    d = phi2 - phi
    np.testing.assert_allclose(u, np.diag([np.exp(-1j * d), np.exp(1j * d)]), atol=1e-12)


@given(angles, angles, angles, angles)
@settings(max_examples=50)
def test_reversed_loops_invert(t1, p1, t2, p2):
    n, m = unit(t1, p1), unit(t2, p2)
    u = gates.holonomy_double(n, m)
    np.testing.assert_allclose(u @ gates.holonomy_double(m, n), I2, atol=1e-12)
    np.testing.assert_allclose(u @ u.conj().T, I2, atol=1e-12)


def test_double_loop_is_product_of_singles(rng):
    for _ in range(20):
        n, m = unit(*rng.uniform(-3, 3, 2)), unit(*rng.uniform(-3, 3, 2))
        prod = gates.holonomy_single(m) @ gates.holonomy_single(n)
        np.testing.assert_allclose(gates.holonomy_double(n, m), prod, atol=1e-12)


def test_non_commuting_pair():
    a = gates.holonomy_single([1, 0, 0])
    b = gates.holonomy_single([0, 0, 1])
    assert np.linalg.norm(a @ b - b @ a, 2) > 1


def test_rejects_non_unit_vector():
    with pytest.raises(ValueError):
        gates.holonomy_single([1, 1, 0])
    with pytest.raises(ValueError):
        gates.holonomy_double([1, 0, 0], [0, 0, 2])


def test_ideal_two_qubit_limits():
    np.testing.assert_allclose(gates.ideal_two_qubit(0, 0), np.diag([1, 1, 1, -1]), atol=1e-12)
    u = gates.ideal_two_qubit(np.pi / 2, 0)
    e00, e11 = np.eye(4)[0], np.eye(4)[3]
    np.testing.assert_allclose(u @ e00, e11, atol=1e-12)
    np.testing.assert_allclose(u @ e11, e00, atol=1e-12)


@given(angles, angles)
def test_ideal_two_qubit_unitary(theta, phi):
    u = gates.ideal_two_qubit(theta, phi)
    np.testing.assert_allclose(u @ u.conj().T, np.eye(4), atol=1e-12)


def test_catalog_z_weights():
    spec = gates.catalog("Z")
    w0, w1 = spec.loops[0].weights
    assert abs(w0) < 1e-15 and abs(abs(w1) - 1) < 1e-15
    np.testing.assert_allclose(spec.bloch_vectors[0], [0, 0, 1], atol=1e-15)


def test_catalog_s_is_quarter_phase():
    u = gates.catalog("s").ideal()
    ratio = u / u[0, 0]
    np.testing.assert_allclose(ratio, np.diag([1, 1j]), atol=1e-12)


def test_catalog_hadamard_and_x():
    h = gates.catalog("H")
    assert h.kind == "single" and h.loops[0].theta == pytest.approx(np.pi / 4)
    for name in ("X", "not"):
        np.testing.assert_allclose(gates.catalog(name).ideal(), X, atol=1e-12)


def test_catalog_parametrized():
    ps = gates.catalog("phase-shift", dphi=0.3, phi=0.1)
    assert [l.phi for l in ps.loops] == pytest.approx([0.1, 0.4])
    sp = gates.catalog("single-pulse", theta=1.0, phi=0.5)
    np.testing.assert_allclose(sp.ideal(), gates.holonomy_single(unit(1.0, 0.5)), atol=1e-12)
    with pytest.raises(ValueError):
        gates.catalog("phase-shift")
    cz = gates.catalog("CZ")
    assert cz.kind == "two-qubit" and cz.n_qubits == 2


def test_catalog_loops_reproduce_bloch_vectors():
    for name in ("X", "H", "Z", "S"):
        spec = gates.catalog(name)
        for loop, v in zip(spec.loops, spec.bloch_vectors):
            np.testing.assert_allclose(v, unit(loop.theta, loop.phi), atol=1e-15)


def test_unknown_gate_lists_names():
    with pytest.raises(gates.UnknownGateError) as info:
        gates.catalog("toffoli")
    for name in gates.GATE_NAMES:
        assert name in str(info.value)


def test_gate_spec_loop_count():
    with pytest.raises(ValueError):
        gates.GateSpec("bad", "double", (model.LoopParams(0, 0),))


def test_embed_examples():
    np.testing.assert_allclose(gates.embed_qubit_unitary(I2, 4), np.eye(4))
    ket0 = np.eye(4)[0]
    np.testing.assert_allclose(gates.embed_qubit_unitary(X, 4) @ ket0, np.eye(4)[1])
    cz = gates.embed_qubit_unitary(np.diag([1, 1, 1, -1]), 16)
    for a in (model.E, model.G):
        for b in range(4):
            k = np.eye(16)[4 * a + b]
            np.testing.assert_allclose(cz @ k, k)
            k = np.eye(16)[4 * b + a]
            np.testing.assert_allclose(cz @ k, k)
    assert cz[5, 5] == -1  # |11> = 4*1 + 1


def test_embed_rejects_bad_dims():
    with pytest.raises(ValueError):
        gates.embed_qubit_unitary(I2, 16)
    with pytest.raises(ValueError):
        gates.embed_qubit_unitary(I2, 5)
