"""Small dense complex-matrix helpers.

Operators are plain ``numpy`` ``complex128`` arrays. The helpers add shape
checking with readable errors on top of the numpy primitives.
"""

from __future__ import annotations

import numpy as np

HERMITIAN_TOL = 1e-10


class ShapeError(ValueError):
    """Raised when operands are not conformable."""

    def __init__(self, op: str, *shapes: tuple[int, ...]):
        self.op = op
        self.shapes = shapes
        desc = " and ".join(str(tuple(s)) for s in shapes)
        super().__init__(f"{op}: incompatible shapes {desc}")


class NotHermitianError(ValueError):
    pass


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or 0 in m.shape:
        raise ShapeError("as_matrix", m.shape)
    return m


def _square(op: str, a: np.ndarray) -> None:
    if a.shape[0] != a.shape[1]:
        raise ShapeError(op, a.shape)


def kron(a, b) -> np.ndarray:
    """Tensor product with the first factor as the slow index."""
    return np.kron(as_matrix(a), as_matrix(b))


def adjoint(a) -> np.ndarray:
    return as_matrix(a).conj().T


def matmul(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ShapeError("matmul", a.shape, b.shape)
    return a @ b


def commutator(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    _square("commutator", a)
    if a.shape != b.shape:
        raise ShapeError("commutator", a.shape, b.shape)
    return a @ b - b @ a


def trace(a) -> complex:
    a = as_matrix(a)
    _square("trace", a)
    return complex(np.trace(a))


def hermiticity_error(a) -> float:
    a = as_matrix(a)
    _square("hermiticity_error", a)
    return float(np.max(np.abs(a - a.conj().T)))


def min_eigenvalue_hermitian(a, tol: float = HERMITIAN_TOL) -> float:
    """Smallest eigenvalue of a Hermitian matrix.

    The input is symmetrized before the LAPACK call so round-off asymmetry
    below ``tol`` does not leak into the result.
    """
    a = as_matrix(a)
    _square("min_eigenvalue_hermitian", a)
    err = hermiticity_error(a)
    if err > tol:
        raise NotHermitianError(f"matrix deviates from Hermitian by {err:.3e} > {tol:.1e}")
    herm = 0.5 * (a + a.conj().T)
    return float(np.linalg.eigvalsh(herm)[0])
