"""Input validation helpers, in the spirit of ``sklearn.utils.validation``."""

import numpy as np

from .exceptions import InputError, NotHermitian, NotUnitary, ShapeMismatch


def check_matrix(A, *, name="matrix", shape=None, square=False):
    """Return ``A`` as a finite 2-d complex array.

    Parameters
    ----------
    A : array-like
        Anything ``np.asarray`` accepts. 1-d input is rejected rather than
        reshaped, since row vs column would be a guess.
    shape : tuple of int, optional
        Required shape.
    square : bool
        Require a square matrix.
    """
    try:
        arr = np.asarray(A, dtype=complex)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{name}: not a numeric array ({exc})") from None
    if arr.ndim != 2:
        raise ShapeMismatch(f"{name}: expected a 2-d array, got ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name}: entries must be finite")
    if shape is not None and arr.shape != tuple(shape):
        raise ShapeMismatch(f"{name}: expected shape {tuple(shape)}, got {arr.shape}")
    if square and arr.shape[0] != arr.shape[1]:
        raise ShapeMismatch(f"{name}: expected a square matrix, got {arr.shape}")
    return arr


def hermitian_defect(M):
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(M - M.conj().T)))


def check_hermitian(M, eps, *, name="matrix"):
    M = check_matrix(M, name=name, square=True)
    defect = hermitian_defect(M)
    if defect > eps:
        raise NotHermitian(f"{name}: symmetry defect {defect:.3g} exceeds {eps:.3g}")
    return M


def unitary_defect(U):
    if U.size == 0:
        return 0.0
    return float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[1]))))


def check_unitary(U, eps, *, name="unitary"):
    U = check_matrix(U, name=name, square=True)
    defect = unitary_defect(U)
    if defect > eps:
        raise NotUnitary(f"{name}: unitarity defect {defect:.3g} exceeds {eps:.3g}")
    return U


def check_positive(value, *, name):
    if not value > 0:
        raise InputError(f"{name} must be positive, got {value!r}")
    return value
