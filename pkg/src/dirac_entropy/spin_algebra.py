"""Dirac matrices in the Dirac representation and Hermitian matrix functions."""

from __future__ import annotations

import numpy as np

from .errors import NumericalError, PreconditionError

HERM_TOL = 1e-10

SIGMA = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

_I2 = np.eye(2, dtype=complex)
_Z2 = np.zeros((2, 2), dtype=complex)

_GAMMA = (
    np.block([[_I2, _Z2], [_Z2, -_I2]]),
    *(np.block([[_Z2, s], [-s, _Z2]]) for s in SIGMA),
)
for _g in _GAMMA:
    _g.setflags(write=False)

IDENTITY = np.eye(4, dtype=complex)
IDENTITY.setflags(write=False)

# spin operators diag(sigma, sigma), generators of the spatial rotations
SPIN = tuple(np.block([[s, _Z2], [_Z2, s]]) for s in SIGMA)

# metric diag(1, -1, -1, -1)
METRIC = np.diag([1.0, -1.0, -1.0, -1.0])


def gamma(index: int) -> np.ndarray:
    """Return the Dirac matrix ``gamma^index`` (a fresh writable copy).

    Parameters
    ----------
    index : int
        0 for the time-like matrix, 1..3 for the spatial ones.
    """
    if isinstance(index, bool) or not isinstance(index, (int, np.integer)):
        raise ValueError(f"gamma index must be an integer in 0..3, got {index!r}")
    if not 0 <= index <= 3:
        raise ValueError(f"gamma index must be in 0..3, got {index}")
    return _GAMMA[index].copy()


def alpha_matrices() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``gamma^b gamma^0`` for b = 1, 2, 3 (Hermitian, squares equal to one)."""
    return tuple(_GAMMA[b] @ _GAMMA[0] for b in (1, 2, 3))


def hermiticity_defect(a: np.ndarray) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a - np.conj(np.swapaxes(a, -1, -2))), initial=0.0))


def apply_matrix_function(a, f, herm_tol: float = HERM_TOL) -> np.ndarray:
    """Evaluate ``f(A)`` for a Hermitian matrix (or a stack of them) by spectral calculus.

    ``A`` is symmetrized before the eigendecomposition; ``f`` is applied to the
    eigenvalues pointwise. It should accept an ndarray; plain scalar callables
    are vectorized automatically.

    Raises
    ------
    PreconditionError
        If ``max|A - A^H|`` exceeds `herm_tol`.
    NumericalError
        If the eigensolver does not converge.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise PreconditionError(f"expected square matrices, got shape {a.shape}")
    defect = hermiticity_defect(a)
    if defect > herm_tol:
        raise PreconditionError(f"matrix is not Hermitian: max|A - A^H| = {defect:.3e} > {herm_tol:.1e}")
    a = 0.5 * (a + np.conj(np.swapaxes(a, -1, -2)))
    try:
        w, u = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"eigendecomposition failed for shape {a.shape}: {exc}; "
            f"finite entries: {bool(np.all(np.isfinite(a)))}"
        ) from exc
    fw = _apply_pointwise(f, w)
    return (u * fw[..., None, :]) @ np.conj(np.swapaxes(u, -1, -2))


def _apply_pointwise(f, w):
    try:
        fw = np.asarray(f(w))
    except TypeError:
        fw = None
    if fw is None or fw.shape != w.shape:
        fw = np.vectorize(f, otypes=[complex])(w)
    if np.all(np.isreal(fw)):
        fw = np.real(fw)
    return fw
