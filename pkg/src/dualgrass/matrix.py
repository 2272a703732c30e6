"""Dense complex linear algebra for U(n,m).

Matrices are plain ``complex128`` numpy arrays. The helpers here validate
shapes and finiteness, and implement the exponential, its Frechet
derivative and the residuals used throughout the package.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _backend
from .errors import DimensionError

MAX_SIZE = 16
"""Largest supported n + m."""


@dataclass(frozen=True)
class Signature:
    """Signature (n, m) of the Hermitian form diag(-I_n, I_m)."""

    n: int
    m: int

    def __post_init__(self):
        for name in ("n", "m"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
                raise ValueError(f"signature entry {name} must be a positive integer, got {v!r}")

    @property
    def size(self) -> int:
        return self.n + self.m


def as_matrix(A, shape: tuple[int, int] | None = None, name: str = "matrix") -> np.ndarray:
    """Coerce ``A`` to a finite 2-D complex array, optionally of a fixed shape."""
    M = np.array(A, dtype=np.complex128)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    if M.ndim != 2 or M.shape[0] < 1 or M.shape[1] < 1:
        raise DimensionError(f"{name} must be a nonempty 2-D matrix, got shape {M.shape}")
    if shape is not None and M.shape != tuple(shape):
        raise DimensionError(f"{name} must have shape {tuple(shape)}, got {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    return M


def _square(A, name="matrix") -> np.ndarray:
    M = as_matrix(A, name=name)
    if M.shape[0] != M.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {M.shape}")
    return M


def matrix_to_json(A) -> dict:
    M = as_matrix(A)
    flat = M.ravel()
    return {
        "rows": int(M.shape[0]),
        "cols": int(M.shape[1]),
        "data": [[float(z.real), float(z.imag)] for z in flat],
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    """Parse ``{"rows": r, "cols": c, "data": [[re, im], ...]}`` (row-major)."""
    try:
        rows, cols, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed matrix object: {exc}") from None
    if rows < 1 or cols < 1 or len(data) != rows * cols:
        raise ValueError(f"matrix data has {len(data)} entries, expected {rows}x{cols}")
    vals = []
    for entry in data:
        if isinstance(entry, (int, float)):
            vals.append(complex(entry))
        elif len(entry) == 2:
            vals.append(complex(float(entry[0]), float(entry[1])))
        else:
            raise ValueError(f"matrix entry must be [re, im], got {entry!r}")
    return as_matrix(np.array(vals).reshape(rows, cols))


def adjoint(A) -> np.ndarray:
    """Conjugate transpose."""
    return as_matrix(A).conj().T.copy()


def lambda_matrix(sig: Signature) -> np.ndarray:
    """The signature matrix diag(-I_n, I_m)."""
    return np.diag(np.concatenate([-np.ones(sig.n), np.ones(sig.m)])).astype(np.complex128)


def hermitian_form(sig: Signature, v, w) -> complex:
    """F(v, w) = v* diag(-I_n, I_m) w for column vectors of length n + m."""
    shape = (sig.size, 1)
    v = as_matrix(np.reshape(v, (-1, 1)) if np.ndim(v) == 1 else v, shape, "v")
    w = as_matrix(np.reshape(w, (-1, 1)) if np.ndim(w) == 1 else w, shape, "w")
    s = np.concatenate([-np.ones(sig.n), np.ones(sig.m)])
    return complex(np.sum(v[:, 0].conj() * s * w[:, 0]))


def commutator(A, B) -> np.ndarray:
    return A @ B - B @ A


def expm(A) -> np.ndarray:
    """Matrix exponential by degree-13 Pade scaling and squaring."""
    M = _square(A)
    return _backend.expm_batch(M[None])[0]


def expm_batch(A, backend: str | None = None) -> np.ndarray:
    """Exponentials of a ``(N, k, k)`` stack."""
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim != 3 or A.shape[1] != A.shape[2]:
        raise DimensionError(f"expected a (N, k, k) stack, got shape {A.shape}")
    return _backend.expm_batch(A, backend=backend)


def expm_frechet(A, E) -> np.ndarray:
    """Directional derivative D exp(A)[E].

    Read off the upper-right block of exp([[A, E], [0, A]]).
    """
    A = _square(A, "A")
    E = _square(E, "E")
    if A.shape != E.shape:
        raise DimensionError(f"A and E differ in shape: {A.shape} vs {E.shape}")
    _, (L,) = expm_with_derivatives(A[None], [E[None]])
    return L[0]


def expm_with_derivatives(A, directions: Sequence[np.ndarray], backend: str | None = None):
    """Batched exp(A) together with D exp(A)[E_p] for several directions.

    Parameters
    ----------
    A : (N, k, k) array
    directions : sequence of p arrays of shape (N, k, k)

    Returns
    -------
    expA : (N, k, k) array
    derivs : list of p arrays of shape (N, k, k)

    Notes
    -----
    Uses one exponential of the block upper-triangular matrix with A on the
    diagonal and the E_p along the first block row; block (0, p) of the
    result is the derivative in direction E_p. Each E_p is rescaled to unit
    1-norm first so the directions do not inflate the squaring count.
    """
    A = np.asarray(A, dtype=np.complex128)
    N, k, _ = A.shape
    p = len(directions)
    big = np.zeros((N, (p + 1) * k, (p + 1) * k), dtype=np.complex128)
    scales = []
    for q in range(p + 1):
        big[:, q * k:(q + 1) * k, q * k:(q + 1) * k] = A
    for q, E in enumerate(directions, start=1):
        E = np.asarray(E, dtype=np.complex128)
        if E.shape != A.shape:
            raise DimensionError(f"direction {q} has shape {E.shape}, expected {A.shape}")
        norm = np.abs(E).sum(axis=1).max(axis=1)
        norm = np.where(norm > 0, norm, 1.0)
        scales.append(norm)
        big[:, :k, q * k:(q + 1) * k] = E / norm[:, None, None]
    R = _backend.expm_batch(big, backend=backend)
    derivs = [R[:, :k, q * k:(q + 1) * k] * scales[q - 1][:, None, None] for q in range(1, p + 1)]
    return R[:, :k, :k], derivs


def group_inverse(sig: Signature, Phi) -> np.ndarray:
    """Inverse of Phi in U(n,m), computed as Lambda Phi* Lambda."""
    s = np.concatenate([-np.ones(sig.n), np.ones(sig.m)])
    Phi = np.asarray(Phi)
    return s[:, None] * np.swapaxes(Phi.conj(), -1, -2) * s[None, :]


def pseudo_unitarity_residual(sig: Signature, Phi) -> float:
    """Frobenius norm of Phi* Lambda Phi - Lambda."""
    Phi = as_matrix(Phi, (sig.size, sig.size), "Phi")
    L = lambda_matrix(sig)
    return float(np.linalg.norm(Phi.conj().T @ L @ Phi - L))


def inner_product(A, B) -> float:
    """<A, B> = Re Tr(A* B) / 2, the left-invariant metric on u(n,m)."""
    A = _square(A, "A")
    B = _square(B, "B")
    if A.shape != B.shape:
        raise DimensionError(f"A and B differ in shape: {A.shape} vs {B.shape}")
    return 0.5 * float(np.real(np.vdot(A, B)))


def metric_norm(A) -> float:
    """Length of A in the <., .> metric."""
    return inner_product(A, A) ** 0.5


def frobenius(A) -> float:
    return float(np.linalg.norm(np.asarray(A)))
