"""Seeded random generators for cone members, planes and algebra elements.

All randomness goes through counter-based Philox streams keyed by
``(seed, stream)``, so independent draws never share state.
"""
from __future__ import annotations

import numpy as np

from .matrix import Signature

LAMBDA_RANGE = (0.25, 4.0)


def rng_for(seed: int, *stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, stream)])))


def complex_normal(rng, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_unitary(rng, k: int) -> np.ndarray:
    Q, R = np.linalg.qr(complex_normal(rng, (k, k)))
    d = np.diag(R)
    return Q * (d / np.abs(d))


def random_lambda(rng) -> float:
    lo, hi = LAMBDA_RANGE
    return float(np.exp(rng.uniform(np.log(lo), np.log(hi))))


def random_cone(rng, m: int, n: int, lam: float | None = None) -> np.ndarray:
    """X with X*X = lam I_n: orthonormalized random columns scaled by sqrt(lam).

    ``lam`` defaults to a log-uniform draw from ``LAMBDA_RANGE``.
    """
    if n > m:
        raise ValueError(f"U_{{m,n}} is empty for n={n} > m={m}")
    if lam is None:
        lam = random_lambda(rng)
    Q, R = np.linalg.qr(complex_normal(rng, (m, n)))
    d = np.diag(R)
    return np.sqrt(lam) * Q * (d / np.abs(d))


def orthogonal_complement_cone(rng, X, lam: float | None = None) -> np.ndarray:
    """Z with X*Z = 0 and Z*Z = lam I_n (needs m >= 2n)."""
    m, n = X.shape
    if m < 2 * n:
        raise ValueError("an orthogonal cone partner needs m >= 2n")
    if lam is None:
        lam = random_lambda(rng)
    Q, _ = np.linalg.qr(np.column_stack([X, complex_normal(rng, (m, n))]))
    return np.sqrt(lam) * Q[:, n:2 * n]


def flat_partner(rng, X, mu: float | None = None, lam: float | None = None) -> np.ndarray:
    """Y in U_{m,n}(C) with X*Y = mu I_n, mu real (needs m >= 2n)."""
    lam_x = float(np.real(np.trace(X.conj().T @ X))) / X.shape[1]
    if mu is None:
        mu = float(rng.uniform(-1.0, 1.0)) * lam_x
    return (mu / lam_x) * X + orthogonal_complement_cone(rng, X, lam)


def complex_partner(rng, X) -> np.ndarray:
    """Y = alpha X + beta iX with beta bounded away from zero."""
    alpha = rng.uniform(-1.0, 1.0)
    beta = rng.choice([-1.0, 1.0]) * rng.uniform(0.2, 1.5)
    return alpha * X + beta * 1j * X


def random_algebra_element(rng, sig: Signature, norm: float | None = None) -> np.ndarray:
    """Random element of u(n,m) as a bare matrix, optionally of Frobenius norm ``norm``."""
    n, m = sig.n, sig.m
    a = complex_normal(rng, (n, n))
    d = complex_normal(rng, (m, m))
    B = complex_normal(rng, (m, n))
    A = np.zeros((n + m, n + m), dtype=np.complex128)
    A[:n, :n] = a - a.conj().T
    A[n:, n:] = d - d.conj().T
    A[n:, :n] = B
    A[:n, n:] = B.conj().T
    if norm is not None:
        A *= norm / np.linalg.norm(A)
    return A


def _perp(rng, X, cols: int) -> np.ndarray:
    """Random m x cols matrix whose columns are orthogonal to those of X."""
    m, n = X.shape
    W = complex_normal(rng, (m, cols))
    Q, _ = np.linalg.qr(X)
    return W - Q @ (Q.conj().T @ W)


def available_verdicts(sig: Signature) -> tuple[str, ...]:
    """Plane verdicts that can occur for X, Y in C^{m x n} with X in the cone."""
    n, m = sig.n, sig.m
    out = ["ComplexSurface"]
    if m >= 2 * n:
        out.append("FlatSurface")
    if m > n:
        out.append("NotTotallyGeodesic")
    return tuple(out)


def classifier_instance(rng, sig: Signature, verdict: str, lam: float | None = None):
    """A pair (X, Y) satisfying X*Y = mu I whose expected verdict is ``verdict``.

    Complex planes use Y = alpha X + beta iX, flat ones a cone partner with
    real mu. Non-geodesic planes add a component orthogonal to X, either to
    a complex mu or (for n >= 2) to a real mu with a non-scalar Gram matrix.
    """
    n, m = sig.n, sig.m
    if verdict not in available_verdicts(sig):
        raise ValueError(f"{verdict} cannot occur for signature ({n}, {m})")
    X = random_cone(rng, m, n, lam)
    if verdict == "ComplexSurface":
        return X, complex_partner(rng, X)
    if verdict == "FlatSurface":
        return X, flat_partner(rng, X)
    lam_x = float(np.real(np.trace(X.conj().T @ X))) / n
    real_mu = n >= 2 and rng.uniform() < 0.5
    if real_mu:
        mu = complex(rng.uniform(-1.0, 1.0))
    else:
        mu = complex(rng.uniform(-1.0, 1.0), rng.choice([-1.0, 1.0]) * rng.uniform(0.2, 1.5))
    Z = _perp(rng, X, n)
    return X, (mu / lam_x) * X + Z
