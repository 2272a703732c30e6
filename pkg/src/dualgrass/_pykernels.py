"""Pure numpy kernels; the reference for the compiled ``_ckernels`` module.

Both modules expose the same two functions and must agree to rounding.
"""
import numpy as np

# Higham (2005) degree-13 Pade coefficients and the matching scaling threshold.
PADE13 = (
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0, 129060195264000.0, 10559470521600.0,
    670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
    960960.0, 16380.0, 182.0, 1.0,
)
THETA13 = 5.371920351148152


def squarings(norm1):
    """Number of squarings so that ``norm1 / 2**s <= THETA13``."""
    norm1 = np.asarray(norm1, dtype=float)
    s = np.zeros(norm1.shape, dtype=np.int64)
    big = norm1 > THETA13
    s[big] = np.ceil(np.log2(norm1[big] / THETA13)).astype(np.int64)
    return s


def expm_batch(A):
    """Matrix exponential of every matrix in a ``(N, k, k)`` stack."""
    A = np.asarray(A, dtype=np.complex128)
    N, k, _ = A.shape
    if N == 0:
        return A.copy()
    b = PADE13
    s = squarings(np.abs(A).sum(axis=1).max(axis=1))
    A = A / np.ldexp(1.0, s)[:, None, None]
    ident = np.broadcast_to(np.eye(k, dtype=np.complex128), A.shape)
    A2 = A @ A
    A4 = A2 @ A2
    A6 = A4 @ A2
    U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
             + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * ident)
    V = (A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
         + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * ident)
    R = np.linalg.solve(V - U, V + U)
    for level in range(int(s.max())):
        todo = s > level
        R[todo] = R[todo] @ R[todo]
    return R


def _polar_refine(B):
    # Newton-Schulz step toward the unitary polar factor; B must be near-unitary.
    for _ in range(2):
        B = 0.5 * B @ (3.0 * np.eye(B.shape[0]) - B.conj().T @ B)
    return B


def ordered_product(F, renorm_every, split):
    """Return ``F[N-1] @ ... @ F[1] @ F[0]``.

    Every ``renorm_every`` factors the two diagonal blocks (sizes ``split`` and
    ``k - split``) of the running product are pulled back onto the unitary
    group. Off-diagonal blocks are left untouched so leakage stays visible.
    """
    F = np.asarray(F, dtype=np.complex128)
    N, k, _ = F.shape
    P = np.eye(k, dtype=np.complex128)
    for j in range(N):
        P = F[j] @ P
        if renorm_every > 0 and (j + 1) % renorm_every == 0:
            P[:split, :split] = _polar_refine(P[:split, :split])
            P[split:, split:] = _polar_refine(P[split:, split:])
    return P
