# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot kernels in ``_pykernels``.

Matrices here are tiny (k <= 48); plain loops that skip the structural
zeros of block-triangular inputs stand in for BLAS.
"""
import numpy as np

from libc.stdlib cimport malloc, free
from libc.string cimport memcpy, memset
from libc.math cimport ceil, log2, ldexp

cdef double THETA13 = 5.371920351148152
cdef double[14] PADE13
PADE13[:] = [
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0, 129060195264000.0, 10559470521600.0,
    670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
    960960.0, 16380.0, 182.0, 1.0,
]


cdef void _matmul(const double complex* A, const double complex* B,
                  double complex* C, int k) noexcept nogil:
    # Interleaved complex product; only used on the small unitary blocks.
    cdef const double* a = <const double*>A
    cdef const double* b
    cdef double* c
    cdef int i, j, l
    cdef double ar, ai
    memset(C, 0, k * k * sizeof(double complex))
    for i in range(k):
        c = <double*>(C + i * k)
        for l in range(k):
            ar = a[2 * (i * k + l)]
            ai = a[2 * (i * k + l) + 1]
            if ar == 0.0 and ai == 0.0:
                continue
            b = <const double*>(B + l * k)
            for j in range(k):
                c[2 * j] += ar * b[2 * j] - ai * b[2 * j + 1]
                c[2 * j + 1] += ar * b[2 * j + 1] + ai * b[2 * j]


# The exponential works on planar storage (separate re/im arrays) so the
# inner loops are contiguous and vectorize.

cdef void _pmm(const double* Ar, const double* Ai, const double* Br, const double* Bi,
               double* Cr, double* Ci, int k) noexcept nogil:
    cdef int i, j, l
    cdef double ar, ai
    cdef const double* br
    cdef const double* bi
    cdef double* cr
    cdef double* ci
    memset(Cr, 0, k * k * sizeof(double))
    memset(Ci, 0, k * k * sizeof(double))
    for i in range(k):
        cr = Cr + i * k
        ci = Ci + i * k
        for l in range(k):
            ar = Ar[i * k + l]
            ai = Ai[i * k + l]
            if ar == 0.0 and ai == 0.0:
                continue
            br = Br + l * k
            bi = Bi + l * k
            for j in range(k):
                cr[j] += ar * br[j] - ai * bi[j]
                ci[j] += ar * bi[j] + ai * br[j]


cdef int _psolve(double* Qr, double* Qi, double* Pr, double* Pi, int k) noexcept nogil:
    """Overwrite P with Q^{-1} P (LU with partial pivoting, Q destroyed)."""
    cdef int col, row, piv, j
    cdef double best, cur, t, fr, fi, dr, di, den, xr, xi
    for col in range(k):
        piv = col
        best = Qr[col * k + col] ** 2 + Qi[col * k + col] ** 2
        for row in range(col + 1, k):
            cur = Qr[row * k + col] ** 2 + Qi[row * k + col] ** 2
            if cur > best:
                best = cur
                piv = row
        if best == 0.0:
            return -1
        if piv != col:
            for j in range(k):
                t = Qr[col * k + j]; Qr[col * k + j] = Qr[piv * k + j]; Qr[piv * k + j] = t
                t = Qi[col * k + j]; Qi[col * k + j] = Qi[piv * k + j]; Qi[piv * k + j] = t
                t = Pr[col * k + j]; Pr[col * k + j] = Pr[piv * k + j]; Pr[piv * k + j] = t
                t = Pi[col * k + j]; Pi[col * k + j] = Pi[piv * k + j]; Pi[piv * k + j] = t
        dr = Qr[col * k + col]
        di = Qi[col * k + col]
        den = dr * dr + di * di
        for row in range(col + 1, k):
            xr = Qr[row * k + col]
            xi = Qi[row * k + col]
            if xr == 0.0 and xi == 0.0:
                continue
            # f = x / d
            fr = (xr * dr + xi * di) / den
            fi = (xi * dr - xr * di) / den
            for j in range(col, k):
                Qr[row * k + j] -= fr * Qr[col * k + j] - fi * Qi[col * k + j]
                Qi[row * k + j] -= fr * Qi[col * k + j] + fi * Qr[col * k + j]
            for j in range(k):
                Pr[row * k + j] -= fr * Pr[col * k + j] - fi * Pi[col * k + j]
                Pi[row * k + j] -= fr * Pi[col * k + j] + fi * Pr[col * k + j]
    for col in range(k - 1, -1, -1):
        for row in range(col + 1, k):
            xr = Qr[col * k + row]
            xi = Qi[col * k + row]
            if xr == 0.0 and xi == 0.0:
                continue
            for j in range(k):
                Pr[col * k + j] -= xr * Pr[row * k + j] - xi * Pi[row * k + j]
                Pi[col * k + j] -= xr * Pi[row * k + j] + xi * Pr[row * k + j]
        dr = Qr[col * k + col]
        di = Qi[col * k + col]
        den = dr * dr + di * di
        for j in range(k):
            xr = Pr[col * k + j]
            xi = Pi[col * k + j]
            Pr[col * k + j] = (xr * dr + xi * di) / den
            Pi[col * k + j] = (xi * dr - xr * di) / den
    return 0


cdef int _expm_one(const double complex* Ain, double complex* out, int k,
                   double* w) noexcept nogil:
    # w holds 16 k*k doubles (8 planar scratch matrices).
    cdef int kk = k * k
    cdef double* Ar = w
    cdef double* Ai = w + kk
    cdef double* A2r = w + 2 * kk
    cdef double* A2i = w + 3 * kk
    cdef double* A4r = w + 4 * kk
    cdef double* A4i = w + 5 * kk
    cdef double* A6r = w + 6 * kk
    cdef double* A6i = w + 7 * kk
    cdef double* Tr = w + 8 * kk
    cdef double* Ti = w + 9 * kk
    cdef double* Ur = w + 10 * kk
    cdef double* Ui = w + 11 * kk
    cdef double* Vr = w + 12 * kk
    cdef double* Vi = w + 13 * kk
    cdef double* Or = w + 14 * kk
    cdef double* Oi = w + 15 * kk
    cdef const double* a = <const double*>Ain
    cdef double* o = <double*>out
    cdef int i, j, s, level
    cdef double colsum, norm1 = 0.0, scale
    cdef double* b = PADE13

    for j in range(k):
        colsum = 0.0
        for i in range(k):
            colsum += (a[2 * (i * k + j)] ** 2 + a[2 * (i * k + j) + 1] ** 2) ** 0.5
        if colsum > norm1:
            norm1 = colsum
    s = 0
    if norm1 > THETA13:
        s = <int>ceil(log2(norm1 / THETA13))
    scale = ldexp(1.0, -s)
    for i in range(kk):
        Ar[i] = a[2 * i] * scale
        Ai[i] = a[2 * i + 1] * scale

    _pmm(Ar, Ai, Ar, Ai, A2r, A2i, k)
    _pmm(A2r, A2i, A2r, A2i, A4r, A4i, k)
    _pmm(A4r, A4i, A2r, A2i, A6r, A6i, k)

    for i in range(kk):
        Tr[i] = b[13] * A6r[i] + b[11] * A4r[i] + b[9] * A2r[i]
        Ti[i] = b[13] * A6i[i] + b[11] * A4i[i] + b[9] * A2i[i]
    _pmm(A6r, A6i, Tr, Ti, Ur, Ui, k)
    for i in range(kk):
        Ur[i] += b[7] * A6r[i] + b[5] * A4r[i] + b[3] * A2r[i]
        Ui[i] += b[7] * A6i[i] + b[5] * A4i[i] + b[3] * A2i[i]
    for i in range(k):
        Ur[i * k + i] += b[1]
    _pmm(Ar, Ai, Ur, Ui, Tr, Ti, k)            # T = odd part U
    for i in range(kk):
        Ur[i] = b[12] * A6r[i] + b[10] * A4r[i] + b[8] * A2r[i]
        Ui[i] = b[12] * A6i[i] + b[10] * A4i[i] + b[8] * A2i[i]
    _pmm(A6r, A6i, Ur, Ui, Vr, Vi, k)
    for i in range(kk):
        Vr[i] += b[6] * A6r[i] + b[4] * A4r[i] + b[2] * A2r[i]
        Vi[i] += b[6] * A6i[i] + b[4] * A4i[i] + b[2] * A2i[i]
    for i in range(k):
        Vr[i * k + i] += b[0]

    # O = (V - U)^{-1} (V + U); A is free to hold the system matrix.
    for i in range(kk):
        Ar[i] = Vr[i] - Tr[i]
        Ai[i] = Vi[i] - Ti[i]
        Or[i] = Vr[i] + Tr[i]
        Oi[i] = Vi[i] + Ti[i]
    if _psolve(Ar, Ai, Or, Oi, k) != 0:
        return -1
    for level in range(s):
        memcpy(Tr, Or, kk * sizeof(double))
        memcpy(Ti, Oi, kk * sizeof(double))
        _pmm(Tr, Ti, Tr, Ti, Or, Oi, k)
    for i in range(kk):
        o[2 * i] = Or[i]
        o[2 * i + 1] = Oi[i]
    return 0


def expm_batch(double complex[:, :, ::1] A):
    """Matrix exponential of every matrix in a C-contiguous ``(N, k, k)`` stack."""
    cdef Py_ssize_t N = A.shape[0]
    cdef int k = <int>A.shape[1]
    result = np.empty((N, k, k), dtype=np.complex128)
    cdef double complex[:, :, ::1] R = result
    if N == 0:
        return result
    cdef double* work = <double*>malloc(16 * k * k * sizeof(double))
    if work == NULL:
        raise MemoryError()
    cdef Py_ssize_t p
    cdef int failed = 0
    try:
        with nogil:
            for p in range(N):
                if _expm_one(&A[p, 0, 0], &R[p, 0, 0], k, work) != 0:
                    failed = 1
                    break
    finally:
        free(work)
    if failed:
        raise ArithmeticError("singular Pade denominator")
    return result


cdef void _polar_refine(double complex* P, int k, int lo, int hi,
                        double complex* B, double complex* G,
                        double complex* H) noexcept nogil:
    cdef int d = hi - lo
    cdef int i, j, l, it
    cdef double complex acc
    for i in range(d):
        for j in range(d):
            B[i * d + j] = P[(lo + i) * k + lo + j]
    for it in range(2):
        # G = 3I - B^H B
        for i in range(d):
            for j in range(d):
                acc = 0
                for l in range(d):
                    acc = acc + B[l * d + i].conjugate() * B[l * d + j]
                G[i * d + j] = -acc
            G[i * d + i] = G[i * d + i] + 3.0
        _matmul(B, G, H, d)
        for i in range(d * d):
            B[i] = 0.5 * H[i]
    for i in range(d):
        for j in range(d):
            P[(lo + i) * k + lo + j] = B[i * d + j]


def ordered_product(double complex[:, :, ::1] F, int renorm_every, int split):
    """Return ``F[N-1] @ ... @ F[0]`` with periodic blockwise polar refinement."""
    cdef Py_ssize_t N = F.shape[0]
    cdef int k = <int>F.shape[1]
    cdef int kk = k * k
    result = np.eye(k, dtype=np.complex128)
    cdef double complex[:, ::1] P = result
    cdef double complex* T = <double complex*>malloc(4 * kk * sizeof(double complex))
    if T == NULL:
        raise MemoryError()
    cdef double complex* B = T + kk
    cdef double complex* G = T + 2 * kk
    cdef double complex* H = T + 3 * kk
    cdef Py_ssize_t j
    try:
        with nogil:
            for j in range(N):
                _matmul(&F[j, 0, 0], &P[0, 0], T, k)
                memcpy(&P[0, 0], T, kk * sizeof(double complex))
                if renorm_every > 0 and (j + 1) % renorm_every == 0:
                    _polar_refine(&P[0, 0], k, 0, split, B, G, H)
                    _polar_refine(&P[0, 0], k, split, k, B, G, H)
    finally:
        free(T)
    return result
