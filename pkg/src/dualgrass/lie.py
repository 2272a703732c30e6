"""The Lie algebra u(n,m), its Cartan splitting h + m, and plane classification.

An element of m is written X^ = [[0, X*], [X, 0]] for an m x n matrix X.
U_{m,n}(C) denotes the cone of m x n matrices with X*X = lambda I_n, lambda > 0.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DimensionError, NotInCone, PlaneDegenerate, StarViolated
from .matrix import Signature, as_matrix, commutator, expm, inner_product, lambda_matrix

SCALAR_TOL = 1e-10
SPAN_TOL = 1e-10
CLOSURE_TOL = 1e-8
ALGEBRA_TOL = 1e-12

# Orthonormal basis of su(1,1) for <A, B> = Re Tr(A* B) / 2.
E1 = np.array([[0, 1], [1, 0]], dtype=np.complex128)
E2 = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
E3 = np.array([[-1j, 0], [0, 1j]], dtype=np.complex128)
SU11_BASIS = (E1, E2, E3)


def algebra_residual(sig: Signature, A) -> float:
    """Frobenius norm of A* Lambda + Lambda A; zero iff A is in u(n,m)."""
    L = lambda_matrix(sig)
    A = np.asarray(A)
    return float(np.linalg.norm(A.conj().T @ L + L @ A))


@dataclass(frozen=True)
class AlgebraElement:
    """A matrix certified to lie in u(n,m)."""

    sig: Signature
    mat: np.ndarray = field(repr=False)

    def __post_init__(self):
        k = self.sig.size
        M = as_matrix(self.mat, (k, k), "algebra element")
        M.setflags(write=False)
        object.__setattr__(self, "mat", M)
        res = algebra_residual(self.sig, M)
        if res > ALGEBRA_TOL * max(1.0, float(np.linalg.norm(M))):
            raise ValueError(f"matrix is not in u({self.sig.n},{self.sig.m}): residual {res:.3e}")

    def _wrap(self, M):
        return AlgebraElement(self.sig, M)

    def _check(self, other):
        if not isinstance(other, AlgebraElement) or other.sig != self.sig:
            raise DimensionError("algebra elements must share a signature")
        return other.mat

    def __add__(self, other):
        return self._wrap(self.mat + self._check(other))

    def __sub__(self, other):
        return self._wrap(self.mat - self._check(other))

    def __neg__(self):
        return self._wrap(-self.mat)

    def __mul__(self, c):
        if isinstance(c, complex) or np.iscomplexobj(c):
            raise TypeError("u(n,m) is a real vector space")
        return self._wrap(float(c) * self.mat)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1.0 / float(c))

    def bracket(self, other) -> AlgebraElement:
        return self._wrap(commutator(self.mat, self._check(other)))

    def norm(self) -> float:
        return inner_product(self.mat, self.mat) ** 0.5

    def exp(self) -> np.ndarray:
        return expm(self.mat)


def _sig_for(X) -> Signature:
    X = as_matrix(X, name="X")
    return Signature(n=X.shape[1], m=X.shape[0])


def hat_matrix(X) -> np.ndarray:
    """[[0, X*], [X, 0]] as a bare array (no membership check)."""
    X = as_matrix(X, name="X")
    m, n = X.shape
    H = np.zeros((n + m, n + m), dtype=np.complex128)
    H[:n, n:] = X.conj().T
    H[n:, :n] = X
    return H


def hat(sig: Signature, X) -> AlgebraElement:
    """Embed an m x n matrix X into m as [[0, X*], [X, 0]]."""
    X = as_matrix(X, (sig.m, sig.n), "X")
    return AlgebraElement(sig, hat_matrix(X))


def unhat(A: AlgebraElement) -> np.ndarray:
    """Lower-left m x n block; inverse of ``hat`` on m."""
    return np.array(A.mat[A.sig.n:, :A.sig.n])


def decompose(A: AlgebraElement) -> tuple[AlgebraElement, AlgebraElement]:
    """Split A into its h = u(n) + u(m) part and its m part."""
    n = A.sig.n
    h = np.zeros_like(A.mat)
    h[:n, :n] = A.mat[:n, :n]
    h[n:, n:] = A.mat[n:, n:]
    return AlgebraElement(A.sig, h), AlgebraElement(A.sig, A.mat - h)


class ConeCheck(NamedTuple):
    is_member: bool
    lam: float
    residual: float


def unitary_cone_check(X) -> ConeCheck:
    """Test X*X = lambda I_n with lambda > 0.

    lambda is estimated as the mean diagonal entry of X*X; the residual is
    the Frobenius distance of X*X from lambda I_n.
    """
    X = as_matrix(X, name="X")
    n = X.shape[1]
    G = X.conj().T @ X
    lam = float(np.real(np.trace(G))) / n
    residual = float(np.linalg.norm(G - lam * np.eye(n)))
    return ConeCheck(residual <= SCALAR_TOL and lam > 1e-12, lam, residual)


class MuCheck(NamedTuple):
    is_scalar: bool
    mu: complex
    residual: float


def mu_extract(X, Y) -> MuCheck:
    """Test X*Y = mu I_n and return the mean-diagonal estimate of mu."""
    X = as_matrix(X, name="X")
    Y = as_matrix(Y, X.shape, "Y")
    n = X.shape[1]
    G = X.conj().T @ Y
    mu = complex(np.trace(G)) / n
    residual = float(np.linalg.norm(G - mu * np.eye(n)))
    return MuCheck(residual <= SCALAR_TOL, mu, residual)


def triple_bracket(A: AlgebraElement, B: AlgebraElement, C: AlgebraElement) -> AlgebraElement:
    """[[A, B], C]."""
    return A.bracket(B).bracket(C)


def lemma_calculation_formula(X, Y) -> np.ndarray:
    """Entrywise formula for the Z with Z^ = [[X^, Y^], X^].

    ``Z[r, k] = sum_j X[r, j] (2 h(Y_j, X_k) - h(X_j, Y_k)) - sum_j Y[r, j] h(X_j, X_k)``
    where ``h(u, v) = u* v`` pairs columns.
    """
    X = as_matrix(X, name="X")
    Y = as_matrix(Y, X.shape, "Y")
    # h_ab[j, k] = h(A_j, B_k) over column pairs
    h_yx = np.einsum("rj,rk->jk", Y.conj(), X)
    h_xy = np.einsum("rj,rk->jk", X.conj(), Y)
    h_xx = np.einsum("rj,rk->jk", X.conj(), X)
    return np.einsum("rj,jk->rk", X, 2 * h_yx - h_xy) - np.einsum("rj,jk->rk", Y, h_xx)


def _realify(M) -> np.ndarray:
    M = np.asarray(M)
    return np.concatenate([M.real.ravel(), M.imag.ravel()])


def span_residual(target, basis) -> float:
    """Distance from ``target`` to the real span of ``basis``, by real least squares."""
    B = np.column_stack([_realify(b) for b in basis])
    t = _realify(target)
    coef, *_ = np.linalg.lstsq(B, t, rcond=None)
    return float(np.linalg.norm(B @ coef - t))


def _orthonormal_plane(Xh, Yh):
    """Orthonormal basis (for <., .>) of span_R{Xh, Yh}, or None if degenerate."""
    nx = inner_product(Xh, Xh) ** 0.5
    if nx == 0:
        return None
    u = Xh / nx
    w = Yh - inner_product(u, Yh) * u
    nw = inner_product(w, w) ** 0.5
    ny = inner_product(Yh, Yh) ** 0.5
    if ny == 0 or nw <= SPAN_TOL * ny:
        return None
    return u, w / nw


def closure_test(X, Y) -> float:
    """Brute-force residual of [[m', m'], m'] in m' for m' = span_R{X^, Y^}.

    The plane is orthonormalized first, so the residual is scale free:
    the larger of the distances of [[u, v], u] and [[v, u], v] from the
    plane. Raises ``PlaneDegenerate`` if the plane is not 2-dimensional.
    """
    X = as_matrix(X, name="X")
    Y = as_matrix(Y, X.shape, "Y")
    plane = _orthonormal_plane(hat_matrix(X), hat_matrix(Y))
    if plane is None:
        raise PlaneDegenerate("span_R{X^, Y^} is not 2-dimensional")
    u, v = plane
    t1 = commutator(commutator(u, v), u)
    t2 = commutator(commutator(v, u), v)
    return max(span_residual(t1, plane), span_residual(t2, plane))


class Verdict(str, enum.Enum):
    NOT_TOTALLY_GEODESIC = "NotTotallyGeodesic"
    FLAT = "FlatSurface"
    COMPLEX = "ComplexSurface"


@dataclass(frozen=True)
class PlaneClassification:
    verdict: Verdict
    mu: complex | None
    lam: float | None
    closure_residual: float
    witnesses: str = ""

    @property
    def totally_geodesic(self) -> bool:
        return self.verdict is not Verdict.NOT_TOTALLY_GEODESIC

    @property
    def agrees_with_closure(self) -> bool:
        return self.totally_geodesic == (self.closure_residual <= CLOSURE_TOL)

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "mu": None if self.mu is None else [self.mu.real, self.mu.imag],
            "lambda": self.lam,
            "closure_residual": self.closure_residual,
        }


def classify_plane(X, Y) -> PlaneClassification:
    """Decide whether span_R{X^, Y^} generates a complete totally geodesic surface.

    Requires X in U_{m,n}(C) and X*Y = mu I_n. Then the plane closes under
    the triple bracket iff either Im mu != 0 and iX lies in span_R{X, Y}
    (a complex surface), or Im mu = 0 and Y is in U_{m,n}(C) (a totally real
    surface, over which the induced U(n)-bundle is flat).
    The brute-force closure residual is reported alongside the verdict.

    Raises
    ------
    NotInCone, PlaneDegenerate, StarViolated
    """
    X = as_matrix(X, name="X")
    Y = as_matrix(Y, X.shape, "Y")
    cone = unitary_cone_check(X)
    if not cone.is_member:
        raise NotInCone(f"X*X is not a positive scalar matrix (residual {cone.residual:.3e})")
    if _orthonormal_plane(hat_matrix(X), hat_matrix(Y)) is None:
        raise PlaneDegenerate("Y is a real multiple of X")
    star = mu_extract(X, Y)
    if not star.is_scalar:
        raise StarViolated(f"X*Y is not a scalar matrix (residual {star.residual:.3e})")
    closure = closure_test(X, Y)

    mu = star.mu
    y_scale = float(np.linalg.norm(Y)) / X.shape[1] ** 0.5
    if abs(mu.imag) > SCALAR_TOL * max(1.0, cone.lam ** 0.5 * y_scale):
        res = span_residual(1j * X, (X, Y)) / float(np.linalg.norm(X))
        verdict = Verdict.COMPLEX if res <= SPAN_TOL else Verdict.NOT_TOTALLY_GEODESIC
        why = f"Im mu = {mu.imag:.6g}; iX span residual {res:.3e}"
    else:
        ycone = unitary_cone_check(Y)
        verdict = Verdict.FLAT if ycone.is_member else Verdict.NOT_TOTALLY_GEODESIC
        why = f"Im mu = 0; Y cone residual {ycone.residual:.3e}"
    return PlaneClassification(verdict, mu, cone.lam, closure, why)


def _cone_lambda(X) -> float:
    cone = unitary_cone_check(X)
    if not cone.is_member:
        raise NotInCone(f"X*X is not a positive scalar matrix (residual {cone.residual:.3e})")
    return cone.lam


def k_matrix(X) -> AlgebraElement:
    """K = diag(-i lambda I_n, i X X*); satisfies [X^, (iX)^] = -2K."""
    X = as_matrix(X, name="X")
    lam = _cone_lambda(X)
    m, n = X.shape
    K = np.zeros((n + m, n + m), dtype=np.complex128)
    K[:n, :n] = -1j * lam * np.eye(n)
    K[n:, n:] = 1j * (X @ X.conj().T)
    return AlgebraElement(_sig_for(X), K)


def su11_embed(X, a: float, b: float, c: float) -> AlgebraElement:
    """Image of a E1 + b E2 + c E3 under the monomorphism su(1,1) -> u(n,m).

    E1, E2, E3 go to X^/sqrt(lambda), (iX)^/sqrt(lambda) and K/lambda. The map
    preserves brackets and scales lengths by sqrt(n).
    """
    X = as_matrix(X, name="X")
    lam = _cone_lambda(X)
    sig = _sig_for(X)
    M = (a / lam ** 0.5) * hat_matrix(X) + (b / lam ** 0.5) * hat_matrix(1j * X) \
        + (c / lam) * k_matrix(X).mat
    return AlgebraElement(sig, M)


def su11_coordinates(A) -> tuple[float, float, float]:
    """Coordinates of a 2 x 2 su(1,1) matrix in the basis E1, E2, E3."""
    A = as_matrix(A, (2, 2))
    return tuple(inner_product(E, A) for E in SU11_BASIS)


def fiber_closed_form(X, theta: float) -> np.ndarray:
    """diag(e^{i theta} I_n, I_m + (e^{-i theta} - 1)/lambda X X*).

    Equal to exp(-(theta/lambda) K), the image of exp(-theta E3).
    """
    X = as_matrix(X, name="X")
    lam = _cone_lambda(X)
    m, n = X.shape
    out = np.zeros((n + m, n + m), dtype=np.complex128)
    out[:n, :n] = np.exp(1j * theta) * np.eye(n)
    out[n:, n:] = np.eye(m) + (np.exp(-1j * theta) - 1.0) / lam * (X @ X.conj().T)
    return out
