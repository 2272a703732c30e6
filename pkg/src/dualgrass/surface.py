"""Totally geodesic surfaces through the origin of D_{n,m} and their areas.

A surface is charted by (a, b) -> exp(a X^ + b Y^), a coset representative
in U(n,m). The metric is the one making U(n,m) -> D_{n,m} a Riemannian
submersion: a tangent vector g xi has length |proj_m(xi)|.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (ConfigError, NonSimpleCurve, NotTotallyGeodesicChart, PreconditionError,
                     QuadratureNotConverged)
from .lie import PlaneClassification, Verdict, classify_plane, hat_matrix
from .matrix import Signature, as_matrix, expm, expm_with_derivatives, group_inverse

_CHUNK_ENTRIES = 1 << 21


@dataclass(frozen=True, eq=False)
class SurfaceChart:
    sig: Signature
    X: np.ndarray
    Y: np.ndarray
    classification: PlaneClassification
    Xh: np.ndarray = field(init=False, repr=False)
    Yh: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not self.classification.totally_geodesic:
            raise NotTotallyGeodesicChart(
                f"plane is not totally geodesic ({self.classification.witnesses})")
        object.__setattr__(self, "Xh", hat_matrix(self.X))
        object.__setattr__(self, "Yh", hat_matrix(self.Y))

    @classmethod
    def from_pair(cls, X, Y) -> SurfaceChart:
        """Classify span_R{X^, Y^} and build its chart; rejects non-geodesic planes."""
        X = as_matrix(X, name="X")
        Y = as_matrix(Y, X.shape, "Y")
        sig = Signature(n=X.shape[1], m=X.shape[0])
        return cls(sig, X, Y, classify_plane(X, Y))

    @classmethod
    def complex_surface(cls, X) -> SurfaceChart:
        """Chart of the complex surface generated by (X, iX)."""
        X = as_matrix(X, name="X")
        return cls.from_pair(X, 1j * X)

    @property
    def is_complex(self) -> bool:
        return self.classification.verdict is Verdict.COMPLEX

    @property
    def lam(self) -> float:
        return self.classification.lam

    def generator(self, a, b) -> np.ndarray:
        """a X^ + b Y^, broadcast over arrays of chart coordinates."""
        a = np.asarray(a, dtype=float)[..., None, None]
        b = np.asarray(b, dtype=float)[..., None, None]
        return a * self.Xh + b * self.Yh


@dataclass(frozen=True)
class MetricSample:
    E: float
    F: float
    G: float

    @property
    def det(self) -> float:
        return self.E * self.G - self.F * self.F


KINDS = ("circle", "ellipse", "polygon")


@dataclass(frozen=True)
class CurveSpec:
    """A closed chart curve, parametrized by t in [0, 1].

    Circles and ellipses start at ``center + (r_a, 0)``. Polygons are
    traversed with equal parameter time per edge; their vertex order is
    flipped if needed to match ``orientation``. ``samples`` is the
    resolution of :meth:`sample`, used for diagnostics and output only.
    """

    kind: str
    center: tuple[float, float] = (0.0, 0.0)
    radii: tuple[float, float] = (0.0, 0.0)
    vertices: tuple[tuple[float, float], ...] = ()
    orientation: str = "ccw"
    samples: int = 512

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"curve kind must be one of {KINDS}, got {self.kind!r}")
        if self.orientation not in ("ccw", "cw"):
            raise ConfigError(f"orientation must be 'ccw' or 'cw', got {self.orientation!r}")
        if int(self.samples) < 1:
            raise ConfigError("samples must be positive")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        object.__setattr__(self, "radii", tuple(float(r) for r in self.radii))
        object.__setattr__(self, "vertices", tuple((float(p[0]), float(p[1])) for p in self.vertices))
        if self.kind != "polygon" and min(self.radii) < 0:
            raise ConfigError("radii must be nonnegative")
        if self.kind == "polygon":
            _validate_polygon(np.array(self.vertices))

    @classmethod
    def circle(cls, radius, center=(0.0, 0.0), orientation="ccw", samples=512):
        return cls("circle", center, (radius, radius), orientation=orientation, samples=samples)

    @classmethod
    def ellipse(cls, ra, rb, center=(0.0, 0.0), orientation="ccw", samples=512):
        return cls("ellipse", center, (ra, rb), orientation=orientation, samples=samples)

    @classmethod
    def polygon(cls, vertices, orientation="ccw", samples=512):
        return cls("polygon", vertices=tuple(map(tuple, vertices)), orientation=orientation,
                   samples=samples)

    @property
    def sign(self) -> int:
        return 1 if self.orientation == "ccw" else -1

    @property
    def radius(self) -> float | None:
        if self.kind == "polygon":
            return None
        return max(self.radii)

    @property
    def is_degenerate(self) -> bool:
        return self.kind != "polygon" and min(self.radii) == 0.0

    @property
    def segments(self) -> int:
        """Number of smooth pieces; integrator steps are aligned to them."""
        return len(self.vertices) if self.kind == "polygon" else 1

    def reversed(self) -> CurveSpec:
        flip = "cw" if self.orientation == "ccw" else "ccw"
        return CurveSpec(self.kind, self.center, self.radii, self.vertices, flip, self.samples)

    def _ordered_vertices(self) -> np.ndarray:
        V = np.array(self.vertices)
        if np.sign(_signed_area(V)) != self.sign:
            V = np.concatenate([V[:1], V[:0:-1]])
        return V

    def position(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.kind == "polygon":
            V = self._ordered_vertices()
            k = len(V)
            s = np.clip(t, 0.0, 1.0) * k
            i = np.minimum(np.floor(s).astype(int), k - 1)
            frac = (s - i)[..., None]
            return V[i] + frac * (V[(i + 1) % k] - V[i])
        phi = 2 * np.pi * t * self.sign
        ra, rb = self.radii
        return np.stack([self.center[0] + ra * np.cos(phi), self.center[1] + rb * np.sin(phi)], axis=-1)

    def velocity(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.kind == "polygon":
            V = self._ordered_vertices()
            k = len(V)
            i = np.minimum(np.floor(np.clip(t, 0.0, 1.0) * k).astype(int), k - 1)
            return k * (V[(i + 1) % k] - V[i])
        w = 2 * np.pi * self.sign
        phi = w * t
        ra, rb = self.radii
        return np.stack([-w * ra * np.sin(phi), w * rb * np.cos(phi)], axis=-1)

    def sample(self) -> np.ndarray:
        """``samples + 1`` points including the repeated endpoint."""
        return self.position(np.linspace(0.0, 1.0, self.samples + 1))

    def to_json(self) -> dict:
        out = {"kind": self.kind, "orientation": self.orientation, "samples": self.samples}
        if self.kind == "circle":
            out.update(center=list(self.center), radius=self.radii[0])
        elif self.kind == "ellipse":
            out.update(center=list(self.center), radii=list(self.radii))
        else:
            out["vertices"] = [list(v) for v in self.vertices]
        return out

    @classmethod
    def from_json(cls, obj: dict) -> CurveSpec:
        if not isinstance(obj, dict):
            raise ConfigError(f"curve must be an object, got {type(obj).__name__}")
        kind = obj.get("kind")
        common = dict(orientation=obj.get("orientation", "ccw"), samples=int(obj.get("samples", 512)))
        try:
            if kind == "circle":
                r = float(obj["radius"])
                return cls("circle", tuple(obj.get("center", (0, 0))), (r, r), **common)
            if kind == "ellipse":
                return cls("ellipse", tuple(obj.get("center", (0, 0))), tuple(obj["radii"]), **common)
            if kind == "polygon":
                return cls("polygon", vertices=tuple(map(tuple, obj["vertices"])), **common)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, (ConfigError, PreconditionError)):
                raise
            raise ConfigError(f"malformed {kind} curve: {exc}") from None
        raise ConfigError(f"curve kind must be one of {KINDS}, got {kind!r}")


def _signed_area(V) -> float:
    x, y = V[:, 0], V[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def polygon_centroid(V) -> np.ndarray:
    V = np.asarray(V, dtype=float)
    x, y = V[:, 0], V[:, 1]
    cross = x * np.roll(y, -1) - np.roll(x, -1) * y
    A = 0.5 * cross.sum()
    cx = ((x + np.roll(x, -1)) * cross).sum() / (6 * A)
    cy = ((y + np.roll(y, -1)) * cross).sum() / (6 * A)
    return np.array([cx, cy])


def _segments_cross(p1, p2, q1, q2) -> bool:
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1, d2 = orient(q1, q2, p1), orient(q1, q2, p2)
    d3, d4 = orient(p1, p2, q1), orient(p1, p2, q2)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 * d2 != 0 and d3 * d4 != 0:
        return True

    def on_seg(a, b, c):
        return (min(a[0], b[0]) <= c[0] <= max(a[0], b[0])
                and min(a[1], b[1]) <= c[1] <= max(a[1], b[1]))

    return ((d1 == 0 and on_seg(q1, q2, p1)) or (d2 == 0 and on_seg(q1, q2, p2))
            or (d3 == 0 and on_seg(p1, p2, q1)) or (d4 == 0 and on_seg(p1, p2, q2)))


def _validate_polygon(V):
    if V.ndim != 2 or V.shape[1] != 2 or len(V) < 3:
        raise ConfigError("polygon needs at least 3 vertices in the plane")
    if len(V) > 64:
        raise ConfigError("polygon is limited to 64 vertices")
    scale = max(float(np.ptp(V, axis=0).max()), 1e-300)
    if abs(_signed_area(V)) <= 1e-12 * scale * scale:
        raise NonSimpleCurve("polygon vertices are collinear")
    k = len(V)
    for i in range(k):
        for j in range(i + 1, k):
            if j == i + 1 or (i == 0 and j == k - 1):
                continue
            if _segments_cross(V[i], V[(i + 1) % k], V[j], V[(j + 1) % k]):
                raise NonSimpleCurve(f"polygon edges {i} and {j} intersect")
    c = polygon_centroid(V)
    E = np.roll(V, -1, axis=0) - V
    cross = (V[:, 0] - c[0]) * E[:, 1] - (V[:, 1] - c[1]) * E[:, 0]
    if not (np.all(cross > 0) or np.all(cross < 0)):
        raise NonSimpleCurve("polygon is not star-shaped about its centroid")


@dataclass(frozen=True)
class QuadratureConfig:
    """Tensor quadrature sizes at the coarsest level; each refinement doubles both."""

    radial: int = 16
    angular: int = 32
    max_refinements: int = 6
    rtol: float = 1e-8

    def __post_init__(self):
        if self.radial < 1 or self.angular < 3 or self.max_refinements < 1 or self.rtol <= 0:
            raise ConfigError(f"invalid quadrature config {self}")

    def to_json(self) -> dict:
        return {"radial": self.radial, "angular": self.angular,
                "max_refinements": self.max_refinements, "rtol": self.rtol}

    @classmethod
    def from_json(cls, obj: dict) -> QuadratureConfig:
        try:
            return cls(**{k: obj[k] for k in ("radial", "angular", "max_refinements", "rtol") if k in obj})
        except TypeError as exc:
            raise ConfigError(f"malformed quadrature config: {exc}") from None


def chart_point(chart: SurfaceChart, a: float, b: float) -> np.ndarray:
    """exp(a X^ + b Y^)."""
    return expm(chart.generator(a, b))


def _m_part(xi, n):
    out = np.zeros_like(xi)
    out[..., :n, n:] = xi[..., :n, n:]
    out[..., n:, :n] = xi[..., n:, :n]
    return out


def metric_batch(chart: SurfaceChart, a, b):
    """First fundamental form (E, F, G) at arrays of chart points."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    n, k = chart.sig.n, chart.sig.size
    chunk = max(64, _CHUNK_ENTRIES // (9 * k * k))
    E = np.empty(a.shape)
    F = np.empty(a.shape)
    G = np.empty(a.shape)
    fa, fb, fE, fF, fG = a.ravel(), b.ravel(), E.reshape(-1), F.reshape(-1), G.reshape(-1)
    for lo in range(0, fa.size, chunk):
        sl = slice(lo, lo + chunk)
        A = chart.generator(fa[sl], fb[sl])
        cnt = A.shape[0]
        g, (dga, dgb) = expm_with_derivatives(
            A, [np.broadcast_to(chart.Xh, (cnt, k, k)), np.broadcast_to(chart.Yh, (cnt, k, k))])
        ginv = group_inverse(chart.sig, g)
        xa = _m_part(ginv @ dga, n)
        xb = _m_part(ginv @ dgb, n)
        fE[sl] = 0.5 * np.einsum("pij,pij->p", xa.conj(), xa).real
        fF[sl] = 0.5 * np.einsum("pij,pij->p", xa.conj(), xb).real
        fG[sl] = 0.5 * np.einsum("pij,pij->p", xb.conj(), xb).real
    return E, F, G


def induced_metric(chart: SurfaceChart, a: float, b: float) -> MetricSample:
    E, F, G = metric_batch(chart, [a], [b])
    return MetricSample(float(E[0]), float(F[0]), float(G[0]))


def area_density(chart: SurfaceChart, a, b) -> np.ndarray:
    """sqrt(EG - F^2) at chart points."""
    E, F, G = metric_batch(chart, a, b)
    return np.sqrt(np.maximum(E * G - F * F, 0.0))


def _ellipse_boundary(phi, ra, rb):
    return 1.0 / np.sqrt((np.cos(phi) / ra) ** 2 + (np.sin(phi) / rb) ** 2)


def area_at_resolution(chart: SurfaceChart, curve: CurveSpec, radial: int, angular: int) -> float:
    """One quadrature evaluation of the enclosed area at fixed node counts.

    Smooth curves: Gauss-Legendre in the radius, periodic trapezoid in the
    angle about the center. Polygons: the region is fanned into triangles
    from the centroid and each triangle gets a Gauss-Legendre tensor rule,
    with ``angular`` nodes spread over the edges.
    """
    if curve.is_degenerate:
        return 0.0
    s, ws = np.polynomial.legendre.leggauss(radial)
    s = 0.5 * (s + 1.0)
    ws = 0.5 * ws
    if curve.kind == "polygon":
        V = np.array(curve.vertices)
        c = polygon_centroid(V)
        per_edge = max(2, math.ceil(angular / len(V)))
        u, wu = np.polynomial.legendre.leggauss(per_edge)
        u = 0.5 * (u + 1.0)
        wu = 0.5 * wu
        total = 0.0
        for i in range(len(V)):
            p, e = V[i] - c, V[(i + 1) % len(V)] - V[i]
            jac = abs(p[0] * e[1] - p[1] * e[0])
            S, U = np.meshgrid(s, u, indexing="ij")
            pts = c + S[..., None] * (p + U[..., None] * e)
            dens = area_density(chart, pts[..., 0], pts[..., 1])
            total += jac * np.einsum("i,j,ij->", ws * s, wu, dens)
        return float(total)
    ra, rb = curve.radii
    phi = 2 * np.pi * np.arange(angular) / angular
    R = _ellipse_boundary(phi, ra, rb)
    rho = s[:, None] * R[None, :]
    a = curve.center[0] + rho * np.cos(phi)[None, :]
    b = curve.center[1] + rho * np.sin(phi)[None, :]
    dens = area_density(chart, a, b)
    return float((2 * np.pi / angular) * np.einsum("i,j,ij->", ws * s, R * R, dens))


def area_of_region(chart: SurfaceChart, curve: CurveSpec, quad: QuadratureConfig | None = None) -> float:
    """Area enclosed by ``curve`` in the submersion metric, refined to ``quad.rtol``.

    Always nonnegative; orientation is ignored.

    Raises
    ------
    QuadratureNotConverged
        If successive refinements still differ after ``quad.max_refinements``.
    """
    quad = quad or QuadratureConfig()
    if curve.is_degenerate:
        return 0.0
    prev = area_at_resolution(chart, curve, quad.radial, quad.angular)
    for level in range(1, quad.max_refinements + 1):
        cur = area_at_resolution(chart, curve, quad.radial << level, quad.angular << level)
        if abs(cur - prev) <= quad.rtol * abs(cur):
            return cur
        prev = cur
    raise QuadratureNotConverged(
        f"area did not settle to rtol={quad.rtol} after {quad.max_refinements} refinements")
