import os
import subprocess
import sys

import numpy as np
import pytest

from dualgrass import _backend, _pykernels
from dualgrass.matrix import Signature
from dualgrass.sampling import complex_normal, random_algebra_element, rng_for

needs_ext = pytest.mark.skipif("cython" not in _backend.available_backends(),
                               reason="compiled extension not built")


def test_python_always_available():
    assert "python" in _backend.available_backends()
    assert _backend.BACKEND in _backend.available_backends()


def test_unknown_backend():
    with pytest.raises(ValueError):
        _backend.expm_batch(np.zeros((1, 2, 2), complex), backend="fortran")


@needs_ext
@pytest.mark.parametrize("k", [1, 2, 5, 12, 18])
def test_expm_backends_agree(k):
    rng = rng_for(1, k)
    A = complex_normal(rng, (6, k, k)) * np.array([0, 0.01, 0.5, 3, 12, 60])[:, None, None]
    a = _backend.expm_batch(A, backend="cython")
    b = _backend.expm_batch(A, backend="python")
    for x, y in zip(a, b):
        assert np.linalg.norm(x - y) <= 1e-13 * max(1.0, np.linalg.norm(y))


@needs_ext
def test_structured_zeros():
    # Block upper-triangular inputs exercise the zero-skipping paths.
    rng = rng_for(2)
    k = 4
    big = np.zeros((2, 3 * k, 3 * k), complex)
    for q in range(3):
        big[:, q * k:(q + 1) * k, q * k:(q + 1) * k] = complex_normal(rng, (k, k))
    big[:, :k, k:] = complex_normal(rng, (2, k, 2 * k))
    a = _backend.expm_batch(big, backend="cython")
    b = _backend.expm_batch(big, backend="python")
    assert np.linalg.norm(a - b) <= 1e-13 * np.linalg.norm(b)


@needs_ext
@pytest.mark.parametrize("renorm", [0, 1, 7])
def test_ordered_product_agree(renorm):
    rng = rng_for(3, renorm)
    sig = Signature(2, 3)
    from dualgrass.matrix import expm_batch

    hs = np.stack([random_algebra_element(rng, sig, 0.05) for _ in range(50)])
    hs[:, :2, 2:] = 0
    hs[:, 2:, :2] = 0
    F = expm_batch(hs)
    a = _backend.ordered_product(F, renorm, 2, backend="cython")
    b = _backend.ordered_product(F, renorm, 2, backend="python")
    assert np.linalg.norm(a - b) <= 1e-13
    ref = np.eye(5)
    for f in F:
        ref = f @ ref
    assert np.linalg.norm(b - ref) <= 1e-12


def test_python_polar_refine_restores_unitarity():
    rng = rng_for(4)
    Q, _ = np.linalg.qr(complex_normal(rng, (3, 3)))
    R = _pykernels._polar_refine(Q * (1 + 1e-6))
    assert np.linalg.norm(R.conj().T @ R - np.eye(3)) <= 1e-14


def test_env_selects_python():
    env = dict(os.environ, DUALGRASS_BACKEND="python")
    out = subprocess.run([sys.executable, "-c", "from dualgrass import _backend; print(_backend.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@needs_ext
def test_transport_backends_agree():
    from dualgrass.holonomy import IntegratorConfig, transport
    from dualgrass.sampling import random_cone
    from dualgrass.surface import CurveSpec, SurfaceChart

    chart = SurfaceChart.complex_surface(random_cone(rng_for(6), 3, 2, 2.0))
    curve = CurveSpec.ellipse(0.7, 0.4, (0.1, 0.0))
    cfg = IntegratorConfig(steps=512)
    a = transport(chart, curve, cfg, backend="cython")
    b = transport(chart, curve, cfg, backend="python")
    assert np.linalg.norm(a.V_full - b.V_full) <= 1e-12
    assert a.phase_integral == pytest.approx(b.phase_integral, abs=1e-12)
