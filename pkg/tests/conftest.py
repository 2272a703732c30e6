import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from dualgrass.matrix import Signature
from dualgrass.sampling import rng_for

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

SIGS = [Signature(1, 1), Signature(1, 2), Signature(2, 2), Signature(2, 3), Signature(3, 3)]


@pytest.fixture
def rng(request):
    # One stream per test keeps tests independent of collection order.
    key = sum(map(ord, request.node.nodeid)) % (2 ** 32)
    return rng_for(20260101, key)


@pytest.fixture(params=SIGS, ids=lambda s: f"n{s.n}m{s.m}")
def sig(request):
    return request.param


def assert_close(a, b, tol, what=""):
    err = float(np.linalg.norm(np.asarray(a) - np.asarray(b)))
    assert err <= tol, f"{what} residual {err:.3e} > {tol:.1e}"
