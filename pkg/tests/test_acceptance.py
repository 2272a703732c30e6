"""Acceptance gate: nine criteria at their stated tolerances.

Each check returns ``(passed, summary)``; the pytest wrappers print one
PASS/FAIL line per criterion. Run directly with ``python tests/test_acceptance.py``.
"""
import functools
import math
import sys

import numpy as np
import pytest

from dualgrass.holonomy import IntegratorConfig, horizontal_holonomy, su11_chart, su11_expected, transport
from dualgrass.lie import (CLOSURE_TOL, Verdict, classify_plane, fiber_closed_form, hat, hat_matrix, k_matrix,
                           lemma_calculation_formula, su11_embed, triple_bracket)
from dualgrass.matrix import Signature, expm
from dualgrass.sampling import available_verdicts, classifier_instance, complex_normal, random_cone, rng_for
from dualgrass.surface import CurveSpec, QuadratureConfig, SurfaceChart

SEED = 20260214
LAW_SIGS = [(1, 1), (1, 2), (2, 2), (2, 3), (3, 3)]
LAW_LAMBDAS = (0.5, 1.0, 2.0)
LAW_RADII = (0.2, 0.5, 1.0)
FLAT_SIGS = [(1, 2), (1, 3), (2, 4), (1, 4), (2, 5)]
FLAT_RADII = (0.5, 1.0)
TRANSPORT = IntegratorConfig(steps=4096, order=4)
QUAD = QuadratureConfig(rtol=1e-8)
ORDER_STEPS = (256, 512, 1024, 2048)
ORDER_SQUARE = [(-0.8, -0.8), (0.9, -0.7), (0.8, 0.9), (-0.7, 0.8)]


def _line(num, title, passed, summary):
    return f"[{'PASS' if passed else 'FAIL'}] criterion {num} ({title}): {summary}"


@functools.lru_cache(maxsize=None)
def law_runs():
    runs = []
    for si, (n, m) in enumerate(LAW_SIGS):
        for li, lam in enumerate(LAW_LAMBDAS):
            X = random_cone(rng_for(SEED, 1, si, li), m, n, lam)
            chart = SurfaceChart.complex_surface(X)
            for r in LAW_RADII:
                runs.append(((n, m, lam, r), horizontal_holonomy(chart, CurveSpec.circle(r), TRANSPORT, QUAD)))
    return runs


@functools.lru_cache(maxsize=None)
def flat_runs():
    runs = []
    for i in range(10):
        n, m = FLAT_SIGS[i % len(FLAT_SIGS)]
        X, Y = classifier_instance(rng_for(SEED, 2, i), Signature(n, m), "FlatSurface")
        chart = SurfaceChart.from_pair(X, Y)
        assert chart.classification.verdict is Verdict.FLAT
        for r in FLAT_RADII:
            runs.append(((n, m, r), horizontal_holonomy(chart, CurveSpec.circle(r), TRANSPORT, QUAD)))
    return runs


@functools.lru_cache(maxsize=None)
def su11_run():
    curve = CurveSpec.circle(0.7)
    return curve, horizontal_holonomy(su11_chart(), curve, TRANSPORT, QUAD)


def check_area_law():
    worst = 0.0
    for _, rep in law_runs():
        worst = max(worst, abs(np.exp(1j * rep.theta) - np.exp(1j * 2 * rep.area / rep.V_n.shape[0])))
    return worst <= 1e-6, f"{len(law_runs())} runs, max |e^(i theta) - e^(i 2A/n)| = {worst:.2e} (tol 1e-6)"


def check_flat():
    worst = max(float(np.linalg.norm(rep.V_n - np.eye(rep.V_n.shape[0]))) for _, rep in flat_runs())
    return worst <= 1e-6, f"{len(flat_runs())} runs, max ||V_n - I|| = {worst:.2e} (tol 1e-6)"


def check_su11():
    curve, rep = su11_run()
    closed = 0.5 * math.pi * (math.cosh(2 * 0.7) - 1)
    d_theta = abs(rep.theta_unwrapped - 2 * rep.area)
    d_wrapped = abs(np.exp(1j * rep.theta) - np.exp(2j * rep.area))
    d_full = float(np.linalg.norm(rep.V_full - su11_expected(rep.area, curve.sign)))
    d_area = abs(rep.area - closed)
    ok = max(d_theta, d_wrapped, d_full, d_area) <= 1e-6
    return ok, (f"|theta - 2A| = {d_theta:.2e}, |e^(i theta) - e^(2iA)| = {d_wrapped:.2e}, "
                f"||V - exp(2A Phi)|| = {d_full:.2e}, |A - closed form| = {d_area:.2e} (tol 1e-6)")


def check_fiber():
    thetas = np.linspace(0.0, 4 * np.pi, 32)
    sizes = [(1, 1), (1, 2), (2, 2), (2, 3), (3, 3)]
    worst_exp = worst_comp = 0.0
    lams = []
    for i in range(20):
        rng = rng_for(SEED, 4, i)
        n, m = sizes[i % len(sizes)]
        lam = 1.0 if i % 4 == 0 else float(np.exp(rng.uniform(np.log(0.25), np.log(4.0))))
        lams.append(lam)
        X = random_cone(rng, m, n, lam)
        K = k_matrix(X).mat
        for th in thetas:
            worst_exp = max(worst_exp, float(np.linalg.norm(expm(-(th / lam) * K) - fiber_closed_form(X, th))))
        for th, ph in rng.uniform(0, 4 * np.pi, (8, 2)):
            worst_comp = max(worst_comp, float(np.linalg.norm(
                fiber_closed_form(X, th) @ fiber_closed_form(X, ph) - fiber_closed_form(X, th + ph))))
    ok = worst_exp <= 1e-10 and worst_comp <= 1e-10 and any(abs(l - 1) > 0.1 for l in lams)
    return ok, f"640 points, closed form {worst_exp:.2e}, composition {worst_comp:.2e} (tol 1e-10)"


def check_calculation():
    worst = 0.0
    for n, m in [(1, 2), (2, 2), (2, 3), (3, 4)]:
        sig = Signature(n, m)
        for t in range(100):
            rng = rng_for(SEED, 5, n, m, t)
            X, Y = complex_normal(rng, (2, m, n))
            Xh, Yh = hat(sig, X), hat(sig, Y)
            direct = triple_bracket(Xh, Yh, Xh).mat
            worst = max(worst, float(np.linalg.norm(hat_matrix(lemma_calculation_formula(X, Y)) - direct)))
    return worst <= 1e-11, f"400 pairs, max residual {worst:.2e} (tol 1e-11)"


def check_classifier():
    sigs = [Signature(n, m) for n, m in [(1, 1), (1, 2), (2, 2), (1, 3), (2, 3), (2, 4), (3, 4), (3, 6)]]
    counts = {v.value: 0 for v in Verdict}
    disagree = 0
    for t in range(200):
        rng = rng_for(SEED, 6, t)
        sig = sigs[t % len(sigs)]
        opts = available_verdicts(sig)
        want = opts[(t // len(sigs)) % len(opts)]
        X, Y = classifier_instance(rng, sig, want)
        c = classify_plane(X, Y)
        brute_tg = c.closure_residual <= CLOSURE_TOL
        disagree += (c.totally_geodesic != brute_tg) or c.verdict.value != want
        counts[c.verdict.value] += 1
    ok = disagree == 0 and all(counts.values())
    return ok, f"200 instances, {disagree} disagreements, verdict counts {counts}"


def check_conformal():
    worst = 0.0
    for n in (1, 2, 3):
        for t in range(100):
            rng = rng_for(SEED, 7, n, t)
            m = n + int(rng.integers(0, 3))
            X = random_cone(rng, m, n)
            v = rng.standard_normal(3)
            worst = max(worst, abs(su11_embed(X, *v).norm() - math.sqrt(n) * np.linalg.norm(v)))
    return worst <= 1e-12, f"300 vectors, max | ||f(v)|| - sqrt(n)||v|| | = {worst:.2e} (tol 1e-12)"


def order_slopes():
    """Fitted log-log slopes of ||V_N - V_4N|| against N on a square loop."""
    out = {}
    curve = CurveSpec.polygon(ORDER_SQUARE)
    charts = {"n1m1": su11_chart(),
              "n2m3": SurfaceChart.complex_surface(random_cone(rng_for(SEED, 8), 3, 2, 2.0))}
    for name, chart in charts.items():
        for order in (2, 4):
            errs = []
            for N in ORDER_STEPS:
                V = transport(chart, curve, IntegratorConfig(N, order)).V_full
                R = transport(chart, curve, IntegratorConfig(4 * N, order)).V_full
                errs.append(float(np.linalg.norm(V - R)))
            slope = -np.polyfit(np.log(ORDER_STEPS), np.log(errs), 1)[0]
            out[(name, order)] = (slope, errs)
    return out


def check_order():
    slopes = order_slopes()
    ok = all(abs(s - order) <= 0.3 for (_, order), (s, _) in slopes.items())
    text = ", ".join(f"{name} p={order}: {s:.3f}" for (name, order), (s, _) in slopes.items())
    return ok, f"slopes {text} (tol 0.3)"


def check_structure():
    reps = [r for _, r in law_runs()] + [r for _, r in flat_runs()] + [su11_run()[1]]
    off = max(r.offdiag_residual for r in reps)
    scal = max(r.scalar_residual for r in reps)
    return max(off, scal) <= 1e-6, f"{len(reps)} runs, max offdiag {off:.2e}, max scalar {scal:.2e} (tol 1e-6)"


pytestmark = pytest.mark.slow

CRITERIA = [
    (1, "holonomy-area law", check_area_law),
    (2, "flat-case triviality", check_flat),
    (3, "n = 1 and SU(1,1) consistency", check_su11),
    (4, "fiber closed form", check_fiber),
    (5, "triple-bracket formula", check_calculation),
    (6, "classifier soundness", check_classifier),
    (7, "conformality", check_conformal),
    (8, "integrator order", check_order),
    (9, "structural residuals", check_structure),
]


@pytest.mark.parametrize("num,title,check", CRITERIA, ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_criterion(num, title, check, capsys):
    passed, summary = check()
    with capsys.disabled():
        print("\n" + _line(num, title, passed, summary))
    assert passed, summary


if __name__ == "__main__":
    results = [(num, title, *check()) for num, title, check in CRITERIA]
    for num, title, passed, summary in results:
        print(_line(num, title, passed, summary))
    sys.exit(0 if all(r[2] for r in results) else 1)
