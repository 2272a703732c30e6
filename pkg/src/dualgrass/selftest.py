"""Randomized invariant suites run by ``dualgrass selftest``.

Each suite draws ``trials`` independent instances from its own Philox
stream, so the summary depends only on ``(seed, trials)``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .lie import (AlgebraElement, Verdict, classify_plane, decompose, fiber_closed_form, hat,
                  hat_matrix, k_matrix, lemma_calculation_formula, su11_embed, triple_bracket)
from .matrix import (Signature, commutator, expm, expm_frechet, group_inverse, inner_product,
                     pseudo_unitarity_residual)
from .sampling import (available_verdicts, classifier_instance, complex_normal, random_algebra_element,
                       random_cone, rng_for)

log = logging.getLogger(__name__)

SIGNATURES = tuple(Signature(n, m) for n, m in [(1, 1), (1, 2), (2, 2), (2, 3), (1, 3), (2, 4), (3, 4)])


@dataclass(frozen=True)
class SuiteResult:
    name: str
    trials: int
    failures: int
    worst: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def to_json(self) -> dict:
        return {"suite": self.name, "trials": self.trials, "failures": self.failures,
                "worst": self.worst, "tolerance": self.tolerance, "passed": self.passed}


def _sig(rng) -> Signature:
    return SIGNATURES[int(rng.integers(len(SIGNATURES)))]


def _expm_inverse(rng):
    sig = _sig(rng)
    A = random_algebra_element(rng, sig, norm=rng.uniform(0.1, 3.0))
    E, Einv = expm(A), expm(-A)
    scale = np.linalg.norm(E) * np.linalg.norm(Einv)
    return np.linalg.norm(E @ Einv - np.eye(sig.size)) / scale


def _group_membership(rng):
    sig = _sig(rng)
    g = expm(random_algebra_element(rng, sig, norm=rng.uniform(0.1, 3.0)))
    return max(pseudo_unitarity_residual(sig, g),
               np.linalg.norm(group_inverse(sig, g) @ g - np.eye(sig.size))) / np.linalg.norm(g) ** 2


def _frechet(rng):
    k = int(rng.integers(2, 7))
    A = complex_normal(rng, (k, k))
    E = complex_normal(rng, (k, k))
    h = 1e-5
    fd = (expm(A + h * E) - expm(A - h * E)) / (2 * h)
    L = expm_frechet(A, E)
    return np.linalg.norm(L - fd) / np.linalg.norm(L)


def _decompose(rng):
    sig = _sig(rng)
    A = AlgebraElement(sig, random_algebra_element(rng, sig))
    h, m = decompose(A)
    n = sig.n
    return max(abs(inner_product(h.mat, m.mat)),
               np.linalg.norm(h.mat + m.mat - A.mat),
               np.linalg.norm(h.mat[:n, n:]) + np.linalg.norm(m.mat[:n, :n]) + np.linalg.norm(m.mat[n:, n:]))


def _calculation(rng):
    sig = _sig(rng)
    X = complex_normal(rng, (sig.m, sig.n))
    Y = complex_normal(rng, (sig.m, sig.n))
    Xh, Yh = hat(sig, X), hat(sig, Y)
    direct = triple_bracket(Xh, Yh, Xh).mat
    return np.linalg.norm(hat_matrix(lemma_calculation_formula(X, Y)) - direct)


def _fiber(rng):
    sig = _sig(rng)
    X = random_cone(rng, sig.m, sig.n)
    lam = float(np.real(X[:, 0].conj() @ X[:, 0]))
    th, ph = rng.uniform(0.0, 4 * np.pi, size=2)
    K = k_matrix(X).mat
    return max(np.linalg.norm(expm(-(th / lam) * K) - fiber_closed_form(X, th)),
               np.linalg.norm(fiber_closed_form(X, th) @ fiber_closed_form(X, ph)
                              - fiber_closed_form(X, th + ph)))


def _conformal(rng):
    sig = _sig(rng)
    X = random_cone(rng, sig.m, sig.n)
    v = rng.standard_normal(3)
    return abs(su11_embed(X, *v).norm() - np.sqrt(sig.n) * np.linalg.norm(v))


def _classifier(rng):
    sig = _sig(rng)
    options = available_verdicts(sig)
    want = options[int(rng.integers(len(options)))]
    X, Y = classifier_instance(rng, sig, want)
    c = classify_plane(X, Y)
    return 0.0 if (c.verdict is Verdict(want) and c.agrees_with_closure) else 1.0


def _k_brackets(rng):
    sig = _sig(rng)
    X = random_cone(rng, sig.m, sig.n)
    K = k_matrix(X).mat
    Xh, iXh = hat_matrix(X), hat_matrix(1j * X)
    lam = float(np.real(X[:, 0].conj() @ X[:, 0]))
    # su(1,1) relations: [E3, E1] = 2 E2, [E3, E2] = -2 E1, scaled through K/lam.
    return max(np.linalg.norm(commutator(Xh, iXh) + 2 * K),
               np.linalg.norm(commutator(K, Xh) - 2 * lam * iXh),
               np.linalg.norm(commutator(K, iXh) + 2 * lam * Xh)) / max(1.0, lam ** 1.5)


def _su11_brackets(rng):
    from .lie import SU11_BASIS

    sig = _sig(rng)
    X = random_cone(rng, sig.m, sig.n)
    u, v = rng.standard_normal(3), rng.standard_normal(3)
    U = sum(c * E for c, E in zip(u, SU11_BASIS))
    V = sum(c * E for c, E in zip(v, SU11_BASIS))
    W = commutator(U, V)
    w = [inner_product(E, W) for E in SU11_BASIS]
    lhs = su11_embed(X, *w).mat
    rhs = commutator(su11_embed(X, *u).mat, su11_embed(X, *v).mat)
    return np.linalg.norm(lhs - rhs) / max(1.0, np.linalg.norm(rhs))


SUITES: tuple[tuple[str, Callable, float], ...] = (
    ("expm_inverse", _expm_inverse, 1e-13),
    ("group_membership", _group_membership, 1e-13),
    ("frechet_vs_differences", _frechet, 1e-8),
    ("decompose_orthogonality", _decompose, 1e-12),
    ("triple_bracket_formula", _calculation, 1e-11),
    ("fiber_identity", _fiber, 1e-10),
    ("conformality", _conformal, 1e-12),
    ("classifier_vs_closure", _classifier, 0.5),
    ("k_brackets", _k_brackets, 1e-12),
    ("su11_bracket_preservation", _su11_brackets, 1e-12),
)


def run_suite(index: int, seed: int, trials: int) -> SuiteResult:
    name, fn, tol = SUITES[index]
    worst, failures = 0.0, 0
    for t in range(trials):
        r = float(fn(rng_for(seed, 100 + index, t)))
        worst = max(worst, r)
        failures += not r <= tol
    return SuiteResult(name, trials, failures, worst, tol)


def run_selftest(seed: int = 0, trials: int = 100) -> list[SuiteResult]:
    if trials < 0:
        raise ValueError("trials must be nonnegative")
    if trials == 0:
        log.warning("selftest with 0 trials checks nothing; every suite passes vacuously")
    return [run_suite(i, seed, trials) for i in range(len(SUITES))]
