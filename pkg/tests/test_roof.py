"""Convex-roof objective, its gradient and the separable-ansatz gradient."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import seeds
from entmono import measures as ms
from entmono import roof
from entmono import states as S


def _problem(seed, rank, functional, dims=(2, 2)):
    rho = S.induced_mixed(int(np.prod(dims)), rank, seed, dims)
    w, da, db, _ = ms._support_factor(rho, None)
    return rho, roof.RoofProblem(w, da, db, functional)


@pytest.mark.parametrize("functional", [roof.ENTROPY, roof.TANGLE], ids=lambda f: f.name)
@settings(max_examples=15)
@given(seed=seeds, rank=st.integers(2, 4))
def test_gradient_matches_finite_differences(functional, seed, rank):
    _, prob = _problem(seed, rank, functional)
    rng = np.random.default_rng(seed)
    k = rank * rank
    u = S.haar_random_isometry(k, rank, rng)[None]
    d = rng.standard_normal(u.shape) + 1j * rng.standard_normal(u.shape)
    _, g = prob.evaluate(u)
    h = 1e-6
    fd = (prob.evaluate(u + h * d, False) - prob.evaluate(u - h * d, False)) / (2 * h)
    assert abs(fd[0] - 2 * np.real(np.sum(np.conj(g) * d))) < 1e-5


@given(seeds)
def test_objective_equals_ensemble_average(seed):
    rho, prob = _problem(seed, 3, roof.ENTROPY)
    u = S.haar_random_isometry(9, 3, seed)
    members = ms._ensemble_from(u, prob.w, rho.dims, [0, 1])
    direct = sum(m.probability * ms.entropy_of_entanglement(m.state) for m in members)
    assert abs(prob.evaluate(u[None], False)[0] - direct) < 1e-10


def test_tangle_functional_is_squared_concurrence():
    psi = S.haar_random_pure(4, 3, [2, 2])
    lam = np.linalg.svd(psi.data.reshape(2, 2), compute_uv=False) ** 2
    tangle = roof.TANGLE.value(lam[None], lam.sum()[None])[0]
    assert abs(tangle - ms.concurrence_pure_cut(psi) ** 2) < 1e-12


def test_functionals_are_homogeneous():
    lam = np.array([[0.3, 0.2, 0.1]])
    p = lam.sum(-1)
    for f in (roof.ENTROPY, roof.TANGLE):
        assert np.allclose(f.value(2.5 * lam, 2.5 * p), 2.5 * f.value(lam, p))


def test_minimise_stays_on_the_manifold_and_decreases():
    _, prob = _problem(4, 3, roof.ENTROPY)
    starts = np.stack([S.haar_random_isometry(9, 3, s) for s in range(3)])
    f0 = prob.evaluate(starts, False)
    out = roof.minimise(prob, starts, max_iter=50, step_tolerance=1e-9)
    assert np.max(np.abs(out.u.conj().T @ out.u - np.eye(3))) < 1e-10
    assert out.value <= f0.min() + 1e-12
    assert out.restart == int(np.argmin(out.values))


def test_minimise_tie_break_prefers_first_restart():
    _, prob = _problem(4, 2, roof.ENTROPY)
    u = S.haar_random_isometry(4, 2, 0)
    out = roof.minimise(prob, np.stack([u, u]), max_iter=20, step_tolerance=1e-9)
    assert out.restart == 0


# ---------------------------------------------------------------- separable ansatz

@settings(max_examples=10)
@given(seeds)
def test_ree_ansatz_gradient(seed):
    rho = S.induced_mixed(4, 4, seed, [2, 2]).data
    ans = ms._SeparableAnsatz(rho, 2, 2, 6)
    rng = np.random.default_rng(seed)
    theta = ans.random_theta(rng)
    _, g = ans.fun_grad(theta)
    d = rng.standard_normal(theta.size)
    h = 1e-6
    fd = (ans.fun_grad(theta + h * d)[0] - ans.fun_grad(theta - h * d)[0]) / (2 * h)
    assert abs(fd - g @ d) < 1e-5 * max(1.0, abs(fd))


def test_ree_ansatz_value_is_relative_entropy():
    rho = S.induced_mixed(4, 4, 1, [2, 2]).data
    ans = ms._SeparableAnsatz(rho, 2, 2, 5)
    theta = ans.random_theta(np.random.default_rng(0))
    sigma = ans.sigma(theta)[0]
    assert abs(ans.fun_grad(theta)[0] - ms.relative_entropy(rho, sigma)) < 1e-9
    assert abs(np.trace(sigma) - 1) < 1e-12


def test_log_divided_differences_diagonal():
    vals = np.array([0.5, 0.5, 0.25])
    dd = ms._log_divided_differences(vals)
    assert np.allclose(np.diag(dd), 1 / vals)
    assert np.isclose(dd[0, 1], 2.0)
    assert np.isclose(dd[0, 2], np.log(2) / 0.25)
