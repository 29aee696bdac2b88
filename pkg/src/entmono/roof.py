"""
Convex-roof minimisation over ensemble decompositions of a density matrix.

Every ensemble ``{p_k, |phi_k>}`` with ``K`` members realising
``rho = W W^dagger`` (``W`` of shape ``D x r``) is obtained from an isometry
``U`` (``K x r``, ``U^dagger U = 1``) through the unnormalised members
``psi_k = W U[k]``. Pure-state functionals are written as homogeneous
functions of the unnormalised Schmidt weights ``lambda`` of ``psi_k``, so
``p_k f(phi_k) = g(lambda(psi_k))`` and the objective is ``sum_k g``.

The search is a Riemannian Polak-Ribiere conjugate gradient on the complex
Stiefel manifold with polar retraction and Armijo backtracking, repeated from
random starting isometries. All restarts are advanced together as one batch.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

LN2 = np.log(2.0)
_TINY = 1e-300


@dataclass(frozen=True)
class PureFunctional:
    """Homogeneous degree-one function ``g`` of unnormalised Schmidt weights.

    ``value(lam, p)`` and ``deriv(lam, p)`` act on arrays of shape
    ``(..., m)`` with ``p = lam.sum(-1)``; ``deriv`` returns ``dg/dlam``.
    """

    name: str
    value: Callable[[np.ndarray, np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray, np.ndarray], np.ndarray]


def _entropy_value(lam, p):
    lam = np.maximum(lam, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(lam > 0, lam * np.log(np.maximum(lam, _TINY) / p[..., None]), 0.0)
    return np.where(p > 0, -terms.sum(-1) / LN2, 0.0)


def _entropy_deriv(lam, p):
    lam = np.maximum(lam, _TINY)
    return np.log(np.maximum(p, _TINY)[..., None] / lam) / LN2


def _tangle_value(lam, p):
    with np.errstate(divide="ignore", invalid="ignore"):
        v = 2.0 * (p - (lam ** 2).sum(-1) / p)
    return np.where(p > 0, v, 0.0)


def _tangle_deriv(lam, p):
    p = np.maximum(p, _TINY)[..., None]
    q = (lam ** 2).sum(-1)[..., None]
    return 2.0 * (1.0 - 2.0 * lam / p + q / p ** 2)


ENTROPY = PureFunctional("entropy", _entropy_value, _entropy_deriv)
# 2(1 - Tr rho_A^2); equals the squared concurrence across a qubit cut
TANGLE = PureFunctional("tangle", _tangle_value, _tangle_deriv)


def _herm(a):
    return 0.5 * (a + np.conj(np.swapaxes(a, -1, -2)))


def _inner(a, b):
    """Real Frobenius inner product per batch element."""
    return np.real(np.sum(np.conj(a) * b, axis=(-2, -1)))


def _polar(a):
    x, _, yh = np.linalg.svd(a, full_matrices=False)
    return x @ yh


class RoofProblem:
    """Objective ``F(U) = sum_k g(lambda(W U[k]))`` and its Euclidean gradient.

    ``w`` has its rows already ordered so that the cut is ``da | db``. The
    gradient is the Wirtinger derivative ``G = dF/d conj(U)``, so a step
    ``dU`` changes ``F`` by ``2 Re <G, dU>``.
    """

    def __init__(self, w: np.ndarray, da: int, db: int, functional: PureFunctional):
        self.w = np.asarray(w, dtype=complex)
        self.wt = self.w.T
        self.wc = self.w.conj()
        self.da, self.db = da, db
        self.f = functional
        self.small_left = da <= db

    def members(self, u: np.ndarray) -> np.ndarray:
        """Unnormalised members, shape ``(..., K, D)``."""
        return u @ self.wt

    def evaluate(self, u: np.ndarray, gradient: bool = True):
        psi = self.members(u)
        lead = psi.shape[:-1]
        m = psi.reshape(lead + (self.da, self.db))
        if self.small_left:
            h = m @ np.conj(np.swapaxes(m, -1, -2))
        else:
            h = np.conj(np.swapaxes(m, -1, -2)) @ m
        lam, vec = np.linalg.eigh(_herm(h))
        lam = np.maximum(lam, 0.0)
        p = lam.sum(-1)
        total = self.f.value(lam, p).sum(-1)
        if not gradient:
            return total
        phi = self.f.deriv(lam, p)
        proj = (vec * phi[..., None, :]) @ np.conj(np.swapaxes(vec, -1, -2))
        g = proj @ m if self.small_left else m @ proj
        g_psi = g.reshape(psi.shape)
        return total, g_psi @ self.wc


@dataclass
class RoofOutcome:
    value: float
    u: np.ndarray
    iterations: int
    residual: float
    restart: int
    values: np.ndarray


def minimise(
    problem: RoofProblem,
    starts: np.ndarray,
    max_iter: int,
    step_tolerance: float,
    patience: int = 5,
) -> RoofOutcome:
    """Batched Riemannian CG from the isometries ``starts`` (shape ``(R, K, r)``).

    A restart stops once its objective has improved by less than
    ``step_tolerance`` for ``patience`` consecutive iterations. The returned
    ``residual`` is the improvement of the best restart in its last iteration.
    """
    u = np.array(starts, dtype=complex)
    n_restarts = u.shape[0]
    f, egrad = problem.evaluate(u)
    grad = egrad - u @ _herm(np.conj(np.swapaxes(u, -1, -2)) @ egrad)
    direction = -grad
    step = np.full(n_restarts, 0.5)
    active = np.ones(n_restarts, dtype=bool)
    stall = np.zeros(n_restarts, dtype=int)
    residual = np.full(n_restarts, np.inf)
    iters = np.zeros(n_restarts, dtype=int)

    for _ in range(max_iter):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        ua, fa, ga, da = u[idx], f[idx], grad[idx], direction[idx]
        slope = _inner(ga, da)
        bad = slope >= 0
        if bad.any():
            da[bad] = -ga[bad]
            slope[bad] = _inner(ga[bad], da[bad])
        t = np.minimum(step[idx] * 2.0, 4.0)
        accepted = np.zeros(idx.size, dtype=bool)
        u_new = ua.copy()
        f_new = fa.copy()
        for _ls in range(30):
            todo = ~accepted
            if not todo.any():
                break
            cand = _polar(ua[todo] + t[todo, None, None] * da[todo])
            fc = problem.evaluate(cand, gradient=False)
            ok = fc <= fa[todo] + 1e-4 * t[todo] * slope[todo]
            sel = np.flatnonzero(todo)[ok]
            u_new[sel] = cand[ok]
            f_new[sel] = fc[ok]
            accepted[sel] = True
            t[np.flatnonzero(todo)[~ok]] *= 0.3
        # failed line searches keep the old point and count as stalled
        f2, eg2 = problem.evaluate(u_new)
        g2 = eg2 - u_new @ _herm(np.conj(np.swapaxes(u_new, -1, -2)) @ eg2)
        g_old_t = ga - u_new @ _herm(np.conj(np.swapaxes(u_new, -1, -2)) @ ga)
        d_old_t = da - u_new @ _herm(np.conj(np.swapaxes(u_new, -1, -2)) @ da)
        denom = np.maximum(_inner(ga, ga), _TINY)
        beta = np.maximum(0.0, _inner(g2, g2 - g_old_t) / denom)
        d2 = -g2 + beta[:, None, None] * d_old_t

        improvement = fa - f2
        u[idx], f[idx], grad[idx], direction[idx] = u_new, f2, g2, d2
        step[idx] = np.where(accepted, t, step[idx] * 0.1)
        residual[idx] = np.maximum(improvement, 0.0)
        iters[idx] += 1
        small = improvement < step_tolerance
        stall[idx] = np.where(small, stall[idx] + 1, 0)
        active[idx] = stall[idx] < patience

    best = int(np.argmin(f))  # argmin returns the lowest restart index on ties
    return RoofOutcome(
        value=float(f[best]),
        u=u[best],
        iterations=int(iters[best]),
        residual=float(residual[best]),
        restart=best,
        values=f.copy(),
    )
