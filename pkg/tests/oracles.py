"""Independent reference implementations used only by the tests.

Each oracle takes a different numerical route from the library code it
checks: explicit index loops, scipy matrix functions or mpmath scalars.
"""

import itertools

import mpmath
import numpy as np
import scipy.linalg

SY = np.array([[0, -1j], [1j, 0]])


def partial_trace_loops(rho, dims, traced):
    """Partial trace by summing matrix elements over explicit multi-indices."""
    dims = list(dims)
    keep = [i for i in range(len(dims)) if i not in traced]
    kdims = [dims[i] for i in keep]
    out = np.zeros((int(np.prod(kdims)),) * 2, dtype=complex)

    def flat(idx):
        v = 0
        for d, x in zip(dims, idx):
            v = v * d + x
        return v

    def kflat(idx):
        v = 0
        for d, x in zip(kdims, idx):
            v = v * d + x
        return v

    for row in itertools.product(*[range(d) for d in dims]):
        for col in itertools.product(*[range(d) for d in dims]):
            if any(row[t] != col[t] for t in traced):
                continue
            out[kflat([row[i] for i in keep]), kflat([col[i] for i in keep])] += rho[flat(row), flat(col)]
    return out


def concurrence_mp(rho, digits=40):
    """Concurrence from the spectrum of rho rho~, computed in extended precision."""
    yy = np.kron(SY, SY)
    rt = yy @ rho.conj() @ yy
    with mpmath.workdps(digits):
        a = mpmath.matrix(rho.tolist()) * mpmath.matrix(rt.tolist())
        ev = mpmath.eig(a, left=False, right=False)
        lam = sorted((mpmath.sqrt(max(mpmath.re(e), 0)) for e in ev), reverse=True)
        return float(max(mpmath.mpf(0), lam[0] - lam[1] - lam[2] - lam[3]))


def concurrence_pure_amplitudes(psi):
    a, b, c, d = psi
    return 2 * abs(a * d - b * c)


def mp_binary_entropy(x):
    x = mpmath.mpf(x)
    if x in (0, 1):
        return mpmath.mpf(0)
    return -x * mpmath.log(x, 2) - (1 - x) * mpmath.log(1 - x, 2)


def mp_eof(c):
    c = mpmath.mpf(c)
    return mp_binary_entropy((1 + mpmath.sqrt(1 - c * c)) / 2)


def entropy_from_reduced_eigh(psi, da):
    """Entropy of entanglement from the eigenvalues of rho_A."""
    m = np.asarray(psi).reshape(da, -1)
    ev = np.clip(np.linalg.eigvalsh(m @ m.conj().T), 0, None)
    ev = ev[ev > 1e-16]
    return float(-(ev * np.log2(ev)).sum())


def vn_entropy_scipy(rho):
    """-Tr rho log2 rho through scipy.linalg.logm on the support."""
    ev, vec = np.linalg.eigh(rho)
    keep = ev > 1e-14
    r = (vec[:, keep].conj().T @ rho @ vec[:, keep])
    return float(-np.real(np.trace(r @ scipy.linalg.logm(r))) / np.log(2))


def werner(p):
    phi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    return p * np.outer(phi, phi) + (1 - p) * np.eye(4) / 4
