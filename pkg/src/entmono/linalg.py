"""
Dense complex linear algebra over small Hilbert spaces.

Operators and density matrices are plain ``numpy`` arrays of complex dtype,
kets are 1-D arrays. Composite systems are described by a list of subsystem
dimensions ``dims``; a flat index decodes big-endian, i.e. subsystem 0 is the
most significant digit, which is exactly the layout produced by
``numpy.kron``.

Example
-------
>>> import numpy as np
>>> from entmono.linalg import tensor, partial_trace
>>> a = np.diag([0.25, 0.75])
>>> b = np.eye(2) / 2
>>> np.allclose(partial_trace(tensor(a, b), [2, 2], 1), a)
True
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import (
    ConvergenceError,
    DimensionMismatchError,
    EntmonoError,
    NotHermitianError,
    NotPSDError,
)

HERMITIAN_TOL = 1e-10
PSD_CLIP_TOL = 1e-10

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


@dataclass(frozen=True)
class EigenSystem:
    """Spectral decomposition of a Hermitian matrix.

    ``values`` are real and sorted in descending order, ``vectors`` holds the
    matching orthonormal eigenvectors as columns.
    """

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.conj().T

    def __iter__(self):
        return iter((self.values, self.vectors))


def as_matrix(m) -> np.ndarray:
    """Return ``m`` as a finite, square, complex 2-D array."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise DimensionMismatchError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise EntmonoError("matrix has non-finite entries")
    return a


def as_vector(v) -> np.ndarray:
    a = np.asarray(v, dtype=complex)
    if a.ndim != 1 or a.size == 0:
        raise DimensionMismatchError(f"expected a non-empty vector, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise EntmonoError("vector has non-finite entries")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def ket(index: int, dim: int) -> np.ndarray:
    """Computational basis vector ``|index>`` in dimension ``dim``."""
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


def tensor(*ops) -> np.ndarray:
    """Kronecker product of kets or of matrices, left operand most significant.

    All operands must be of the same kind (all 1-D or all 2-D).
    """
    if not ops:
        raise ValueError("tensor needs at least one operand")
    arrays = [np.asarray(op, dtype=complex) for op in ops]
    if len({a.ndim for a in arrays}) != 1:
        raise DimensionMismatchError("cannot mix kets and matrices in a tensor product")
    return reduce(np.kron, arrays)


def _normalise_indices(indices, n: int) -> list[int]:
    if isinstance(indices, (int, np.integer)):
        indices = [int(indices)]
    out = sorted({int(i) for i in indices})
    for i in out:
        if not 0 <= i < n:
            raise DimensionMismatchError(f"subsystem index {i} out of range for {n} subsystems")
    return out


def partial_trace(m, dims: Sequence[int], traced_index) -> np.ndarray:
    """Trace out one or several subsystems.

    Parameters
    ----------
    m : array_like
        Density matrix, or a ket (treated as ``|m><m|`` without forming it).
    dims : sequence of int
        Subsystem dimensions; their product must equal the size of ``m``.
    traced_index : int or iterable of int
        Subsystem(s) to discard. The remaining subsystems keep their order.

    Returns
    -------
    numpy.ndarray
        Reduced density matrix over the kept subsystems (a 1x1 matrix holding
        the trace when every subsystem is traced).
    """
    dims = [int(d) for d in dims]
    arr = np.asarray(m, dtype=complex)
    total = int(np.prod(dims))
    if arr.shape[0] != total or (arr.ndim == 2 and arr.shape[1] != total):
        raise DimensionMismatchError(f"dims {dims} do not match operand of shape {arr.shape}")
    traced = _normalise_indices(traced_index, len(dims))
    keep = [i for i in range(len(dims)) if i not in traced]
    dk = int(np.prod([dims[i] for i in keep])) if keep else 1
    dt = int(np.prod([dims[i] for i in traced])) if traced else 1

    if arr.ndim == 1:
        psi = arr.reshape(dims).transpose(keep + traced).reshape(dk, dt)
        return psi @ psi.conj().T
    if arr.ndim != 2:
        raise DimensionMismatchError("partial_trace expects a ket or a matrix")
    n = len(dims)
    t = arr.reshape(dims + dims)
    perm = keep + traced + [n + i for i in keep] + [n + i for i in traced]
    t = t.transpose(perm).reshape(dk, dt, dk, dt)
    return np.einsum("ajbj->ab", t)


def permute_subsystems(m, dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Reorder the tensor factors of a ket or matrix; ``order[k]`` is the old index of new factor k."""
    dims = [int(d) for d in dims]
    order = [int(o) for o in order]
    if sorted(order) != list(range(len(dims))):
        raise DimensionMismatchError(f"{order} is not a permutation of {len(dims)} subsystems")
    arr = np.asarray(m, dtype=complex)
    total = int(np.prod(dims))
    if arr.ndim == 1:
        return arr.reshape(dims).transpose(order).reshape(total)
    n = len(dims)
    t = arr.reshape(dims + dims).transpose(order + [n + o for o in order])
    return t.reshape(total, total)


def hermiticity_error(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T)))


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    return hermiticity_error(as_matrix(m)) <= tol


def _sorted_system(values: np.ndarray, vectors: np.ndarray) -> EigenSystem:
    # stable sort on -values: ties keep ascending original index
    order = np.argsort(-values, kind="stable")
    return EigenSystem(values[order].copy(), vectors[:, order].copy())


def jacobi_eigh(m, max_sweeps: int | None = None) -> EigenSystem:
    """Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.

    Each rotation first removes the phase of the pivot ``a[p, q]`` and then
    applies the real symmetric Jacobi rotation, so ``a[p, q]`` becomes zero.
    Sweeps continue until the largest off-diagonal modulus drops below
    ``1e-13 * max|m|``.

    Raises
    ------
    ConvergenceError
        If ``max_sweeps`` (default ``100 * dim**2``) sweeps do not converge.
    """
    a = as_matrix(m).copy()
    if hermiticity_error(a) > HERMITIAN_TOL:
        raise NotHermitianError("jacobi_eigh needs a Hermitian matrix")
    a = (a + a.conj().T) / 2
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = float(np.max(np.abs(a))) if n else 0.0
    if scale == 0.0:
        return _sorted_system(np.zeros(n), v)
    threshold = 1e-13 * scale
    if max_sweeps is None:
        max_sweeps = 100 * n * n

    for _ in range(max_sweeps):
        off = np.abs(a - np.diag(np.diag(a)))
        if n == 1 or off.max() < threshold:
            return _sorted_system(np.real(np.diag(a)).copy(), v)
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag < 1e-300:
                    continue
                phase = apq / mag
                tau = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # G = diag(1, conj(phase)) @ [[c, s], [-s, c]] on the (p, q) plane
                g = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                cols = a[:, [p, q]] @ g
                a[:, p], a[:, q] = cols[:, 0], cols[:, 1]
                rows = g.conj().T @ a[[p, q], :]
                a[p, :], a[q, :] = rows[0], rows[1]
                a[p, q] = a[q, p] = 0.0
                vc = v[:, [p, q]] @ g
                v[:, p], v[:, q] = vc[:, 0], vc[:, 1]
    raise ConvergenceError(f"Jacobi eigensolver did not converge in {max_sweeps} sweeps")


def hermitian_eig(m, method: str = "lapack") -> EigenSystem:
    """Spectral decomposition of a Hermitian matrix, eigenvalues descending.

    ``method="lapack"`` uses ``numpy.linalg.eigh`` (tridiagonalisation plus
    implicit QL/divide-and-conquer); ``method="jacobi"`` uses
    :func:`jacobi_eigh`. Both return the same ordering convention.
    """
    a = as_matrix(m)
    if hermiticity_error(a) > HERMITIAN_TOL:
        raise NotHermitianError(
            f"matrix deviates from its adjoint by {hermiticity_error(a):.3g}"
        )
    if method == "jacobi":
        return jacobi_eigh(a)
    if method != "lapack":
        raise ValueError(f"unknown eigensolver method {method!r}")
    try:
        w, v = np.linalg.eigh((a + a.conj().T) / 2)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(str(exc)) from exc
    return _sorted_system(w, v)


def clip_psd(values, tol: float = PSD_CLIP_TOL) -> np.ndarray:
    """Clip eigenvalues in ``[-tol, 0)`` to zero; more negative values raise."""
    values = np.asarray(values, dtype=float)
    if values.size and values.min() < -tol:
        raise NotPSDError(f"eigenvalue {values.min():.3g} is below -{tol:g}")
    return np.where(values < 0, 0.0, values)


def xlog2x(x) -> np.ndarray:
    """Elementwise ``x * log2(x)`` with the convention ``0 * log 0 = 0``."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = x[pos] * np.log2(x[pos])
    return out


def apply_function(m, f: Callable[[np.ndarray], np.ndarray], psd: bool = False) -> np.ndarray:
    """Functional calculus ``f(m) = sum_k f(lambda_k) P_k`` for Hermitian ``m``.

    ``f`` receives the array of eigenvalues and must return an array of the
    same shape. With ``psd=True`` the eigenvalues are clipped with
    :func:`clip_psd` first, which is what ``sqrt`` and ``log`` need.
    """
    values, vectors = hermitian_eig(m)
    if psd:
        values = clip_psd(values)
    with np.errstate(divide="ignore", invalid="ignore"):
        fv = np.asarray(f(values))
    if fv.shape != values.shape:
        raise ValueError("f must map the eigenvalue array elementwise")
    if not np.all(np.isfinite(fv)):
        raise EntmonoError("function is undefined at an eigenvalue of the matrix")
    return (vectors * fv) @ vectors.conj().T


def sqrtm_psd(m) -> np.ndarray:
    return apply_function(m, np.sqrt, psd=True)


def trace_norm(m) -> float:
    a = as_matrix(m)
    if hermiticity_error(a) <= HERMITIAN_TOL:
        return float(np.sum(np.abs(hermitian_eig(a).values)))
    return float(np.sum(np.linalg.svd(a, compute_uv=False)))


def trace_distance(rho, sigma) -> float:
    """``T(rho, sigma) = Tr|rho - sigma| / 2`` for Hermitian operands."""
    r, s = as_matrix(rho), as_matrix(sigma)
    if r.shape != s.shape:
        raise DimensionMismatchError(f"shapes {r.shape} and {s.shape} differ")
    return 0.5 * trace_norm(r - s)


def fidelity(rho, sigma) -> float:
    """Uhlmann root fidelity ``Tr sqrt(sqrt(rho) sigma sqrt(rho))``."""
    r = sqrtm_psd(rho)
    inner = r @ as_matrix(sigma) @ r
    vals = clip_psd(hermitian_eig((inner + inner.conj().T) / 2).values, tol=1e-9)
    return float(np.sum(np.sqrt(vals)))


def embed(op, dims: Sequence[int], index: int | Iterable[int]) -> np.ndarray:
    """Lift an operator on subsystem(s) ``index`` to the full space.

    For several indices they must be contiguous and in ascending order, with
    ``op`` acting on their joint space.
    """
    dims = [int(d) for d in dims]
    idx = _normalise_indices(index, len(dims))
    if idx != list(range(idx[0], idx[-1] + 1)):
        raise DimensionMismatchError("embed needs contiguous subsystems")
    op = as_matrix(op)
    d_op = int(np.prod([dims[i] for i in idx]))
    if op.shape[0] != d_op:
        raise DimensionMismatchError(f"operator of size {op.shape[0]} does not act on dims {idx}")
    left = int(np.prod(dims[: idx[0]])) if idx[0] else 1
    right = int(np.prod(dims[idx[-1] + 1:])) if idx[-1] + 1 < len(dims) else 1
    return np.kron(np.kron(np.eye(left), op), np.eye(right))
