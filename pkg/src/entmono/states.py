"""
Validated quantum states, Schmidt decomposition and state constructors.

A :class:`QuantumState` is either a normalised ket (``kind == "pure"``) or a
density matrix (``kind == "mixed"``) together with its subsystem dimensions.
Random samplers take an explicit seed, which may be an ``int``, a
``numpy.random.SeedSequence`` or a ready ``numpy.random.Generator``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import linalg as la
from .errors import (
    DimensionMismatchError,
    EntmonoError,
    NotHermitianError,
    NotNormalizedError,
    NotPSDError,
    ProbabilityError,
    StateKindError,
    TraceNotOneError,
)

NORM_TOL = 1e-10
PURITY_TOL = 1e-8
SCHMIDT_CUTOFF = 1e-12


@dataclass(frozen=True, eq=False)
class QuantumState:
    """A validated state on a composite system with subsystem dimensions ``dims``.

    Construct through :func:`validate` (or the helpers in this module); the
    constructor itself trusts its input.
    """

    dims: tuple[int, ...]
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.data.setflags(write=False)

    @property
    def kind(self) -> str:
        return "pure" if self.data.ndim == 1 else "mixed"

    @property
    def dim(self) -> int:
        return int(self.data.shape[0])

    @property
    def is_vector(self) -> bool:
        return self.data.ndim == 1

    def density_matrix(self) -> np.ndarray:
        if self.is_vector:
            return np.outer(self.data, self.data.conj())
        return np.array(self.data)

    def reduced(self, keep: Iterable[int]) -> np.ndarray:
        """Reduced density matrix over the subsystems listed in ``keep``."""
        keep = sorted({int(k) for k in keep})
        traced = [i for i in range(len(self.dims)) if i not in keep]
        if not traced:
            return self.density_matrix()
        return la.partial_trace(self.data, self.dims, traced)

    def purity(self) -> float:
        if self.is_vector:
            return 1.0
        return float(np.real(np.vdot(self.data, self.data)))

    def as_mixed(self) -> "QuantumState":
        return QuantumState(self.dims, self.density_matrix())

    def fingerprint(self) -> str:
        """Short hash of the rounded amplitudes, stable across runs."""
        rounded = np.round(np.asarray(self.data), 12) + 0.0
        h = hashlib.sha256(repr(self.dims).encode())
        h.update(np.ascontiguousarray(rounded).tobytes())
        return h.hexdigest()[:16]

    def to_dict(self) -> dict:
        flat = np.asarray(self.data).reshape(-1)
        return {
            "dims": list(self.dims),
            "kind": self.kind,
            "data": [[float(z.real), float(z.imag)] for z in flat],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, obj: dict) -> "QuantumState":
        try:
            dims, kind, data = obj["dims"], obj["kind"], obj["data"]
        except (KeyError, TypeError) as exc:
            raise EntmonoError(f"state object is missing field {exc}") from exc
        arr = np.asarray(data, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise EntmonoError("state data must be a list of [re, im] pairs")
        entries = arr[:, 0] + 1j * arr[:, 1]
        return validate(dims, entries, kind)


@dataclass(frozen=True)
class SchmidtForm:
    """``|psi> = sum_i coefficients[i] |basis_a[:, i]> (x) |basis_b[:, i]>``.

    ``coefficients`` are the square roots of the Schmidt weights ``mu``.
    ``order`` is the subsystem permutation (side A first) that was applied to
    the state before splitting it; :meth:`reconstruct` undoes it.
    """

    coefficients: np.ndarray
    basis_a: np.ndarray
    basis_b: np.ndarray
    dims: tuple[int, ...] = ()
    order: tuple[int, ...] = ()

    @property
    def rank(self) -> int:
        return int(self.coefficients.size)

    @property
    def mu(self) -> np.ndarray:
        return self.coefficients ** 2

    def reconstruct(self) -> np.ndarray:
        m = (self.basis_a * self.coefficients) @ self.basis_b.T
        flat = m.reshape(-1)
        if not self.order:
            return flat
        inverse = list(np.argsort(self.order))
        permuted_dims = [self.dims[i] for i in self.order]
        return la.permute_subsystems(flat, permuted_dims, inverse)


@dataclass(frozen=True)
class EnsembleMember:
    probability: float
    state: QuantumState


def _resolve_kind(kind, entries: np.ndarray, total: int) -> str:
    if kind in ("pure", "mixed"):
        return kind
    if kind is not None:
        raise EntmonoError(f"unknown state kind {kind!r}")
    if entries.size == total:
        return "pure"
    return "mixed"


def validate(dims, raw, kind: str | None = None) -> QuantumState:
    """Check raw amplitudes or matrix entries and wrap them in a :class:`QuantumState`.

    Parameters
    ----------
    dims : int or sequence of int
        Subsystem dimensions.
    raw : array_like
        Ket of length ``prod(dims)`` or a density matrix, either square or
        flattened row-major.
    kind : {"pure", "mixed"}, optional
        Inferred from the size of ``raw`` when omitted.

    Raises
    ------
    DimensionMismatchError, NotNormalizedError, NotHermitianError,
    TraceNotOneError, NotPSDError
    """
    if isinstance(dims, (int, np.integer)):
        dims = [dims]
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims):
        raise DimensionMismatchError(f"invalid dims {dims}")
    total = int(np.prod(dims))
    entries = np.array(raw, dtype=complex)
    if not np.all(np.isfinite(entries)):
        raise EntmonoError("state has non-finite entries")
    kind = _resolve_kind(kind, entries, total)

    if kind == "pure":
        psi = entries.reshape(-1)
        if psi.size != total:
            raise DimensionMismatchError(f"ket of length {psi.size} does not match dims {dims}")
        norm = float(np.real(np.vdot(psi, psi)))
        if abs(norm - 1.0) > NORM_TOL:
            raise NotNormalizedError(f"<psi|psi> = {norm:.12g}")
        return QuantumState(dims, psi)

    if entries.size != total * total:
        raise DimensionMismatchError(
            f"density matrix with {entries.size} entries does not match dims {dims}"
        )
    rho = entries.reshape(total, total)
    if la.hermiticity_error(rho) > la.HERMITIAN_TOL:
        raise NotHermitianError("density matrix is not Hermitian")
    rho = (rho + rho.conj().T) / 2
    tr = float(np.real(np.trace(rho)))
    if abs(tr - 1.0) > NORM_TOL:
        raise TraceNotOneError(f"Tr(rho) = {tr:.12g}")
    lowest = float(np.linalg.eigvalsh(rho)[0])
    if lowest < -la.PSD_CLIP_TOL:
        raise NotPSDError(f"density matrix has eigenvalue {lowest:.3g}")
    return QuantumState(dims, rho)


def _as_state(state, dims=None) -> QuantumState:
    if isinstance(state, QuantumState):
        return state
    arr = np.asarray(state, dtype=complex)
    if dims is None:
        dims = [arr.shape[0]]
    return validate(dims, arr, "pure" if arr.ndim == 1 else "mixed")


def _split(dims: Sequence[int], cut) -> tuple[list[int], list[int]]:
    n = len(dims)
    if cut is None:
        cut = [0]
    side_a = sorted({int(c) for c in ([cut] if isinstance(cut, (int, np.integer)) else cut)})
    if not side_a or any(not 0 <= c < n for c in side_a):
        raise DimensionMismatchError(f"cut {cut} is not a subset of {n} subsystems")
    side_b = [i for i in range(n) if i not in side_a]
    if not side_b:
        raise DimensionMismatchError("cut must leave a nonempty second side")
    return side_a, side_b


def bipartite_matrix(psi: QuantumState, cut=None) -> tuple[np.ndarray, tuple[int, ...]]:
    """Reshape a pure state into the ``d_A x d_B`` coefficient matrix of a cut."""
    if not psi.is_vector:
        raise StateKindError("a pure state is required")
    side_a, side_b = _split(psi.dims, cut)
    order = tuple(side_a + side_b)
    da = int(np.prod([psi.dims[i] for i in side_a]))
    t = np.asarray(psi.data).reshape(psi.dims).transpose(order)
    return t.reshape(da, -1), order


def schmidt_decompose(psi: QuantumState, cut=None) -> SchmidtForm:
    """Schmidt decomposition of a pure state across ``cut`` (side-A subsystem indices).

    Weights below ``1e-12`` are treated as numerical zeros and dropped.
    """
    psi = _as_state(psi)
    if not psi.is_vector:
        raise StateKindError("schmidt_decompose needs a pure state")
    m, order = bipartite_matrix(psi, cut)
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    keep = s ** 2 >= SCHMIDT_CUTOFF
    identity = order == tuple(range(len(psi.dims)))
    return SchmidtForm(
        coefficients=s[keep],
        basis_a=u[:, keep],
        basis_b=vh[keep, :].T,
        dims=psi.dims,
        order=() if identity else order,
    )


def basis_state(bits: Sequence[int], dims: Sequence[int] | None = None) -> QuantumState:
    """Computational basis ket ``|b_1 b_2 ...>``."""
    if dims is None:
        dims = [2] * len(bits)
    vecs = [la.ket(b, d) for b, d in zip(bits, dims)]
    return QuantumState(tuple(int(d) for d in dims), la.tensor(*vecs))


def max_entangled(d: int) -> QuantumState:
    """``(|00> + |11> + ... + |d-1 d-1>) / sqrt(d)`` on dims ``[d, d]``."""
    if int(d) < 2:
        raise DimensionMismatchError("max_entangled needs d >= 2")
    d = int(d)
    psi = np.zeros(d * d, dtype=complex)
    psi[np.arange(d) * (d + 1)] = 1 / np.sqrt(d)
    return QuantumState((d, d), psi)


def bell_state(which: str = "phi+") -> QuantumState:
    s = 1 / np.sqrt(2)
    table = {
        "phi+": [s, 0, 0, s],
        "phi-": [s, 0, 0, -s],
        "psi+": [0, s, s, 0],
        "psi-": [0, s, -s, 0],
    }
    return QuantumState((2, 2), np.array(table[which], dtype=complex))


def product_state(*states) -> QuantumState:
    """Tensor product of states; pure only if every factor is pure."""
    states = [_as_state(s) for s in states]
    dims = tuple(d for s in states for d in s.dims)
    if all(s.is_vector for s in states):
        return QuantumState(dims, la.tensor(*[s.data for s in states]))
    return QuantumState(dims, la.tensor(*[s.density_matrix() for s in states]))


def separable_mixture(members) -> QuantumState:
    """``sum_i p_i rho_i^(1) (x) ... (x) rho_i^(n)``.

    ``members`` is a sequence of ``(p_i, [factor_1, ..., factor_n])``; factors
    may be kets or density matrices and all members must share the same
    per-subsystem dimensions.
    """
    members = list(members)
    if not members:
        raise ProbabilityError("empty mixture")
    probs = np.array([float(p) for p, _ in members])
    if np.any(probs < 0) or abs(probs.sum() - 1.0) > NORM_TOL:
        raise ProbabilityError(f"probabilities {probs} do not form a distribution")
    dims = None
    rho = None
    for p, factors in members:
        mats = []
        for f in factors:
            f = np.asarray(f, dtype=complex)
            if f.ndim == 1:
                f = np.outer(f, f.conj())
            mats.append(validate([f.shape[0]], f, "mixed").data)
        fdims = tuple(m.shape[0] for m in mats)
        if dims is None:
            dims = fdims
            rho = np.zeros((int(np.prod(dims)),) * 2, dtype=complex)
        elif fdims != dims:
            raise DimensionMismatchError(f"member dims {fdims} differ from {dims}")
        rho = rho + p * la.tensor(*mats)
    return validate(dims, rho, "mixed")


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_seed(master_seed: int, index: int, stream: int = 0) -> np.random.SeedSequence:
    """Per-sample seed derived by hashing ``(master_seed, index)``.

    A nonzero ``stream`` gives an independent family of seeds for the same
    indices.
    """
    entropy = [int(master_seed), int(index)] + ([int(stream)] if stream else [])
    return np.random.SeedSequence(entropy)


def _gaussian_complex(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def haar_random_pure(dim: int, seed=None, dims: Sequence[int] | None = None) -> QuantumState:
    """Haar-distributed pure state: normalised complex Gaussian vector."""
    if int(dim) < 1:
        raise DimensionMismatchError("dim must be positive")
    rng = make_rng(seed)
    z = _gaussian_complex(rng, int(dim))
    z /= np.linalg.norm(z)
    dims = tuple(dims) if dims is not None else (int(dim),)
    if int(np.prod(dims)) != int(dim):
        raise DimensionMismatchError(f"dims {dims} do not multiply to {dim}")
    return QuantumState(dims, z)


def haar_random_unitary(dim: int, seed=None) -> np.ndarray:
    """Haar unitary from Gram-Schmidt on Gaussian columns.

    QR with the diagonal of R made real positive is exactly classical
    Gram-Schmidt, which keeps the distribution Haar.
    """
    rng = make_rng(seed)
    q, r = np.linalg.qr(_gaussian_complex(rng, (dim, dim)))
    d = np.diag(r)
    return q * (d / np.abs(d))


def haar_random_isometry(rows: int, cols: int, seed=None) -> np.ndarray:
    """Random ``rows x cols`` matrix with orthonormal columns."""
    rng = make_rng(seed)
    q, r = np.linalg.qr(_gaussian_complex(rng, (rows, cols)))
    d = np.diag(r)
    return q * (d / np.abs(d))


def induced_mixed(d: int, s: int, seed=None, dims: Sequence[int] | None = None) -> QuantumState:
    """Trace an ``s``-dimensional environment off a Haar pure state on ``d * s``."""
    if int(d) < 1 or int(s) < 1:
        raise DimensionMismatchError("d and s must be positive")
    d, s = int(d), int(s)
    psi = haar_random_pure(d * s, seed).data
    m = psi.reshape(d, s)
    rho = m @ m.conj().T
    rho = (rho + rho.conj().T) / 2
    return validate(dims if dims is not None else [d], rho, "mixed")


def random_pure_product(dims: Sequence[int], seed=None) -> QuantumState:
    rng = make_rng(seed)
    return product_state(*[haar_random_pure(d, rng) for d in dims])


def purify(rho: QuantumState) -> QuantumState:
    """Purification on ``rho.dims + [rank]``.

    The environment dimension is the numerical rank of ``rho`` (eigenvalues
    above ``1e-12``), so tracing the last subsystem returns ``rho``.
    """
    rho = _as_state(rho)
    if rho.is_vector:
        return QuantumState(rho.dims + (1,), np.array(rho.data))
    values, vectors = la.hermitian_eig(rho.data)
    values = la.clip_psd(values)
    keep = values > SCHMIDT_CUTOFF
    w = vectors[:, keep] * np.sqrt(values[keep])
    k = int(keep.sum())
    psi = w.reshape(-1)
    psi = psi / np.linalg.norm(psi)
    return QuantumState(rho.dims + (k,), psi)


def is_pure(state) -> bool:
    state = _as_state(state)
    return state.purity() >= 1 - PURITY_TOL


def counterexample_state() -> QuantumState:
    """Three-qubit W-class state ``(|100> + (|010> + |001>)/sqrt 2) / sqrt 2``."""
    psi = np.zeros(8, dtype=complex)
    psi[0b100] = 1 / np.sqrt(2)
    psi[0b010] = 0.5
    psi[0b001] = 0.5
    return QuantumState((2, 2, 2), psi)


def separable_branch_state(members, projector, subsystem: int = 0) -> np.ndarray:
    """State of a separable mixture after outcome ``projector`` on one subsystem.

    Each member's factor on ``subsystem`` is replaced by
    ``P rho P / Tr(P rho P)``; members with zero outcome weight keep their
    factor (they cannot contribute to that branch).
    """
    out = None
    proj = la.as_matrix(projector)
    for p, factors in members:
        mats = []
        for k, f in enumerate(factors):
            f = np.asarray(f, dtype=complex)
            if f.ndim == 1:
                f = np.outer(f, f.conj())
            if k == subsystem:
                g = proj @ f @ proj
                w = float(np.real(np.trace(g)))
                if w > 1e-14:
                    f = g / w
            mats.append(f)
        term = p * la.tensor(*mats)
        out = term if out is None else out + term
    return out


def load_state(path) -> QuantumState:
    with open(Path(path), "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise EntmonoError(f"malformed state file {path}: {exc}") from exc
    return QuantumState.from_dict(obj)


def save_state(state: QuantumState, path) -> None:
    Path(path).write_text(state.to_json() + "\n", encoding="utf-8")
