"""
Projective measurements and two LOCC protocols with full transcripts.

* :func:`teleport` sends an unknown qubit from A to B using one shared Bell
  pair and two classical bits.
* :func:`locc_prepare_pure` turns a shared Bell pair into
  ``alpha|00> + beta|11>`` using a local ancilla, a local unitary, one
  measurement and a conditional ``sigma_x`` on B.
* :func:`locc_prepare_mixed` draws a member of an ensemble and prepares it
  the same way, followed by local unitaries.

Every randomised routine takes an ``rng`` (seed or ``Generator``). Passing
``outcome=`` instead forces a branch, which is how the exhaustive
enumerators work.
"""

from __future__ import annotations

import json
from functools import lru_cache
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg as la
from .errors import DimensionMismatchError, EntmonoError, NotNormalizedError, ProbabilityError
from .states import NORM_TOL, QuantumState, make_rng, max_entangled, validate

SIGMA_X = la.PAULI_X
SIGMA_Y = la.PAULI_Y
SIGMA_Z = la.PAULI_Z
IDENTITY_2 = np.eye(2, dtype=complex)

PVM_TOL = 1e-10
UNITARY_TOL = 1e-10

CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


@dataclass(frozen=True)
class PVM:
    """Projection-valued measure: orthogonal projectors summing to the identity."""

    projectors: tuple
    labels: tuple

    def __post_init__(self):
        mats = tuple(la.as_matrix(p) for p in self.projectors)
        labels = tuple(self.labels) if self.labels else tuple(str(i) for i in range(len(mats)))
        if not mats:
            raise EntmonoError("a PVM needs at least one projector")
        if len(labels) != len(mats):
            raise EntmonoError("one label per projector is required")
        dim = mats[0].shape[0]
        if any(m.shape != (dim, dim) for m in mats):
            raise DimensionMismatchError("projectors have different shapes")
        for i, p in enumerate(mats):
            for j, q in enumerate(mats):
                target = p if i == j else np.zeros_like(p)
                if np.max(np.abs(p @ q - target)) > PVM_TOL:
                    raise EntmonoError(f"projectors {i} and {j} violate P_i P_j = delta_ij P_i")
        if np.max(np.abs(sum(mats) - np.eye(dim))) > PVM_TOL:
            raise EntmonoError("projectors do not sum to the identity")
        object.__setattr__(self, "projectors", mats)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return int(self.projectors[0].shape[0])

    def __len__(self) -> int:
        return len(self.projectors)


def computational_pvm(dim: int, labels: Sequence[str] | None = None) -> PVM:
    """Measurement in the standard basis of a ``dim``-level system."""
    projs = [la.projector(la.ket(i, dim)) for i in range(dim)]
    return PVM(tuple(projs), tuple(labels) if labels else tuple(str(i) for i in range(dim)))


def local_pvm(pvm: PVM, dims: Sequence[int], index) -> PVM:
    """Lift a PVM on the subsystem(s) ``index`` to the full system, identity elsewhere."""
    lifted = tuple(la.embed(p, dims, index) for p in pvm.projectors)
    return PVM(lifted, pvm.labels)


def outcome_probabilities(state: QuantumState, pvm: PVM) -> np.ndarray:
    """``p_i = Tr(rho P_i)``, clipped at zero."""
    if pvm.dim != state.dim:
        raise DimensionMismatchError(f"PVM acts on dimension {pvm.dim}, state has {state.dim}")
    if state.is_vector:
        psi = state.data
        probs = [np.real(np.vdot(psi, p @ psi)) for p in pvm.projectors]
    else:
        probs = [np.real(np.trace(state.data @ p)) for p in pvm.projectors]
    return np.maximum(np.array(probs, dtype=float), 0.0)


def _sample_index(probs: np.ndarray, rng) -> int:
    cdf = np.cumsum(probs)
    u = make_rng(rng).random() * cdf[-1]
    idx = int(np.searchsorted(cdf, u, side="right"))
    idx = min(idx, len(probs) - 1)
    # never land on a zero-probability outcome through rounding at the edges
    while probs[idx] <= 0.0:
        idx -= 1
    return idx


def pvm_measure(state: QuantumState, pvm: PVM, rng=None, outcome: int | None = None):
    """Measure ``state`` with ``pvm``.

    Parameters
    ----------
    state : QuantumState
    pvm : PVM
    rng : seed or Generator, optional
        Used for inverse-CDF sampling when ``outcome`` is not given.
    outcome : int, optional
        Force this branch instead of sampling.

    Returns
    -------
    outcome : int
    post_state : QuantumState
        ``P psi / sqrt(p)`` for kets, ``P rho P / p`` for density matrices.
    probability : float

    Raises
    ------
    DimensionMismatchError
        When the PVM and state dimensions differ.
    ProbabilityError
        When every outcome (or the forced one) has zero probability.
    """
    probs = outcome_probabilities(state, pvm)
    total = probs.sum()
    if total <= 0.0:
        raise ProbabilityError("all outcome probabilities vanish")
    if abs(total - 1.0) > 1e-8:
        raise ProbabilityError(f"outcome probabilities sum to {total:.12g}")
    if outcome is None:
        outcome = _sample_index(probs, rng)
    outcome = int(outcome)
    if not 0 <= outcome < len(pvm):
        raise EntmonoError(f"outcome {outcome} out of range")
    p = float(probs[outcome])
    if p <= 0.0:
        raise ProbabilityError(f"outcome {pvm.labels[outcome]!r} has zero probability")
    proj = pvm.projectors[outcome]
    if state.is_vector:
        post = proj @ state.data / np.sqrt(p)
        post = post / np.linalg.norm(post)
    else:
        post = proj @ state.data @ proj / p
        post = post / np.real(np.trace(post))
    return outcome, QuantumState(state.dims, post), p


@dataclass(frozen=True)
class Step:
    actor: str
    action: str
    outcome: str
    probability: float


@dataclass
class Transcript:
    """Ordered record of a protocol run.

    ``final_state`` is the state held by the receiving side at the end.
    ``joint_state`` keeps the full register for inspection.
    """

    steps: list[Step] = field(default_factory=list)
    final_state: QuantumState | None = None
    joint_state: QuantumState | None = None

    def record(self, actor: str, action: str, outcome: str = "", probability: float = 1.0):
        if actor not in ("A", "B"):
            raise EntmonoError(f"unknown actor {actor!r}")
        if not -1e-12 <= probability <= 1.0 + 1e-12:
            raise ProbabilityError(f"step probability {probability} outside [0, 1]")
        self.steps.append(Step(actor, action, outcome, float(min(max(probability, 0.0), 1.0))))

    @property
    def path_probability(self) -> float:
        return float(np.prod([s.probability for s in self.steps])) if self.steps else 1.0

    @property
    def outcomes(self) -> list[str]:
        return [s.outcome for s in self.steps if s.outcome]

    def to_dict(self) -> dict:
        return {
            "steps": [
                {"actor": s.actor, "action": s.action, "outcome": s.outcome,
                 "probability": s.probability}
                for s in self.steps
            ],
            "path_probability": self.path_probability,
            "final_state": self.final_state.to_dict() if self.final_state is not None else None,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _check_unitary(u: np.ndarray, name: str) -> np.ndarray:
    u = la.as_matrix(u)
    if np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) > UNITARY_TOL:
        raise EntmonoError(f"{name} is not unitary")
    return u


def _qubit_input(psi) -> np.ndarray:
    if isinstance(psi, QuantumState):
        if not psi.is_vector:
            raise EntmonoError("input must be a pure state")
        psi = psi.data
    v = np.asarray(psi, dtype=complex).reshape(-1)
    if v.size != 2:
        raise DimensionMismatchError("input must be a single qubit")
    return validate([2], v, "pure").data


def _extract_tail(joint: np.ndarray, head_dim: int, head_index: int) -> np.ndarray:
    """State of the remaining register once the leading register is known to be ``head_index``."""
    tail = joint.reshape(head_dim, -1)[head_index]
    return tail / np.linalg.norm(tail)


# ---------------------------------------------------------------- teleportation

TELEPORT_LABELS = ("00", "01", "10", "11")
# CNOT from particle 1 onto particle 2, then a Hadamard on particle 1
TELEPORT_UNITARY = np.kron(la.HADAMARD, IDENTITY_2) @ CNOT


def teleport_correction(i: int, j: int) -> np.ndarray:
    """Correction ``Z^i X^j`` applied by B after receiving bits ``(i, j)``."""
    return np.linalg.matrix_power(SIGMA_Z, i) @ np.linalg.matrix_power(SIGMA_X, j)


@lru_cache(maxsize=None)
def _teleport_pvm() -> PVM:
    return local_pvm(computational_pvm(4, TELEPORT_LABELS), [4, 2], 0)


@lru_cache(maxsize=None)
def _ancilla_pvm() -> PVM:
    return local_pvm(computational_pvm(2), [2, 2, 2], 0)


def teleport(psi, rng=None, outcome: int | None = None, correct: bool = True) -> Transcript:
    """Teleport the qubit ``psi`` from A to B.

    Particles are ordered ``(1, 2, 3)``; A holds 1 and 2, B holds 3, and
    particles 2 and 3 start in ``(|00> + |11>)/sqrt(2)``.

    Parameters
    ----------
    psi : array_like or QuantumState
        Normalised single-qubit input.
    rng : seed or Generator, optional
    outcome : int, optional
        Force one of the four branches (``2*i + j``).
    correct : bool
        Skip B's correction when ``False``; only useful for showing that
        the classical bits are needed.
    """
    v = _qubit_input(psi)
    t = Transcript()
    joint = np.kron(v, max_entangled(2).data)
    t.record("A", "prepare |psi>_1 (x) |Phi+>_23")
    joint = np.kron(TELEPORT_UNITARY, IDENTITY_2) @ joint
    t.record("A", "apply CNOT_12 then H_1")
    pvm = _teleport_pvm()
    k, post, p = pvm_measure(QuantumState((4, 2), joint), pvm, rng, outcome)
    label = TELEPORT_LABELS[k]
    t.record("A", "measure particles 1,2 in the computational basis", label, p)
    t.record("A", "send two classical bits", label)
    i, j = divmod(k, 2)
    joint = post.data
    if correct:
        joint = np.kron(np.eye(4), teleport_correction(i, j)) @ joint
        t.record("B", "apply Z^i X^j", f"Z^{i}X^{j}")
    t.joint_state = QuantumState((2, 2, 2), joint)
    t.final_state = QuantumState((2,), _extract_tail(joint, 4, k))
    return t


def teleport_branches(psi, correct: bool = True) -> list[Transcript]:
    """All four teleportation branches, in outcome order, without sampling."""
    return [teleport(psi, outcome=k, correct=correct) for k in range(4)]


# ------------------------------------------------------ Bell pair conversion

def conversion_unitary(alpha: complex, beta: complex) -> np.ndarray:
    """Two-qubit unitary with ``|00> -> a|00> + b|11>`` and ``|01> -> b|01> + a|10>``.

    The two remaining columns are completed by Gram-Schmidt over the
    standard basis, taken in the order ``|10>, |11>, |00>, |01>``.
    """
    cols = [
        np.array([alpha, 0, 0, beta], dtype=complex),
        np.array([0, beta, alpha, 0], dtype=complex),
    ]
    for k in (2, 3, 0, 1):
        if len(cols) == 4:
            break
        v = la.ket(k, 4)
        for c in cols:
            v = v - np.vdot(c, v) * c
        n = np.linalg.norm(v)
        if n > 1e-8:
            cols.append(v / n)
    u = np.column_stack(cols)
    return _check_unitary(u, "conversion unitary")


def _target_amplitudes(alpha, beta) -> tuple[complex, complex]:
    alpha, beta = complex(alpha), complex(beta)
    n = abs(alpha) ** 2 + abs(beta) ** 2
    if abs(n - 1.0) > NORM_TOL:
        raise NotNormalizedError(f"|alpha|^2 + |beta|^2 = {n:.12g}")
    return alpha, beta


def locc_prepare_pure(alpha: complex, beta: complex, rng=None,
                      outcome: int | None = None) -> Transcript:
    """Convert a Bell pair into ``alpha|00> + beta|11>`` by LOCC.

    A holds an ancilla (particle 1, starting in ``|0>``) and particle 2; B
    holds particle 3. The final state lives on particles 2 and 3.
    """
    alpha, beta = _target_amplitudes(alpha, beta)
    t = Transcript()
    joint = np.kron(la.ket(0, 2), max_entangled(2).data)
    t.record("A", "prepare |0>_1 (x) |Phi+>_23")
    joint = np.kron(conversion_unitary(alpha, beta), IDENTITY_2) @ joint
    t.record("A", "apply conversion unitary on particles 1,2")
    pvm = _ancilla_pvm()
    k, post, p = pvm_measure(QuantumState((2, 2, 2), joint), pvm, rng, outcome)
    t.record("A", "measure particle 1 in the computational basis", str(k), p)
    t.record("A", "send one classical bit", str(k))
    joint = post.data
    if k == 1:
        joint = la.embed(SIGMA_X, [2, 2, 2], 2) @ joint
        t.record("B", "apply sigma_x", "X")
    t.joint_state = QuantumState((2, 2, 2), joint)
    t.final_state = QuantumState((2, 2), _extract_tail(joint, 2, k))
    return t


def locc_prepare_branches(alpha: complex, beta: complex) -> list[Transcript]:
    """Both measurement branches of :func:`locc_prepare_pure` with nonzero probability."""
    out = []
    for k in (0, 1):
        try:
            out.append(locc_prepare_pure(alpha, beta, outcome=k))
        except ProbabilityError:
            continue
    return out


@dataclass(frozen=True)
class EnsembleEntry:
    probability: float
    alpha: complex
    beta: complex
    u: np.ndarray = field(default_factory=lambda: IDENTITY_2)
    v: np.ndarray = field(default_factory=lambda: IDENTITY_2)

    def target(self) -> np.ndarray:
        phi = np.array([self.alpha, 0, 0, self.beta], dtype=complex)
        return np.kron(self.u, self.v) @ phi


def _coerce_ensemble(ensemble) -> list[EnsembleEntry]:
    entries = []
    for item in ensemble:
        e = item if isinstance(item, EnsembleEntry) else EnsembleEntry(*item)
        if e.probability < 0:
            raise ProbabilityError("negative ensemble probability")
        _target_amplitudes(e.alpha, e.beta)
        u = _check_unitary(e.u, "U")
        v = _check_unitary(e.v, "V")
        if u.shape != (2, 2) or v.shape != (2, 2):
            raise DimensionMismatchError("local unitaries must be 2x2")
        entries.append(EnsembleEntry(float(e.probability), complex(e.alpha), complex(e.beta), u, v))
    if not entries:
        raise EntmonoError("empty ensemble")
    total = sum(e.probability for e in entries)
    if abs(total - 1.0) > NORM_TOL:
        raise ProbabilityError(f"ensemble probabilities sum to {total:.12g}")
    return entries


def ensemble_target(ensemble) -> np.ndarray:
    """``sum_i p_i |phi_i><phi_i|`` for an ensemble accepted by :func:`locc_prepare_mixed`."""
    return sum(e.probability * la.projector(e.target()) for e in _coerce_ensemble(ensemble))


def locc_prepare_mixed(ensemble, rng=None) -> Transcript:
    """Sample a member ``(p, alpha, beta, U, V)`` and prepare ``(U (x) V)(alpha|00> + beta|11>)``."""
    entries = _coerce_ensemble(ensemble)
    gen = make_rng(rng)
    probs = np.array([e.probability for e in entries])
    idx = _sample_index(probs, gen)
    e = entries[idx]
    t = Transcript()
    t.record("A", "draw ensemble member", str(idx), e.probability)
    t.record("A", "announce ensemble member", str(idx))
    inner = locc_prepare_pure(e.alpha, e.beta, gen)
    t.steps.extend(inner.steps)
    t.record("A", "apply local unitary U")
    t.record("B", "apply local unitary V")
    final = np.kron(e.u, e.v) @ inner.final_state.data
    t.final_state = QuantumState((2, 2), final)
    t.joint_state = inner.joint_state
    return t


def empirical_density(transcripts) -> np.ndarray:
    """Average of the final-state projectors over a list of runs."""
    mats = [t.final_state.density_matrix() for t in transcripts]
    return np.mean(mats, axis=0)
