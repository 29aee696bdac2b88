import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import seeds
from oracles import partial_trace_loops
from entmono import linalg as la
from entmono import states as S
from entmono.errors import (
    DimensionMismatchError,
    EntmonoError,
    NotHermitianError,
    NotNormalizedError,
    NotPSDError,
    ProbabilityError,
    StateKindError,
    TraceNotOneError,
)


# ---------------------------------------------------------------- validate

def test_validate_examples():
    assert S.validate([2], np.diag([0.5, 0.5])).kind == "mixed"
    assert S.validate([2, 2], [1, 0, 0, 0]).kind == "pure"
    with pytest.raises(NotPSDError):
        S.validate([2], np.diag([1.001, -0.001]))


@pytest.mark.parametrize(
    "dims, raw, kind, err",
    [
        ([2, 2], [1, 0, 0], "pure", DimensionMismatchError),
        ([2], [1, 1], "pure", NotNormalizedError),
        ([2], [[1, 1], [0, 0]], "mixed", NotHermitianError),
        ([2], np.diag([0.6, 0.6]), "mixed", TraceNotOneError),
        ([2], [np.nan, 0], "pure", EntmonoError),
        ([0], [1], "pure", DimensionMismatchError),
    ],
)
def test_validate_errors(dims, raw, kind, err):
    with pytest.raises(err):
        S.validate(dims, raw, kind)


def test_flattened_density_matrix_accepted():
    s = S.validate([2], np.diag([0.25, 0.75]).reshape(-1), "mixed")
    assert s.data.shape == (2, 2)


def test_state_is_read_only():
    s = S.bell_state()
    with pytest.raises(ValueError):
        s.data[0] = 0


def test_json_round_trip(tmp_path):
    s = S.induced_mixed(4, 2, seed=3, dims=[2, 2])
    path = tmp_path / "s.json"
    S.save_state(s, path)
    back = S.load_state(path)
    assert back.dims == (2, 2) and back.kind == "mixed"
    assert np.allclose(back.data, s.data, atol=1e-15)
    obj = json.loads(path.read_text())
    assert set(obj) == {"dims", "kind", "data"}
    assert S.QuantumState.from_dict(S.bell_state().to_dict()).fingerprint() == S.bell_state().fingerprint()


def test_malformed_state_file(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(EntmonoError):
        S.load_state(path)
    path.write_text('{"dims": [2]}')
    with pytest.raises(EntmonoError):
        S.load_state(path)


# ---------------------------------------------------------------- Schmidt

def test_schmidt_product_state():
    f = S.schmidt_decompose(S.basis_state([0, 1]))
    assert f.rank == 1 and np.allclose(f.mu, [1])


def test_schmidt_bell_state():
    f = S.schmidt_decompose(S.bell_state("phi+"))
    assert f.rank == 2 and np.allclose(f.mu, [0.5, 0.5])


@given(seeds, st.sampled_from([(2, 4), (3, 3), (4, 2), (2, 3, 2)]))
def test_schmidt_invariants(seed, dims):
    psi = S.haar_random_pure(int(np.prod(dims)), seed, dims)
    f = S.schmidt_decompose(psi)
    assert f.rank <= min(dims[0], int(np.prod(dims[1:])))
    assert abs(f.mu.sum() - 1) < 1e-10
    assert np.all(f.mu > S.SCHMIDT_CUTOFF)
    assert np.max(np.abs(f.reconstruct() - psi.data)) < 1e-10
    # independent route: eigenvalues of the reduced state
    rho_a = partial_trace_loops(psi.density_matrix(), dims, list(range(1, len(dims))))
    ev = np.sort(np.linalg.eigvalsh(rho_a))[::-1][: f.rank]
    assert np.allclose(f.mu, ev, atol=1e-10)


def test_schmidt_noncontiguous_cut_reconstructs():
    psi = S.haar_random_pure(12, 5, [2, 3, 2])
    f = S.schmidt_decompose(psi, cut=[0, 2])
    assert f.rank <= 3
    assert np.max(np.abs(f.reconstruct() - psi.data)) < 1e-10


@given(seeds)
def test_schmidt_weights_invariant_under_local_unitaries(seed):
    psi = S.haar_random_pure(6, seed, [2, 3])
    u = S.haar_random_unitary(2, seed + 1)
    v = S.haar_random_unitary(3, seed + 2)
    moved = S.QuantumState((2, 3), np.kron(u, v) @ psi.data)
    assert np.allclose(S.schmidt_decompose(psi).mu, S.schmidt_decompose(moved).mu, atol=1e-10)


def test_schmidt_rejects_mixed():
    with pytest.raises(StateKindError):
        S.schmidt_decompose(S.bell_state().as_mixed())


# ---------------------------------------------------------------- constructors

def test_max_entangled_d2_is_bell():
    assert np.allclose(S.max_entangled(2).data, S.bell_state("phi+").data)


@pytest.mark.parametrize("d", [2, 3, 4, 5, 6])
def test_max_entangled_marginals(d):
    rho_a = S.max_entangled(d).reduced([0])
    assert np.max(np.abs(rho_a - np.eye(d) / d)) < 1e-12
    assert np.allclose(la.hermitian_eig(rho_a).values, 1 / d)


def test_separable_mixture_examples():
    pure = S.separable_mixture([(1.0, [la.ket(0, 2), la.ket(1, 2)])])
    assert np.allclose(pure.data, la.projector(la.ket(1, 4)))
    assert S.is_pure(pure)
    cc = S.separable_mixture([(0.5, [la.ket(0, 2), la.ket(0, 2)]), (0.5, [la.ket(1, 2), la.ket(1, 2)])])
    assert np.allclose(cc.data, np.diag([0.5, 0, 0, 0.5]))


def test_separable_mixture_errors():
    with pytest.raises(ProbabilityError):
        S.separable_mixture([(0.7, [la.ket(0, 2), la.ket(0, 2)])])
    with pytest.raises(DimensionMismatchError):
        S.separable_mixture([(0.5, [la.ket(0, 2), la.ket(0, 2)]), (0.5, [la.ket(0, 3), la.ket(0, 2)])])


def test_haar_pure_determinism_and_norm():
    a, b = S.haar_random_pure(4, 11), S.haar_random_pure(4, 11)
    assert np.array_equal(a.data, b.data)
    for seed in range(50):
        assert abs(np.linalg.norm(S.haar_random_pure(4, seed).data) - 1) < 1e-12


def test_haar_qubit_population_mean():
    pops = [abs(S.haar_random_pure(2, S.sample_seed(0, i)).data[0]) ** 2 for i in range(10_000)]
    assert abs(np.mean(pops) - 0.5) < 0.02


def test_haar_unitary_properties():
    u = S.haar_random_unitary(5, 3)
    assert np.max(np.abs(u.conj().T @ u - np.eye(5))) < 1e-12
    # second moment of |U_00|^2 is 2/(d(d+1)) for Haar unitaries
    vals = [abs(S.haar_random_unitary(3, i)[0, 0]) ** 2 for i in range(4000)]
    assert abs(np.mean(vals) - 1 / 3) < 0.02
    assert abs(np.mean(np.square(vals)) - 2 / 12) < 0.02


def test_sample_seed_streams_differ():
    a = S.haar_random_pure(2, S.sample_seed(1, 0)).data
    b = S.haar_random_pure(2, S.sample_seed(1, 0, stream=1)).data
    c = S.haar_random_pure(2, S.sample_seed(1, 1)).data
    assert not np.allclose(a, b) and not np.allclose(a, c)


def test_induced_mixed_examples():
    assert abs(S.induced_mixed(3, 1, seed=2).purity() - 1) < 1e-10
    for seed in range(100):
        rho = S.induced_mixed(3, 3, seed=seed)
        assert np.linalg.eigvalsh(rho.data).min() > 0


@given(seeds, st.integers(1, 5), st.integers(2, 4))
def test_induced_mixed_is_valid(seed, s, d):
    rho = S.induced_mixed(d, s, seed)
    S.validate([d], rho.data, "mixed")
    assert np.linalg.matrix_rank(rho.data, tol=1e-10) == min(d, s)


def test_purify_examples():
    psi = S.haar_random_pure(3, 1)
    p = S.purify(psi)
    assert p.dims == (3, 1) and np.allclose(p.data, psi.data)
    mix = S.validate([3], np.eye(3) / 3, "mixed")
    p = S.purify(mix)
    assert np.max(np.abs(p.reduced([0]) - np.eye(3) / 3)) < 1e-10
    assert np.allclose(S.schmidt_decompose(p).mu, [1 / 3] * 3)


@given(seeds, st.integers(1, 3))
def test_purify_round_trip(seed, s):
    rho = S.induced_mixed(3, s, seed)
    p = S.purify(rho)
    assert p.dims[-1] == s
    assert np.max(np.abs(p.reduced([0]) - rho.data)) < 1e-10


def test_is_pure_examples():
    assert S.is_pure(S.bell_state().as_mixed())
    assert not S.is_pure(S.validate([2], np.eye(2) / 2))
    assert not S.is_pure(S.bell_state().reduced([0]))


@given(seeds)
def test_entangled_reduced_states_are_mixed(seed):
    psi = S.haar_random_pure(9, seed, [3, 3])
    if S.schmidt_decompose(psi).rank >= 2:
        rho_a = psi.reduced([0])
        assert np.real(np.trace(rho_a @ rho_a)) < 1


def test_counterexample_state():
    s = S.counterexample_state()
    assert abs(np.linalg.norm(s.data) - 1) < 1e-15
    assert np.allclose(la.hermitian_eig(s.reduced([0])).values, [0.5, 0.5])


# ---------------------------------------------------------------- no-signalling

def _random_separable_members(rng, n_members=3, dims=(2, 2, 2)):
    p = rng.dirichlet(np.ones(n_members))
    return [
        (float(p[k]), [S.induced_mixed(d, 2, rng).data for d in dims])
        for k in range(n_members)
    ]


@given(seeds)
def test_branch_states_leave_the_rest_unchanged(seed):
    rng = np.random.default_rng(seed)
    dims = (2, 2, 2)
    members = _random_separable_members(rng, dims=dims)
    rho = S.separable_mixture(members)
    rest = rho.reduced([1, 2])
    u = S.haar_random_unitary(2, rng)
    for k in range(2):
        proj = la.projector(u[:, k])
        branch = S.separable_branch_state(members, proj, 0)
        assert np.max(np.abs(la.partial_trace(branch, dims, 0) - rest)) < 1e-10


@given(seeds)
def test_outcome_average_leaves_the_rest_unchanged(seed):
    rng = np.random.default_rng(seed)
    rho = S.separable_mixture(_random_separable_members(rng))
    u = S.haar_random_unitary(2, rng)
    avg = sum(
        la.embed(la.projector(u[:, k]), [2, 2, 2], 0) @ rho.data @ la.embed(la.projector(u[:, k]), [2, 2, 2], 0)
        for k in range(2)
    )
    assert np.max(np.abs(la.partial_trace(avg, [2, 2, 2], 0) - rho.reduced([1, 2]))) < 1e-10
