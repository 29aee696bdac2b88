"""Acceptance suite.

Each test checks one acceptance criterion at its stated tolerance and prints a
single ``PASS`` or ``FAIL`` line (visible even under output capture).
"""

import math
import time

import numpy as np
import pytest

from entmono import linalg as la
from entmono import measures as ms
from entmono import monogamy as mg
from entmono import protocols as pr
from entmono import states as S


@pytest.fixture
def verdict(capsys):
    def emit(number: int, ok: bool, detail: str) -> bool:
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number:2d}: {detail}")
        return ok
    return emit


def test_01_closed_form_vs_convex_roof(verdict):
    start = time.perf_counter()
    gaps = []
    for i in range(50):
        rho = S.induced_mixed(4, 2 + i % 3, [1, i], [2, 2])
        gaps.append(ms.eof_convex_roof(rho).value - ms.eof_two_qubit(rho).value)
    elapsed = time.perf_counter() - start
    gaps = np.array(gaps)
    good = int(np.sum((gaps >= -1e-9) & (gaps <= 1e-3)))
    ok = good >= 48 and elapsed < 60
    assert verdict(1, ok, f"{good}/50 roof gaps in [-1e-9, 1e-3], max gap {gaps.max():.2e}, {elapsed:.1f} s")


def test_02_ckw_scan(verdict):
    start = time.perf_counter()
    rep = mg.scan("concurrence_sq", n_samples=10_000, seed=0)
    elapsed = time.perf_counter() - start
    ok = len(rep.samples) == 10_000 and rep.min_slack >= -1e-9 and elapsed < 30
    assert verdict(2, ok, f"min slack {rep.min_slack:.3e} over 10^4 states, {elapsed:.1f} s")


def test_03_counterexample(verdict):
    t = mg.triple(S.counterexample_state(), "eof")
    oracle = ms.binary_entropy((1 + 1 / math.sqrt(2)) / 2)
    ok = (
        abs(t.e_abc - 1) <= 1e-12
        and abs(t.e_ab - 0.600876) <= 1e-3
        and abs(t.e_ac - 0.600876) <= 1e-3
        and abs(oracle - 0.600876) <= 1e-6
        and t.e_ab + t.e_ac > t.e_abc
    )
    assert verdict(3, ok, f"E_A(BC)={t.e_abc:.12f} E_AB={t.e_ab:.6f} E_AC={t.e_ac:.6f}")


def test_04_maximal_entropy(verdict):
    errs = [abs(ms.entropy_of_entanglement(S.max_entangled(d)) - math.log2(d)) for d in range(2, 7)]
    assert verdict(4, max(errs) <= 1e-12, f"max |S - log2 d| = {max(errs):.1e} for d = 2..6")


def _copies(psi: S.QuantumState, n: int) -> S.QuantumState:
    data = psi.data
    for _ in range(n - 1):
        data = np.kron(data, psi.data)
    return S.QuantumState((2, 2) * n, data)


def test_05_additivity(verdict):
    worst = 0.0
    for i in range(20):
        psi = S.haar_random_pure(4, [5, i], [2, 2])
        base = ms.entropy_of_entanglement(psi)
        for n in (2, 3):
            # subsystems alternate A B A B ...; keep the A copies on one side
            worst = max(worst, abs(ms.entropy_of_entanglement(_copies(psi, n), list(range(0, 2 * n, 2))) - n * base))
    assert verdict(5, worst <= 1e-9, f"max |S(psi^n) - n S(psi)| = {worst:.1e} for n = 2, 3")


def test_06_teleportation(verdict):
    fid_err = prob_err = 0.0
    for i in range(100):
        psi = S.haar_random_pure(2, [6, i]).data
        for t in pr.teleport_branches(psi):
            fid_err = max(fid_err, abs(abs(np.vdot(psi, t.final_state.data)) ** 2 - 1))
            prob_err = max(prob_err, abs(t.path_probability - 0.25))
    ok = fid_err <= 1e-12 and prob_err <= 1e-10
    assert verdict(6, ok, f"fidelity error {fid_err:.1e}, probability error {prob_err:.1e}")


def test_07_alpha_monogamy(verdict):
    a_c = mg.alpha_search("concurrence", n_samples=1000, seed=0)
    a_f = mg.alpha_search("eof", n_samples=1000, seed=0)
    ok = a_c <= 2 + 1e-3 and math.isfinite(a_f)
    assert verdict(7, ok, f"alpha* concurrence = {a_c:.6f}, alpha* eof = {a_f:.6f}")


def test_08_power_mean_limit(verdict):
    grid = (0, 0.3, 0.7, 1)
    worst = max(abs(mg.power_mean(x, y, 100) - max(x, y)) for x in grid for y in grid)
    assert verdict(8, worst <= 0.01, f"max deviation from max(x, y) = {worst:.2e}")


def test_09_fannes_continuity(verdict):
    failures = {}
    excess = {}
    for d in (2, 3, 4):
        failures[d] = 0
        excess[d] = 0.0
        for i in range(1000):
            r, s = S.induced_mixed(d, d, [d, i, 0]), S.induced_mixed(d, d, [d, i, 1])
            gap = abs(ms.von_neumann_entropy(r) - ms.von_neumann_entropy(s))
            over = gap - ms.fannes_bound(r, s)
            if over > 0:
                failures[d] += 1
                excess[d] = max(excess[d], over)
    ok = not any(failures.values())
    detail = ", ".join(f"d={d}: {failures[d]}/1000 violated (worst by {excess[d]:.3f})" for d in failures)
    assert verdict(9, ok, detail)


def test_10_separable_states(verdict):
    rng = np.random.default_rng(10)
    closed = roof = signal = 0.0
    for _ in range(20):
        members = [(float(p), [S.haar_random_pure(2, rng).data, S.haar_random_pure(2, rng).data])
                   for p in rng.dirichlet(np.ones(3))]
        rho = S.separable_mixture(members)
        closed = max(closed, abs(ms.eof_two_qubit(rho).value))
        roof = max(roof, ms.eof_convex_roof(rho).value)
        u = S.haar_random_unitary(2, rng)
        for k in range(2):
            branch = S.separable_branch_state(members, la.projector(u[:, k]), 0)
            signal = max(signal, np.max(np.abs(la.partial_trace(branch, [2, 2], 0) - rho.reduced([1]))))
    ok = closed <= 1e-10 and roof <= 1e-4 and signal <= 1e-10
    assert verdict(10, ok, f"closed form {closed:.1e}, roof {roof:.1e}, no-signalling {signal:.1e}")


def test_11_def15_probe(verdict):
    rep = mg.def15_probe("concurrence_sq", n_samples=10_000, seed=0, epsilon=1e-3)
    targeted = bool(rep.targeted) and all(t.e_ac == 0.0 for t in rep.targeted)
    ok = rep.max_e_ac <= 1e-3 and targeted
    assert verdict(11, ok, f"{rep.in_slab} in slab, max e_ac = {rep.max_e_ac:.2e}, "
                           f"{len(rep.targeted)} targeted states at e_ac = 0")
