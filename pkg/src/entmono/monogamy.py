"""
Monogamy checks over tripartite states.

A :class:`MonogamyTriple` stores ``(E_AB, E_AC, E_A(BC))`` for one state and
one measure. Supported measures:

``concurrence``
    Two-qubit concurrence on the pairs, ``2 sqrt(det rho_A)`` across A|BC.
``concurrence_sq``
    Squares of the above (the CKW quantities).
``eof``
    Entanglement of formation; closed form on qubit pairs, convex roof
    otherwise, and the exact entropy of entanglement across A|BC.
``ree``
    Heuristic relative entropy of entanglement on the pairs (upper bound),
    exact entropy across A|BC. Slow; meant for small scans.

Scans draw Haar-random pure states with per-sample seeds derived from a
master seed, so a report depends only on ``(measure, dims, n_samples, seed)``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import measures as ms
from .errors import DimensionMismatchError, EntmonoError, StateKindError
from .states import QuantumState, _as_state, bell_state, haar_random_pure, product_state, sample_seed

MEASURES = ("concurrence", "concurrence_sq", "eof", "ree")
CKW_TOL = 1e-9
MONOTONE_TOL = 1e-8
ALPHA_RANGE = (1.0, 256.0)
ALPHA_ITERATIONS = 60
ALPHA_SLACK = 1e-9

_PAIR_CFG = ms.OptimizerConfig(restarts=4, max_sweeps=200)


@dataclass(frozen=True)
class MonogamyTriple:
    e_ab: float
    e_ac: float
    e_abc: float
    measure_id: str
    state_ref: str = ""

    @property
    def slack(self) -> float:
        """Margin of the relation the measure is checked against.

        CKW for ``concurrence_sq`` (sum) and ``concurrence`` (Euclidean
        norm); partial-trace monotonicity ``E_A(BC) >= max`` otherwise.
        """
        if self.measure_id == "concurrence_sq":
            return self.e_abc - self.e_ab - self.e_ac
        if self.measure_id == "concurrence":
            return self.e_abc - math.hypot(self.e_ab, self.e_ac)
        return self.e_abc - max(self.e_ab, self.e_ac)

    @property
    def monotonicity_slack(self) -> float:
        return self.e_abc - max(self.e_ab, self.e_ac)

    def swapped(self) -> "MonogamyTriple":
        return MonogamyTriple(self.e_ac, self.e_ab, self.e_abc, self.measure_id, self.state_ref)


@dataclass(frozen=True)
class BoundParams:
    """Constant ``c``, exponent and local dimensions of the dimension-weighted bounds.

    ``c`` is not known numerically, so bound values are parametric in it.
    ``exponent=None`` selects 8 for ``bound_45`` and 4 for ``bound_46``.
    """

    c: float = 1.0
    exponent: float | None = None
    dims: tuple[int, int, int] = (2, 2, 2)

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError("constant c must be positive")
        if len(self.dims) != 3 or min(self.dims) < 2:
            raise ValueError("dims must be three integers >= 2")


def default_tolerance(measure_id: str) -> float:
    return CKW_TOL if measure_id.startswith("concurrence") else MONOTONE_TOL


@dataclass
class ScanReport:
    measure_id: str
    dims: tuple[int, ...]
    master_seed: int
    samples: list[MonogamyTriple] = field(default_factory=list)
    tolerance: float = CKW_TOL
    alpha_star: float | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def slacks(self) -> np.ndarray:
        return np.array([t.slack for t in self.samples])

    @property
    def violations(self) -> int:
        return int(np.sum(self.slacks < -self.tolerance)) if self.samples else 0

    @property
    def min_slack(self) -> float | None:
        return float(self.slacks.min()) if self.samples else None

    def table(self) -> np.ndarray:
        """Columns ``e_ab, e_ac, e_abc, x, y`` with ``x, y`` normalised by ``e_abc``."""
        if not self.samples:
            return np.zeros((0, 5))
        arr = np.array([[t.e_ab, t.e_ac, t.e_abc] for t in self.samples])
        z = arr[:, 2]
        with np.errstate(divide="ignore", invalid="ignore"):
            x = np.where(z > 0, arr[:, 0] / z, 0.0)
            y = np.where(z > 0, arr[:, 1] / z, 0.0)
        return np.column_stack([arr, x, y])

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["sample_index", "e_ab", "e_ac", "e_abc", "slack"])
        for i, t in enumerate(self.samples):
            writer.writerow([i] + [fmt(v) for v in (t.e_ab, t.e_ac, t.e_abc, t.slack)])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "measure_id": self.measure_id,
            "dims": list(self.dims),
            "master_seed": self.master_seed,
            "n_samples": len(self.samples),
            "tolerance": self.tolerance,
            "violations": self.violations,
            "min_slack": self.min_slack,
            "alpha_star": self.alpha_star,
            "metadata": self.metadata,
            "samples": [dict(asdict(t), slack=t.slack) for t in self.samples],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True, default=_json_default)


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and math.isinf(obj):
        return "inf"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def fmt(value: float) -> str:
    """Nine significant digits, the fixed number format of every report."""
    return format(float(value), ".9g")


def _check_dims(measure_id: str, dims: Sequence[int]) -> tuple[int, ...]:
    if measure_id not in MEASURES:
        raise EntmonoError(f"unknown measure {measure_id!r}; choose from {MEASURES}")
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3 or min(dims) < 2:
        raise DimensionMismatchError(f"tripartite dims expected, got {dims}")
    if measure_id.startswith("concurrence") and dims != (2, 2, 2):
        raise DimensionMismatchError("concurrence measures need dims 2,2,2")
    if measure_id == "ree" and int(np.prod(dims)) > 12:
        raise DimensionMismatchError("ree scans are limited to d_A d_B d_C <= 12")
    return dims


def _pair_value(measure_id: str, rho_pair: np.ndarray, pair_dims) -> float:
    if measure_id == "eof":
        if tuple(pair_dims) == (2, 2):
            return ms.eof_two_qubit(rho_pair).value
        return ms.eof_convex_roof(rho_pair, cfg=_PAIR_CFG, dims=pair_dims).value
    if measure_id == "ree":
        return ms.ree_upper_bound(rho_pair, dims=pair_dims).value
    c = ms.concurrence_two_qubit(rho_pair)
    return c * c if measure_id == "concurrence_sq" else c


def triple(psi, measure_id: str = "concurrence_sq", state_ref: str = "") -> MonogamyTriple:
    """Evaluate ``(E_AB, E_AC, E_A(BC))`` for a pure tripartite state."""
    psi = _as_state(psi)
    if not psi.is_vector:
        raise StateKindError("triple needs a pure tripartite state; use ckw_mixed for mixed input")
    dims = _check_dims(measure_id, psi.dims)
    rho_ab = psi.reduced([0, 1])
    rho_ac = psi.reduced([0, 2])
    e_ab = _pair_value(measure_id, rho_ab, (dims[0], dims[1]))
    e_ac = _pair_value(measure_id, rho_ac, (dims[0], dims[2]))
    if measure_id in ("eof", "ree"):
        e_abc = ms.entropy_of_entanglement(psi, [0])
    else:
        c_abc = 2.0 * math.sqrt(ms.qubit_det(psi.reduced([0])))
        e_abc = c_abc * c_abc if measure_id == "concurrence_sq" else c_abc
    return MonogamyTriple(float(e_ab), float(e_ac), float(e_abc), measure_id, state_ref)


def ckw_pure(psi) -> MonogamyTriple:
    """CKW quantities ``(C^2_AB, C^2_AC, C^2_A(BC) = 4 det rho_A)`` of a three-qubit pure state."""
    psi = _as_state(psi, [2, 2, 2])
    if psi.dims != (2, 2, 2):
        raise DimensionMismatchError(f"three qubits expected, got dims {psi.dims}")
    return triple(psi, "concurrence_sq", psi.fingerprint())


def ckw_mixed(rho, cfg: ms.OptimizerConfig | None = None) -> MonogamyTriple:
    """CKW check for a three-qubit mixed state.

    ``E_A(BC)`` is the numerical convex roof of ``C^2_A(BC)`` over
    decompositions of ``rho``, an upper bound on the true value; a
    nonnegative slack is therefore a necessary check only.
    """
    rho = _as_state(rho, [2, 2, 2])
    if rho.dims != (2, 2, 2):
        raise DimensionMismatchError(f"three qubits expected, got dims {rho.dims}")
    mixed = rho.as_mixed()
    c_ab = ms.concurrence_two_qubit(mixed.reduced([0, 1]))
    c_ac = ms.concurrence_two_qubit(mixed.reduced([0, 2]))
    rhs = ms.convex_roof(rho, [0], cfg, ms.roof.TANGLE).value
    return MonogamyTriple(c_ab ** 2, c_ac ** 2, rhs, "concurrence_sq", rho.fingerprint())


def sample_state(dims: Sequence[int], master_seed: int, index: int) -> QuantumState:
    return haar_random_pure(int(np.prod(dims)), sample_seed(master_seed, index), dims)


def _evaluate_range(args):
    measure_id, dims, seed, start, stop = args
    return [
        triple(sample_state(dims, seed, i), measure_id, f"{seed}:{i}")
        for i in range(start, stop)
    ]


def worker_count() -> int:
    env = os.environ.get("ENTMONO_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise EntmonoError(f"ENTMONO_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def evaluate_samples(measure_id: str, dims, n_samples: int, seed: int,
                     workers: int = 1) -> list[MonogamyTriple]:
    """Triples for Haar-random pure states ``0 .. n_samples-1``, in index order."""
    dims = _check_dims(measure_id, dims)
    if n_samples < 0:
        raise ValueError("n_samples must be nonnegative")
    if workers <= 1 or n_samples < 200:
        return _evaluate_range((measure_id, dims, seed, 0, n_samples))
    chunk = max(50, n_samples // (4 * workers))
    jobs = [(measure_id, dims, seed, s, min(s + chunk, n_samples))
            for s in range(0, n_samples, chunk)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_evaluate_range, jobs))
    return [t for part in parts for t in part]


def power_mean(x: float, y: float, alpha: float) -> float:
    """``(x^alpha + y^alpha)^(1/alpha)``, evaluated without overflow."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    m = max(x, y)
    if m <= 0:
        return 0.0
    return m * ((x / m) ** alpha + (y / m) ** alpha) ** (1.0 / alpha)


def _holds(triples, alpha: float) -> int | None:
    """Index of the first triple violating the power-mean relation, or None."""
    for i, t in enumerate(triples):
        if power_mean(t.e_ab, t.e_ac, alpha) > t.e_abc + ALPHA_SLACK:
            return i
    return None


def alpha_star(triples, tol: float = 1e-6, lo: float = ALPHA_RANGE[0],
               hi: float = ALPHA_RANGE[1]) -> tuple[float, int | None]:
    """Smallest ``alpha`` in ``[lo, hi]`` (to ``tol``) for which every triple
    satisfies ``(E_AB^a + E_AC^a)^(1/a) <= E_A(BC)``.

    Returns ``(inf, index)`` with the first violating sample when even
    ``hi`` fails, and ``(lo, None)`` when ``lo`` already works.
    """
    triples = list(triples)
    bad = _holds(triples, hi)
    if bad is not None:
        return math.inf, bad
    if _holds(triples, lo) is None:
        return lo, None
    for _ in range(ALPHA_ITERATIONS):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if _holds(triples, mid) is None:
            hi = mid
        else:
            lo = mid
    return hi, None


def alpha_search(measure_id: str, dims=(2, 2, 2), n_samples: int = 1000, seed: int = 0,
                 tol: float = 1e-6, workers: int = 1) -> float:
    """Empirical smallest power-mean exponent ``alpha*`` over a Haar sample."""
    triples = evaluate_samples(measure_id, dims, n_samples, seed, workers)
    return alpha_star(triples, tol)[0]


def alpha_report(measure_id: str, dims=(2, 2, 2), n_samples: int = 1000, seed: int = 0,
                 tol: float = 1e-6, workers: int = 1) -> ScanReport:
    """Scan report with ``alpha_star`` filled in.

    The report's own slack keeps the measure's default relation; the
    violating sample of an infinite ``alpha_star`` goes to the metadata.
    """
    report = scan(measure_id, dims, n_samples, seed, workers)
    report.alpha_star, bad = alpha_star(report.samples, tol)
    report.metadata["alpha_range"] = list(ALPHA_RANGE)
    report.metadata["alpha_violating_sample"] = bad
    return report


def bell_with_third(phi) -> QuantumState:
    """``|Phi+>_AB (x) |phi>_C``."""
    phi = np.asarray(phi, dtype=complex)
    return product_state(bell_state(), QuantumState((phi.size,), phi / np.linalg.norm(phi)))


@dataclass
class Def15Report:
    measure_id: str
    epsilon: float
    n_samples: int
    in_slab: int
    max_e_ac: float
    targeted: list[MonogamyTriple]
    slab_samples: list[MonogamyTriple]

    @property
    def violations(self) -> int | None:
        """In-slab samples with ``e_ac > epsilon``.

        Only meaningful for ``concurrence_sq``, where the CKW inequality forces
        ``e_ac <= e_abc - e_ab``; ``None`` for other measures.
        """
        if self.measure_id != "concurrence_sq":
            return None
        return sum(t.e_ac > self.epsilon + CKW_TOL for t in self.slab_samples)

    def to_dict(self) -> dict:
        return {
            "measure_id": self.measure_id,
            "epsilon": self.epsilon,
            "violations": self.violations,
            "n_samples": self.n_samples,
            "in_slab": self.in_slab,
            "max_e_ac": self.max_e_ac,
            "targeted": [asdict(t) for t in self.targeted],
        }


def def15_probe(measure_id: str, dims=(2, 2, 2), n_samples: int = 1000, seed: int = 0,
                epsilon: float = 1e-3, n_targeted: int = 8, workers: int = 1) -> Def15Report:
    """Probe the equality condition: when ``E_A(BC) - E_AB < epsilon``, how
    large can ``E_AC`` be?

    The probe set is the Haar sample plus ``n_targeted`` states
    ``Bell_AB (x) |phi>_C`` (``|phi>`` seeded random), which sit exactly on
    ``E_A(BC) = E_AB``.
    """
    dims = _check_dims(measure_id, dims)
    triples = evaluate_samples(measure_id, dims, n_samples, seed, workers)
    targeted = []
    if dims[:2] == (2, 2):
        for j in range(n_targeted):
            phi = haar_random_pure(dims[2], sample_seed(seed, j, stream=1)).data
            targeted.append(triple(bell_with_third(phi), measure_id, f"bell:{j}"))
    slab = [t for t in triples + targeted if t.e_abc - t.e_ab < epsilon]
    return Def15Report(
        measure_id=measure_id,
        epsilon=epsilon,
        n_samples=n_samples,
        in_slab=len(slab),
        max_e_ac=max((t.e_ac for t in slab), default=0.0),
        targeted=targeted,
        slab_samples=slab,
    )


BOUND_KINDS = ("f_sum", "f_euclid", "f_piecewise_44", "bound_45", "bound_46", "power_mean")


def _dimension_weighted(e_ab, e_ac, params: BoundParams, exponent: float) -> float:
    da, db, dc = params.dims
    w_c = params.c / (da * dc * math.log2(min(da, dc)) ** exponent)
    w_b = params.c / (da * db * math.log2(min(da, db)) ** exponent)
    return max(e_ab + w_c * e_ac ** exponent, e_ac + w_b * e_ab ** exponent)


def bound_eval(kind: str, point, params: BoundParams | None = None,
               alpha: float | None = None) -> float:
    """Evaluate a candidate monogamy function ``f(E_AB, E_AC)`` at ``point``.

    ``point`` is ``(e_ab, e_ac, e_abc)``; ``e_abc`` is only used by the
    piecewise function, whose second branch applies when both arguments
    exceed ``4/5 e_abc``.
    """
    params = params or BoundParams()
    e_ab, e_ac, e_abc = (float(v) for v in point)
    if min(e_ab, e_ac, e_abc) < 0:
        raise ValueError("bound arguments must be nonnegative")
    if kind == "f_sum":
        return e_ab + e_ac
    if kind == "f_euclid":
        return math.hypot(e_ab, e_ac)
    if kind == "f_piecewise_44":
        edge = 0.8 * e_abc
        if e_ab > edge and e_ac > edge:
            return e_ab + e_ac - edge
        return max(e_ab, e_ac)
    if kind == "bound_45":
        return _dimension_weighted(e_ab, e_ac, params, params.exponent or 8)
    if kind == "bound_46":
        return _dimension_weighted(e_ab, e_ac, params, params.exponent or 4)
    if kind == "power_mean":
        if alpha is None:
            raise ValueError("power_mean needs alpha")
        return power_mean(e_ab, e_ac, alpha)
    raise EntmonoError(f"unknown bound kind {kind!r}; choose from {BOUND_KINDS}")


def scan(measure_id: str, dims=(2, 2, 2), n_samples: int = 1000, seed: int = 0,
         workers: int = 1, tolerance: float | None = None) -> ScanReport:
    """Evaluate a Haar sample and collect it in a :class:`ScanReport`."""
    dims = _check_dims(measure_id, dims)
    samples = evaluate_samples(measure_id, dims, n_samples, seed, workers)
    meta = {"sampler": "haar_pure", "relation": _relation(measure_id)}
    if measure_id == "ree":
        meta["pair_values"] = "heuristic_upper_bound"
    return ScanReport(measure_id, dims, seed, samples,
                      tolerance if tolerance is not None else default_tolerance(measure_id),
                      metadata=meta)


def _relation(measure_id: str) -> str:
    return {
        "concurrence_sq": "e_abc >= e_ab + e_ac",
        "concurrence": "e_abc >= sqrt(e_ab^2 + e_ac^2)",
    }.get(measure_id, "e_abc >= max(e_ab, e_ac)")


def region_scan(measure_id: str, dims=(2, 2, 2), n_samples: int = 1000, seed: int = 0,
                workers: int = 1) -> tuple[ScanReport, np.ndarray]:
    """Scan plus the plot table ``(e_ab, e_ac, e_abc, e_ab/e_abc, e_ac/e_abc)``."""
    report = scan(measure_id, dims, n_samples, seed, workers)
    return report, report.table()


def ckw_mixed_report(states, cfg: ms.OptimizerConfig | None = None, master_seed: int = 0) -> ScanReport:
    """Collect :func:`ckw_mixed` triples; the report is flagged as a heuristic check."""
    samples = [ckw_mixed(s, cfg) for s in states]
    return ScanReport("concurrence_sq", (2, 2, 2), master_seed, samples, CKW_TOL,
                      metadata={"rhs": "convex_roof_upper_bound",
                                "check": "necessary condition only"})


# ------------------------------------------------------------------ plot data

FIG9_ALPHAS = (2.0, 10.0, 15.0, 50.0)


def table_csv(header: Sequence[str], rows) -> str:
    """CSV text with LF line endings and nine significant digits."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(header))
    for row in rows:
        writer.writerow([v if isinstance(v, (int, str)) else fmt(v) for v in row])
    return buf.getvalue()


def eof_curve(points: int = 1000):
    """Rows ``(C^2, E_F)`` on a uniform grid of ``C^2`` in ``[0, 1]``, endpoints included."""
    c2 = np.linspace(0.0, 1.0, points)
    rows = [(float(x), ms.eof_from_concurrence(math.sqrt(x))) for x in c2]
    return ("c_squared", "eof"), rows


def region_table(report: ScanReport, bound: str | None = None,
                 params: BoundParams | None = None, alpha: float | None = None):
    """Scatter rows ``(sample_index, e_ab, e_ac, e_abc, x, y[, bound])``.

    With ``bound`` set, the named bound function is evaluated at each point.
    """
    header = ["sample_index", "e_ab", "e_ac", "e_abc", "x", "y"]
    if bound is not None:
        header.append(bound)
    rows = []
    for i, r in enumerate(report.table()):
        row = [i] + [float(v) for v in r]
        if bound is not None:
            row.append(bound_eval(bound, r[:3], params, alpha))
        rows.append(row)
    return tuple(header), rows


def power_mean_curves(alphas: Sequence[float] = FIG9_ALPHAS, e_abc: float = 1.0,
                      points: int = 101):
    """Level sets ``(x^a + y^a)^(1/a) = e_abc`` for each ``a`` in ``alphas``.

    Parametrised by ``theta`` in ``[0, pi/2]`` as ``x = e_abc cos(theta)^(2/a)``,
    ``y = e_abc sin(theta)^(2/a)``; an odd ``points`` puts ``x = y`` on the grid.
    """
    theta = np.linspace(0.0, math.pi / 2, points)
    c, s = np.abs(np.cos(theta)), np.abs(np.sin(theta))
    c[-1] = 0.0
    rows = []
    for a in alphas:
        xs = e_abc * c ** (2.0 / a)
        ys = e_abc * s ** (2.0 / a)
        rows.extend((float(a), float(x), float(y)) for x, y in zip(xs, ys))
    return ("alpha", "x", "y"), rows
