"""
Command-line interface.

Every subcommand is a thin wrapper around one library call. Exit codes:
0 success, 1 computation or I/O error, 2 usage error, 3 a scan found an
inequality violation beyond tolerance.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import measures as ms
from . import monogamy as mg
from . import protocols as pr
from . import states as st
from .errors import EntmonoError

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_VIOLATION = 3

SCAN_KINDS = ("ckw", "alpha", "def15", "region")
PLOT_KINDS = ("fig2", "fig3", "fig9")


@dataclass
class RunConfig:
    command: str
    subcommand: str | None = None
    state_path: Path | None = None
    measure_id: str | None = None
    dims: tuple[int, ...] = (2, 2, 2)
    n_samples: int = 1000
    master_seed: int = 0
    out_path: Path | None = None
    restarts: int | None = None
    constant_c: float = 1.0
    extra: dict = field(default_factory=dict)

    def optimizer(self) -> ms.OptimizerConfig:
        if self.restarts is None:
            return ms.OptimizerConfig(seed=self.master_seed)
        return ms.OptimizerConfig(restarts=self.restarts, seed=self.master_seed)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _dims(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not dims or any(d < 1 for d in dims):
        raise argparse.ArgumentTypeError(f"dimensions must be positive, got {text!r}")
    return dims


def _nonneg_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative, got {v}")
    return v


def _pos_int(text: str) -> int:
    v = _nonneg_int(text)
    if v == 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _pos_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {v}")
    return v


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a complex number, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="entmono", description="Entanglement measures and monogamy checks.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, dims_default=(2, 2, 2)):
        p.add_argument("--seed", type=_nonneg_int, default=0, help="master seed (default 0)")
        p.add_argument("--out", type=Path, help="output file")
        p.add_argument("--dims", type=_dims, default=dims_default,
                       help="comma-separated subsystem dimensions")

    p = sub.add_parser("compute", help="evaluate a measure on a state file")
    p.add_argument("--measure", required=True, choices=ms.COMPUTE_MEASURES)
    p.add_argument("--state", required=True, type=Path)
    p.add_argument("--cut", type=_dims, help="subsystem indices on side A (default 0)")
    p.add_argument("--restarts", type=_pos_int)
    p.add_argument("--seed", type=_nonneg_int, default=0)
    p.add_argument("--out", type=Path)

    p = sub.add_parser("scan", help="monogamy scans over Haar-random pure states")
    p.add_argument("kind", choices=SCAN_KINDS)
    p.add_argument("--measure", choices=mg.MEASURES)
    p.add_argument("--samples", type=_nonneg_int, default=1000)
    p.add_argument("--epsilon", type=_pos_float, default=1e-3, help="slab width for def15")
    p.add_argument("--bound", choices=mg.BOUND_KINDS, help="bound column for region tables")
    p.add_argument("--alpha", type=_pos_float, help="exponent for the power_mean bound")
    p.add_argument("--constant-c", type=_pos_float, default=1.0, dest="constant_c")
    common(p)

    p = sub.add_parser("teleport", help="teleport a qubit and print the transcript")
    p.add_argument("--state", type=Path, help="single-qubit state file (random if omitted)")
    p.add_argument("--exhaustive", action="store_true", help="enumerate all four branches")
    p.add_argument("--seed", type=_nonneg_int, default=0)
    p.add_argument("--out", type=Path)

    p = sub.add_parser("prepare", help="convert a Bell pair into alpha|00> + beta|11>")
    p.add_argument("--alpha", type=_complex, required=True)
    p.add_argument("--beta", type=_complex, required=True)
    p.add_argument("--exhaustive", action="store_true", help="enumerate both branches")
    p.add_argument("--seed", type=_nonneg_int, default=0)
    p.add_argument("--out", type=Path)

    p = sub.add_parser("random", help="write a seeded random state file")
    p.add_argument("--kind", choices=("pure", "mixed"), default="pure")
    p.add_argument("--rank", type=_pos_int, help="environment dimension for mixed states")
    common(p, dims_default=(2, 2))

    p = sub.add_parser("plotdata", help="emit CSV data for the figures")
    p.add_argument("kind", choices=PLOT_KINDS)
    p.add_argument("--measure", choices=mg.MEASURES)
    p.add_argument("--samples", type=_nonneg_int, default=1000)
    p.add_argument("--points", type=_pos_int, help="grid size (1000 for fig2, 101 for fig9)")
    p.add_argument("--bound", choices=mg.BOUND_KINDS)
    p.add_argument("--alpha", type=_pos_float)
    p.add_argument("--constant-c", type=_pos_float, default=1.0, dest="constant_c")
    p.add_argument("--e-abc", type=_pos_float, default=1.0, dest="e_abc")
    common(p)
    return parser


def parse_args(argv=None) -> RunConfig:
    """Parse ``argv`` into a :class:`RunConfig`; usage errors exit with status 2."""
    ns = build_parser().parse_args(argv)
    cfg = RunConfig(
        command=ns.command,
        subcommand=getattr(ns, "kind", None),
        state_path=getattr(ns, "state", None),
        measure_id=getattr(ns, "measure", None),
        dims=getattr(ns, "dims", (2, 2, 2)),
        n_samples=getattr(ns, "samples", 1000),
        master_seed=ns.seed,
        out_path=ns.out,
        restarts=getattr(ns, "restarts", None),
        constant_c=getattr(ns, "constant_c", 1.0),
    )
    for key in ("cut", "epsilon", "bound", "alpha", "exhaustive", "rank", "points", "e_abc"):
        if hasattr(ns, key):
            cfg.extra[key] = getattr(ns, key)
    if ns.command == "prepare":
        cfg.extra["alpha"], cfg.extra["beta"] = ns.alpha, ns.beta
    if ns.command == "random":
        cfg.subcommand = ns.kind
    if ns.command == "scan":
        _check_scan(cfg)
    return cfg


def _usage(message: str):
    sys.stderr.write(f"entmono: error: {message}\n")
    raise SystemExit(EXIT_USAGE)


def _check_scan(cfg: RunConfig):
    if cfg.subcommand == "ckw":
        if cfg.measure_id not in (None, "concurrence_sq"):
            _usage("argument --measure: scan ckw uses concurrence_sq")
        cfg.measure_id = "concurrence_sq"
    elif cfg.measure_id is None:
        cfg.measure_id = "concurrence" if cfg.subcommand == "alpha" else "concurrence_sq"
    if len(cfg.dims) != 3:
        _usage(f"argument --dims: scans need three dimensions, got {len(cfg.dims)}")
    if cfg.extra.get("bound") == "power_mean" and cfg.extra.get("alpha") is None:
        _usage("argument --alpha: required by --bound power_mean")


def _write(cfg: RunConfig, text: str):
    if cfg.out_path is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    with open(cfg.out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _wants_json(cfg: RunConfig) -> bool:
    return cfg.out_path is not None and cfg.out_path.suffix.lower() == ".json"


def _json(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True, default=str) + "\n"


def _run_compute(cfg: RunConfig) -> int:
    state = st.load_state(cfg.state_path)
    res = ms.compute(state, cfg.measure_id, cfg.optimizer(), cfg.extra.get("cut"))
    print(f"value={res.value:.6f} method={res.method.value}")
    if cfg.out_path is not None:
        _write(cfg, _json({
            "measure": cfg.measure_id,
            "value": mg.fmt(res.value),
            "method": res.method.value,
            "iterations": res.iterations,
            "residual": mg.fmt(res.residual),
            "converged": res.converged,
        }))
    return EXIT_OK


def _run_scan(cfg: RunConfig) -> int:
    workers = mg.worker_count()
    kind = cfg.subcommand
    if kind == "def15":
        rep = mg.def15_probe(cfg.measure_id, cfg.dims, cfg.n_samples, cfg.master_seed,
                             cfg.extra["epsilon"], workers=workers)
        print(f"in_slab={rep.in_slab} max_e_ac={mg.fmt(rep.max_e_ac)} "
              f"epsilon={mg.fmt(rep.epsilon)} violations={rep.violations}")
        if cfg.out_path is not None:
            _write(cfg, _json(rep.to_dict()))
        return EXIT_VIOLATION if rep.violations else EXIT_OK

    if kind == "alpha":
        report = mg.alpha_report(cfg.measure_id, cfg.dims, cfg.n_samples, cfg.master_seed,
                                 workers=workers)
        print(f"alpha_star={mg.fmt(report.alpha_star)} samples={len(report.samples)}")
        if cfg.out_path is not None:
            _write(cfg, report.to_json() if _wants_json(cfg) else report.to_csv())
        return EXIT_VIOLATION if np.isinf(report.alpha_star) else EXIT_OK

    report = mg.scan(cfg.measure_id, cfg.dims, cfg.n_samples, cfg.master_seed, workers)
    min_slack = "nan" if report.min_slack is None else mg.fmt(report.min_slack)
    print(f"samples={len(report.samples)} violations={report.violations} min_slack={min_slack}")
    if cfg.out_path is not None:
        if _wants_json(cfg):
            _write(cfg, report.to_json())
        elif kind == "region":
            params = mg.BoundParams(c=cfg.constant_c, dims=cfg.dims)
            table = mg.region_table(report, cfg.extra.get("bound"), params, cfg.extra.get("alpha"))
            _write(cfg, mg.table_csv(*table))
        else:
            _write(cfg, report.to_csv())
    return EXIT_VIOLATION if report.violations else EXIT_OK


def _qubit_input(cfg: RunConfig) -> np.ndarray:
    if cfg.state_path is not None:
        return st.load_state(cfg.state_path).data
    return st.haar_random_pure(2, cfg.master_seed).data


def _transcripts_json(transcripts) -> str:
    return _json([t.to_dict() for t in transcripts])


def _run_teleport(cfg: RunConfig) -> int:
    psi = _qubit_input(cfg)
    if cfg.extra.get("exhaustive"):
        runs = pr.teleport_branches(psi)
    else:
        runs = [pr.teleport(psi, st.make_rng(cfg.master_seed))]
    for t in runs:
        fid = abs(np.vdot(psi, t.final_state.data)) ** 2
        print(f"outcome={t.outcomes[0]} probability={mg.fmt(t.path_probability)} "
              f"fidelity={mg.fmt(fid)}")
    if cfg.out_path is not None:
        _write(cfg, _transcripts_json(runs))
    return EXIT_OK


def _run_prepare(cfg: RunConfig) -> int:
    a, b = cfg.extra["alpha"], cfg.extra["beta"]
    if cfg.extra.get("exhaustive"):
        runs = pr.locc_prepare_branches(a, b)
    else:
        runs = [pr.locc_prepare_pure(a, b, st.make_rng(cfg.master_seed))]
    for t in runs:
        mu = st.schmidt_decompose(t.final_state).mu
        print(f"outcome={t.outcomes[0]} probability={mg.fmt(t.path_probability)} "
              f"schmidt_weights={','.join(mg.fmt(m) for m in mu)}")
    if cfg.out_path is not None:
        _write(cfg, _transcripts_json(runs))
    return EXIT_OK


def _run_random(cfg: RunConfig) -> int:
    d = int(np.prod(cfg.dims))
    if cfg.subcommand == "pure":
        state = st.haar_random_pure(d, cfg.master_seed, cfg.dims)
    else:
        rank = cfg.extra.get("rank") or d
        state = st.induced_mixed(d, rank, cfg.master_seed, cfg.dims)
    if cfg.out_path is None:
        print(state.to_json())
    else:
        st.save_state(state, cfg.out_path)
    return EXIT_OK


def _run_plotdata(cfg: RunConfig) -> int:
    kind = cfg.subcommand
    points = cfg.extra.get("points")
    if kind == "fig2":
        table = mg.eof_curve(points or 1000)
    elif kind == "fig3":
        report = mg.scan(cfg.measure_id or "concurrence_sq", cfg.dims, cfg.n_samples,
                         cfg.master_seed, mg.worker_count())
        params = mg.BoundParams(c=cfg.constant_c, dims=cfg.dims)
        table = mg.region_table(report, cfg.extra.get("bound"), params, cfg.extra.get("alpha"))
    else:
        table = mg.power_mean_curves(mg.FIG9_ALPHAS, cfg.extra.get("e_abc", 1.0), points or 101)
    _write(cfg, mg.table_csv(*table))
    return EXIT_OK


_COMMANDS = {
    "compute": _run_compute,
    "scan": _run_scan,
    "teleport": _run_teleport,
    "prepare": _run_prepare,
    "random": _run_random,
    "plotdata": _run_plotdata,
}


def run(cfg: RunConfig) -> int:
    """Execute a parsed configuration and return the exit code."""
    try:
        return _COMMANDS[cfg.command](cfg)
    except (EntmonoError, ValueError, OSError) as exc:
        sys.stderr.write(f"entmono: error: {exc}\n")
        return EXIT_ERROR


def main(argv=None) -> int:
    try:
        cfg = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
