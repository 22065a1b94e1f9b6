"""Command-line front end.

Every command reads a JSON :class:`~lapconv.config.ExperimentConfig`.  Files
go to ``--out``; ``constants`` and ``verify`` print JSON to stdout.  Exit
codes: 0 ok, 1 verification failed, 2 config, 3 degenerate degree,
4 ill-posed window, 5 I/O.
"""
from __future__ import annotations

import argparse
import dataclasses
import datetime
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import io as lio
from ._accel import BACKEND
from .config import ExperimentConfig, load_config
from .empirical import build_bundle
from .errors import (ConfigError, DegenerateDegreeError, DomainError, EssentialSpectrumError,
                     IllPosedWindowError, UnsupportedError)
from .kernel import BallIndicator, kernel_from_dict, verify_membership
from .metric_space import Circle, Interval, Torus2, sample_uniform, space_from_dict
from .rates import RateExperiment, gc_sup_error, rate_constants, run_rate_experiment
from .reference import circle_ball_spectrum, match_reference
from .spectral import bundle_spectrum

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_DEGENERATE, EXIT_WINDOW, EXIT_IO = 0, 1, 2, 3, 4, 5
THREADS_ENV = "LAPCONV_THREADS"
COMMANDS = ("matrices", "spectrum", "rates", "constants", "gc", "verify")


class _Run:
    """Resolved config plus output helpers for one command."""

    def __init__(self, command: str, cfg: ExperimentConfig, out: Path):
        self.command = command
        self.cfg = cfg
        self.out = out
        self.hash = cfg.config_hash()
        self.files: dict[str, str] = {}

    @property
    def stamp(self) -> str:
        return f"config_hash={self.hash} seed={self.cfg.seed}"

    def path(self, name: str) -> Path:
        self.out.mkdir(parents=True, exist_ok=True)
        return self.out / name

    def record(self, name: str):
        self.files[name] = lio.sha256_file(self.out / name)

    def matrix(self, name: str, a, square: bool = True):
        lio.write_matrix_csv(self.path(f"{name}.csv"), a, self.stamp)
        self.record(f"{name}.csv")
        if square and self.cfg.binary:
            lio.write_matrix_bin(self.path(f"{name}.bin"), a)
            self.record(f"{name}.bin")

    def table(self, name: str, header, rows):
        lio.write_table_csv(self.path(name), header, rows, self.stamp)
        self.record(name)

    def text(self, name: str, text: str):
        self.path(name).write_text(text)
        self.record(name)

    def manifest(self, **extra):
        data = {
            "command": self.command,
            "config_hash": self.hash,
            "seed": self.cfg.seed,
            "backend": BACKEND,
            "config": self.cfg.to_dict(),
            **extra,
            "files": dict(sorted(self.files.items())),
            # Not covered by any checksum; the only field that varies between identical runs.
            "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        }
        self.path("manifest.json").write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _require(cfg: ExperimentConfig, *names: str):
    missing = [n for n in names if getattr(cfg, n) is None]
    if missing:
        raise ConfigError(f"config is missing {', '.join(missing)}")


def _space_kernel(cfg: ExperimentConfig):
    _require(cfg, "space", "kernel")
    return space_from_dict(cfg.space), kernel_from_dict(cfg.kernel)


def named_function(space, spec):
    """Test function from a name (``"one"``, ``"cos"``, ``"sin"``) or ``{"kind", "frequency"}``.

    ``cos``/``sin`` of frequency ``k`` are the ``k``-th Fourier modes of the
    circle (or of the first torus axis) and the ``k``-th Neumann cosine on an
    interval.
    """
    if isinstance(spec, str):
        spec = {"kind": spec}
    spec = dict(spec)
    kind = spec.pop("kind", None)
    freq = spec.pop("frequency", 1)
    if spec:
        raise ConfigError(f"unknown function keys: {sorted(spec)}")
    if kind == "one":
        return lambda x: np.ones(np.shape(space.validate(x))[:1])
    if kind not in ("cos", "sin"):
        raise ConfigError(f"unknown function kind {kind!r}")
    trig = np.cos if kind == "cos" else np.sin
    if isinstance(space, Circle):
        w = 2.0 * math.pi * freq / space.circumference
        return lambda x: trig(w * np.asarray(x, dtype=np.float64))
    if isinstance(space, Interval):
        w = math.pi * freq / space.length
        return lambda x: trig(w * np.asarray(x, dtype=np.float64))
    if isinstance(space, Torus2):
        w = 2.0 * math.pi * freq / space.circumferences[0]
        return lambda x: trig(w * np.atleast_2d(np.asarray(x, dtype=np.float64))[:, 0])
    raise ConfigError(f"function {kind!r} is not defined on {type(space).__name__}")


def cmd_matrices(run: _Run) -> int:
    cfg = run.cfg
    space, kernel = _space_kernel(run.cfg)
    _require(cfg, "n")
    points = sample_uniform(space, cfg.n, cfg.seed)
    bundle = build_bundle(kernel, points)
    run.matrix("points", np.asarray(points.points, dtype=np.float64).reshape(cfg.n, -1), square=False)
    run.matrix("K", bundle.K)
    run.matrix("D", bundle.D)
    if bundle.degenerate:
        run.manifest(n=cfg.n, min_degree=bundle.min_degree, degenerate=True)
        raise DegenerateDegreeError(f"min degree {bundle.min_degree} is zero; exported K and D only")
    run.matrix("Mdiag", bundle.Mdiag[:, None], square=False)
    run.matrix("L", bundle.L)
    run.matrix("Lprime", bundle.Lprime)
    run.matrix("unnormalized_laplacian", bundle.unnormalized_laplacian())
    run.matrix("normalized_laplacian_sym", bundle.normalized_laplacian_sym())
    run.matrix("normalized_laplacian_rw", bundle.normalized_laplacian_rw())
    run.manifest(n=cfg.n, min_degree=bundle.min_degree, degenerate=False)
    return EXIT_OK


def cmd_spectrum(run: _Run) -> int:
    cfg = run.cfg
    space, kernel = _space_kernel(cfg)
    _require(cfg, "n")
    points = sample_uniform(space, cfg.n, cfg.seed)
    bundle = build_bundle(kernel, points)
    spectrum = bundle_spectrum(bundle, cfg.operator, window=cfg.window, margin=cfg.margin)
    lio.write_spectrum_csv(run.path("spectrum.csv"), spectrum, run.stamp)
    run.record("spectrum.csv")
    run.matrix("eigenvectors", spectrum.eigenvectors, square=False)
    extra = {"n": cfg.n, "operator": cfg.operator, "min_degree": bundle.min_degree,
             "multiplicities": spectrum.multiplicities}
    if isinstance(space, Circle) and isinstance(kernel, BallIndicator) and cfg.window is None:
        ref = circle_ball_spectrum(kernel.r, cfg.reference_frequencies,
                                   "Uprime" if cfg.operator == "Lprime" else "U", space.circumference)
        run.table("reference.csv", ["group", "frequency", "eigenvalue", "multiplicity"],
                  ([g, int(ref.frequencies[g]), float(ref.eigenvalues[g]), int(ref.multiplicities[g])]
                   for g in ref.sorted_groups()))
        rows = match_reference(spectrum, ref, points.points)
        run.table("matched.csv", ["group", "frequency", "reference", "multiplicity", "empirical_mean",
                                  "max_abs_error", "max_principal_angle"],
                  ([r["group"], r["frequency"], r["reference"], r["multiplicity"], r["empirical_mean"],
                    r["max_abs_error"], r["max_principal_angle"]] for r in rows))
        extra["matched_groups"] = len(rows)
    run.manifest(**extra)
    return EXIT_OK


def cmd_rates(run: _Run) -> int:
    cfg = run.cfg
    space, kernel = _space_kernel(cfg)
    _require(cfg, "n_ladder", "window")
    exp = RateExperiment(space, kernel, tuple(cfg.window), named_function(space, cfg.eigenfunction),
                         cfg.n_ladder, cfg.trials, cfg.seed, cfg.probe_grid, cfg.operator, cfg.margin,
                         cfg.threads)
    report = run_rate_experiment(exp)
    report.metadata.update(config_hash=run.hash, eigenfunction=cfg.eigenfunction)
    run.text("rates.json", report.to_json() + "\n")
    run.text("rates.csv", f"# {run.stamp}\n" + report.to_csv())
    series = {"median": [(s["n"], s["median"]) for s in report.summary if s["median"] is not None]}
    if report.envelope_scale is not None:
        series["envelope"] = [(s["n"], s["envelope"]) for s in report.summary]
    run.text("rates.svg", lio.loglog_svg(series, f"projection error ({run.stamp})"))
    run.manifest(exponent=report.exponent, envelope_scale=report.envelope_scale,
                 excluded=sum(s["excluded"] for s in report.summary))
    return EXIT_OK


_CONSTANT_KEYS = ("M", "a", "C_L", "m", "C_omega", "m_prime", "alpha", "N")


def cmd_constants(run: _Run) -> int:
    cfg = run.cfg
    given = dict(cfg.constants or {})
    unknown = set(given) - set(_CONSTANT_KEYS)
    if unknown:
        raise ConfigError(f"unknown constants keys: {sorted(unknown)}")
    # Kernel-declared values fill in what the constants block leaves out.
    params = {"C_L": 1.0, "m": 1.0, "C_omega": 1.0, "m_prime": 1.0, "alpha": 1.0, "N": 2}
    if cfg.kernel is not None:
        k = kernel_from_dict(cfg.kernel)
        params.update({name: getattr(k, name) for name in ("M", "a", "C_omega", "m_prime")
                       if getattr(k, name) is not None})
    params.update(given)
    missing = [key for key in _CONSTANT_KEYS if key not in params]
    if missing:
        raise ConfigError(f"constants need {missing}")
    params["N"] = int(params["N"])
    rc = rate_constants(**{key: params[key] for key in _CONSTANT_KEYS})
    out = {"config_hash": run.hash, "seed": cfg.seed, **rc.to_dict()}
    print(json.dumps(out, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_gc(run: _Run) -> int:
    cfg = run.cfg
    space, kernel = _space_kernel(cfg)
    _require(cfg, "n_ladder")
    names = cfg.functions or ["one", "cos"]
    funcs = [(json.dumps(f, sort_keys=True) if isinstance(f, dict) else f, named_function(space, f)) for f in names]
    probes = space.probe_grid(cfg.probe_grid)
    jobs = [(n, t, label, g) for n in cfg.n_ladder for t in range(cfg.trials) for label, g in funcs]

    def one(job):
        n, t, label, g = job
        return n, t, label, gc_sup_error(kernel, space, g, n, cfg.seed, probes, cfg.resolution, stream=(t,))

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            rows = list(pool.map(one, jobs))
    else:
        rows = [one(job) for job in jobs]
    run.table("gc.csv", ["n", "trial", "function", "error"], rows)
    summary = []
    for label, _ in funcs:
        for n in cfg.n_ladder:
            errs = [e for m, _, lab, e in rows if m == n and lab == label]
            summary.append({"function": label, "n": n, "median": float(np.median(errs))})
    result = {"config_hash": run.hash, "seed": cfg.seed, "summary": summary}
    run.text("gc.json", json.dumps(result, indent=2, sort_keys=True) + "\n")
    series = {label: [(s["n"], s["median"]) for s in summary if s["function"] == label] for label, _ in funcs}
    run.text("gc.svg", lio.loglog_svg(series, f"sup error of P_n g ({run.stamp})"))
    run.manifest()
    print(json.dumps(result, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_verify(run: _Run) -> int:
    cfg = run.cfg
    space, kernel = _space_kernel(cfg)
    report = verify_membership(kernel, space, grid=cfg.grid, deltas=cfg.deltas, resolution=cfg.resolution)
    print(json.dumps({"config_hash": run.hash, "seed": cfg.seed, **report.to_dict()}, indent=2, sort_keys=True))
    return EXIT_OK if report.passed else EXIT_FAILED


_HANDLERS = {
    "matrices": cmd_matrices,
    "spectrum": cmd_spectrum,
    "rates": cmd_rates,
    "constants": cmd_constants,
    "gc": cmd_gc,
    "verify": cmd_verify,
}


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lapconv", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, metavar="PATH", help="JSON experiment config")
    parser.add_argument("--out", default="lapconv_out", metavar="DIR", help="output directory")
    parser.add_argument("--seed", type=_u64, metavar="U64", help="override the config seed")
    parser.add_argument("--threads", type=_positive, metavar="N",
                        help=f"worker threads for trials (default: ${THREADS_ENV}, then the config)")
    return parser


def resolve_threads(flag: int | None, config_value: int) -> int:
    """``--threads`` beats the environment variable, which beats the config."""
    if flag is not None:
        return flag
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer") from None
        if value < 1:
            raise ConfigError(f"{THREADS_ENV} must be >= 1")
        return value
    return config_value


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        cfg = load_config(args.config)
        updates = {"threads": resolve_threads(args.threads, cfg.threads)}
        if args.seed is not None:
            updates["seed"] = args.seed
        cfg = dataclasses.replace(cfg, **updates)
        return _HANDLERS[args.command](_Run(args.command, cfg, Path(args.out)))
    except (ConfigError, UnsupportedError) as exc:
        code, msg = EXIT_CONFIG, f"config error: {exc}"
    except DegenerateDegreeError as exc:
        code, msg = EXIT_DEGENERATE, f"degenerate degree: {exc}"
    except IllPosedWindowError as exc:
        code, msg = EXIT_WINDOW, f"ill-posed window: {exc}"
    except DomainError as exc:
        # Windows meeting the essential spectrum are window problems too.
        code = EXIT_WINDOW if isinstance(exc, EssentialSpectrumError) else EXIT_CONFIG
        msg = f"error: {exc}"
    except OSError as exc:
        code, msg = EXIT_IO, f"I/O error: {exc}"
    print(f"lapconv: {msg}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
