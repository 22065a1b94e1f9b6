"""Concentration bounds, the constants of the convergence-rate theorem, and
the empirical rate experiment for eigenprojections of ``U'_n``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .empirical import build_bundle
from .errors import DegenerateDegreeError, DivergenceError, DomainError, IllPosedWindowError
from .kernel import Kernel, kernel_matrix, quadrature_weights
from .metric_space import Space, sample_uniform
from .spectral import bundle_spectrum, projection_error

__all__ = [
    "bernstein_bound",
    "RateConstants",
    "rate_constants",
    "sum_tail_bound",
    "exp_tail_bound",
    "gc_sup_error",
    "RateExperiment",
    "RateReport",
    "run_rate_experiment",
]


def bernstein_bound(M_abs: float, V: float, n: int, eps: float) -> float:
    """``min(1, 2 exp(-n eps^2 / (2V + 2 eps M / 3)))``.

    Tail bound for the mean of ``n`` centred independent variables with
    ``|X_i| <= M_abs`` and ``Var X_i <= V``.
    """
    if not (M_abs > 0 and V > 0 and n >= 1 and eps >= 0):
        raise DomainError("need M_abs > 0, V > 0, n >= 1, eps >= 0")
    return min(1.0, 2.0 * math.exp(-n * eps * eps / (2.0 * V + 2.0 * eps * M_abs / 3.0)))


@dataclass(frozen=True)
class RateConstants:
    M: float
    a: float
    C_L: float
    m: float
    C_omega: float
    m_prime: float
    alpha: float
    N: int
    gamma: float
    gamma_tilde: float
    C_tilde: float
    C_a: float
    C_e: float
    exponent: float
    admissible: bool
    probability_lower_bound: float | None
    probability_lower_bound_derived: float | None
    note: str = ""

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def rate_constants(M: float, a: float, C_L: float, m: float, C_omega: float, m_prime: float,
                   alpha: float, N: int) -> RateConstants:
    """Evaluate every constant of the eigenprojection rate theorem.

    ``probability_lower_bound`` follows the published statement, whose last
    term enters with a plus sign; ``probability_lower_bound_derived`` uses the
    minus sign produced by summing the per-n failure probabilities.  Both are
    ``None`` when the exponent condition fails or the series coefficient is
    not positive.
    """
    if not 0.0 < a <= 1.0 <= M:
        raise DomainError("need 0 < a <= 1 <= M")
    if not (C_L > 0 and C_omega > 0 and m > 0 and m_prime > 0):
        raise DomainError("C_L, C_omega, m, m_prime must be positive")
    if not alpha >= 1.0:
        raise DomainError("alpha must be >= 1")
    if not N >= 2:
        raise DomainError("N must be >= 2")
    ratio = m / m_prime
    gamma = 32.0 * M**2 / a**2 + (8.0 / 3.0) * M / a
    gamma_tilde = M**2 * gamma / a
    C_e = (a / 2.0) ** 2 / (32.0 * M**2 + (8.0 / 3.0) * M * (a / 2.0))
    C_a = C_L * (16.0 * C_omega / a) ** ratio
    C_tilde = C_L * ((8.0 * M * C_omega / (a * math.log(2.0))) * (1.0 / a + 2.0 * M / a)) ** ratio
    exponent = alpha / gamma_tilde - m / (2.0 * m_prime)
    admissible = exponent > 1.0
    denom = alpha * m_prime - gamma_tilde * m - gamma_tilde * m_prime
    bound = derived = None
    note = ""
    if not admissible:
        note = "alpha/gamma_tilde - m/(2 m') <= 1: hypothesis violated, bound omitted"
    elif denom <= 0.0:
        note = "alpha m' - gamma_tilde (m + m') <= 0: series coefficient not positive, bound omitted"
    else:
        poly = 16.0 * C_tilde / alpha ** (2.0 * ratio) * (gamma_tilde * m_prime / denom) * (N - 1) ** (-exponent)
        expo = 4.0 * (C_a / C_e) * math.exp(-(N - 1) * C_e)
        bound = 1.0 - poly + expo
        derived = 1.0 - poly - expo
    return RateConstants(M, a, C_L, m, C_omega, m_prime, alpha, int(N), gamma, gamma_tilde, C_tilde, C_a, C_e,
                         exponent, admissible, bound, derived, note)


def sum_tail_bound(sigma: float, N: int) -> float:
    """Upper bound ``1 / ((sigma - 1)(N - 1)^(sigma - 1))`` on ``sum_{n >= N} n^-sigma``."""
    if not sigma > 1.0:
        raise DivergenceError("sum of n^-sigma diverges for sigma <= 1")
    if N < 2:
        raise DomainError("N must be >= 2")
    return 1.0 / ((sigma - 1.0) * (N - 1) ** (sigma - 1.0))


def exp_tail_bound(C_e: float, N: int) -> float:
    """Upper bound ``exp(-(N - 1) C_e) / C_e`` on ``sum_{n >= N} exp(-n C_e)``."""
    if not C_e > 0.0:
        raise DivergenceError("C_e must be positive")
    if N < 2:
        raise DomainError("N must be >= 2")
    return math.exp(-(N - 1) * C_e) / C_e


def gc_sup_error(kernel: Kernel, space: Space, g: Callable, n: int, seed: int, probe_grid,
                 resolution: int | None = None, stream: tuple[int, ...] = ()) -> float:
    """``max_x |P_n g(x) - P g(x)|`` over the probe points (a lower bound on the sup).

    ``probe_grid`` is a point array or a probe count.
    """
    probes = space.probe_grid(probe_grid) if np.ndim(probe_grid) == 0 else np.asarray(probe_grid)
    if len(probes) == 0:
        raise DomainError("probe grid is empty")
    sample = sample_uniform(space, n, seed, stream)
    x = sample.points
    pn = (kernel_matrix(kernel, space, probes, x) @ np.asarray(g(x), dtype=np.float64)) / n
    w, nodes = quadrature_weights(kernel, space, probes, resolution, normalized=False)
    p = (w @ np.asarray(g(nodes), dtype=np.float64)) / len(nodes)
    return float(np.max(np.abs(pn - p)))


@dataclass
class RateExperiment:
    """Configuration of an eigenprojection rate experiment."""

    space: Space
    kernel: Kernel
    window: tuple[float, float]
    u: Callable
    n_ladder: list[int]
    trials: int
    seed: int = 0
    probe_grid: int | None = 512
    operator: str = "Lprime"
    margin: float = 1e-3
    threads: int = 1

    def __post_init__(self):
        ladder = [int(n) for n in self.n_ladder]
        if not ladder or any(b <= a for a, b in zip(ladder, ladder[1:])) or ladder[0] < 2:
            raise DomainError("n ladder must be strictly increasing with n >= 2")
        if self.trials < 1:
            raise DomainError("trials must be positive")
        lo, hi = self.window
        if self.operator == "Lprime" and lo - self.margin < 1.0 < hi + self.margin:
            raise DomainError("window must exclude 1 (essential spectrum of U'_n)")
        self.n_ladder = ladder


@dataclass
class RateReport:
    records: list[dict]
    summary: list[dict]
    exponent: float | None
    intercept: float | None
    envelope_scale: float | None
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "records": self.records,
            "summary": self.summary,
            "exponent": self.exponent,
            "intercept": self.intercept,
            "envelope_scale": self.envelope_scale,
            "metadata": self.metadata,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "RateReport":
        return cls(data["records"], data["summary"], data["exponent"], data["intercept"],
                   data["envelope_scale"], data.get("metadata", {}))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "trial", "error", "excluded_flag"])
        for rec in self.records:
            err = "" if rec["error"] is None else repr(float(rec["error"]))
            writer.writerow([rec["n"], rec["trial"], err, int(rec["excluded"])])
        return buf.getvalue()

    @staticmethod
    def read_csv(text: str) -> list[dict]:
        rows = []
        lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
        for row in csv.DictReader(lines):
            rows.append({
                "n": int(row["n"]),
                "trial": int(row["trial"]),
                "error": float(row["error"]) if row["error"] else None,
                "excluded": bool(int(row["excluded_flag"])),
            })
        return rows


def _run_trial(exp: RateExperiment, n: int, trial: int) -> dict:
    rec = {"n": n, "trial": trial, "error": None, "excluded": False, "reason": None}
    points = sample_uniform(exp.space, n, exp.seed, stream=(trial,))
    try:
        bundle = build_bundle(exp.kernel, points)
        spectrum = bundle_spectrum(bundle, exp.operator, window=exp.window, margin=exp.margin)
        grid = None if exp.probe_grid is None else exp.space.probe_grid(exp.probe_grid)
        rec["error"] = projection_error(bundle, spectrum, exp.window, exp.u, grid, exp.margin)
    except DegenerateDegreeError as exc:
        rec.update(excluded=True, reason=f"degenerate degree: {exc}")
    except IllPosedWindowError as exc:
        rec.update(excluded=True, reason=f"ill-posed window: {exc}")
    return rec


def run_rate_experiment(exp: RateExperiment) -> RateReport:
    """Median sup-norm projection error per sample size and its log-log slope.

    Trial ``t`` at every ``n`` uses the stream ``(seed, t)``, so samples are
    nested along the ladder like a single growing i.i.d. sequence.
    """
    jobs = [(n, t) for n in exp.n_ladder for t in range(exp.trials)]
    if exp.threads > 1:
        with ThreadPoolExecutor(max_workers=exp.threads) as pool:
            records = list(pool.map(lambda job: _run_trial(exp, *job), jobs))
    else:
        records = [_run_trial(exp, n, t) for n, t in jobs]
    records.sort(key=lambda r: (r["n"], r["trial"]))
    summary = []
    for n in exp.n_ladder:
        errs = np.array([r["error"] for r in records if r["n"] == n and not r["excluded"]], dtype=np.float64)
        row = {"n": n, "trials": exp.trials, "used": int(errs.size), "excluded": exp.trials - int(errs.size)}
        if errs.size:
            q25, med, q75 = np.percentile(errs, [25, 50, 75])
            row.update(median=float(med), q25=float(q25), q75=float(q75))
        else:
            row.update(median=None, q25=None, q75=None)
        summary.append(row)
    exponent = intercept = scale = None
    meds = [(s["n"], s["median"]) for s in summary if s["median"] is not None]
    if len(meds) >= 2 and all(med > 1e-9 for _, med in meds):
        ns, ms = np.array(meds).T
        exponent, intercept = (float(c) for c in np.polyfit(np.log(ns), np.log(ms), 1))
    if meds and all(n > 1 for n, _ in meds):
        scale = float(max(med * math.sqrt(n) / math.sqrt(math.log(n)) for n, med in meds))
        for s in summary:
            s["envelope"] = scale * math.sqrt(math.log(s["n"])) / math.sqrt(s["n"])
    meta = {
        "space": exp.space.to_dict() if hasattr(exp.space, "to_dict") else repr(exp.space),
        "kernel": exp.kernel.to_dict(),
        "window": list(exp.window),
        "n_ladder": exp.n_ladder,
        "trials": exp.trials,
        "seed": exp.seed,
        "operator": exp.operator,
        "probe_grid": exp.probe_grid,
        "envelope": "envelope_scale * sqrt(ln n) / sqrt(n); envelope_scale plays the role of 4 * C_bar * alpha",
    }
    return RateReport(records, summary, exponent, intercept, scale, meta)
