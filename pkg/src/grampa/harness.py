"""Seeded Monte-Carlo benchmark harness.

Experiments are declared as strict JSON documents (schema version 1,
unknown keys rejected) and run as independent seeded trials, optionally in
parallel processes.  Per-trial seeds derive from the base seed and a stable
hash of the sweep point and trial index, so any single cell of a sweep can
be reproduced in isolation.  Aggregation uses medians throughout.

Three experiment kinds are built in:

``bg-fd``
    Random-walk signals with Bernoulli-Gaussian first differences, dense
    Gaussian measurements at a finite SNR, swept over sampling ratios.
``ptc``
    Exactly cosparse unit vectors under a random almost-tight frame,
    noiseless Gaussian measurements, swept over (delta, rho) points; also
    drives the phase-transition bisection.
``phantom``
    The classic head phantom sampled on radial Fourier lines (realified),
    with four-direction 2D finite differences, swept over line counts.

All three recover with the posterior-mean solver and the spike-and-slab
thresholder; the threshold is tuned per trial over ``tuning_grid`` by
keeping the NSNR-maximizing value, ties toward the smaller value.
"""

from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace

import numpy as np

from .analysis import AnalysisProblem, noiseless_floor, solve
from .denoisers import SnipeParams
from .gamp import GampConfig, GampDivergedError
from .linops import FD2D_DIRECTIONS, make_fd1d, make_fd2d, make_partial_fourier_radial
from .problems import (
    add_awgn,
    gen_bg_fd_signal,
    gen_cosparse_signal,
    gen_gaussian_matrix,
    gen_tight_frame,
    noise_variance_for_snr,
    nsnr,
    shepp_logan,
)

SCHEMA_VERSION = 1
SUCCESS_NSNR = 1e6

KINDS = ("bg-fd", "ptc", "phantom")

_SWEEP_KEYS = {
    "bg-fd": ("m_over_n",),
    "ptc": ("delta", "rho", "d_over_n"),
    "phantom": ("lines",),
}


class ConfigError(ValueError):
    """Raised for malformed experiment documents."""


@dataclass(frozen=True)
class SolverSpec:
    beta0: float = 0.25
    t_max: int = 1500
    eps: float = 1e-8

    def to_config(self) -> GampConfig:
        return GampConfig(beta0=self.beta0, t_max=self.t_max, eps=self.eps, mode="mmse")


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str
    trials: int
    seed_base: int
    tuning_grid: tuple[float, ...]
    solver: SolverSpec = SolverSpec()
    # bg-fd
    n: int | None = None
    sparsity_rate: float | None = None
    snr_db: float | None = None
    sampling_ratios: tuple[float, ...] | None = None
    # ptc
    d_over_n: float | None = None
    grid: tuple[tuple[float, float], ...] | None = None
    deltas: tuple[float, ...] | None = None
    rho_bracket: tuple[float, float] = (0.05, 1.0)
    bisection_rounds: int = 6
    # phantom
    size: int | None = None
    line_counts: tuple[int, ...] | None = None
    directions: tuple[str, ...] = FD2D_DIRECTIONS
    pixel_reg: str = "nonneg"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if not self.tuning_grid:
            raise ConfigError("tuning_grid must be nonempty")


@dataclass
class TrialResult:
    kind: str
    sweep: dict
    seed: int
    tuned_param: float
    nsnr: float
    success: bool
    iterations: int
    wall_time_s: float
    x_hat: np.ndarray | None = None

    @property
    def nsnr_db(self) -> float:
        return np.inf if np.isinf(self.nsnr) else 10.0 * np.log10(max(self.nsnr, 1e-300))


# ---------------------------------------------------------------------------
# config loading

_COMMON_KEYS = {"schema_version", "kind", "trials", "seed_base", "tuning_grid", "solver"}
_KIND_KEYS = {
    "bg-fd": {"n", "sparsity_rate", "snr_db", "sampling_ratios"},
    "ptc": {"n", "d_over_n", "grid", "deltas", "rho_bracket", "bisection_rounds"},
    "phantom": {"size", "line_counts", "snr_db", "directions", "pixel_reg"},
}
_SOLVER_KEYS = {"beta0", "t_max", "eps"}


def spec_from_dict(doc: dict) -> ExperimentSpec:
    if not isinstance(doc, dict):
        raise ConfigError("experiment document must be a JSON object")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION}")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise ConfigError(f"kind must be one of {KINDS}")
    allowed = _COMMON_KEYS | _KIND_KEYS[kind]
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(f"unknown keys for kind {kind!r}: {sorted(unknown)}")

    solver_doc = doc.get("solver", {})
    if not isinstance(solver_doc, dict):
        raise ConfigError("solver must be an object")
    bad = set(solver_doc) - _SOLVER_KEYS
    if bad:
        raise ConfigError(f"unknown solver keys: {sorted(bad)}")
    solver = SolverSpec(**solver_doc)

    kwargs = dict(
        kind=kind,
        trials=int(doc["trials"]),
        seed_base=int(doc["seed_base"]),
        tuning_grid=tuple(float(v) for v in doc["tuning_grid"]),
        solver=solver,
    )
    if kind == "bg-fd":
        kwargs.update(
            n=int(doc["n"]),
            sparsity_rate=float(doc["sparsity_rate"]),
            snr_db=float(doc["snr_db"]),
            sampling_ratios=tuple(float(v) for v in doc["sampling_ratios"]),
        )
    elif kind == "ptc":
        kwargs.update(n=int(doc["n"]), d_over_n=float(doc["d_over_n"]))
        if "grid" in doc:
            kwargs["grid"] = tuple((float(a), float(b)) for a, b in doc["grid"])
        if "deltas" in doc:
            kwargs["deltas"] = tuple(float(v) for v in doc["deltas"])
        if "rho_bracket" in doc:
            lo, hi = doc["rho_bracket"]
            kwargs["rho_bracket"] = (float(lo), float(hi))
        if "bisection_rounds" in doc:
            kwargs["bisection_rounds"] = int(doc["bisection_rounds"])
    else:
        kwargs.update(
            size=int(doc["size"]),
            line_counts=tuple(int(v) for v in doc["line_counts"]),
            snr_db=float(doc["snr_db"]),
        )
        if "directions" in doc:
            kwargs["directions"] = tuple(doc["directions"])
        if "pixel_reg" in doc:
            kwargs["pixel_reg"] = str(doc["pixel_reg"])
    try:
        return ExperimentSpec(**kwargs)
    except KeyError as exc:
        raise ConfigError(f"missing key {exc}") from exc


def load_spec(path) -> ExperimentSpec:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        return spec_from_dict(doc)
    except KeyError as exc:
        raise ConfigError(f"missing key {exc}") from exc


# ---------------------------------------------------------------------------
# seeding and problem construction


def trial_seed(seed_base: int, kind: str, sweep: dict, trial_index: int) -> int:
    """Stable 63-bit seed from (base, sweep point, trial index)."""
    key = f"{kind}|{sorted(sweep.items())!r}|{trial_index}".encode()
    digest = hashlib.blake2b(key, digest_size=8).digest()
    return (int(seed_base) ^ int.from_bytes(digest, "little")) & ((1 << 63) - 1)


def _component_seeds(seed: int, count: int) -> list[int]:
    rng = np.random.default_rng(seed)
    return [int(s) for s in rng.integers(0, 2**63, size=count)]


def build_trial(spec: ExperimentSpec, sweep: dict, seed: int):
    """Return (x_true, problem) for one seeded trial at one sweep point."""
    if spec.kind == "bg-fd":
        sig_seed, phi_seed, noise_seed = _component_seeds(seed, 3)
        n = spec.n
        m = int(round(sweep["m_over_n"] * n))
        x = gen_bg_fd_signal(n, spec.sparsity_rate, sig_seed)
        phi = gen_gaussian_matrix(m, n, phi_seed)
        omega = make_fd1d(n)
        z = phi.forward(x)
        y = add_awgn(z, spec.snr_db, noise_seed)
        noise_var = max(noise_variance_for_snr(z, spec.snr_db), noiseless_floor(y))
        pixel = "none"
    elif spec.kind == "ptc":
        frame_seed, sig_seed, phi_seed = _component_seeds(seed, 3)
        n = spec.n
        m = max(1, int(round(sweep["delta"] * n)))
        d = int(round(sweep["d_over_n"] * n))
        l = n - int(round(sweep["rho"] * m))
        if not 0 <= l <= d:
            raise ConfigError(f"cosparsity {l} out of range for d={d}")
        omega = gen_tight_frame(n, d, frame_seed)
        x = gen_cosparse_signal(omega, l, sig_seed)
        phi = gen_gaussian_matrix(m, n, phi_seed)
        y = phi.forward(x)
        noise_var = noiseless_floor(y)
        pixel = "none"
    else:
        mask_seed, noise_seed = _component_seeds(seed, 2)
        n = spec.size
        x = shepp_logan(n)
        phi = make_partial_fourier_radial(n, int(sweep["lines"]), mask_seed)
        omega = make_fd2d(n, n, spec.directions)
        z = phi.forward(x)
        y = add_awgn(z, spec.snr_db, noise_seed)
        noise_var = max(noise_variance_for_snr(z, spec.snr_db), noiseless_floor(y))
        pixel = spec.pixel_reg

    def make_problem(omega_param: float) -> AnalysisProblem:
        return AnalysisProblem(
            phi=phi,
            omega=omega,
            y=y,
            noise_var=noise_var,
            analysis_reg=SnipeParams(omega_param),
            pixel_reg=pixel,
            mode="mmse",
        )

    return x, make_problem


def _solve_scored(problem: AnalysisProblem, config: GampConfig, x_true):
    start = time.perf_counter()
    try:
        result = solve(problem, config)
        x_hat, iterations = result.x_hat, result.iterations
    except GampDivergedError as exc:
        x_hat, iterations = exc.state.x_hat, exc.state.t
    elapsed = time.perf_counter() - start
    return nsnr(x_true, x_hat), x_hat, iterations, elapsed


def run_trial(
    spec: ExperimentSpec, sweep: dict, trial_index: int, keep_estimate: bool = False
) -> TrialResult:
    """Run one trial, tuning the threshold parameter over the grid.

    Every grid value sees the identical problem realization; the recorded
    row keeps the NSNR-maximizing value (ties toward the smaller parameter)
    and the wall time of that single solver run.
    """
    seed = trial_seed(spec.seed_base, spec.kind, sweep, trial_index)
    x_true, make_problem = build_trial(spec, sweep, seed)
    config = spec.solver.to_config()

    best = None
    for param in sorted(spec.tuning_grid):
        score, x_hat, iterations, elapsed = _solve_scored(make_problem(param), config, x_true)
        if best is None or score > best[0]:
            best = (score, param, x_hat, iterations, elapsed)
    score, param, x_hat, iterations, elapsed = best
    return TrialResult(
        kind=spec.kind,
        sweep=dict(sweep),
        seed=seed,
        tuned_param=param,
        nsnr=score,
        success=score >= SUCCESS_NSNR,
        iterations=iterations,
        wall_time_s=elapsed,
        x_hat=x_hat if keep_estimate else None,
    )


# ---------------------------------------------------------------------------
# sweeps


def sweep_points(spec: ExperimentSpec) -> list[dict]:
    if spec.kind == "bg-fd":
        if not spec.sampling_ratios:
            raise ConfigError("bg-fd needs sampling_ratios")
        return [{"m_over_n": v} for v in spec.sampling_ratios]
    if spec.kind == "ptc":
        if not spec.grid:
            raise ConfigError("ptc run needs a grid of (delta, rho) points")
        return [{"delta": a, "rho": b, "d_over_n": spec.d_over_n} for a, b in spec.grid]
    if not spec.line_counts:
        raise ConfigError("phantom needs line_counts")
    return [{"lines": int(v)} for v in spec.line_counts]


def _trial_task(args):
    spec, sweep, index, keep = args
    return run_trial(spec, sweep, index, keep_estimate=keep)


def _map_tasks(tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [_trial_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_trial_task, tasks, chunksize=1))


def run_experiment(
    spec: ExperimentSpec, workers: int = 1, keep_estimates: bool = False
) -> list[TrialResult]:
    """All (sweep point, trial) cells, order-independently merged."""
    points = sweep_points(spec)
    tasks = [
        (spec, sweep, index, keep_estimates and spec.kind == "phantom")
        for sweep in points
        for index in range(spec.trials)
    ]
    return _map_tasks(tasks, workers)


def tune_param(spec: ExperimentSpec, sweep: dict, grid, trials: int) -> float:
    """Grid value maximizing median NSNR over dedicated tuning trials.

    Every grid value is scored on the same seeded problem realizations;
    ties break toward the smaller value.
    """
    grid = list(grid)
    if not grid:
        raise ValueError("tuning grid must be nonempty")
    config = spec.solver.to_config()
    realizations = []
    for index in range(trials):
        seed = trial_seed(spec.seed_base, spec.kind, sweep, index)
        realizations.append(build_trial(spec, sweep, seed))
    best_param, best_median = None, -np.inf
    for param in sorted(grid):
        scores = [
            _solve_scored(make_problem(param), config, x_true)[0]
            for x_true, make_problem in realizations
        ]
        med = float(np.median(scores))
        if med > best_median:
            best_param, best_median = param, med
    return best_param


def success_rate(spec: ExperimentSpec, sweep: dict, workers: int = 1) -> float:
    tasks = [(spec, sweep, index, False) for index in range(spec.trials)]
    results = _map_tasks(tasks, workers)
    return float(np.mean([r.success for r in results]))


@dataclass
class PtcRow:
    delta: float
    rho50: float
    rho_lo: float
    rho_hi: float
    boundary: str = ""


def estimate_ptc(spec: ExperimentSpec, workers: int = 1) -> list[PtcRow]:
    """Bisect the 50%-success level of rho for each delta column.

    The search keeps the invariant success(rho_lo) >= 0.5 > success(rho_hi);
    columns whose empirical profile never brackets the level are reported at
    the touched boundary with a flag.  With Monte-Carlo noise the profile
    may be non-monotone, in which case the final bracket is still reported
    and its width bounds the ambiguity.
    """
    if not spec.deltas:
        raise ConfigError("ptc estimation needs deltas")
    rows = []
    for delta in spec.deltas:
        lo, hi = spec.rho_bracket

        def rate(rho):
            sweep = {"delta": delta, "rho": rho, "d_over_n": spec.d_over_n}
            return success_rate(spec, sweep, workers)

        if rate(hi) >= 0.5:
            rows.append(PtcRow(delta, hi, hi, hi, boundary="upper"))
            continue
        if rate(lo) < 0.5:
            rows.append(PtcRow(delta, lo, lo, lo, boundary="lower"))
            continue
        for _ in range(spec.bisection_rounds):
            mid = 0.5 * (lo + hi)
            if rate(mid) >= 0.5:
                lo = mid
            else:
                hi = mid
        rows.append(PtcRow(delta, 0.5 * (lo + hi), lo, hi))
    return rows


# ---------------------------------------------------------------------------
# emission


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def results_csv_lines(results: list[TrialResult]) -> list[str]:
    """Fixed-column CSV; the timing column is wall clock and is the one
    field exempt from the bit-for-bit reproducibility contract."""
    if not results:
        return ["kind"]
    kind = results[0].kind
    sweep_keys = _SWEEP_KEYS[kind]
    header = ["kind", *sweep_keys, "seed", "tuned_param", "nsnr_db", "success", "iterations", "wall_time_s"]
    lines = [",".join(header)]
    ordered = sorted(results, key=lambda r: ([r.sweep[k] for k in sweep_keys], r.seed))
    for r in ordered:
        row = [r.kind]
        row += [_fmt(float(r.sweep[k])) for k in sweep_keys]
        row += [
            str(r.seed),
            _fmt(float(r.tuned_param)),
            _fmt(float(r.nsnr_db)),
            _fmt(r.success),
            str(r.iterations),
            _fmt(float(r.wall_time_s)),
        ]
        lines.append(",".join(row))
    return lines


def write_results_csv(path, results: list[TrialResult]) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(results_csv_lines(results)) + "\n")


def ptc_csv_lines(rows: list[PtcRow]) -> list[str]:
    lines = ["delta,rho50,rho_lo,rho_hi,boundary"]
    for r in rows:
        lines.append(
            ",".join([_fmt(r.delta), _fmt(r.rho50), _fmt(r.rho_lo), _fmt(r.rho_hi), r.boundary])
        )
    return lines


def write_ptc_csv(path, rows: list[PtcRow]) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(ptc_csv_lines(rows)) + "\n")


def summarize(spec: ExperimentSpec, results: list[TrialResult]) -> dict:
    """Per-sweep-point medians plus timing statistics (timing informative only)."""
    sweep_keys = _SWEEP_KEYS[spec.kind]
    groups: dict[tuple, list[TrialResult]] = {}
    for r in results:
        groups.setdefault(tuple(r.sweep[k] for k in sweep_keys), []).append(r)
    points = []
    for key in sorted(groups):
        rs = groups[key]
        finite = [min(r.nsnr_db, 1e9) for r in rs]
        points.append(
            {
                **{k: v for k, v in zip(sweep_keys, key)},
                "trials": len(rs),
                "median_nsnr_db": float(np.median(finite)),
                "success_rate": float(np.mean([r.success for r in rs])),
                "median_iterations": float(np.median([r.iterations for r in rs])),
                "median_tuned_param": float(np.median([r.tuned_param for r in rs])),
            }
        )
    times = [r.wall_time_s for r in results]
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": spec.kind,
        "spec": _spec_to_doc(spec),
        "points": points,
        "timing_s": {
            "median": float(np.median(times)),
            "max": float(np.max(times)),
            "total_solver": float(np.sum(times)),
        },
    }
    return doc


def _spec_to_doc(spec: ExperimentSpec) -> dict:
    doc = asdict(spec)
    return {k: v for k, v in doc.items() if v is not None}


def write_summary_json(path, summary: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


def with_overrides(spec: ExperimentSpec, trials: int | None = None, seed: int | None = None) -> ExperimentSpec:
    out = spec
    if trials is not None:
        out = replace(out, trials=trials)
    if seed is not None:
        out = replace(out, seed_base=seed)
    return out
