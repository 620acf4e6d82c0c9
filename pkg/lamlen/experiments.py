"""The five experiments and the deterministic parallel runner behind them.

Work is cut into fixed tasks before any worker starts: chunk k of a sampling
experiment always draws from RandomStream(seed, k), geodesic k of a flow
experiment and word k of a currents experiment likewise. Results are merged
in task order, so the outputs do not depend on the number of workers.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from functools import reduce
from multiprocessing import Pool
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from lamlen.closedform import (
    M,
    M_T,
    P,
    antiderivative_F,
    liouville_intersection_density,
    moment_P,
    polylog,
    quad_oracle,
    zeta_int,
)
from lamlen.farey import (
    closed_geodesic_from_word,
    periodic_trace,
    random_flow_geodesic,
    random_positive_word,
    trace,
)
from lamlen.ideal_triangle import ALL_SECTORS, INSCRIBED_DISK_DIAMETER, Sector
from lamlen.models import Criterion, ExperimentConfig, SummaryReport
from lamlen.report import ReportWriter
from lamlen.sampling import (
    RandomStream,
    chords_of_tangents,
    sample_liouville_windows,
    sample_tangents,
    window_mass,
)
from lamlen.stats import (
    Histogram,
    MomentEstimate,
    ks_statistic,
    restrict,
    sample_moments,
    weighted_ks_statistic,
)

logger = logging.getLogger(__name__)

# Count-weighted flow statistics ignore chords shorter than this.
FLOW_COUNT_FLOOR = 0.2

# Sector k estimates its mass on substream MASS_STREAM + k.
MASS_STREAM = 1 << 30

DERIVATIVE_REL = 1e-8
RECURRENCE_REL = 1e-8
SURFACE_DENSITY_REL = 1e-12
# ln 3 - E_P(x) must lie in (0.002, 0.003).
INSCRIBED_GAP = (0.0025, 0.0005)

_RICHARDSON_MAX_STEP = 0.05
_RECURRENCE_STEP = 1e-5


@dataclass
class ExperimentResult:
    report: SummaryReport
    histograms: Dict[str, Histogram] = field(default_factory=dict)
    raw: Optional[Dict[str, np.ndarray]] = None


def chunk_plan(total: int, chunk_size: int) -> List[Tuple[int, int]]:
    """(stream index, size) of every chunk; depends only on total and chunk_size"""
    count = math.ceil(total / chunk_size)
    return [(k, min(chunk_size, total - k * chunk_size)) for k in range(count)]


def parallel_map(fn: Callable, tasks: Sequence, jobs: int) -> list:
    """fn over tasks in a process pool; results come back in task order"""
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(task) for task in tasks]
    with Pool(min(jobs, len(tasks))) as pool:
        return pool.map(fn, tasks)


def _tangent_chunk(task):
    seed, index, size, a, b, bins = task
    stream = RandomStream(seed, index)
    x, y, theta = sample_tangents(stream, size)
    chords = chords_of_tangents(x, y, theta)
    hist = Histogram.from_samples(chords[np.isfinite(chords)], a, b, bins)
    return chords, int(np.count_nonzero(y > 1.0)), hist


def _run_tangent(cfg: ExperimentConfig) -> ExperimentResult:
    a, b = cfg.window
    plan = chunk_plan(cfg.samples, cfg.chunk_size)
    tasks = [(cfg.seed, index, size, a, b, cfg.bins) for index, size in plan]
    parts = parallel_map(_tangent_chunk, tasks, cfg.jobs)
    chords = np.concatenate([p[0] for p in parts])
    above_one = sum(p[1] for p in parts)
    finite = np.isfinite(chords)
    if not finite.all():
        logger.warning("dropping %d tangent samples aimed at a vertex", int((~finite).sum()))
        chords = chords[finite]

    th = cfg.thresholds
    moments = sample_moments(chords, targets=moment_P)
    criteria = [
        Criterion("ks_P", ks_statistic(chords, P.cdf), th["ks_tangent"]),
        Criterion("mean", moments[0].estimate, th["mean_tangent"], target=moment_P(1)),
    ]
    extras = {
        "fraction_above_one": above_one / cfg.samples,
        "fraction_above_one_target": 1.0 / math.pi,
    }
    report = SummaryReport(cfg.experiment, cfg.seed, len(chords), criteria, moments, extras)
    hist = reduce(Histogram.merge, (p[2] for p in parts))
    return ExperimentResult(report, {"": hist}, {"chord": chords} if cfg.raw else None)


def _flow_task(task):
    seed, index, budget, step_budget = task
    stream = RandomStream(seed, index)
    g = random_flow_geodesic(stream, budget)
    result = trace(g, budget, step_budget=step_budget)
    return np.asarray(result.lengths), result.total_param_length, result.terminated_reason.value


def _run_flow(cfg: ExperimentConfig) -> ExperimentResult:
    tasks = [(cfg.seed, index, cfg.length_budget, cfg.step_budget) for index in range(cfg.geodesics)]
    parts = parallel_map(_flow_task, tasks, cfg.jobs)
    lengths = np.concatenate([p[0] for p in parts])
    additivity = max(abs(math.fsum(p[0]) - p[1]) / p[1] if p[1] else 0.0 for p in parts)
    cusp_exits = sum(1 for p in parts if p[2] == "cusp_exit")

    a, b = cfg.window
    count_lo = max(a, FLOW_COUNT_FLOOR)
    weighted, weights = restrict(lengths, a, b, weights=lengths)
    counted, _ = restrict(lengths, count_lo, b)

    th = cfg.thresholds
    criteria = [
        Criterion(
            "ks_length_weighted",
            weighted_ks_statistic(weighted, weights, lambda x: P.window_cdf(x, a, b)),
            th["ks_flow_length"],
        ),
        Criterion(
            "ks_count_weighted",
            ks_statistic(counted, lambda x: M.window_cdf(x, count_lo, b)),
            th["ks_flow_count"],
        ),
        Criterion("additivity", additivity, th["additivity_rel"]),
    ]
    moments = sample_moments(lengths, weights=lengths, targets=moment_P)
    extras = {
        "segments": len(lengths),
        "total_length": math.fsum(lengths),
        "cusp_exits": cusp_exits,
    }
    report = SummaryReport(cfg.experiment, cfg.seed, len(lengths), criteria, moments, extras)
    histograms = {
        "length": Histogram.from_samples(lengths, a, b, cfg.bins, weights=lengths, weight_mode="length"),
        "count": Histogram.from_samples(lengths, a, b, cfg.bins),
    }
    return ExperimentResult(report, histograms, {"chord": lengths} if cfg.raw else None)


def _integrand(power: int, scale: float = 1.0) -> Callable[[float], float]:
    """scale · x^power / sinh²x in plain floating point, independent of closedform"""

    def f(x: float) -> float:
        if x > 350.0:
            return 0.0
        return scale * x**power / math.sinh(x) ** 2

    return f


def richardson_derivative(F: Callable[[np.ndarray], np.ndarray], x: np.ndarray) -> np.ndarray:
    """Two levels of Richardson extrapolation on central differences"""
    x = np.asarray(x, dtype=float)
    h = np.minimum(0.6 * x, _RICHARDSON_MAX_STEP)

    def central(step):
        return (F(x + step) - F(x - step)) / (2.0 * step)

    d1, d2, d4 = central(h), central(h / 2), central(h / 4)
    return (64.0 * d4 - 20.0 * d2 + d1) / 45.0


def _run_moments(cfg: ExperimentConfig) -> ExperimentResult:
    th = cfg.thresholds
    tol = cfg.quad_tolerance
    criteria: List[Criterion] = []

    for n in range(2, 11):
        q = quad_oracle(_integrand(n), 0.0, math.inf, tol)
        target = math.factorial(n) / 2.0 ** (n - 1) * zeta_int(n)
        criteria.append(Criterion(f"integral_{n}", q.value, th["moment_rel"], target, relative=True))

    moments: List[MomentEstimate] = []
    for n in range(0, 9):
        q = quad_oracle(_integrand(n + 2, 6.0 / math.pi**2), 0.0, math.inf, tol)
        criteria.append(Criterion(f"moment_P_{n}", moment_P(n), th["moment_rel"], q.value, relative=True))
        if 1 <= n <= 4:
            moments.append(MomentEstimate(n, q.value, q.error, moment_P(n)))
    criteria.append(Criterion("moment_P_0_exact", moment_P(0), 0.0, target=1.0))

    grid = np.linspace(0.05, 20.0, 50)
    for n in range(2, 6):
        exact = grid**n / np.sinh(grid) ** 2
        approx = richardson_derivative(lambda x, n=n: antiderivative_F(n, x), grid)
        worst = float(np.max(np.abs(approx - exact) / exact))
        criteria.append(Criterion(f"antiderivative_slope_{n}", worst, DERIVATIVE_REL))
        span = antiderivative_F(n, 400.0) - antiderivative_F(n, 1e-12)
        target = math.factorial(n) / 2.0 ** (n - 1) * zeta_int(n)
        criteria.append(Criterion(f"antiderivative_span_{n}", span, th["moment_rel"], target, relative=True))

    points = (0.1, 0.3, 0.5, 0.7, 0.9)
    h = _RECURRENCE_STEP
    for n in range(2, 7):
        worst = 0.0
        for x in points:
            slope = x * (polylog(n, x + h) - polylog(n, x - h)) / (2.0 * h)
            lower = polylog(n - 1, x)
            worst = max(worst, abs(slope - lower) / lower)
        criteria.append(Criterion(f"polylog_recurrence_{n}", worst, RECURRENCE_REL))

    worst = 0.0
    xs = np.linspace(0.05, 10.0, 40)
    for chi in (-1, -2, -5):
        worst = max(worst, float(np.max(np.abs(liouville_intersection_density(chi, xs) / M.density(xs) - 1.0))))
    criteria.append(Criterion("surface_density", worst, SURFACE_DENSITY_REL))

    gap = INSCRIBED_DISK_DIAMETER - moment_P(1)
    criteria.append(Criterion("inscribed_disk_gap", gap, INSCRIBED_GAP[1], target=INSCRIBED_GAP[0]))

    a, b = cfg.window
    edges = np.linspace(a, b, cfg.bins + 1)
    tail = P.survival(edges)
    hist = Histogram(a, b, tail[:-1] - tail[1:], float(P.cdf(a)), float(tail[-1]), weight_mode="mass")
    report = SummaryReport(cfg.experiment, cfg.seed, len(criteria), criteria, moments, {"variance_P": P.variance()})
    return ExperimentResult(report, {"": hist})


def _window_task(task):
    seed, index, size, a, b, scheme = task
    batch = sample_liouville_windows(a, b, Sector(1, 2), RandomStream(seed, index), size, scheme)
    return batch.u, batch.v, batch.chords, batch.proposals, batch.vertex_rejections


def _mass_task(task):
    seed, k, a, b, proposals, scheme = task
    return window_mass(a, b, ALL_SECTORS[k], RandomStream(seed, MASS_STREAM + k), proposals, scheme)


def _run_window(cfg: ExperimentConfig) -> ExperimentResult:
    a, b = cfg.window
    tasks = [(cfg.seed, index, size, a, b, cfg.scheme) for index, size in chunk_plan(cfg.samples, cfg.chunk_size)]
    parts = parallel_map(_window_task, tasks, cfg.jobs)
    u, v, chords = (np.concatenate([p[k] for p in parts]) for k in range(3))
    proposals = sum(p[3] for p in parts)
    rejections = sum(p[4] for p in parts)

    # The inverse scheme draws exact samples and has no proposal weights.
    mass_scheme = "log" if cfg.scheme == "inverse" else cfg.scheme
    mass_tasks = [(cfg.seed, k, a, b, cfg.proposals, mass_scheme) for k in range(len(ALL_SECTORS))]
    masses = parallel_map(_mass_task, mass_tasks, cfg.jobs)
    estimates = np.array([m.estimate for m in masses])
    mean_mass = float(estimates.mean())

    th = cfg.thresholds
    criteria = [
        Criterion("ks_window", ks_statistic(chords, lambda x: M_T.window_cdf(x, a, b)), th["ks_window"]),
        Criterion("sector_mass_spread", float(estimates.max() - estimates.min()) / mean_mass, th["sector_mass"]),
        Criterion("sector_mass", mean_mass, th["sector_mass"], target=M_T.mass(a, b) / 6.0, relative=True),
    ]
    moments = sample_moments(chords, targets=lambda k: M_T.window_moment(k, a, b))
    extras = {"acceptance_rate": len(chords) / proposals, "vertex_rejections": rejections}
    for m in masses:
        extras[f"mass_{m.sector.i}{m.sector.j}"] = m.estimate
        extras[f"mass_{m.sector.i}{m.sector.j}_stderr"] = m.stderr

    report = SummaryReport(cfg.experiment, cfg.seed, len(chords), criteria, moments, extras)
    hist = Histogram.from_samples(chords, a, b, cfg.bins)
    raw = {"u": u, "v": v, "chord": chords} if cfg.raw else None
    return ExperimentResult(report, {"": hist}, raw)


def _word_task(task):
    seed, index, word_length, step_budget, a, b, bins = task
    word = random_positive_word(word_length, RandomStream(seed, index))
    current = periodic_trace(closed_geodesic_from_word(word), step_budget=step_budget)
    lengths = np.asarray(current.lengths)
    hist = Histogram.from_samples(
        lengths, a, b, bins, weights=np.full(len(lengths), current.weight), weight_mode="current"
    )
    return lengths, current.period_length, current.additivity_error, hist


def _run_currents(cfg: ExperimentConfig) -> ExperimentResult:
    a, b = cfg.window
    tasks = [(cfg.seed, index, cfg.word_length, cfg.step_budget, a, b, cfg.bins) for index in range(cfg.words)]
    parts = parallel_map(_word_task, tasks, cfg.jobs)
    lengths = np.concatenate([p[0] for p in parts])
    weights = np.concatenate([np.full(len(p[0]), 1.0 / p[1]) for p in parts])
    word_index = np.concatenate([np.full(len(p[0]), k, dtype=float) for k, p in enumerate(parts)])

    inside, inside_weights = restrict(lengths, a, b, weights=weights)
    th = cfg.thresholds
    criteria = [
        Criterion(
            "ks_currents",
            weighted_ks_statistic(inside, inside_weights, lambda x: M.window_cdf(x, a, b)),
            th["ks_currents"],
        ),
        Criterion("additivity", max(p[2] for p in parts), th["additivity_rel"]),
    ]
    moments = sample_moments(inside, weights=inside_weights, targets=lambda k: M.window_moment(k, a, b))
    extras = {
        "segments": len(lengths),
        "mean_period_length": float(np.mean([p[1] for p in parts])),
    }
    report = SummaryReport(cfg.experiment, cfg.seed, len(lengths), criteria, moments, extras)
    hist = reduce(Histogram.merge, (p[3] for p in parts))
    raw = {"word": word_index, "chord": lengths, "weight": weights} if cfg.raw else None
    return ExperimentResult(report, {"": hist}, raw)


_RUNNERS = {
    "E1": _run_tangent,
    "E2": _run_flow,
    "E3": _run_moments,
    "E4": _run_window,
    "E5": _run_currents,
}


def execute(cfg: ExperimentConfig) -> ExperimentResult:
    """Run an experiment in memory; nothing is written"""
    cfg.validate()
    logger.debug("running %s with %s", cfg.experiment, cfg.to_dict())
    start = time.perf_counter()
    result = _RUNNERS[cfg.experiment](cfg)
    result.report.runtime = time.perf_counter() - start
    return result


def run_experiment(
    cfg: ExperimentConfig, writer: Optional[ReportWriter] = None, yaml_report: bool = False
) -> SummaryReport:
    """Run an experiment and write its histogram, optional raw samples and summary"""
    cfg.validate()
    writer = writer or ReportWriter(Path(cfg.output_dir), cfg.experiment)
    writer.prepare()

    result = execute(cfg)
    for label, hist in result.histograms.items():
        writer.write_histogram(hist, label)
    if cfg.raw and result.raw is not None:
        writer.write_raw(result.raw)
    writer.write_summary(result.report)
    if yaml_report:
        writer.write_yaml(result.report)

    status = "passed" if result.report.passed else "failed"
    logger.info("%s %s in %.2f s", cfg.experiment, status, result.report.runtime)
    return result.report
