"""Admissible-region sweep over a (kappa, gamma) grid.

Every grid point runs the encrypted tuning (or its big-integer emulation) and is
classified as feasible, accurate-but-unproven, above-tolerance or overflowing.
Results go to CSV together with a gnuplot script drawing the kappa-log10(gamma)
plane colored by class.
"""

import csv
import logging
import math
import random
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .cfrit import cfrit_gain, quantized_gain
from .codec import QuantizationConfig
from .designer import design_spec_from_dataset, in_q_set, q_requirement
from .elgamal import gen_for_primes
from .errors import UserError
from .frit import frit_gain
from .linalg import l2_norm
from .models import DesignSpec, PointClass, RunManifest, ScenarioConfig, SweepGrid, SweepRecord
from .modmath import SafePrimePair, largest_safe_q
from .plantlab import FeedbackGain, TuningDataset, dataset_from_scenario

logger = logging.getLogger(__name__)

DESK_KAPPA_RANGE = (250, 300)
DESK_GAMMA_RANGE = (1.92e5, 1.92e10)
DESK_KAPPA_STEP = 5
DESK_GAMMA_POINTS = 11
FULL_GAMMA_POINTS = 51

CSV_COLUMNS = (
    "kappa",
    "gamma",
    "error_l2",
    "theory_ok",
    "observed_overflow",
    "class",
    "wall_ms",
    "log10_gamma",
)


def classify(theory_ok: bool, observed_overflow: bool, error: float, epsilon: float) -> PointClass:
    if observed_overflow:
        return PointClass.OVERFLOW
    if error > epsilon:
        return PointClass.ABOVE_EPSILON
    return PointClass.FEASIBLE if theory_ok else PointClass.UNPROVEN


def gamma_values(low: float, high: float, count: int, *, linear: bool = False) -> list[float]:
    """count gains from low to high, log-spaced unless linear.

    Log-spaced points are low * 10^(d k / (count - 1)) for d decades, so whole
    decades above low come out exact.
    """
    if count == 1:
        return [low]
    if linear:
        return [float(g) for g in np.linspace(low, high, count)]
    decades = math.log10(high / low)
    return [low * 10.0 ** (decades * k / (count - 1)) for k in range(count)]


def default_desk_grid(
    scenario: ScenarioConfig,
    epsilon: float | None = None,
    *,
    seed: int = 0,
    linear: bool = False,
    full: bool = False,
    plaintext_quantized: bool = False,
) -> SweepGrid:
    """kappa in 250..300 (step 5, or 1 with full) against log-spaced gammas in
    [1.92e5, 1.92e10] (11 points, or 51 with full)."""
    k_low, k_high = DESK_KAPPA_RANGE
    step = 1 if full else DESK_KAPPA_STEP
    count = FULL_GAMMA_POINTS if full else DESK_GAMMA_POINTS
    return SweepGrid(
        kappa_values=list(range(k_low, k_high + 1, step)),
        gamma_values=gamma_values(*DESK_GAMMA_RANGE, count, linear=linear),
        epsilon=scenario.epsilon if epsilon is None else epsilon,
        scenario=scenario,
        seed=seed,
        plaintext_quantized=plaintext_quantized,
    )


_PointJob = tuple[
    TuningDataset, DesignSpec, FeedbackGain, SafePrimePair | None, int, float, int, int, int, bool
]


def _evaluate_point(job: _PointJob) -> SweepRecord:
    ds, spec, f_star, primes, kappa, gamma, seed, k_index, g_index, plaintext = job
    started = time.perf_counter()
    theory_ok = False
    try:
        if primes is None:
            primes = largest_safe_q(kappa)
        theory_ok = in_q_set(primes.q, q_requirement(spec, gamma))
        cfg = QuantizationConfig(gamma=gamma, primes=primes)
        if plaintext:
            gain, report = quantized_gain(ds, cfg, compensated=True)
        else:
            rng = random.Random(f"{seed}/{k_index}/{g_index}")
            pk, sk = gen_for_primes(primes, rng=rng)
            gain, report = cfrit_gain(ds, cfg, pk, sk, rng=rng, compensated=True)
        error = l2_norm(gain.values - f_star.values)
        observed = report.observed_flag
    except UserError as e:
        logger.warning("Sweep point kappa=%d gamma=%g failed: %s", kappa, gamma, e)
        error, observed = math.inf, True

    wall_ms = (time.perf_counter() - started) * 1000
    record = SweepRecord(
        kappa=kappa,
        gamma=gamma,
        error=error,
        theory_ok=theory_ok,
        observed_overflow=observed,
        point_class=classify(theory_ok, observed, error, spec.epsilon),
        wall_ms=wall_ms,
    )
    logger.info(
        "kappa=%d gamma=%.6g error=%.3g class=%s",
        kappa, gamma, error, record.point_class.value,
    )
    return record


def _safe_primes(kappas: list[int]) -> dict[int, SafePrimePair | None]:
    found: dict[int, SafePrimePair | None] = {}
    for kappa in kappas:
        try:
            found[kappa] = largest_safe_q(kappa)
        except UserError as e:
            logger.warning("No safe prime for kappa=%d: %s", kappa, e)
            found[kappa] = None
    return found


def run_sweep(grid: SweepGrid, *, threads: int = 1) -> list[SweepRecord]:
    """One record per grid point, kappa-major.

    Per-point failures become overflow records with error = inf.
    """
    ds, _ = dataset_from_scenario(grid.scenario)
    f_star = frit_gain(ds)
    spec = design_spec_from_dataset(ds, grid.epsilon)
    primes = _safe_primes(grid.kappa_values)

    jobs: list[_PointJob] = [
        (ds, spec, f_star, primes[kappa], kappa, gamma, grid.seed, ki, gi,
         grid.plaintext_quantized)
        for ki, kappa in enumerate(grid.kappa_values)
        for gi, gamma in enumerate(grid.gamma_values)
    ]
    logger.info("Sweeping %d grid points on %d worker(s)", len(jobs), threads)
    if threads <= 1:
        return [_evaluate_point(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(_evaluate_point, jobs))


def format_number(x: float) -> str:
    """17 significant digits; infinities as inf."""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def _row(record: SweepRecord) -> list[str]:
    return [
        str(record.kappa),
        format_number(record.gamma),
        format_number(record.error),
        str(record.theory_ok).lower(),
        str(record.observed_overflow).lower(),
        record.point_class.value,
        f"{record.wall_ms:.3f}",
        format_number(math.log10(record.gamma)),
    ]


def write_csv(records: list[SweepRecord], path: Path, manifest: RunManifest) -> None:
    """Write the sweep table; the first line is the manifest as a # comment."""
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write(f"# {manifest.model_dump_json()}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        writer.writerows(_row(r) for r in records)
    logger.info("Wrote %d sweep records to %s", len(records), path)


def read_csv(path: Path) -> list[dict[str, str]]:
    with path.open(encoding="utf-8") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    return list(csv.DictReader(lines))


_CLASS_STYLES = (
    (PointClass.FEASIBLE, "blue", "feasible"),
    (PointClass.UNPROVEN, "goldenrod", "accurate but unproven"),
    (PointClass.ABOVE_EPSILON, "magenta", "no overflow, error above eps"),
    (PointClass.OVERFLOW, "red", "overflow"),
)


def write_plot_script(csv_path: Path, script_path: Path, manifest: RunManifest) -> None:
    """gnuplot script for the kappa-log10(gamma) plane, one color per class."""
    kappa_col = CSV_COLUMNS.index("kappa") + 1
    class_col = CSV_COLUMNS.index("class") + 1
    log_col = CSV_COLUMNS.index("log10_gamma") + 1
    plots = ", \\\n     ".join(
        f'file every ::1 using {kappa_col}:(pick("{cls.value}")) '
        f'with points pt 7 lc rgb "{color}" title "{title}"'
        for cls, color, title in _CLASS_STYLES
    )
    script = (
        f"# {manifest.model_dump_json()}\n"
        'set datafile separator ","\n'
        f'file = "{csv_path.name}"\n'
        f"pick(c) = strcol({class_col}) eq c ? column({log_col}) : NaN\n"
        'set xlabel "kappa"\n'
        'set ylabel "log10(gamma)"\n'
        "set key outside\n"
        f"plot {plots}\n"
    )
    script_path.write_text(script, encoding="utf-8")
