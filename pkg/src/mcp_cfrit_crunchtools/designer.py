"""Overflow-free parameter design and the end-to-end tuning procedure.

The design picks a quantization gain gamma from Gamma(eps) = {gamma >= Mn/eps},
which bounds the encrypted gain's deviation by eps, and the smallest key size
kappa whose largest safe q satisfies q > round_pos(gamma^(n+5) E_max W_max /
lambda_min) and the exact largest quantized term product of the data.
"""

import logging
import random
import time
from decimal import Decimal

from .cfrit import cfrit_gain, max_term_product, overflow_bound
from .codec import QuantizationConfig
from .elgamal import gen_for_primes
from .errors import ValidationError
from .frit import frit_gain, term_count
from .linalg import gram, l2_norm, lambda_min, max_norm
from .models import DesignResult, DesignSpec, GainReport, OverflowSummary, ScenarioConfig
from .modmath import Real, SafePrimePair, largest_safe_q
from .plantlab import TuningDataset, dataset_from_scenario

logger = logging.getLogger(__name__)

MIN_KAPPA = 3


def gamma_lower_bound(spec: DesignSpec) -> float:
    """Mn/eps, with eps read through its shortest decimal representation."""
    return float(Decimal(spec.m_terms * spec.n) / Decimal(repr(spec.epsilon)))


def q_requirement(spec: DesignSpec, gamma: Real) -> int:
    """Integer bound q must exceed for (q, gamma) to rule out overflow."""
    if gamma < 1:
        raise ValidationError(f"gamma must be at least 1, got {gamma}")
    return overflow_bound(spec.n, gamma, spec.e_max, spec.w_max, spec.lambda_min)


def in_gamma_set(gamma: Real, threshold: float) -> bool:
    return gamma >= threshold


def in_q_set(q: int, bound: int) -> bool:
    return q > bound


def choose_primes(spec: DesignSpec, gamma: Real, floor: int = 0) -> SafePrimePair:
    """Safe-prime pair for the smallest kappa whose largest safe q exceeds the bound.

    floor raises the requirement, e.g. to the exact largest term product.
    """
    bound = max(q_requirement(spec, gamma), floor)
    kappa = max(MIN_KAPPA, bound.bit_length())
    while True:
        primes = largest_safe_q(kappa)
        if in_q_set(primes.q, bound):
            return primes
        kappa += 1


def choose_kappa(spec: DesignSpec, gamma: Real, floor: int = 0) -> int:
    return choose_primes(spec, gamma, floor).kappa


def design_spec_from_dataset(
    ds: TuningDataset,
    epsilon: float,
    *,
    e_max: float | None = None,
    w_max: float | None = None,
    lam_min: float | None = None,
) -> DesignSpec:
    """DesignSpec with norms and lambda_min from the data unless given explicitly."""
    return DesignSpec(
        epsilon=epsilon,
        n=ds.n,
        N=ds.N,
        M=term_count(ds.n, ds.N),
        E_max=e_max if e_max is not None else max_norm(ds.E),
        W_max=w_max if w_max is not None else max_norm(ds.W),
        lambda_min=lam_min if lam_min is not None else lambda_min(gram(ds.W)),
    )


def design(
    spec: DesignSpec,
    gamma: float | None = None,
    kappa: int | None = None,
    *,
    ds: TuningDataset | None = None,
) -> tuple[DesignResult, SafePrimePair]:
    """Select (gamma_bar, kappa_bar), honoring explicit overrides.

    Without overrides gamma_bar is the smallest admissible gain Mn/eps and
    kappa_bar the smallest admissible key size for it. The norm bound alone
    does not cover every term once n >= 3, so when the dataset is given q must
    also exceed the exact largest quantized term product.
    """
    threshold = gamma_lower_bound(spec)
    gamma_bar = threshold if gamma is None else gamma
    bound = q_requirement(spec, gamma_bar)
    term_max = max_term_product(ds, gamma_bar) if ds is not None else None
    floor = term_max if term_max is not None else 0
    primes = choose_primes(spec, gamma_bar, floor) if kappa is None else largest_safe_q(kappa)

    result = DesignResult(
        gamma_bar=gamma_bar,
        kappa_bar=primes.kappa,
        gamma_threshold=threshold,
        q_bound=bound,
        term_max=term_max,
        in_Gamma=in_gamma_set(gamma_bar, threshold),
        in_Q=in_q_set(primes.q, max(bound, floor)),
    )
    if not result.in_gamma:
        logger.warning("gamma=%g is below the threshold Mn/eps=%g", gamma_bar, threshold)
    if not result.in_q:
        logger.warning(
            "kappa=%d leaves the no-overflow set (bound needs %d bits)",
            primes.kappa, max(bound, floor).bit_length(),
        )
    logger.info("Selected gamma=%g kappa=%d", gamma_bar, primes.kappa)
    return result, primes


def _injected_spec(ds: TuningDataset, scenario: ScenarioConfig, epsilon: float) -> DesignSpec:
    expected = scenario.expected
    if expected is None or None in (expected.e_max, expected.w_max, expected.lambda_min):
        raise ValidationError("injected norms need E_max, W_max and lambda_min in 'expected'")
    return design_spec_from_dataset(
        ds, epsilon, e_max=expected.e_max, w_max=expected.w_max, lam_min=expected.lambda_min
    )


def run_procedure(
    scenario: ScenarioConfig,
    *,
    epsilon: float | None = None,
    gamma: float | None = None,
    kappa: int | None = None,
    seed: int | None = None,
    threads: int = 1,
    inject_norms: bool = False,
    encrypt: bool = True,
    compensated: bool = False,
) -> tuple[DesignResult, GainReport]:
    """Simulate, build the dataset, design (gamma, kappa) and run the encrypted tuning.

    Args:
        scenario: Plant, controller, reference model and excitation.
        epsilon: Tolerance; defaults to the scenario's.
        gamma: Quantization gain override.
        kappa: Key size override.
        seed: Seed for key generation and encryption randomness.
        threads: Worker processes for the encrypted pipeline.
        inject_norms: Take E_max, W_max, lambda_min from the scenario's expected values.
        encrypt: When False, stop after the design and the plaintext gain.
        compensated: Compensated summation of decoded terms.

    Raises:
        DegenerateDataError: If the dataset cannot identify a gain.
        SafePrimeNotFoundError: If no safe prime exists for the chosen kappa.
    """
    started = time.perf_counter()
    eps = scenario.epsilon if epsilon is None else epsilon
    ds, _ = dataset_from_scenario(scenario)
    logger.info("Dataset built: n=%d N=%d", ds.n, ds.N)

    spec = (
        _injected_spec(ds, scenario, eps) if inject_norms else design_spec_from_dataset(ds, eps)
    )
    result, primes = design(spec, gamma, kappa, ds=ds)
    f_star = frit_gain(ds)

    report = GainReport(
        F_star=f_star.as_list(),
        epsilon=eps,
        gamma=result.gamma_bar,
        kappa=result.kappa_bar,
        M=spec.m_terms,
        wall_time=0.0,
    )
    if encrypt:
        key_rng = random.Random(f"{seed}/keygen") if seed is not None else None
        pk, sk = gen_for_primes(primes, rng=key_rng)
        cfg = QuantizationConfig(gamma=result.gamma_bar, primes=primes)
        f_e, overflow = cfrit_gain(
            ds, cfg, pk, sk, seed=seed, threads=threads, compensated=compensated
        )
        deviation = l2_norm(f_e.values - f_star.values)
        guarantee = result.in_gamma and result.in_q
        held = not overflow.observed_flag and deviation <= eps
        if guarantee and not held:
            logger.error(
                "Design guarantee broken: observed overflow=%s, deviation=%g > eps=%g",
                overflow.observed_flag, deviation, eps,
            )
        report = report.model_copy(
            update={
                "f_e_star": f_e.as_list(),
                "l2_deviation": deviation,
                "overflow": OverflowSummary(
                    theoretical=overflow.theoretical_flag,
                    observed=overflow.observed_flag,
                    count=len(overflow.overflowed_terms),
                ),
                "guarantee_held": held if guarantee else None,
            }
        )
        logger.info("Encrypted gain deviation %g (eps=%g)", deviation, eps)

    report = report.model_copy(update={"wall_time": time.perf_counter() - started})
    return result, report
