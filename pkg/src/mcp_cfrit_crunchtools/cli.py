"""cfrit command-line tool.

Usage:
    cfrit keygen --kappa 64 --out keys/demo
    cfrit tune --scenario reference --mode cfrit --seed 7 --out report.json
    cfrit design --scenario reference
    cfrit sweep --scenario reference --threads 8 --out sweep.csv
    cfrit verify --scenario reference

Every command takes its randomness from --seed. Without a seed one is drawn
and printed to stderr. Outputs embed a run manifest (command, scenario, seed,
overrides, timestamp).

Exit codes: 0 on success, 1 when verify finds a failing check, 2 on user
errors (bad scenario, bad parameters, unwritable paths).
"""

import argparse
import json
import logging
import math
import random
import secrets
import sys
import time
from collections import Counter
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from .cfrit import quantized_gain
from .codec import QuantizationConfig, dcd, ecd
from .config import get_config
from .designer import design, design_spec_from_dataset, run_procedure
from .elgamal import gen_for_primes, write_key_files
from .errors import UserError, ValidationError
from .frit import (
    enumerate_terms,
    fictitious_objective,
    frit_gain,
    term_bound_violations,
    term_count,
)
from .linalg import gram, l2_norm, lambda_min, max_norm
from .models import ExpectedValues, GainReport, RunManifest, SweepGrid, VerifyCheck, VerifyReport
from .modmath import largest_safe_q
from .plantlab import FeedbackGain, TuningDataset, dataset_from_scenario
from .scenarios import load_scenario
from .sweep import default_desk_grid, run_sweep, write_csv, write_plot_script

logger = logging.getLogger(__name__)

SEED_BITS = 32
TERM_SUM_TOLERANCE = 1e-8

SOUNDNESS_KAPPAS = (16, 24, 32, 48, 64, 80, 96)
SOUNDNESS_GAMMAS = (1e2, 1e3, 1e4, 1e5)
ROUNDTRIP_GAMMAS = (10.0, 1e3, 1e6)
ROUNDTRIP_KAPPAS = (16, 32)
ROUNDTRIP_SAMPLES = 1000
RANDOM_DATASETS = 20
GUARANTEE_STATES = 3


def resolve_seed(seed: int | None) -> int:
    return seed if seed is not None else secrets.randbits(SEED_BITS)


def make_manifest(
    command: str,
    scenario: str | None = None,
    seed: int | None = None,
    outputs: list[str] | None = None,
    **overrides: float | int | bool | str | None,
) -> RunManifest:
    return RunManifest(
        command=command,
        scenario=scenario,
        seed=seed,
        outputs=outputs or [],
        overrides=overrides,
        timestamp=datetime.now(timezone.utc),
    )


def _write_text(path: Path, text: str) -> None:
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise ValidationError(f"cannot write {path}: {e.strerror}") from e


def _emit(payload: dict[str, Any], out: Path | None) -> None:
    if out is not None:
        _write_text(out, json.dumps(payload, indent=2) + "\n")


# keygen


def cmd_keygen(kappa: int, out: Path, seed: int) -> dict[str, Any]:
    """Write <out>.pub and <out>.key for the largest kappa-bit safe prime."""
    primes = largest_safe_q(kappa)
    pk, sk = gen_for_primes(primes, rng=random.Random(f"{seed}/keygen"))
    public_path, secret_path = out.with_suffix(".pub"), out.with_suffix(".key")
    manifest = make_manifest(
        "keygen", seed=seed, outputs=[str(public_path), str(secret_path)], kappa=kappa
    )
    try:
        write_key_files(pk, sk, public_path, secret_path, header=manifest.model_dump_json())
    except OSError as e:
        raise ValidationError(f"cannot write key files at {out}: {e.strerror}") from e
    logger.info("Wrote %d-bit key pair to %s", kappa, out)
    return {
        "manifest": manifest.model_dump(mode="json"),
        "kappa": kappa,
        "p": pk.p,
        "q": pk.q,
        "g": pk.g,
        "h": pk.h,
        "public_key": str(public_path),
        "secret_key": str(secret_path),
    }


# tune / design


def cmd_tune(
    scenario_ref: str,
    mode: str = "cfrit",
    *,
    epsilon: float | None = None,
    gamma: float | None = None,
    kappa: int | None = None,
    seed: int = 0,
    threads: int = 1,
    inject_norms: bool = False,
    compensated: bool = False,
    out: Path | None = None,
) -> dict[str, Any]:
    """Plaintext (frit) or encrypted (cfrit) gain tuning on a scenario."""
    scenario = load_scenario(scenario_ref)
    manifest = make_manifest(
        f"tune --mode {mode}",
        scenario=scenario_ref,
        seed=seed,
        outputs=[str(out)] if out else [],
        epsilon=epsilon,
        gamma=gamma,
        kappa=kappa,
    )
    if mode == "frit":
        started = time.perf_counter()
        ds, _ = dataset_from_scenario(scenario)
        f_star = frit_gain(ds)
        report = GainReport(
            F_star=f_star.as_list(),
            epsilon=scenario.epsilon if epsilon is None else epsilon,
            M=term_count(ds.n, ds.N),
            objective=fictitious_objective(ds, f_star),
            objective_initial=fictitious_objective(ds, FeedbackGain.of(scenario.f_ini)),
            wall_time=time.perf_counter() - started,
        )
        payload: dict[str, Any] = {"manifest": manifest.model_dump(mode="json")}
    elif mode == "cfrit":
        result, report = run_procedure(
            scenario,
            epsilon=epsilon,
            gamma=gamma,
            kappa=kappa,
            seed=seed,
            threads=threads,
            inject_norms=inject_norms,
            compensated=compensated,
        )
        payload = {
            "manifest": manifest.model_dump(mode="json"),
            "design": result.model_dump(mode="json", by_alias=True),
        }
    else:
        raise ValidationError(f"mode must be 'frit' or 'cfrit', got {mode!r}")

    payload["report"] = report.model_dump(mode="json", by_alias=True)
    _emit(payload, out)
    return payload


def cmd_design(
    scenario_ref: str,
    *,
    epsilon: float | None = None,
    gamma: float | None = None,
    kappa: int | None = None,
    inject_norms: bool = False,
    out: Path | None = None,
) -> dict[str, Any]:
    """Select (gamma_bar, kappa_bar) without running the encryption."""
    scenario = load_scenario(scenario_ref)
    result, _ = run_procedure(
        scenario,
        epsilon=epsilon,
        gamma=gamma,
        kappa=kappa,
        inject_norms=inject_norms,
        encrypt=False,
    )
    manifest = make_manifest(
        "design",
        scenario=scenario_ref,
        outputs=[str(out)] if out else [],
        epsilon=epsilon,
        gamma=gamma,
        kappa=kappa,
    )
    payload = {
        "manifest": manifest.model_dump(mode="json"),
        "design": result.model_dump(mode="json", by_alias=True),
    }
    _emit(payload, out)
    return payload


# sweep


def cmd_sweep(
    scenario_ref: str,
    out: Path,
    *,
    epsilon: float | None = None,
    seed: int = 0,
    threads: int = 1,
    linear: bool = False,
    full: bool = False,
    plaintext_quantized: bool = False,
    kappas: list[int] | None = None,
    gammas: list[float] | None = None,
) -> dict[str, Any]:
    """Run the (kappa, gamma) sweep; write <out> (CSV) and <out>.gp (gnuplot)."""
    scenario = load_scenario(scenario_ref)
    grid = default_desk_grid(
        scenario,
        epsilon,
        seed=seed,
        linear=linear,
        full=full,
        plaintext_quantized=plaintext_quantized,
    )
    updates: dict[str, Any] = {}
    if kappas:
        updates["kappa_values"] = kappas
    if gammas:
        updates["gamma_values"] = gammas
    if updates:
        grid = SweepGrid.model_validate({**grid.model_dump(), **updates})

    script_path = out.with_suffix(".gp")
    manifest = make_manifest(
        "sweep",
        scenario=scenario_ref,
        seed=seed,
        outputs=[str(out), str(script_path)],
        epsilon=grid.epsilon,
        grid_linear=linear,
        full_grid=full,
        plaintext_quantized=plaintext_quantized,
    )
    records = run_sweep(grid, threads=threads)
    try:
        write_csv(records, out, manifest)
        write_plot_script(out, script_path, manifest)
    except OSError as e:
        raise ValidationError(f"cannot write sweep output at {out}: {e.strerror}") from e

    classes = Counter(r.point_class.value for r in records)
    return {
        "manifest": manifest.model_dump(mode="json"),
        "rows": len(records),
        "classes": dict(classes),
        "csv": str(out),
        "plot_script": str(script_path),
    }


# verify


def _term_sum_error(ds: TuningDataset) -> float:
    """Largest |sum_j F_j,iota - F*_iota| / max(1, |F*_iota|)."""
    f_star = frit_gain(ds).values
    parts: list[list[float]] = [[] for _ in range(ds.n)]
    for tf in enumerate_terms(ds):
        parts[tf.iota - 1].append(tf.value)
    sums = [math.fsum(p) for p in parts]
    return max(abs(s - f) / max(1.0, abs(f)) for s, f in zip(sums, f_star, strict=True))


def _check_term_sum(ds: TuningDataset) -> VerifyCheck:
    error = _term_sum_error(ds)
    return VerifyCheck(
        name="term-sum identity",
        passed=error <= TERM_SUM_TOLERANCE,
        detail=f"max relative error {error:.3g}",
    )


def _check_random_term_sums(seed: int) -> VerifyCheck:
    gen = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(RANDOM_DATASETS):
        n = int(gen.integers(1, 4))
        N = int(gen.integers(n, n + 4))
        ds = TuningDataset.of(gen.normal(size=n * N), gen.normal(size=(n * N, n)))
        worst = max(worst, _term_sum_error(ds))
    return VerifyCheck(
        name="term-sum identity (random datasets)",
        passed=worst <= TERM_SUM_TOLERANCE,
        detail=f"{RANDOM_DATASETS} datasets, max relative error {worst:.3g}",
    )


def _check_roundtrip(seed: int) -> VerifyCheck:
    rng = random.Random(f"{seed}/roundtrip")
    failures = 0
    for kappa in ROUNDTRIP_KAPPAS:
        primes = largest_safe_q(kappa)
        for gamma in ROUNDTRIP_GAMMAS:
            cfg = QuantizationConfig(gamma=gamma, primes=primes)
            limit = (primes.q - 1) / (2 * gamma)
            for x in [0.0, *(rng.uniform(-limit, limit) for _ in range(ROUNDTRIP_SAMPLES))]:
                error = abs(Fraction(dcd(ecd(x, cfg), cfg)) - Fraction(x))
                bound = Fraction(1, 2) if gamma * abs(x) >= 0.5 else Fraction(1)
                slack = Fraction(abs(x) + 1) * Fraction(2) ** -50
                if error > bound / Fraction(gamma) + slack:
                    failures += 1
    return VerifyCheck(
        name="encode/decode round trip",
        passed=failures == 0,
        detail=f"{failures} samples outside the quantization bound",
    )


def _check_soundness(seed: int, threads: int) -> VerifyCheck:
    toy = load_scenario("toy")
    grid = SweepGrid(
        kappa_values=list(SOUNDNESS_KAPPAS),
        gamma_values=list(SOUNDNESS_GAMMAS),
        epsilon=toy.epsilon,
        scenario=toy,
        seed=seed,
        plaintext_quantized=True,
    )
    records = run_sweep(grid, threads=threads)
    broken = [(r.kappa, r.gamma) for r in records if r.theory_ok and r.observed_overflow]
    covered = sum(r.theory_ok for r in records)
    return VerifyCheck(
        name="no-overflow guarantee on toy grid",
        passed=not broken,
        detail=f"{len(records)} points, {covered} covered by the guarantee, violations: {broken}",
    )


def _check_expected(ds: TuningDataset, expected: ExpectedValues | None) -> list[VerifyCheck]:
    if expected is None:
        return []
    tol = expected.tolerance
    checks = []
    if expected.f_star is not None:
        f_star = frit_gain(ds).as_list()
        worst = max(abs(a - b) for a, b in zip(f_star, expected.f_star, strict=True))
        checks.append(VerifyCheck(
            name="plaintext gain matches reference",
            passed=worst <= tol,
            detail=f"max deviation {worst:.3g} (tolerance {tol:g})",
        ))
    observed = {
        "E_max": max_norm(ds.E),
        "W_max": max_norm(ds.W),
        "lambda_min": lambda_min(gram(ds.W)),
    }
    for name, reference in (
        ("E_max", expected.e_max),
        ("W_max", expected.w_max),
        ("lambda_min", expected.lambda_min),
    ):
        if reference is not None:
            checks.append(VerifyCheck(
                name=f"{name} matches reference",
                passed=abs(observed[name] - reference) <= tol,
                detail=f"{observed[name]:.6g} vs {reference:g}",
            ))
    return checks


def _check_kappa(ds: TuningDataset, epsilon: float, expected_kappa: int) -> VerifyCheck:
    result, _ = design(design_spec_from_dataset(ds, epsilon), ds=ds)
    kappa = result.kappa_bar
    return VerifyCheck(
        name="designed kappa matches reference",
        passed=abs(kappa - expected_kappa) <= 1,
        detail=f"kappa {kappa} vs {expected_kappa} (+-1)",
    )


def _check_kappa_floor(ds: TuningDataset, epsilon: float, kappa: int) -> VerifyCheck:
    result, _ = design(design_spec_from_dataset(ds, epsilon), kappa=kappa, ds=ds)
    needed = max(result.q_bound, result.term_max or 0).bit_length()
    return VerifyCheck(
        name="kappa override clears the no-overflow bound",
        passed=result.in_q,
        detail=f"kappa {kappa}, bound needs {needed} bits",
    )


def _designed_run(ds: TuningDataset, epsilon: float) -> tuple[bool, float, int]:
    """Observed overflow, deviation and kappa of the emulated run at the designed point."""
    result, primes = design(design_spec_from_dataset(ds, epsilon), ds=ds)
    gain, report = quantized_gain(
        ds, QuantizationConfig(gamma=result.gamma_bar, primes=primes), compensated=True
    )
    deviation = l2_norm(gain.values - frit_gain(ds).values)
    return report.observed_flag, deviation, result.kappa_bar


def _check_design_guarantee(ds: TuningDataset, epsilon: float, seed: int) -> list[VerifyCheck]:
    gen = np.random.default_rng(seed)
    n, N = GUARANTEE_STATES, GUARANTEE_STATES + 1
    three_state = TuningDataset.of(gen.normal(size=n * N), gen.normal(size=(n * N, n)))
    overflowed, deviation, kappa = _designed_run(ds, epsilon)
    random_overflowed, _, random_kappa = _designed_run(three_state, epsilon)
    return [
        VerifyCheck(
            name="designed (gamma, kappa) avoids overflow",
            passed=not overflowed and not random_overflowed,
            detail=(
                f"scenario kappa {kappa} overflow={overflowed}; "
                f"random {n}-state kappa {random_kappa} overflow={random_overflowed}"
            ),
        ),
        VerifyCheck(
            name="designed gamma meets the tolerance",
            passed=deviation <= epsilon,
            detail=f"deviation {deviation:.3g} (eps {epsilon:g})",
            required=False,
        ),
    ]


def cmd_verify(
    scenario_ref: str,
    *,
    seed: int = 0,
    kappa: int | None = None,
    threads: int = 1,
    out: Path | None = None,
) -> VerifyReport:
    """Run the self-checks; the report passes iff every required check passes."""
    scenario = load_scenario(scenario_ref)
    ds, _ = dataset_from_scenario(scenario)
    checks = [
        _check_term_sum(ds),
        _check_random_term_sums(seed),
        _check_roundtrip(seed),
        _check_soundness(seed, threads),
        *_check_design_guarantee(ds, scenario.epsilon, seed),
        *_check_expected(ds, scenario.expected),
    ]
    if scenario.expected is not None and scenario.expected.kappa_bar is not None:
        checks.append(_check_kappa(ds, scenario.epsilon, scenario.expected.kappa_bar))
    if kappa is not None:
        checks.append(_check_kappa_floor(ds, scenario.epsilon, kappa))
    if ds.n <= 2:
        violations = term_bound_violations(ds)
        checks.append(VerifyCheck(
            name="per-term magnitude bound",
            passed=violations == 0,
            detail=f"{violations} terms above E_max W_max / lambda_min",
            required=False,
        ))

    report = VerifyReport(
        manifest=make_manifest(
            "verify",
            scenario=scenario_ref,
            seed=seed,
            outputs=[str(out)] if out else [],
            kappa=kappa,
        ),
        checks=checks,
    )
    _emit(report.model_dump(mode="json"), out)
    return report


# argument parsing


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scenario", default="reference",
                        help="Bundled scenario name (reference, toy) or JSON file path")
    parser.add_argument("--epsilon", type=float, help="Tolerance (default: scenario's)")
    parser.add_argument("--seed", type=int, help="Seed for all randomness (default: random)")
    parser.add_argument("--threads", type=int, help="Worker processes (default: CFRIT_THREADS)")
    parser.add_argument("--out", type=Path, help="Output path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cfrit", description="Encrypted FRIT gain tuning over ElGamal"
    )
    parser.add_argument("--log-level", help="Logging level (default: CFRIT_LOG_LEVEL or INFO)")
    sub = parser.add_subparsers(dest="command", required=True)

    keygen = sub.add_parser("keygen", help="Generate an ElGamal key pair")
    keygen.add_argument("--kappa", type=int, required=True, help="Bit length of q")
    keygen.add_argument("--seed", type=int, help="Seed (default: random)")
    keygen.add_argument("--out", type=Path, default=Path("cfrit"),
                        help="Path prefix for <out>.pub and <out>.key")

    tune = sub.add_parser("tune", help="Tune the feedback gain")
    _add_common(tune)
    tune.add_argument("--mode", choices=["frit", "cfrit"], default="cfrit")
    tune.add_argument("--gamma", type=float, help="Quantization gain override")
    tune.add_argument("--kappa", type=int, help="Key size override")
    tune.add_argument("--inject-norms", action="store_true",
                      help="Design with the scenario's reference norms")
    tune.add_argument("--compensated", action="store_true", help="Compensated summation")

    design_cmd = sub.add_parser("design", help="Select gamma and kappa only")
    _add_common(design_cmd)
    design_cmd.add_argument("--gamma", type=float, help="Quantization gain override")
    design_cmd.add_argument("--kappa", type=int, help="Key size override")
    design_cmd.add_argument("--inject-norms", action="store_true",
                            help="Design with the scenario's reference norms")

    sweep = sub.add_parser("sweep", help="Sweep a (kappa, gamma) grid")
    _add_common(sweep)
    sweep.add_argument("--grid-linear", action="store_true", help="Linearly spaced gammas")
    sweep.add_argument("--full-grid", action="store_true", help="Every kappa, 51 gammas")
    sweep.add_argument("--plaintext-quantized", action="store_true",
                       help="Big-integer emulation instead of encryption")
    sweep.add_argument("--kappas", type=int, nargs="+", help="Explicit kappa values")
    sweep.add_argument("--gammas", type=float, nargs="+", help="Explicit gamma values")

    verify = sub.add_parser("verify", help="Run the self-checks")
    _add_common(verify)
    verify.add_argument("--kappa", type=int, help="Key size that must clear the bound")
    return parser


def _dispatch(args: argparse.Namespace) -> int:
    config = get_config()
    if args.command == "keygen":
        seed = resolve_seed(args.seed)
        print(f"seed: {seed}", file=sys.stderr)
        payload = cmd_keygen(args.kappa, args.out, seed)
        print(json.dumps(payload, indent=2))
        return 0

    seed = resolve_seed(args.seed)
    print(f"seed: {seed}", file=sys.stderr)
    threads = args.threads if args.threads is not None else config.threads
    if args.command == "tune":
        payload = cmd_tune(
            args.scenario, args.mode, epsilon=args.epsilon, gamma=args.gamma,
            kappa=args.kappa, seed=seed, threads=threads, inject_norms=args.inject_norms,
            compensated=args.compensated, out=args.out,
        )
    elif args.command == "design":
        payload = cmd_design(
            args.scenario, epsilon=args.epsilon, gamma=args.gamma, kappa=args.kappa,
            inject_norms=args.inject_norms, out=args.out,
        )
    elif args.command == "sweep":
        payload = cmd_sweep(
            args.scenario, args.out or Path("sweep.csv"), epsilon=args.epsilon, seed=seed,
            threads=threads, linear=args.grid_linear, full=args.full_grid,
            plaintext_quantized=args.plaintext_quantized, kappas=args.kappas,
            gammas=args.gammas,
        )
    else:
        report = cmd_verify(
            args.scenario, seed=seed, kappa=args.kappa, threads=threads, out=args.out
        )
        for check in report.checks:
            status = "PASS" if check.passed else ("FAIL" if check.required else "WARN")
            print(f"{status} {check.name}: {check.detail}")
        print("verify: " + ("passed" if report.passed else "failed"))
        return 0 if report.passed else 1

    if args.out is None or args.command == "sweep":
        print(json.dumps(payload, indent=2))
    else:
        print(f"wrote {args.out}")
    return 0


def run(argv: list[str] | None = None) -> int:
    """Parse arguments, run one command and return the exit code."""
    args = build_parser().parse_args(argv)
    try:
        level = args.log_level or get_config().log_level
        logging.basicConfig(
            level=level.upper(),
            stream=sys.stderr,
            format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        )
        return _dispatch(args)
    except UserError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def main() -> None:
    """Entry point for the cfrit command."""
    sys.exit(run())
