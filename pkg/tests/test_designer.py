"""Tests for the (gamma, kappa) design and the end-to-end procedure."""

import logging

import numpy as np
import pytest

from mcp_cfrit_crunchtools.cfrit import quantized_gain
from mcp_cfrit_crunchtools.codec import QuantizationConfig
from mcp_cfrit_crunchtools.designer import (
    MIN_KAPPA,
    choose_kappa,
    design,
    design_spec_from_dataset,
    gamma_lower_bound,
    in_gamma_set,
    in_q_set,
    q_requirement,
    run_procedure,
)
from mcp_cfrit_crunchtools.errors import ValidationError
from mcp_cfrit_crunchtools.frit import frit_gain
from mcp_cfrit_crunchtools.linalg import l2_norm
from mcp_cfrit_crunchtools.models import DesignSpec, ScenarioConfig
from mcp_cfrit_crunchtools.modmath import largest_safe_q
from mcp_cfrit_crunchtools.plantlab import TuningDataset, dataset_from_scenario

from tests.conftest import make_random_dataset


def _spec(**overrides: float) -> DesignSpec:
    values: dict[str, float] = {
        "epsilon": 1e-5,
        "n": 4,
        "N": 50,
        "M": 4800,
        "E_max": 0.2398,
        "W_max": 0.555,
        "lambda_min": 0.0258,
    }
    values.update(overrides)
    return DesignSpec.model_validate(values)


class TestGammaThreshold:
    """Tests for the lower end Mn/eps of the admissible gains."""

    def test_reference_design(self) -> None:
        assert gamma_lower_bound(_spec()) == 1.92e9

    def test_scales_with_tolerance(self) -> None:
        assert gamma_lower_bound(_spec(epsilon=1e-4)) == 1.92e8

    def test_unit(self) -> None:
        spec = _spec(epsilon=1.0, n=1, N=1, M=1, E_max=1.0, W_max=1.0, lambda_min=1.0)
        assert gamma_lower_bound(spec) == 1.0

    def test_membership(self) -> None:
        assert in_gamma_set(1.92e9, 1.92e9)
        assert not in_gamma_set(1.9e9, 1.92e9)

    def test_spec_rejects_wrong_term_count(self) -> None:
        with pytest.raises(ValueError):
            _spec(M=4000)


class TestKeySize:
    """Tests for the q requirement and kappa selection."""

    def test_reference_bound_bits(self) -> None:
        assert q_requirement(_spec(), 1.92e9).bit_length() == 280

    def test_reference_kappa(self) -> None:
        assert abs(choose_kappa(_spec(), 1.92e9) - 280) <= 1

    def test_unit_bound_gives_smallest_kappa(self) -> None:
        spec = _spec(epsilon=1.0, n=1, N=1, M=1, E_max=1.0, W_max=1.0, lambda_min=1.0)
        assert q_requirement(spec, 1) == 1
        assert choose_kappa(spec, 1) == MIN_KAPPA

    def test_two_state_example(self) -> None:
        spec = _spec(n=2, N=1, M=4, E_max=2.0, W_max=1.0, lambda_min=1.0)
        assert q_requirement(spec, 1e3) == 2 * 10**21
        assert choose_kappa(spec, 1e3) == 71

    def test_monotone_in_gamma(self) -> None:
        spec = _spec(n=2, N=1, M=4, E_max=0.5, W_max=0.5, lambda_min=0.1)
        kappas = [choose_kappa(spec, g) for g in (10.0, 1e2, 1e3, 1e4)]
        assert kappas == sorted(kappas)
        assert kappas[0] < kappas[-1]

    def test_monotone_in_norms(self) -> None:
        small = q_requirement(_spec(E_max=0.1), 1e6)
        large = q_requirement(_spec(E_max=0.2), 1e6)
        assert small < large

    def test_gamma_below_one(self) -> None:
        with pytest.raises(ValidationError):
            q_requirement(_spec(), 0.5)

    def test_q_membership(self) -> None:
        assert in_q_set(12, 11)
        assert not in_q_set(11, 11)


class TestDesign:
    """Tests for design() with and without overrides."""

    def test_default_selection(self) -> None:
        spec = _spec(n=2, N=1, M=4, E_max=2.0, W_max=1.0, lambda_min=1.0, epsilon=4e-3)
        result, primes = design(spec)
        assert result.gamma_bar == 2000.0
        assert result.in_gamma
        assert result.in_q
        assert primes.q > result.q_bound
        assert result.kappa_bar == primes.kappa

    def test_small_kappa_override_leaves_q_set(self, caplog: pytest.LogCaptureFixture) -> None:
        spec = _spec(n=2, N=1, M=4, E_max=2.0, W_max=1.0, lambda_min=1.0)
        with caplog.at_level(logging.WARNING):
            result, _ = design(spec, gamma=1e3, kappa=16)
        assert not result.in_q
        assert "no-overflow" in caplog.text

    def test_small_gamma_override_leaves_gamma_set(self) -> None:
        result, _ = design(_spec(n=2, N=1, M=4, epsilon=1e-3), gamma=10.0)
        assert not result.in_gamma

    def test_spec_from_dataset(self, toy_dataset: TuningDataset) -> None:
        spec = design_spec_from_dataset(toy_dataset, 1e-3)
        assert spec.m_terms == 24
        assert spec.e_max == pytest.approx(np.max(np.abs(toy_dataset.E)))
        assert spec.lambda_min > 0

    def test_dataset_raises_requirement_to_term_maximum(self) -> None:
        ds = make_random_dataset(3, 4, 2)
        result, primes = design(design_spec_from_dataset(ds, 1e-3), ds=ds)
        assert result.term_max is not None
        assert result.in_q
        assert primes.q > max(result.q_bound, result.term_max)
        cfg = QuantizationConfig(gamma=result.gamma_bar, primes=primes)
        _, report = quantized_gain(ds, cfg)
        assert not report.observed_flag

    def test_reference_designed_point(
        self, reference_scenario: ScenarioConfig, reference_dataset: TuningDataset
    ) -> None:
        eps = reference_scenario.epsilon
        spec = design_spec_from_dataset(reference_dataset, eps)
        result, primes = design(spec, ds=reference_dataset)
        assert result.gamma_bar == 1.92e9
        assert abs(result.kappa_bar - 280) <= 1
        assert result.term_max is not None
        assert result.term_max > result.q_bound
        cfg = QuantizationConfig(gamma=result.gamma_bar, primes=primes)
        gain, report = quantized_gain(reference_dataset, cfg, compensated=True)
        assert not report.observed_flag
        assert l2_norm(gain.values - frit_gain(reference_dataset).values) <= eps


class TestNoOverflowGuarantee:
    """Points inside the no-overflow set never overflow on two-state data."""

    def test_random_two_state_datasets(self) -> None:
        primes = {kappa: largest_safe_q(kappa) for kappa in (96, 112, 128, 144)}
        covered = 0
        for seed in range(50):
            ds = make_random_dataset(2, 4 + seed % 7, seed)
            spec = design_spec_from_dataset(ds, 1e-3)
            for pair in primes.values():
                for gamma in (1e4, 1e5):
                    if not in_q_set(pair.q, q_requirement(spec, gamma)):
                        continue
                    covered += 1
                    _, report = quantized_gain(ds, QuantizationConfig(gamma=gamma, primes=pair))
                    assert not report.observed_flag, (seed, pair.kappa, gamma)
        assert covered > 0


class TestRunProcedure:
    """End-to-end runs on the bundled toy scenario."""

    def test_default_design_matches_emulation(self, toy_scenario: ScenarioConfig) -> None:
        result, report = run_procedure(toy_scenario, seed=1)
        assert result.gamma_bar == 48000.0
        assert result.in_gamma and result.in_q
        assert report.overflow is not None
        assert not report.overflow.observed
        assert report.f_e_star is not None

        ds, _ = dataset_from_scenario(toy_scenario)
        cfg = QuantizationConfig(gamma=result.gamma_bar, primes=largest_safe_q(result.kappa_bar))
        emulated, _ = quantized_gain(ds, cfg)
        np.testing.assert_allclose(report.f_e_star, emulated.values, atol=1e-12)

    def test_large_gamma_meets_tolerance(self, toy_scenario: ScenarioConfig) -> None:
        _, report = run_procedure(toy_scenario, gamma=1e6, seed=2)
        assert report.l2_deviation is not None
        assert report.l2_deviation <= toy_scenario.epsilon
        assert report.guarantee_held is True
        np.testing.assert_allclose(report.f_star, [-0.2, -0.1], atol=1e-6)

    def test_design_only(self, toy_scenario: ScenarioConfig) -> None:
        result, report = run_procedure(toy_scenario, epsilon=0.1, encrypt=False)
        tight, _ = run_procedure(toy_scenario, encrypt=False)
        assert report.f_e_star is None
        assert report.overflow is None
        assert result.gamma_bar < tight.gamma_bar
        assert result.kappa_bar <= tight.kappa_bar

    def test_overflowing_override_reports_no_guarantee(self, toy_scenario: ScenarioConfig) -> None:
        _, report = run_procedure(toy_scenario, kappa=16, seed=3)
        assert report.overflow is not None
        assert report.overflow.observed
        assert report.guarantee_held is None

    def test_inject_norms_needs_expected_values(self, toy_scenario: ScenarioConfig) -> None:
        with pytest.raises(ValidationError):
            run_procedure(toy_scenario, inject_norms=True, encrypt=False)

    @pytest.mark.slow
    def test_reference_scenario(self, reference_scenario: ScenarioConfig) -> None:
        result, report = run_procedure(reference_scenario, inject_norms=True, seed=4, threads=4)
        assert abs(result.kappa_bar - 280) <= 1
        assert report.l2_deviation is not None
        assert report.l2_deviation <= reference_scenario.epsilon
        expected = reference_scenario.expected
        assert expected is not None and expected.f_e_star is not None
        np.testing.assert_allclose(report.f_e_star, expected.f_e_star, atol=expected.tolerance)
