"""Tests for loop simulation, filtering and dataset construction."""

import numpy as np
import pytest

from mcp_cfrit_crunchtools.errors import DegenerateDataError, ValidationError
from mcp_cfrit_crunchtools.models import ScenarioConfig
from mcp_cfrit_crunchtools.plantlab import (
    FeedbackGain,
    Plant,
    TransferFunction,
    TuningDataset,
    build_dataset,
    closed_loop_tf,
    dataset_from_scenario,
    excitation_from_scenario,
    filter_signal,
    fictitious_residual,
    pseudo_reference,
    pulse_window,
    simulate,
)


class TestSimulate:
    """Tests for the closed-loop simulator."""

    def test_open_loop_scalar(self) -> None:
        log = simulate(Plant.from_arrays([[0.5]], [1.0]), FeedbackGain.of([0.0]), [1, 0, 0, 0], 4)
        np.testing.assert_allclose(log.x[:, 0], [0.0, 1.0, 0.5, 0.25])
        np.testing.assert_allclose(log.u, [1.0, 0.0, 0.0, 0.0])

    def test_feedback_scalar(self) -> None:
        log = simulate(Plant.from_arrays([[0.5]], [1.0]), FeedbackGain.of([0.5]), [1, 0, 0], 3)
        np.testing.assert_allclose(log.x[:, 0], [0.0, 1.0, 1.0])
        np.testing.assert_allclose(log.u, [1.0, 0.5, 0.5])

    def test_superposition(self) -> None:
        plant = Plant.from_arrays([[0.6, 0.4], [-0.5, 0.1]], [0.1, 0.2])
        gain = FeedbackGain.of([0.3, -0.2])
        gen = np.random.default_rng(0)
        v1, v2 = gen.normal(size=20), gen.normal(size=20)
        a, b = 2.0, -0.7
        combined = simulate(plant, gain, a * v1 + b * v2, 20)
        first, second = simulate(plant, gain, v1, 20), simulate(plant, gain, v2, 20)
        np.testing.assert_allclose(combined.x, a * first.x + b * second.x, atol=1e-12)
        np.testing.assert_allclose(combined.u, a * first.u + b * second.u, atol=1e-12)

    def test_gain_size_mismatch(self) -> None:
        with pytest.raises(ValidationError):
            simulate(Plant.from_arrays([[0.5]], [1.0]), FeedbackGain.of([0.0, 1.0]), [1.0], 1)

    def test_short_excitation(self) -> None:
        with pytest.raises(ValidationError):
            simulate(Plant.from_arrays([[0.5]], [1.0]), FeedbackGain.of([0.0]), [1.0], 3)

    def test_plant_shape_checks(self) -> None:
        with pytest.raises(ValidationError):
            Plant.from_arrays([[1.0, 0.0]], [1.0])
        with pytest.raises(ValidationError):
            Plant.from_arrays([[1.0]], [1.0, 2.0])


class TestPulseWindow:
    def test_window(self) -> None:
        np.testing.assert_array_equal(pulse_window(8, 1, 5), [0, 1, 1, 1, 1, 1, 0, 0])

    def test_amplitude(self) -> None:
        assert pulse_window(3, 0, 0, 2.5)[0] == 2.5


class TestFilterSignal:
    """Tests for zero-initial-condition filtering."""

    def test_first_order_step(self) -> None:
        tf = TransferFunction.of([1.0, 0.0], [1.0, -0.5])
        np.testing.assert_allclose(filter_signal(tf, [1.0, 1.0, 1.0]), [1.0, 1.5, 1.75])

    def test_unit_delay(self) -> None:
        tf = TransferFunction.of([1.0], [1.0, 0.0])
        np.testing.assert_allclose(filter_signal(tf, [1.0, 2.0, 3.0]), [0.0, 1.0, 2.0])

    def test_superposition(self) -> None:
        tf = TransferFunction.of([0.1, -0.1, 0.05], [1.0, -1.2, 0.5])
        gen = np.random.default_rng(1)
        s1, s2 = gen.normal(size=30), gen.normal(size=30)
        np.testing.assert_allclose(
            filter_signal(tf, 3.0 * s1 - s2),
            3.0 * filter_signal(tf, s1) - filter_signal(tf, s2),
            atol=1e-12,
        )

    def test_improper_rejected(self) -> None:
        with pytest.raises(ValidationError):
            TransferFunction.of([1.0, 0.0, 0.0], [1.0, 0.5])

    def test_zero_leading_denominator(self) -> None:
        with pytest.raises(ValidationError):
            TransferFunction.of([1.0], [0.0, 1.0])


class TestClosedLoop:
    """H(F) reproduces the measured states from the fictitious reference."""

    def test_reproduces_states_under_initial_gain(self, toy_scenario: ScenarioConfig) -> None:
        _, log = dataset_from_scenario(toy_scenario)
        plant = Plant.from_arrays(toy_scenario.a, toy_scenario.b)
        h = closed_loop_tf(plant, FeedbackGain.of(toy_scenario.f_ini))
        for j, tf in enumerate(h):
            np.testing.assert_allclose(filter_signal(tf, log.v), log.x[:, j], atol=1e-10)

    @pytest.mark.parametrize("gain", [[0.3, -0.4], [-0.2, -0.1], [1.0, 0.25]])
    def test_any_gain_with_its_pseudo_reference(
        self, toy_scenario: ScenarioConfig, gain: list[float]
    ) -> None:
        _, log = dataset_from_scenario(toy_scenario)
        plant = Plant.from_arrays(toy_scenario.a, toy_scenario.b)
        F = FeedbackGain.of(gain)
        v_f = pseudo_reference(log, F)
        for j, tf in enumerate(closed_loop_tf(plant, F)):
            np.testing.assert_allclose(filter_signal(tf, v_f), log.x[:, j], atol=1e-10)

    def test_residual_vanishes_at_target(self, toy_scenario: ScenarioConfig) -> None:
        ds, _ = dataset_from_scenario(toy_scenario)
        assert toy_scenario.target_gain is not None
        residual = fictitious_residual(ds, FeedbackGain.of(toy_scenario.target_gain))
        np.testing.assert_allclose(residual, 0.0, atol=1e-10)


class TestDataset:
    """Tests for (E, W) construction."""

    def test_toy_shapes(self, toy_dataset: TuningDataset) -> None:
        assert toy_dataset.E.shape == (12,)
        assert toy_dataset.W.shape == (12, 2)
        assert (toy_dataset.n, toy_dataset.N) == (2, 6)

    def test_reference_shapes(self, reference_dataset: TuningDataset) -> None:
        assert reference_dataset.E.shape == (200,)
        assert reference_dataset.W.shape == (200, 4)

    def test_insufficient_samples(self, toy_scenario: ScenarioConfig) -> None:
        _, log = dataset_from_scenario(toy_scenario)
        plant = Plant.from_arrays(toy_scenario.a, toy_scenario.b)
        h = closed_loop_tf(plant, FeedbackGain.of([0.0, 0.0]))
        with pytest.raises(DegenerateDataError):
            build_dataset(log, h, 7)

    def test_reference_count_mismatch(self, toy_scenario: ScenarioConfig) -> None:
        _, log = dataset_from_scenario(toy_scenario)
        with pytest.raises(ValidationError):
            build_dataset(log, [TransferFunction.of([1.0], [1.0, 0.0])], 6)

    def test_of_infers_dimensions(self) -> None:
        ds = TuningDataset.of(np.zeros(6), np.zeros((6, 3)))
        assert (ds.n, ds.N) == (3, 2)

    def test_of_rejects_ragged(self) -> None:
        with pytest.raises(ValidationError):
            TuningDataset.of(np.zeros(5), np.zeros((5, 2)))

    def test_shape_mismatch(self) -> None:
        with pytest.raises(ValidationError):
            TuningDataset.of(np.zeros(5), np.zeros((6, 2)))


class TestScenarioExcitation:
    def test_list_is_zero_padded(self, toy_scenario: ScenarioConfig) -> None:
        padded = toy_scenario.model_copy(update={"steps": 9})
        v = excitation_from_scenario(padded)
        assert v.shape == (9,)
        np.testing.assert_array_equal(v[6:], 0.0)
