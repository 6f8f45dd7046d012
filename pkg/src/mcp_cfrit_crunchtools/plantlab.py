"""Discrete-time LTI plant, state-feedback loop, filtering and the FRIT dataset.

The loop is

    x(t+1) = A x(t) + B u(t),    u(t) = F x(t) + v(t),    x(0) = 0,

and the dataset stacks, for each state j, the residual e_j(t) = x_j(t) - (H*_j u)(t)
and the filtered regressor rows (H*_j x(t))^T over t = 0..N-1.
"""

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import signal

from .errors import DegenerateDataError, ValidationError
from .models import PulseWindow, ScenarioConfig

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]


@dataclass(frozen=True)
class Plant:
    A: FloatArray
    B: FloatArray

    def __post_init__(self) -> None:
        if self.A.ndim != 2 or self.A.shape[0] != self.A.shape[1] or self.A.shape[0] < 1:
            raise ValidationError(f"A must be a non-empty square matrix, got shape {self.A.shape}")
        if self.B.shape != (self.n,):
            raise ValidationError(f"B must hold {self.n} entries, got shape {self.B.shape}")

    @classmethod
    def from_arrays(cls, A: ArrayLike, B: ArrayLike) -> "Plant":
        return cls(
            A=np.asarray(A, dtype=np.float64),
            B=np.asarray(B, dtype=np.float64).reshape(-1),
        )

    @property
    def n(self) -> int:
        return int(self.A.shape[0])


@dataclass(frozen=True)
class FeedbackGain:
    """Row gain F (stored 1-D, length n)."""

    values: FloatArray

    def __post_init__(self) -> None:
        if self.values.ndim != 1 or not np.all(np.isfinite(self.values)):
            raise ValidationError("feedback gain must be a finite 1-D row")

    @classmethod
    def of(cls, values: ArrayLike) -> "FeedbackGain":
        return cls(np.asarray(values, dtype=np.float64).reshape(-1))

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    def as_list(self) -> list[float]:
        return [float(v) for v in self.values]


@dataclass(frozen=True)
class TransferFunction:
    """num/den in descending powers of z."""

    num: tuple[float, ...]
    den: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.den or self.den[0] == 0:
            raise ValidationError("leading denominator coefficient must be nonzero")
        if len(self.num) > len(self.den):
            raise ValidationError("numerator degree exceeds denominator degree")

    @classmethod
    def of(cls, num: ArrayLike, den: ArrayLike) -> "TransferFunction":
        return cls(
            num=tuple(float(c) for c in np.atleast_1d(num)),
            den=tuple(float(c) for c in np.atleast_1d(den)),
        )

    def lfilter_coefficients(self) -> tuple[FloatArray, FloatArray]:
        """(b, a) in powers of z^-1: the numerator is left-padded by the relative degree."""
        a = np.asarray(self.den, dtype=np.float64)
        b = np.zeros_like(a)
        b[len(a) - len(self.num):] = self.num
        return b, a


@dataclass(frozen=True)
class SignalLog:
    """Measured closed-loop signals; row t of x is x(t)."""

    x: FloatArray
    u: FloatArray
    v: FloatArray

    @property
    def length(self) -> int:
        return int(self.u.shape[0])


@dataclass(frozen=True)
class TuningDataset:
    """E in R^{nN} and W in R^{nN x n}, blocks ordered by state index j."""

    E: FloatArray
    W: FloatArray
    n: int
    N: int

    def __post_init__(self) -> None:
        rows = self.n * self.N
        if self.E.shape != (rows,) or self.W.shape != (rows, self.n):
            raise ValidationError(
                f"dataset shapes {self.E.shape}, {self.W.shape} do not match n={self.n}, "
                f"N={self.N}"
            )

    @classmethod
    def of(cls, E: ArrayLike, W: ArrayLike) -> "TuningDataset":
        W_arr = np.asarray(W, dtype=np.float64)
        if W_arr.ndim != 2:
            raise ValidationError("W must be a matrix")
        n = int(W_arr.shape[1])
        if n < 1 or W_arr.shape[0] % n:
            raise ValidationError("W must have nN rows and n columns")
        return cls(E=np.asarray(E, dtype=np.float64).reshape(-1), W=W_arr, n=n,
                   N=int(W_arr.shape[0]) // n)


def pulse_window(steps: int, on_from: int, on_to: int, amplitude: float = 1.0) -> FloatArray:
    """v(t) = amplitude for on_from <= t <= on_to, 0 elsewhere."""
    v = np.zeros(steps, dtype=np.float64)
    v[on_from:on_to + 1] = amplitude
    return v


def simulate(plant: Plant, F: FeedbackGain, v: ArrayLike, steps: int) -> SignalLog:
    """Run the closed loop from x(0) = 0 for `steps` samples."""
    if F.n != plant.n:
        raise ValidationError(f"gain has {F.n} entries, plant has {plant.n} states")
    excitation = np.asarray(v, dtype=np.float64).reshape(-1)
    if excitation.shape[0] < steps:
        raise ValidationError(f"excitation has {excitation.shape[0]} samples, need {steps}")

    x = np.zeros((steps, plant.n), dtype=np.float64)
    u = np.zeros(steps, dtype=np.float64)
    for t in range(steps):
        u[t] = F.values @ x[t] + excitation[t]
        if t + 1 < steps:
            x[t + 1] = plant.A @ x[t] + plant.B * u[t]
    return SignalLog(x=x, u=u, v=excitation[:steps].copy())


def filter_signal(tf: TransferFunction, s: ArrayLike) -> FloatArray:
    """Apply tf to s with zero initial conditions (direct-form difference equation)."""
    b, a = tf.lfilter_coefficients()
    result: FloatArray = signal.lfilter(b, a, np.asarray(s, dtype=np.float64))
    return result


def pseudo_reference(log: SignalLog, F: FeedbackGain) -> FloatArray:
    """Fictitious reference v(t; F) = u(t) - F x(t)."""
    result: FloatArray = log.u - log.x @ F.values
    return result


def closed_loop_tf(plant: Plant, F: FeedbackGain) -> list[TransferFunction]:
    """H(F) = (zI - A - BF)^-1 B, one transfer function per state."""
    a_cl = plant.A + np.outer(plant.B, F.values)
    num, den = signal.ss2tf(a_cl, plant.B.reshape(-1, 1), np.eye(plant.n),
                            np.zeros((plant.n, 1)))
    return [TransferFunction.of(row, den) for row in np.atleast_2d(num)]


def build_dataset(log: SignalLog, h_star: list[TransferFunction], N: int) -> TuningDataset:
    """Stack e_j and w_j over t = 0..N-1 for every state j.

    Raises:
        DegenerateDataError: If the log holds fewer than N samples.
    """
    n = int(log.x.shape[1])
    if len(h_star) != n:
        raise ValidationError(f"need {n} reference transfer functions, got {len(h_star)}")
    if log.length < N:
        raise DegenerateDataError(f"log has {log.length} samples, need N = {N}")

    x = log.x[:N]
    u = log.u[:N]
    e_blocks, w_blocks = [], []
    for j, tf in enumerate(h_star):
        e_blocks.append(x[:, j] - filter_signal(tf, u))
        w_blocks.append(np.column_stack([filter_signal(tf, x[:, m]) for m in range(n)]))
    ds = TuningDataset(E=np.concatenate(e_blocks), W=np.vstack(w_blocks), n=n, N=N)
    logger.debug("Built dataset n=%d N=%d", n, N)
    return ds


def fictitious_residual(ds: TuningDataset, F: FeedbackGain) -> FloatArray:
    """E + W F^T."""
    result: FloatArray = ds.E + ds.W @ F.values
    return result


# Scenario helpers


def plant_from_scenario(scenario: ScenarioConfig) -> Plant:
    return Plant.from_arrays(scenario.a, scenario.b)


def excitation_from_scenario(scenario: ScenarioConfig) -> FloatArray:
    steps = scenario.total_steps
    if isinstance(scenario.excitation, PulseWindow):
        w = scenario.excitation
        return pulse_window(steps, w.on_from, w.on_to, w.amplitude)
    samples = np.zeros(steps, dtype=np.float64)
    given = np.asarray(scenario.excitation, dtype=np.float64)[:steps]
    samples[: given.shape[0]] = given
    return samples


def reference_model_from_scenario(scenario: ScenarioConfig, plant: Plant) -> list[TransferFunction]:
    if scenario.h_star is not None:
        return [TransferFunction.of(tf.num, tf.den) for tf in scenario.h_star]
    assert scenario.target_gain is not None
    return closed_loop_tf(plant, FeedbackGain.of(scenario.target_gain))


def dataset_from_scenario(scenario: ScenarioConfig) -> tuple[TuningDataset, SignalLog]:
    """Simulate the scenario under F_ini and build (E, W)."""
    plant = plant_from_scenario(scenario)
    log = simulate(
        plant,
        FeedbackGain.of(scenario.f_ini),
        excitation_from_scenario(scenario),
        scenario.total_steps,
    )
    h_star = reference_model_from_scenario(scenario, plant)
    return build_dataset(log, h_star, scenario.n_samples), log
