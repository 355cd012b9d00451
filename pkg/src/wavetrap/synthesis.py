"""Inverse design of single-loop trappers from a delay-swing target.

The seed comes straight from the closed-form delay: the resonance
condition fixes L1 + L2, and the period swing

    delta_tau = (L1 + L2) b' 2k / (1 - k^2)

is a quadratic in k. A coordinate descent on the swept response then
absorbs what the closed form ignores (b' varying across the period).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analysis import FrequencyGrid, sweep, swing
from .dispersion import LineModel, cutoff_frequency, phase_constant, unit_group_delay
from .errors import ConfigurationError, WaveTrapError
from .network import Trapper, frequency_at_phase

__all__ = [
    "DelayTarget",
    "TrapperFit",
    "InfeasibleTargetError",
    "fit_trapper",
    "seed_coupling",
    "period_window",
    "measure_peak",
]

TOLERANCE = 1e-3
MAX_ITERATIONS = 200
WINDOW_POINTS = 4001


class InfeasibleTargetError(WaveTrapError):
    def __init__(self, message: str, max_delta_tau: float):
        super().__init__(message)
        self.max_delta_tau = max_delta_tau


@dataclass(frozen=True)
class DelayTarget:
    """Desired delay swing ``delta_tau`` (s) with its peak at ``f_peak`` (Hz).

    ``l1_ratio`` is the preferred L1:L2 split (default 1:10). Length bounds
    are in metres and apply to L1 and L2 separately.
    """

    f_peak: float
    delta_tau: float
    model: LineModel
    m: int | None = None
    k_max: float = 0.99
    l1_bounds: tuple[float, float] = (1e-4, 10.0)
    l2_bounds: tuple[float, float] = (1e-4, 10.0)
    l1_ratio: float = 0.1

    def __post_init__(self):
        if not self.f_peak > cutoff_frequency(self.model):
            raise ConfigurationError(
                f"f_peak {self.f_peak:g} Hz must lie above cutoff {cutoff_frequency(self.model):g} Hz"
            )
        if not self.delta_tau > 0:
            raise ConfigurationError(f"delta_tau must be > 0, got {self.delta_tau}")
        if self.m is not None and (int(self.m) != self.m or self.m < 1):
            raise ConfigurationError(f"resonance order must be a positive integer, got {self.m}")
        if not 0 < self.k_max < 1:
            raise ConfigurationError(f"k bound must lie in (0, 1), got {self.k_max}")
        for name, (lo, hi) in (("L1", self.l1_bounds), ("L2", self.l2_bounds)):
            if not 0 < lo <= hi:
                raise ConfigurationError(f"{name} bounds must satisfy 0 < lo <= hi, got {(lo, hi)}")
        if not self.l1_ratio > 0:
            raise ConfigurationError(f"L1:L2 ratio must be > 0, got {self.l1_ratio}")


@dataclass(frozen=True)
class TrapperFit:
    k: float
    L1: float
    L2: float
    m: int
    residual: float
    model: LineModel | None = None
    iterations: int = 0

    @property
    def trapper(self) -> Trapper:
        return Trapper.single(self.model, self.L1, self.k, self.L2)


def _split(total: float, ratio: float) -> tuple[float, float]:
    return total * ratio / (1 + ratio), total / (1 + ratio)


def _lengths_ok(target: DelayTarget, total: float) -> bool:
    l1, l2 = _split(total, target.l1_ratio)
    return (target.l1_bounds[0] <= l1 <= target.l1_bounds[1]
            and target.l2_bounds[0] <= l2 <= target.l2_bounds[1])


def seed_coupling(delta_tau: float, transit: float) -> float:
    """Root in [0, 1) of delta_tau (1 - k^2) = 2 k transit.

    ``transit`` is the round-trip delay (L1 + L2) b' at the peak.
    """
    x = delta_tau / transit
    return x / (1.0 + math.sqrt(1.0 + x * x))  # cancellation-free form


def period_window(model: LineModel, total: float, m: int, margin: float = 0.1):
    """Band from just below the trough before peak ``m`` to just past the one after."""
    lo = frequency_at_phase(model, total, (2 * m - 1 - margin) * math.pi)
    hi = frequency_at_phase(model, total, (2 * m + 1 + margin) * math.pi)
    return lo, hi


def measure_peak(trapper: Trapper, m: int, n_points: int = WINDOW_POINTS):
    """Swept (f_at_max, delta_tau) over the period around resonance ``m``.

    The peak frequency is refined below the grid step by a parabola through
    the maximum and its neighbours.
    """
    lo, hi = period_window(trapper.model, trapper.round_trip_length, m)
    lo = max(lo, cutoff_frequency(trapper.model) * (1 + 1e-9))
    result = sweep(trapper, FrequencyGrid(lo, hi, n_points))
    report = swing(result)
    i = int(np.searchsorted(result.freq, report.f_at_max))
    f_max = report.f_at_max
    if 1 <= i < len(result) - 1:
        y0, y1, y2 = result.tau[i - 1:i + 2]
        denom = y0 - 2 * y1 + y2
        if denom < 0:
            f_max += 0.5 * (y0 - y2) / denom * (result.freq[1] - result.freq[0])
    return float(f_max), report.delta_tau


def fit_trapper(target: DelayTarget) -> TrapperFit:
    model = target.model
    beta = float(phase_constant(model, target.f_peak))
    slope = float(unit_group_delay(model, target.f_peak))

    if target.m is not None:
        m = int(target.m)
        total = 2 * m * math.pi / beta
        if not _lengths_ok(target, total):
            raise InfeasibleTargetError(
                f"order m={m} needs L1+L2={total:.6g} m, outside the length bounds", 0.0
            )
    else:
        m = 1
        while not _lengths_ok(target, 2 * m * math.pi / beta):
            total = 2 * m * math.pi / beta
            if _split(total, target.l1_ratio)[1] > target.l2_bounds[1] or m > 10_000:
                raise InfeasibleTargetError("no resonance order fits the length bounds", 0.0)
            m += 1
        total = 2 * m * math.pi / beta

    transit = total * slope
    k = seed_coupling(target.delta_tau, transit)
    if k >= target.k_max:
        kb = target.k_max
        best = transit * 2 * kb / (1 - kb * kb)
        raise InfeasibleTargetError(
            f"delta_tau {target.delta_tau:.6g} s needs k={k:.6g} >= bound {kb:g}; "
            f"max achievable delta_tau at the bound is {best:.6g} s",
            best,
        )

    def measure(k_, total_):
        l1, l2 = _split(total_, target.l1_ratio)
        return measure_peak(Trapper.single(model, l1, k_, l2), m)

    def objective(f_max, dtau):
        return (abs(f_max - target.f_peak) / target.f_peak
                + abs(dtau - target.delta_tau) / target.delta_tau)

    # Gauss-Seidel coordinate descent: the length axis drives the peak-frequency
    # residual to zero, then the coupling axis the swing residual. Each 1-D move
    # is a finite-difference Newton step, clipped to stay inside the bounds.
    f_max, dtau = measure(k, total)
    best = objective(f_max, dtau)
    it = 0
    while it < MAX_ITERATIONS and best >= TOLERANCE:
        it += 1
        h = 1e-4 * total
        f_h, _ = measure(k, total + h)
        if f_h != f_max:
            step = -(f_max - target.f_peak) * h / (f_h - f_max)
            step = float(np.clip(step, -0.05 * total, 0.05 * total))
            while not _lengths_ok(target, total + step) and abs(step) > 1e-15 * total:
                step /= 2
            total += step
        f_max, dtau = measure(k, total)

        dk = 1e-4 * (1 - k)
        _, d_h = measure(k + dk, total)
        if d_h != dtau:
            step = -(dtau - target.delta_tau) * dk / (d_h - dtau)
            k_new = float(np.clip(k + step, 0.5 * k, k + 0.5 * (target.k_max - k)))
            if k_new < target.k_max:
                k = k_new
        f_max, dtau = measure(k, total)
        best = objective(f_max, dtau)

    l1, l2 = _split(total, target.l1_ratio)
    return TrapperFit(float(k), float(l1), float(l2), m, float(best), model, it)
