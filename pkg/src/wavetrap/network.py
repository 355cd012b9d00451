"""Two-port blocks evaluated as complex transfer functions H(f).

Forward propagation over a length ``L`` is ``exp(-(alpha + j beta) L)``.
A block is one of :class:`Line`, :class:`Trapper` or :class:`Cascade`;
all are immutable and their ``transfer`` methods are vectorised over
frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Union

import numpy as np

from .dispersion import (
    SPEED_OF_LIGHT,
    LineModel,
    attenuation,
    cutoff_frequency,
    cutoff_wavenumber,
    phase_constant,
    unit_group_delay,
)
from .errors import ConfigurationError

__all__ = [
    "JunctionMode",
    "Line",
    "Loop",
    "Trapper",
    "Cascade",
    "Block",
    "line_transfer",
    "trapper_transfer",
    "cascade_transfer",
    "transfer",
    "trapper_group_delay_analytic",
    "analytic_group_delay",
    "resonance_frequencies",
    "frequency_at_phase",
    "block_cutoff",
    "iter_models",
]


class JunctionMode(str, Enum):
    """Junction model used to close the feedback loops.

    IDEAL reproduces the non-power-conserving combiner E3 = E1 + E2 with a
    k / sqrt(1 - k^2) divider. UNITARY uses a lossless 2x2 coupler (through
    sqrt(1 - k^2), coupled j k) at both junctions, which keeps |H| <= 1.
    """

    IDEAL = "ideal"
    UNITARY = "unitary"


def _propagator(model: LineModel, length: float, f):
    gamma = attenuation(model, f) + 1j * np.asarray(phase_constant(model, f))
    return np.exp(-gamma * length)


def line_transfer(model: LineModel, L: float, f):
    """H = exp(-(alpha + j beta) L) of a uniform line."""
    if not L > 0:
        raise ConfigurationError(f"line length must be > 0, got {L}")
    return _propagator(model, L, f)


@dataclass(frozen=True)
class Line:
    model: LineModel
    length: float

    def __post_init__(self):
        if not (self.length > 0 and math.isfinite(self.length)):
            raise ConfigurationError(f"line length must be > 0, got {self.length}")

    def transfer(self, f):
        return line_transfer(self.model, self.length, f)


@dataclass(frozen=True)
class Loop:
    """One feedback loop: coupling ``k`` into a return path of length ``L2``."""

    k: float
    L2: float

    def __post_init__(self):
        if not 0 <= self.k < 1:
            raise ConfigurationError(f"loop coupling k must satisfy 0 <= k < 1, got {self.k}")
        if not (self.L2 > 0 and math.isfinite(self.L2)):
            raise ConfigurationError(f"loop length L2 must be > 0, got {self.L2}")


@dataclass(frozen=True)
class Trapper:
    """Straight section ``L1`` closed by one or more feedback loops.

    All loops hang between the same pair of junctions. With a single loop in
    IDEAL mode the transfer function is

        H = sqrt(1 - k^2) e^{-gamma L1} / (1 - k e^{-gamma (L1 + L2)})
    """

    model: LineModel
    L1: float
    loops: tuple[Loop, ...]
    mode: JunctionMode = JunctionMode.IDEAL

    def __post_init__(self):
        object.__setattr__(self, "loops", tuple(self.loops))
        object.__setattr__(self, "mode", JunctionMode(self.mode))
        if not (self.L1 > 0 and math.isfinite(self.L1)):
            raise ConfigurationError(f"trapper L1 must be > 0, got {self.L1}")
        if not self.loops:
            raise ConfigurationError("trapper needs at least one loop")
        if self.mode is JunctionMode.IDEAL:
            total = sum(loop.k for loop in self.loops)
            if total >= 1:
                raise ConfigurationError(
                    f"coupling sum {total:g} >= 1 in ideal mode (feedback series diverges)"
                )
        else:
            total = sum(loop.k ** 2 for loop in self.loops)
            if total > 1:
                raise ConfigurationError(f"coupling power sum {total:g} > 1 in unitary mode")

    @classmethod
    def single(cls, model: LineModel, L1: float, k: float, L2: float,
               mode: JunctionMode = JunctionMode.IDEAL) -> Trapper:
        return cls(model, L1, (Loop(k, L2),), mode)

    @property
    def is_single_loop(self) -> bool:
        return len(self.loops) == 1

    @property
    def round_trip_length(self) -> float:
        """L1 + L2 of a single-loop trapper."""
        if not self.is_single_loop:
            raise ConfigurationError("round-trip length is only defined for a single loop")
        return self.L1 + self.loops[0].L2

    def transfer(self, f):
        return trapper_transfer(self, f)


@dataclass(frozen=True)
class Cascade:
    children: tuple = field(default_factory=tuple)
    repeat: int = 1

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if not self.children:
            raise ConfigurationError("cascade needs at least one child")
        if isinstance(self.repeat, bool) or int(self.repeat) != self.repeat or self.repeat < 1:
            raise ConfigurationError(f"cascade repeat must be a positive integer, got {self.repeat}")
        object.__setattr__(self, "repeat", int(self.repeat))

    def transfer(self, f):
        return cascade_transfer(self, f)


Block = Union[Line, Trapper, Cascade]


def trapper_transfer(t: Trapper, f):
    through = _propagator(t.model, t.L1, f)
    if t.mode is JunctionMode.IDEAL:
        feedback = sum(loop.k * _propagator(t.model, t.L1 + loop.L2, f) for loop in t.loops)
        power = sum(loop.k ** 2 for loop in t.loops)
        return math.sqrt(1.0 - power) * through / (1.0 - feedback)
    power = sum(loop.k ** 2 for loop in t.loops)
    feedback = sum(loop.k ** 2 * _propagator(t.model, t.L1 + loop.L2, f) for loop in t.loops)
    return (1.0 - power) * through / (1.0 + feedback)


def cascade_transfer(c: Cascade, f):
    h = np.ones_like(np.asarray(f, dtype=float), dtype=complex)
    for child in c.children:
        h = h * transfer(child, f)
    h = h ** c.repeat if c.repeat > 1 else h
    return complex(h) if np.ndim(h) == 0 else h


def transfer(block, f):
    """Complex transfer function of any block (or object with ``transfer``)."""
    h = block.transfer(f)
    return complex(h) if np.ndim(h) == 0 else h


def _feedback_coefficient(t: Trapper) -> float:
    # Both modes share 1 / (1 - q e^{-j theta_t}); unitary has q = -k^2.
    k = t.loops[0].k
    return k if t.mode is JunctionMode.IDEAL else -k * k


def trapper_group_delay_analytic(t: Trapper, f):
    """Closed-form lossless group delay (s) of a single-loop trapper.

    tau = L1 b' + (L1 + L2) b' (q cos th - q^2) / (1 + q^2 - 2 q cos th),
    with b' = d(beta)/d(omega), th = beta (L1 + L2), q = k (ideal) or -k^2.
    """
    if not t.is_single_loop:
        raise ConfigurationError(
            "analytic group delay supports single-loop trappers only; use numeric group delay"
        )
    slope = np.asarray(unit_group_delay(t.model, f))
    total = t.round_trip_length
    theta = np.asarray(phase_constant(t.model, f)) * total
    q = _feedback_coefficient(t)
    cos_t = np.cos(theta)
    tau = t.L1 * slope + total * slope * (q * cos_t - q * q) / (1 + q * q - 2 * q * cos_t)
    return float(tau) if np.ndim(tau) == 0 else tau


def analytic_group_delay(block, f):
    """Lossless closed-form delay of lines, single-loop trappers and their cascades."""
    if isinstance(block, Line):
        tau = block.length * np.asarray(unit_group_delay(block.model, f))
    elif isinstance(block, Trapper):
        tau = np.asarray(trapper_group_delay_analytic(block, f))
    elif isinstance(block, Cascade):
        tau = block.repeat * sum(np.asarray(analytic_group_delay(ch, f)) for ch in block.children)
    else:
        raise ConfigurationError(f"no analytic group delay for {type(block).__name__}")
    return float(tau) if np.ndim(tau) == 0 else tau


def frequency_at_phase(model: LineModel, length: float, theta: float) -> float:
    """Frequency where beta(f) * length equals ``theta`` (> 0).

    beta is invertible in closed form for both media:
    k^2 = (theta / length)^2 + kc^2.
    """
    if not theta > 0:
        raise ConfigurationError(f"phase must be > 0, got {theta}")
    beta = theta / length
    k = math.hypot(beta, cutoff_wavenumber(model))
    return k * SPEED_OF_LIGHT / (2.0 * math.pi * math.sqrt(model.eps_r))


def resonance_frequencies(t: Trapper, band) -> list[tuple[int, float]]:
    """Delay-peak orders and frequencies of a single-loop trapper inside ``band``.

    IDEAL peaks sit at theta_t = 2 m pi; UNITARY peaks (q = -k^2) at
    theta_t = (2 m - 1) pi.
    """
    if not t.is_single_loop:
        raise ConfigurationError("resonance search supports single-loop trappers only")
    f_lo, f_hi = band
    if not f_lo < f_hi:
        return []
    total = t.round_trip_length
    offset = 0.0 if t.mode is JunctionMode.IDEAL else -math.pi
    out = []
    m = 1
    while True:
        f_m = frequency_at_phase(t.model, total, 2 * m * math.pi + offset)
        if f_m > f_hi:
            break
        if f_m >= f_lo and f_m > cutoff_frequency(t.model):
            out.append((m, f_m))
        m += 1
    return out


def iter_models(block):
    if isinstance(block, (Line, Trapper)):
        yield block.model
    elif isinstance(block, Cascade):
        for child in block.children:
            yield from iter_models(child)


def block_cutoff(block) -> float:
    """Highest cutoff frequency of any medium in the block tree (0 for pure TEM)."""
    return max((cutoff_frequency(m) for m in iter_models(block)), default=0.0)
