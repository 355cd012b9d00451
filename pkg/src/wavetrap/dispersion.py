"""Per-unit-length propagation properties of TEM lines and TE10 waveguides.

All functions accept scalar or array frequencies (Hz) and broadcast.
Waveguide media are modelled as dielectric-filled rectangular guides of
broad-wall width ``a`` (an SIW is treated through its equivalent width).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from .errors import BelowCutoffError, ConfigurationError, DomainError

__all__ = [
    "SPEED_OF_LIGHT",
    "LineKind",
    "LineModel",
    "cutoff_frequency",
    "wavenumber",
    "phase_constant",
    "unit_group_delay",
    "attenuation",
]


class LineKind(str, Enum):
    TEM = "tem"
    WAVEGUIDE = "waveguide"


@dataclass(frozen=True)
class LineModel:
    """Dispersion and dielectric-loss description of a transmission medium.

    ``width_a`` is the broad-wall width in metres and only meaningful for
    waveguides; it is normalised to ``None`` for TEM media.
    """

    kind: LineKind
    eps_r: float
    tan_delta: float = 0.0
    width_a: float | None = None

    def __post_init__(self):
        kind = LineKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if not math.isfinite(self.eps_r) or self.eps_r < 1:
            raise ConfigurationError(f"eps_r must be >= 1, got {self.eps_r}")
        if not math.isfinite(self.tan_delta) or self.tan_delta < 0:
            raise ConfigurationError(f"tan_delta must be >= 0, got {self.tan_delta}")
        if kind is LineKind.WAVEGUIDE:
            if self.width_a is None or not (self.width_a > 0 and math.isfinite(self.width_a)):
                raise ConfigurationError(f"waveguide width_a must be > 0, got {self.width_a}")
            object.__setattr__(self, "width_a", float(self.width_a))
        else:
            object.__setattr__(self, "width_a", None)

    @classmethod
    def tem(cls, eps_r: float, tan_delta: float = 0.0) -> LineModel:
        return cls(LineKind.TEM, eps_r, tan_delta)

    @classmethod
    def waveguide(cls, width_a: float, eps_r: float, tan_delta: float = 0.0) -> LineModel:
        return cls(LineKind.WAVEGUIDE, eps_r, tan_delta, width_a)

    @property
    def is_waveguide(self) -> bool:
        return self.kind is LineKind.WAVEGUIDE

    @property
    def cutoff(self) -> float:
        return cutoff_frequency(self)


def _check_freq(f):
    f = np.asarray(f, dtype=float)
    if np.any(~(f > 0)):
        raise DomainError("frequency must be strictly positive")
    return f


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def cutoff_frequency(model: LineModel) -> float:
    """TE10 cutoff c / (2 a sqrt(eps_r)); zero for TEM media."""
    if not model.is_waveguide:
        return 0.0
    return SPEED_OF_LIGHT / (2.0 * model.width_a * math.sqrt(model.eps_r))


def cutoff_wavenumber(model: LineModel) -> float:
    return math.pi / model.width_a if model.is_waveguide else 0.0


def wavenumber(model: LineModel, f):
    """Material wavenumber 2 pi f sqrt(eps_r) / c (rad/m)."""
    f = _check_freq(f)
    return _out(2.0 * np.pi * f * math.sqrt(model.eps_r) / SPEED_OF_LIGHT)


def phase_constant(model: LineModel, f):
    """Phase constant beta (rad/m); zero at and below a waveguide's cutoff."""
    k = np.asarray(wavenumber(model, f))
    if not model.is_waveguide:
        return _out(k)
    kc = cutoff_wavenumber(model)
    arg = k * k - kc * kc
    return _out(np.sqrt(np.where(arg > 0, arg, 0.0)))


def unit_group_delay(model: LineModel, f):
    """d(beta)/d(omega) in s/m.

    Raises BelowCutoffError for any waveguide frequency at or below cutoff.
    """
    f = _check_freq(f)
    slowness = math.sqrt(model.eps_r) / SPEED_OF_LIGHT
    if not model.is_waveguide:
        return _out(np.full_like(f, slowness))
    fc = cutoff_frequency(model)
    if np.any(f <= fc):
        bad = float(np.min(f))
        raise BelowCutoffError(
            f"group delay undefined at {bad:.6g} Hz: at or below cutoff {fc:.6g} Hz"
        )
    return _out(slowness * f / np.sqrt(f * f - fc * fc))


def attenuation(model: LineModel, f):
    """Attenuation constant alpha (Np/m).

    Dielectric loss only above cutoff; the pure evanescent decay
    sqrt(kc^2 - k^2) at and below a waveguide's cutoff.
    """
    k = np.asarray(wavenumber(model, f))
    beta = np.asarray(phase_constant(model, f))
    if not model.is_waveguide:
        return _out(beta * model.tan_delta / 2.0)
    kc = cutoff_wavenumber(model)
    propagating = beta > 0
    safe_beta = np.where(propagating, beta, 1.0)
    dielectric = k * k * model.tan_delta / (2.0 * safe_beta)
    evanescent = np.sqrt(np.clip(kc * kc - k * k, 0.0, None))
    return _out(np.where(propagating, dielectric, evanescent))
