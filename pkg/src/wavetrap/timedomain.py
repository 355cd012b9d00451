"""Pulse propagation through a block by spectral multiplication, and
envelope-delay measurement.

Propagation is a circular convolution over the signal length: callers are
responsible for leaving enough quiet time after the pulse (see
:func:`required_length`) so that the delayed response does not wrap.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import IO

import numpy as np
from scipy.signal import hilbert

from .analysis import format_number
from .errors import BelowCutoffError, DomainError
from .network import block_cutoff, transfer

__all__ = [
    "Signal",
    "ChannelWarning",
    "gaussian_pulse",
    "required_length",
    "propagate",
    "envelope_delay",
    "SIGNAL_CSV_HEADER",
]

SIGNAL_CSV_HEADER = "t_s,amplitude"


class ChannelWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class Signal:
    sample_rate: float
    samples: np.ndarray

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if not self.sample_rate > 0:
            raise DomainError(f"sample_rate must be > 0, got {self.sample_rate}")
        if samples.ndim != 1 or samples.size < 2:
            raise DomainError("a signal needs a 1-D array of at least 2 samples")
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return self.samples.size

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.samples.size) / self.sample_rate

    @property
    def energy(self) -> float:
        return float(np.sum(self.samples ** 2) / self.sample_rate)

    def write_csv(self, fp: IO[str]) -> None:
        fp.write(SIGNAL_CSV_HEADER + "\n")
        for t, x in zip(self.times, self.samples):
            fp.write(f"{format_number(t)},{format_number(x)}\n")


def _is_pow2(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


def required_length(duration: float, max_delay: float, sample_rate: float) -> int:
    """Smallest power-of-two length holding ``duration`` plus 4x ``max_delay``."""
    needed = math.ceil((duration + 4.0 * max(max_delay, 0.0)) * sample_rate)
    return 1 << max(needed - 1, 1).bit_length()


def gaussian_pulse(f0: float, sigma_t: float, sample_rate: float, n: int,
                   t0: float | None = None) -> Signal:
    """Gaussian-enveloped cosine carrier, centred at ``t0`` (default 6 sigma)."""
    if f0 <= 0 or f0 >= sample_rate / 2:
        raise DomainError(f"carrier {f0:g} Hz must lie in (0, Nyquist={sample_rate / 2:g} Hz)")
    if sigma_t <= 0:
        raise DomainError(f"envelope width must be > 0, got {sigma_t}")
    t = np.arange(n) / sample_rate
    t0 = 6.0 * sigma_t if t0 is None else t0
    x = np.exp(-0.5 * ((t - t0) / sigma_t) ** 2) * np.cos(2 * np.pi * f0 * t)
    return Signal(sample_rate, x)


def _channel_response(block, freqs: np.ndarray) -> np.ndarray:
    # the first bin is DC; evaluate it as the f -> 0+ limit
    probe = freqs.copy()
    probe[0] = freqs[1] * 1e-9
    h = np.asarray(transfer(block, probe), dtype=complex)
    h[0] = h[0].real
    return h


def propagate(block, sig: Signal) -> Signal:
    """Filter a real signal through ``block``; the output is real and the same length.

    Raises BelowCutoffError if more than 10% of the spectral energy lies at
    or below the block's cutoff; warns above 1%.
    """
    n = len(sig)
    if not _is_pow2(n):
        raise DomainError(f"signal length must be a power of two, got {n}")
    spectrum = np.fft.rfft(sig.samples)
    freqs = np.fft.rfftfreq(n, d=1.0 / sig.sample_rate)

    fc = block_cutoff(block)
    if fc > 0:
        power = np.abs(spectrum) ** 2
        below = float(np.sum(power[freqs <= fc]) / np.sum(power)) if np.any(power) else 0.0
        if below > 0.10:
            raise BelowCutoffError(
                f"{below:.1%} of the signal energy lies at or below cutoff {fc:.6g} Hz"
            )
        if below > 0.01:
            warnings.warn(
                f"{below:.2%} of the signal energy lies below cutoff {fc:.6g} Hz",
                ChannelWarning, stacklevel=2,
            )

    h = _channel_response(block, freqs)
    if n % 2 == 0:
        h[-1] = h[-1].real  # Nyquist bin
    if np.any(np.abs(h) > 1 + 1e-9):
        warnings.warn(
            f"channel has gain (|H| up to {np.max(np.abs(h)):.3f}) from the ideal junction model",
            ChannelWarning, stacklevel=2,
        )
    out = np.fft.irfft(spectrum * h, n=n)
    return Signal(sig.sample_rate, out)


def _envelope(x: np.ndarray) -> np.ndarray:
    return np.abs(hilbert(x))


def envelope_delay(inp: Signal, out: Signal, f0: float) -> float:
    """Delay (s) of ``out`` relative to ``inp`` from their analytic-signal envelopes.

    The lag maximising the circular cross-correlation of the envelopes is
    refined by a 3-point parabolic fit.
    """
    if inp.sample_rate != out.sample_rate or len(inp) != len(out):
        raise DomainError("input and output must share sample rate and length")
    if not 0 < f0 < inp.sample_rate / 2:
        raise DomainError(f"carrier {f0:g} Hz must lie below Nyquist")
    a, b = _envelope(inp.samples), _envelope(out.samples)
    peak = max(np.max(a), np.max(b))
    if np.max(a) == 0 or np.max(b) == 0 or not np.isfinite(peak):
        raise DomainError("degenerate (all-zero) envelope")
    n = a.size
    xc = np.fft.irfft(np.conj(np.fft.rfft(a)) * np.fft.rfft(b), n=n)
    i = int(np.argmax(xc))
    y0, y1, y2 = xc[(i - 1) % n], xc[i], xc[(i + 1) % n]
    denom = y0 - 2 * y1 + y2
    frac = 0.5 * (y0 - y2) / denom if denom != 0 else 0.0
    lag = i + frac
    if lag > n / 2:
        lag -= n
    return lag / inp.sample_rate
