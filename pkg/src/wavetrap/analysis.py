"""Frequency sweeps, phase unwrapping, numeric group delay and swing metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import IO, Iterator, Sequence

import numpy as np
from scipy.signal import find_peaks

from .dispersion import cutoff_frequency
from .errors import DomainError, WaveTrapError
from .network import block_cutoff, iter_models, transfer

__all__ = [
    "FrequencyGrid",
    "SweepResult",
    "SwingReport",
    "SweepError",
    "sweep",
    "unwrap_phase",
    "group_delay_numeric",
    "swing",
    "coupling_from_field_ratio",
    "field_ratio_from_coupling",
    "format_number",
    "SWEEP_CSV_HEADER",
]

SWEEP_CSV_HEADER = "freq_hz,mag_db,phase_rad,group_delay_s"


class SweepError(WaveTrapError):
    pass


@dataclass(frozen=True)
class FrequencyGrid:
    f_start: float
    f_stop: float
    n_points: int

    def __post_init__(self):
        if not (0 < self.f_start < self.f_stop) or not math.isfinite(self.f_stop):
            raise DomainError(
                f"grid needs 0 < f_start < f_stop, got {self.f_start!r}..{self.f_stop!r}"
            )
        if isinstance(self.n_points, bool) or int(self.n_points) != self.n_points or self.n_points < 3:
            raise DomainError(f"grid needs an integer n_points >= 3, got {self.n_points!r}")
        object.__setattr__(self, "n_points", int(self.n_points))

    @property
    def step(self) -> float:
        return (self.f_stop - self.f_start) / (self.n_points - 1)

    @property
    def frequencies(self) -> np.ndarray:
        return np.linspace(self.f_start, self.f_stop, self.n_points)


@dataclass
class SweepResult:
    """Tabulated response. ``one_sided`` marks endpoint delays from one-sided
    differences, ``undefined`` marks delays that have no meaning (cutoff)."""

    freq: np.ndarray
    mag_db: np.ndarray
    phase: np.ndarray
    tau: np.ndarray
    one_sided: np.ndarray
    undefined: np.ndarray
    annotations: list[str] = field(default_factory=list)

    def __len__(self):
        return len(self.freq)

    @property
    def tau_valid(self) -> np.ndarray:
        return ~(self.one_sided | self.undefined)

    def rows(self) -> Iterator[tuple[float, float, float, float]]:
        tau = np.where(self.undefined, np.nan, self.tau)
        for row in zip(self.freq, self.mag_db, self.phase, tau):
            yield tuple(float(x) for x in row)

    def write_csv(self, fp: IO[str]) -> None:
        fp.write(SWEEP_CSV_HEADER + "\n")
        for row in self.rows():
            fp.write(",".join(format_number(x) for x in row) + "\n")


@dataclass(frozen=True)
class SwingReport:
    tau_max: float
    tau_min: float
    delta_tau: float
    f_at_max: float
    f_at_min: float
    peaks: tuple[tuple[float, float], ...] = ()


def format_number(x: float) -> str:
    """Positional decimal with 12 significant digits; ``nan``/``inf`` spelled out."""
    x = float(x)
    if not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if x == 0:
        x = 0.0
    return np.format_float_positional(x, precision=12, unique=False, fractional=False, trim="k")


def unwrap_phase(wrapped: Sequence[float]) -> np.ndarray:
    """Unwrap so each successive difference lies in (-pi, pi]; first sample is kept."""
    x = np.asarray(wrapped, dtype=float)
    if x.size == 0:
        raise DomainError("cannot unwrap an empty phase sequence")
    d = np.diff(x)
    turns = np.ceil((d - np.pi) / (2 * np.pi))
    correction = np.concatenate(([0.0], np.cumsum(turns)))
    return x - 2 * np.pi * correction


def group_delay_numeric(phase_unwrapped, grid) -> np.ndarray:
    """tau = -d(phase)/d(omega): central differences inside, one-sided at the ends."""
    phase = np.asarray(phase_unwrapped, dtype=float)
    freqs = grid.frequencies if isinstance(grid, FrequencyGrid) else np.asarray(grid, dtype=float)
    if phase.shape != freqs.shape:
        raise DomainError(f"phase has {phase.size} points but grid has {freqs.size}")
    if phase.size < 3:
        raise DomainError("group delay needs at least 3 points")
    omega = 2 * np.pi * freqs
    return -np.gradient(phase, omega, edge_order=1)


def sweep(block, grid: FrequencyGrid) -> SweepResult:
    f = grid.frequencies
    try:
        h = np.asarray(transfer(block, f), dtype=complex)
    except WaveTrapError as exc:
        raise SweepError(f"sweep {grid.f_start:g}..{grid.f_stop:g} Hz failed: {exc}") from exc
    bad = ~np.isfinite(h)
    if np.any(bad):
        raise SweepError(f"transfer function not finite at {f[bad][0]:.9g} Hz")

    with np.errstate(divide="ignore"):
        mag_db = 20 * np.log10(np.abs(h))
    phase = unwrap_phase(np.angle(h))
    tau = group_delay_numeric(phase, f)

    one_sided = np.zeros(f.size, dtype=bool)
    one_sided[[0, -1]] = True
    fc = block_cutoff(block)
    undefined = f <= fc
    # a central difference reaching across cutoff is not a delay either
    undefined[1:] |= f[:-1] <= fc

    notes = []
    if np.any(f <= fc):
        notes.append(f"group delay undefined below cutoff {fc:.6g} Hz")
    for fc_i in sorted({cutoff_frequency(m) for m in iter_models(block) if m.is_waveguide}):
        if grid.f_stop > 2 * fc_i:
            notes.append(
                f"sweep exceeds 2*fc = {2 * fc_i:.6g} Hz; higher-order modes are not modelled"
            )
    if np.any(mag_db > 1e-9):
        notes.append(f"|H| > 1 (gain up to {np.max(mag_db):.3f} dB) from the ideal junction model")
    return SweepResult(f, mag_db, phase, tau, one_sided, undefined, notes)


def swing(result: SweepResult, band=None, prominence: float = 0.05) -> SwingReport:
    """Delay extrema over the valid rows inside ``band`` (default: whole sweep).

    Peaks are local maxima whose prominence exceeds ``prominence`` times the
    band's delay swing.
    """
    f = result.freq
    mask = result.tau_valid.copy()
    if band is not None:
        f_lo, f_hi = band
        mask &= (f >= f_lo) & (f <= f_hi)
    if not np.any(mask):
        raise SweepError(f"band {band} has no valid delay points in the sweep")
    idx = np.flatnonzero(mask)
    tau = result.tau[idx]
    i_max, i_min = int(np.argmax(tau)), int(np.argmin(tau))
    delta = float(tau[i_max] - tau[i_min])
    peaks: tuple = ()
    # a swing at rounding level is a flat curve, not a set of peaks
    if delta > 1e-9 * float(np.max(np.abs(tau))):
        # peaks are searched on contiguous runs only
        runs = np.split(np.arange(idx.size), np.flatnonzero(np.diff(idx) != 1) + 1)
        found = []
        for run in runs:
            p, _ = find_peaks(tau[run], prominence=prominence * delta)
            found.extend(run[p])
        peaks = tuple((float(f[idx[i]]), float(tau[i])) for i in sorted(found))
    return SwingReport(
        tau_max=float(tau[i_max]),
        tau_min=float(tau[i_min]),
        delta_tau=delta,
        f_at_max=float(f[idx[i_max]]),
        f_at_min=float(f[idx[i_min]]),
        peaks=peaks,
    )


def coupling_from_field_ratio(r: float) -> tuple[float, float]:
    """Loop-to-line field amplitude ratio -> (k, trapped power fraction k^2).

    The power dividing ratio k^2 / (1 - k^2) equals r^2.
    """
    if not r >= 0:
        raise DomainError(f"field ratio must be >= 0, got {r}")
    frac = r * r / (1.0 + r * r)
    return math.sqrt(frac), frac


def field_ratio_from_coupling(k: float) -> float:
    if not 0 <= k < 1:
        raise DomainError(f"coupling must satisfy 0 <= k < 1, got {k}")
    return k / math.sqrt(1.0 - k * k)
