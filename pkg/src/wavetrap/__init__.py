"""Frequency-domain modelling of wave-trapper dispersive delay structures."""

from .analysis import (
    FrequencyGrid,
    SweepResult,
    SwingReport,
    coupling_from_field_ratio,
    group_delay_numeric,
    sweep,
    swing,
    unwrap_phase,
)
from .dispersion import (
    LineKind,
    LineModel,
    attenuation,
    cutoff_frequency,
    phase_constant,
    unit_group_delay,
)
from .errors import BelowCutoffError, ConfigurationError, DomainError, WaveTrapError
from .netlist import Netlist, NetlistError, parse, parse_file, serialize
from .network import (
    Cascade,
    JunctionMode,
    Line,
    Loop,
    Trapper,
    analytic_group_delay,
    cascade_transfer,
    line_transfer,
    resonance_frequencies,
    transfer,
    trapper_group_delay_analytic,
    trapper_transfer,
)
from .synthesis import DelayTarget, InfeasibleTargetError, TrapperFit, fit_trapper
from .timedomain import Signal, envelope_delay, gaussian_pulse, propagate

__version__ = "0.1.0"
