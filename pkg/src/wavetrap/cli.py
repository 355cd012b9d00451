"""Command-line front end.

Exit codes: 0 success, 1 diagnostics (bad netlist, infeasible target,
below-cutoff carrier, ...), 2 I/O failure.
"""

from __future__ import annotations

import argparse
import io
import math
import os
import sys
import tempfile
import warnings
from fractions import Fraction
from pathlib import Path

import numpy as np

from .analysis import FrequencyGrid, format_number, sweep
from .dispersion import LineModel
from .errors import WaveTrapError
from .netlist import (
    FREQUENCY_UNITS,
    LENGTH_UNITS,
    Netlist,
    NetlistError,
    parse_file,
    parse_quantity,
    serialize,
)
from .network import analytic_group_delay, block_cutoff, transfer
from .plot import sweep_svg
from .synthesis import DelayTarget, InfeasibleTargetError, fit_trapper
from .timedomain import envelope_delay, gaussian_pulse, propagate, required_length

TIME_UNITS = {
    "s": Fraction(1),
    "ms": Fraction(1, 10**3),
    "us": Fraction(1, 10**6),
    "ns": Fraction(1, 10**9),
    "ps": Fraction(1, 10**12),
}

EXIT_OK, EXIT_DIAG, EXIT_IO = 0, 1, 2


class _Diagnostic(Exception):
    pass


def _quantity(units, what):
    def convert(text):
        try:
            return parse_quantity(text, units, what)
        except NetlistError as exc:
            raise argparse.ArgumentTypeError(exc.message) from None
    convert.__name__ = what
    return convert


_freq = _quantity(FREQUENCY_UNITS, "frequency")
_time = _quantity(TIME_UNITS, "time")
_length = _quantity(LENGTH_UNITS, "length")


def _write_outputs(outputs: dict[Path, str]) -> None:
    """Write every file or none: contents go to temp files that are renamed at the end."""
    staged = []
    try:
        for path, text in outputs.items():
            directory = path.parent if str(path.parent) else Path(".")
            fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".part", dir=directory)
            staged.append((tmp, path))
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fp:
                fp.write(text)
        for tmp, path in staged:
            os.replace(tmp, path)
    finally:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.unlink(tmp)


def _load(path: str) -> Netlist:
    return parse_file(path)


def _csv(writer) -> str:
    buf = io.StringIO()
    writer(buf)
    return buf.getvalue()


def cmd_sweep(args) -> int:
    netlist = _load(args.netlist)
    base = netlist.sweeps[0].grid if netlist.sweeps else None
    start = args.start if args.start is not None else (base.f_start if base else None)
    stop = args.stop if args.stop is not None else (base.f_stop if base else None)
    points = args.points if args.points is not None else (base.n_points if base else None)
    if None in (start, stop, points):
        raise _Diagnostic(f"{args.netlist}: no sweep grid (add a 'sweep' directive or "
                          f"pass --start/--stop/--points)")
    result = sweep(netlist.root, FrequencyGrid(start, stop, points))
    for note in result.annotations:
        print(f"{args.netlist}: note: {note}", file=sys.stderr)
    text = _csv(result.write_csv)
    outputs = {}
    if args.output:
        outputs[Path(args.output)] = text
    if args.plot:
        outputs[Path(args.plot)] = sweep_svg(result, title=Path(args.netlist).name)
    _write_outputs(outputs)
    if not args.output:
        sys.stdout.write(text)
    return EXIT_OK


def _delay_at(block, f0: float) -> float:
    try:
        return float(analytic_group_delay(block, f0))
    except WaveTrapError:
        h = 1e-6 * f0
        phases = np.unwrap(np.angle(transfer(block, np.array([f0 - h, f0, f0 + h]))))
        return float(-(phases[2] - phases[0]) / (2 * np.pi * 2 * h))


def cmd_pulse(args) -> int:
    netlist = _load(args.netlist)
    block = netlist.root
    pulse = netlist.pulses[0] if netlist.pulses else None
    f0 = args.f0 if args.f0 is not None else (pulse.f0 if pulse else None)
    if f0 is None:
        raise _Diagnostic(f"{args.netlist}: no carrier (add a 'pulse' directive or pass --f0)")
    if args.sigma_t is not None:
        sigma_t = args.sigma_t
    else:
        sigma_f = args.sigma_f if args.sigma_f is not None else (pulse.sigma_f if pulse else None)
        if sigma_f is None:
            raise _Diagnostic(f"{args.netlist}: no envelope width (pass --sigma-f or --sigma-t)")
        sigma_t = 1.0 / (2 * math.pi * sigma_f)
    fc = block_cutoff(block)
    if f0 <= fc:
        raise _Diagnostic(
            f"{args.netlist}: carrier {f0:.6g} Hz is at or below cutoff {fc:.6g} Hz"
        )

    sigma_f = 1.0 / (2 * math.pi * sigma_t)
    fs = args.sample_rate or 4.0 * (f0 + 8.0 * sigma_f)
    band = np.linspace(max(f0 - 4 * sigma_f, fc * 1.0001, f0 * 1e-3), f0 + 4 * sigma_f, 201)
    taus = np.array([_delay_at(block, f) for f in band]) if fc < band[0] else np.array([0.0])
    advance = max(0.0, -float(np.min(taus)))
    t0 = 6.0 * sigma_t + 2.0 * advance
    n = required_length(2 * t0, float(np.max(np.abs(taus))), fs)

    inp = gaussian_pulse(f0, sigma_t, fs, n, t0=t0)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        out = propagate(block, inp)
    for w in caught:
        print(f"{args.netlist}: warning: {w.message}", file=sys.stderr)
    measured = envelope_delay(inp, out, f0)
    analytic = _delay_at(block, f0)

    outputs = {}
    if args.input_csv:
        outputs[Path(args.input_csv)] = _csv(inp.write_csv)
    if args.output_csv:
        outputs[Path(args.output_csv)] = _csv(out.write_csv)
    _write_outputs(outputs)
    print(f"measured_delay_s={format_number(measured)} analytic_delay_s={format_number(analytic)}")
    return EXIT_OK


def cmd_fit(args) -> int:
    if args.a is not None:
        model = LineModel.waveguide(args.a, args.er, args.tand)
    else:
        model = LineModel.tem(args.er, args.tand)
    target = DelayTarget(
        f_peak=args.f_peak,
        delta_tau=args.delta_tau,
        model=model,
        m=args.m,
        k_max=args.k_max,
        l1_ratio=args.l1_ratio,
    )
    fit = fit_trapper(target)
    print(f"k={format_number(fit.k)} L1_m={format_number(fit.L1)} L2_m={format_number(fit.L2)} "
          f"m={fit.m} residual={format_number(fit.residual)}")
    if args.output:
        netlist = Netlist(
            models={"m1": model},
            blocks={"t1": fit.trapper},
            top="t1",
            runs=[],
            refs={"t1": ("m1",)},
        )
        _write_outputs({Path(args.output): serialize(netlist)})
    return EXIT_OK


def cmd_check(args) -> int:
    netlist = _load(args.netlist)
    print(f"{args.netlist}: ok ({len(netlist.models)} models, {len(netlist.blocks)} blocks, "
          f"top={netlist.top}, {len(netlist.runs)} runs)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wavetrap",
        description="Wave-trapper dispersive delay structures: sweeps, pulses and fits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="tabulate |H|, phase and group delay of a netlist")
    p.add_argument("netlist")
    p.add_argument("--start", type=_freq, help="first frequency, e.g. 1GHz")
    p.add_argument("--stop", type=_freq, help="last frequency")
    p.add_argument("--points", type=int, help="number of grid points (>= 3)")
    p.add_argument("-o", "--output", help="CSV path (default: stdout)")
    p.add_argument("--plot", help="also write a dual-axis SVG here")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("pulse", help="propagate a Gaussian pulse and measure its delay")
    p.add_argument("netlist")
    p.add_argument("--f0", type=_freq, help="carrier frequency")
    width = p.add_mutually_exclusive_group()
    width.add_argument("--sigma-f", type=_freq, help="spectral envelope sigma")
    width.add_argument("--sigma-t", type=_time, help="temporal envelope sigma, e.g. 200ns")
    p.add_argument("--sample-rate", type=_freq, help="default: 4 (f0 + 8 sigma_f)")
    p.add_argument("--input-csv", help="write the input waveform here")
    p.add_argument("--output-csv", help="write the output waveform here")
    p.set_defaults(func=cmd_pulse)

    p = sub.add_parser("fit", help="fit a single-loop trapper to a delay-swing target")
    p.add_argument("--f-peak", type=_freq, required=True)
    p.add_argument("--delta-tau", type=_time, required=True, help="e.g. 6.49ns")
    p.add_argument("--er", type=float, required=True)
    p.add_argument("--a", type=_length, help="waveguide width (omit for TEM), e.g. 0.7in")
    p.add_argument("--tand", type=float, default=0.0)
    p.add_argument("--m", type=int, help="resonance order (default: smallest feasible)")
    p.add_argument("--k-max", type=float, default=0.99)
    p.add_argument("--l1-ratio", type=float, default=0.1, help="L1/L2 (default 0.1)")
    p.add_argument("-o", "--output", help="write the fitted netlist here")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("check", help="parse and validate a netlist")
    p.add_argument("netlist")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NetlistError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_DIAG
    except InfeasibleTargetError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_DIAG
    except (_Diagnostic, WaveTrapError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIAG
    except BrokenPipeError:
        # reader went away (e.g. `| head`); silence the flush at interpreter exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_IO
    except OSError as exc:
        name = exc.filename or ""
        print(f"error: {name}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
