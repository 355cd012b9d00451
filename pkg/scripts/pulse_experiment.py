"""Narrowband pulse delay versus the closed form across one period of the
TEM k=0.9 trapper. Prints a table; no files written.

    python scripts/pulse_experiment.py [--carriers 9] [--fraction 400]
"""

from __future__ import annotations

import argparse
import math
import warnings

import numpy as np

from wavetrap.dispersion import LineModel
from wavetrap.network import Trapper, trapper_group_delay_analytic
from wavetrap.timedomain import ChannelWarning, envelope_delay, gaussian_pulse, propagate, required_length

INCH = 0.0254


def main(argv=None) -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--carriers", type=int, default=9)
    ap.add_argument("--fraction", type=float, default=400.0,
                    help="spectral sigma as a fraction of the resonance spacing")
    ap.add_argument("--k", type=float, default=0.9)
    args = ap.parse_args(argv)

    t = Trapper.single(LineModel.tem(3.38), 0.4 * INCH, args.k, 4 * INCH)
    period = 1.4591e9
    sigma_t = args.fraction / (2 * math.pi * period)
    fs = 8e9
    n = required_length(12 * sigma_t, 10e-9, fs)
    print(f"{'f0 [GHz]':>9} {'pulse [ns]':>11} {'closed [ns]':>12} {'err':>8}")
    for f0 in np.linspace(period, 2 * period, args.carriers):
        s = gaussian_pulse(f0, sigma_t, fs, n)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ChannelWarning)
            measured = envelope_delay(s, propagate(t, s), f0)
        closed = float(trapper_group_delay_analytic(t, f0))
        print(f"{f0 / 1e9:9.4f} {measured * 1e9:11.4f} {closed * 1e9:12.4f} "
              f"{abs(measured - closed) / abs(closed):8.2%}")


if __name__ == "__main__":
    main()
