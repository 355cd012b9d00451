"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line."""

import math
import warnings

import numpy as np
import pytest
from scipy.signal import find_peaks

from wavetrap.analysis import FrequencyGrid, sweep, swing
from wavetrap.dispersion import SPEED_OF_LIGHT, LineModel, cutoff_frequency, unit_group_delay
from wavetrap.netlist import NetlistError, parse, parse_file, serialize
from wavetrap.network import (
    Cascade,
    Line,
    Loop,
    Trapper,
    resonance_frequencies,
    trapper_group_delay_analytic,
    trapper_transfer,
)
from wavetrap.synthesis import DelayTarget, fit_trapper, measure_peak, period_window
from wavetrap.timedomain import ChannelWarning, envelope_delay, gaussian_pulse, propagate, required_length

from conftest import A_SIW, ER, INCH, L1, L2, LT, TEM_PERIOD, tem_trapper, siw_trapper
from test_netlist import MALFORMED, VALID
from test_network import series_oracle


@pytest.fixture
def verdict(capsys):
    def report(number, ok, detail):
        with capsys.disabled():
            print(f"\nCRITERION {number:>2}: {'PASS' if ok else 'FAIL'} | {detail}")
        assert ok, detail
    return report


def _closed_form_swing(t):
    # extrema of the single-loop closed form sit at theta = 2m pi (max) and (2m+1) pi (min)
    f_peak = resonance_frequencies(t, (0.5e9, 2.5e9))[0][1]
    f_trough = 1.5 * f_peak
    hi, lo = trapper_group_delay_analytic(t, np.array([f_peak, f_trough]))
    return hi - lo


def test_criterion_01_tem_trapper(verdict):
    lines = []
    ok = True
    grid = FrequencyGrid(0.5 * TEM_PERIOD, 1.5 * TEM_PERIOD, int(round(TEM_PERIOD / 1e5)) + 1)
    for k, paper in ((0.707, 2e-9), (0.9, 6e-9)):
        t = tem_trapper(k)
        closed = _closed_form_swing(t)
        numeric = swing(sweep(t, grid)).delta_tau
        good = all(abs(v - paper) <= 0.10 * paper for v in (closed, numeric))
        ok &= good
        lines.append(f"k={k}: closed {closed * 1e9:.4f} ns, sweep {numeric * 1e9:.4f} ns vs {paper * 1e9:.0f} ns")
    res = np.array([f for _, f in resonance_frequencies(tem_trapper(0.9), (0.5e9, 8e9))])
    expected = TEM_PERIOD * np.arange(1, res.size + 1)
    res_ok = res.size == 5 and np.allclose(res, expected, rtol=1e-4)
    ok &= res_ok
    lines.append("f_m = " + ", ".join(f"{f / 1e9:.4f}" for f in res) + " GHz")
    verdict(1, ok, "; ".join(lines))


def test_criterion_02_siw_trapper(verdict):
    t = siw_trapper(0.9)
    fc = cutoff_frequency(t.model)
    res = np.array([f for _, f in resonance_frequencies(t, (fc, 8e9))])
    # peaks read off a dense sweep as an independent check of the closed-form positions
    r = sweep(t, FrequencyGrid(4.7e9, 8e9, 33_001))
    swept = np.array([f for f, _ in swing(r).peaks])
    paper = np.array([4.81e9, 5.44e9, 6.34e9, 7.42e9])
    pos_ok = (res.size == 4 and swept.size == 4
              and np.all(np.abs(res - paper) <= 0.01e9) and np.all(np.abs(swept - paper) <= 0.01e9))
    gaps = np.diff(res)
    spread_ok = bool(np.all(np.diff(gaps) > 0))
    f_local, local = measure_peak(t, 2)
    swing_ok = 5.4e9 <= f_local <= 5.5e9 and abs(local - 10e-9) <= 0.25 * 10e-9
    verdict(2, pos_ok and spread_ok and swing_ok,
            f"fc={fc / 1e9:.3f} GHz; peaks " + ", ".join(f"{f / 1e9:.3f}" for f in res)
            + f" GHz; gaps grow: {spread_ok}; local swing {local * 1e9:.2f} ns at {f_local / 1e9:.3f} GHz")


def test_criterion_03_siw_line_delay(verdict):
    siw = LineModel.waveguide(A_SIW, ER)
    line = Line(siw, 16 * INCH)
    r = sweep(line, FrequencyGrid(4.7e9, 5.3e9, 601))
    tau_lo, tau_hi = r.tau[0], r.tau[-1]
    closed_lo, closed_hi = 16 * INCH * unit_group_delay(siw, np.array([4.7e9, 5.3e9]))
    dtau = swing(sweep(line, FrequencyGrid(4.69e9, 5.31e9, 621)), (4.7e9, 5.3e9)).delta_tau
    far = float(16 * INCH * unit_group_delay(siw, 20e9))
    limit = 16 * INCH * math.sqrt(ER) / SPEED_OF_LIGHT
    checks = [
        abs(tau_lo - 11e-9) <= 0.15 * 11e-9 and abs(closed_lo - 11e-9) <= 0.15 * 11e-9,
        abs(tau_hi - 5e-9) <= 0.15 * 5e-9 and abs(closed_hi - 5e-9) <= 0.15 * 5e-9,
        abs(dtau - 6e-9) <= 0.15 * 6e-9,
        abs(limit - 2.49e-9) <= 0.005e-9 and abs(far - limit) <= 0.05 * limit,
    ]
    verdict(3, all(checks),
            f"tau(4.7)={closed_lo * 1e9:.2f} ns, tau(5.3)={closed_hi * 1e9:.2f} ns, "
            f"dtau={dtau * 1e9:.2f} ns, tau(20 GHz)={far * 1e9:.3f} ns vs limit {limit * 1e9:.3f} ns")


def test_criterion_04_cascade(verdict):
    siw = LineModel.waveguide(A_SIW, ER)
    fit = fit_trapper(DelayTarget(f_peak=6.34e9, delta_tau=10e-9, model=siw, m=3))
    cell = fit.trapper
    chain = Cascade((cell,), repeat=12)
    lo, hi = period_window(siw, cell.round_trip_length, fit.m)
    g = FrequencyGrid(lo, hi, 8001)
    per_cell = swing(sweep(cell, g)).delta_tau
    total = swing(sweep(chain, g)).delta_tau
    verdict(4, abs(total - 120e-9) <= 0.02 * 120e-9,
            f"fitted k={fit.k:.5f}, cell swing {per_cell * 1e9:.4f} ns, 12-cell swing {total * 1e9:.3f} ns")


def test_criterion_05_series_oracle(verdict):
    t = siw_trapper(0.9)
    f = np.linspace(5e9, 8e9, 3001)
    closed = trapper_transfer(t, f)
    err = float(np.max(np.abs(series_oracle(t, f, 60) - closed) / np.abs(closed)))  # n = 0..60
    verdict(5, err <= 1e-5,
            f"max relative error {err:.4e} (truncation bound k^61 = {0.9 ** 61:.4e}) vs limit 1e-5")


def test_criterion_06_numeric_delay(verdict):
    parts = []
    ok = True
    for name, t, band in (("TEM", tem_trapper(0.9), (1e9, 8e9)),
                          ("waveguide", siw_trapper(0.9), (4.7e9, 8e9))):
        n = int(round((band[1] - band[0]) / 1e5)) + 1
        r = sweep(t, FrequencyGrid(band[0], band[1], n))
        interior = r.tau_valid & ~r.one_sided
        ana = trapper_group_delay_analytic(t, r.freq)
        # the delay crosses zero twice per period; deviations are measured against
        # max(|tau|, loop transit delay) so those crossings do not divide by ~0
        scale = np.maximum(np.abs(ana), LT * unit_group_delay(t.model, r.freq))
        dev = float(np.max((np.abs(r.tau - ana) / scale)[interior]))
        raw = float(np.max((np.abs(r.tau - ana) / np.abs(ana))[interior]))
        ok &= dev <= 5e-3
        parts.append(f"{name}: {dev:.3%} (plain ratio {raw:.2%} at a zero crossing)")
    verdict(6, ok, "; ".join(parts))


def test_criterion_07_pulse(verdict):
    t = tem_trapper(0.9)
    sigma_f = TEM_PERIOD / 400
    sigma_t = 1 / (2 * math.pi * sigma_f)
    fs = 8e9
    parts = []
    ok = True
    for label, f0 in (("peak", TEM_PERIOD), ("trough", 1.5 * TEM_PERIOD), ("slope", 1.25 * TEM_PERIOD)):
        expected = float(trapper_group_delay_analytic(t, f0))
        n = required_length(12 * sigma_t, 8e-9, fs)
        s = gaussian_pulse(f0, sigma_t, fs, n)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ChannelWarning)
            out = propagate(t, s)
        measured = envelope_delay(s, out, f0)
        err = abs(measured - expected) / abs(expected)
        ok &= err <= 0.05
        parts.append(f"{label} {f0 / 1e9:.4f} GHz: {measured * 1e9:.4f} vs {expected * 1e9:.4f} ns ({err:.2%})")
    verdict(7, ok, "; ".join(parts))


def test_criterion_08_loss_trend(verdict):
    grid = FrequencyGrid(5e9, 8e9, 3001)
    lossless = sweep(siw_trapper(0.9), grid)
    low = sweep(siw_trapper(0.9, tan_delta=1e-4), grid)
    high = sweep(siw_trapper(0.9, tan_delta=1e-3), grid)
    peaks = [int(np.searchsorted(high.freq, f)) for f, _ in swing(high).peaks]
    il_low, il_high = -low.mag_db, -high.mag_db
    rising = bool(peaks) and all(il_high[i] > il_low[i] for i in peaks)
    # dissipative loss: what the substrate adds on top of the lossless response
    excess = lossless.mag_db - high.mag_db
    loss_peaks, _ = find_peaks(excess, prominence=0.05 * np.ptp(excess))
    coincide = len(loss_peaks) == len(peaks) and all(
        abs(int(a) - b) <= 1 for a, b in zip(loss_peaks, peaks))
    verdict(8, rising and coincide,
            "delay peaks " + ", ".join(f"{high.freq[i] / 1e9:.3f}" for i in peaks)
            + " GHz; loss peaks " + ", ".join(f"{high.freq[i] / 1e9:.3f}" for i in loss_peaks)
            + " GHz; IL rise at peaks " + ", ".join(f"{il_high[i] - il_low[i]:.3f}" for i in peaks) + " dB")


def test_criterion_09_two_loops(verdict):
    tem = LineModel.tem(ER)
    grid = FrequencyGrid(0.5 * TEM_PERIOD, 1.5 * TEM_PERIOD, 20_001)

    def trap(*ks):
        return Trapper(tem, L1, tuple(Loop(k, L2) for k in ks))

    single = swing(sweep(trap(0.9), grid)).delta_tau
    splits = [swing(sweep(trap(*ks), grid)).delta_tau for ks in ((0.45, 0.45), (0.6, 0.3), (0.3, 0.3, 0.3))]
    unchanged = all(abs(s - single) <= 1e-9 * single for s in splits)
    sums = [swing(sweep(trap(s / 2, s / 2), grid)).delta_tau for s in (0.3, 0.5, 0.7, 0.8, 0.9, 0.95)]
    increasing = all(b > a for a, b in zip(sums, sums[1:]))
    verdict(9, unchanged and increasing,
            f"single k=0.9: {single * 1e9:.4f} ns; split loops "
            + ", ".join(f"{s * 1e9:.4f}" for s in splits) + " ns; sum sweep "
            + ", ".join(f"{s * 1e9:.3f}" for s in sums) + " ns")


def test_criterion_10_corpus(verdict):
    round_trips = 0
    for path in VALID:
        n = parse_file(path)
        if parse(serialize(n)) == n:
            round_trips += 1
    located = 0
    for path in MALFORMED:
        text = path.read_text()
        want = tuple(int(x) for x in text.split("\n", 1)[0].split()[-1].split(":"))
        try:
            parse(text)
        except NetlistError as exc:
            located += (exc.line, exc.col) == want and str(exc).count("\n") == 0
    ok = len(VALID) == 20 and len(MALFORMED) == 20 and round_trips == 20 and located == 20
    verdict(10, ok, f"{round_trips}/{len(VALID)} valid round-trip, "
                    f"{located}/{len(MALFORMED)} malformed at the expected line:col")
