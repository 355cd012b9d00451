import io
import math
import re

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wavetrap.analysis import (
    SWEEP_CSV_HEADER,
    FrequencyGrid,
    SweepError,
    coupling_from_field_ratio,
    field_ratio_from_coupling,
    format_number,
    group_delay_numeric,
    sweep,
    swing,
    unwrap_phase,
)
from wavetrap.dispersion import SPEED_OF_LIGHT, cutoff_frequency, unit_group_delay
from wavetrap.errors import DomainError
from wavetrap.network import Line, Trapper, trapper_group_delay_analytic

from conftest import ER, L1, L2, LT, TEM_PERIOD, tem_trapper, siw_trapper


class TestGrid:
    def test_spacing(self):
        g = FrequencyGrid(1e9, 3e9, 201)
        assert g.step == 1e7
        assert g.frequencies[0] == 1e9 and g.frequencies[-1] == 3e9

    @pytest.mark.parametrize("args", [(0, 1e9, 10), (2e9, 1e9, 10), (1e9, 2e9, 2), (1e9, 2e9, 3.5)])
    def test_invalid(self, args):
        with pytest.raises(DomainError):
            FrequencyGrid(*args)


class TestUnwrap:
    def test_positive_jump(self):
        np.testing.assert_allclose(unwrap_phase([0, 3.0, -3.0]), [0, 3.0, 2 * np.pi - 3.0])
        assert unwrap_phase([0, 3.0, -3.0])[2] == pytest.approx(3.2832, abs=1e-4)

    def test_negative_jump(self):
        assert unwrap_phase([0, -3.0, 3.0])[2] == pytest.approx(-3.2832, abs=1e-4)

    def test_small_steps_unchanged(self):
        x = [0.0, 0.5, 1.4, 2.9, 3.1, 3.14]
        assert unwrap_phase(x).tolist() == x

    def test_half_turn_step_kept_positive(self):
        out = unwrap_phase([0.0, np.pi])
        assert out[1] == np.pi
        out = unwrap_phase([0.0, -np.pi])
        assert out[1] == np.pi

    def test_empty(self):
        with pytest.raises(DomainError):
            unwrap_phase([])

    @settings(max_examples=100, deadline=None)
    @given(st.floats(-50, 50), st.lists(st.floats(-3.1, 3.1), min_size=1, max_size=200))
    def test_recovers_continuous_phase(self, start, steps):
        phi = start + np.concatenate(([0.0], np.cumsum(steps)))
        wrapped = np.angle(np.exp(1j * phi))
        out = unwrap_phase(wrapped)
        offset = out[0] - phi[0]
        turns = offset / (2 * np.pi)
        assert turns == pytest.approx(round(turns), abs=1e-9)
        np.testing.assert_allclose(out - offset, phi, atol=1e-9)
        assert out[0] == wrapped[0]


class TestNumericDelay:
    def test_linear_phase(self):
        f = np.linspace(1e9, 2e9, 11)
        tau = group_delay_numeric(-2 * np.pi * f * 1e-9, f)
        np.testing.assert_allclose(tau, 1e-9, rtol=1e-12)

    def test_constant_phase(self):
        np.testing.assert_allclose(group_delay_numeric(np.full(5, 0.3), FrequencyGrid(1e9, 2e9, 5)), 0, atol=1e-24)

    def test_length_mismatch(self):
        with pytest.raises(DomainError):
            group_delay_numeric(np.zeros(4), FrequencyGrid(1e9, 2e9, 5))

    @pytest.mark.parametrize("factory", [tem_trapper, siw_trapper])
    def test_matches_closed_form(self, factory):
        t = factory(0.9)
        result = sweep(t, FrequencyGrid(5e9, 8e9, 30_001))  # 100 kHz step
        ana = trapper_group_delay_analytic(t, result.freq)
        # zero crossings make a pure ratio meaningless; floor at the loop transit delay
        scale = np.maximum(np.abs(ana), LT * unit_group_delay(t.model, result.freq))
        err = np.abs(result.tau - ana)[result.tau_valid] / scale[result.tau_valid]
        assert err.max() <= 5e-3

    def test_error_shrinks_quadratically(self):
        t = siw_trapper(0.9)
        errs = []
        for n in (3001, 6001):
            r = sweep(t, FrequencyGrid(5e9, 8e9, n))
            ana = trapper_group_delay_analytic(t, r.freq)
            errs.append(np.max(np.abs(r.tau - ana)[r.tau_valid]))
        assert 3.5 < errs[0] / errs[1] < 4.5


class TestSweep:
    def test_tem_line(self, tem):
        r = sweep(Line(tem, 0.1016), FrequencyGrid(1e9, 3e9, 201))
        np.testing.assert_allclose(r.mag_db, 0, atol=1e-12)
        np.testing.assert_allclose(r.tau, 0.1016 * math.sqrt(ER) / SPEED_OF_LIGHT, rtol=1e-9)
        assert r.tau[100] == pytest.approx(0.6230e-9, abs=1e-13)

    def test_k_zero_trapper_equals_line(self, siw):
        g = FrequencyGrid(4.8e9, 8e9, 321)
        a = sweep(Trapper.single(siw, L1, 0.0, L2), g)
        b = sweep(Line(siw, L1), g)
        for field in ("mag_db", "phase", "tau"):
            np.testing.assert_array_equal(getattr(a, field), getattr(b, field))

    def test_spanning_cutoff(self, siw):
        r = sweep(Line(siw, 0.05), FrequencyGrid(3e9, 6e9, 301))
        fc = cutoff_frequency(siw)
        below = r.freq < fc
        assert np.all(np.isfinite(r.mag_db))
        assert r.mag_db[0] < -40
        assert np.all(np.diff(r.mag_db[below]) > 0)
        assert np.all(r.undefined[below])
        assert not np.any(r.undefined[r.freq > fc + 2 * 1e7])
        assert any("cutoff" in a for a in r.annotations)
        assert np.all(np.isnan([row[3] for row, u in zip(r.rows(), r.undefined) if u]))

    def test_above_second_mode_annotated(self, siw):
        r = sweep(Line(siw, 0.05), FrequencyGrid(5e9, 10e9, 11))
        assert any("2*fc" in a for a in r.annotations)

    def test_endpoints_flagged(self, tem):
        r = sweep(Line(tem, 0.1), FrequencyGrid(1e9, 2e9, 5))
        assert r.one_sided.tolist() == [True, False, False, False, True]

    def test_rows_sorted_and_steps_unwrapped(self):
        r = sweep(siw_trapper(0.9), FrequencyGrid(4.7e9, 8e9, 2001))
        assert np.all(np.diff(r.freq) > 0)
        d = np.diff(r.phase)
        assert np.all((d > -np.pi) & (d <= np.pi))

    def test_deterministic(self):
        g = FrequencyGrid(5e9, 8e9, 501)
        a, b = io.StringIO(), io.StringIO()
        sweep(siw_trapper(0.9), g).write_csv(a)
        sweep(siw_trapper(0.9), g).write_csv(b)
        assert a.getvalue() == b.getvalue()


class TestSwing:
    def test_tem_trapper_period(self):
        g = FrequencyGrid(0.9 * TEM_PERIOD, 2.1 * TEM_PERIOD, 12_001)
        rep = swing(sweep(tem_trapper(0.9), g), (TEM_PERIOD * 1.0, TEM_PERIOD * 2.0))
        assert rep.delta_tau == pytest.approx(6.49e-9, abs=0.005e-9)
        assert rep.f_at_max == pytest.approx(TEM_PERIOD, rel=1e-4)

    def test_constant_delay(self, tem):
        rep = swing(sweep(Line(tem, 0.3), FrequencyGrid(1e9, 2e9, 101)))
        assert rep.delta_tau == pytest.approx(0, abs=1e-22)
        assert rep.peaks == ()

    def test_siw_line_band(self, siw):
        r = sweep(Line(siw, 0.4064), FrequencyGrid(4.65e9, 5.35e9, 701))
        rep = swing(r, (4.7e9, 5.3e9))
        assert rep.delta_tau == pytest.approx(6.4e-9, rel=0.15)
        assert rep.f_at_max == pytest.approx(4.7e9) and rep.f_at_min == pytest.approx(5.3e9)

    def test_extrema_skip_endpoints(self, siw):
        r = sweep(Line(siw, 0.4064), FrequencyGrid(4.7e9, 5.3e9, 601))
        rep = swing(r)
        assert rep.f_at_max == r.freq[1]

    def test_peaks_siw_trapper(self):
        r = sweep(siw_trapper(0.9), FrequencyGrid(5e9, 8e9, 3001))
        peaks = [f for f, _ in swing(r).peaks]
        assert peaks == pytest.approx([5.435e9, 6.340e9, 7.423e9], rel=5e-4)

    def test_prominence_filters(self):
        r = sweep(siw_trapper(0.9), FrequencyGrid(5e9, 8e9, 3001))
        assert swing(r, prominence=2.0).peaks == ()

    def test_delta_tau_increasing_in_k(self):
        g = FrequencyGrid(0.9 * TEM_PERIOD, 2.1 * TEM_PERIOD, 4001)
        band = (TEM_PERIOD, 2 * TEM_PERIOD)
        swings = [swing(sweep(tem_trapper(k), g), band).delta_tau for k in np.arange(1, 10) / 10]
        assert all(b > a for a, b in zip(swings, swings[1:]))

    def test_empty_intersection(self, tem):
        r = sweep(Line(tem, 0.1), FrequencyGrid(1e9, 2e9, 11))
        with pytest.raises(SweepError):
            swing(r, (3e9, 4e9))


class TestFieldRatio:
    def test_74_percent(self):
        assert coupling_from_field_ratio(1.69)[1] == pytest.approx(0.7407, abs=1e-4)

    def test_zero(self):
        assert coupling_from_field_ratio(0) == (0.0, 0.0)

    def test_144_ratio(self):
        # r^2/(1+r^2) = 0.6747; the 63% quoted alongside it does not follow from the formula
        assert coupling_from_field_ratio(1.44)[1] == pytest.approx(0.6747, abs=1e-4)

    def test_power_ratio_9p4(self):
        assert coupling_from_field_ratio(math.sqrt(9.4))[1] == pytest.approx(0.904, abs=1e-3)

    def test_negative(self):
        with pytest.raises(DomainError):
            coupling_from_field_ratio(-0.1)

    @settings(max_examples=100)
    @given(st.floats(0, 1e3), st.floats(1e-6, 10))
    def test_monotone_and_round_trip(self, r, dr):
        k, frac = coupling_from_field_ratio(r)
        assert k * k == pytest.approx(frac, rel=1e-15)
        assert coupling_from_field_ratio(r + dr)[1] > frac or frac > 1 - 1e-12
        # inversion amplifies rounding in k by about 1 + r^2
        assert field_ratio_from_coupling(k) == pytest.approx(r, rel=1e-13 * (1 + r * r), abs=1e-12)


class TestCsv:
    def test_format(self):
        r = sweep(tem_trapper(0.9), FrequencyGrid(1e9, 8e9, 51))
        buf = io.StringIO()
        r.write_csv(buf)
        text = buf.getvalue()
        assert "\r" not in text
        lines = text.split("\n")
        assert lines[0] == SWEEP_CSV_HEADER == "freq_hz,mag_db,phase_rad,group_delay_s"
        assert lines[-1] == ""
        assert len(lines) == 51 + 2
        for line in lines[1:-1]:
            for cell in line.split(","):
                assert re.fullmatch(r"-?\d+\.\d+", cell), cell
                digits = cell.lstrip("-").replace(".", "").lstrip("0")
                assert len(digits) >= 9
        assert [float(x) for x in lines[1].split(",")] == pytest.approx(list(next(r.rows())), rel=1e-11)

    @pytest.mark.parametrize("x,text", [(0.0, "0.00000000000"), (-0.0, "0.00000000000"),
                                        (1.5e9, "1500000000.00"), (float("nan"), "nan")])
    def test_format_number(self, x, text):
        assert format_number(x) == text
