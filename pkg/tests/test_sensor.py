import math

import numpy as np
import pytest

from hombeat.physics import IDEAL, BiphotonState, ChannelParams, angular_from_thz
from hombeat.sensor import (
    FiberModel,
    calibrate_length,
    calibrated,
    coincidence_vs_temperature,
    detuning_of,
    phase_shift,
    temperature_resolution,
    thermal_coefficient,
)

STATE = BiphotonState(angular_from_thz(3.7), 1.5896)


def at(thz, length=0.098, **kw):
    return FiberModel.from_detuning(thz, length_0=length, **kw)


class TestModel:
    def test_from_detuning(self):
        m = at(3.7)
        assert detuning_of(m) == pytest.approx(angular_from_thz(3.7), rel=1e-12)
        assert m.lambda_s < 810 < m.lambda_i

    def test_wavenumbers(self):
        m = FiberModel(800.0, 1600.0, 1.0)
        ks, ki = m.wavenumbers
        assert ks == pytest.approx(2 * math.pi / 800e-9, rel=1e-15)
        assert ks == pytest.approx(2 * ki, rel=1e-15)

    @pytest.mark.parametrize(
        "kw", [dict(lambda_s=0), dict(length_0=-1), dict(n_group_s=0.9), dict(dn_dt=1.0), dict(dl_dt=math.nan)]
    )
    def test_rejects(self, kw):
        base = dict(lambda_s=805.0, lambda_i=815.0, length_0=0.1)
        base.update(kw)
        with pytest.raises(ValueError):
            FiberModel(**base)


class TestPhase:
    def test_zero_heating(self):
        assert phase_shift(at(3.7), 0.0) == 0.0

    def test_degenerate_wavelengths(self):
        assert phase_shift(FiberModel(810.0, 810.0, 0.5), 3.0) == 0.0

    def test_zero_length_no_expansion(self):
        m = at(3.7, length=0.0, dl_dt=0.0)
        np.testing.assert_array_equal(phase_shift(m, np.linspace(-5, 5, 11)), 0.0)

    def test_reference_length(self):
        assert thermal_coefficient(at(3.7)) == pytest.approx(0.13, rel=0.01)

    def test_coefficient_is_unit_heating(self):
        m = at(7.4)
        assert thermal_coefficient(m) == phase_shift(m, 1.0)

    def test_linear_in_temperature(self):
        m = at(11.2)
        t = np.linspace(-20, 20, 41)
        np.testing.assert_allclose(phase_shift(m, t), thermal_coefficient(m) * t, rtol=1e-14, atol=1e-15)

    def test_proportional_to_detuning(self):
        # equal group indices: both terms scale with k_s - k_i
        c = [thermal_coefficient(FiberModel.from_detuning(d, length_0=0.3)) for d in (2.0, 4.0, 8.0)]
        assert c[1] / c[0] == pytest.approx(2.0, rel=1e-6)
        k = [
            FiberModel.from_detuning(d, length_0=0.3).wavenumbers for d in (2.0, 4.0, 8.0)
        ]
        dk = [a - b for a, b in k]
        for ci, dki in zip(c, dk):
            assert ci / dki == pytest.approx(c[0] / dk[0], rel=1e-12)


class TestCalibration:
    def test_reference_point(self):
        L = calibrate_length(0.13, at(3.7, length=0.0))
        assert L == pytest.approx(0.098, rel=0.01)

    def test_round_trip(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            m = FiberModel.from_detuning(
                rng.uniform(0.5, 20), length_0=rng.uniform(0.01, 5),
                n_group_s=rng.uniform(1.4, 1.5), n_group_i=rng.uniform(1.4, 1.5),
            )
            coeff = thermal_coefficient(m)
            assert calibrate_length(coeff, m) == pytest.approx(m.length_0, rel=1e-12)
            assert thermal_coefficient(calibrated(coeff, m)) == pytest.approx(coeff, rel=1e-12)

    def test_degenerate_rejected(self):
        with pytest.raises(ValueError):
            calibrate_length(0.1, FiberModel(810.0, 810.0, 0.0))


class TestSweep:
    def test_pi_flips_fringe(self):
        m = at(3.7)
        t_pi = math.pi / thermal_coefficient(m)
        p = coincidence_vs_temperature(m, STATE, IDEAL, np.array([0.0, t_pi]))
        assert p.p2[0] == pytest.approx(1.0, abs=1e-15)
        assert p.p2[1] == pytest.approx(0.0, abs=1e-12)

    def test_temperature_period(self):
        m = calibrated(0.48, at(17.1, length=0.0))
        period = 2 * math.pi / thermal_coefficient(m)
        assert period == pytest.approx(13.09, abs=0.01)
        ch = ChannelParams(0.4, 0.9)
        t = np.linspace(0, 5, 11)
        a = coincidence_vs_temperature(m, STATE, ch, t, 0.05)
        b = coincidence_vs_temperature(m, STATE, ch, t + period, 0.05)
        np.testing.assert_allclose(a.p2, b.p2, atol=1e-12)

    def test_normalised(self):
        p = coincidence_vs_temperature(at(7.4), STATE, ChannelParams(0.3, 0.8), np.linspace(0, 30, 31), 0.02)
        np.testing.assert_allclose(p.p0 + p.p1 + p.p2, 1.0, atol=1e-12)

    def test_scalar(self):
        p = coincidence_vs_temperature(at(3.7), STATE, IDEAL, 0.0)
        assert p.p2 == 1.0


class TestResolution:
    def test_resolution_chain(self):
        s = BiphotonState(angular_from_thz(17.1), 1.5896)
        assert temperature_resolution(0.48, s, 5.4e-4) == pytest.approx(0.12, rel=0.02)

    def test_zero_precision(self):
        assert temperature_resolution(0.48, STATE, 0.0) == 0.0

    def test_scaling(self):
        assert temperature_resolution(0.2, STATE, 1e-3) == pytest.approx(
            2 * temperature_resolution(0.4, STATE, 1e-3), rel=1e-15
        )

    @pytest.mark.parametrize("coeff", [0.0, -0.1])
    def test_rejects(self, coeff):
        with pytest.raises(ValueError):
            temperature_resolution(coeff, STATE, 1e-3)
