"""Emission log-weights, grid spectra, thermal baselines, and comparisons."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bhspectra import (
    BlackHoleState,
    DomainError,
    Emission,
    Family,
    GridSpec,
    Normalization,
    RemnantInvalid,
    UsageError,
    build_spectrum,
    build_thermal_spectrum,
    compare_thermal,
    emission_log_weight,
    emission_log_weights,
    thermal_log_weight,
)
from bhspectra.spectrum import emission_log_weights_bulk, entropy_function_for
from bhspectra.typicality import MacroState, spectrum_from_entropy


def pw(m: float, w: float) -> float:
    """Tunneling closed form for the uncharged spectrum (test oracle)."""
    return -8.0 * math.pi * w * (m - w / 2.0)


def rn_exponent(m: float, q: float, w: float, qe: float) -> float:
    """Charged-spectrum exponent: pi R'^2 - pi R^2 by hand (test oracle)."""
    rp = (m - w) + math.sqrt((m - w) ** 2 - (q - qe) ** 2)
    r0 = m + math.sqrt(m * m - q * q)
    return math.pi * rp * rp - math.pi * r0 * r0


class TestEmissionLogWeight:
    def test_zero_emission_gives_zero(self):
        s = BlackHoleState(Family.SCHWARZSCHILD, 1.0)
        assert emission_log_weight(s, Emission(0.0)) == 0.0

    def test_uncharged_matches_tunneling_form(self):
        s = BlackHoleState(Family.SCHWARZSCHILD, 1.0)
        for w in (0.25, 0.5, 0.75, 1.0):
            assert emission_log_weight(s, Emission(w)) == pytest.approx(pw(1.0, w), abs=1e-12)

    def test_charged_matches_radius_exponent(self):
        s = BlackHoleState(Family.REISSNER_NORDSTROM, 2.0, 1.0)
        got = emission_log_weight(s, Emission(0.3, 0.2))
        assert got == pytest.approx(rn_exponent(2.0, 1.0, 0.3, 0.2), abs=1e-11)

    def test_remnant_invalid_propagates(self):
        s = BlackHoleState(Family.REISSNER_NORDSTROM, 2.0, 1.0)
        with pytest.raises(RemnantInvalid):
            emission_log_weight(s, Emission(1.5))

    def test_corrected_weight_is_prefactor_plus_exponent(self):
        # For alpha != 0 the single entropy difference must reproduce
        # ln[(R'/R)^(2 alpha)] + pi (R'^2 - R^2), both parts evaluated
        # independently here.
        for alpha in (-1.0, -0.5, 0.5, 1.0, 2.0):
            s = BlackHoleState(Family.SCHWARZSCHILD, 3.0, alpha=alpha)
            for w in (0.1, 1.0, 2.5):
                got = emission_log_weight(s, Emission(w))
                r0, r1 = 2.0 * 3.0, 2.0 * (3.0 - w)
                oracle = 2.0 * alpha * math.log(r1 / r0) + math.pi * (r1 * r1 - r0 * r0)
                assert got == pytest.approx(oracle, abs=1e-10)

    def test_corrected_total_evaporation_channel_closed(self):
        s = BlackHoleState(Family.SCHWARZSCHILD, 1.0, alpha=1.0)
        with pytest.raises(RemnantInvalid):
            emission_log_weight(s, Emission(1.0))

    @given(
        m=st.floats(1e-3, 1e3),
        w_frac=st.floats(1e-6, 1.0),
    )
    @settings(max_examples=300, deadline=None)
    def test_tunneling_identity_scaled_residual(self, m, w_frac):
        w = w_frac * m
        got = emission_log_weight(BlackHoleState(Family.SCHWARZSCHILD, m), Emission(w))
        expect = pw(m, w)
        assert abs(got - expect) <= 1e-9 * (1.0 + abs(expect))

    @given(m=st.floats(0.1, 50.0), w1_frac=st.floats(0.01, 0.6), w2_frac=st.floats(0.01, 0.9))
    @settings(max_examples=200, deadline=None)
    def test_monotone_decreasing_in_energy(self, m, w1_frac, w2_frac):
        s = BlackHoleState(Family.SCHWARZSCHILD, m)
        w1 = w1_frac * m
        w2 = w1 + w2_frac * (m - w1)
        if w2 <= w1:
            return
        assert emission_log_weight(s, Emission(w2)) < emission_log_weight(s, Emission(w1))

    def test_matches_generic_entropy_function_layer(self):
        # Same numbers through the generic spectrum-from-entropy route.
        s = BlackHoleState(Family.REISSNER_NORDSTROM, 2.0, 1.0)
        fn = entropy_function_for(s)
        grid = spectrum_from_entropy(
            fn, MacroState(2.0, 1.0), [MacroState(0.3, 0.2), MacroState(0.1, 0.0)]
        )
        assert grid.log_weight[0] == pytest.approx(
            emission_log_weight(s, Emission(0.3, 0.2)), abs=1e-10
        )
        assert grid.log_weight[1] == pytest.approx(
            emission_log_weight(s, Emission(0.1)), abs=1e-10
        )


class TestVectorizedWeights:
    def test_matches_scalar_op(self):
        s = BlackHoleState(Family.REISSNER_NORDSTROM, 2.0, 1.0, alpha=0.5)
        w = np.array([0.1, 0.5, 0.9])
        qe = np.array([0.0, 0.3, 0.6])
        logw, valid = emission_log_weights(s, w, qe)
        assert valid.all()
        for i in range(3):
            assert logw[i] == pytest.approx(
                emission_log_weight(s, Emission(w[i], qe[i])), abs=1e-11
            )

    def test_flags_closed_channels(self):
        s = BlackHoleState(Family.REISSNER_NORDSTROM, 1.0, 0.8)
        logw, valid = emission_log_weights(s, np.array([0.1, 0.5]))
        assert valid.tolist() == [True, False]
        assert np.isnan(logw[1])

    def test_bulk_over_state_arrays(self):
        rng = np.random.default_rng(5)
        m = rng.uniform(0.5, 100.0, 1000)
        w = rng.uniform(0.0, 1.0, 1000) * m
        logw, valid = emission_log_weights_bulk(Family.SCHWARZSCHILD, m, 0.0, 0.0, 0.0, w)
        assert valid.all()
        expect = -8.0 * np.pi * w * (m - w / 2.0)
        assert np.max(np.abs(logw - expect) / (1.0 + np.abs(expect))) < 1e-9


class TestBuildSpectrum:
    def test_four_node_example(self):
        s = BlackHoleState(Family.SCHWARZSCHILD, 1.0)
        grid = build_spectrum(s, GridSpec(omega_max=1.0, n_omega=4))
        assert np.allclose(grid.omega, [0.25, 0.5, 0.75, 1.0])
        expect = [pw(1.0, w) for w in (0.25, 0.5, 0.75, 1.0)]
        assert np.allclose(grid.log_weight, expect, atol=1e-12)
        assert grid.log_weight[-1] == pytest.approx(-4.0 * math.pi, abs=1e-12)

    def test_single_bin_unitsum_weight_is_one(self):
        s = BlackHoleState(Family.SCHWARZSCHILD, 1.0)
        grid = build_spectrum(s, GridSpec(omega_max=0.5, n_omega=1), Normalization.UNIT_SUM)
        assert grid.log_weight[0] == 0.0
        assert grid.weights()[0] == 1.0

    def test_family_reduction_bitwise_on_grid(self):
        spec = GridSpec(omega_max=1.0, n_omega=64)
        schw = build_spectrum(BlackHoleState(Family.SCHWARZSCHILD, 1.0), spec)
        rn = build_spectrum(BlackHoleState(Family.REISSNER_NORDSTROM, 1.0), spec)
        assert np.array_equal(schw.log_weight, rn.log_weight)

    def test_invalid_bins_flagged_grid_stays_rectangular(self):
        s = BlackHoleState(Family.REISSNER_NORDSTROM, 1.0, 0.8)
        grid = build_spectrum(s, GridSpec(omega_max=1.0, n_omega=10))
        # remnant needs m - w >= 0.8, so only the first two nodes stay open
        assert grid.n_bins == 10
        assert grid.valid.tolist() == [True, True] + [False] * 8
        assert np.isnan(grid.log_weight[~grid.valid]).all()

    def test_all_bins_invalid_rejected(self):
        s = BlackHoleState(Family.REISSNER_NORDSTROM, 1.0, 0.95)
        with pytest.raises(DomainError):
            build_spectrum(s, GridSpec(omega_max=1.0, n_omega=4, omega_min=0.5))

    def test_unitsum_normalizes_over_valid_bins(self):
        s = BlackHoleState(Family.REISSNER_NORDSTROM, 1.0, 0.8)
        grid = build_spectrum(s, GridSpec(omega_max=1.0, n_omega=10), Normalization.UNIT_SUM)
        assert np.sum(grid.weights()) == pytest.approx(1.0, abs=1e-12)
        assert grid.log_norm is not None

    def test_unitsum_large_grid_total(self):
        s = BlackHoleState(Family.SCHWARZSCHILD, 100.0)
        grid = build_spectrum(
            s, GridSpec(omega_max=100.0, n_omega=1_000_000), Normalization.UNIT_SUM
        )
        assert abs(float(np.sum(grid.weights())) - 1.0) < 1e-10

    def test_unitsum_ten_million_bins(self):
        # log-sum-exp stability holds out to the largest supported grids;
        # most bins underflow to weight 0.0 while their logs stay exact.
        s = BlackHoleState(Family.SCHWARZSCHILD, 100.0)
        grid = build_spectrum(
            s, GridSpec(omega_max=100.0, n_omega=10_000_000), Normalization.UNIT_SUM
        )
        assert abs(float(np.sum(grid.weights())) - 1.0) < 1e-10
        assert np.isfinite(grid.log_weight).all()

    def test_grid_axis_guards(self):
        s = BlackHoleState(Family.SCHWARZSCHILD, 1.0)
        with pytest.raises(UsageError):
            build_spectrum(s, GridSpec(omega_max=2.0, n_omega=4))  # omega_max > M
        with pytest.raises(UsageError):
            build_spectrum(s, GridSpec(omega_max=1.0, n_omega=4, n_q=2))
        rn = BlackHoleState(Family.REISSNER_NORDSTROM, 1.0, 0.5)
        with pytest.raises(UsageError):
            build_spectrum(rn, GridSpec(omega_max=1.0, n_omega=4, n_j=2))

    def test_charged_grid_covers_charge_axis(self):
        s = BlackHoleState(Family.REISSNER_NORDSTROM, 2.0, 1.0)
        grid = build_spectrum(
            s, GridSpec(omega_max=1.0, n_omega=3, q_step=0.5, n_q=3)
        )
        assert grid.n_bins == 9
        i = 4  # omega = 2/3, q = 0.5
        assert grid.log_weight[i] == pytest.approx(
            emission_log_weight(s, Emission(grid.omega[i], 0.5)), abs=1e-11
        )

    def test_bins_iterator(self):
        s = BlackHoleState(Family.SCHWARZSCHILD, 1.0)
        grid = build_spectrum(s, GridSpec(omega_max=1.0, n_omega=4))
        bins = list(grid.bins())
        assert len(bins) == 4 and bins[0].emission.omega == 0.25


class TestThermal:
    def test_schwarzschild_values(self):
        s = BlackHoleState(Family.SCHWARZSCHILD, 1.0)
        assert thermal_log_weight(s, 0.1) == pytest.approx(-0.8 * math.pi, abs=1e-13)
        assert thermal_log_weight(s, 0.0) == 0.0

    def test_deviation_identity_exact(self):
        # thermal - nonthermal = -4 pi w^2, the quantified thermal-limit gap.
        for m in (0.5, 1.0, 10.0, 1000.0):
            s = BlackHoleState(Family.SCHWARZSCHILD, m)
            for w in (0.01, 0.1, 1.0):
                if w > m:
                    continue
                d = thermal_log_weight(s, w) - emission_log_weight(s, Emission(w))
                assert abs(d + 4.0 * math.pi * w * w) < 1e-10

    def test_extremal_has_no_thermal_baseline(self):
        s = BlackHoleState(Family.REISSNER_NORDSTROM, 1.0, 1.0)
        with pytest.raises(DomainError):
            thermal_log_weight(s, 0.1)

    def test_charged_baseline_uses_surface_gravity(self):
        from bhspectra import hawking_temperature

        s = BlackHoleState(Family.REISSNER_NORDSTROM, 2.0, 1.0)
        assert thermal_log_weight(s, 0.3) == pytest.approx(
            -0.3 / hawking_temperature(s), rel=1e-12
        )


class TestCompareThermal:
    def test_self_comparison_is_zero(self):
        s = BlackHoleState(Family.SCHWARZSCHILD, 1.0)
        grid = build_spectrum(s, GridSpec(omega_max=1.0, n_omega=16), Normalization.UNIT_SUM)
        cmp = compare_thermal(grid, grid)
        assert cmp.kl_divergence == pytest.approx(0.0, abs=1e-14)
        assert cmp.max_abs_log_ratio == 0.0

    def test_raw_max_log_ratio_is_4pi_omega_max_sq(self):
        s = BlackHoleState(Family.SCHWARZSCHILD, 1.0)
        spec = GridSpec(omega_max=1.0, n_omega=32)
        cmp = compare_thermal(build_spectrum(s, spec), build_thermal_spectrum(s, spec))
        assert cmp.max_abs_log_ratio == pytest.approx(4.0 * math.pi, abs=1e-10)
        assert cmp.kl_divergence is None  # raw spectra carry no KL

    def test_near_thermal_regime_bound(self):
        s = BlackHoleState(Family.SCHWARZSCHILD, 100.0)
        spec = GridSpec(omega_max=0.01, n_omega=32)
        cmp = compare_thermal(build_spectrum(s, spec), build_thermal_spectrum(s, spec))
        assert cmp.max_abs_log_ratio <= 4.0 * math.pi * 1e-4 + 1e-12

    def test_kl_nonnegative_for_unitsum(self):
        s = BlackHoleState(Family.SCHWARZSCHILD, 1.0)
        spec = GridSpec(omega_max=1.0, n_omega=64)
        cmp = compare_thermal(
            build_spectrum(s, spec, Normalization.UNIT_SUM),
            build_thermal_spectrum(s, spec, Normalization.UNIT_SUM),
        )
        assert cmp.kl_divergence >= -1e-12
        assert cmp.kl_divergence > 0.0  # non-thermality is detectable at omega ~ M

    def test_grid_mismatch_rejected(self):
        s = BlackHoleState(Family.SCHWARZSCHILD, 1.0)
        a = build_spectrum(s, GridSpec(omega_max=1.0, n_omega=16))
        b = build_spectrum(s, GridSpec(omega_max=1.0, n_omega=8))
        with pytest.raises(UsageError):
            compare_thermal(a, b)
