"""Mixed source-plus-scatter photon statistics."""

import numpy as np
import pytest

from photonstats import (
    DomainError,
    ScatterConfig,
    detected_pmf,
    g2_from_pmf,
    g2_vs_angle,
    p_function_convolution_check,
    pmf,
    thermal,
)


def closed_form_g2(a: float, b: float) -> float:
    return 1.0 + (a * a + b * b) / (a + b) ** 2


class TestScatterConfig:
    def test_mode_means_split_by_polarization(self):
        cfg = ScatterConfig(1.0, 0.25, 60.0)
        a, b = cfg.mode_means
        assert a == pytest.approx(0.25 + 0.25)  # cos²60° = 1/4
        assert b == pytest.approx(0.75)

    @pytest.mark.parametrize(
        "source,plasmon,theta",
        [(-0.1, 0.5, 0.0), (0.5, -0.1, 0.0), (0.5, 0.5, -5.0), (0.5, 0.5, 91.0)],
    )
    def test_invalid_parameters_rejected(self, source, plasmon, theta):
        with pytest.raises(DomainError):
            ScatterConfig(source, plasmon, theta)


class TestDetectedPmf:
    def test_matches_thermal_convolution(self):
        """The summed form and the convolution of two Bose-Einstein pmfs are
        the same distribution; both routes must agree to near machine level."""
        cfg = ScatterConfig(1.2, 0.4, 30.0)
        d = detected_pmf(cfg)
        a, b = cfg.mode_means
        ref = np.convolve(
            pmf(thermal(a), cutoff=d.probs.size - 1).probs,
            pmf(thermal(b), cutoff=d.probs.size - 1).probs,
        )[: d.probs.size]
        assert np.max(np.abs(d.probs - ref)) < 1e-12

    def test_tail_target_is_honored(self):
        d = detected_pmf(ScatterConfig(2.0, 1.5, 45.0), tail_target=1e-10)
        assert 1.0 - d.probs.sum() <= 1e-10

    def test_vertical_polarization_is_single_thermal_mode(self):
        cfg = ScatterConfig(0.8, 0.3, 0.0)
        d = detected_pmf(cfg)
        ref = pmf(thermal(1.1), cutoff=d.probs.size - 1)
        assert np.max(np.abs(d.probs - ref.probs)) < 1e-12


class TestG2:
    def test_single_mode_limit(self):
        g2 = g2_from_pmf(detected_pmf(ScatterConfig(0.8, 0.3, 0.0)))
        assert g2 == pytest.approx(2.0, rel=1e-6)

    def test_balanced_modes_limit(self):
        # cos²45° splits a plasmon-free source evenly: the 1.5 floor.
        g2 = g2_from_pmf(detected_pmf(ScatterConfig(1.0, 0.0, 45.0)))
        assert g2 == pytest.approx(1.5, rel=1e-6)

    def test_three_to_one_ratio_point(self):
        # n̄_s = 3 n̄_pl at horizontal polarization: 1 + (1+9)/16.
        g2 = g2_from_pmf(detected_pmf(ScatterConfig(0.9, 0.3, 90.0)))
        assert g2 == pytest.approx(1.625, rel=1e-6)

    @pytest.mark.parametrize("theta", [0.0, 22.5, 45.0, 70.0, 90.0])
    def test_matches_two_mode_closed_form(self, theta):
        cfg = ScatterConfig(1.4, 0.5, theta)
        a, b = cfg.mode_means
        g2 = g2_from_pmf(detected_pmf(cfg))
        assert g2 == pytest.approx(closed_form_g2(a, b), rel=1e-6)

    def test_bounded_between_floor_and_thermal(self):
        for theta in np.linspace(0.0, 90.0, 13):
            g2 = g2_from_pmf(detected_pmf(ScatterConfig(1.0, 0.4, float(theta))))
            assert 1.5 - 1e-9 <= g2 <= 2.0 + 1e-9


class TestG2Scan:
    def test_rows_sorted_by_angle(self):
        rows = g2_vs_angle(1.0, 0.3, [60.0, 0.0, 30.0])
        assert np.array_equal(rows[:, 0], [0.0, 30.0, 60.0])

    def test_scan_dips_below_thermal(self):
        """Mixing in the residual photons drags coherence away from the pure
        bunching value somewhere on the sweep."""
        rows = g2_vs_angle(1.0, 0.3, np.linspace(0.0, 90.0, 19))
        assert rows[0, 1] == pytest.approx(2.0, rel=1e-6)
        assert rows[:, 1].min() < 2.0 - 0.05

    def test_empty_grid_rejected(self):
        with pytest.raises(DomainError):
            g2_vs_angle(1.0, 0.3, [])

    def test_out_of_range_angle_rejected(self):
        with pytest.raises(DomainError):
            g2_vs_angle(1.0, 0.3, [0.0, 95.0])


class TestPFunctionConvolution:
    def test_equal_means_vacuum_weight(self):
        d = p_function_convolution_check(1.0, 1.0)
        assert d.probs[0] == pytest.approx(1.0 / 3.0, rel=1e-12)

    @pytest.mark.parametrize("m1,m2", [(1.0, 1.0), (0.3, 1.7), (2.5, 0.0)])
    def test_quadrature_matches_combined_thermal(self, m1, m2):
        d = p_function_convolution_check(m1, m2)
        ref = pmf(thermal(m1 + m2), cutoff=d.probs.size - 1)
        assert np.max(np.abs(d.probs - ref.probs)) < 1e-12

    def test_double_vacuum(self):
        d = p_function_convolution_check(0.0, 0.0)
        assert d.probs[0] == 1.0

    def test_negative_mean_rejected(self):
        with pytest.raises(DomainError):
            p_function_convolution_check(-1.0, 0.5)
