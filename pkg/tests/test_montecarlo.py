"""Sampling pipeline: seeded streams, splitting, thinning, dark counts."""

import math

import numpy as np
import pytest

from photonstats import (
    ContractError,
    DetectorModel,
    DomainError,
    RngSeed,
    SplitterNetwork,
    UndefinedCoherenceError,
    coherent,
    empirical_g2,
    estimate_pmf,
    fock,
    make_generator,
    sample_source,
    split_and_detect,
    thermal,
)

SHOTS = 200_000


def test_seed_validation():
    with pytest.raises(DomainError):
        RngSeed(-1)
    with pytest.raises(DomainError):
        RngSeed(2**64)
    assert RngSeed(3, 1).key() != RngSeed(3, 2).key()
    assert RngSeed(3).key() != RngSeed(4).key()


def test_generator_streams_are_reproducible_and_distinct():
    a = make_generator(RngSeed(9, 0)).random(4)
    b = make_generator(RngSeed(9, 0)).random(4)
    c = make_generator(RngSeed(9, 1)).random(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


@pytest.mark.parametrize(
    "source,mean,var",
    [
        (thermal(1.4), 1.4, 1.4 + 1.4**2),
        (coherent(2.2), 2.2, 2.2),
    ],
)
def test_sample_source_moments(source, mean, var):
    counts = sample_source(source, SHOTS, RngSeed(17))
    se_mean = math.sqrt(var / SHOTS)
    assert counts.mean() == pytest.approx(mean, abs=4.0 * se_mean)
    assert counts.min() >= 0


def test_fock_source_is_deterministic():
    counts = sample_source(fock(3), 100, RngSeed(0))
    assert np.all(counts == 3)


def test_estimate_pmf_frequencies():
    counts = sample_source(thermal(0.6), SHOTS, RngSeed(21))
    dist, se = estimate_pmf(counts)
    assert dist.probs.sum() == pytest.approx(1.0, abs=1e-12)
    expected0 = 1.0 / 1.6
    assert abs(dist.probs[0] - expected0) < 4.0 * se[0]


class TestSplitterNetwork:
    def test_loss_probability(self):
        net = SplitterNetwork((0.5, 0.3))
        assert net.mode_count == 2
        assert net.loss_probability == pytest.approx(0.2)

    def test_overfull_routing_rejected(self):
        with pytest.raises(DomainError, match="sum"):
            SplitterNetwork((0.7, 0.6))

    def test_negative_probability_rejected(self):
        with pytest.raises(DomainError):
            SplitterNetwork((-0.1, 0.5))


class TestSplitAndDetect:
    def test_lossless_perfect_detection_conserves_photons(self):
        counts = sample_source(thermal(2.0), 20_000, RngSeed(5))
        net = SplitterNetwork((0.6, 0.4))
        detected = split_and_detect(counts, net, (DetectorModel(), DetectorModel()), RngSeed(5, 1))
        assert detected.shape == (20_000, 2)
        assert np.array_equal(detected.sum(axis=1), counts)

    def test_arm_fractions_respected(self):
        counts = sample_source(thermal(2.0), SHOTS, RngSeed(8))
        net = SplitterNetwork((0.25, 0.75))
        detected = split_and_detect(counts, net, (DetectorModel(), DetectorModel()), RngSeed(8, 1))
        total = counts.sum()
        assert detected[:, 0].sum() / total == pytest.approx(0.25, abs=0.01)

    def test_dark_counts_on_vacuum_input(self):
        counts = np.zeros(SHOTS, dtype=np.int64)
        net = SplitterNetwork((1.0,))
        detected = split_and_detect(counts, net, (DetectorModel(1.0, 0.35),), RngSeed(2, 0))
        assert detected.mean() == pytest.approx(0.35, abs=0.02)

    def test_thinning_reduces_mean_by_efficiency(self):
        counts = sample_source(thermal(1.5), SHOTS, RngSeed(13))
        net = SplitterNetwork((1.0,))
        detected = split_and_detect(counts, net, (DetectorModel(0.4, 0.0),), RngSeed(13, 1))
        assert detected.mean() / counts.mean() == pytest.approx(0.4, abs=0.01)

    def test_reproducible_for_fixed_seeds(self):
        counts = sample_source(thermal(1.0), 1000, RngSeed(3))
        net = SplitterNetwork((0.5, 0.4))
        dets = (DetectorModel(0.9, 0.1), DetectorModel(0.8, 0.2))
        a = split_and_detect(counts, net, dets, RngSeed(3, 7))
        b = split_and_detect(counts, net, dets, RngSeed(3, 7))
        assert np.array_equal(a, b)

    def test_detector_count_must_match_modes(self):
        counts = np.zeros(10, dtype=np.int64)
        with pytest.raises(ContractError, match="detector"):
            split_and_detect(counts, SplitterNetwork((0.5, 0.5)), (DetectorModel(),), RngSeed(0))


class TestEmpiricalG2:
    def test_hand_computed_value(self):
        # counts 0,1,2,3: mean 1.5, E[n(n-1)] = (0+0+2+6)/4 = 2, g2 = 2/2.25
        g2, se = empirical_g2(np.array([0, 1, 2, 3]))
        assert g2 == pytest.approx(2.0 / 2.25, rel=1e-12)
        assert se > 0.0

    def test_thermal_sample_brackets_two(self):
        counts = sample_source(thermal(1.0), SHOTS, RngSeed(29))
        g2, se = empirical_g2(counts)
        assert abs(g2 - 2.0) < 4.0 * se

    def test_coherent_sample_brackets_one(self):
        counts = sample_source(coherent(1.5), SHOTS, RngSeed(31))
        g2, se = empirical_g2(counts)
        assert abs(g2 - 1.0) < 4.0 * se

    def test_zero_mean_sample_rejected(self):
        with pytest.raises(UndefinedCoherenceError):
            empirical_g2(np.zeros(100, dtype=np.int64))
