"""Artificial-noise design tests: min-energy waveform, null-space covariance."""

import numpy as np
import numpy.testing as npt
import pytest

import securewave.channel as ch
from securewave.an import (
    an_covariance,
    an_pipeline_multicast,
    an_pipeline_single,
    min_energy_design,
    sample_an,
)
from securewave.errors import DimensionError, NoTransmitError, ValidationError
from securewave.util import complex_normal


def scenario(chips=8):
    return ch.ScenarioConfig(chips=chips, paths=3)


class TestMinEnergyDesign:
    def test_isotropic(self):
        d = min_energy_design(np.eye(3, dtype=complex), gamma=3.0, e_max=10.0)
        npt.assert_allclose(d.energy, 3.0, rtol=1e-12)
        npt.assert_allclose(np.linalg.norm(d.waveform), 1.0, atol=1e-12)

    def test_diagonal(self):
        d = min_energy_design(np.diag([4.0 + 0j, 1.0]), gamma=8.0, e_max=10.0)
        npt.assert_allclose(d.energy, 2.0, rtol=1e-12)
        npt.assert_allclose(np.abs(d.waveform), [1.0, 0.0], atol=1e-12)

    def test_beats_random_sampling(self):
        rng = np.random.default_rng(0)
        trial = ch.draw_wiretap_trial(scenario(chips=3), rng)
        q = trial.bobs[0].q.matrix
        gamma = 2.0
        d = min_energy_design(q, gamma=gamma, e_max=1e9)
        samples = rng.standard_normal((1_000_000, 3)) + 1j * rng.standard_normal((1_000_000, 3))
        samples /= np.linalg.norm(samples, axis=1, keepdims=True)
        energies = gamma / np.einsum("ij,jk,ik->i", samples.conj(), q, samples).real
        assert d.energy <= energies.min() + 1e-12

    def test_over_budget_raises(self):
        with pytest.raises(NoTransmitError):
            min_energy_design(np.eye(2, dtype=complex), gamma=5.0, e_max=4.0)

    def test_budget_boundary_allowed(self):
        d = min_energy_design(np.eye(2, dtype=complex), gamma=4.0, e_max=4.0)
        npt.assert_allclose(d.energy, 4.0)


class TestAnCovariance:
    def test_two_dim_complement(self):
        e1 = np.array([1.0 + 0j, 0.0])
        an = an_covariance([e1], budget=5.0, dim=2)
        expected = np.zeros((2, 2), dtype=complex)
        expected[1, 1] = 5.0
        npt.assert_allclose(an.matrix, expected, atol=1e-12)

    def test_zero_budget(self):
        an = an_covariance([np.array([1.0 + 0j, 0.0])], budget=0.0, dim=2)
        npt.assert_array_equal(an.matrix, np.zeros((2, 2)))

    def test_three_blockers_eight_dims(self):
        rng = np.random.default_rng(1)
        blockers = [complex_normal(rng, 8) for _ in range(3)]
        an = an_covariance(blockers, budget=7.0, dim=8)
        npt.assert_allclose(np.trace(an.matrix).real, 7.0, rtol=1e-12)
        for v in blockers:
            assert np.linalg.norm(v.conj() @ an.matrix) <= 1e-9 * 7.0

    def test_dimension_error(self):
        rng = np.random.default_rng(2)
        blockers = [complex_normal(rng, 3) for _ in range(3)]
        with pytest.raises(DimensionError):
            an_covariance(blockers, budget=1.0, dim=3)

    def test_rank_deficient_blockers_widen_complement(self):
        rng = np.random.default_rng(3)
        v = complex_normal(rng, 6)
        an = an_covariance([v, 2.0 * v], budget=6.0, dim=6)
        # rank 1 -> complement dim 5, isotropic share 6/5
        assert an.complement_dim == 5
        nonzero = np.linalg.eigvalsh(an.matrix)[1:]
        npt.assert_allclose(nonzero, np.full(5, 6.0 / 5.0), atol=1e-10)
        npt.assert_allclose(np.trace(an.matrix).real, 6.0, rtol=1e-12)

    def test_negative_budget_rejected(self):
        with pytest.raises(ValidationError):
            an_covariance([np.array([1.0 + 0j, 0.0])], budget=-1.0, dim=2)

    def test_isotropy_of_nonzero_spectrum(self):
        rng = np.random.default_rng(4)
        blockers = [complex_normal(rng, 8) for _ in range(2)]
        an = an_covariance(blockers, budget=12.0, dim=8)
        spectrum = np.linalg.eigvalsh(an.matrix)
        nonzero = spectrum[np.abs(spectrum) > 1e-12]
        npt.assert_allclose(nonzero, np.full(6, 2.0), rtol=1e-10)


class TestSampleAn:
    def test_zero_budget_gives_zero(self):
        an = an_covariance([np.array([1.0 + 0j, 0.0])], budget=0.0, dim=2)
        w = sample_an(an, np.random.default_rng(0))
        npt.assert_array_equal(w, np.zeros(2))

    def test_samples_annihilate_blocked_direction(self):
        e1 = np.array([1.0 + 0j, 0.0])
        an = an_covariance([e1], budget=5.0, dim=2)
        rng = np.random.default_rng(1)
        for _ in range(100):
            w = sample_an(an, rng)
            assert abs(e1.conj() @ w) <= 1e-12

    def test_sample_covariance_converges(self):
        rng = np.random.default_rng(2)
        blockers = [complex_normal(rng, 6)]
        an = an_covariance(blockers, budget=4.0, dim=6)
        draws = np.stack([sample_an(an, rng) for _ in range(100_000)])
        sample_cov = draws.T @ draws.conj() / draws.shape[0]
        rel = np.linalg.norm(sample_cov - an.matrix) / np.linalg.norm(an.matrix)
        assert rel <= 0.05


class TestSinglePipeline:
    def test_boundary_budget_zero_an(self):
        q = np.diag([4.0 + 0j, 1.0])
        design, an = an_pipeline_single(q, gamma=8.0, e_max=2.0)
        npt.assert_allclose(design.energy, 2.0)
        npt.assert_array_equal(an.matrix, np.zeros((2, 2)))

    def test_diagonal_continuation(self):
        q = np.diag([4.0 + 0j, 1.0])
        design, an = an_pipeline_single(q, gamma=8.0, e_max=10.0)
        npt.assert_allclose(design.energy, 2.0, rtol=1e-12)
        expected = np.zeros((2, 2), dtype=complex)
        expected[1, 1] = 8.0
        npt.assert_allclose(an.matrix, expected, atol=1e-12)

    def test_zero_degradation_closed_form(self):
        for seed in range(30):
            trial = ch.draw_wiretap_trial(scenario(), np.random.default_rng(seed))
            bob = trial.bobs[0]
            design, an = an_pipeline_single(bob.q, gamma=4.0, e_max=100.0)
            plain = ch.sinr(bob.q, design.waveform, design.energy)
            loaded = ch.sinr_with_an(bob.channel, bob.disturbance, an,
                                     design.waveform, design.energy)
            assert abs(loaded - plain) / plain <= 1e-9
            npt.assert_allclose(an.budget, 100.0 - design.energy, rtol=1e-12)

    def test_budget_exactness(self):
        trial = ch.draw_wiretap_trial(scenario(), np.random.default_rng(31))
        design, an = an_pipeline_single(trial.bobs[0].q, gamma=2.0, e_max=30.0)
        assert abs(np.trace(an.matrix).real - (30.0 - design.energy)) <= 1e-10 * 30.0

    def test_propagates_no_transmit(self):
        with pytest.raises(NoTransmitError):
            an_pipeline_single(np.eye(2, dtype=complex), gamma=5.0, e_max=1.0)


class TestMulticastPipeline:
    def test_blocks_every_receiver(self):
        from securewave.sdr import MulticastProblem, multicast_design

        for seed, receivers in ((0, 2), (1, 3), (2, 4)):
            trial = ch.draw_wiretap_trial(scenario(), np.random.default_rng(seed),
                                          receivers=receivers)
            qs = tuple(link.q for link in trial.bobs)
            problem = MulticastProblem(q_bobs=qs, gammas=np.full(receivers, 2.0),
                                       e_max=100.0, q_eve=trial.eve.q)
            design, _ = multicast_design(problem, "min-energy",
                                         rng=np.random.default_rng(seed))
            an = an_pipeline_multicast(design, qs, 100.0)
            npt.assert_allclose(an.budget, 100.0 - design.energy, rtol=1e-12)
            for link in trial.bobs:
                plain = ch.sinr(link.q, design.waveform, design.energy)
                loaded = ch.sinr_with_an(link.channel, link.disturbance, an,
                                         design.waveform, design.energy)
                assert abs(loaded - plain) / plain <= 1e-9

    def test_rejects_over_budget_design(self):
        from securewave.p2p import WaveformDesign

        s = np.array([1.0 + 0j, 0.0])
        design = WaveformDesign(waveform=s, energy=5.0, branch="sdr")
        with pytest.raises(ValidationError):
            an_pipeline_multicast(design, [np.eye(2, dtype=complex)], e_max=4.0)
