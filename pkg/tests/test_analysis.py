import math

import numpy as np
import pytest

from pcv import analysis as an
from pcv import lattice as lat
from pcv.errors import DimMismatch
from pcv.glyphs import FULL_CHARSET, GlyphMask, StrongKey, imprint, layout_masks
from pcv.lattice import LatticeState, SignField, SimParams

FAST = SimParams(burn_in=30.0, tau_steps=2000)


def _field(bits):
    return SignField(np.asarray(bits, dtype=bool))


class TestRecoveryFidelity:
    def test_identical_fields(self):
        f = _field(np.eye(8) > 0)
        assert an.recovery_fidelity(f, f) == 1.0

    def test_counts_exact_fraction(self):
        a = _field(np.zeros((4, 4)))
        b = _field(np.arange(16).reshape(4, 4) < 4)
        assert an.recovery_fidelity(a, b) == 0.75

    def test_region_restriction(self):
        a = _field(np.zeros((4, 4)))
        bits = np.zeros((4, 4), dtype=bool)
        bits[0, 0] = True
        b = _field(bits)
        region = GlyphMask(bits, [])
        assert an.recovery_fidelity(a, b, region) == 0.0
        assert an.recovery_fidelity(a, a, region) == 1.0

    def test_dim_mismatch(self):
        with pytest.raises(DimMismatch):
            an.recovery_fidelity(_field(np.zeros((3, 3))),
                                 _field(np.zeros((4, 4))))


class TestSweep:
    def test_ordered_phases(self):
        res = an.sweep_order_parameter([0.3, 2.0], replicas=3, seed=11,
                                       base=SimParams(burn_in=40.0),
                                       sample_time=20.0)
        assert res.m_mean[0] > 0.8
        assert res.m_mean[1] < 0.15

    def test_csv_shape(self):
        res = an.SweepResult([0.5], [0.9], [0.01], 3)
        lines = res.to_csv().strip().splitlines()
        assert lines[0] == "T,M_mean,M_std,replicas"
        assert lines[1].split(",") == ["0.5", "0.9", "0.01", "3"]

    def test_replica_floor(self):
        with pytest.raises(ValueError):
            an.sweep_order_parameter([0.5], replicas=2, seed=0)


class TestLyapunov:
    def test_positive_at_operating_point(self):
        lam = an.estimate_lyapunov(FAST, seed=3, horizon=100.0)
        assert lam > 0.05

    def test_harmonic_control_not_chaotic(self):
        # pure coupling force (harmonic lattice) must show ~zero exponent
        def harmonic(u):
            return (np.roll(u, 1, 0) + np.roll(u, -1, 0) +
                    np.roll(u, 1, 1) + np.roll(u, -1, 1) - 4.0 * u) - u
        lam = an.estimate_lyapunov(FAST, seed=3, horizon=100.0,
                                   force_override=harmonic)
        assert abs(lam) < 0.01

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            an.estimate_lyapunov(FAST, 0, horizon=50.0)
        with pytest.raises(ValueError):
            an.estimate_lyapunov(FAST, 0, delta0=1e-6)


class TestLoopback:
    def test_profile_monotone_grid_enforced(self):
        with pytest.raises(ValueError):
            an.estimate_loopback(FAST, 0, [10.0, 10.0],
                                 StrongKey("CHAOS", FULL_CHARSET), 1)

    def test_short_loopback_perfect(self):
        prof = an.estimate_loopback(FAST, 21, [5.0, 20.0],
                                    StrongKey("CHAOS", FULL_CHARSET), 5)
        assert prof.fidelity_mask[0] == 1.0
        assert prof.tau_star == 20.0
        assert "tau,fidelity_mask,fidelity_full" in prof.to_csv()

    def test_loopback_once_is_integrate_reverse_integrate(self):
        state = lat.thermalize(FAST, 9)
        back = an.loopback_once(state, 300)
        assert np.array_equal(lat.sign_field(back).bits,
                              lat.sign_field(state).bits)


class TestDetune:
    def test_zero_delta_recovers_reference(self):
        mask = layout_masks(StrongKey("CHAOS", FULL_CHARSET), 69, 3)
        isk = imprint(lat.thermalize(FAST, 17), mask)
        fs = lat.integrate(isk, FAST.tau_steps)
        rec = an.detune_experiment(fs, (20, 20), 0.0)
        assert an.recovery_fidelity(lat.sign_field(isk), rec) == 1.0

    def test_site_bounds(self):
        fs = lat.thermalize(FAST, 17)
        with pytest.raises(ValueError):
            an.detune_experiment(fs, (69, 0), 1e-5)


class TestDomainStats:
    def test_uniform_field_single_cluster(self):
        stats = an.domain_size_stats(_field(np.ones((10, 10))))
        assert stats.n_clusters == 1
        assert stats.mean_domain_size == 100.0
        assert np.allclose(stats.correlations, 1.0)

    def test_checkerboard(self):
        bits = (np.indices((8, 8)).sum(axis=0) % 2).astype(bool)
        stats = an.domain_size_stats(_field(bits))
        assert stats.n_clusters == 64
        assert stats.correlations[0] == -1.0
        assert stats.correlations[1] == 1.0

    def test_periodic_wraparound_merges_edge_clusters(self):
        bits = np.zeros((6, 6), dtype=bool)
        bits[0, 2] = bits[-1, 2] = True
        stats = an.domain_size_stats(_field(bits))
        plus = stats.cluster_sizes[stats.cluster_sizes == 2]
        assert plus.size == 1  # top and bottom cells join across the seam

    def test_sizes_sum_to_area(self):
        rng = np.random.Generator(np.random.PCG64(5))
        bits = rng.random((20, 20)) > 0.5
        stats = an.domain_size_stats(_field(bits))
        assert int(stats.cluster_sizes.sum()) == 400
