"""Lattice sampling, the moving-average covariate field, and DEI diagnostics."""

import numpy as np
import pytest

from spatreg import (
    DuplicateLocationError,
    LatticeConfig,
    MaCoefficients,
    Polynomial,
    RegressionSpec,
    TooManySitesError,
    dei_metrics,
    gen_regression,
    sample_locations,
    simulate_dataset,
    spatial_ma,
)
from spatreg.errors import NegativeVarianceError

STENCIL = MaCoefficients.default()


class TestLatticeSampling:
    def test_coordinates_follow_origin_and_spacing(self):
        config = LatticeConfig(side=4, spacing=0.3, u0=0.3, v0=0.6)
        sites = sample_locations(config, 5, seed=1)
        np.testing.assert_allclose(sites.coords[:, 0], 0.3 + sites.rows * 0.3)
        np.testing.assert_allclose(sites.coords[:, 1], 0.6 + sites.cols * 0.3)

    def test_exhaustive_draw_hits_every_site(self):
        config = LatticeConfig(side=5)
        sites = sample_locations(config, 25, seed=3)
        pairs = {(int(r), int(c)) for r, c in zip(sites.rows, sites.cols)}
        assert len(pairs) == 25

    def test_too_many_sites(self):
        with pytest.raises(TooManySitesError):
            sample_locations(LatticeConfig(side=3), 10, seed=0)

    def test_deterministic(self):
        config = LatticeConfig(side=30)
        a = sample_locations(config, 50, seed=11)
        b = sample_locations(config, 50, seed=11)
        np.testing.assert_array_equal(a.rows, b.rows)
        np.testing.assert_array_equal(a.cols, b.cols)

    def test_side_validation(self):
        with pytest.raises(ValueError):
            LatticeConfig(side=2)


class TestSpatialMa:
    def test_constant_innovations(self):
        config = LatticeConfig(side=6)
        sites = sample_locations(config, 10, seed=2)
        ones = np.ones((8, 8))
        x = spatial_ma(sites, STENCIL, innovations=ones)
        np.testing.assert_allclose(x, -1.8, atol=1e-12)

    def test_zero_innovations(self):
        config = LatticeConfig(side=6)
        sites = sample_locations(config, 10, seed=2)
        x = spatial_ma(sites, STENCIL, innovations=np.zeros((8, 8)))
        np.testing.assert_array_equal(x, 0.0)

    def test_innovation_shape_validation(self):
        sites = sample_locations(LatticeConfig(side=6), 4, seed=0)
        with pytest.raises(ValueError, match="shape"):
            spatial_ma(sites, STENCIL, innovations=np.zeros((6, 6)))

    def test_marginal_variance(self):
        # One fully occupied large lattice; neighbor correlation slows the
        # variance estimate down but it stays well inside the tolerance.
        side = 350
        config = LatticeConfig(side=side)
        sites = sample_locations(config, side * side, seed=4)
        x = spatial_ma(sites, STENCIL, seed=9)
        assert STENCIL.marginal_variance == pytest.approx(1.96, abs=1e-12)
        assert x.var() == pytest.approx(1.96, abs=0.05)

    def test_adjacent_covariance_matches_stencil_overlap(self):
        # Horizontally adjacent sites share six innovations; the exact
        # covariance is the lag-1 inner product of the stencil with itself.
        a = STENCIL.array
        expected = float((a[:, 1:] * a[:, :-1]).sum())
        side = 400
        config = LatticeConfig(side=side)
        rng = np.random.default_rng(21)
        innovations = rng.standard_normal((side + 2, side + 2))
        rows, cols = np.meshgrid(np.arange(side), np.arange(side - 1), indexing="ij")
        from spatreg.dgp import LatticeSites

        left = LatticeSites(config, rows.ravel(), cols.ravel())
        right = LatticeSites(config, rows.ravel(), cols.ravel() + 1)
        x_left = spatial_ma(left, STENCIL, innovations=innovations)
        x_right = spatial_ma(right, STENCIL, innovations=innovations)
        sample_cov = np.mean(x_left * x_right) - x_left.mean() * x_right.mean()
        assert sample_cov == pytest.approx(expected, abs=0.05)

    def test_deterministic(self):
        sites = sample_locations(LatticeConfig(side=25), 40, seed=5)
        first = spatial_ma(sites, STENCIL, seed=6)
        second = spatial_ma(sites, STENCIL, seed=6)
        np.testing.assert_array_equal(first, second)


class TestGenRegression:
    def test_matches_formula_given_seed(self):
        x = np.array([-1.0, 0.0, 2.0])
        spec = RegressionSpec()
        y = gen_regression(x, spec, seed=13)
        noise = np.random.default_rng(13).standard_normal(3)
        np.testing.assert_array_equal(
            y, spec.mean(x) + np.sqrt(spec.variance(x)) * noise
        )

    def test_zero_variance_returns_mean(self):
        spec = RegressionSpec(variance=Polynomial((0.0,)))
        x = np.array([0.0, 1.0, -2.0])
        y = gen_regression(x, spec, seed=0)
        np.testing.assert_array_equal(y, spec.mean(x))
        assert y[0] == pytest.approx(0.1, abs=1e-15)

    def test_negative_variance_rejected(self):
        spec = RegressionSpec(variance=Polynomial((-1.0,)))
        with pytest.raises(NegativeVarianceError):
            gen_regression(np.array([0.0, 1.0]), spec, seed=0)

    def test_default_mean_and_variance_values(self):
        spec = RegressionSpec()
        assert float(spec.mean(np.array(0.0))) == pytest.approx(0.1)
        assert float(spec.mean(np.array(1.0))) == pytest.approx(0.4)
        assert float(spec.variance(np.array(1.0))) == pytest.approx(0.55)


class TestDeiMetrics:
    def test_three_point_example(self):
        metrics = dei_metrics([(0.0, 0.0), (0.0, 1.0), (0.0, 3.0)])
        assert metrics.max_nearest_distance == 2.0
        assert metrics.min_farthest_distance == 2.0

    def test_two_points(self):
        metrics = dei_metrics([(0.0, 0.0), (3.0, 4.0)])
        assert metrics.max_nearest_distance == 5.0
        assert metrics.min_farthest_distance == 5.0

    def test_full_lattice_spacing(self):
        config = LatticeConfig(side=3, spacing=0.3)
        sites = sample_locations(config, 9, seed=0)
        metrics = dei_metrics(sites.coords)
        assert metrics.max_nearest_distance == 0.3

    def test_larger_lattice_spacing_approximate(self):
        config = LatticeConfig(side=7, spacing=0.3)
        sites = sample_locations(config, 49, seed=0)
        metrics = dei_metrics(sites.coords)
        assert metrics.max_nearest_distance == pytest.approx(0.3, abs=1e-12)

    def test_subset_of_full_lattice_is_coarser(self):
        # Removing sites can only increase nearest-neighbor distances, so the
        # full occupancy is the infill-optimal configuration.
        config = LatticeConfig(side=8)
        full = sample_locations(config, 64, seed=1)
        part = sample_locations(config, 20, seed=1)
        assert (
            dei_metrics(part.coords).max_nearest_distance
            >= dei_metrics(full.coords).max_nearest_distance
        )

    def test_adding_neighbors_does_not_coarsen(self):
        pts = [(0.0, 0.0), (1.0, 0.0), (5.0, 5.0), (5.0, 6.0)]
        base = dei_metrics(pts).max_nearest_distance
        denser = dei_metrics(pts + [(0.5, 0.0), (5.0, 5.5)]).max_nearest_distance
        assert denser <= base

    def test_duplicates_rejected(self):
        with pytest.raises(DuplicateLocationError):
            dei_metrics([(0.0, 0.0), (0.0, 0.0), (1.0, 1.0)])


class TestSimulateDataset:
    def test_shapes_and_determinism(self):
        a = simulate_dataset(60, seed=[3, 1])
        b = simulate_dataset(60, seed=[3, 1])
        assert a.n == 60
        np.testing.assert_array_equal(a.locations, b.locations)
        np.testing.assert_array_equal(a.x, b.x)
        np.testing.assert_array_equal(a.y, b.y)

    def test_different_seeds_differ(self):
        a = simulate_dataset(40, seed=1)
        b = simulate_dataset(40, seed=2)
        assert not np.array_equal(a.y, b.y)

    def test_default_lattice_side_is_n(self):
        d = simulate_dataset(50, seed=0)
        max_coord = 0.3 + 49 * 0.3
        assert d.locations[:, 0].max() <= max_coord + 1e-9
