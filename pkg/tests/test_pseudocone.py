import math

import numpy as np
import pytest

from pscone.errors import DomainError, ValidationError
from pscone.fixtures import SQRT_HALF, random_pseudocone, translated_cone
from pscone.geometry import make_circular_cone, sphere_grid
from pscone.pseudocone import (
    distance_from_origin,
    gauss_arcs,
    gauss_indices,
    inactive_facets,
    perturb,
    radial,
    radial_gauss,
    scale,
    support,
    support_exact,
    wulff_shape,
)


def direction(theta):
    return np.array([math.cos(theta), math.sin(theta)])


class TestWulffShape:
    def test_half_plane(self, half):
        assert half.m == 1
        np.testing.assert_allclose(half.normals[0], [-SQRT_HALF, -SQRT_HALF])
        assert half.depths[0] == 1.0

    def test_translated_quadrant(self, C2, shifted):
        K = wulff_shape(C2, [([0, -1], 1), ([-1, 0], 1)])
        for th in np.linspace(0.05, 1.5, 9):
            assert radial(K, direction(th)) == radial(shifted, direction(th))

    def test_normal_outside_dual(self, C2):
        with pytest.raises(ValidationError, match="facet 0"):
            wulff_shape(C2, [([1, 0], 1)])

    def test_nonpositive_depth_names_facet(self, C2):
        with pytest.raises(ValidationError, match="facet 1: depth"):
            wulff_shape(C2, [([0, -1], 1), ([-1, 0], 0.0)])

    def test_duplicate_normal(self, C2):
        with pytest.raises(ValidationError, match="facet 1: duplicates"):
            wulff_shape(C2, [([0, -1], 1), ([0, -1], 2)])

    def test_empty(self, C2):
        with pytest.raises(ValidationError):
            wulff_shape(C2, [])

    def test_immutable(self, half):
        with pytest.raises(ValueError):
            half.depths[0] = 2.0


class TestRadial:
    @pytest.mark.parametrize("theta", [0.1, 0.4, math.pi / 4, 1.2, 1.5])
    def test_half_plane_formula(self, half, theta):
        expected = math.sqrt(2) / (math.cos(theta) + math.sin(theta))
        assert radial(half, direction(theta)) == pytest.approx(expected, rel=1e-14)

    def test_half_plane_diagonal(self, half):
        assert radial(half, direction(math.pi / 4)) == pytest.approx(1.0, rel=1e-15)

    def test_translated_at_30_degrees(self, shifted):
        assert radial(shifted, direction(math.pi / 6)) == pytest.approx(2.0, rel=1e-15)

    def test_boundary_direction_is_domain_error(self, half):
        with pytest.raises(DomainError):
            radial(half, np.array([1.0, 0.0]))

    def test_outside_direction(self, half):
        with pytest.raises(DomainError):
            radial(half, np.array([-1.0, 0.0]))

    def test_vectorized_matches_scalar(self, half):
        V = np.array([direction(t) for t in (0.2, 0.7, 1.1)])
        np.testing.assert_allclose(radial(half, V), [radial(half, v) for v in V], rtol=1e-15)


class TestGauss:
    def test_translated_at_30_degrees(self, shifted):
        r = radial_gauss(shifted, direction(math.pi / 6))
        np.testing.assert_allclose(shifted.normals[r.index], [0.0, -1.0])
        assert not r.is_tie

    def test_tie_on_diagonal(self, shifted):
        r = radial_gauss(shifted, direction(math.pi / 4))
        assert r.is_tie and r.tie_indices == (0, 1) and r.index == 0

    def test_tie_rules(self, shifted):
        V = direction(math.pi / 4)[None, :]
        assert gauss_indices(shifted, V, tie_rule="first")[1][0] == 0
        assert gauss_indices(shifted, V, tie_rule="last")[1][0] == 1
        with pytest.raises(ValueError):
            gauss_indices(shifted, V, tie_rule="middle")

    @pytest.mark.parametrize("theta", [0.3, 0.9, 1.4])
    def test_half_plane_single_facet(self, half, theta):
        assert radial_gauss(half, direction(theta)).index == 0

    def test_arcs_translated(self, shifted):
        arcs = gauss_arcs(shifted)
        assert len(arcs) == 2
        assert arcs[0][1] == pytest.approx(math.pi / 4, abs=1e-15)
        np.testing.assert_allclose(shifted.normals[arcs[0][2]], [0.0, -1.0])

    def test_arcs_match_pointwise_gauss(self, C2, rng):
        for _ in range(20):
            K = random_pseudocone(C2, int(rng.integers(2, 7)), rng)
            arcs = gauss_arcs(K)
            assert arcs[0][0] == 0 and arcs[-1][1] == pytest.approx(math.pi / 2, abs=1e-12)
            for lo, hi, f in arcs:
                if hi - lo < 1e-9:
                    continue
                mid = 0.5 * (lo + hi)
                assert radial_gauss(K, direction(mid)).index == f

    def test_arcs_need_plane(self, C3):
        K = translated_cone(C3, [1, 1, 1])
        with pytest.raises(ValidationError):
            gauss_arcs(K)


class TestSupportAndDistance:
    def test_half_plane_support(self, half, grid2):
        assert support(half, [-SQRT_HALF, -SQRT_HALF], grid2) == pytest.approx(1.0, abs=1e-9)

    def test_active_facets_reproduce_depth(self, C2, grid2_small, rng):
        for _ in range(10):
            K = random_pseudocone(C2, 4, rng, grid=grid2_small)
            for u, h in zip(K.normals, K.depths):
                assert abs(support(K, u, grid2_small) - h) <= 1e-3

    def test_depths_never_exceed_support(self, C2, C3, rng):
        for C in (C2, C3):
            for _ in range(10):
                K = random_pseudocone(C, 5, rng)
                for u, h in zip(K.normals, K.depths):
                    assert h <= support_exact(K, u) * (1 + 1e-12)

    def test_exact_support_half_plane(self, half):
        assert support_exact(half, [-SQRT_HALF, -SQRT_HALF]) == pytest.approx(1.0, rel=1e-14)
        # The half-plane meets the x-axis, so the support along (0, -1) is 0.
        assert support_exact(half, [0.0, -1.0]) == pytest.approx(0.0, abs=1e-12)

    def test_exact_support_needs_polyhedral(self):
        C = make_circular_cone([SQRT_HALF, SQRT_HALF], 0.5)
        K = wulff_shape(C, [([-SQRT_HALF, -SQRT_HALF], 1.0)])
        with pytest.raises(ValidationError):
            support_exact(K, [-SQRT_HALF, -SQRT_HALF])

    def test_support_outside_dual(self, half, grid2_small):
        with pytest.raises(DomainError):
            support(half, [SQRT_HALF, SQRT_HALF], grid2_small)

    def test_distance_translated(self, shifted, grid2):
        assert distance_from_origin(shifted, grid2) == pytest.approx(math.sqrt(2), abs=1e-4)

    def test_distance_half_plane(self, half, grid2):
        assert distance_from_origin(half, grid2) == pytest.approx(1.0, abs=1e-9)

    def test_distance_scales(self, shifted, grid2):
        assert distance_from_origin(scale(shifted, 3.0), grid2) == pytest.approx(
            3 * distance_from_origin(shifted, grid2), rel=1e-14
        )

    def test_inactive_facet_reported_not_removed(self, C2, grid2_small):
        K = wulff_shape(C2, [([-SQRT_HALF, -SQRT_HALF], 1.0), ([-0.6, -0.8], 0.1)])
        assert inactive_facets(K, grid2_small) == [1]
        assert K.m == 2


class TestScalePerturb:
    def test_scale_one(self, half):
        np.testing.assert_array_equal(scale(half, 1.0).depths, half.depths)

    def test_scale_two(self, half):
        assert scale(half, 2.0).depths[0] == 2.0

    def test_scale_rejects(self, half):
        for lam in (0.0, -1.0, math.inf):
            with pytest.raises(ValidationError):
                scale(half, lam)

    def test_perturb_zero_is_identity(self, shifted):
        assert perturb(shifted, [0.3, -0.2], 0.0) is shifted

    def test_perturb_constant_is_scale(self, shifted):
        a = perturb(shifted, [0.7, 0.7], 0.01)
        np.testing.assert_allclose(a.depths, scale(shifted, math.exp(0.007)).depths, rtol=1e-15)

    def test_perturb_bound(self, C2, rng):
        K = random_pseudocone(C2, 5, rng)
        g = rng.uniform(-1, 1, 5)
        ratio = perturb(K, g, 1e-4).depths / K.depths
        assert np.all(ratio <= math.exp(1e-4) * (1 + 1e-15))
        assert np.all(ratio >= math.exp(-1e-4) * (1 - 1e-15))

    def test_perturb_validation(self, shifted):
        with pytest.raises(ValidationError):
            perturb(shifted, [1.0], 0.1)
        with pytest.raises(ValidationError):
            perturb(shifted, [1.0, 1.0], 1.5)


def test_log_radial_quotient_converges_to_g(C2, rng):
    """``(log rho_{K_t} - log rho_K)/t -> g(alpha_K(v))`` at non-tie directions."""
    K = random_pseudocone(C2, 4, rng, grid=sphere_grid(C2, 2000))
    g = rng.uniform(-1, 1, 4)
    for theta in (0.2, 0.8, 1.3):
        v = direction(theta)
        target = g[radial_gauss(K, v).index]
        errs = []
        for t in (1e-3, 1e-4, 1e-5):
            q = (math.log(radial(perturb(K, g, t), v)) - math.log(radial(K, v))) / t
            errs.append(abs(q - target))
        # Away from ties the quotient is exact up to rounding.
        assert max(errs) <= 1e-9
