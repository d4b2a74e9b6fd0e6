"""Tests for feasible domains and their projection oracles."""

import math

import numpy as np
import pytest

from app.domains import (
    BallDomain,
    BoxDomain,
    CountingDomain,
    HalfspaceDomain,
    SimplexDomain,
    distance_to,
    membership,
    project,
    random_halfspace_domain,
    validate_diameter,
)
from app.errors import ConfigError, DimensionMismatch, NonConvergence
from tests.oracles import halfspace_projection_oracle

TOL = 1e-9


def _slack(domain):
    # Dykstra stops on per-sweep movement, so its output is only close to the exact projection
    return TOL if domain.projection_tolerance == 0 else 1e-6


class TestProject:
    def test_ball_rescales_exterior_point(self, unit_ball):
        assert project([3.0, 4.0], unit_ball) == pytest.approx([0.6, 0.8])

    def test_ball_interior_point_is_fixed(self, unit_ball):
        assert project([0.1, -0.2], unit_ball) == pytest.approx([0.1, -0.2])

    def test_box_clamps(self):
        box = BoxDomain(dimension=2, lower=np.full(2, -0.5), upper=np.full(2, 0.5))
        assert project([1.0, -0.2], box) == pytest.approx([0.5, -0.2])

    def test_simplex_corner_cases(self):
        simplex = SimplexDomain(dimension=3, scale=1.0)
        assert project([2.0, 0.0, 0.0], simplex) == pytest.approx([1.0, 0.0, 0.0])
        assert project([0.5, 0.5, 0.5], simplex) == pytest.approx([1 / 3, 1 / 3, 1 / 3])
        assert project([-1.0, 0.2, 0.3], simplex) == pytest.approx([0.0, 0.2, 0.3])

    def test_simplex_matches_face_enumeration(self, rng):
        simplex = SimplexDomain(dimension=3, scale=1.0)
        rows = np.vstack([-np.eye(3), np.ones((1, 3))])
        offsets = np.array([0.0, 0.0, 0.0, 1.0])
        for _ in range(200):
            x = rng.normal(size=3) * 2
            expected = halfspace_projection_oracle(x, rows, offsets)
            assert np.linalg.norm(simplex.project(x) - expected) <= TOL

    def test_halfspace_matches_active_set_oracle(self, rng):
        normals = rng.normal(size=(3, 3))
        normals /= np.linalg.norm(normals, axis=1, keepdims=True)
        offsets = rng.uniform(0.2, 1.0, size=3)
        domain = HalfspaceDomain(dimension=3, normals=normals, offsets=offsets, diameter=100.0)
        for _ in range(50):
            x = rng.normal(size=3) * 3
            expected = halfspace_projection_oracle(x, normals, offsets)
            assert np.linalg.norm(domain.project(x) - expected) <= 1e-6

    def test_random_polytope_matches_oracle(self, rng, halfspace_domain):
        for _ in range(30):
            x = rng.normal(size=3) * 3
            expected = halfspace_projection_oracle(x, halfspace_domain.normals, halfspace_domain.offsets)
            assert np.linalg.norm(halfspace_domain.project(x) - expected) <= 1e-6

    def test_dimension_mismatch(self, unit_ball):
        with pytest.raises(DimensionMismatch):
            project([1.0, 2.0, 3.0], unit_ball)

    def test_dykstra_budget_exhausted(self, rng):
        domain = random_halfspace_domain(3, 12, rng, projection_tolerance=1e-14, max_projection_iterations=1)
        with pytest.raises(NonConvergence) as info:
            domain.project(np.array([5.0, 5.0, 5.0]))
        assert info.value.best is not None
        assert info.value.residual > 0


class TestProjectionProperties:
    @pytest.mark.parametrize("index", [0, 1, 2, pytest.param(3, marks=pytest.mark.slow)])
    def test_idempotent(self, rng, standard_domains, index):
        domain = standard_domains[index]
        for _ in range(10_000):
            p = domain.project(rng.normal(size=3) * 2)
            assert np.linalg.norm(domain.project(p) - p) <= 2 * _slack(domain)

    def test_nonexpansive(self, rng, standard_domains):
        for domain in standard_domains:
            for _ in range(200):
                x, y = rng.normal(size=3) * 2, rng.normal(size=3) * 2
                gap = np.linalg.norm(domain.project(x) - domain.project(y))
                assert gap <= np.linalg.norm(x - y) + 4 * _slack(domain)

    def test_obtuse_angle(self, rng, standard_domains):
        for domain in standard_domains:
            for _ in range(200):
                x = rng.normal(size=3) * 2
                p = domain.project(x)
                z = domain.project(rng.normal(size=3))
                bound = _slack(domain) * (1 + np.linalg.norm(x - p))
                assert float((x - p) @ (z - p)) <= bound

    def test_origin_is_member(self, standard_domains):
        for domain in standard_domains:
            assert membership(np.zeros(3), domain)

    def test_projected_points_respect_diameter(self, rng, standard_domains):
        for domain in standard_domains:
            points = np.array([domain.project(rng.normal(size=3) * 10) for _ in range(100)])
            diffs = points[:, None, :] - points[None, :, :]
            assert np.sqrt((diffs**2).sum(axis=2)).max() <= domain.diameter_bound + _slack(domain)


class TestDistanceAndMembership:
    def test_distance_to_ball(self, unit_ball):
        assert distance_to([2.0, 0.0], unit_ball) == pytest.approx(1.0)

    def test_distance_to_box(self):
        box = BoxDomain(dimension=2, lower=np.full(2, -0.5), upper=np.full(2, 0.5))
        assert distance_to([1.0, 1.0], box) == pytest.approx(math.sqrt(0.5))

    def test_origin_distance_is_zero(self, standard_domains):
        for domain in standard_domains:
            assert distance_to(np.zeros(3), domain) == 0.0

    def test_membership_tolerance(self, unit_ball):
        assert membership([0.0, 0.0], unit_ball, tol=0.0)
        assert membership([1 + 1e-12, 0.0], unit_ball, tol=1e-9)
        assert not membership([2.0, 0.0], unit_ball, tol=1e-9)


class TestDomainValidation:
    def test_box_must_contain_origin(self):
        with pytest.raises(ConfigError):
            BoxDomain(dimension=2, lower=np.array([0.1, -1.0]), upper=np.ones(2))

    def test_halfspace_offsets_nonnegative(self):
        with pytest.raises(ConfigError):
            HalfspaceDomain(dimension=2, normals=np.eye(2), offsets=np.array([1.0, -0.1]), diameter=4.0)

    def test_ball_radius_positive(self):
        with pytest.raises(ConfigError):
            BallDomain(dimension=2, radius=0.0)

    def test_random_polytope_needs_box_faces(self, rng):
        with pytest.raises(ConfigError):
            random_halfspace_domain(4, 7, rng)

    def test_random_polytope_bounds(self, rng):
        domain = random_halfspace_domain(4, 20, rng)
        assert domain.n_halfspaces == 20
        assert domain.diameter_bound == pytest.approx(4.0)
        assert domain.radius_bound == pytest.approx(2.0)


class TestValidateDiameter:
    def test_accepts_true_bound(self, rng, standard_domains):
        for domain in standard_domains:
            observed = validate_diameter(domain, rng, samples=64)
            assert observed <= domain.diameter_bound + _slack(domain)

    def test_rejects_understated_bound(self, rng):
        understated = HalfspaceDomain(
            dimension=2,
            normals=np.vstack([np.eye(2), -np.eye(2)]),
            offsets=np.ones(4),
            diameter=1.0,
            radius=1.0,
        )
        with pytest.raises(ConfigError):
            validate_diameter(understated, rng, samples=64)


class TestCountingDomain:
    def test_counts_projections_and_delegates(self, unit_ball):
        counter = CountingDomain(unit_ball)
        counter.project(np.array([2.0, 0.0]))
        counter.project(np.array([0.0, 0.0]))
        assert counter.calls == 2
        assert counter.diameter_bound == 2.0
        assert counter.wrapped is unit_ball
        counter.reset()
        assert counter.calls == 0

    def test_distance_through_wrapper_counts(self, unit_ball):
        counter = CountingDomain(unit_ball)
        distance_to([2.0, 0.0], counter)
        assert counter.calls == 1
