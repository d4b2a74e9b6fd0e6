"""Tests for the surrogate loss, its context and the legacy variant."""

import numpy as np
import pytest

from app.domains import CountingDomain, distance_to, random_halfspace_domain
from app.errors import OracleError
from app.surrogate import (
    build_context,
    delta_term,
    legacy_surrogate_grad,
    legacy_surrogate_value,
    linear_context,
    surrogate_grad,
    surrogate_value,
)

# per domain; four domains give 10^4 tuples per property
SAMPLES = 2500


def _slack(domain):
    return 1e-9 if domain.projection_tolerance == 0 else 1e-6


def _tuples(rng, domain, n=SAMPLES):
    """Random (ctx, comparator) pairs with y_t on a ball of radius 3."""
    d = domain.dimension
    for _ in range(n):
        y_t = rng.normal(size=d)
        y_t *= rng.uniform(0.0, 3.0) / max(np.linalg.norm(y_t), 1e-12)
        grad_f = rng.normal(size=d)
        x = domain.project(rng.normal(size=d) * 2)
        yield build_context(y_t, grad_f, domain), x


class TestBuildContext:
    def test_outward_gradient(self, unit_ball):
        ctx = build_context(np.array([2.0, 0.0]), np.array([1.0, 0.0]), unit_ball)
        assert ctx.x_t == pytest.approx([1.0, 0.0])
        assert ctx.v_t == pytest.approx([1.0, 0.0])
        assert ctx.alignment == pytest.approx(1.0)
        assert not ctx.inward_flag
        assert ctx.gap == pytest.approx(1.0)

    def test_inward_gradient(self, unit_ball):
        ctx = build_context(np.array([2.0, 0.0]), np.array([-1.0, 0.0]), unit_ball)
        assert ctx.alignment == pytest.approx(-1.0)
        assert ctx.inward_flag

    def test_feasible_point_is_degenerate(self, unit_ball):
        ctx = build_context(np.array([0.3, 0.4]), np.array([-1.0, 2.0]), unit_ball)
        assert ctx.x_t == pytest.approx([0.3, 0.4])
        assert ctx.v_t == pytest.approx([0.0, 0.0])
        assert ctx.alignment == 0.0
        assert not ctx.inward_flag

    def test_single_projection(self, unit_ball):
        counter = CountingDomain(unit_ball)
        build_context(np.array([2.0, 0.0]), np.array([1.0, 0.0]), counter)
        assert counter.calls == 1

    def test_non_finite_gradient(self, unit_ball):
        with pytest.raises(OracleError):
            build_context(np.array([2.0, 0.0]), np.array([np.nan, 0.0]), unit_ball)

    def test_linear_context_skips_projection(self):
        ctx = linear_context(np.array([5.0, 5.0]), np.array([1.0, 1.0]))
        assert not ctx.inward_flag
        assert surrogate_grad(ctx) == pytest.approx([1.0, 1.0])
        assert delta_term(ctx) == 0.0


class TestSurrogateValue:
    def test_inward_values(self, unit_ball):
        ctx = build_context(np.array([2.0, 0.0]), np.array([-1.0, 0.0]), unit_ball)
        assert surrogate_value(ctx, np.array([2.0, 0.0]), unit_ball) == pytest.approx(-1.0)
        assert surrogate_value(ctx, np.array([0.5, 0.0]), unit_ball) == pytest.approx(-0.5)

    def test_outward_is_linear(self, unit_ball):
        ctx = build_context(np.array([2.0, 0.0]), np.array([1.0, 0.0]), unit_ball)
        assert surrogate_value(ctx, np.array([3.0, 1.0]), unit_ball) == pytest.approx(3.0)

    def test_agrees_with_linear_loss_on_domain(self, rng, standard_domains):
        for domain in standard_domains:
            for ctx, x in _tuples(rng, domain, n=200):
                assert surrogate_value(ctx, x, domain) == pytest.approx(float(ctx.grad_f @ x), abs=_slack(domain))


class TestSurrogateGrad:
    def test_inward_component_removed(self, unit_ball):
        ctx = build_context(np.array([2.0, 0.0]), np.array([-1.0, 0.0]), unit_ball)
        assert surrogate_grad(ctx) == pytest.approx([0.0, 0.0])

    def test_tangential_component_kept(self, unit_ball):
        ctx = build_context(np.array([2.0, 0.0]), np.array([-1.0, 1.0]), unit_ball)
        assert surrogate_grad(ctx) == pytest.approx([0.0, 1.0])

    def test_outward_unchanged(self, unit_ball):
        ctx = build_context(np.array([2.0, 0.0]), np.array([1.0, 1.0]), unit_ball)
        assert surrogate_grad(ctx) == pytest.approx([1.0, 1.0])

    def test_norm_never_grows(self, rng, standard_domains):
        for domain in standard_domains:
            for ctx, _ in _tuples(rng, domain):
                assert np.linalg.norm(surrogate_grad(ctx)) <= np.linalg.norm(ctx.grad_f) + 1e-12

    def test_matches_finite_differences(self, rng, standard_domains):
        h = 1e-5
        tight = random_halfspace_domain(3, 9, np.random.default_rng(7), projection_tolerance=1e-13)
        domains = standard_domains[:3] + [tight]
        for domain in domains:
            checked = 0
            while checked < 250:
                y_t = rng.normal(size=3)
                y_t *= rng.uniform(3.0, 6.0) / np.linalg.norm(y_t)
                ctx = build_context(y_t, rng.normal(size=3), domain)
                if ctx.gap < 0.5:
                    continue
                numeric = np.array(
                    [
                        (surrogate_value(ctx, y_t + h * e, domain) - surrogate_value(ctx, y_t - h * e, domain)) / (2 * h)
                        for e in np.eye(3)
                    ]
                )
                exact = surrogate_grad(ctx)
                assert np.linalg.norm(numeric - exact) <= 1e-5 * max(1.0, float(np.linalg.norm(exact)))
                checked += 1


class TestRegretChain:
    def test_value_and_gradient_chain(self, rng, standard_domains):
        for domain in standard_domains:
            slack = _slack(domain)
            for ctx, x in _tuples(rng, domain):
                linear = float(ctx.grad_f @ (ctx.x_t - x))
                gap = surrogate_value(ctx, ctx.y_t, domain) - surrogate_value(ctx, x, domain)
                upper = float(surrogate_grad(ctx) @ (ctx.y_t - x))
                assert linear <= gap + slack
                assert gap <= upper + slack

    def test_delta_sharpened_bound(self, rng, standard_domains):
        for domain in standard_domains:
            slack = _slack(domain)
            for ctx, x in _tuples(rng, domain):
                linear = float(ctx.grad_f @ (ctx.x_t - x))
                upper = float(surrogate_grad(ctx) @ (ctx.y_t - x)) - delta_term(ctx)
                assert linear <= upper + slack

    def test_gradient_orthogonal_to_projection_step(self, rng, standard_domains):
        for domain in standard_domains:
            slack = _slack(domain)
            for ctx, _ in _tuples(rng, domain):
                inner = float(surrogate_grad(ctx) @ (ctx.x_t - ctx.y_t))
                if ctx.inward_flag:
                    assert inner == pytest.approx(0.0, abs=slack * (1 + ctx.gap))
                else:
                    assert inner <= slack

    def test_delta_nonnegative(self, rng, standard_domains):
        for domain in standard_domains:
            for ctx, _ in _tuples(rng, domain):
                assert delta_term(ctx) >= 0.0
                if not ctx.inward_flag:
                    assert delta_term(ctx) == pytest.approx(float(ctx.grad_f @ (ctx.y_t - ctx.x_t)), abs=_slack(domain))


class TestLegacySurrogate:
    def test_value_example(self, unit_ball):
        ctx = build_context(np.array([2.0, 0.0]), np.array([-1.0, 0.0]), unit_ball)
        assert legacy_surrogate_value(ctx, np.array([2.0, 0.0]), unit_ball) == pytest.approx(-1.0)
        assert legacy_surrogate_grad(ctx) == pytest.approx([0.0, 0.0])

    def test_outward_gradient_doubles(self, unit_ball):
        ctx = build_context(np.array([2.0, 0.0]), np.array([1.0, 0.0]), unit_ball)
        assert legacy_surrogate_grad(ctx) == pytest.approx([2.0, 0.0])

    def test_legacy_chain_holds(self, rng, standard_domains):
        for domain in standard_domains:
            slack = _slack(domain)
            for ctx, x in _tuples(rng, domain):
                linear = float(ctx.grad_f @ (ctx.x_t - x))
                assert linear <= float(legacy_surrogate_grad(ctx) @ (ctx.y_t - x)) + slack
                assert np.linalg.norm(legacy_surrogate_grad(ctx)) <= 2 * np.linalg.norm(ctx.grad_f) + 1e-12

    def test_new_bound_is_tighter(self, rng, standard_domains):
        for domain in standard_domains:
            slack = _slack(domain)
            for ctx, x in _tuples(rng, domain, n=500):
                new = float(surrogate_grad(ctx) @ (ctx.y_t - x))
                old = float(legacy_surrogate_grad(ctx) @ (ctx.y_t - x))
                assert new <= old + slack
                assert legacy_surrogate_value(ctx, x, domain) == pytest.approx(
                    float(ctx.grad_f @ x) + np.linalg.norm(ctx.grad_f) * distance_to(x, domain)
                )
