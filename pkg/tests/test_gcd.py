"""Generalized Cauchy direction tests: breakpoints, segment updates, search."""

import heapq
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

import rlbfgsb as rb
from rlbfgsb import (
    BoxBounds,
    GcdStatus,
    Geometry,
    LbfgsMemory,
    ProductPoint,
    ProductTangent,
    Sphere,
    compute_breakpoints,
    generalized_cauchy_direction,
    segment_values,
    surrogate_init,
)

from conftest import (
    box_geometry,
    dense_bfgs_matrix,
    fill_memory,
    path_first_local_minimizer,
    random_box_instance,
)


class TestComputeBreakpoints:
    def test_travel_time_to_lower(self):
        b = BoxBounds(np.array([0.0]), np.array([1.0]))
        out = compute_breakpoints(b, np.array([0.5]), np.array([-1.0]))
        assert_allclose(out.times, [0.5])

    def test_zero_direction_is_infinite(self):
        b = BoxBounds(np.array([0.0]), np.array([1.0]))
        out = compute_breakpoints(b, np.array([0.5]), np.array([0.0]))
        assert out.times[0] == np.inf

    def test_travel_time_to_upper(self):
        b = BoxBounds(np.array([0.0]), np.array([1.0]))
        out = compute_breakpoints(b, np.array([0.25]), np.array([0.5]))
        assert_allclose(out.times, [1.5])

    def test_infinite_facing_bound(self):
        b = BoxBounds(np.array([0.0]), np.array([np.inf]))
        out = compute_breakpoints(b, np.array([0.5]), np.array([2.0]))
        assert out.times[0] == np.inf

    def test_at_bound_moving_in_excluded_from_heap(self):
        b = BoxBounds(np.array([0.0]), np.array([1.0]))
        out = compute_breakpoints(b, np.array([0.0]), np.array([-1.0]), t_manifold_max=5.0)
        assert out.times[0] == 0.0
        assert all(idx == -1 for _, idx in out.heap)

    def test_heap_pops_sorted_with_sentinel(self):
        b = BoxBounds(np.zeros(3), np.array([1.0, 2.0, 3.0]))
        out = compute_breakpoints(b, np.zeros(3), np.ones(3), t_manifold_max=2.5)
        popped = [heapq.heappop(out.heap) for _ in range(len(out.heap))]
        assert [i for _, i in popped] == [0, 1, -1, 2]
        times = [t for t, _ in popped]
        assert times == sorted(times)


class TestSurrogateInit:
    def test_empty_memory(self):
        geom = box_geometry([-1.0], [1.0])
        p = ProductPoint([0.0])
        state = surrogate_init(LbfgsMemory(), geom, p, ProductTangent([1.0]))
        for v in (state.c_y, state.c_s, state.p_y, state.p_s):
            assert v.shape == (0,)

    def test_single_pair_inner_products(self):
        geom = Geometry(BoxBounds.unbounded(2))
        p = ProductPoint(np.zeros(2))
        mem = LbfgsMemory()
        s = ProductTangent([1.0, 0.0])
        y = ProductTangent([1.0, 1.0])
        mem.push(geom, p, s, y)
        state = surrogate_init(mem, geom, p, s)
        assert_allclose(state.p_s, [mem.theta * 1.0])
        assert_allclose(state.p_y, [1.0])
        assert_allclose(state.c_y, [0.0])
        assert_allclose(state.c_s, [0.0])

    def test_matches_memory_coefficients(self, rng):
        geom = Geometry(BoxBounds.unbounded(4))
        p = ProductPoint(np.zeros(4))
        mem = fill_memory(geom, p, rng, pushes=3)
        d = geom.random_tangent(p, rng)
        state = surrogate_init(mem, geom, p, d)
        assert_allclose(state.p_y, mem.coeff_y(geom, p, d))
        assert_allclose(state.p_s, mem.coeff_s(geom, p, d))


def _walk_segments(geom, p, grad, d, mem):
    """Drive the incremental updates over all finite breakpoints in heap order.

    Yields, after each transition, the incrementally updated ``(f1, f2)``
    together with the segment data needed for from-scratch checks.
    """
    bps = compute_breakpoints(geom.box, p.euclidean, d.euclidean)
    transitions = sorted(
        [(float(t), i) for i, t in enumerate(bps.times) if 0.0 < t < np.inf]
    )
    f1 = geom.inner(p, grad, d)
    f2 = mem.pairing(geom, p, d, d)
    state = surrogate_init(mem, geom, p, d)
    t_old = 0.0
    for t, b in transitions:
        dt = t - t_old
        d_b = float(d.euclidean[b])
        g_b = float(grad.euclidean[b])
        v1, v2 = segment_values(state, mem, t, dt, b, d_b)
        f1 = f1 + dt * f2 - d_b * (g_b + v1)
        f2 = f2 - 2.0 * d_b * v2 + d_b * d_b * mem.basis_diag(b)
        t_old = t
        yield t, b, v1, v2, f1, f2


def _path_pieces(geom, p, d, t):
    """Explicit moving direction and path point just after time ``t``."""
    times = compute_breakpoints(geom.box, p.euclidean, d.euclidean).times
    d_hat = ProductTangent(np.where(times > t, d.euclidean, 0.0))
    z = ProductTangent(
        np.clip(p.euclidean + t * d.euclidean, geom.box.lower, geom.box.upper)
        - p.euclidean
    )
    return d_hat, z


class TestSegmentValues:
    def test_identity_hessian_example(self):
        geom = box_geometry([-2.0], [2.0])
        p = ProductPoint([0.0])
        mem = LbfgsMemory()  # theta = 1
        state = surrogate_init(mem, geom, p, ProductTangent([-1.0]))
        v1, v2 = segment_values(state, mem, t=1.0, dt=1.0, b=0, d_b=-1.0)
        assert v1 == -1.0
        assert v2 == -1.0

    def test_values_match_from_scratch_pairing(self, rng):
        hits = 0
        while hits < 25:
            n = 4
            lower = -rng.random(n) - 0.1
            upper = rng.random(n) + 0.1
            geom = box_geometry(lower, upper)
            p = geom.random_point(rng)
            mem = fill_memory(geom, p, rng, pushes=2, capacity=2)
            grad = ProductTangent(rng.standard_normal(n))
            d = ProductTangent(rng.standard_normal(n))
            t_prev = 0.0
            for t, b, v1, v2, _, _ in _walk_segments(geom, p, grad, d, mem):
                e_b = np.zeros(n)
                e_b[b] = 1.0
                eb = ProductTangent(e_b)
                d_hat_prev, _ = _path_pieces(geom, p, d, t_prev)
                _, z_next = _path_pieces(geom, p, d, t)
                v1_ref = mem.pairing(geom, p, eb, z_next)
                v2_ref = mem.pairing(geom, p, eb, d_hat_prev)
                assert abs(v1 - v1_ref) <= 1e-10 * (1.0 + abs(v1_ref))
                assert abs(v2 - v2_ref) <= 1e-10 * (1.0 + abs(v2_ref))
                t_prev = t
                hits += 1


class TestIncrementalUpdates:
    def test_slope_and_curvature_match_from_scratch(self, rng):
        checked = 0
        while checked < 60:
            geom, p, grad, d, mem = random_box_instance(rng)
            for t, b, _, _, f1, f2 in _walk_segments(geom, p, grad, d, mem):
                d_hat, z = _path_pieces(geom, p, d, t)
                f1_ref = geom.inner(p, grad, d_hat) + mem.pairing(geom, p, d_hat, z)
                f2_ref = mem.pairing(geom, p, d_hat, d_hat)
                assert abs(f1 - f1_ref) <= 1e-9 * (1.0 + abs(f1_ref))
                assert abs(f2 - f2_ref) <= 1e-9 * (1.0 + abs(f2_ref))
                checked += 1

    def test_tied_breakpoints_are_exact(self):
        # two coordinates hit their bounds at exactly the same time
        geom = box_geometry([-1.0, -1.0, -5.0], [1.0, 1.0, 5.0])
        p = ProductPoint(np.zeros(3))
        mem = LbfgsMemory()
        mem.push(
            geom,
            p,
            ProductTangent([1.0, 0.5, -0.5]),
            ProductTangent([0.8, 0.7, -0.2]),
        )
        grad = ProductTangent([1.0, 2.0, -0.5])
        d = ProductTangent([-1.0, -1.0, 0.3])  # breakpoints at 1, 1, and 16.7
        final = None
        for out in _walk_segments(geom, p, grad, d, mem):
            final = out
        t, _, _, _, f1, f2 = final
        d_hat, z = _path_pieces(geom, p, d, t)
        f1_ref = geom.inner(p, grad, d_hat) + mem.pairing(geom, p, d_hat, z)
        f2_ref = mem.pairing(geom, p, d_hat, d_hat)
        assert abs(f1 - f1_ref) <= 1e-9 * (1.0 + abs(f1_ref))
        assert abs(f2 - f2_ref) <= 1e-9 * (1.0 + abs(f2_ref))


class TestCauchyDirectionExamples:
    def test_minimizer_exactly_at_bound(self):
        geom = box_geometry([-1.0], [np.inf])
        p = ProductPoint([0.0])
        out = generalized_cauchy_direction(
            geom, p, ProductTangent([1.0]), ProductTangent([-1.0]), LbfgsMemory(), np.inf
        )
        assert out.status is GcdStatus.FOUND_LIMITED
        assert_allclose(out.direction.euclidean, [-1.0])
        assert out.t_max == 1.0

    def test_interior_minimizer_before_bound(self):
        geom = box_geometry([-2.0], [np.inf])
        p = ProductPoint([0.0])
        out = generalized_cauchy_direction(
            geom, p, ProductTangent([1.0]), ProductTangent([-1.0]), LbfgsMemory(), np.inf
        )
        assert out.status is GcdStatus.FOUND_LIMITED
        assert_allclose(out.direction.euclidean, [-1.0])
        assert out.t_max == 2.0

    def test_orthogonal_gradient_not_found(self):
        geom = box_geometry([-1.0, -1.0], [1.0, 1.0])
        p = ProductPoint([0.0, 0.0])
        out = generalized_cauchy_direction(
            geom, p, ProductTangent([1.0, 0.0]), ProductTangent([0.0, -1.0]), LbfgsMemory(), np.inf
        )
        assert out.status is GcdStatus.NOT_FOUND
        assert out.t_max == -1.0
        assert np.linalg.norm(out.direction.euclidean) == 0.0

    def test_unbounded_direction_unlimited(self):
        geom = box_geometry([-np.inf, -np.inf], [np.inf, np.inf])
        p = ProductPoint([0.0, 0.0])
        out = generalized_cauchy_direction(
            geom, p, ProductTangent([1.0, 1.0]), ProductTangent([-1.0, -1.0]), LbfgsMemory(), np.inf
        )
        assert out.status is GcdStatus.FOUND_UNLIMITED
        assert out.t_max == np.inf
        assert_allclose(out.direction.euclidean, [-1.0, -1.0])

    def test_manifold_cap_limits_step(self):
        # pure-sphere instance whose segment minimizer overshoots the cap
        sph = Sphere(3)
        geom = Geometry(BoxBounds.empty(), sph)
        p = ProductPoint(np.zeros(0), np.array([1.0, 0.0, 0.0]))
        g = ProductTangent(np.zeros(0), np.array([0.0, 1.0, 0.0]))
        d = -0.1 * g  # f' = -0.1 |g|^2, f'' = 0.01 |g|^2, minimizer at t = 10
        out = generalized_cauchy_direction(geom, p, g, d, LbfgsMemory(), math.pi)
        assert out.status is GcdStatus.FOUND_UNLIMITED
        assert_allclose(np.linalg.norm(out.direction.manifold), math.pi * 0.1, rtol=1e-12)


class TestCauchyDirectionProperties:
    def test_first_local_minimizer_oracle(self, rng):
        for _ in range(300):
            geom, p, grad, d, mem = random_box_instance(rng)
            out = generalized_cauchy_direction(geom, p, grad, d, mem, np.inf)
            if out.status is GcdStatus.NOT_FOUND:
                continue
            n = geom.box.n
            h = dense_bfgs_matrix(mem, n)
            times = compute_breakpoints(geom.box, p.euclidean, d.euclidean).times
            _, q_ref = path_first_local_minimizer(
                p.euclidean, d.euclidean, grad.euclidean, h, geom.box.lower, geom.box.upper, times
            )
            z = out.direction.euclidean
            q_got = z @ grad.euclidean + 0.5 * z @ h @ z
            assert abs(q_got - q_ref) <= 1e-8 * (1.0 + abs(q_ref))

    def test_output_feasible(self, rng):
        for _ in range(500):
            geom, p, grad, d, mem = random_box_instance(rng)
            out = generalized_cauchy_direction(geom, p, grad, d, mem, np.inf)
            if out.status is GcdStatus.NOT_FOUND:
                continue
            target = p.euclidean + out.direction.euclidean
            assert np.all(target >= geom.box.lower)
            assert np.all(target <= geom.box.upper)

    def test_unit_multiplier_always_feasible(self, rng):
        for _ in range(300):
            geom, p, grad, d, mem = random_box_instance(rng)
            out = generalized_cauchy_direction(geom, p, grad, d, mem, np.inf)
            if out.status is not GcdStatus.FOUND_LIMITED:
                continue
            assert out.t_max >= 1.0
            q = geom.retract(p, 1.0 * out.direction)
            assert geom.box.violation(q.euclidean) == 0.0

    def test_cap_is_sharp(self, rng):
        # beyond t_max some coordinate must leave the box (before clipping)
        seen = 0
        for _ in range(500):
            geom, p, grad, d, mem = random_box_instance(rng)
            out = generalized_cauchy_direction(geom, p, grad, d, mem, np.inf)
            if out.status is not GcdStatus.FOUND_LIMITED or not np.isfinite(out.t_max):
                continue
            at_cap = p.euclidean + out.t_max * out.direction.euclidean
            assert geom.box.violation(at_cap) <= 1e-9
            if out.t_max > 1.0:
                beyond = p.euclidean + (1.01 * out.t_max) * out.direction.euclidean
                assert geom.box.violation(beyond) > 0.0
                seen += 1
        assert seen > 10

    def test_not_found_zero_direction(self, rng):
        geom = box_geometry([-1.0], [1.0])
        p = ProductPoint([0.5])
        out = generalized_cauchy_direction(
            geom, p, ProductTangent([0.0]), ProductTangent([1.0]), LbfgsMemory(), np.inf
        )
        assert out.status is GcdStatus.NOT_FOUND
        assert np.linalg.norm(out.direction.euclidean) == 0.0
