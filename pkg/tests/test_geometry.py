import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from genusflow.geometry import (
    Mobius,
    PoleError,
    ReduceError,
    chart_to_rectangle,
    reduce_to_domain,
    shear_torus_domain,
    standard_domain,
)


class TestMobius:
    def test_identity(self):
        T = Mobius(1, 0, 0, 1)
        assert T.apply(complex(0.3, 2.0)) == complex(0.3, 2.0)

    def test_translation(self):
        T = Mobius(1, 1, 0, 1)
        assert T.apply(complex(0.0, 1.0)) == complex(1.0, 1.0)

    def test_inversion(self):
        T = Mobius(0, -1, 1, 0)
        z = T.apply(complex(0.0, 2.0))
        assert z == pytest.approx(complex(0.0, 0.5))

    def test_normalization_det_one(self):
        T = Mobius(2.0, 0.0, 0.0, 2.0)
        assert abs(T.det() - 1.0) < 1e-12
        assert T.a == pytest.approx(1.0)

    def test_normalization_sign(self):
        T = Mobius(-1, 0, 0, -1)
        assert T.a >= 0
        U = Mobius(0.0, -2.0, 2.0, 0.0)
        assert U.c > 0

    def test_nonpositive_det_rejected(self):
        with pytest.raises(ValueError):
            Mobius(1, 0, 0, -1)

    def test_pole(self):
        T = Mobius(0, -1, 1, 0)
        with pytest.raises(PoleError):
            T.apply(complex(0.0, 0.0))

    def test_pushforward_identity_and_translation(self):
        z = complex(0.7, 1.3)
        v = complex(2.0, 3.0)
        _, v1 = Mobius(1, 0, 0, 1).pushforward(z, v)
        assert v1 == v
        _, v2 = Mobius(1, 1, 0, 1).pushforward(z, v)
        assert v2 == v

    def test_pushforward_inversion(self):
        # derivative of -1/z is 1/z^2, which is -1 at z=i; the finite
        # difference oracle below pins the sign
        T = Mobius(0, -1, 1, 0)
        base, v = T.pushforward(complex(0, 1), complex(1, 0))
        assert base == pytest.approx(complex(0, 1))
        assert v == pytest.approx(complex(-1, 0))

    def test_pushforward_matches_finite_differences(self):
        rng = np.random.default_rng(7)
        maps = [
            Mobius(1, 1, 0, 1),
            Mobius(0, -1, 1, 0),
            Mobius(2, 1, 1, 1),
            Mobius(1.5, -0.3, 0.2, 0.9),
        ]
        h = 1e-6
        for _ in range(100):
            T = maps[rng.integers(len(maps))]
            z = complex(rng.uniform(-2, 2), rng.uniform(0.5, 5.0))
            v = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
            _, got = T.pushforward(z, v)
            dx = (T.apply(z + h) - T.apply(z - h)) / (2 * h)
            dy = (T.apply(z + h * 1j) - T.apply(z - h * 1j)) / (2 * h)
            fd = v.real * dx + v.imag * dy
            assert abs(got - fd) / max(abs(fd), 1e-12) < 1e-5

    def test_compose_translations(self):
        S = Mobius(1, 1, 0, 1)
        T = Mobius(1, 2, 0, 1)
        C = S.compose(T)
        assert C.almost_equal(Mobius(1, 3, 0, 1))

    def test_inverse_of_translation(self):
        T = Mobius(1, 1, 0, 1)
        assert T.inverse().almost_equal(Mobius(1, -1, 0, 1))

    def test_compose_with_inverse_is_identity(self):
        T = Mobius(2, 1, 1, 1)
        assert T.compose(T.inverse()).almost_equal(Mobius.identity())

    @given(
        st.floats(-3, 3),
        st.floats(-3, 3),
        st.floats(-3, 3),
        st.floats(-3, 3),
    )
    @settings(max_examples=200, deadline=None)
    def test_normalized_det_property(self, a, b, c, d):
        if a * d - b * c <= 1e-6:
            return
        T = Mobius(a, b, c, d)
        assert abs(T.a * T.d - T.b * T.c - 1.0) < 1e-12


class TestChart:
    def test_lower_edge(self):
        x, y = chart_to_rectangle(1.5, math.pi / 4, math.pi / 4)
        assert x == pytest.approx(0.0)
        assert y == 1.5

    def test_upper_edge(self):
        x, y = chart_to_rectangle(2.0, math.pi - math.pi / 4, math.pi / 4)
        assert x == pytest.approx(math.pi)
        assert y == 2.0

    def test_small_alpha_near_identity(self):
        x, y = chart_to_rectangle(1.0, math.pi / 2, 1e-9)
        assert x == pytest.approx(math.pi / 2, rel=1e-6)
        assert y == 1.0

    def test_monotone_and_endpoint_exact(self):
        alpha = 0.4
        thetas = np.linspace(alpha, math.pi - alpha, 41)
        xs = [chart_to_rectangle(1.0, th, alpha)[0] for th in thetas]
        assert all(b > a for a, b in zip(xs, xs[1:]))
        assert xs[0] == 0.0
        assert xs[-1] == pytest.approx(math.pi, abs=1e-15)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            chart_to_rectangle(1.0, 0.1, 0.4)
        with pytest.raises(ValueError):
            chart_to_rectangle(-1.0, 1.0, 0.4)
        with pytest.raises(ValueError):
            chart_to_rectangle(1.0, 1.0, 2.0)


class TestStandardDomain:
    def test_torus_layout(self):
        dom = standard_domain(1)
        assert dom.n_segments == 4
        assert dom.pairing == (3, 4, 1, 2)
        for i in (1, 2, 3, 4):
            assert dom.transition(i).is_translation()

    def test_torus_wrap_word(self):
        dom = standard_domain(1)
        q, word = reduce_to_domain((1.001, 0.5), dom)
        assert word == [3]
        assert q[0] == pytest.approx(0.001)
        assert q[1] == 0.5

    def test_genus2_layout(self):
        dom = standard_domain(2)
        assert dom.n_segments == 8
        sigma = dom.pairing
        assert sigma == (3, 4, 1, 2, 7, 8, 5, 6)
        for i, s in enumerate(sigma, start=1):
            assert s != i
            assert sigma[s - 1] == i
        assert len(dom.cusps) == 8

    @pytest.mark.parametrize("p", [1, 2, 3])
    def test_transition_round_trip(self, p):
        dom = standard_domain(p)
        for seg in dom.segments:
            t_fwd = dom.transition(seg.index)
            t_back = dom.transition(dom.partner(seg.index))
            for k in range(50):
                s = (k + 0.5) / 50
                q = seg.point_at(s)
                image = t_fwd.apply(q)
                back = t_back.apply(image)
                assert math.hypot(back[0] - q[0], back[1] - q[1]) < 1e-10
                # tangent part round-trips too
                v = (0.3, -0.9)
                v_back = t_back.push(t_fwd.push(v))
                assert math.hypot(v_back[0] - v[0], v_back[1] - v[1]) < 1e-10

    @pytest.mark.parametrize("p", [1, 2, 3])
    def test_transitions_carry_endpoints_to_endpoints(self, p):
        dom = standard_domain(p)
        for seg in dom.segments:
            partner = dom.segments[dom.partner(seg.index) - 1]
            t = dom.transition(seg.index)
            img0 = t.apply(seg.p0)
            img1 = t.apply(seg.p1)
            assert math.hypot(img0[0] - partner.p1[0], img0[1] - partner.p1[1]) < 1e-12
            assert math.hypot(img1[0] - partner.p0[0], img1[1] - partner.p0[1]) < 1e-12

    def test_transitions_orientation_preserving(self):
        dom = standard_domain(2)
        for i in range(1, 9):
            m = dom.transition(i).matrix
            assert np.linalg.det(m) > 0

    def test_outward_points_map_inward(self):
        dom = standard_domain(2)
        for seg in dom.segments:
            n = seg.inward_normal()
            mid = seg.point_at(0.5)
            outside = (mid[0] - 1e-6 * n[0], mid[1] - 1e-6 * n[1])
            assert dom.boundary_violation(outside) > 0
            image = dom.transition(seg.index).apply(outside)
            assert dom.boundary_violation(image) < 0

    def test_bad_genus(self):
        with pytest.raises(ValueError):
            standard_domain(0)


class TestReduce:
    def test_interior_point_unchanged(self):
        dom = standard_domain(1)
        q, word = reduce_to_domain((0.5, 0.5), dom)
        assert word == []
        assert q == (0.5, 0.5)

    def test_genus2_round_trip(self):
        dom = standard_domain(2)
        seg = dom.segments[0]
        n = seg.inward_normal()
        mid = seg.point_at(0.37)
        outside = (mid[0] - 1e-4 * n[0], mid[1] - 1e-4 * n[1])
        q, word = reduce_to_domain(outside, dom)
        assert word == [1]
        back = dom.transition(dom.partner(1)).apply(q)
        assert math.hypot(back[0] - outside[0], back[1] - outside[1]) < 1e-10

    def test_far_point_errors(self):
        dom = standard_domain(2)
        with pytest.raises(ReduceError):
            reduce_to_domain((500.0, 500.0), dom)

    def test_torus_double_wrap(self):
        dom = standard_domain(1)
        q, word = reduce_to_domain((2.25, -0.5), dom)
        assert q[0] == pytest.approx(0.25)
        assert q[1] == pytest.approx(0.5)
        # wraps follow the largest violation at each application
        assert word == [3, 2, 3]


class TestShearTorus:
    def test_right_crossing_shears(self):
        dom = shear_torus_domain(shear=0.25, width=1.0, y0=0.0, height=2.0)
        q, word = reduce_to_domain((1.1, 1.0), dom)
        assert word == [3]
        assert q[0] == pytest.approx(0.1)
        assert q[1] == pytest.approx(0.75)

    def test_involution(self):
        dom = shear_torus_domain(shear=0.3)
        for i in (1, 2, 3, 4):
            fwd = dom.transition(i)
            back = dom.transition(dom.partner(i))
            q = (0.4, 0.6)
            r = back.apply(fwd.apply(q))
            assert r == pytest.approx(q)
