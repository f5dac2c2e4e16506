import numpy as np
import pytest

from plateau_lab import groups as gr
from plateau_lab import sphere as sp
from plateau_lab.errors import GroupMismatchError


def diracs(f2):
    a, b = f2.generators
    return (
        sp.SphereVector.dirac(f2),
        sp.SphereVector.dirac(f2, a),
        sp.SphereVector.dirac(f2, b),
    )


class TestBasics:
    def test_unit_invariant(self, f2, rng):
        for _ in range(10):
            u = sp.random_vector(f2, rng, 2, 5, payload_dim=3)
            assert abs(u.norm() - 1.0) < 1e-12

    def test_zero_entries_dropped(self, f2):
        a = f2.generators[0]
        u = sp.SphereVector.from_entries(f2, {f2.identity: 1.0, a: 0.0})
        assert list(u.entries) == [f2.identity]

    def test_payload_cap(self, f2):
        with pytest.raises(ValueError):
            sp.SphereVector.from_entries(f2, {f2.identity: np.ones(9)})

    def test_identity_action(self, f2, rng):
        u = sp.random_vector(f2, rng, 2, 5)
        assert sp.act(f2.identity, u) == u

    def test_translated_dirac(self, f2):
        de, da, _ = diracs(f2)
        assert sp.act(f2.generators[0], de) == da

    def test_action_preserves_inner_products(self, f2, rng):
        g = f2.from_word("abA")
        for _ in range(20):
            u = sp.random_vector(f2, rng, 2, 4, payload_dim=2)
            v = sp.random_vector(f2, rng, 2, 4, payload_dim=2)
            assert abs(sp.act(g, u).inner(sp.act(g, v)) - u.inner(v)) < 1e-12

    def test_action_isometry_both_metrics(self, f2, rng):
        g = f2.from_word("ba")
        u = sp.random_vector(f2, rng, 2, 5)
        v = sp.random_vector(f2, rng, 2, 5)
        assert abs(sp.chordal_distance(sp.act(g, u), sp.act(g, v)) - sp.chordal_distance(u, v)) < 1e-12
        assert abs(sp.geodesic_distance(sp.act(g, u), sp.act(g, v)) - sp.geodesic_distance(u, v)) < 1e-12


class TestDistances:
    def test_self_distance(self, f2, rng):
        u = sp.random_vector(f2, rng, 2, 5)
        assert sp.chordal_distance(u, u) == 0.0
        assert sp.geodesic_distance(u, u) == 0.0

    def test_orthogonal_diracs(self, f2):
        de, da, _ = diracs(f2)
        assert abs(sp.chordal_distance(de, da) - np.sqrt(2)) < 1e-15
        assert abs(sp.geodesic_distance(de, da) - np.pi / 2) < 1e-15

    def test_antipodal(self, f2):
        de = sp.SphereVector.dirac(f2)
        neg = sp.SphereVector(f2, {f2.identity: np.array([-1.0])}, 1)
        assert abs(sp.chordal_distance(de, neg) - 2.0) < 1e-15
        assert abs(sp.geodesic_distance(de, neg) - np.pi) < 1e-15


class TestDisplacement:
    def test_dirac(self, f2):
        rep = sp.displacement(sp.SphereVector.dirac(f2))
        assert abs(rep.delta - np.sqrt(2)) < 1e-15
        assert rep.exact

    def test_uniform_ball_one(self, f2):
        # brute-force overlap oracle: <a.u, u> = 2/5 so delta^2 = 2 - 4/5 = 6/5
        u = sp.SphereVector.uniform(f2, f2.ball(1))
        a = f2.generators[0]
        overlap = sp.act(a, u).inner(u)
        assert abs(overlap - 2.0 / 5.0) < 1e-15
        rep = sp.displacement(u)
        assert abs(rep.delta - np.sqrt(6.0 / 5.0)) < 1e-12

    def test_ball_radius_variant_agrees(self, f2, rng):
        u = sp.random_vector(f2, rng, 2, 4)
        exact = sp.displacement(u)
        balled = sp.displacement(u, radius=2 * u.max_support_length() + 1)
        assert abs(exact.delta - balled.delta) < 1e-12
        assert balled.exact

    def test_invariance_under_action(self, f2, rng):
        u = sp.random_vector(f2, rng, 2, 4)
        g = f2.from_word("ab")
        assert abs(sp.displacement(u).delta - sp.displacement(sp.act(g, u)).delta) < 1e-12

    def test_properness_floor(self, f2, rng):
        # gamma outside the support-product set keeps the translates far apart
        for _ in range(20):
            eps = float(rng.uniform(1e-4, 0.05))
            main = sp.random_vector(f2, rng, 1, 3, nonnegative=True)
            tail = sp.act(f2.from_word("aaa"), sp.random_vector(f2, rng, 0, 1, nonnegative=True))
            entries = {g: np.sqrt(1 - eps) * v for g, v in main.entries.items()}
            for g, v in tail.entries.items():
                entries[g] = entries.get(g, 0.0) + np.sqrt(eps) * v
            f1 = sp.SphereVector.from_entries(f2, entries)
            gamma = f2.from_word("abababab")
            lhs = sp.chordal_distance(sp.act(gamma, f1), f1) ** 2
            assert lhs >= 2 * (1 - eps - 2 * np.sqrt(eps)) - 1e-10


class TestTransportMaps:
    def test_abs_fixes_nonnegative_scalars(self, f2, rng):
        u = sp.random_vector(f2, rng, 2, 4, nonnegative=True)
        assert sp.abs_map(u) == u

    def test_abs_payload_norms(self, f2):
        c = 1.0
        u = sp.SphereVector.from_entries(f2, {f2.identity: [0.6 * c, 0.8 * c]})
        out = sp.abs_map(u)
        assert np.allclose(out.entries[f2.identity], [1.0])

    def test_abs_one_lipschitz(self, f2, rng):
        for _ in range(50):
            u = sp.random_vector(f2, rng, 2, 4, payload_dim=2)
            v = sp.random_vector(f2, rng, 2, 4, payload_dim=2)
            assert sp.chordal_distance(sp.abs_map(u), sp.abs_map(v)) <= sp.chordal_distance(u, v) + 1e-12

    def test_identity_homomorphism_equals_abs(self, f2, rng):
        theta = sp.Homomorphism.identity(f2)
        u = sp.random_vector(f2, rng, 2, 4, payload_dim=2)
        assert sp.push_homomorphism(theta, u) == sp.abs_map(u)

    def test_collapse_to_z(self, f2):
        z = gr.free_abelian_group(1)
        theta = sp.Homomorphism(f2, z, (z.generators[0], z.identity))
        b = f2.generators[1]
        u = sp.SphereVector.uniform(f2, [f2.identity, b, b.inv()])
        out = sp.push_homomorphism(theta, u)
        assert list(out.entries) == [z.identity]
        assert abs(out.norm() - 1.0) < 1e-15

    def test_push_one_lipschitz(self, f2, rng):
        z = gr.free_abelian_group(1)
        theta = sp.Homomorphism(f2, z, (z.generators[0], z.identity))
        for _ in range(50):
            u = sp.random_vector(f2, rng, 2, 4)
            v = sp.random_vector(f2, rng, 2, 4)
            assert sp.chordal_distance(sp.push_homomorphism(theta, u), sp.push_homomorphism(theta, v)) <= sp.chordal_distance(u, v) + 1e-12

    def test_equivariance(self, f2, rng):
        z = gr.free_abelian_group(1)
        theta = sp.Homomorphism(f2, z, (z.generators[0], z.identity))
        x = f2.from_word("ab")
        u = sp.random_vector(f2, rng, 2, 4)
        lhs = sp.push_homomorphism(theta, sp.act(x, u))
        rhs = sp.act(theta.apply(x), sp.push_homomorphism(theta, u))
        assert lhs == rhs

    def test_wrong_image_count(self, f2):
        z = gr.free_abelian_group(1)
        with pytest.raises(ValueError):
            sp.Homomorphism(f2, z, (z.generators[0],))


class TestConvolution:
    def test_dirac_weight_is_abs(self, f2, rng):
        u = sp.random_vector(f2, rng, 2, 4)
        eta = {f2.identity: 1.0}
        assert sp.convolve(eta, u) == sp.abs_map(u)

    def test_dirac_spreads(self, f2):
        u = sp.SphereVector.dirac(f2)
        eta = sp.uniform_ball_weights(f2, 1)
        out = sp.convolve(eta, u)
        vals = sorted(float(v[0]) for v in out.entries.values())
        assert len(vals) == 5 and np.allclose(vals, np.sqrt(1 / 5))

    def test_norm_preserved_exactly(self, f2, rng):
        eta = sp.uniform_ball_weights(f2, 1)
        u = sp.random_vector(f2, rng, 2, 5)
        assert abs(sp.convolve(eta, u).norm() - 1.0) < 1e-12

    def test_lipschitz_and_strict(self, f2, rng):
        eta = sp.uniform_ball_weights(f2, 1)
        for _ in range(20):
            u = sp.random_vector(f2, rng, 1, 3, nonnegative=True)
            v = sp.random_vector(f2, rng, 1, 3, nonnegative=True)
            d0 = sp.chordal_distance(u, v)
            d1 = sp.chordal_distance(sp.convolve(eta, u), sp.convolve(eta, v))
            assert d1 <= d0 + 1e-12
            if d0 > 1e-6:
                assert d0 - d1 > 1e-6

    def test_group_equivariance(self, f2, rng):
        eta = sp.uniform_ball_weights(f2, 1)
        g = f2.from_word("ba")
        u = sp.random_vector(f2, rng, 2, 4)
        assert sp.act(g, sp.convolve(eta, u)) == sp.convolve(eta, sp.act(g, u))

    def test_invalid_weights(self, f2, rng):
        u = sp.random_vector(f2, rng, 1, 2)
        with pytest.raises(ValueError):
            sp.convolve({f2.identity: 0.5}, u)
        with pytest.raises(ValueError):
            sp.convolve({f2.identity: -1.0, f2.generators[0]: 2.0}, u)


class TestGeodesics:
    def test_endpoints_exact(self, f2, rng):
        u = sp.random_vector(f2, rng, 2, 4)
        v = sp.random_vector(f2, rng, 2, 4)
        assert sp.geodesic_point(u, v, 0.0) == u
        assert sp.geodesic_point(u, v, 1.0) == v

    def test_orthogonal_midpoint(self, f2):
        de, da, _ = diracs(f2)
        mid = sp.geodesic_point(de, da, 0.5)
        assert abs(mid.inner(de) - 1 / np.sqrt(2)) < 1e-12

    def test_arc_length_quarter_circle(self, f2):
        de, da, _ = diracs(f2)
        ts = np.linspace(0, 1, 1001)
        pts = [sp.geodesic_point(de, da, float(t)) for t in ts]
        arc = sum(sp.chordal_distance(pts[i], pts[i + 1]) for i in range(len(pts) - 1))
        assert abs(arc - np.pi / 2) < 1e-6

    def test_antipodal_rejected(self, f2):
        de = sp.SphereVector.dirac(f2)
        neg = sp.SphereVector(f2, {f2.identity: np.array([-1.0])}, 1)
        with pytest.raises(ValueError):
            sp.geodesic_point(de, neg, 0.5)


class TestQuotientDistance:
    def test_same_orbit(self, f2, rng):
        u = sp.random_vector(f2, rng, 2, 4)
        g = f2.from_word("ab")
        dist, realizer = sp.quotient_distance(u, sp.act(g, u))
        assert dist < 1e-12
        assert realizer == g

    def test_diracs_one_orbit(self, f2):
        de, da, _ = diracs(f2)
        dist, _ = sp.quotient_distance(de, da)
        assert dist < 1e-15

    def test_bounded_by_chordal(self, f2, rng):
        for _ in range(50):
            u = sp.random_vector(f2, rng, 2, 4)
            v = sp.random_vector(f2, rng, 2, 4)
            q, _ = sp.quotient_distance(u, v)
            assert q <= sp.chordal_distance(u, v) + 1e-12

    def test_mismatch(self, f2, z2, rng):
        with pytest.raises(GroupMismatchError):
            sp.quotient_distance(sp.SphereVector.dirac(f2), sp.SphereVector.dirac(z2))
