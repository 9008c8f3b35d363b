import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from superteich import builders, holonomy as h, superlinalg as sl, surface as sf, teich
from superteich.errors import CrossRatioError, NormalFormError, PunctureTypeError
from superteich.grassmann import GrassmannNumber as G

from conftest import SUITE_TYPES

N = 3
t1, t2, t3 = (G.generator(i, N) for i in (1, 2, 3))
one = G.one(N)


def M(rows):
    return sl.SuperMatrix(rows, N)


def test_turn_factor_example():
    f = h.turn_factor(1, one, G.zero(N))
    assert f.isclose(M([[-1, 0, 0], [0, 1, 0], [1, 0, -1]]), 0.0)
    assert sl.is_osp(f, 1e-12)


def test_turn_factor_matches_explicit_matrix():
    chi = 2.0 + (t2 * t3).scale(0.3)
    for eps in (1, -1):
        rc = chi.sqrt()
        explicit = M([[rc.inverse().scale(-eps), 0, 0], [-t1, 1, 0], [rc.scale(eps), -(t1 * rc).scale(eps), rc.scale(-eps)]])
        f = h.turn_factor(eps, chi, t1)
        assert f.isclose(explicit, 1e-14)
        assert sl.is_osp(f, 1e-12)
    assert h.turn_factor(-1, chi, t1).isclose(
        sl.make_special("Z", -1.0, N) @ h.turn_factor(1, chi, t1), 0.0)


def test_right_turn_factor_is_osp():
    assert sl.is_osp(h.turn_factor(1, G.scalar(1.7, N), t2, h.RIGHT), 1e-12)


def test_path_holonomy_order():
    assert h.path_holonomy([], N).isclose(sl.SuperMatrix.identity(N), 0.0)
    a = h.PathStep(1, G.scalar(2.0, N), t1)
    b = h.PathStep(-1, G.scalar(0.5, N), t2, h.RIGHT)
    c = h.PathStep(1, G.scalar(3.0, N), t3)
    assert h.path_holonomy([a], N).isclose(h.turn_factor(1, G.scalar(2.0, N), t1), 0.0)
    whole = h.path_holonomy([a, b, c], N)
    assert whole.isclose(h.path_holonomy([c], N) @ h.path_holonomy([a, b], N), 1e-14)


def _closed(chis, thetas, eps):
    return h.closed_form([G.scalar(x, N) if not isinstance(x, G) else x for x in chis], thetas, eps)


def test_bosonic_fan():
    cf = _closed([2.0, 0.5], [G.zero(N)] * 2, [1, -1])
    assert cf.star1.is_zero() and cf.star2.is_zero()


def test_two_step_star1():
    chis, eps = [2.0, 0.5], [1, 1]
    cf = _closed(chis, [t1, t2], eps)
    c1 = -eps[0] * math.sqrt(chis[0])
    assert cf.star1.isclose(t1 + t2.scale(1 / c1), 1e-15)
    assert cf.sign0 == 1 and cf.star0.isclose(one, 1e-15)


def test_sign_rule():
    assert _closed([2.0, 0.5], [G.zero(N)] * 2, [1, 1]).sign0 == 1
    assert _closed([2.0, 0.25, 2.0], [G.zero(N)] * 3, [1, 1, 1]).sign0 == -1
    cf = _closed([2.0, 0.25, 2.0], [G.zero(N)] * 3, [1, -1, 1])
    assert cf.sign0 == 1 and cf.star0.isclose(one, 1e-15)


def test_single_step_matches_factor():
    cf = _closed([1.0], [t1], [1])
    assert cf.matrix().isclose(h.turn_factor(1, one, t1), 1e-15)


def test_cross_ratio_product_checked():
    with pytest.raises(CrossRatioError):
        _closed([2.0, 2.0], [G.zero(N)] * 2, [1, 1])


seeds = st.integers(0, 2**32 - 1)


def _random_fan(rng, m, n=N):
    logs = rng.uniform(-1.5, 1.5, size=m)
    logs[-1] = -logs[:-1].sum()
    chi = [G.scalar(math.exp(x), n) for x in logs]
    theta = [sum((G.generator(i, n, rng.uniform(-2, 2)) for i in range(1, n + 1)), G.zero(n)) for _ in range(m)]
    eps = [int(x) for x in rng.choice((-1, 1), size=m)]
    return chi, theta, eps


@given(seeds, st.integers(1, 8))
def test_closed_form_matches_product(seed, m):
    rng = np.random.default_rng(seed)
    chi, theta, eps = _random_fan(rng, m)
    cf = h.closed_form(chi, theta, eps)
    prod = h.path_holonomy([h.PathStep(e, x, th) for e, x, th in zip(eps, chi, theta)], N)
    assert prod.isclose(cf.matrix(), 1e-9)
    assert (cf.star2 - cf.star0 * cf.star1).max_abs() < 1e-12
    assert cf.star0.isclose(G.scalar((-1) ** m * math.prod(eps), N), 1e-12)


def test_naive_star3_disagrees():
    rng = np.random.default_rng(2)
    chi, theta, eps = _random_fan(rng, 4)
    cf = h.closed_form(chi, theta, eps)
    prod = h.path_holonomy([h.PathStep(e, x, th) for e, x, th in zip(eps, chi, theta)], N)
    assert (prod[2, 0] + cf.star3).max_abs() < 1e-12
    assert (prod[2, 0] + h.star3_naive(chi, theta, eps)).max_abs() > 1e-3
    # with at most one odd parameter the quadratic term is absent and both agree
    lone = [theta[0]] + [G.zero(N)] * 3
    assert h.star3_naive(chi, lone, eps).isclose(h.closed_form(chi, lone, eps).star3, 1e-12)


def _sphere_with(ramond_count):
    t = builders.thrice_punctured_sphere()
    rng = np.random.default_rng(0)
    c = builders.random_coords(t, rng)
    for o in itertools.product((1, -1), repeat=3):
        types = [h.classify(r) for r in h.all_monodromies(t, c, o)]
        if types.count(h.PunctureType.RAMOND) == ramond_count:
            return t, o, c
    return None


def test_ramond_count_is_even_on_sphere():
    assert _sphere_with(3) is None and _sphere_with(1) is None
    assert _sphere_with(2) is not None and _sphere_with(0) is not None


def test_classification_examples():
    t, o, c = _sphere_with(2)
    reps = h.all_monodromies(t, c, o)
    for r in reps:
        assert r.fan_length == 2
        kind = h.classify(r)
        assert (kind is h.PunctureType.RAMOND) == (r.sign0 == 1) == (r.star0.body > 0)
        trace = float(np.trace(sl.project_sl2(r.matrix)))
        assert abs(trace - (2.0 if kind is h.PunctureType.RAMOND else -2.0)) < 1e-9


def test_ramond_constraint_examples():
    chi = [G.scalar(2.0, N), G.scalar(0.5, N)]
    fd = teich.FanData(0, tuple(chi), (t1, t2), (1, 1), (0, 1))
    assert h.ramond_constraint(fd).isclose(t1 - t2.scale(1 / math.sqrt(2.0)), 1e-15)
    zero = teich.FanData(0, tuple(chi), (G.zero(N), G.zero(N)), (1, 1), (0, 1))
    assert h.ramond_constraint(zero).is_zero()
    ns = teich.FanData(0, tuple(chi), (t1, t2), (1, -1), (0, 1))
    with pytest.raises(PunctureTypeError):
        h.ramond_constraint(ns)


def test_impose_without_ramond():
    t, o, c = _sphere_with(0)
    rep = h.impose_constraints(t, c, o)
    assert rep.rank == 0 and rep.n_ramond == 0
    assert rep.coords.isclose(c, 0.0, up_to_sign=False)
    assert rep.free_odd == 2


def test_impose_on_sphere_with_two_ramond():
    t, o, c = _sphere_with(2)
    rep = h.impose_constraints(t, c, o)
    assert rep.rank == 2 and rep.free_odd == 0 == rep.expected_free_odd
    assert all(x.is_zero() for x in rep.coords.mu)


def test_single_ramond_substitution():
    rng = np.random.default_rng(7)
    for _ in range(50):
        ds = builders.random_surface(1, 2, rng=rng, flips=4)
        t, o, c = ds.triangulation, ds.orientation, ds.coords
        rep = h.impose_constraints(t, c, o)
        if rep.n_ramond != 2:
            continue
        for p in rep.ramond_punctures:
            fd = teich.fan_data(t, rep.coords, sf.puncture_fan(t, p), o)
            assert h.ramond_constraint(fd).max_abs() < 1e-9
        # every pivot is an explicit combination of the free mu-invariants
        for piv, combo in rep.substitutions.items():
            expected = sum((c.mu[j] * w for j, w in combo.items()), G.zero(c.n))
            assert rep.coords.mu[piv].isclose(expected, 1e-9)
            assert piv not in combo
        assert rep.free_odd == t.num_triangles - 2
        return
    pytest.fail("no surface with Ramond punctures sampled")


def test_conjugation_examples():
    B = 2.0 + t2 * t3
    ns = M([[-1, 0, 0], [t1, 1, 0], [B, t1, -1]])
    assert sl.is_osp(ns, 1e-12)
    U = h.conjugate_to_standard(ns)
    assert (U @ ns @ sl.inverse(U)).isclose(M([[-1, 0, 0], [0, 1, 0], [B, 0, -1]]), 1e-15)
    sign_flipped_ns = M([[-1, 0, 0], [t1, 1, 0], [B, -t1, -1]])
    assert not sl.is_osp(sign_flipped_ns, 1e-6)
    with pytest.raises(NormalFormError):
        h.conjugate_to_standard(sign_flipped_ns)
    assert h.conjugate_to_standard(M([[1, 0, 0], [0, 1, 0], [B, 0, 1]])).isclose(sl.SuperMatrix.identity(N), 0.0)
    with pytest.raises(NormalFormError):
        h.conjugate_to_standard(M([[1, 0, 0], [t1, 1, 0], [B, -t1, 1]]))
    with pytest.raises(NormalFormError):
        h.conjugate_to_standard(M([[1, t1, 0], [0, 1, 0], [B, 0, 1]]))


@given(seeds, st.sampled_from(SUITE_TYPES))
def test_fan_rotation_conjugates(seed, gs):
    rng = np.random.default_rng(seed)
    ds = builders.random_surface(*gs, rng=rng, flips=4)
    t, o, c = ds.triangulation, ds.orientation, ds.coords
    for p in range(t.num_punctures):
        fan = sf.puncture_fan(t, p)
        base = h.puncture_monodromy(t, c, o, p, fan=fan)
        for k in range(1, len(fan)):
            r = h.puncture_monodromy(t, c, o, p, fan=fan.rotated(k))
            assert h.classify(r) == h.classify(base)
            assert r.star0.isclose(base.star0, 1e-12)
            # the rotated start rescales s1 by an even unit, so vanishing is preserved
            if base.star1.max_abs() < 1e-12:
                assert r.star1.max_abs() < 1e-9


@given(seeds, st.sampled_from(SUITE_TYPES))
def test_vertex_reversal_gauge(seed, gs):
    rng = np.random.default_rng(seed)
    ds = builders.random_surface(*gs, rng=rng, flips=4)
    t, o, c = ds.triangulation, ds.orientation, ds.coords
    v = int(rng.integers(t.num_triangles))
    o2 = sf.vertex_reversal(t, o, v)
    c2 = c.with_mu([-x if k == v else x for k, x in enumerate(c.mu)])
    Z = sl.make_special("Z", -1.0, c.n)
    for r1, r2 in zip(h.all_monodromies(t, c, o), h.all_monodromies(t, c2, o2)):
        assert h.classify(r1) == h.classify(r2)
        sc = max(1.0, r1.matrix.max_abs())
        assert r1.matrix.isclose(r2.matrix, 1e-9 * sc) or r1.matrix.isclose(Z @ r2.matrix @ Z, 1e-9 * sc)


def _aligned_monodromy(t, c, o, p, start):
    fan = sf.puncture_fan(t, p)
    idx = [k for k, v in enumerate(fan.corners) if (v.triangle, v.corner) == start]
    return h.puncture_monodromy(t, c, o, p, fan=fan.rotated(idx[0])) if idx else None


@given(seeds, st.sampled_from([(0, 4), (1, 2), (2, 1)]))
def test_decorated_flip_preserves_monodromy(seed, gs):
    rng = np.random.default_rng(seed)
    ds = builders.random_surface(*gs, rng=rng, flips=3)
    t, o, c = ds.triangulation, ds.orientation, ds.coords
    edges = sf.generic_edges(t, o)
    if not edges:
        return
    e = int(rng.choice(edges))
    nt, no, nc, log = teich.flip_decorated(t, o, c, e)
    quad = {log.record.lower_tri, log.record.upper_tri}
    Z = sl.make_special("Z", -1.0, c.n)
    for p in range(t.num_punctures):
        starts = [(v.triangle, v.corner) for v in sf.puncture_fan(t, p).corners if v.triangle not in quad]
        if not starts:
            continue
        r1 = _aligned_monodromy(t, c, o, p, starts[0])
        r2 = _aligned_monodromy(nt, nc, no, p, starts[0])
        sc = max(1.0, r1.matrix.max_abs())
        assert r1.matrix.isclose(r2.matrix, 1e-8 * sc) or r1.matrix.isclose(Z @ r2.matrix @ Z, 1e-8 * sc)
    for r1, r2 in zip(h.all_monodromies(t, c, o), h.all_monodromies(nt, nc, no)):
        assert h.classify(r1) == h.classify(r2)


def test_report_flags_agreement(suite):
    for ds in suite[::25]:
        for r in h.all_monodromies(ds.triangulation, ds.coords, ds.orientation):
            assert r.agrees and r.closed_form_error < 1e-9
            assert r.matrix.is_lower_triangular(1e-12)
