"""Acceptance gate: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` (lines are printed even
without ``-s``).
"""

import time

import numpy as np
import pytest

from superteich import builders, holonomy, surface as sf, superlinalg as sl, teich
from superteich.grassmann import GrassmannNumber as G

from conftest import SUITE_TYPES, make_suite


def report(capsys, number: int, ok: bool, detail: str) -> None:
    with capsys.disabled():
        print(f"\n[acceptance {number}] {'PASS' if ok else 'FAIL'}: {detail}")


@pytest.fixture(scope="module")
def timed_suite():
    start = time.perf_counter()
    suite = make_suite()
    reports = []
    for ds in suite:
        reports.append(holonomy.all_monodromies(ds.triangulation, ds.coords, ds.orientation))
    return suite, reports, time.perf_counter() - start


def _closed_form_gap(r: holonomy.MonodromyReport) -> float:
    cf = holonomy.ClosedForm(r.star0, r.star1, r.star2, r.star3, r.sign0).matrix()
    return (r.matrix - cf).max_abs()


def test_1_closed_form_matches_product(timed_suite, capsys):
    suite, reports, elapsed = timed_suite
    types = {(ds.triangulation.genus, ds.triangulation.num_punctures) for ds in suite}
    worst = max(_closed_form_gap(r) for reps in reports for r in reps)
    n_punct = sum(len(reps) for reps in reports)
    ok = len(suite) >= 200 and types == set(SUITE_TYPES) and worst <= 1e-9 and elapsed < 30.0
    report(capsys, 1, ok, f"{len(suite)} surfaces, {n_punct} punctures, max gap {worst:.2e} (<1e-9), {elapsed:.1f}s (<30s)")
    assert ok


def _upper_and_diag(m: sl.SuperMatrix) -> float:
    upper = max(m[i, j].max_abs() for i, j in ((0, 1), (0, 2), (1, 2)))
    one = G.one(m.n)
    diag = max((m[1, 1] - one).max_abs(), (m[0, 0] - m[2, 2]).max_abs(), abs(abs(m[0, 0].body) - 1.0),
               m[0, 0].soul.max_abs())
    return max(upper, diag)


def test_2_normal_form(timed_suite, capsys):
    _, reports, _ = timed_suite
    shape = osp = det = star = 0.0
    for reps in reports:
        for r in reps:
            shape = max(shape, _upper_and_diag(r.matrix))
            osp = max(osp, sl.is_osp(r.matrix).residual)
            det = max(det, (sl.sdet(r.matrix) - 1.0).max_abs())
            star = max(star, (r.star2 - r.star0 * r.star1).max_abs())
    ok = shape < 1e-12 and osp < 1e-12 and det < 1e-9 and star < 1e-12
    report(capsys, 2, ok, f"shape {shape:.1e}, osp residual {osp:.1e} (<1e-12), sdet {det:.1e} (<1e-9), s2-s0*s1 {star:.1e} (<1e-12)")
    assert ok


def test_3_cross_ratio_product(timed_suite, capsys):
    _, reports, _ = timed_suite
    worst = max(r.chi_residual for reps in reports for r in reps)
    ok = worst < 1e-12
    report(capsys, 3, ok, f"max |prod chi - 1| = {worst:.2e} (<1e-12)")
    assert ok


@pytest.fixture(scope="module")
def constrained(timed_suite):
    suite, _, _ = timed_suite
    out = []
    for ds in suite:
        rep = holonomy.impose_constraints(ds.triangulation, ds.coords, ds.orientation)
        out.append(rep)
    return out


def test_4_ramond_constraint(timed_suite, constrained, capsys):
    suite, _, _ = timed_suite
    worst = 0.0
    conj_fail = rank_fail = 0
    for ds, rep in zip(suite, constrained):
        if rep.rank != rep.n_ramond:
            rank_fail += 1
        for r in holonomy.all_monodromies(ds.triangulation, rep.coords, ds.orientation):
            if r.puncture_type is holonomy.PunctureType.RAMOND:
                worst = max(worst, r.star1.max_abs())
            try:
                U = holonomy.conjugate_to_standard(r.matrix)
                if not holonomy.is_standard_form(U @ r.matrix @ sl.inverse(U), 1e-9):
                    conj_fail += 1
            except Exception:
                conj_fail += 1
    ok = worst < 1e-9 and conj_fail == 0 and rank_fail == 0
    report(capsys, 4, ok, f"max Ramond |s1| {worst:.1e} (<1e-9), conjugation failures {conj_fail}, rank failures {rank_fail}/{len(suite)}")
    assert ok


def test_5_dimension_count(timed_suite, constrained, capsys):
    suite, _, _ = timed_suite
    bad = 0
    for ds, rep in zip(suite, constrained):
        g, s = ds.triangulation.genus, ds.triangulation.num_punctures
        lhs = 4 * g - 4 + 2 * rep.n_ns + rep.n_ramond
        if not (rep.free_odd == lhs == (4 * g - 4 + 2 * s) - rep.n_ramond):
            bad += 1
    ok = bad == 0
    report(capsys, 5, ok, f"free odd count = 4g-4+2n_NS+n_R = (4g-4+2s)-n_R on {len(suite) - bad}/{len(suite)} surfaces")
    assert ok


def test_6_parity_agreement(timed_suite, capsys):
    _, reports, _ = timed_suite
    disagreements = 0
    total = 0
    for reps in reports:
        for r in reps:
            total += 1
            try:
                holonomy.classify(r, tol=1e-9)
            except Exception:
                disagreements += 1
    ok = disagreements == 0
    report(capsys, 6, ok, f"s0 sign, projected trace and fan parity agree on {total - disagreements}/{total} punctures")
    assert ok


def _random_even(rng, n):
    return G.scalar(rng.uniform(0.1, 10.0), n) + G.generator(1, n, rng.uniform(-1, 1)) * G.generator(2, n, rng.uniform(-1, 1))


def _random_odd(rng, n):
    total = G.zero(n)
    for i in range(1, n + 1):
        total = total + G.generator(i, n, rng.uniform(-2, 2))
    return total


def test_7_ptolemy_involution(capsys):
    rng = np.random.default_rng(7)
    n = 4
    worst = bosonic = 0.0
    count = 500
    for _ in range(count):
        a, b, c, d, e = (_random_even(rng, n) for _ in range(5))
        q = teich.QuadData(a, b, c, d, e, _random_odd(rng, n), _random_odd(rng, n))
        back = teich.double_flip(q)
        worst = max(worst, (back.e - q.e).max_abs(), (back.sigma - q.sigma).max_abs(), (back.theta - q.theta).max_abs())
        q0 = teich.QuadData(a, b, c, d, e, G.zero(n), G.zero(n))
        f = teich.ptolemy_flip(q0).f
        bosonic = max(bosonic, (e * f - (a * c + b * d)).max_abs())
    ok = worst < 1e-9 and bosonic < 1e-12
    report(capsys, 7, ok, f"{count} quads, double-flip residual {worst:.1e} (<1e-9), bosonic ef-(ac+bd) {bosonic:.1e} (<1e-12)")
    assert ok


def _sparse(rng, n, parity=None, terms=6, body=None):
    pool = [m for m in range(1, 1 << n) if parity is None or (bin(m).count("1") % 2 == 0) == (parity == "even")]
    masks = set(int(m) for m in rng.choice(pool, size=min(terms, len(pool)), replace=False)) if pool else set()
    masks = sorted(masks)
    coeffs = list(rng.uniform(-10, 10, size=len(masks)))
    if body is not None:
        masks = [0] + masks
        coeffs = [body] + coeffs
    return G.from_masks(n, masks, coeffs)


def test_8_algebra_kernel(capsys):
    rng = np.random.default_rng(8)
    values = 0
    worst = 0.0
    while values < 10_000:
        n = int(rng.integers(1, 13))
        px, py = rng.choice(["even", "odd"], size=2)
        x = _sparse(rng, n, px, terms=5)
        y = _sparse(rng, n, py, terms=5)
        z = _sparse(rng, n, None, terms=5, body=rng.uniform(-10, 10))
        worst = max(worst, ((x * y) * z - x * (y * z)).max_abs())
        sign = -1.0 if (px == "odd" and py == "odd") else 1.0
        worst = max(worst, (x * y - (y * x).scale(sign)).max_abs())
        soul = z.soul
        power = G.one(n)
        for _ in range(n + 1):
            power = power * soul
        worst = max(worst, power.max_abs())
        bx = float(rng.choice([-1, 1]) * rng.uniform(1.0, 10.0))
        w = _sparse(rng, n, "even", terms=4).scale(0.1) + abs(bx)
        inv_in = w.soul + bx
        worst = max(worst, (inv_in * inv_in.inverse() - 1.0).max_abs())
        r = w.sqrt()
        worst = max(worst, (r * r - w).max_abs())
        values += 4
    # the NS conjugation and the turn factor reproduced symbolically
    n = 3
    th = G.generator(1, n, 1.7)
    B = G.scalar(2.5, n) + G.generator(2, n) * G.generator(3, n)
    g = sl.SuperMatrix([[-1, 0, 0], [th, 1, 0], [B, th, -1]], n)
    U = holonomy.conjugate_to_standard(g)
    expected_U = sl.SuperMatrix([[1, 0, 0], [th.scale(0.5), 1, 0], [0, th.scale(-0.5), 1]], n)
    target = sl.SuperMatrix([[-1, 0, 0], [0, 1, 0], [B, 0, -1]], n)
    ns_gap = max((U - expected_U).max_abs(), (U @ g @ sl.inverse(U) - target).max_abs())
    chi = G.scalar(1.9, n) + G.generator(2, n) * G.generator(3, n).scale(0.4)
    theta = G.generator(1, n, -0.8) + G.generator(3, n, 0.3)
    factor_gap = 0.0
    for eps in (1, -1):
        rc = chi.sqrt()
        explicit = sl.SuperMatrix(
            [[rc.inverse().scale(-eps), 0, 0], [-theta, 1, 0], [rc.scale(eps), -(theta * rc).scale(eps), rc.scale(-eps)]], n
        )
        factor_gap = max(factor_gap, (holonomy.turn_factor(eps, chi, theta) - explicit).max_abs())
    ok = worst < 1e-9 and ns_gap < 1e-12 and factor_gap < 1e-12
    report(capsys, 8, ok, f"{values} values, worst identity residual {worst:.1e} (<1e-9), NS conjugation {ns_gap:.1e}, turn factor {factor_gap:.1e} (<1e-12)")
    assert ok


def _types(t, o, coords):
    return [holonomy.classify(r) for r in holonomy.all_monodromies(t, coords, o)]


def test_9_classification_invariance(capsys):
    rng = np.random.default_rng(9)
    suite = make_suite(seed=99, per_type=8)
    changes = checks = 0
    for ds in suite:
        t, o, c = ds.triangulation, ds.orientation, ds.coords
        base = _types(t, o, c)
        for v in range(t.num_triangles):
            checks += 1
            mu = [-x if k == v else x for k, x in enumerate(c.mu)]
            changes += _types(t, sf.vertex_reversal(t, o, v), c.with_mu(mu)) != base
        for p in range(t.num_punctures):
            fan = sf.puncture_fan(t, p)
            for k in range(len(fan)):
                checks += 1
                r = holonomy.puncture_monodromy(t, c, o, p, fan=fan.rotated(k))
                changes += holonomy.classify(r) != base[p]
        cur_t, cur_o = t, o
        for _ in range(20):
            edges = sf.generic_edges(cur_t, cur_o)
            if not edges:
                break
            cur_t, cur_o, _ = sf.flip(cur_t, cur_o, int(rng.choice(edges)))
            checks += 1
            changes += _types(cur_t, cur_o, builders.random_coords(cur_t, rng)) != base
    ok = changes == 0
    report(capsys, 9, ok, f"{checks} reversal/rotation/flip checks over {len(suite)} surfaces, {changes} type changes")
    assert ok
