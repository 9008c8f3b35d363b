import numpy as np
import pytest
from hypothesis import given, strategies as st

from superteich import superlinalg as sl
from superteich.errors import NonInvertibleError, ParityError
from superteich.grassmann import GrassmannNumber as G

N = 3
th = G.generator(1, N)
I = sl.SuperMatrix.identity(N)
J = sl.make_special("J", n=N)


def M(rows):
    return sl.SuperMatrix(rows, N)


def test_matmul_examples():
    P = sl.make_special("P_plus", th)
    assert (I @ P).isclose(P, 0.0)
    assert (P @ sl.make_special("P_minus", th)).isclose(I, 0.0)
    assert (J @ J).isclose(M([[-1, 0, 0], [0, 1, 0], [0, 0, -1]]), 0.0)


def test_supertranspose_examples():
    assert sl.supertranspose(I).isclose(I, 0.0)
    assert sl.supertranspose(J).isclose(M([[0, 0, -1], [0, 1, 0], [1, 0, 0]]), 0.0)
    P = sl.make_special("P_plus", th)
    assert sl.supertranspose(P).isclose(M([[-1, -th, -1], [-th, 1, 0], [1, 0, 0]]), 0.0)


def test_sdet_and_supertrace_examples():
    assert sl.sdet(J).isclose(G.one(N), 0.0)
    assert sl.sdet(I).isclose(G.one(N), 0.0)
    assert sl.sdet(sl.make_special("D", 2.0, N)).isclose(G.one(N), 1e-15)
    assert sl.supertrace(I).body == 1.0
    assert sl.supertrace(J).body == -1.0
    assert sl.supertrace(sl.make_special("Z", -1.0, N)).body == -3.0


def test_is_osp_examples():
    assert sl.is_osp(J)
    assert sl.is_osp(sl.make_special("P_plus", th))
    bad = sl.is_osp(M([[2, 0, 0], [0, 1, 0], [0, 0, 1]]))
    assert not bad and bad.residual > 0.5
    assert not sl.is_osp(M([[1, th, 0], [0, 1, 0], [0, 0, 1]]).__class__([[th, 0, 0], [0, 1, 0], [0, 0, 1]], N))


def test_project_examples():
    np.testing.assert_array_equal(sl.project_sl2(I), np.eye(2))
    np.testing.assert_array_equal(sl.project_sl2(sl.make_special("Z", -1.0, N)), -np.eye(2))
    np.testing.assert_array_equal(sl.project_sl2(sl.make_special("P_plus", G.zero(N))), [[-1, 1], [-1, 0]])


def test_make_special_examples():
    assert sl.make_special("Z", 1.0, N).isclose(I, 0.0)
    assert sl.make_special("Upsilon", 1.0, N).isclose(J, 0.0)
    assert sl.make_special("P_plus", G.zero(N)).isclose(M([[-1, 0, 1], [0, 1, 0], [-1, 0, 0]]), 0.0)
    with pytest.raises(ParityError):
        sl.make_special("P_plus", 1.0, N)
    with pytest.raises(ParityError):
        sl.make_special("D", -2.0, N)
    with pytest.raises(ValueError):
        sl.make_special("Q", 1.0, N)


def test_action_examples():
    p = sl.SuperPoint.make(1j, th, N)
    assert sl.superconformal_action(I, p).distance(p) == 0.0
    b = 2.5
    q = sl.superconformal_action(M([[1, 0, b], [0, 1, 0], [0, 0, 1]]), p)
    assert q.distance(sl.SuperPoint.make(1j + b, th, N)) < 1e-15
    B = 0.7
    r = sl.superconformal_action(M([[1, 0, 0], [0, 1, 0], [B, 0, 1]]), sl.SuperPoint.make(1j, 0.0, N))
    assert abs(r.z.body - 1j / (B * 1j + 1)) < 1e-15
    assert r.eta.max_abs() == 0.0


def test_singular_inverse():
    with pytest.raises(NonInvertibleError):
        sl.inverse(M([[0, 0, 0], [0, 1, 0], [0, 0, 1]]))


def random_osp(rng, n=N):
    """Random group element as a word in the named generators."""
    g = sl.SuperMatrix.identity(n)
    for _ in range(4):
        odd = G.zero(n)
        for i in range(1, n + 1):
            odd = odd + G.generator(i, n, rng.uniform(-1, 1))
        even = rng.uniform(0.3, 3.0) + G.generator(1, n) * G.generator(2, n).scale(rng.uniform(-1, 1))
        kind = rng.choice(["P_plus", "P_minus", "Upsilon", "D", "Z"])
        if kind == "Z":
            # Z_a lies in the group only for a = -1 (and trivially a = 1)
            g = g @ sl.make_special("Z", -1.0, n)
        else:
            g = g @ sl.make_special(kind, odd if kind.startswith("P") else even, n)
    return g


seeds = st.integers(0, 2**32 - 1)


@given(seeds)
def test_group_words_are_osp(seed):
    g = random_osp(np.random.default_rng(seed))
    assert sl.is_osp(g, 1e-9)
    assert sl.sdet(g).isclose(G.one(N), 1e-9)


@given(seeds)
def test_supertranspose_reverses_products(seed):
    rng = np.random.default_rng(seed)
    g, h = random_osp(rng), random_osp(rng)
    lhs = sl.supertranspose(g @ h)
    assert lhs.isclose(sl.supertranspose(h) @ sl.supertranspose(g), 1e-8 * max(1.0, lhs.max_abs()))


@given(seeds)
def test_inverse_and_projection(seed):
    rng = np.random.default_rng(seed)
    g, h = random_osp(rng), random_osp(rng)
    assert (g @ sl.inverse(g)).isclose(I, 1e-8 * max(1.0, g.max_abs() ** 2))
    np.testing.assert_allclose(sl.project_sl2(g @ h), sl.project_sl2(g) @ sl.project_sl2(h), atol=1e-8 * max(1.0, (g @ h).max_abs()))
    assert abs(np.linalg.det(sl.project_sl2(g)) - 1.0) < 1e-8 * max(1.0, g.max_abs() ** 2)


def test_z_scaling_is_not_orthosymplectic():
    assert not sl.is_osp(sl.make_special("Z", 2.0, N))
    assert sl.is_osp(sl.make_special("Z", -1.0, N))


def _bodies(g):
    return sl.SuperMatrix([[e.body for e in row] for row in g.entries], N)


@given(seeds)
def test_action_composes_on_bodies(seed):
    rng = np.random.default_rng(seed)
    g, h = _bodies(random_osp(rng)), _bodies(random_osp(rng))
    p = sl.SuperPoint.make(complex(rng.uniform(-1, 1), rng.uniform(0.5, 2)), G.generator(3, N, 0.4), N)
    try:
        lhs = sl.superconformal_action(g @ h, p)
        rhs = sl.superconformal_action(g, sl.superconformal_action(h, p))
    except NonInvertibleError:
        return
    scale = max(1.0, lhs.z.max_abs(), rhs.z.max_abs())
    assert lhs.distance(rhs) < 1e-9 * scale


def test_action_with_odd_entries_is_not_multiplicative():
    # pinned defect of the fractional-linear formula in this matrix layout
    P = sl.make_special("P_plus", G.generator(1, N, 0.5))
    Q = sl.make_special("P_plus", G.generator(2, N, 0.7))
    p = sl.SuperPoint.make(0.3 + 1.2j, G.generator(3, N, 0.4), N)
    gap = sl.superconformal_action(P @ Q, p).distance(sl.superconformal_action(P, sl.superconformal_action(Q, p)))
    assert gap > 0.1


def test_string_round_trip():
    g = random_osp(np.random.default_rng(0))
    assert sl.SuperMatrix.from_strings(g.to_strings(), N).isclose(g, 0.0)


def test_naive_berezinian_differs_off_the_triangle():
    g = random_osp(np.random.default_rng(256))
    assert sl.sdet(g).isclose(G.one(N), 1e-12)
    assert not sl.sdet_naive(g).isclose(G.one(N), 1e-3)
    low = sl.make_special("P_plus", th) @ sl.make_special("Upsilon", 2.0, N)
    assert sl.sdet_naive(low).isclose(sl.sdet(low), 1e-12)
