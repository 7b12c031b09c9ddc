import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from tflab import field as F
from tflab import mixed_norm as MN
from tflab import stft as S
from tflab.errors import ExponentError, ShapeError, UsageError

INF = math.inf
exps = st.sampled_from([1.0, 1.5, 2.0, 3.0, INF])
vectors = arrays(np.float64, st.integers(1, 30), elements=st.floats(-1e3, 1e3))


@pytest.fixture(scope="module")
def tf():
    grid = F.make_grid(1, 16.0, 256)
    f = F.normalize(F.synthesize(grid, center=0.5, modulation=1.0))
    g = S.make_window(grid, "gaussian", normalized=True)
    return S.stft(f, g, S.default_lattice(grid))


@pytest.mark.parametrize("raw, expected", [
    ("inf", INF), ("Infinity", INF), (2, 2.0), ("1.5", 1.5), (INF, INF),
])
def test_parse_exponent(raw, expected):
    assert MN.parse_exponent(raw) == expected


@pytest.mark.parametrize("raw", [0.5, -1, "nan", 0])
def test_parse_exponent_rejects(raw):
    with pytest.raises(ExponentError):
        MN.parse_exponent(raw)


@pytest.mark.parametrize("p, pc", [(1, INF), (INF, 1), (2, 2), (4, 4 / 3)])
def test_conjugate(p, pc):
    assert MN.conjugate(p) == pytest.approx(pc)


def test_seq_norm_examples():
    assert MN.seq_norm([3, 4], 2) == 5.0
    assert MN.seq_norm([3, -4], 1) == 7.0
    assert MN.seq_norm([3, -4], INF) == 4.0
    assert MN.seq_norm([], 2) == 0.0


def test_mixed_matrix_norm_examples():
    m = np.array([[3.0, 4.0], [0.0, 0.0]])
    assert MN.mixed_matrix_norm(m, 1, 2, 1) == pytest.approx(5.0)
    assert MN.mixed_matrix_norm(m, 0, INF, 2) == pytest.approx(5.0)
    assert MN.mixed_matrix_norm(np.eye(2), 1, 1, INF) == pytest.approx(1.0)
    assert MN.mixed_matrix_norm(np.eye(2), 1, INF, 1) == pytest.approx(2.0)


def test_mixed_matrix_norm_weights():
    m = np.ones((2, 3))
    assert MN.mixed_matrix_norm(m, 1, 1, 1, 0.5, 2.0) == pytest.approx(6.0)
    with pytest.raises(ShapeError):
        MN.mixed_matrix_norm(m, 1, 1, 1, np.ones(2))
    with pytest.raises(ShapeError):
        MN.mixed_matrix_norm(np.ones(3), 1, 1, 1)


def test_stable_for_tiny_values():
    assert MN.seq_norm([1e-200, 1e-200], 2) == pytest.approx(math.sqrt(2) * 1e-200)
    assert MN.seq_norm([1e200, 1e200], 3) == pytest.approx(2 ** (1 / 3) * 1e200)


@settings(max_examples=50, deadline=None)
@given(v=vectors, p=exps, q=exps)
def test_lp_monotone(v, p, q):
    assume(p <= q)
    assert MN.seq_norm(v, q) <= MN.seq_norm(v, p) * (1 + 1e-12) + 1e-300


@settings(max_examples=50, deadline=None)
@given(v=vectors, p=exps, a=st.floats(-1e3, 1e3))
def test_homogeneous(v, p, a):
    assert MN.seq_norm(a * v, p) == pytest.approx(abs(a) * MN.seq_norm(v, p), rel=1e-12, abs=1e-300)


@settings(max_examples=50, deadline=None)
@given(v=vectors, p=exps, data=st.data())
def test_triangle(v, p, data):
    w = data.draw(arrays(np.float64, v.shape, elements=st.floats(-1e3, 1e3)))
    assert MN.seq_norm(v + w, p) <= (MN.seq_norm(v, p) + MN.seq_norm(w, p)) * (1 + 1e-12) + 1e-300


@settings(max_examples=30, deadline=None)
@given(m=arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 6)), elements=st.floats(0, 100)),
       p=exps, q=exps)
def test_minkowski_swap(m, p, q):
    # for p <= q: || ||.||_q (inner) ||_p >= || ||.||_p (inner) ||_q
    assume(p <= q)
    a = MN.mixed_matrix_norm(m, 1, q, p)
    b = MN.mixed_matrix_norm(m, 0, p, q)
    assert b <= a * (1 + 1e-12) + 1e-300


def test_moyal_constant(tf):
    val = MN.tf_norm(tf, MN.NormSpec.make(2, 2))
    assert val == pytest.approx(math.sqrt(2 * math.pi), rel=1e-4)


@pytest.mark.parametrize("p", [1.0, 2.0, INF])
def test_flavors_coincide(tf, p):
    a = MN.tf_norm(tf, MN.NormSpec.make(p, p, 0.7, flavor="modulation"))
    b = MN.tf_norm(tf, MN.NormSpec.make(p, p, 0.7, flavor="amalgam"))
    assert abs(a - b) <= 1e-12 * a


@pytest.mark.parametrize("p, q", [(1, 2), (1, INF), (2, INF), (1.5, 3)])
def test_flavor_order(tf, p, q):
    # Minkowski: M_{p,q} <= W_{p,q} when p <= q
    m = MN.tf_norm(tf, MN.NormSpec.make(p, q, flavor="modulation"))
    w = MN.tf_norm(tf, MN.NormSpec.make(p, q, flavor="amalgam"))
    assert m <= w * (1 + 1e-12)


def test_weight_monotone(tf):
    vals = [MN.tf_norm(tf, MN.NormSpec.make(1, 2, s)) for s in (-1.0, 0.0, 0.5, 1.0, 2.0)]
    assert all(a < b for a, b in zip(vals, vals[1:]))


def test_flavor_mismatch():
    grid = F.make_grid(1, 16.0, 256)
    f = F.synthesize(grid)
    g = S.make_window(grid, "gaussian")
    with pytest.raises(UsageError):
        MN.modulation_norm(f, g, MN.NormSpec.make(1, 2, flavor="amalgam"))
    with pytest.raises(UsageError):
        MN.amalgam_norm(f, g, MN.NormSpec.make(1, 2))
    with pytest.raises(UsageError):
        MN.NormSpec.make(1, 2, flavor="besov")


def test_two_weight():
    grid = F.make_grid(1, 16.0, 256)
    f = F.synthesize(grid, center=2.0)
    g = S.make_window(grid, "gaussian")
    base = MN.two_weight_modulation_norm(f, g, 2, 2, 0.0, 0.0)
    heavy = MN.two_weight_modulation_norm(f, g, 2, 2, 1.0, 0.0)
    assert heavy > base
    assert base == pytest.approx(MN.modulation_norm(f, g, MN.NormSpec.make(2, 2)))


@pytest.mark.parametrize("t", [-1.0, 1.0])
def test_lifting_ratio_positive(t):
    grid = F.make_grid(1, 16.0, 256)
    g = S.make_window(grid, "gaussian")
    fam = [F.synthesize(grid, modulation=m) for m in (0.0, 3.0)]
    lo, hi, c = MN.lifting_interval(fam, g, t, 1, 2, 0.5)
    assert 0 < lo <= hi and c >= 1


def test_lifting_zero_order_is_identity():
    grid = F.make_grid(1, 16.0, 256)
    g = S.make_window(grid, "gaussian")
    f = F.synthesize(grid, modulation=2.0)
    assert MN.lifting_ratio(f, g, 0.0, 1, 2, 0.5) == pytest.approx(1.0, rel=1e-12)
