import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tflab import field as F
from tflab import stft as S
from tflab.errors import ConfigurationError, ResolutionError, UsageError


@pytest.fixture(scope="module")
def grid():
    return F.make_grid(1, 16.0, 256)


@pytest.fixture(scope="module")
def sgrid():
    return S.shear_grid(1, 1024)


def _battery(grid):
    return [
        F.synthesize(grid),
        F.synthesize(grid, center=0.5, modulation=1.0),
        F.synthesize(grid, center=-1.5, width=0.7, modulation=-2.0),
        F.synthesize(grid, center=1.0, width=1.6),
    ]


def test_gaussian_stft_closed_form(grid):
    f = F.synthesize(grid)
    g = S.make_window(grid, "gaussian")
    tf = S.stft(f, g, S.default_lattice(grid), keep_phase=True)
    lat = tf.lattice
    i0 = int(np.flatnonzero(lat.x_indices == 0)[0])
    i1 = int(np.flatnonzero(lat.x_indices == 8)[0])
    j0 = int(np.flatnonzero(lat.xi_indices == 0)[0])
    assert tf.magnitudes[i0, j0] == pytest.approx(math.sqrt(math.pi), rel=1e-12)
    assert tf.magnitudes[i1, j0] == pytest.approx(math.sqrt(math.pi) * math.exp(-0.25), rel=1e-12)
    # |V| = sqrt(pi) exp(-(x^2 + xi^2)/4) on the whole lattice
    x, xi = np.meshgrid(lat.x_values, lat.xi_values, indexing="ij")
    ref = math.sqrt(math.pi) * np.exp(-(x**2 + xi**2) / 4)
    assert np.max(np.abs(tf.magnitudes - ref)) < 1e-12


@settings(max_examples=20, deadline=None)
@given(xi=st.integers(-127, 128), xi_cont=st.floats(-3, 3), xs=st.integers(-40, 40))
def test_fft_matches_direct_sum(xi, xi_cont, xs):
    grid = F.make_grid(1, 16.0, 256)
    f = F.synthesize(grid, center=0.3, modulation=1.2)
    g = S.make_window(grid, "gaussian", width=0.8)
    tf = S.stft(f, g, S.full_lattice(grid), keep_phase=True)
    lat = tf.lattice
    i = int(np.flatnonzero(lat.x_indices == xs)[0])
    j = int(np.flatnonzero(lat.xi_indices == xi)[0])
    direct = S.stft_point(f, g, xs, xi * grid.dxi)
    assert abs(tf.values[i, j] - direct) < 1e-12
    assert np.isfinite(abs(S.stft_point(f, g, xs, xi_cont)))


@pytest.mark.parametrize("sign", [1, -1])
@pytest.mark.parametrize("kind", ["gaussian", "plateau"])
def test_shear_identity(sgrid, sign, kind):
    g = S.make_window(sgrid, kind)
    lat = S.default_lattice(sgrid)
    for f in _battery(sgrid):
        assert S.shear_residual(f, g, sign, lat) < 1e-6


@pytest.mark.parametrize("kind", ["gaussian", "plateau"])
def test_fourier_symmetry(sgrid, kind):
    g = S.make_window(sgrid, kind)
    for f in _battery(sgrid):
        assert S.fourier_symmetry_residual(f, g) < 1e-6


def test_shear_needs_compatible_lattice(grid):
    f = F.synthesize(grid)
    g = S.make_window(grid, "gaussian")
    lat = S.full_lattice(grid, 3, 2)
    assert not lat.shear_compatible
    with pytest.raises(ConfigurationError):
        S.shear_residual(f, g, 1, lat)


def test_shear_identity_2d():
    grid = S.shear_grid(2, 64)
    f = F.synthesize(grid, center=(0.5, -0.5), modulation=(1.0, 0.0))
    g = S.make_window(grid, "gaussian")
    lat = S.full_lattice(grid, 4, 2)
    assert S.shear_residual(f, g, 1, lat) < 1e-6
    assert S.fourier_symmetry_residual(f, g, lat) < 1e-6


def test_bump_certificates():
    grid = F.make_grid(1, 16.0, 4096)
    w = S.make_window(grid, "bump")
    x = grid.coords("space")
    assert np.all(w.values[np.abs(x) >= S.BUMP_RADIUS] == 0)
    assert np.all(np.abs(w.values[np.abs(x) < S.BUMP_RADIUS]) > 0)
    props = w.certified_props
    assert props["lower_bound"] >= 0.9 * props["transform_at_zero"]
    assert props["transform_at_zero"] == pytest.approx(0.055499, rel=1e-4)
    assert props["lower_bound"] == pytest.approx(0.05549, rel=1e-3)


def test_bump_resolution_error():
    with pytest.raises(ResolutionError):
        S.make_window(F.make_grid(1, 16.0, 64), "bump")


def test_plateau_exact():
    grid = F.make_grid(1, 16.0, 4000)
    w = S.make_window(grid, "plateau")
    x = grid.coords("space")
    assert np.all(w.values[np.abs(x) <= 0.25] == 1.0)
    assert np.all(w.values[np.abs(x) >= 0.375] == 0.0)
    assert w.samples.value_at(0.2) == 1.0
    assert S.plateau_profile(np.array([0.2, 0.3, 0.5])).tolist()[0] == 1.0


def test_plateau_monotone_transition():
    t = np.linspace(0.25, 0.375, 41)
    v = S.plateau_profile(t)
    assert np.all(np.diff(v) <= 1e-15)
    assert v[0] == 1.0 and v[-1] == 0.0


@pytest.mark.parametrize("sign", [1, -1])
def test_chirped_window_modulus(grid, sign):
    w = S.make_window(grid, "chirped", base="gaussian", sign=sign)
    base = S.make_window(grid, "gaussian")
    assert np.allclose(np.abs(w.values), np.abs(base.values), rtol=4e-16, atol=0)
    assert w.describe()["sign"] == sign


def test_normalized_window(grid):
    w = S.make_window(grid, "gaussian", normalized=True)
    assert F.l2_norm(w.samples) == pytest.approx(1.0)


def test_unknown_window(grid):
    with pytest.raises(ConfigurationError):
        S.make_window(grid, "hann")


def test_grid_mismatch(grid):
    other = F.make_grid(1, 8.0, 256)
    with pytest.raises(UsageError):
        S.stft(F.synthesize(grid), S.make_window(other, "gaussian"))


def test_lattice_bounds(grid):
    with pytest.raises(ConfigurationError):
        S.LatticeSpec(grid, 8, 1, 64, 256)
    with pytest.raises(ConfigurationError):
        S.LatticeSpec(grid, 0, 1, 4, 4)


def test_lattice_values(grid):
    lat = S.default_lattice(grid)
    assert lat.x_step == 1.0
    assert lat.x_values[lat.x_count // 2] == 0.0
    assert lat.xi_values[(lat.xi_count - 1) // 2] == 0.0


@settings(max_examples=15, deadline=None)
@given(a=st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False))
def test_stft_linear(a):
    grid = F.make_grid(1, 16.0, 256)
    f = F.synthesize(grid, center=0.5)
    h = F.synthesize(grid, center=-1.0, modulation=2.0)
    g = S.make_window(grid, "gaussian")
    lat = S.default_lattice(grid)
    lhs = S.stft(f.with_values(a * f.values + h.values), g, lat, keep_phase=True).values
    rhs = a * S.stft(f, g, lat, keep_phase=True).values + S.stft(h, g, lat, keep_phase=True).values
    assert np.max(np.abs(lhs - rhs)) < 1e-11 * (1 + abs(a))


def test_moyal_discrete(grid):
    # full lattice: ||V_g f||_2 = sqrt(2 pi) ||f|| ||g||
    f = F.synthesize(grid, center=0.5, modulation=1.0)
    g = S.make_window(grid, "gaussian", width=0.7)
    tf = S.stft(f, g, S.full_lattice(grid))
    total = math.sqrt(np.sum(tf.magnitudes**2) * grid.dx * grid.dxi)
    ref = math.sqrt(2 * math.pi) * F.l2_norm(f) * F.l2_norm(g.samples)
    assert total == pytest.approx(ref, rel=1e-12)
