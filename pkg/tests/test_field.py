import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tflab import field as F
from tflab.errors import (
    BoundaryWarning,
    ConfigurationError,
    DomainError,
    ShapeError,
    UnsupportedDimensionError,
    UsageError,
)


@pytest.fixture
def grid():
    return F.make_grid(1, 16.0, 256)


def test_grid_steps(grid):
    assert grid.dx == 0.125
    assert grid.dxi == pytest.approx(math.pi / 16)
    assert grid.dx * grid.dxi * grid.samples_per_dim == pytest.approx(2 * math.pi)


def test_index_conventions(grid):
    assert grid.indices("space")[0] == -128 and grid.indices("space")[-1] == 127
    assert grid.indices("frequency")[0] == -127 and grid.indices("frequency")[-1] == 128
    assert grid.coords("space")[128] == 0.0
    assert grid.coords("frequency")[127] == 0.0


@pytest.mark.parametrize("dim, L, M, exc", [
    (3, 16.0, 256, UnsupportedDimensionError),
    (0, 16.0, 256, ConfigurationError),
    (1, 16.0, 255, ConfigurationError),
    (1, 16.0, 6, ConfigurationError),
    (1, -1.0, 256, ConfigurationError),
])
def test_make_grid_rejects(dim, L, M, exc):
    with pytest.raises(exc):
        F.make_grid(dim, L, M)


def test_values_read_only(grid):
    f = F.synthesize(grid)
    with pytest.raises(ValueError):
        f.values[0] = 1.0


def test_shape_mismatch(grid):
    with pytest.raises(ShapeError):
        F.SampledField(grid, "space", np.zeros(10))


def test_value_at(grid):
    f = F.synthesize(grid, center=1.0)
    assert f.value_at(1.0) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        f.value_at(0.01)
    with pytest.raises(DomainError):
        f.value_at(100.0)


def test_gaussian_peak(grid):
    peak = F.forward_fourier(F.synthesize(grid)).value_at(0.0)
    assert abs(peak - math.sqrt(2 * math.pi)) / math.sqrt(2 * math.pi) < 1e-8


def test_gaussian_transform_pointwise(grid):
    fh = F.forward_fourier(F.synthesize(grid))
    xi = grid.coords("frequency")
    ref = math.sqrt(2 * math.pi) * np.exp(-xi**2 / 2)
    assert np.max(np.abs(fh.values - ref)) < 1e-12


def test_point_mass_transform_is_flat(grid):
    fh = F.forward_fourier(F.synthesize(grid, "point_mass_approx"))
    assert np.allclose(fh.values, 1.0, atol=1e-13)


def test_modulation_shifts_spectrum(grid):
    m = 8 * grid.dxi
    fh = F.forward_fourier(F.synthesize(grid, modulation=m))
    assert abs(fh.value_at(m)) == pytest.approx(math.sqrt(2 * math.pi), rel=1e-10)


@settings(max_examples=25, deadline=None)
@given(c=st.floats(-4, 4), w=st.floats(0.3, 2.0), m=st.floats(-5, 5))
def test_round_trip(c, w, m):
    grid = F.make_grid(1, 16.0, 256)
    f = F.synthesize(grid, center=c, width=w, modulation=m)
    back = F.inverse_fourier(F.forward_fourier(f))
    assert np.max(np.abs(back.values - f.values)) < 1e-12


@settings(max_examples=20, deadline=None)
@given(c=st.floats(-3, 3), m=st.floats(-4, 4))
def test_plancherel(c, m):
    grid = F.make_grid(1, 16.0, 256)
    f = F.synthesize(grid, center=c, modulation=m)
    fh = F.forward_fourier(f)
    assert F.l2_norm(fh) == pytest.approx(math.sqrt(2 * math.pi) * F.l2_norm(f), rel=1e-12)


def test_two_dimensional_round_trip():
    grid = F.make_grid(2, 8.0, 64)
    f = F.synthesize(grid, center=(0.5, -1.0), modulation=(1.0, 2.0))
    assert np.max(np.abs(F.inverse_fourier(F.forward_fourier(f)).values - f.values)) < 1e-12
    peak = F.forward_fourier(F.synthesize(grid)).value_at((0.0, 0.0))
    assert peak.real == pytest.approx(2 * math.pi, rel=1e-8)


def test_side_checks(grid):
    f = F.synthesize(grid)
    with pytest.raises(UsageError):
        F.inverse_fourier(f)
    with pytest.raises(UsageError):
        F.forward_fourier(F.forward_fourier(f))


def test_propagator_gaussian():
    grid = F.make_grid(1, 40.0, 2048)
    f = F.synthesize(grid)
    u = F.apply_multiplier(f, F.SymbolSpec.schrodinger())
    assert abs(u.value_at(0.0)) == pytest.approx(5 ** -0.25, rel=1e-6)
    assert F.l2_norm(u) == pytest.approx(F.l2_norm(f), rel=1e-12)


@pytest.mark.parametrize("sign", [1, -1])
def test_propagator_inverse(sign):
    grid = F.make_grid(1, 40.0, 2048)
    f = F.synthesize(grid, center=1.0, modulation=0.5)
    u = F.apply_multiplier(F.apply_multiplier(f, F.SymbolSpec.schrodinger(sign)),
                           F.SymbolSpec.schrodinger(-sign))
    assert np.max(np.abs(u.values - f.values)) < 1e-12


def test_schrodinger_symbol():
    grid = F.make_grid(1, 16.0, 256)
    sym = F.SymbolSpec.schrodinger().evaluate(grid)
    xi = grid.coords("frequency")
    assert np.allclose(sym, np.exp(-1j * xi**2))


@pytest.mark.parametrize("t", [-2.0, -1.0, 0.5, 1.0])
def test_bessel_group_law(t):
    grid = F.make_grid(1, 16.0, 256)
    f = F.synthesize(grid, modulation=1.5)
    g = F.bessel_potential(F.bessel_potential(f, t), -t)
    assert np.max(np.abs(g.values - f.values)) < 1e-12


def test_custom_symbol_shape():
    grid = F.make_grid(1, 16.0, 256)
    with pytest.raises(ShapeError):
        F.SymbolSpec.custom(np.ones(10)).evaluate(grid)


def test_normalize(grid):
    assert F.l2_norm(F.normalize(F.synthesize(grid))) == pytest.approx(1.0)
    with pytest.raises(UsageError):
        F.normalize(F.synthesize(grid) * 0.0)


def test_boundary_warning():
    grid = F.make_grid(1, 4.0, 64)
    wide = F.synthesize(grid, width=3.0)
    with pytest.warns(BoundaryWarning):
        F.check_boundary(wide)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        F.check_boundary(F.synthesize(F.make_grid(1, 16.0, 256)))


def test_mod_order_round_trip(grid):
    v = np.arange(grid.samples_per_dim, dtype=complex)
    for side in ("space", "frequency"):
        assert np.array_equal(F.from_mod_order(F.to_mod_order(v, grid, side), grid, side), v)
    assert F.to_mod_order(v, grid, "space")[0] == 128
