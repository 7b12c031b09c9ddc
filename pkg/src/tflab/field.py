"""
Uniform grids, sampled complex fields and Fourier multipliers.

The continuous transform pair

    F f(xi)      = int e^{-i xi.x} f(x) dx
    F^{-1} F(x)  = (2 pi)^{-n} int e^{i x.xi} F(xi) dxi

is approximated by Riemann sums on a grid of ``M`` samples per axis with
``dx = 2L/M`` and ``dxi = pi/L``.  Because ``dx * dxi * M = 2 pi`` the two
sums form an exactly invertible discrete pair, evaluated with the FFT.

Space samples sit at ``dx * k`` for ``k = -M/2 .. M/2 - 1`` and frequency
samples at ``dxi * j`` for ``j = -M/2 + 1 .. M/2``; arrays are always stored
in this centred order.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Literal, Optional

import numpy as np

from .errors import (
    BoundaryWarning,
    ConfigurationError,
    DomainError,
    ShapeError,
    UnsupportedDimensionError,
    UsageError,
)

__all__ = [
    "GridSpec",
    "SampledField",
    "SymbolSpec",
    "make_grid",
    "synthesize",
    "forward_fourier",
    "inverse_fourier",
    "apply_multiplier",
    "bessel_potential",
    "l2_norm",
    "normalize",
    "boundary_max",
    "check_boundary",
    "to_mod_order",
    "from_mod_order",
]

Side = Literal["space", "frequency"]

MAX_DIMENSION = 2


@dataclass(frozen=True)
class GridSpec:
    dimension: int
    half_extent: float
    samples_per_dim: int

    @property
    def dx(self) -> float:
        return 2.0 * self.half_extent / self.samples_per_dim

    @property
    def dxi(self) -> float:
        return math.pi / self.half_extent

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.samples_per_dim,) * self.dimension

    def step(self, side: Side) -> float:
        return self.dx if side == "space" else self.dxi

    def offset(self, side: Side) -> int:
        """Storage position of index zero along each axis."""
        m = self.samples_per_dim
        return m // 2 if side == "space" else m // 2 - 1

    def indices(self, side: Side) -> np.ndarray:
        m = self.samples_per_dim
        if side == "space":
            return np.arange(-m // 2, m // 2)
        return np.arange(-m // 2 + 1, m // 2 + 1)

    def coords(self, side: Side) -> np.ndarray:
        """1-D sample coordinates along any axis."""
        return self.step(side) * self.indices(side)

    def mesh(self, side: Side) -> list[np.ndarray]:
        axes = [self.coords(side)] * self.dimension
        return np.meshgrid(*axes, indexing="ij")

    def radius_squared(self, side: Side) -> np.ndarray:
        return sum(c**2 for c in self.mesh(side))

    def contains(self, point, side: Side = "space") -> bool:
        pt = np.atleast_1d(np.asarray(point, dtype=float))
        if side == "space":
            lo, hi = -self.half_extent, self.half_extent
            return bool(np.all((pt >= lo) & (pt < hi)))
        top = math.pi / self.dx
        return bool(np.all((pt > -top) & (pt <= top)))


def make_grid(dimension: int, half_extent: float, samples_per_dim: int) -> GridSpec:
    """Build a validated :class:`GridSpec`.

    >>> g = make_grid(1, 16.0, 256)
    >>> g.dx
    0.125
    """
    if int(dimension) != dimension or dimension < 1:
        raise ConfigurationError(f"dimension must be a positive integer, got {dimension!r}")
    if dimension > MAX_DIMENSION:
        raise UnsupportedDimensionError(
            f"dimension {dimension} not supported (maximum {MAX_DIMENSION})"
        )
    if not half_extent > 0:
        raise ConfigurationError(f"half_extent must be positive, got {half_extent!r}")
    if int(samples_per_dim) != samples_per_dim or samples_per_dim % 2 or samples_per_dim < 8:
        raise ConfigurationError(
            f"samples_per_dim must be an even integer >= 8, got {samples_per_dim!r}"
        )
    return GridSpec(int(dimension), float(half_extent), int(samples_per_dim))


@dataclass(frozen=True, eq=False)
class SampledField:
    grid: GridSpec
    side: Side
    values: np.ndarray

    def __post_init__(self):
        if self.side not in ("space", "frequency"):
            raise UsageError(f"side must be 'space' or 'frequency', got {self.side!r}")
        vals = np.array(self.values, dtype=complex)
        if vals.shape != self.grid.shape:
            raise ShapeError(f"values have shape {vals.shape}, grid expects {self.grid.shape}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def step(self) -> float:
        return self.grid.step(self.side)

    @property
    def cell(self) -> float:
        """Quadrature weight of a single sample."""
        return self.step**self.grid.dimension

    def value_at(self, point) -> complex:
        """Sample value at a grid point given in coordinates."""
        pt = np.atleast_1d(np.asarray(point, dtype=float))
        if pt.size != self.grid.dimension:
            raise ShapeError(f"point has {pt.size} coordinates, grid is {self.grid.dimension}-d")
        idx = pt / self.step
        rounded = np.rint(idx)
        if not np.allclose(idx, rounded, rtol=0, atol=1e-9):
            raise DomainError(f"{tuple(pt)} is not a grid point")
        pos = rounded.astype(int) + self.grid.offset(self.side)
        if np.any(pos < 0) or np.any(pos >= self.grid.samples_per_dim):
            raise DomainError(f"{tuple(pt)} lies outside the grid")
        return complex(self.values[tuple(pos)])

    def with_values(self, values) -> "SampledField":
        return SampledField(self.grid, self.side, values)

    def __mul__(self, scalar):
        return self.with_values(self.values * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True)
class SymbolSpec:
    """Frequency symbol of a Fourier multiplier.

    kind is one of ``'unimodular'`` (symbol ``exp(sign * i * |xi|^alpha)``),
    ``'bessel'`` (symbol ``<xi>^order``), ``'identity'`` or ``'custom'``.
    """

    kind: str
    alpha: float = 2.0
    sign: int = -1
    order: float = 0.0
    table: Optional[np.ndarray] = field(default=None, compare=False)

    @classmethod
    def unimodular(cls, alpha: float, sign: int) -> "SymbolSpec":
        if alpha < 0:
            raise ConfigurationError(f"alpha must be >= 0, got {alpha}")
        if sign not in (1, -1):
            raise ConfigurationError(f"sign must be +1 or -1, got {sign}")
        return cls("unimodular", alpha=float(alpha), sign=int(sign))

    @classmethod
    def schrodinger(cls, sign: int = 1) -> "SymbolSpec":
        """Symbol of ``exp(sign * i * Laplacian)``, i.e. ``exp(-sign * i |xi|^2)``."""
        return cls.unimodular(2.0, -sign)

    @classmethod
    def bessel(cls, order: float) -> "SymbolSpec":
        return cls("bessel", order=float(order))

    @classmethod
    def identity(cls) -> "SymbolSpec":
        return cls("identity")

    @classmethod
    def custom(cls, table) -> "SymbolSpec":
        return cls("custom", table=np.asarray(table, dtype=complex))

    def evaluate(self, grid: GridSpec) -> np.ndarray:
        r2 = grid.radius_squared("frequency")
        if self.kind == "unimodular":
            return np.exp(1j * self.sign * r2 ** (self.alpha / 2.0))
        if self.kind == "bessel":
            return (1.0 + r2) ** (self.order / 2.0)
        if self.kind == "identity":
            return np.ones(grid.shape, dtype=complex)
        if self.kind == "custom":
            if self.table is None or self.table.shape != grid.shape:
                got = None if self.table is None else self.table.shape
                raise ShapeError(f"custom symbol table has shape {got}, grid expects {grid.shape}")
            return self.table
        raise ConfigurationError(f"unknown symbol kind {self.kind!r}")


def synthesize(grid: GridSpec, profile="gaussian", *, center=0.0, width=1.0,
               modulation=0.0, evaluator: Optional[Callable] = None) -> SampledField:
    """Sample a test signal on the space grid.

    Parameters
    ----------
    profile : {'gaussian', 'point_mass_approx', 'custom'}
        ``gaussian`` samples ``exp(-|x-c|^2 / (2 w^2)) exp(i m.x)``.
        ``point_mass_approx`` puts mass one (in the quadrature sense) on the
        grid point nearest ``center``.  ``custom`` calls
        ``evaluator(*mesh)`` on the coordinate mesh.
    center, modulation : float or sequence
        Broadcast to all axes when scalar.
    """
    n = grid.dimension
    c = np.broadcast_to(np.asarray(center, dtype=float), (n,))
    mod = np.broadcast_to(np.asarray(modulation, dtype=float), (n,))
    if not grid.contains(c):
        raise DomainError(f"center {tuple(c)} outside [-{grid.half_extent}, {grid.half_extent})^{n}")
    mesh = grid.mesh("space")
    if profile == "gaussian":
        if not width > 0:
            raise ConfigurationError(f"width must be positive, got {width}")
        r2 = sum((x - ci) ** 2 for x, ci in zip(mesh, c))
        phase = sum(x * mi for x, mi in zip(mesh, mod))
        vals = np.exp(-r2 / (2.0 * width**2)) * np.exp(1j * phase)
    elif profile == "point_mass_approx":
        vals = np.zeros(grid.shape, dtype=complex)
        pos = tuple(int(round(ci / grid.dx)) + grid.offset("space") for ci in c)
        vals[pos] = 1.0 / grid.dx**n
    elif profile == "custom":
        if evaluator is None:
            raise ConfigurationError("custom profile needs an evaluator")
        vals = np.broadcast_to(evaluator(*mesh), grid.shape)
    else:
        raise ConfigurationError(f"unknown profile {profile!r}")
    return SampledField(grid, "space", vals)


def to_mod_order(values: np.ndarray, grid: GridSpec, side: Side) -> np.ndarray:
    """Reorder centred samples so position ``k`` holds index ``k mod M``."""
    shift = -grid.offset(side)
    return np.roll(values, (shift,) * grid.dimension, axis=tuple(range(grid.dimension)))


def from_mod_order(values: np.ndarray, grid: GridSpec, side: Side) -> np.ndarray:
    shift = grid.offset(side)
    return np.roll(values, (shift,) * grid.dimension, axis=tuple(range(grid.dimension)))


def forward_fourier(f: SampledField) -> SampledField:
    """Riemann-sum Fourier transform ``dx^n sum_k e^{-i xi_j . x_k} f(x_k)``."""
    if f.side != "space":
        raise UsageError("forward_fourier expects a space-side field")
    g = f.grid
    spec = np.fft.fftn(to_mod_order(f.values, g, "space")) * g.dx**g.dimension
    return SampledField(g, "frequency", from_mod_order(spec, g, "frequency"))


def inverse_fourier(F: SampledField) -> SampledField:
    """Riemann-sum inverse transform with the ``(2 pi)^{-n}`` factor."""
    if F.side != "frequency":
        raise UsageError("inverse_fourier expects a frequency-side field")
    g = F.grid
    # (2 pi)^-n dxi^n M^n == dx^-n
    vals = np.fft.ifftn(to_mod_order(F.values, g, "frequency")) / g.dx**g.dimension
    return SampledField(g, "space", from_mod_order(vals, g, "space"))


def apply_multiplier(f: SampledField, symbol: SymbolSpec) -> SampledField:
    if f.side != "space":
        raise UsageError("apply_multiplier expects a space-side field")
    fh = forward_fourier(f)
    return inverse_fourier(fh.with_values(symbol.evaluate(f.grid) * fh.values))


def bessel_potential(f: SampledField, t: float) -> SampledField:
    """``(I - Laplacian)^{t/2} f``."""
    return apply_multiplier(f, SymbolSpec.bessel(t))


def l2_norm(f: SampledField) -> float:
    """Quadrature-weighted L2 norm."""
    return math.sqrt(f.cell * float(np.sum(np.abs(f.values) ** 2)))


def normalize(f: SampledField) -> SampledField:
    nrm = l2_norm(f)
    if nrm == 0:
        raise UsageError("cannot normalize the zero field")
    return f.with_values(f.values / nrm)


def boundary_max(f: SampledField) -> float:
    """Largest modulus over the outermost samples of every axis."""
    v = np.abs(f.values)
    edges = []
    for ax in range(v.ndim):
        edges.append(np.take(v, [0, -1], axis=ax).max())
    return float(max(edges))


def check_boundary(f: SampledField, tol: float = 1e-10, *, relative: bool = False) -> float:
    """Warn with :class:`BoundaryWarning` when the field is not decayed at the edge.

    Returns the measured boundary maximum (relative to ``max |f|`` when
    ``relative`` is set).
    """
    b = boundary_max(f)
    if relative:
        peak = float(np.abs(f.values).max())
        b = b / peak if peak > 0 else 0.0
    if b > tol:
        warnings.warn(f"boundary maximum {b:.3e} exceeds {tol:.1e}", BoundaryWarning, stacklevel=2)
    return b
