"""
Analysis windows and the discrete short-time Fourier transform

    V_g f(x, xi) = int e^{-i xi.t} conj(g(t - x)) f(t) dt

evaluated by quadrature on lattice points that are grid points.  Window
translates are wrapped periodically, which is harmless as long as both the
window and the signal live well inside the domain.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate

from .errors import ConfigurationError, ConstructionError, ResolutionError, UsageError
from .field import GridSpec, SampledField, forward_fourier, make_grid, normalize, to_mod_order

__all__ = [
    "Window",
    "LatticeSpec",
    "TimeFrequencyMatrix",
    "bump_profile",
    "plateau_profile",
    "make_window",
    "default_lattice",
    "full_lattice",
    "shear_grid",
    "stft",
    "stft_point",
    "shear_residual",
    "fourier_symmetry_residual",
]

BUMP_RADIUS = 1.0 / 8.0
BUMP_CERT_RADIUS = 3.0 / 8.0
PLATEAU_INNER = 1.0 / 4.0
PLATEAU_OUTER = 3.0 / 8.0
_PLATEAU_BOX = 5.0 / 16.0
_MOLLIFIER_RADIUS = 1.0 / 16.0

_ROW_CHUNK = 128


def _eta(u):
    u = np.asarray(u, dtype=float)
    inside = np.abs(u) < 1.0
    out = np.zeros_like(u)
    out[inside] = np.exp(-1.0 / (1.0 - u[inside] ** 2))
    return out


def bump_profile(t):
    """One-dimensional bump ``eta(8 t)``; exactly zero for ``|t| >= 1/8``."""
    return _eta(np.asarray(t, dtype=float) / BUMP_RADIUS)


_ETA_MASS = integrate.quad(lambda v: float(_eta(v)), -1.0, 1.0, epsabs=1e-14, epsrel=1e-12, limit=200)[0]


def _mollifier_cdf(u: float) -> float:
    if u <= -_MOLLIFIER_RADIUS:
        return 0.0
    if u >= _MOLLIFIER_RADIUS:
        return 1.0
    v = u / _MOLLIFIER_RADIUS
    val = integrate.quad(lambda w: float(_eta(w)), -1.0, v, epsabs=1e-14, epsrel=1e-12, limit=200)[0]
    return min(1.0, val / _ETA_MASS)


def plateau_profile(t):
    """Indicator of ``[-5/16, 5/16]`` smoothed by a mollifier of radius 1/16.

    Equals 1 on ``[-1/4, 1/4]`` and 0 outside ``(-3/8, 3/8)`` exactly, since
    the mollifier CDF is clamped to 0/1 outside its support.
    """
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    flat = out.reshape(-1)
    for i, ti in enumerate(t.reshape(-1)):
        flat[i] = _mollifier_cdf(ti + _PLATEAU_BOX) - _mollifier_cdf(ti - _PLATEAU_BOX)
    return out


def _tensor(profile_1d: np.ndarray, n: int) -> np.ndarray:
    out = profile_1d
    for _ in range(n - 1):
        out = np.multiply.outer(out, profile_1d)
    return out


@dataclass(frozen=True, eq=False)
class Window:
    kind: str
    samples: SampledField
    certified_props: dict = field(default_factory=dict)
    base: Optional["Window"] = None
    sign: int = 0

    @property
    def grid(self) -> GridSpec:
        return self.samples.grid

    @property
    def values(self) -> np.ndarray:
        return self.samples.values

    def describe(self) -> dict:
        d = {"kind": self.kind, "side": self.samples.side}
        if self.base is not None:
            d["base"] = self.base.describe()
            d["sign"] = self.sign
        d.update({k: v for k, v in self.certified_props.items() if np.isscalar(v)})
        return d


def _fourier_1d_abs(profile: np.ndarray, coords: np.ndarray, step: float, freqs: np.ndarray):
    phase = np.exp(-1j * np.outer(freqs, coords))
    return np.abs(step * phase @ profile)


def make_window(grid: GridSpec, kind: str = "gaussian", *, width: float = 1.0,
                base: "Window | str | None" = None, sign: int = -1,
                side: str = "space", normalized: bool = False) -> Window:
    """Construct and certify an analysis window.

    Parameters
    ----------
    kind : {'gaussian', 'bump', 'plateau', 'chirped'}
        ``gaussian`` is ``exp(-|t|^2 / (2 width^2))``.  ``bump`` is the tensor
        product of ``eta(8 t_i)``, ``eta(u) = exp(-1/(1-u^2))`` on ``|u| < 1``.
        ``plateau`` is the mollified indicator described in
        :func:`plateau_profile`.  ``chirped`` multiplies ``base`` by
        ``exp(sign * i |t|^2)``.
    side : {'space', 'frequency'}
        Grid on which the window is sampled.  Bumps placed on the frequency
        side are used for lattice sums whose Fourier transform is the comb.
    normalized : bool
        Scale to unit quadrature L2 norm.

    Raises
    ------
    ResolutionError
        The grid step does not give 8 samples across the support.
    ConstructionError
        A certificate fails; this indicates a bug, not a user error.
    """
    n = grid.dimension
    step = grid.step(side)
    coords = grid.coords(side)
    props: dict = {}

    if kind == "gaussian":
        if not width > 0:
            raise ConfigurationError(f"width must be positive, got {width}")
        prof = np.exp(-coords**2 / (2.0 * width**2))
        vals = _tensor(prof, n)
        props["width"] = float(width)
    elif kind == "bump":
        if 2 * BUMP_RADIUS / step < 8:
            raise ResolutionError(
                f"step {step:.4g} gives fewer than 8 samples across the bump support"
            )
        prof = bump_profile(coords)
        vals = _tensor(prof, n)
        outside = np.abs(coords) >= BUMP_RADIUS
        if np.any(prof[outside] != 0.0):
            raise ConstructionError("bump samples leak outside [-1/8, 1/8]")
        cert = np.linspace(-BUMP_CERT_RADIUS, BUMP_CERT_RADIUS, 97)
        mags = _fourier_1d_abs(prof, coords, step, cert)
        peak = _fourier_1d_abs(prof, coords, step, np.zeros(1))[0]
        c = float(mags.min()) ** n
        if not c > 0:
            raise ConstructionError(f"bump transform lower bound not positive: {c}")
        props.update(support_radius=BUMP_RADIUS, cert_radius=BUMP_CERT_RADIUS,
                     lower_bound=c, transform_at_zero=float(peak) ** n,
                     sup=float(prof.max()) ** n)
    elif kind == "plateau":
        if 2 * PLATEAU_OUTER / step < 8:
            raise ResolutionError(f"step {step:.4g} does not resolve the plateau window")
        prof = plateau_profile(coords)
        vals = _tensor(prof, n)
        inner = np.abs(coords) <= PLATEAU_INNER
        outer = np.abs(coords) >= PLATEAU_OUTER
        if np.any(prof[inner] != 1.0) or np.any(prof[outer] != 0.0):
            raise ConstructionError("plateau window certificate failed")
        props.update(plateau_radius=PLATEAU_INNER, support_radius=PLATEAU_OUTER)
    elif kind == "chirped":
        if sign not in (1, -1):
            raise ConfigurationError(f"sign must be +1 or -1, got {sign}")
        if base is None:
            base = "gaussian"
        if isinstance(base, str):
            base = make_window(grid, base, width=width, side=side)
        if base.grid != grid or base.samples.side != side:
            raise UsageError("chirped window base lives on a different grid")
        r2 = grid.radius_squared(side)
        vals = base.values * np.exp(1j * sign * r2)
        # |exp(i theta)| == 1 up to an ulp; subnormal tails only keep absolute precision
        tiny = 4 * np.finfo(float).smallest_subnormal
        if not np.allclose(np.abs(vals), np.abs(base.values), rtol=4e-16, atol=tiny):
            raise ConstructionError("chirp changed the window modulus")
        props.update(base.certified_props)
        window = Window("chirped", SampledField(grid, side, vals), props, base, int(sign))
        return _maybe_normalized(window, normalized)
    else:
        raise ConfigurationError(f"unknown window kind {kind!r}")

    return _maybe_normalized(Window(kind, SampledField(grid, side, vals), props), normalized)


def _maybe_normalized(w: Window, normalized: bool) -> Window:
    if not normalized:
        return w
    return Window(w.kind, normalize(w.samples), dict(w.certified_props, normalized=True),
                  w.base, w.sign)


@dataclass(frozen=True)
class LatticeSpec:
    """Time-frequency sampling lattice in grid index units.

    Positions are ``x_offset + x_stride * (i - x_count // 2)`` (times ``dx``)
    and frequencies ``xi_offset + xi_stride * (i - (xi_count - 1) // 2)``
    (times ``dxi``), per axis.  The same 1-D lattice is used on every axis.
    """

    grid: GridSpec
    x_stride: int
    xi_stride: int
    x_count: int
    xi_count: int
    x_offset: int = 0
    xi_offset: int = 0

    def __post_init__(self):
        for name in ("x_stride", "xi_stride", "x_count", "xi_count"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ConfigurationError(f"{name} must be a positive integer, got {v!r}")
        m = self.grid.samples_per_dim
        xs, ks = self.x_indices, self.xi_indices
        if xs.min() < -m // 2 or xs.max() > m // 2 - 1:
            raise ConfigurationError("lattice positions fall outside the space grid")
        if ks.min() < -m // 2 + 1 or ks.max() > m // 2:
            raise ConfigurationError("lattice frequencies fall outside the frequency grid")

    @property
    def x_indices(self) -> np.ndarray:
        return self.x_offset + self.x_stride * (np.arange(self.x_count) - self.x_count // 2)

    @property
    def xi_indices(self) -> np.ndarray:
        return self.xi_offset + self.xi_stride * (np.arange(self.xi_count) - (self.xi_count - 1) // 2)

    @property
    def x_step(self) -> float:
        return self.x_stride * self.grid.dx

    @property
    def xi_step(self) -> float:
        return self.xi_stride * self.grid.dxi

    @property
    def x_values(self) -> np.ndarray:
        return self.grid.dx * self.x_indices

    @property
    def xi_values(self) -> np.ndarray:
        return self.grid.dxi * self.xi_indices

    def _shear_shift(self, idx) -> np.ndarray:
        """Frequency-index shift corresponding to ``2 x``."""
        return 2.0 * np.asarray(idx, dtype=float) * self.grid.dx / self.grid.dxi

    @property
    def shear_compatible(self) -> bool:
        ratio = self._shear_shift(self.x_stride) / self.xi_stride
        off = self._shear_shift(self.x_offset) / self.xi_stride
        return bool(abs(ratio - round(ratio)) < 1e-9 and abs(off - round(off)) < 1e-9
                    and round(ratio) >= 1)


def full_lattice(grid: GridSpec, x_stride: int = 1, xi_stride: int = 1) -> LatticeSpec:
    m = grid.samples_per_dim
    return LatticeSpec(grid, x_stride, xi_stride, m // x_stride, m // xi_stride)


def default_lattice(grid: GridSpec) -> LatticeSpec:
    """Unit-ish position step, every frequency sample."""
    return full_lattice(grid, max(1, round(1.0 / grid.dx)), 1)


def shear_grid(dimension: int, samples_per_dim: int) -> GridSpec:
    """Grid with ``dxi == 2 dx``, so that ``xi -/+ 2x`` of grid points are grid points."""
    return make_grid(dimension, math.sqrt(math.pi * samples_per_dim) / 2.0, samples_per_dim)


@dataclass(frozen=True, eq=False)
class TimeFrequencyMatrix:
    lattice: LatticeSpec
    magnitudes: np.ndarray
    values: Optional[np.ndarray] = None

    @property
    def dimension(self) -> int:
        return self.lattice.grid.dimension

    def as_matrix(self) -> np.ndarray:
        """Magnitudes reshaped to (positions, frequencies)."""
        n = self.dimension
        lat = self.lattice
        return self.magnitudes.reshape(lat.x_count**n, lat.xi_count**n)


def _rows(f_mod: np.ndarray, g_mod: np.ndarray, shifts: np.ndarray, duals: list,
          weight: float, dual_offsets: Optional[np.ndarray] = None) -> np.ndarray:
    """Windowed transforms ``weight * sum_t e^{-2 pi i d t / M} conj(g[t-s]) f[t]``.

    ``f_mod``/``g_mod`` are in index-mod-M order.  ``shifts`` has shape (S, n),
    ``duals`` holds n integer arrays.  Returns shape (S, len(d_1), ..., len(d_n)).
    """
    m = f_mod.shape[0]
    n = f_mod.ndim
    s_count = shifts.shape[0]
    out = np.empty((s_count,) + tuple(len(d) for d in duals), dtype=complex)
    ar = np.arange(m)
    if n == 1:
        d0 = np.asarray(duals[0])
        for lo in range(0, s_count, _ROW_CHUNK):
            sl = slice(lo, min(lo + _ROW_CHUNK, s_count))
            idx = (ar[None, :] - shifts[sl, 0][:, None]) % m
            spec = np.fft.fft(np.conj(g_mod[idx]) * f_mod[None, :], axis=1)
            cols = d0[None, :]
            if dual_offsets is not None:
                cols = cols + dual_offsets[sl, 0][:, None]
            out[sl] = np.take_along_axis(spec, np.broadcast_to(cols % m, (spec.shape[0], len(d0))), axis=1)
    else:
        for r in range(s_count):
            ix = np.ix_(*[(ar - shifts[r, a]) % m for a in range(n)])
            spec = np.fft.fftn(np.conj(g_mod[ix]) * f_mod)
            off = dual_offsets[r] if dual_offsets is not None else np.zeros(n, dtype=int)
            out[r] = spec[np.ix_(*[(np.asarray(duals[a]) + off[a]) % m for a in range(n)])]
    return out * weight


def _shift_table(idx_1d: np.ndarray, n: int) -> np.ndarray:
    mesh = np.meshgrid(*([idx_1d] * n), indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=1)


def _check_pair(f: SampledField, g: Window, lattice: Optional[LatticeSpec]):
    if f.grid != g.grid:
        raise UsageError("signal and window are sampled on different grids")
    if f.side != g.samples.side:
        raise UsageError("signal and window are sampled on different sides")
    if lattice is not None and lattice.grid != f.grid:
        raise UsageError("lattice belongs to a different grid")


def stft(f: SampledField, g: Window, lattice: Optional[LatticeSpec] = None,
         keep_phase: bool = False) -> TimeFrequencyMatrix:
    """Short-time Fourier transform of a space-side field on ``lattice``.

    Computed with one FFT per window position; agrees with the direct sum of
    :func:`stft_point` to round-off.
    """
    if f.side != "space":
        raise UsageError("stft expects a space-side field")
    lattice = lattice or default_lattice(f.grid)
    _check_pair(f, g, lattice)
    grid, n = f.grid, f.grid.dimension
    vals = _rows(
        to_mod_order(f.values, grid, "space"),
        to_mod_order(g.values, grid, "space"),
        _shift_table(lattice.x_indices, n),
        [lattice.xi_indices] * n,
        grid.dx**n,
    )
    shape = (lattice.x_count,) * n + (lattice.xi_count,) * n
    vals = vals.reshape(shape)
    return TimeFrequencyMatrix(lattice, np.abs(vals), vals if keep_phase else None)


def stft_point(f: SampledField, g: Window, x_index, xi) -> complex:
    """Direct quadrature of ``V_g f`` at grid position ``x_index`` and any ``xi``."""
    _check_pair(f, g, None)
    grid, n = f.grid, f.grid.dimension
    shift = np.broadcast_to(np.asarray(x_index, dtype=int), (n,))
    xi = np.broadcast_to(np.asarray(xi, dtype=float), (n,))
    translated = np.roll(g.values, tuple(shift), axis=tuple(range(n)))
    phase = sum(xi[a] * c for a, c in enumerate(grid.mesh(f.side)))
    return complex(grid.step(f.side) ** n * np.sum(np.exp(-1j * phase) * np.conj(translated) * f.values))


def shear_residual(f: SampledField, g: Window, sign: int,
                   lattice: Optional[LatticeSpec] = None) -> float:
    """Max deviation in ``|V_g[e^{+-i|t|^2} f](x, xi)| = |V_{g e^{-+i|t|^2}} f(x, xi -+ 2x)|``.

    The left side chirps the signal and runs :func:`stft`; the right side
    chirps the window, transforms every frequency, and reads off the
    sheared frequency index.
    """
    if sign not in (1, -1):
        raise ConfigurationError(f"sign must be +1 or -1, got {sign}")
    lattice = lattice or default_lattice(f.grid)
    _check_pair(f, g, lattice)
    if not lattice.shear_compatible:
        raise ConfigurationError(
            "lattice is not shear-compatible: 2*x_step must be an integer multiple of xi_step"
        )
    grid, n = f.grid, f.grid.dimension
    chirp = np.exp(1j * sign * grid.radius_squared("space"))
    left = stft(f.with_values(f.values * chirp), g, lattice).magnitudes

    gc = make_window(grid, "chirped", base=g, sign=-sign)
    shifts = _shift_table(lattice.x_indices, n)
    offsets = -sign * np.rint(lattice._shear_shift(shifts)).astype(int)
    right = _rows(
        to_mod_order(f.values, grid, "space"),
        to_mod_order(gc.values, grid, "space"),
        shifts,
        [lattice.xi_indices] * n,
        grid.dx**n,
        dual_offsets=offsets,
    )
    right = np.abs(right).reshape(left.shape)
    return float(np.max(np.abs(left - right))) if left.size else 0.0


def fourier_symmetry_residual(f: SampledField, g: Window,
                              lattice: Optional[LatticeSpec] = None) -> float:
    """Max deviation in ``|V_g f(x, xi)| = (2 pi)^{-n} |V_{g^} f^(xi, -x)|``."""
    lattice = lattice or default_lattice(f.grid)
    _check_pair(f, g, lattice)
    grid, n = f.grid, f.grid.dimension
    left = stft(f, g, lattice).magnitudes

    fh = forward_fourier(f)
    gh = forward_fourier(g.samples)
    right = _rows(
        to_mod_order(fh.values, grid, "frequency"),
        to_mod_order(gh.values, grid, "frequency"),
        _shift_table(lattice.xi_indices, n),
        [-lattice.x_indices] * n,
        grid.dxi**n,
    )
    right = np.abs(right).reshape((lattice.xi_count,) * n + (lattice.x_count,) * n)
    # (xi..., x...) -> (x..., xi...)
    right = np.moveaxis(right, list(range(n)), list(range(n, 2 * n)))
    right = right / (2.0 * math.pi) ** n
    return float(np.max(np.abs(left - right))) if left.size else 0.0
