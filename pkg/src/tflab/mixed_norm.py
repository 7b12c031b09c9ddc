"""
Sequence norms, nested L^p(L^q) norms, and the modulation / Wiener amalgam
norms of a sampled field.

Two regimes are kept apart: counting norms (``seq_norm``, no measure) for
exact sequence arithmetic, and quadrature-weighted norms that approximate
continuum norms.  For an infinite exponent the measure factor drops out and
the norm is the plain maximum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ExponentError, ShapeError, UsageError
from .field import SampledField
from .stft import LatticeSpec, TimeFrequencyMatrix, Window, stft

__all__ = [
    "ExponentPair",
    "NormSpec",
    "conjugate",
    "parse_exponent",
    "japanese",
    "seq_norm",
    "mixed_matrix_norm",
    "tf_norm",
    "modulation_norm",
    "amalgam_norm",
    "two_weight_modulation_norm",
    "lifting_ratio",
    "lifting_interval",
]

INF = math.inf


def parse_exponent(p) -> float:
    """Accept floats, ints and the strings ``'inf'``/``'infinity'``/``'∞'``."""
    if isinstance(p, str):
        s = p.strip().lower()
        if s in ("inf", "infinity", "∞", "+inf"):
            return INF
        p = float(s)
    p = float(p)
    if math.isnan(p) or p < 1:
        raise ExponentError(f"exponent must lie in [1, inf], got {p}")
    return p


def conjugate(p: float) -> float:
    """Hölder conjugate ``p'`` with ``1' = inf`` and ``inf' = 1``."""
    p = parse_exponent(p)
    if p == 1:
        return INF
    if p == INF:
        return 1.0
    return p / (p - 1.0)


def japanese(x) -> np.ndarray:
    """``<x> = (1 + |x|^2)^{1/2}``; the last axis holds the components when 2-d."""
    x = np.asarray(x, dtype=float)
    return np.sqrt(1.0 + x**2)


@dataclass(frozen=True)
class ExponentPair:
    p: float
    q: float

    def __post_init__(self):
        object.__setattr__(self, "p", parse_exponent(self.p))
        object.__setattr__(self, "q", parse_exponent(self.q))

    def conjugates(self) -> "ExponentPair":
        return ExponentPair(conjugate(self.p), conjugate(self.q))


@dataclass(frozen=True)
class NormSpec:
    exponents: ExponentPair
    s: float = 0.0
    s1: float = 0.0
    flavor: str = "modulation"

    def __post_init__(self):
        if self.flavor not in ("modulation", "amalgam"):
            raise UsageError(f"flavor must be 'modulation' or 'amalgam', got {self.flavor!r}")

    @classmethod
    def make(cls, p, q, s=0.0, s1=0.0, flavor="modulation") -> "NormSpec":
        return cls(ExponentPair(p, q), float(s), float(s1), flavor)


def _weighted_norm(a: np.ndarray, p: float, weights, axis: Optional[int]) -> np.ndarray:
    a = np.abs(a)
    if p == INF:
        return a.max(axis=axis, initial=0.0)
    peak = a.max(axis=axis, keepdims=True, initial=0.0)
    safe = np.where(peak > 0, peak, 1.0)
    total = np.sum(weights * (a / safe) ** p, axis=axis, keepdims=True)
    out = safe * total ** (1.0 / p)
    return np.squeeze(out, axis=axis) if axis is not None else float(out.reshape(()))


def seq_norm(values, p) -> float:
    """Counting ``l^p`` norm of a finite sequence; 0 for an empty one.

    >>> seq_norm([3, 4], 2)
    5.0
    """
    p = parse_exponent(p)
    a = np.abs(np.asarray(values, dtype=complex).reshape(-1))
    if a.size == 0:
        return 0.0
    return float(_weighted_norm(a, p, 1.0, None))


def mixed_matrix_norm(m, inner_axis: int, inner_p, outer_p,
                      inner_weights=1.0, outer_weights=1.0) -> float:
    """Nested norm of a 2-axis array: inner norm along ``inner_axis``, then outer.

    Weights are measure factors, one per sample (a scalar broadcasts).  Each
    entry contributes ``w |a|^p`` to a finite-exponent sum.
    """
    m = np.abs(np.asarray(m))
    if m.ndim != 2:
        raise ShapeError(f"expected a 2-axis array, got shape {m.shape}")
    if inner_axis not in (0, 1):
        raise ShapeError(f"inner_axis must be 0 or 1, got {inner_axis}")
    inner_p, outer_p = parse_exponent(inner_p), parse_exponent(outer_p)
    iw = np.asarray(inner_weights, dtype=float)
    ow = np.asarray(outer_weights, dtype=float)
    n_inner, n_outer = m.shape[inner_axis], m.shape[1 - inner_axis]
    if iw.ndim and iw.shape != (n_inner,):
        raise ShapeError(f"inner weights have shape {iw.shape}, expected ({n_inner},)")
    if ow.ndim and ow.shape != (n_outer,):
        raise ShapeError(f"outer weights have shape {ow.shape}, expected ({n_outer},)")
    if np.any(iw <= 0) or np.any(ow <= 0):
        raise ShapeError("weights must be positive")
    if m.size == 0:
        return 0.0
    mat = m if inner_axis == 1 else m.T
    inner = _weighted_norm(mat, inner_p, iw[None, :] if iw.ndim else iw, axis=1)
    return float(_weighted_norm(inner, outer_p, ow, None))


def _radial(values_1d: np.ndarray, n: int) -> np.ndarray:
    mesh = np.meshgrid(*([values_1d] * n), indexing="ij")
    return np.sqrt(sum(c**2 for c in mesh)).reshape(-1)


def tf_norm(tf: TimeFrequencyMatrix, spec: NormSpec) -> float:
    """Weighted mixed norm of an already computed time-frequency matrix."""
    lat = tf.lattice
    n = tf.dimension
    mat = tf.as_matrix()
    weight_x = japanese(_radial(lat.x_values, n)) ** spec.s1 if spec.s1 else 1.0
    weight_xi = japanese(_radial(lat.xi_values, n)) ** spec.s if spec.s else 1.0
    if spec.s1:
        mat = mat * weight_x[:, None]
    if spec.s:
        mat = mat * weight_xi[None, :]
    dx, dxi = lat.x_step**n, lat.xi_step**n
    p, q = spec.exponents.p, spec.exponents.q
    if spec.flavor == "modulation":
        return mixed_matrix_norm(mat, 0, p, q, dx, dxi)
    return mixed_matrix_norm(mat, 1, q, p, dxi, dx)


def modulation_norm(f: SampledField, g: Window, spec: NormSpec,
                    lattice: Optional[LatticeSpec] = None) -> float:
    """``|| ||<x>^{s1} <xi>^s V_g f||_{L^p_x} ||_{L^q_xi}``."""
    if spec.flavor != "modulation":
        raise UsageError("modulation_norm needs a modulation-flavor NormSpec")
    return tf_norm(stft(f, g, lattice), spec)


def amalgam_norm(f: SampledField, g: Window, spec: NormSpec,
                 lattice: Optional[LatticeSpec] = None) -> float:
    """``|| ||<x>^{s1} <xi>^s V_g f||_{L^q_xi} ||_{L^p_x}``."""
    if spec.flavor != "amalgam":
        raise UsageError("amalgam_norm needs an amalgam-flavor NormSpec")
    return tf_norm(stft(f, g, lattice), spec)


def two_weight_modulation_norm(f: SampledField, g: Window, p, q, s1: float, s2: float,
                               lattice: Optional[LatticeSpec] = None) -> float:
    return modulation_norm(f, g, NormSpec.make(p, q, s=s2, s1=s1), lattice)


def lifting_ratio(f: SampledField, g: Window, t: float, p, q, s: float,
                  lattice: Optional[LatticeSpec] = None) -> float:
    """``||(I - Laplacian)^{t/2} f||_{W^{s-t}} / ||f||_{W^s}`` (amalgam flavor)."""
    from .field import bessel_potential

    num = amalgam_norm(bessel_potential(f, t), g, NormSpec.make(p, q, s - t, flavor="amalgam"), lattice)
    den = amalgam_norm(f, g, NormSpec.make(p, q, s, flavor="amalgam"), lattice)
    return num / den


def lifting_interval(family, g: Window, t: float, p, q, s: float,
                     lattice: Optional[LatticeSpec] = None) -> tuple[float, float, float]:
    """Smallest ``C`` with every lifting ratio over ``family`` in ``[1/C, C]``.

    Returns ``(min_ratio, max_ratio, C)``.
    """
    ratios = [lifting_ratio(f, g, t, p, q, s, lattice) for f in family]
    lo, hi = min(ratios), max(ratios)
    return lo, hi, max(hi, 1.0 / lo)
