"""
Finitely supported coefficient sequences, lattice-translate synthesis and
the growth scans that locate the boundedness threshold of ``exp(i Laplacian)``
on Wiener amalgam spaces.

Two paths are provided.  The sequence path works with the exact ratio

    ||c||_{l^p} / ||<k>^s c_k||_{l^q}

whose boundedness over finitely supported ``c`` is what boundedness of the
propagator reduces to; it is cheap and reaches large N.  The operator path
builds ``f`` from a comb of bumps, propagates it on a grid and measures the
actual amalgam-norm quotient; it is expensive and used at small N only.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .errors import ConfigurationError, DomainError, UsageError
from .field import (
    GridSpec,
    SampledField,
    SymbolSpec,
    apply_multiplier,
    boundary_max,
    inverse_fourier,
    make_grid,
)
from .mixed_norm import INF, NormSpec, conjugate, japanese, parse_exponent, seq_norm, tf_norm
from .stft import LatticeSpec, Window, full_lattice, make_window, stft

__all__ = [
    "CoeffSequence",
    "ScanReport",
    "make_coeffs",
    "synthesize_lattice_sum",
    "lemma_ratio",
    "dual_weight_norm",
    "holder_constant",
    "threshold",
    "extremal_profile",
    "classify",
    "sharpness_scan",
    "sequence_verdict",
    "operator_grid",
    "operator_lattice",
    "operator_ratio",
]

TAU = 0.02
BURN_IN = 16
MIN_DOUBLINGS = 4
CONTRACTION = 0.9


def _box(n: int, N: int) -> list[np.ndarray]:
    k = np.arange(-N, N + 1)
    return np.meshgrid(*([k] * n), indexing="ij")


def _bracket(n: int, N: int) -> np.ndarray:
    return np.sqrt(1.0 + sum(m.astype(float) ** 2 for m in _box(n, N)))


@dataclass(frozen=True, eq=False)
class CoeffSequence:
    """Complex sequence on Z^n supported in ``|k|_inf <= support_radius``.

    ``values`` is dense with shape ``(2N+1,)*n``; entry ``k`` sits at
    position ``k + N``.
    """

    dimension: int
    support_radius: int
    values: np.ndarray

    def __post_init__(self):
        n, N = self.dimension, self.support_radius
        if n not in (1, 2):
            raise ConfigurationError(f"dimension must be 1 or 2, got {n}")
        if int(N) != N or N < 0:
            raise ConfigurationError(f"support radius must be a non-negative integer, got {N}")
        vals = np.array(self.values, dtype=complex)
        if vals.shape != (2 * N + 1,) * n:
            raise ConfigurationError(f"values shape {vals.shape} does not match radius {N}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_entries(cls, dimension: int, entries: dict) -> "CoeffSequence":
        pts = [np.broadcast_to(np.atleast_1d(k), (dimension,)) for k in entries]
        N = int(max((np.abs(p).max() for p in pts), default=0))
        vals = np.zeros((2 * N + 1,) * dimension, dtype=complex)
        for p, v in zip(pts, entries.values()):
            vals[tuple(np.asarray(p, dtype=int) + N)] = v
        return cls(dimension, N, vals)

    @property
    def entries(self) -> dict:
        """Nonzero entries keyed by lattice point (int for n=1, tuple for n=2)."""
        N = self.support_radius
        out = {}
        for pos in zip(*np.nonzero(self.values)):
            key = tuple(int(i) - N for i in pos)
            out[key[0] if self.dimension == 1 else key] = complex(self.values[pos])
        return out

    def __getitem__(self, k) -> complex:
        k = np.broadcast_to(np.atleast_1d(k), (self.dimension,))
        if np.any(np.abs(k) > self.support_radius):
            return 0j
        return complex(self.values[tuple(np.asarray(k, dtype=int) + self.support_radius)])

    def __mul__(self, scalar) -> "CoeffSequence":
        return CoeffSequence(self.dimension, self.support_radius, self.values * scalar)

    __rmul__ = __mul__

    def weighted(self, s: float) -> np.ndarray:
        """``<k>^s c_k`` as a dense array."""
        return _bracket(self.dimension, self.support_radius) ** s * self.values


def make_coeffs(n: int, N: int, profile: str = "constant", *, beta: float = 0.0,
                func: Optional[Callable] = None, seed: Optional[int] = None) -> CoeffSequence:
    """Deterministic coefficient families on the box ``|k|_inf <= N``.

    profile: ``constant`` (all ones), ``power`` (``<k>^{-beta}``), ``kronecker``
    (one at the origin), ``custom`` (``func(k_1, ..., k_n)`` on the box mesh)
    or ``random`` (seeded complex normals; for property tests).
    """
    if int(N) != N or N < 0:
        raise ConfigurationError(f"N must be a non-negative integer, got {N}")
    N = int(N)
    shape = (2 * N + 1,) * n
    if profile == "constant":
        vals = np.ones(shape)
    elif profile == "power":
        vals = _bracket(n, N) ** (-float(beta))
    elif profile == "kronecker":
        vals = np.zeros(shape)
        vals[(N,) * n] = 1.0
    elif profile == "custom":
        if func is None:
            raise ConfigurationError("custom profile needs func")
        vals = np.broadcast_to(func(*_box(n, N)), shape)
    elif profile == "random":
        if seed is None:
            raise ConfigurationError("random profile needs an explicit seed")
        rng = np.random.default_rng(seed)
        vals = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    else:
        raise ConfigurationError(f"unknown coefficient profile {profile!r}")
    return CoeffSequence(n, N, vals)


def synthesize_lattice_sum(c: CoeffSequence, phi: Window,
                           grid: Optional[GridSpec] = None) -> SampledField:
    """``sum_l c_l phi(. - l)`` on the side of the grid where ``phi`` is sampled.

    The translates have disjoint supports (bump support 1/4 < spacing 1), so
    every sample receives exactly one term and the sum is exact.
    """
    if phi.kind != "bump":
        raise UsageError(f"lattice sums need the bump window, got {phi.kind!r}")
    grid = grid or phi.grid
    if phi.grid != grid:
        raise UsageError("bump window sampled on a different grid")
    if c.dimension != grid.dimension:
        raise UsageError("coefficient and grid dimensions differ")
    side = phi.samples.side
    step = grid.step(side)
    per_unit = 1.0 / step
    unit = int(round(per_unit))
    if abs(per_unit - unit) > 1e-9 * per_unit:
        raise ConfigurationError(f"grid step {step!r} does not divide the unit lattice spacing")
    reach = c.support_radius + 1
    if not (grid.contains([-reach] * grid.dimension, side) and grid.contains([reach] * grid.dimension, side)):
        raise DomainError(f"grid does not contain the box [-{reach}, {reach}]^{grid.dimension}")
    n = grid.dimension
    out = np.zeros(grid.shape, dtype=complex)
    for pos in zip(*np.nonzero(c.values)):
        shift = tuple((int(i) - c.support_radius) * unit for i in pos)
        out += c.values[pos] * np.roll(phi.values, shift, axis=tuple(range(n)))
    return SampledField(grid, side, out)


def lemma_ratio(c: CoeffSequence, p, q, s: float) -> float:
    """``||c||_{l^p} / ||<k>^s c_k||_{l^q}`` in exact counting norms."""
    den = seq_norm(c.weighted(s), q)
    if den == 0:
        raise ZeroDivisionError("lemma_ratio of the zero sequence")
    return seq_norm(c.values, p) / den


def dual_weight_norm(p, q, s: float, N: int, n: int = 1) -> float:
    """Partial ``l^{(q/p)'}`` norm of ``<k>^{-sp}`` over ``|k|_inf <= N``.

    Finite as ``N -> inf`` exactly when ``(q/p)' s p > n``.
    """
    p, q = parse_exponent(p), parse_exponent(q)
    if not (1 <= p < q < INF):
        raise ConfigurationError(f"dual_weight_norm needs 1 <= p < q < inf, got p={p}, q={q}")
    r = q / (q - p)
    return float(np.sum(_bracket(n, N) ** (-s * p * r)) ** (1.0 / r))


def holder_constant(p, q, s: float, N: int, n: int = 1) -> float:
    """Sharp bound ``sup_c lemma_ratio`` over sequences supported in the box.

    Hölder with exponents ``q/p`` and ``(q/p)'`` gives
    ``||c||_p <= dual_weight_norm^{1/p} ||<k>^s c||_q`` with equality for
    ``c_k = <k>^{-s q / (q - p)}``.  ``q = inf`` is the limit case.
    """
    p, q = parse_exponent(p), parse_exponent(q)
    if not p < q:
        raise ConfigurationError(f"holder_constant needs p < q, got p={p}, q={q}")
    if q == INF:
        return float(np.sum(_bracket(n, N) ** (-s * p)) ** (1.0 / p))
    return dual_weight_norm(p, q, s, N, n) ** (1.0 / p)


def threshold(p, q, n: int = 1) -> float:
    """Critical smoothness ``n |1/p - 1/q|``."""
    p, q = parse_exponent(p), parse_exponent(q)
    return n * abs(1.0 / p - 1.0 / q)


def extremal_profile(p, q, s: float, n: int = 1) -> dict:
    """Coefficient family attaining the sup of :func:`lemma_ratio` (for ``p < q``).

    ``power(s q/(q-p))``, which is ``power(s)`` for ``q = inf`` and
    ``power(s + n/q)`` at the critical ``s``.  For ``p == q`` the sup is
    attained by a unit mass at the corner ``(N, ..., N)``.
    """
    p, q = parse_exponent(p), parse_exponent(q)
    if p < q:
        beta = s if q == INF else s * q / (q - p)
        return {"profile": "power", "beta": float(beta)}
    if p == q:
        return {"profile": "corner"}
    raise ConfigurationError("extremal family is defined for p <= q; use the dual pair")


def _coeffs_for(n: int, N: int, profile: dict) -> CoeffSequence:
    if profile["profile"] == "corner":
        return make_coeffs(n, N, "custom",
                           func=lambda *k: np.all([ki == N for ki in k], axis=0).astype(float))
    return make_coeffs(n, N, profile["profile"], beta=profile.get("beta", 0.0))


def _describe(profile: dict) -> str:
    if profile["profile"] == "power":
        return f"power({profile['beta']:.6g})"
    return profile["profile"]


@dataclass
class ScanReport:
    p: float
    q: float
    s: float
    dimension: int
    axis: str
    axis_values: list
    ratios: list
    increments: list
    slope: float
    slope_coordinates: str
    verdict: str
    profile: str
    route: str = "direct"
    bounds: list = field(default_factory=list)
    spot: list = field(default_factory=list)

    def to_dict(self) -> dict:
        def exp(v):
            return "inf" if v == INF else v
        return {
            "p": exp(self.p), "q": exp(self.q), "s": self.s, "dimension": self.dimension,
            "axis": self.axis, "axis_values": list(self.axis_values),
            "ratios": list(self.ratios), "increments": list(self.increments),
            "slope": self.slope, "slope_coordinates": self.slope_coordinates,
            "verdict": self.verdict, "profile": self.profile, "route": self.route,
            "bounds": list(self.bounds), "spot": list(self.spot),
        }


def classify(axis_values: Sequence[float], ratios: Sequence[float], *, tau: float = TAU,
             burn_in: int = BURN_IN, min_doublings: int = MIN_DOUBLINGS,
             contraction: float = CONTRACTION, coordinates: str = "log N"):
    """Classify a ratio sequence as bounded, growing or inconclusive.

    Returns ``(verdict, relative_increments, slope)``.  Increments and the
    slope use only points with ``N >= burn_in``.

    ``bounded``: the scan spans ``min_doublings`` doublings past burn-in and
    either the last relative increment is below ``tau`` (a decreasing
    sequence counts) or every absolute
    increment (rescaled to one doubling) is at most ``contraction`` times the
    previous one, i.e. the ratios converge geometrically.
    ``growing``: last relative increment above ``tau`` and positive slope of
    log(ratio) against ``coordinates`` (``'log N'`` or ``'log log N'``).
    """
    N = np.asarray(axis_values, dtype=float)
    r = np.asarray(ratios, dtype=float)
    if N.size != r.size:
        raise ConfigurationError("axis values and ratios differ in length")
    if np.any(np.diff(N) <= 0):
        raise ConfigurationError("axis values must be strictly increasing")
    keep = N >= burn_in
    N, r = N[keep], r[keep]
    if N.size < 2:
        return "inconclusive", [], float("nan")
    rel = np.diff(r) / r[:-1]
    if coordinates == "log N":
        xs = np.log(N)
    elif coordinates == "log log N":
        xs = np.log(np.log(N))
    else:
        raise ConfigurationError(f"unknown slope coordinates {coordinates!r}")
    slope = float(np.polyfit(xs, np.log(r), 1)[0])
    span_ok = N[-1] / N[0] >= 2.0**min_doublings - 1e-9

    steps = np.diff(r)
    per_doubling = np.log(N[1:] / N[:-1]) / math.log(2.0)
    rate = steps / per_doubling
    contracting = bool(
        rate.size >= 2
        and np.all(rate >= 0)
        and np.all(rate[1:] <= contraction * rate[:-1])
    )
    final = float(rel[-1])
    if span_ok and (final < tau or contracting):
        verdict = "bounded"
    elif final > tau and slope > 0:
        verdict = "growing"
    else:
        verdict = "inconclusive"
    return verdict, [float(x) for x in rel], slope


def _workers() -> int:
    env = os.environ.get("LAB_THREADS")
    return max(1, int(env)) if env else 1


def _scan_one(p, q, s, N_list, n, profile, coordinates, spot) -> ScanReport:
    route = "direct"
    pp, qq = p, q
    if p > q:
        pp, qq, route = conjugate(p), conjugate(q), "dual"
    prof = profile if profile is not None else extremal_profile(pp, qq, s, n)
    ratios, bounds = [], []
    for N in N_list:
        c = _coeffs_for(n, N, prof)
        ratios.append(lemma_ratio(c, pp, qq, s))
        if pp < qq:
            bounds.append(holder_constant(pp, qq, s, N, n))
    verdict, incs, slope = classify(N_list, ratios, coordinates=coordinates)
    rep = ScanReport(p, q, float(s), n, "N", [int(N) for N in N_list], ratios, incs, slope,
                     coordinates, verdict, _describe(prof), route, bounds)
    if spot:
        rep.spot = _spot_path(p, q, s, n, spot)
    return rep


def sharpness_scan(p, q, s_list: Iterable[float], N_list: Sequence[int], *, n: int = 1,
                   profile: Optional[dict] = None, coordinates: str = "log N",
                   spot: Optional[dict] = None, workers: Optional[int] = None) -> list[ScanReport]:
    """Scan the sequence ratio in N for each ``s`` and classify its growth.

    The default family is :func:`extremal_profile`, for which the ratio
    equals the sharp Hölder constant, so a bounded verdict means the
    sequence inequality holds.  Pairs with ``p > q`` are scanned through the
    dual pair ``(p', q')``.

    ``spot``, when given, holds ``{'N': [...], 'grid_policy': callable,
    'window': callable(grid) -> Window, 'sign': +-1}`` and adds operator-level
    ratios at those N to each report.
    """
    p, q = parse_exponent(p), parse_exponent(q)
    N_list = [int(N) for N in N_list]
    if not N_list:
        raise ConfigurationError("N_list must not be empty")
    if any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise ConfigurationError("N_list must be strictly increasing")
    s_list = [float(s) for s in s_list]
    workers = workers or _workers()
    job = lambda s: _scan_one(p, q, s, N_list, n, profile, coordinates, spot)  # noqa: E731
    if workers == 1 or len(s_list) == 1:
        return [job(s) for s in s_list]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(job, s_list))


def sequence_verdict(p, q, s: float, N_list: Sequence[int], n: int = 1) -> str:
    return sharpness_scan(p, q, [s], N_list, n=n, workers=1)[0].verdict


def operator_grid(N: int, n: int = 1) -> GridSpec:
    """Grid for the operator path with the comb ``sum c_l phi(xi - l)`` on the frequency side.

    ``L`` is a multiple of pi so integers are frequency samples (``dxi = 1/k``);
    ``k`` is large enough that the slowly decaying inverse transform of the
    bump is below 1e-8 of its peak at the boundary, and ``M`` resolves
    frequencies up to ``N + 3``.
    """
    k = 800 + 2 * int(N)
    L = k * math.pi
    M = 1 << max(3, math.ceil(math.log2(2 * k * (N + 3))))
    return make_grid(n, L, M)


def operator_lattice(grid: GridSpec, xi_step: float = 0.05) -> LatticeSpec:
    """Unit-ish position step, frequency step about ``xi_step``, full coverage."""
    return full_lattice(grid, max(1, round(1.0 / grid.dx)), max(1, round(xi_step / grid.dxi)))


def operator_ratio(p, q, s: float, c: CoeffSequence, phi: Window, g: Window,
                   grid: Optional[GridSpec] = None, sign: int = 1,
                   lattice: Optional[LatticeSpec] = None, decay_tol: float = 1e-8) -> float:
    """``||exp(sign i Lap) f||_{W_{p,q}} / ||f||_{W^s_{p,q}}`` for a bump lattice sum.

    With ``phi`` sampled on the frequency side, ``f`` is the inverse
    transform of ``sum_l c_l phi(. - l)``; with ``phi`` on the space side,
    ``f`` is the lattice sum itself.  Both norms use the window ``g`` on one
    shared lattice.

    Raises
    ------
    DomainError
        When ``f`` or its propagation has not decayed below ``decay_tol``
        (relative to its peak) at the boundary.
    """
    grid = grid or phi.grid
    if g.grid != grid or g.samples.side != "space":
        raise UsageError("analysis window must be a space-side window on the same grid")
    comb = synthesize_lattice_sum(c, phi, grid)
    f = inverse_fourier(comb) if comb.side == "frequency" else comb
    u = apply_multiplier(f, SymbolSpec.schrodinger(sign))
    for name, fld in (("input", f), ("propagated field", u)):
        peak = float(np.abs(fld.values).max())
        b = boundary_max(fld) / peak if peak > 0 else 0.0
        if b > decay_tol:
            raise DomainError(
                f"{name} boundary maximum {b:.3e} (relative) exceeds {decay_tol:.1e}", boundary_max=b
            )
    lattice = lattice or operator_lattice(grid)
    num = tf_norm(stft(u, g, lattice), NormSpec.make(p, q, 0.0, flavor="amalgam"))
    den = tf_norm(stft(f, g, lattice), NormSpec.make(p, q, s, flavor="amalgam"))
    if den == 0:
        raise ZeroDivisionError("operator_ratio of the zero field")
    return num / den


def _spot_path(p, q, s, n, spot: dict) -> list:
    out = []
    for N in spot["N"]:
        grid = spot.get("grid_policy", operator_grid)(N, n)
        phi = make_window(grid, "bump", side="frequency")
        g = spot.get("window", lambda gr: make_window(gr, "gaussian", width=1.0))(grid)
        c = _coeffs_for(n, N, extremal_profile(p, q, s, n) if p <= q
                        else extremal_profile(conjugate(p), conjugate(q), s, n))
        ratio = operator_ratio(p, q, s, c, phi, g, grid, spot.get("sign", 1))
        out.append({"N": int(N), "operator_ratio": ratio})
    return out
