"""
Command-line experiment runner.

    lab run --config experiment.cfg --p 1 --q inf --s 0.5,1,1.5 --n-list 16,32,64,128,256

The config file is a flat ``key = value`` text file whose keys are the flag
names (``n-list``, ``grid-m``, ...); ``#`` starts a comment.  Flags override
file values.  ``LAB_THREADS`` sets the number of worker threads for scans.

Exit status: 0 all checks pass, 1 a check failed, 2 configuration error,
3 runtime or domain error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import platform
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import field as fld
from . import gabor, mixed_norm, stft
from .errors import ConfigurationError, TFLabError

__all__ = ["ExperimentConfig", "Report", "parse_config", "run_experiment", "emit_report", "main"]

SCHEMA = "tflab.report/1"
CSV_VERSION = "tflab.csv/1"
CSV_COLUMNS = ("scenario", "parameters", "N", "value", "verdict")
SCENARIOS = ("identities", "norms", "lemma_scan", "sharpness", "operator_spot")
WINDOWS = ("gaussian", "bump", "plateau")
FORMATS = ("json", "csv")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3

_DEFAULT_N = {
    "lemma_scan": [16, 32, 64, 128, 256, 512, 1024],
    "sharpness": [16, 32, 64, 128, 256],
    "operator_spot": [2, 4],
}


def _exp_str(p: float) -> str:
    return "inf" if p == math.inf else repr(float(p))


@dataclass
class ExperimentConfig:
    scenario: str = "identities"
    dim: int = 1
    p: float = 1.0
    q: float = math.inf
    s: list = field(default_factory=lambda: [1.0])
    n_list: Optional[list] = None
    grid_m: Optional[int] = None
    grid_l: Optional[float] = None
    window: str = "gaussian"
    window_width: float = 1.0
    sign: int = 1
    format: str = "json"
    out: Optional[str] = None

    def validate(self) -> "ExperimentConfig":
        def bad(path, msg):
            raise ConfigurationError(f"{path}: {msg}")

        if self.scenario not in SCENARIOS:
            bad("scenario", f"must be one of {', '.join(SCENARIOS)}, got {self.scenario!r}")
        if self.dim not in (1, 2):
            bad("dim", f"must be 1 or 2, got {self.dim}")
        try:
            self.p = mixed_norm.parse_exponent(self.p)
            self.q = mixed_norm.parse_exponent(self.q)
        except ConfigurationError as e:
            bad("p/q", str(e))
        if not self.s:
            bad("s", "needs at least one value")
        self.s = [float(v) for v in self.s]
        if self.n_list is None:
            self.n_list = list(_DEFAULT_N.get(self.scenario, []))
        if not self.n_list and self.scenario in _DEFAULT_N:
            bad("n-list", "must not be empty")
        if any(int(n) != n or n < 0 for n in self.n_list):
            bad("n-list", "entries must be non-negative integers")
        self.n_list = [int(n) for n in self.n_list]
        if any(b <= a for a, b in zip(self.n_list, self.n_list[1:])):
            bad("n-list", "must be strictly increasing")
        if self.grid_m is not None and (self.grid_m % 2 or self.grid_m < 8):
            bad("grid-m", f"must be an even integer >= 8, got {self.grid_m}")
        if self.grid_l is not None and not self.grid_l > 0:
            bad("grid-l", f"must be positive, got {self.grid_l}")
        if self.window not in WINDOWS:
            bad("window", f"must be one of {', '.join(WINDOWS)}, got {self.window!r}")
        if not self.window_width > 0:
            bad("window-width", "must be positive")
        if self.sign not in (1, -1):
            bad("sign", f"must be +1 or -1, got {self.sign}")
        if self.format not in FORMATS:
            bad("format", f"must be json or csv, got {self.format!r}")
        return self

    def echo(self) -> dict:
        d = asdict(self)
        d["p"], d["q"] = _exp_str(self.p), _exp_str(self.q)
        return d


_KEYS = {
    "scenario": ("scenario", str),
    "dim": ("dim", int),
    "p": ("p", str),
    "q": ("q", str),
    "s": ("s", lambda v: [float(x) for x in _split(v)]),
    "n-list": ("n_list", lambda v: [int(x) for x in _split(v)]),
    "grid-m": ("grid_m", int),
    "grid-l": ("grid_l", float),
    "window": ("window", str),
    "window-width": ("window_width", float),
    "sign": ("sign", int),
    "format": ("format", str),
    "out": ("out", str),
}


def _split(v: str) -> list:
    v = v.strip().strip("[]")
    return [x for x in v.replace(",", " ").split() if x]


def parse_config(text: str, overrides: Optional[dict] = None) -> ExperimentConfig:
    """Parse the flat ``key = value`` format, apply flag overrides, validate."""
    raw: dict = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected 'key = value'")
        key, value = (t.strip() for t in line.split("=", 1))
        raw[key.replace("_", "-")] = value
    for key, value in (overrides or {}).items():
        if value is not None:
            raw[key.replace("_", "-")] = value
    kwargs = {}
    for key, value in raw.items():
        if key not in _KEYS:
            raise ConfigurationError(f"{key}: unknown configuration key")
        attr, conv = _KEYS[key]
        try:
            kwargs[attr] = conv(value) if isinstance(value, str) else value
        except ValueError as e:
            raise ConfigurationError(f"{key}: {e}") from None
    return ExperimentConfig(**kwargs).validate()


@dataclass
class Report:
    config: dict
    checks: list = field(default_factory=list)
    measurements: list = field(default_factory=list)
    scans: list = field(default_factory=list)
    environment: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def check(self, name: str, value: float, tolerance: float, passed: bool, **params):
        self.checks.append({"name": name, "value": float(value), "tolerance": float(tolerance),
                            "passed": bool(passed), "parameters": params})

    def measure(self, name: str, value: float, **params):
        self.measurements.append({"name": name, "value": float(value), "parameters": params})

    def payload(self, include_timings: bool = True) -> dict:
        out = {
            "schema": SCHEMA,
            "config": self.config,
            "status": "pass" if self.passed else "fail",
            "checks": self.checks,
            "measurements": self.measurements,
            "scans": self.scans,
            "environment": self.environment,
        }
        if include_timings:
            out["timings"] = self.timings
        return _clean(out)


def _clean(obj):
    """Make a payload strict-JSON safe: inf -> 'inf', nan -> None, numpy -> python."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def _space_grid(cfg: ExperimentConfig, default_l: float, default_m: int) -> fld.GridSpec:
    return fld.make_grid(cfg.dim, cfg.grid_l or default_l, cfg.grid_m or default_m)


def _window(cfg: ExperimentConfig, grid: fld.GridSpec, **kw) -> stft.Window:
    return stft.make_window(grid, cfg.window, width=cfg.window_width, **kw)


def _run_identities(cfg: ExperimentConfig, rep: Report):
    m = cfg.grid_m or (1024 if cfg.dim == 1 else 128)
    grid = fld.make_grid(cfg.dim, cfg.grid_l, m) if cfg.grid_l else stft.shear_grid(cfg.dim, m)
    rep.environment["grid"] = asdict(grid)
    f = fld.synthesize(grid, center=0.5, modulation=1.0)
    g = _window(cfg, grid)
    rep.environment["window"] = g.describe()

    rt = float(np.abs(fld.inverse_fourier(fld.forward_fourier(f)).values - f.values).max())
    rep.check("round_trip_max_error", rt, 1e-12, rt < 1e-12)
    f0 = fld.synthesize(grid)
    peak = abs(fld.forward_fourier(f0).value_at([0.0] * cfg.dim))
    rel = abs(peak - (2 * math.pi) ** (cfg.dim / 2)) / (2 * math.pi) ** (cfg.dim / 2)
    rep.check("gaussian_peak_rel_error", rel, 1e-8, rel < 1e-8)

    lat = stft.default_lattice(grid)
    for sign in (1, -1):
        r = stft.shear_residual(f, g, sign, lat)
        rep.check("shear_residual", r, 1e-6, r < 1e-6, sign=sign)
    r = stft.fourier_symmetry_residual(f, g, lat)
    rep.check("fourier_symmetry_residual", r, 1e-6, r < 1e-6)

    ref = fld.make_grid(1, 40.0, 2048)
    u = fld.apply_multiplier(fld.synthesize(ref), fld.SymbolSpec.schrodinger(cfg.sign))
    rel = abs(abs(u.value_at(0.0)) - 5 ** -0.25) / 5 ** -0.25
    rep.check("propagator_gaussian_rel_error", rel, 1e-6, rel < 1e-6, grid="L=40,M=2048")
    iso = abs(fld.l2_norm(u) - fld.l2_norm(fld.synthesize(ref))) / fld.l2_norm(fld.synthesize(ref))
    rep.check("propagator_l2_rel_deviation", iso, 1e-12, iso < 1e-12)


def _run_norms(cfg: ExperimentConfig, rep: Report):
    grid = _space_grid(cfg, 16.0, 256 if cfg.dim == 1 else 64)
    rep.environment["grid"] = asdict(grid)
    f = fld.normalize(fld.synthesize(grid))
    g = _window(cfg, grid, normalized=True)
    rep.environment["window"] = g.describe()
    tf = stft.stft(f, g, stft.default_lattice(grid))
    moyal = mixed_norm.tf_norm(tf, mixed_norm.NormSpec.make(2, 2))
    target = (2 * math.pi) ** (cfg.dim / 2)
    rel = abs(moyal - target) / target
    rep.check("moyal_rel_error", rel, 1e-4, rel < 1e-4, window=cfg.window)
    for p in (1.0, 2.0, math.inf):
        a = mixed_norm.tf_norm(tf, mixed_norm.NormSpec.make(p, p, flavor="modulation"))
        b = mixed_norm.tf_norm(tf, mixed_norm.NormSpec.make(p, p, flavor="amalgam"))
        d = abs(a - b) / a
        rep.check("flavor_coincidence_rel", d, 1e-12, d < 1e-12, p=_exp_str(p))
    for s in cfg.s:
        for flavor in ("modulation", "amalgam"):
            v = mixed_norm.tf_norm(tf, mixed_norm.NormSpec.make(cfg.p, cfg.q, s, flavor=flavor))
            rep.measure(f"{flavor}_norm", v, p=_exp_str(cfg.p), q=_exp_str(cfg.q), s=s)


def _run_lemma_scan(cfg: ExperimentConfig, rep: Report):
    for sr in gabor.sharpness_scan(cfg.p, cfg.q, cfg.s, cfg.n_list, n=cfg.dim):
        rep.scans.append(sr.to_dict())
        for N, r, b in zip(sr.axis_values, sr.ratios, sr.bounds):
            rep.check("holder_bound", r / b, 1.0 + 1e-12, r <= b * (1 + 1e-12), s=sr.s, N=N)


def _run_sharpness(cfg: ExperimentConfig, rep: Report):
    thr = gabor.threshold(cfg.p, cfg.q, cfg.dim)
    rep.environment["threshold"] = thr
    for sr in gabor.sharpness_scan(cfg.p, cfg.q, cfg.s, cfg.n_list, n=cfg.dim):
        rep.scans.append(sr.to_dict())
        if cfg.p == cfg.q:
            expected = "bounded" if sr.s >= 0 else "growing"
        else:
            expected = "bounded" if sr.s > thr else "growing"
        rep.check("verdict_matches_threshold", float(sr.verdict == expected), 0.0,
                  sr.verdict == expected, s=sr.s, verdict=sr.verdict, expected=expected)


def _run_operator_spot(cfg: ExperimentConfig, rep: Report):
    s = cfg.s[0]
    ratios = []
    for N in cfg.n_list:
        grid = fld.make_grid(cfg.dim, cfg.grid_l, cfg.grid_m) if cfg.grid_l and cfg.grid_m \
            else gabor.operator_grid(N, cfg.dim)
        phi = stft.make_window(grid, "bump", side="frequency")
        g = _window(cfg, grid)
        rep.environment.setdefault("grids", []).append(dict(asdict(grid), N=N))
        rep.environment.setdefault("bump_certificates", []).append(
            {k: phi.certified_props[k] for k in ("lower_bound", "transform_at_zero")})
        c = gabor.make_coeffs(cfg.dim, N, "constant")
        r = gabor.operator_ratio(cfg.p, cfg.q, s, c, phi, g, grid, cfg.sign)
        ratios.append(r)
        rep.measure("operator_ratio", r, p=_exp_str(cfg.p), q=_exp_str(cfg.q), s=s, N=N)
        if cfg.p == cfg.q and s == 0:
            rep.check("unitarity", abs(r - 1), 1e-6, abs(r - 1) <= 1e-6, N=N)
    rep.environment["window"] = cfg.window
    if len(ratios) > 1:
        rep.measure("growth_factor_last_over_first", ratios[-1] / ratios[0],
                    N_first=cfg.n_list[0], N_last=cfg.n_list[-1])


_RUNNERS = {
    "identities": _run_identities,
    "norms": _run_norms,
    "lemma_scan": _run_lemma_scan,
    "sharpness": _run_sharpness,
    "operator_spot": _run_operator_spot,
}


def run_experiment(config: ExperimentConfig) -> Report:
    """Run one scenario; deterministic for a fixed config (timings aside)."""
    config.validate()
    rep = Report(config=config.echo())
    rep.environment.update(
        numpy=np.__version__,
        python=platform.python_version(),
        threads=int(os.environ.get("LAB_THREADS", "1") or 1),
    )
    t0 = time.perf_counter()
    try:
        _RUNNERS[config.scenario](config, rep)
    except TFLabError as e:
        raise type(e)(f"scenario {config.scenario}: {e}") from e
    rep.timings["total_seconds"] = time.perf_counter() - t0
    return rep


def _csv_rows(payload: dict) -> list:
    scen = payload["config"]["scenario"]
    rows = []
    if payload["scans"]:
        for sc in payload["scans"]:
            params = f"p={sc['p']};q={sc['q']};s={sc['s']};n={sc['dimension']}"
            for N, r in zip(sc["axis_values"], sc["ratios"]):
                rows.append((scen, params, N, repr(r), sc["verdict"]))
        return rows
    for ch in payload["checks"]:
        params = ";".join(f"{k}={v}" for k, v in sorted(ch["parameters"].items()))
        rows.append((scen, f"{ch['name']};{params}" if params else ch["name"],
                     ch["parameters"].get("N", ""), repr(ch["value"]),
                     "pass" if ch["passed"] else "fail"))
    for m in payload["measurements"]:
        params = ";".join(f"{k}={v}" for k, v in sorted(m["parameters"].items()))
        rows.append((scen, f"{m['name']};{params}" if params else m["name"],
                     m["parameters"].get("N", ""), repr(m["value"]), ""))
    return rows


def render_report(report, fmt: str = "json") -> str:
    """Serialize a :class:`Report` (or an already parsed payload dict).

    JSON is the full payload with sorted keys; CSV has one row per
    (parameter tuple, N) for scan scenarios and one row per check or
    measurement otherwise, after a versioned header comment.
    """
    payload = report.payload() if isinstance(report, Report) else _clean(report)
    if fmt == "json":
        return json.dumps(payload, sort_keys=True, indent=2, allow_nan=False) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        buf.write(f"# {CSV_VERSION} columns: {','.join(CSV_COLUMNS)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        w.writerows(_csv_rows(payload))
        return buf.getvalue()
    raise ConfigurationError(f"format: must be json or csv, got {fmt!r}")


def emit_report(report, fmt: str, path) -> Path:
    path = Path(path)
    text = render_report(report, fmt)
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise OSError(f"cannot write report to {path}: {e.strerror or e}") from e
    return path


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lab", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one experiment scenario")
    run.add_argument("--config", type=Path, help="flat key = value config file")
    run.add_argument("--scenario", choices=SCENARIOS)
    for flag in ("p", "q", "s", "n-list", "grid-m", "grid-l", "dim", "window",
                 "window-width", "sign", "format", "out"):
        run.add_argument(f"--{flag}", dest=flag.replace("-", "_"))
    run.add_argument("--quiet", action="store_true")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    overrides = {k: v for k, v in vars(args).items()
                 if k not in ("command", "config", "quiet") and v is not None}
    try:
        text = args.config.read_text(encoding="utf-8") if args.config else ""
        cfg = parse_config(text, overrides)
    except (ConfigurationError, OSError) as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        report = run_experiment(cfg)
    except ConfigurationError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (TFLabError, ArithmeticError, ValueError) as e:
        print(f"runtime error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    if not args.quiet:
        for ch in report.checks:
            mark = "PASS" if ch["passed"] else "FAIL"
            params = " ".join(f"{k}={v}" for k, v in sorted(ch["parameters"].items()))
            print(f"{mark} {ch['name']} value={ch['value']:.6g} tol={ch['tolerance']:.3g} {params}")
        for sc in report.scans:
            print(f"scan p={_exp_str(sc['p']) if not isinstance(sc['p'], str) else sc['p']} "
                  f"q={sc['q']} s={sc['s']}: {sc['verdict']}")
    if cfg.out:
        try:
            emit_report(report, cfg.format, cfg.out)
        except OSError as e:
            print(f"runtime error: {e}", file=sys.stderr)
            return EXIT_RUNTIME
    elif args.quiet:
        pass
    else:
        sys.stdout.write(render_report(report, cfg.format))
    return EXIT_OK if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
