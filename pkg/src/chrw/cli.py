"""Command-line frontend writing CSV results with a JSON metadata sidecar.

Frequencies, amplitudes and times are in units of omega1 (times as omega1 t).
Grids are written ``start:stop:count`` and include both ends.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ChrwError, DimensionOverflow, NoConvergence
from .model import DriveParams
from .resonance import band_map, d_scan, find_resonances, parallel_map
from .solvers import SolverRequest, run_averaged, run_transient
from .solvers.gft import GFT_SCHEDULE, gft_dimension, gft_transient
from .solvers.rk import rk_transient
from .solvers.rotating import chrw_transient
from .solvers.types import Method

COMMANDS = ("dscan", "pbar-scan", "dynamics", "resonance", "bandmap", "benchmark")
WORKERS_ENV = "CHRW_WORKERS"
EXIT_OK, EXIT_USAGE, EXIT_IO = 0, 2, 5
BENCHMARK_CAP = 4000
FULL_CAP = 16562
FULL_TRUNCATION = 45

# option name -> (type, default); None means required for commands that use it
OPTIONS = {
    "omega0": (str, None),
    "a1": (str, None),
    "r": (float, 1.0),
    "delta": (float, 0.2),
    "omega1": (float, 1.0),
    "phi1": (float, 0.0),
    "phi2": (float, 0.0),
    "method": (str, "chrw"),
    "output": (str, None),
    "truncation": (int, None),
    "truncation2": (int, None),
    "t0": (float, 0.0),
    "tmax": (float, 600.0),
    "points": (int, 2001),
    "d_tol": (float, 1e-10),
    "bracket_width": (float, 1e-7),
    "workers": (int, None),
    "gft_cap": (int, BENCHMARK_CAP),
    "full": (bool, False),
}


class UsageError(Exception):
    exit_code = EXIT_USAGE


@dataclass(frozen=True)
class Grid:
    start: float
    stop: float
    count: int

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([self.start])
        return np.linspace(self.start, self.stop, self.count)


@dataclass
class RunConfig:
    command: str
    omega0: Grid | None = None
    a1: Grid | None = None
    r: float = 1.0
    delta: float = 0.2
    omega1: float = 1.0
    phi1: float = 0.0
    phi2: float = 0.0
    methods: tuple = ("chrw",)
    output: str = ""
    truncation: int | None = None
    truncation2: int | None = None
    t0: float = 0.0
    tmax: float = 600.0
    points: int = 2001
    d_tol: float = 1e-10
    bracket_width: float = 1e-7
    workers: int = 1
    gft_cap: int = BENCHMARK_CAP
    full: bool = False
    extra: dict = field(default_factory=dict)

    def params(self, omega0: float, a1: float | None = None) -> DriveParams:
        amp = self.a1.start if a1 is None else a1
        return DriveParams.from_ratio(omega0, amp, self.r, self.delta, self.omega1, self.phi1, self.phi2)


def parse_grid(text: str, name: str, default_count: int = 1) -> Grid:
    """``x`` or ``start:stop`` or ``start:stop:count``."""
    parts = str(text).split(":")
    try:
        if len(parts) == 1:
            value = float(parts[0])
            return Grid(value, value, 1)
        if len(parts) in (2, 3):
            count = int(parts[2]) if len(parts) == 3 else default_count
            grid = Grid(float(parts[0]), float(parts[1]), count)
        else:
            raise ValueError
    except ValueError:
        raise UsageError(f"--{name}: expected start:stop:count, got {text!r}") from None
    if grid.count == 0 and default_count == 0 and grid.start < grid.stop:
        return grid  # count chosen by the caller
    if grid.count < 1 or (grid.count > 1 and not grid.start < grid.stop):
        raise UsageError(f"--{name}: need count >= 1 and start < stop")
    return grid


def read_config_file(path: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc.strerror}") from None
    for number, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{number}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in OPTIONS:
            raise UsageError(f"{path}:{number}: unknown key {key!r}")
        values[key] = value
    return values


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="chrw", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="file of key=value lines; flags take precedence")
    for name, (kind, _) in OPTIONS.items():
        flags = ["--" + name.replace("_", "-")] + (["-o"] if name == "output" else [])
        if kind is bool:
            parser.add_argument(*flags, action="store_true", default=None)
        else:
            parser.add_argument(*flags, default=None)
    return parser


def _convert(name: str, value):
    kind = OPTIONS[name][0]
    if kind is bool:
        if isinstance(value, bool):
            return value
        if str(value).lower() in ("1", "true", "yes", "on"):
            return True
        if str(value).lower() in ("0", "false", "no", "off"):
            return False
        raise UsageError(f"{name}: expected a boolean, got {value!r}")
    try:
        return kind(value)
    except ValueError:
        raise UsageError(f"--{name.replace('_', '-')}: invalid value {value!r}") from None


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"{WORKERS_ENV} must be an integer") from None
    return os.cpu_count() or 1


def parse_config(argv) -> RunConfig:
    args = build_parser().parse_args(argv)
    merged = read_config_file(args.config) if args.config else {}
    for name in OPTIONS:
        value = getattr(args, name)
        if value is not None:
            merged[name] = value
    values = {}
    for name, (_, default) in OPTIONS.items():
        values[name] = _convert(name, merged[name]) if name in merged else default
    cmd = args.command
    if values["omega0"] is None:
        raise UsageError("missing required --omega0")
    if values["a1"] is None:
        raise UsageError("missing required --a1")
    methods = tuple(m.strip().lower() for m in str(values["method"]).split(",") if m.strip())
    for m in methods:
        try:
            Method.parse(m)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    if not methods:
        raise UsageError("--method is empty")
    scan_count = 181 if cmd in ("dscan", "pbar-scan", "bandmap") else 0
    omega0 = parse_grid(merged["omega0"], "omega0", scan_count)
    a1 = parse_grid(values["a1"], "a1", scan_count or 1)
    if a1.start < 0 or values["r"] < 0:
        raise UsageError("amplitudes must be nonnegative")
    if cmd in ("dynamics", "benchmark") and omega0.count != 1:
        raise UsageError(f"{cmd} takes a single --omega0")
    if cmd == "resonance":
        if omega0.count == 1 and omega0.start == omega0.stop:
            raise UsageError("resonance needs an --omega0 range start:stop[:count]")
        if not set(methods) <= {"chrw", "rwa"}:
            raise UsageError("resonance supports --method chrw or rwa")
    if cmd == "dscan" and not set(methods) <= {"chrw", "rwa"}:
        raise UsageError("dscan supports --method chrw or rwa")
    if cmd in ("pbar-scan", "bandmap") and "rk" in methods:
        raise UsageError("the rk backend has no time average")
    if cmd == "bandmap" and len(methods) != 1:
        raise UsageError("bandmap takes exactly one --method")
    if cmd != "bandmap" and a1.count != 1:
        raise UsageError("only bandmap takes an --a1 grid")
    if cmd in ("dynamics", "benchmark") and (values["points"] < 1 or values["tmax"] <= values["t0"]):
        raise UsageError("need --points >= 1 and --tmax > --t0")
    output = values["output"] or f"{cmd}.csv"
    workers = values["workers"] if values["workers"] is not None else default_workers()
    return RunConfig(
        command=cmd, omega0=omega0, a1=a1, r=values["r"], delta=values["delta"],
        omega1=values["omega1"], phi1=values["phi1"], phi2=values["phi2"], methods=methods,
        output=output, truncation=values["truncation"], truncation2=values["truncation2"],
        t0=values["t0"], tmax=values["tmax"], points=values["points"], d_tol=values["d_tol"],
        bracket_width=values["bracket_width"], workers=max(1, workers), gft_cap=values["gft_cap"],
        full=values["full"],
    )


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return "nan" if math.isnan(x) else f"{float(x):.15g}"
    return str(x)


def _averaged_point(args):
    params, method, n1, n2 = args
    try:
        res = run_averaged(SolverRequest(params, method, truncation=n1, truncation2=n2))
        return res.p_bar, res.truncation_used, None
    except ChrwError as exc:
        return math.nan, None, exc


def _status(exc) -> str:
    return "ok" if exc is None else type(exc).__name__


def run_dscan(cfg: RunConfig):
    grid = cfg.omega0.values()
    columns = {m: d_scan(cfg.params(grid[0]), grid, m, cfg.workers) for m in cfg.methods}
    header = ["omega0"] + [f"d_{m}" for m in cfg.methods] + ["status"]
    rows, failed = [], False
    for i, w in enumerate(grid):
        ds = [columns[m][i][1] for m in cfg.methods]
        bad = any(math.isnan(d) for d in ds)
        failed |= bad
        rows.append([w, *ds, "NoConvergence" if bad else "ok"])
    return header, rows, ([NoConvergence("d unavailable at some grid points")] if failed else []), {}


def run_pbar_scan(cfg: RunConfig):
    grid = cfg.omega0.values()
    errors, meta = [], {"truncations": {}}
    results = {}
    for m in cfg.methods:
        jobs = [(cfg.params(w), m, cfg.truncation, cfg.truncation2) for w in grid]
        results[m] = parallel_map(_averaged_point, jobs, cfg.workers)
        meta["truncations"][m] = [r[1] for r in results[m]]
    header = ["omega0"] + [f"pbar_{m}" for m in cfg.methods] + ["status"]
    rows = []
    for i, w in enumerate(grid):
        excs = [results[m][i][2] for m in cfg.methods]
        errors += [e for e in excs if e is not None]
        status = next((_status(e) for e in excs if e is not None), "ok")
        rows.append([w, *[results[m][i][0] for m in cfg.methods], status])
    return header, rows, errors, meta


def run_dynamics(cfg: RunConfig):
    times = np.linspace(cfg.t0, cfg.tmax, cfg.points)
    params = cfg.params(cfg.omega0.start)
    series, meta = {}, {}
    for m in cfg.methods:
        res = run_transient(SolverRequest(params, m, cfg.t0, times, cfg.truncation, cfg.truncation2))
        series[m] = res.values
        meta[m] = {k: v for k, v in res.info.items()}
    names = ["P"] if len(cfg.methods) == 1 else [f"P_{m}" for m in cfg.methods]
    rows = [[t, *[series[m][i] for m in cfg.methods]] for i, t in enumerate(times)]
    return ["t_omega1", *names], rows, [], meta


def run_resonance(cfg: RunConfig):
    params = cfg.params(cfg.omega0.start)
    count = cfg.omega0.count if cfg.omega0.count > 1 else None
    rows = []
    for m in cfg.methods:
        found = find_resonances(params, (cfg.omega0.start, cfg.omega0.stop), count, cfg.d_tol, m,
                                cfg.bracket_width, cfg.workers)
        rows += [[p.omega0_star, p.A1, m, p.bracket_width_final, p.d_value,
                  "ok" if p.resolved else "unresolved"] for p in found]
    return ["omega0_star", "a1", "method", "bracket_width", "d", "status"], rows, [], {}


def run_bandmap(cfg: RunConfig):
    w0, a1 = cfg.omega0.values(), cfg.a1.values()
    # a nonzero template amplitude carries the ratio r into every row
    bm = band_map(cfg.params(w0[0], 1.0), w0, a1, cfg.methods[0], cfg.workers)
    rows, errors = [], []
    for i, a in enumerate(a1):
        for j, w in enumerate(w0):
            status = bm.status[i, j]
            if status != "ok":
                errors.append(status)
            rows.append([w, a, bm.p_bar[i, j], status])
    return ["omega0", "a1", "pbar", "status"], rows, errors, {}


def run_benchmark(cfg: RunConfig):
    """CHRW at its converged truncation against GFT on a growing truncation schedule, both vs RK."""
    params = cfg.params(cfg.omega0.start)
    times = np.linspace(cfg.t0, cfg.tmax, cfg.points)
    reference = rk_transient(params, cfg.t0, times).values
    rows = []
    start = time.perf_counter()
    chrw = chrw_transient(params, cfg.t0, times, cfg.truncation)
    chrw_time = time.perf_counter() - start
    rows.append(["chrw", chrw.info["truncation"], chrw.info["dimension"], chrw_time,
                 float(np.max(np.abs(chrw.values - reference))), "ok"])
    cap = FULL_CAP if cfg.full else cfg.gft_cap
    schedule = sorted({n for n in GFT_SCHEDULE if gft_dimension(n, n) <= cap}
                      | ({FULL_TRUNCATION} if cfg.full else set()))
    gft_points = []
    for n in schedule:
        start = time.perf_counter()
        try:
            res = gft_transient(params, cfg.t0, times, n, n, cap=cap)
        except DimensionOverflow:
            break
        elapsed = time.perf_counter() - start
        dev = float(np.max(np.abs(res.values - reference)))
        gft_points.append((gft_dimension(n, n), elapsed))
        rows.append(["gft", n, gft_dimension(n, n), elapsed, dev, "ok"])
    meta = {"chrw_seconds": chrw_time}
    if gft_points:
        largest = gft_points[-1]
        meta["speedup"] = largest[1] / chrw_time
        meta["gft_largest_dimension"] = largest[0]
        if len(gft_points) >= 2:
            dims, secs = np.log([p[0] for p in gft_points[-3:]]), np.log([p[1] for p in gft_points[-3:]])
            slope, icpt = np.polyfit(dims, secs, 1)
            meta["gft_time_exponent"] = float(slope)
            meta[f"gft_seconds_extrapolated_dim{FULL_CAP}"] = float(math.exp(icpt + slope * math.log(FULL_CAP)))
    header = ["method", "truncation", "dimension", "seconds", "max_dev_vs_rk", "status"]
    return header, rows, [], meta


RUNNERS = {
    "dscan": run_dscan,
    "pbar-scan": run_pbar_scan,
    "dynamics": run_dynamics,
    "resonance": run_resonance,
    "bandmap": run_bandmap,
    "benchmark": run_benchmark,
}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _exit_code(errors) -> int:
    for err in errors:
        if isinstance(err, ChrwError):
            return err.exit_code
        if isinstance(err, str):
            from . import errors as errmod

            cls = getattr(errmod, err, None)
            return getattr(cls, "exit_code", 1)
    return EXIT_OK


def run(cfg: RunConfig) -> int:
    start = time.perf_counter()
    header, rows, errors, meta = RUNNERS[cfg.command](cfg)
    elapsed = time.perf_counter() - start
    out = Path(cfg.output)
    sidecar = out.with_suffix(".json")
    config = asdict(cfg)
    config.pop("extra")
    try:
        with out.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows([[fmt(x) for x in row] for row in rows])
        sidecar.write_text(json.dumps(_jsonable({
            "version": __version__,
            "config": config,
            "units": "frequencies and amplitudes in omega1, times as omega1*t",
            "wall_seconds": elapsed,
            "rows": len(rows),
            "results": meta,
        }), indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        print(f"chrw: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {out} ({len(rows)} rows) and {sidecar}")
    return _exit_code(errors)


def main(argv=None) -> int:
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else argv)
    except UsageError as exc:
        print(f"chrw: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return run(cfg)
    except ChrwError as exc:
        print(f"chrw: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
