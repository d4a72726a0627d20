"""Seeded experiment runners and the report writer.

Every experiment yields a list of flat row dicts. Sample ``i`` is drawn
with seed ``config.seed + i``, so rows depend only on the config. Floats
are written with 17 significant digits, so identical configs give
byte-identical files. Wall-clock time is kept out of the files.
"""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.signal import resample

from .bekenstein import check_localized
from .bumps import random_cauchy_data, random_field
from .config import ExperimentConfig, validate
from .entropy import (entropy_balance_terms, halfspace_entropy, qdec_profile,
                      wedge_convexity_check, wedge_entropy)
from .errors import ConfigInvalid, WaveboundError
from .gamma import BoundaryData, ExteriorProblem, gamma
from .grid import GridSpec
from .regions import Ball, WedgeVertex
from .spectral_bounds import lambda1, sign_changes
from .u1 import (CurrentProfile, ant_check, balance_check, dilation_flow_check,
                 dual_norm, halfline_entropy, interval_entropy, u1_norm)

THREADS_ENV = "WAVEBOUND_THREADS"
# distance of B from the plane (in radii) for flux cross-checks
GAMMA_MARGIN = 0.5
FAIL = "FAIL"


@dataclass
class RunReport:
    name: str
    seed: int
    rows: list = field(default_factory=list)
    convergence: list = field(default_factory=list)
    wall_clock: float = 0.0

    @property
    def verdicts(self) -> dict:
        out: dict = {}
        for r in self.rows + self.convergence:
            v = r.get("verdict")
            if v:
                out[v] = out.get(v, 0) + 1
        return out

    @property
    def failed(self) -> bool:
        return FAIL in self.verdicts

    def summary(self, config: ExperimentConfig | None = None) -> dict:
        out = {"experiment": self.name, "seed": self.seed, "rows": len(self.rows),
               "verdicts": dict(sorted(self.verdicts.items())), "failed": self.failed}
        if config is not None:
            out["config"] = {k: _jsonable(v) for k, v in config.__dict__.items()
                             if k != "output"}
        if self.convergence:
            out["convergence"] = self.convergence
        return out


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _jsonable(v):
    if isinstance(v, tuple):
        return list(v)
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return v


def _map(fn, items, threads: int):
    """Ordered map; each failure is re-raised with its index."""
    def wrapped(pair):
        i, item = pair
        try:
            return fn(item)
        except WaveboundError as exc:
            raise type(exc)(f"sample {i}: {exc}") from exc

    pairs = list(enumerate(items))
    if threads <= 1:
        return [wrapped(p) for p in pairs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(wrapped, pairs))


# --- experiments -------------------------------------------------------------

def _bekenstein(cfg: ExperimentConfig, threads: int) -> list:
    region = cfg.make_region()

    def one(job):
        N, i = job
        grid = GridSpec(cfg.dim, N, cfg.extent)
        seed = cfg.seed + i
        base = random_cauchy_data(grid, cfg.masses[0], seed, region)
        rows = []
        for m in cfg.masses:
            rep = check_localized(base.replace(m=m), region, cfg.tolerance)
            rows.append({"N": N, "sample": i, "seed": seed, "m": m, **rep.as_row()})
        return rows

    jobs = [(N, i) for N in cfg.sizes for i in range(cfg.samples)]
    return [r for rows in _map(one, jobs, threads) for r in rows]


def _boundary_sample(d: int, n: int, rng: np.random.Generator) -> BoundaryData:
    if d == 1:
        return BoundaryData(rng.uniform(-1, 1, 2), 1)
    th = 2 * np.pi * np.arange(n) / n
    a = rng.uniform(-1, 1, 5)
    b = rng.uniform(-1, 1, 5)
    vals = sum(a[k] * np.cos(k * th) + b[k] * np.sin(k * th) for k in range(5))
    return BoundaryData(vals, 2)


def _gamma(cfg: ExperimentConfig, threads: int) -> list:
    R = cfg.make_region().half_width

    def one(job):
        m, n, i = job
        rng = np.random.default_rng(cfg.seed + i)
        h = _boundary_sample(cfg.dim, n, rng)
        if cfg.dim == 1:
            p = ExteriorProblem.for_ball(R, m, 1, margin=GAMMA_MARGIN, delta=1.0 / n)
        else:
            p = ExteriorProblem.for_ball(R, m, 2, n_theta=n, margin=GAMMA_MARGIN)
        res = gamma(p, h, extrapolate=(m == 0), richardson=(cfg.dim == 2))
        ok = res.flux_mismatch <= cfg.tolerance and res.value >= 0
        return {"m": m, "size": n, "sample": i, "seed": cfg.seed + i,
                "gamma": res.value, "gamma_best": res.best,
                "flux_variational": res.flux_variational,
                "flux_geometric": res.flux_geometric, "L_out": res.L_out,
                "flux_mismatch": res.flux_mismatch, "tol": cfg.tolerance,
                "verdict": "PASS" if ok else FAIL}

    jobs = [(m, n, i) for m in cfg.masses for n in cfg.sizes for i in range(cfg.samples)]
    return _map(one, jobs, threads)


def _eigen(cfg: ExperimentConfig, threads: int) -> list:
    def one(n):
        res = lambda1(cfg.dim, n, cfg.extrapolate)
        lam = res.extrapolated if res.extrapolated is not None else res.value
        bound = cfg.dim - 1
        return {"d": cfg.dim, "n": n, "lambda": res.value, "lambda_2n": res.value_2n,
                "extrapolated": res.extrapolated,
                "quotient": res.mesh.quotient(res.vector),
                "sign_changes": sign_changes(res.vector), "lower_bound": bound,
                "tol": cfg.tolerance,
                "verdict": "PASS" if lam >= bound - cfg.tolerance else FAIL}

    return _map(one, cfg.sizes, threads)


def load_profile(path) -> CurrentProfile:
    """Profile from a CSV with header ``x,f`` on a uniform periodic grid."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    x, f = data[:, 0], data[:, 1]
    N = x.size
    dx = np.diff(x)
    if N < 16 or N & (N - 1) or not np.allclose(dx, dx[0], rtol=1e-9, atol=0):
        raise ConfigInvalid("profile file needs a uniform grid with 2^k points")
    L = -float(x[0])
    if not np.isclose(N * dx[0], 2 * L, rtol=1e-9):
        raise ConfigInvalid("profile grid must cover [-L, L)")
    return CurrentProfile(f, GridSpec(1, N, L))


def _u1_profiles(cfg: ExperimentConfig):
    if cfg.profile_file:
        return [(-1, load_profile(cfg.profile_file))]
    out = []
    for N in cfg.sizes:
        grid = GridSpec(1, N, cfg.extent)
        for i in range(cfg.samples):
            rng = np.random.default_rng(cfg.seed + i)
            vals = random_field(grid, rng, Ball((0.0,), 0.6 * cfg.extent))
            out.append((i, CurrentProfile(vals, grid)))
    return out


def _u1(cfg: ExperimentConfig, threads: int) -> list:
    cuts = cfg.cuts or (-0.5, 0.0, 0.5)
    pair = cfg.balance or (cuts[0], cuts[-1])

    def one(job):
        i, f = job
        base = {"sample": i, "N": f.grid.N, "L": f.grid.L}
        rows = []
        for a in cuts:
            row = {**base, "kind": "cut", "cut": a,
                   "S_right": halfline_entropy(f, a, ">"),
                   "S_left": halfline_entropy(f, a, "<")}
            ok = True
            if cfg.ant:
                rep = ant_check(f, a)
                row.update(ant_fd=rep.fd_derivative, ant_formula=rep.formula,
                           ant_error=rep.fd_error, ant_minimizer_gap=rep.minimizer_attains,
                           ant_competitors_dominate=rep.competitors_dominate)
                scale = max(abs(rep.formula), 1.0)
                ok = rep.fd_error <= cfg.tolerance * scale and rep.competitors_dominate
            row["verdict"] = "PASS" if ok else FAIL
            rows.append(row)
        norm, dual = u1_norm(f), dual_norm(f)
        bal = balance_check(f, *pair)
        dil = dilation_flow_check(f, 0.5)
        ient = interval_entropy(f, cfg.interval)
        ok = (abs(norm - dual) <= 1e-8 * max(abs(norm), 1e-300)
              and bal.relative <= 1e-8 and abs(dil) <= cfg.tolerance * max(ient, 1.0))
        rows.append({**base, "kind": "profile", "norm": norm, "dual_norm": dual,
                     "interval_a": cfg.interval[0], "interval_b": cfg.interval[1],
                     "interval_entropy": ient, "balance_a": pair[0], "balance_b": pair[1],
                     "balance_residual": bal.residual, "balance_relative": bal.relative,
                     "plancherel_mismatch": bal.plancherel_mismatch,
                     "dilation_residual": dil, "verdict": "PASS" if ok else FAIL})
        return rows

    return [r for rows in _map(one, _u1_profiles(cfg), threads) for r in rows]


def _random_vertex(rng, span):
    return WedgeVertex(*rng.uniform(-span, span, 2))


def _spacelike_right(rng, span):
    t = rng.uniform(-span, span)
    return (t, abs(t) + rng.uniform(0.05, 1.0) * span)


def _balance(cfg: ExperimentConfig, threads: int) -> list:
    region = cfg.make_region()
    span = 0.25 * region.half_width

    def one(job):
        N, m, i = job
        grid = GridSpec(1, N, cfg.extent)
        a = random_cauchy_data(grid, m, cfg.seed + i, region)
        rng = np.random.default_rng(cfg.seed + i + 10_000_019)
        x, y = _random_vertex(rng, span), _random_vertex(rng, span)
        res, scale = entropy_balance_terms(a, x, y)
        r, s = _spacelike_right(rng, span), _spacelike_right(rng, span)
        gap = wedge_convexity_check(a, x, r, s)
        cscale = max(abs(wedge_entropy(a, x)), np.finfo(float).tiny)
        rel = abs(res) / scale if scale else 0.0
        ok = rel <= cfg.tolerance and gap >= -1e-8 * cscale
        return {"N": N, "m": m, "sample": i, "seed": cfg.seed + i,
                "x0": x.x0, "x1": x.x1, "y0": y.x0, "y1": y.x1,
                "residual": res, "scale": scale, "relative": rel,
                "r0": r[0], "r1": r[1], "s0": s[0], "s1": s[1],
                "convexity_gap": gap, "tol": cfg.tolerance,
                "verdict": "PASS" if ok else FAIL}

    jobs = [(N, m, i) for N in cfg.sizes for m in cfg.masses for i in range(cfg.samples)]
    return _map(one, jobs, threads)


def _qdec(cfg: ExperimentConfig, threads: int) -> list:
    region = cfg.make_region()
    R = region.half_width
    cuts = cfg.cuts or tuple(np.linspace(-R, R, 9)[1:-1])

    def one(job):
        N, m, i = job
        grid = GridSpec(cfg.dim, N, cfg.extent)
        a = random_cauchy_data(grid, m, cfg.seed + i, region)
        prof = qdec_profile(a, 0, cuts)
        scale = max(max(abs(r.curvature) for r in prof), np.finfo(float).tiny)
        rows = []
        for r in prof:
            err = abs(r.second_difference - r.curvature) / scale
            ok = r.slice_integral >= -1e-12 * scale and err <= cfg.tolerance
            rows.append({"N": N, "m": m, "sample": i, "seed": cfg.seed + i,
                         "cut": r.cut, "S": r.entropy, "slice_integral": r.slice_integral,
                         "second_difference": r.second_difference,
                         "curvature": r.curvature, "relative_error": err,
                         "tol": cfg.tolerance, "verdict": "PASS" if ok else FAIL})
        return rows

    jobs = [(N, m, i) for N in cfg.sizes for m in cfg.masses for i in range(cfg.samples)]
    return [r for rows in _map(one, jobs, threads) for r in rows]


def load_boundary(path, d: int) -> BoundaryData:
    """Boundary samples from a CSV with header ``angle,value``.

    ``d = 2`` needs equispaced angles starting at 0. In ``d = 1`` the two
    rows are the left and right endpoint values.
    """
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if d == 2:
        n = data.shape[0]
        if not np.allclose(data[:, 0], 2 * np.pi * np.arange(n) / n, atol=1e-9):
            raise ConfigInvalid("boundary angles must be 2 pi k / n")
    try:
        return BoundaryData(data[:, 1], d)
    except ValueError as exc:
        raise ConfigInvalid(str(exc)) from exc


def _resample(h: BoundaryData, n: int) -> BoundaryData:
    if h.d == 1 or n == h.size:
        return h
    return BoundaryData(resample(h.values, n), 2)


def gamma_table(h: BoundaryData, radius: float, m: float, L_out: float | None = None,
                refine: int = 0, tol: float = 1e-4) -> list:
    """Gamma and its flux cross-check on ``refine + 1`` doubling meshes."""
    rows = []
    for k in range(refine + 1):
        if h.d == 1:
            p = ExteriorProblem.for_ball(radius, m, 1, margin=GAMMA_MARGIN, L_out=L_out,
                                         delta=2e-3 / 2**k)
            hk = h
        else:
            hk = _resample(h, h.size * 2**k)
            p = ExteriorProblem.for_ball(radius, m, 2, n_theta=hk.size, margin=GAMMA_MARGIN,
                                         L_out=L_out)
        res = gamma(p, hk, extrapolate=(m == 0), richardson=(h.d == 2))
        rows.append({"level": k, "size": hk.size if h.d == 2 else p.nodes.size, "m": m,
                     "L_out": res.L_out, "gamma": res.value, "gamma_best": res.best,
                     "flux_variational": res.flux_variational,
                     "flux_geometric": res.flux_geometric,
                     "flux_mismatch": res.flux_mismatch, "tol": tol,
                     "verdict": "PASS" if res.flux_mismatch <= tol else FAIL})
    return rows


RUNNERS = {"bekenstein": _bekenstein, "gamma": _gamma, "eigen": _eigen, "u1": _u1,
           "balance": _balance, "qdec": _qdec}


def run(cfg: ExperimentConfig, threads: int | None = None) -> RunReport:
    """Run the configured experiment; the config is re-validated first."""
    cfg = validate(cfg)
    threads = default_threads() if threads is None else max(1, threads)
    t0 = time.perf_counter()
    rows = RUNNERS[cfg.name](cfg, threads)
    return RunReport(cfg.name, cfg.seed, rows, wall_clock=time.perf_counter() - t0)


# --- convergence -------------------------------------------------------------

SPECTRAL, SECOND_ORDER = "spectral", "second-order"


def _sweep_quantity(cfg: ExperimentConfig):
    """``(quantity(level_size), expectation)`` for the experiment."""
    region = cfg.make_region() if cfg.name in ("bekenstein", "qdec", "balance") else None
    m = cfg.masses[0]
    if cfg.name in ("bekenstein", "qdec"):
        def q(N):
            a = random_cauchy_data(GridSpec(cfg.dim, N, cfg.extent), m, cfg.seed, region)
            return halfspace_entropy(a, 0, 0.0)
        return q, SPECTRAL
    if cfg.name == "balance":
        def q(N):
            a = random_cauchy_data(GridSpec(1, N, cfg.extent), m, cfg.seed, region)
            return wedge_entropy(a, WedgeVertex(0.0, 0.0))
        return q, SPECTRAL
    if cfg.name == "u1":
        def q(N):
            grid = GridSpec(1, N, cfg.extent)
            rng = np.random.default_rng(cfg.seed)
            f = CurrentProfile(random_field(grid, rng, Ball((0.0,), 0.6 * cfg.extent)), grid)
            return halfline_entropy(f, 0.0)
        return q, SPECTRAL
    if cfg.name == "eigen":
        return (lambda n: lambda1(cfg.dim, n, extrapolate=False).value), SECOND_ORDER
    R = cfg.make_region().half_width

    def q(n):
        h = _boundary_sample(cfg.dim, n, np.random.default_rng(cfg.seed))
        if cfg.dim == 1:
            p = ExteriorProblem.for_ball(R, m, 1, margin=GAMMA_MARGIN, delta=1.0 / n)
        else:
            p = ExteriorProblem.for_ball(R, m, 2, n_theta=n, margin=GAMMA_MARGIN)
        return gamma(p, h).value
    return q, SECOND_ORDER


def convergence_sweep(cfg: ExperimentConfig, levels: int | None = None) -> list:
    """Repeat the experiment's key quantity at doubling resolutions.

    Errors are measured against the finest level. The observed order between
    consecutive levels is ``log2(e_k / e_(k+1))``. A row is flagged (verdict
    FAIL) when the order falls below the documented expectation: 4 for
    spectral quantities, 1.5 for second-order ones. Errors already at the
    round-off floor ``1e-12 |q|`` are not judged.
    """
    cfg = validate(cfg)
    levels = cfg.levels if levels is None else levels
    if levels < 2:
        raise ConfigInvalid("levels must be at least 2")
    q, expect = _sweep_quantity(cfg)
    sizes = [cfg.sizes[0] * 2**k for k in range(levels)]
    values = [q(n) for n in sizes]
    ref = values[-1]
    floor = 1e-12 * max(abs(ref), np.finfo(float).tiny)
    need = 4.0 if expect == SPECTRAL else 1.5
    errors = [abs(v - ref) for v in values]
    rows = []
    for k, (n, v, e) in enumerate(zip(sizes, values, errors)):
        row = {"experiment": cfg.name, "level": k, "size": n, "value": v,
               "error": e if k < levels - 1 else None, "order": None,
               "expected": expect, "verdict": ""}
        if k < levels - 2:
            nxt = errors[k + 1]
            if e > floor and nxt > floor:
                order = float(np.log2(e / nxt))
                row["order"] = order
                row["verdict"] = "PASS" if order >= need else FAIL
            else:
                row["verdict"] = "PASS"
        rows.append(row)
    return rows


# --- output ------------------------------------------------------------------

def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def rows_to_csv(rows: list) -> str:
    cols: list = []
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, restval="", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("" if v is None else _fmt(v)) for k, v in r.items()})
    return buf.getvalue()


def write_report(report: RunReport, prefix, config: ExperimentConfig | None = None) -> tuple[Path, Path]:
    """Write ``prefix.csv`` (rows, or the convergence table) and ``prefix.json``."""
    prefix = Path(prefix)
    csv_path = prefix.with_name(prefix.name + ".csv")
    json_path = prefix.with_name(prefix.name + ".json")
    rows = report.rows if report.rows else report.convergence
    _atomic_write(csv_path, rows_to_csv(rows))
    summary = report.summary(config)
    _atomic_write(json_path, json.dumps(summary, indent=2, sort_keys=True, default=_jsonable) + "\n")
    return csv_path, json_path
