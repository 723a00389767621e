"""Monte Carlo driver, statistics, threshold estimation and persistence.

Every shot derives its own RNG stream from (master seed, point index, shot
index) through ``numpy.random.SeedSequence``, so results are bit-identical
for a given configuration regardless of the worker count or schedule.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .channel import CssError
from .homology import classifier_for
from .peeling import InvalidSyndromeError, grow_forest_arrays, peel_arrays
from .surface import (CombinatorialSurface, _boundary_mask, build_planar,
                      build_torus, dual_map, load_surface)

CSV_HEADER = ("lattice,L,p,shots,failures_z,failures_x,failures_any,"
              "rate_any,stderr_any,seed,decode_ns_total")

WORKERS_ENV = "PEELCODE_WORKERS"


class ConfigError(ValueError):
    """Invalid run configuration."""


class NoCrossingError(ValueError):
    """The logical-error curves do not cross inside the probed range."""


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return 1


@dataclass(frozen=True)
class RunConfig:
    lattice: str = "torus"            # torus | planar | file
    L: int = 0
    Lx: int = 0
    Ly: int = 0
    surface_path: str | None = None
    probs: tuple[float, ...] = ()
    shots: int = 1
    seed: int = 0
    workers: int = 0                  # 0: resolve via env / default
    out: str | None = None
    json_out: str | None = None
    plot: bool = False

    def validate(self) -> None:
        if self.lattice not in ("torus", "planar", "file"):
            raise ConfigError(f"unknown lattice kind {self.lattice!r}")
        if self.lattice == "file" and not self.surface_path:
            raise ConfigError("lattice 'file' needs surface_path")
        if not self.probs:
            raise ConfigError("no erasure probabilities given")
        for p in self.probs:
            if not 0.0 <= p <= 1.0:
                raise ConfigError(f"probability {p} outside [0, 1]")
        if self.shots < 1:
            raise ConfigError("shots must be >= 1")

    def lattice_key(self) -> tuple:
        if self.lattice == "torus":
            return ("torus", self.L)
        if self.lattice == "planar":
            return ("planar", self.Lx or self.L, self.Ly or self.L)
        return ("file", self.surface_path)

    def size_label(self) -> int:
        if self.lattice == "torus":
            return self.L
        if self.lattice == "planar":
            return self.Lx or self.L
        return 0


def build_lattice(key: tuple) -> CombinatorialSurface:
    kind = key[0]
    if kind == "torus":
        return build_torus(key[1])
    if kind == "planar":
        return build_planar(key[1], key[2])
    return load_surface(key[1])


@dataclass(frozen=True)
class PointStats:
    lattice: str
    L: int
    p: float
    shots: int
    failures_z: int
    failures_x: int
    failures_any: int
    seed: int
    decode_ns_total: int

    @property
    def rate_any(self) -> float:
        return self.failures_any / self.shots

    @property
    def stderr_any(self) -> float:
        f = self.rate_any
        return math.sqrt(f * (1.0 - f) / self.shots)

    @property
    def decodes_per_second(self) -> float:
        if self.decode_ns_total == 0:
            return float("inf")
        return self.shots / (self.decode_ns_total * 1e-9)


@dataclass
class RunStats:
    points: list[PointStats] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER.split(","))
        for pt in self.points:
            w.writerow([pt.lattice, pt.L, f"{pt.p:.8g}", pt.shots,
                        pt.failures_z, pt.failures_x, pt.failures_any,
                        f"{pt.rate_any:.8g}", f"{pt.stderr_any:.8g}",
                        pt.seed, pt.decode_ns_total])
        return buf.getvalue()

    def to_json(self) -> str:
        rows = []
        for pt in self.points:
            rows.append({
                "lattice": pt.lattice, "L": pt.L, "p": pt.p,
                "shots": pt.shots, "failures_z": pt.failures_z,
                "failures_x": pt.failures_x, "failures_any": pt.failures_any,
                "rate_any": pt.rate_any, "stderr_any": pt.stderr_any,
                "seed": pt.seed, "decode_ns_total": pt.decode_ns_total,
            })
        return json.dumps(rows, indent=2)


def load_points_csv(path) -> list[PointStats]:
    points = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            points.append(PointStats(
                lattice=row["lattice"], L=int(row["L"]), p=float(row["p"]),
                shots=int(row["shots"]), failures_z=int(row["failures_z"]),
                failures_x=int(row["failures_x"]),
                failures_any=int(row["failures_any"]), seed=int(row["seed"]),
                decode_ns_total=int(row["decode_ns_total"])))
    return points


# -- fast decode context ----------------------------------------------------

class DecodingContext:
    """Precomputed arrays for repeated decoding of one surface."""

    def __init__(self, s: CombinatorialSurface):
        self.surface = s
        self.dmap = dual_map(s)
        self.dual = self.dmap.surface
        cls = classifier_for(s)
        self.q = s.qubit_edge_index.astype(np.int64)
        self.nq = len(self.q)
        self.ne = s.edge_count
        self.nde = self.dual.edge_count
        self.to_dual = self.dmap.to_dual.astype(np.int64)
        self.det_z = tuple(np.asarray(d, np.int64) for d in cls.detectors_z)
        # X detectors live on primal edge ids; residuals sit on dual edges
        self.det_x_dual = tuple(self.to_dual[np.asarray(d, np.int64)]
                                for d in cls.detectors_x)

    def erased_masks(self, er_idx: np.ndarray):
        erased = np.zeros(self.ne, bool)
        erased[er_idx] = True
        dual_erased = np.zeros(self.nde, bool)
        dual_erased[self.to_dual[er_idx]] = True
        return erased, dual_erased


@dataclass
class ShotOutcome:
    fail_z: bool
    fail_x: bool
    decode_ns: int
    support_ok: bool
    syndrome_ok: bool
    forest_sizes: tuple[int, int]
    open_pendant: bool


def run_shot(ctx: DecodingContext, rng, p: float,
             *, check_contract: bool = False) -> ShotOutcome:
    """Sample one erasure shot, decode both sectors, classify failure."""
    s, d = ctx.surface, ctx.dual
    hit = rng.random(ctx.nq) < p
    er_idx = ctx.q[hit]
    z_mask = np.zeros(ctx.ne, bool)
    x_dual = np.zeros(ctx.nde, bool)
    if er_idx.size:
        zb = rng.random(er_idx.size) < 0.5
        xb = rng.random(er_idx.size) < 0.5
        z_mask[er_idx[zb]] = True
        x_dual[ctx.to_dual[er_idx[xb]]] = True
    erased, dual_erased = ctx.erased_masks(er_idx)
    sigma_z = _boundary_mask(s, z_mask, restrict=True)
    sigma_x = _boundary_mask(d, x_dual, restrict=True)

    t0 = time.perf_counter_ns()
    fz = grow_forest_arrays(s, erased)
    az, okz = peel_arrays(fz, sigma_z.copy(), s.open_vertex_mask, ctx.ne)
    fx = grow_forest_arrays(d, dual_erased)
    ax, okx = peel_arrays(fx, sigma_x.copy(), d.open_vertex_mask, ctx.nde)
    decode_ns = time.perf_counter_ns() - t0
    if not (okz and okx):
        raise InvalidSyndromeError("decoder left a residual syndrome")

    rz = z_mask ^ az
    rx = x_dual ^ ax
    fail_z = any(np.count_nonzero(rz[det]) & 1 for det in ctx.det_z)
    fail_x = any(np.count_nonzero(rx[det]) & 1 for det in ctx.det_x_dual)

    support_ok = syndrome_ok = True
    open_pendant = False
    if check_contract:
        support_ok = (not np.any(az & ~erased)
                      and not np.any(ax & ~dual_erased))
        syndrome_ok = (
            np.array_equal(_boundary_mask(s, az, restrict=True), sigma_z)
            and np.array_equal(_boundary_mask(d, ax, restrict=True), sigma_x))
        open_pendant = (bool(np.any(s.open_vertex_mask[fz[1]]))
                        or bool(np.any(d.open_vertex_mask[fx[1]])))
    return ShotOutcome(fail_z, fail_x, decode_ns, support_ok, syndrome_ok,
                       (len(fz[0]), len(fx[0])), open_pendant)


def shot_rng(seed: int, point_index: int, shot: int):
    ss = np.random.SeedSequence(seed, spawn_key=(point_index, shot))
    return np.random.default_rng(ss)


# -- Monte Carlo ------------------------------------------------------------

_CTX_CACHE: dict[tuple, DecodingContext] = {}


def _context_for(key: tuple) -> DecodingContext:
    ctx = _CTX_CACHE.get(key)
    if ctx is None:
        ctx = DecodingContext(build_lattice(key))
        _CTX_CACHE[key] = ctx
    return ctx


def _shot_range(key: tuple, point_index: int, p: float, seed: int,
                start: int, stop: int):
    ctx = _context_for(key)
    fz = fx = fany = 0
    ns = 0
    for shot in range(start, stop):
        out = run_shot(ctx, shot_rng(seed, point_index, shot), p)
        fz += out.fail_z
        fx += out.fail_x
        fany += out.fail_z or out.fail_x
        ns += out.decode_ns
    return fz, fx, fany, ns


def run_monte_carlo(cfg: RunConfig) -> RunStats:
    """Run all (p, shot) points of a configuration; aggregate failures."""
    cfg.validate()
    key = cfg.lattice_key()
    workers = cfg.workers or default_workers()
    stats = RunStats()
    label = cfg.size_label()
    for point_index, p in enumerate(cfg.probs):
        if workers <= 1 or cfg.shots < 2 * workers:
            fz, fx, fany, ns = _shot_range(key, point_index, p, cfg.seed,
                                           0, cfg.shots)
        else:
            chunk = (cfg.shots + workers - 1) // workers
            ranges = [(i, min(i + chunk, cfg.shots))
                      for i in range(0, cfg.shots, chunk)]
            fz = fx = fany = ns = 0
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futs = [pool.submit(_shot_range, key, point_index, p,
                                    cfg.seed, a, b) for a, b in ranges]
                for fut in futs:
                    dz, dx, da, dn = fut.result()
                    fz += dz
                    fx += dx
                    fany += da
                    ns += dn
        stats.points.append(PointStats(
            lattice=cfg.lattice, L=label, p=p, shots=cfg.shots,
            failures_z=fz, failures_x=fx, failures_any=fany,
            seed=cfg.seed, decode_ns_total=ns))
    if cfg.out:
        Path(cfg.out).write_text(stats.to_csv())
    if cfg.json_out:
        Path(cfg.json_out).write_text(stats.to_json())
    return stats


def run_fixed_erasure(s: CombinatorialSurface, erasure, shots: int,
                      seed: int) -> int:
    """Number of fully successful decodes with the erasure held fixed.

    The forest depends only on the erasure, so it is grown once; each shot
    samples a fresh Pauli on the erased edges.
    """
    ctx = DecodingContext(s)
    er_idx = np.asarray(sorted(erasure), dtype=np.int64)
    erased, dual_erased = ctx.erased_masks(er_idx)
    fz = grow_forest_arrays(s, erased)
    fx = grow_forest_arrays(ctx.dual, dual_erased)
    dual_idx = ctx.to_dual[er_idx]
    successes = 0
    for shot in range(shots):
        rng = shot_rng(seed, 0, shot)
        z_mask = np.zeros(ctx.ne, bool)
        x_dual = np.zeros(ctx.nde, bool)
        if er_idx.size:
            zb = rng.random(er_idx.size) < 0.5
            xb = rng.random(er_idx.size) < 0.5
            z_mask[er_idx[zb]] = True
            x_dual[dual_idx[xb]] = True
        sigma_z = _boundary_mask(s, z_mask, restrict=True)
        sigma_x = _boundary_mask(ctx.dual, x_dual, restrict=True)
        az, okz = peel_arrays(fz, sigma_z, s.open_vertex_mask, ctx.ne)
        ax, okx = peel_arrays(fx, sigma_x, ctx.dual.open_vertex_mask, ctx.nde)
        if not (okz and okx):
            raise InvalidSyndromeError("decoder left a residual syndrome")
        rz = z_mask ^ az
        rx = x_dual ^ ax
        ok_z = not any(np.count_nonzero(rz[det]) & 1 for det in ctx.det_z)
        ok_x = not any(np.count_nonzero(rx[det]) & 1 for det in ctx.det_x_dual)
        successes += ok_z and ok_x
    return successes


# -- threshold estimation ---------------------------------------------------

@dataclass(frozen=True)
class ThresholdEstimate:
    p_cross: float
    ci_low: float
    ci_high: float
    pair_crossings: tuple[tuple[int, int, float], ...]


def _pair_crossing(ps, rate_small, rate_large) -> float | None:
    diff = np.asarray(rate_small) - np.asarray(rate_large)
    for i in range(len(ps) - 1):
        a, b = diff[i], diff[i + 1]
        if a == 0.0:
            return float(ps[i])
        if a * b < 0.0:
            t = a / (a - b)
            return float(ps[i] + t * (ps[i + 1] - ps[i]))
    if diff[-1] == 0.0:
        return float(ps[-1])
    return None


def estimate_threshold(points: list[PointStats], *, n_bootstrap: int = 500,
                       seed: int = 12345) -> ThresholdEstimate:
    """Crossing point of logical-error curves for successive sizes.

    Linear interpolation in p per size pair; the confidence interval comes
    from a parametric binomial bootstrap of every point.
    """
    by_size: dict[int, dict[float, PointStats]] = {}
    for pt in points:
        by_size.setdefault(pt.L, {})[pt.p] = pt
    sizes = sorted(by_size)
    if len(sizes) < 2:
        raise NoCrossingError("need at least two lattice sizes")
    common = sorted(set.intersection(*(set(by_size[L]) for L in sizes)))
    if len(common) < 3:
        raise NoCrossingError("need at least three shared probability points")

    rates = {L: [by_size[L][p].rate_any for p in common] for L in sizes}
    shots = {L: [by_size[L][p].shots for p in common] for L in sizes}

    crossings = []
    for L1, L2 in zip(sizes, sizes[1:]):
        c = _pair_crossing(common, rates[L1], rates[L2])
        if c is not None:
            crossings.append((L1, L2, c))
    if not crossings:
        raise NoCrossingError("no crossing detected in the probed range")
    p_cross = float(np.mean([c for _, _, c in crossings]))

    rng = np.random.default_rng(seed)
    boot = []
    for _ in range(n_bootstrap):
        sample = []
        for L1, L2 in zip(sizes, sizes[1:]):
            r1 = [rng.binomial(n, r) / n
                  for r, n in zip(rates[L1], shots[L1])]
            r2 = [rng.binomial(n, r) / n
                  for r, n in zip(rates[L2], shots[L2])]
            c = _pair_crossing(common, r1, r2)
            if c is not None:
                sample.append(c)
        if sample:
            boot.append(float(np.mean(sample)))
    if boot:
        ci_low, ci_high = np.percentile(boot, [2.5, 97.5])
    else:
        ci_low = ci_high = p_cross
    return ThresholdEstimate(p_cross, float(ci_low), float(ci_high),
                             tuple(crossings))


# -- benchmarking -----------------------------------------------------------

@dataclass(frozen=True)
class BenchRow:
    L: int
    qubits: int
    shots: int
    mean_decode_ns: float


def run_bench(sizes, p: float, shots: int, seed: int = 0) -> list[BenchRow]:
    """Mean per-shot decode time per torus size (decode only, warm JIT)."""
    rows = []
    # warm the JIT so compilation never lands in a timed shot
    warm = DecodingContext(build_torus(4))
    run_shot(warm, shot_rng(seed, 0, 0), 0.5)
    for idx, L in enumerate(sizes):
        ctx = DecodingContext(build_torus(L))
        total_ns = 0
        for shot in range(shots):
            out = run_shot(ctx, shot_rng(seed, idx, shot), p)
            total_ns += out.decode_ns
        rows.append(BenchRow(L, 2 * L * L, shots, total_ns / shots))
    return rows
