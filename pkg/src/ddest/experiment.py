"""Monte-Carlo NMSE sweeps with paired trials.

Trial ``i`` draws its channel and data symbols from ``SeedSequence([base_seed, i])``
and its noise from a stream keyed additionally by the SNR. Every estimator and
every grid resolution therefore sees the same received frame for a given
(trial, SNR) pair.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace

import numpy as np

from .baselines import impulse_threshold, omp_ongrid
from .channel import ChannelRealization, generate_channel
from .config import ExperimentConfig
from .frame import OtfsConfig, RxFrame, build_frame, synthesize_rx
from .metrics import nmse, reconstruct_effective, to_db
from .sbl1d import run_sbl_1d
from .sbl2d import build_measurement_2d, run_sbl_2d
from .ssr import build_grid, build_measurement

log = logging.getLogger(__name__)

CSV_HEADER = ["estimator", "snr_db", "r_nu", "r_tau", "guard", "frames", "nmse_db", "wall_time_ms"]


@dataclass
class ResultRow:
    estimator: str
    snr_db: float
    r_nu: float
    r_tau: float
    guard: bool
    frames: int
    nmse_db: float
    wall_time_ms: float
    failures: int = 0
    error: str = ""


@dataclass
class Trial:
    index: int
    channel: ChannelRealization
    rx: dict  # snr_db -> RxFrame


class GridContext:
    """Dictionaries for one resolution, shared read-only by all trials."""

    def __init__(self, cfg: OtfsConfig, r_nu: float, r_tau: float, closed: bool = False):
        self.cfg = cfg
        self.grid = build_grid(cfg.k_max, cfg.l_max, r_nu, r_tau, closed=closed)
        self.meas = build_measurement(self.grid, cfg, cfg.pilot_amp)
        self.meas2d = build_measurement_2d(self.grid, cfg, cfg.pilot_amp)


def _snr_key(snr_db: float) -> int:
    if not math.isfinite(snr_db):
        return 2**32 - 1 if snr_db > 0 else 2**32 - 2
    return int(round(snr_db * 1000)) % (2**32 - 2)


def make_trial(exp: ExperimentConfig, index: int) -> Trial:
    cfg = exp.otfs
    rng = np.random.default_rng(np.random.SeedSequence([exp.base_seed, index]))
    paths = generate_channel(exp.channel, cfg.N, rng)
    channel = ChannelRealization(paths, cfg.N, cfg.M)
    frame = build_frame(cfg, rng)
    rx = {}
    for snr in exp.snr_sweep_db:
        noise_rng = np.random.default_rng(np.random.SeedSequence([exp.base_seed, index, 1, _snr_key(snr)]))
        rx[snr] = synthesize_rx(frame, channel, replace(cfg, snr_db=snr), noise_rng)
    return Trial(index, channel, rx)


def estimate(name: str, rx: RxFrame, ctx: GridContext, exp: ExperimentConfig, snr_db: float) -> np.ndarray:
    """Effective-channel estimate of one named estimator."""
    cfg = replace(ctx.cfg, snr_db=snr_db)
    N, M = cfg.N, cfg.M
    if name == "impulse":
        return impulse_threshold(rx.y_full, cfg, exp.impulse)
    if name == "omp":
        return reconstruct_effective(omp_ongrid(rx.y_trunc, ctx.meas, exp.omp), N, M)
    offgrid = name.endswith("offgrid")
    opts = replace(exp.sbl, offgrid_enabled=offgrid)
    if name.startswith("sbl1d"):
        return reconstruct_effective(run_sbl_1d(rx.y_trunc, ctx.meas, opts), N, M)
    if name.startswith("sbl2d"):
        est = run_sbl_2d(rx.y_matrix(cfg), ctx.grid, cfg, opts, meas2d=ctx.meas2d)
        return reconstruct_effective(est, N, M)
    raise ValueError(f"unknown estimator {name!r}")


def _run_trial(exp, contexts, index):
    trial = make_trial(exp, index)
    h_true = trial.channel.effective
    out = {}
    for snr in exp.snr_sweep_db:
        for res, ctx in contexts.items():
            for name in exp.estimators:
                t0 = time.perf_counter()
                try:
                    val, err = nmse(h_true, estimate(name, trial.rx[snr], ctx, exp, snr)), ""
                except Exception as exc:  # recorded per row, the sweep goes on
                    val, err = math.nan, f"{type(exc).__name__}: {exc}"
                    log.warning("trial %d %s snr=%g r=%s failed: %s", index, name, snr, res, err)
                out[(name, snr, res)] = (val, time.perf_counter() - t0, err)
    return out


def worker_count(default: int | None = None) -> int:
    n = default or os.cpu_count() or 1
    env = os.environ.get("DDEST_THREADS")
    if env:
        try:
            n = min(n, max(1, int(env)))
        except ValueError:
            log.warning("ignoring non-integer DDEST_THREADS=%r", env)
    return max(1, n)


def run_experiment(exp: ExperimentConfig, workers: int | None = None) -> list[ResultRow]:
    contexts = {res: GridContext(exp.otfs, *res, closed=exp.closed_grid) for res in exp.resolutions}
    workers = worker_count(workers)
    indices = range(exp.num_frames)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            per_trial = list(pool.map(lambda i: _run_trial(exp, contexts, i), indices))
    else:
        per_trial = [_run_trial(exp, contexts, i) for i in indices]

    rows = []
    for snr in exp.snr_sweep_db:
        for res in exp.resolutions:
            for name in exp.estimators:
                vals = [t[(name, snr, res)] for t in per_trial]  # trial order, independent of scheduling
                ok = [v for v, _, e in vals if not e]
                errors = [e for _, _, e in vals if e]
                mean = sum(ok) / len(ok) if ok else math.nan
                rows.append(ResultRow(
                    estimator=name,
                    snr_db=float(snr),
                    r_nu=float(res[0]),
                    r_tau=float(res[1]),
                    guard=bool(exp.otfs.guard_enabled),
                    frames=len(ok),
                    nmse_db=to_db(mean) if ok and mean > 0 else (-math.inf if ok else math.nan),
                    wall_time_ms=1000.0 * sum(t for _, t, _ in vals) / len(vals) if exp.timing else 0.0,
                    failures=len(errors),
                    error=errors[0] if errors else "",
                ))
    return rows


def rows_to_csv(rows, fh=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([r.estimator, f"{r.snr_db:g}", f"{r.r_nu:g}", f"{r.r_tau:g}", int(r.guard), r.frames,
                    f"{r.nmse_db:.6f}", f"{r.wall_time_ms:.3f}"])
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text


def rows_to_json(rows) -> str:
    return json.dumps([asdict(r) for r in rows], indent=2, allow_nan=True)
