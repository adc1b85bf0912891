"""Wall-time scaling of the 1D and 2D solvers as the virtual grid is refined.

Grid scale ``s`` uses resolution ``base_r / s`` on both axes, so N_nu and M_tau
grow roughly by ``s`` while the observation window stays fixed. Both solvers
run a fixed number of EM iterations so the timings compare equal work.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from .channel import ChannelGenConfig, ChannelRealization, generate_channel
from .frame import OtfsConfig, build_frame, synthesize_rx
from .sbl1d import SblOptions, run_sbl_1d
from .sbl2d import build_measurement_2d, run_sbl_2d
from .ssr import build_grid, build_measurement


@dataclass
class BenchRow:
    scale: float
    r: float
    N_nu: int
    M_tau: int
    t1d_ms: float
    t2d_ms: float
    slowdown_1d: float = 1.0
    slowdown_2d: float = 1.0


def _best_time(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return 1000.0 * best


def run_bench(scales=(1, 2), base_r: float = 0.25, iterations: int = 10, repeats: int = 3, seed: int = 0,
              cfg: OtfsConfig | None = None) -> list[BenchRow]:
    cfg = cfg or OtfsConfig(snr_db=20.0)
    rng = np.random.default_rng(seed)
    ch = ChannelRealization(generate_channel(ChannelGenConfig(k_max=cfg.k_max, l_max=cfg.l_max), cfg.N, rng),
                            cfg.N, cfg.M)
    rx = synthesize_rx(build_frame(cfg, rng), ch, cfg, rng)
    # epsilon far below any reachable change: every run does exactly `iterations` EM steps
    opts = SblOptions(epsilon=1e-300, t_max=iterations)
    rows = []
    for s in scales:
        r = base_r / s
        if not 0 < r <= 1:
            raise ValueError(f"grid scale {s} gives resolution {r} outside (0, 1]")
        grid = build_grid(cfg.k_max, cfg.l_max, r, r)
        meas = build_measurement(grid, cfg, cfg.pilot_amp)
        meas2d = build_measurement_2d(grid, cfg, cfg.pilot_amp)
        t1 = _best_time(lambda: run_sbl_1d(rx.y_trunc, meas, opts), repeats)
        t2 = _best_time(lambda: run_sbl_2d(rx.y_matrix(cfg), grid, cfg, opts, meas2d=meas2d), repeats)
        rows.append(BenchRow(float(s), r, grid.N_nu, grid.M_tau, t1, t2))
    base = rows[0]
    return [replace(b, slowdown_1d=b.t1d_ms / base.t1d_ms, slowdown_2d=b.t2d_ms / base.t2d_ms) for b in rows]


def format_bench(rows) -> str:
    lines = ["scale      r  N_nu  M_tau    1d_ms    2d_ms  1d_x  2d_x"]
    for b in rows:
        lines.append(f"{b.scale:5g} {b.r:6.4g} {b.N_nu:5d} {b.M_tau:6d} {b.t1d_ms:8.1f} {b.t2d_ms:8.1f}"
                     f" {b.slowdown_1d:5.1f} {b.slowdown_2d:5.1f}")
    return "\n".join(lines)
