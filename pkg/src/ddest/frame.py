"""Delay-Doppler frame layout, received-frame synthesis and pilot-window truncation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CONSTELLATIONS = ("none", "bpsk", "qpsk")


@dataclass
class OtfsConfig:
    M: int = 32  # subcarriers (delay bins)
    N: int = 32  # time slots (Doppler bins)
    k_max: int = 3
    l_max: int = 4
    pilot_k: int | None = None  # defaults to M // 2 + 1
    pilot_l: int | None = None  # defaults to N // 2 + 1
    pilot_power_db: float = 30.0
    snr_db: float = 20.0
    guard_enabled: bool = True
    data_constellation: str = "qpsk"

    def __post_init__(self):
        if self.pilot_k is None:
            self.pilot_k = self.M // 2 + 1
        if self.pilot_l is None:
            self.pilot_l = self.N // 2 + 1
        if not (0 <= self.pilot_k < self.N and 0 <= self.pilot_l < self.M):
            raise ValueError("pilot position outside the DD grid")
        if 2 * self.k_max + 1 > self.N or self.l_max + 1 > self.M:
            raise ValueError("observation window does not fit in the DD grid")
        if self.k_max < 1 or self.l_max < 1:
            raise ValueError("k_max and l_max must be >= 1")
        if self.data_constellation not in CONSTELLATIONS:
            raise ValueError(f"unknown constellation {self.data_constellation!r}")

    @property
    def N_T(self) -> int:
        return 2 * self.k_max + 1

    @property
    def M_T(self) -> int:
        return self.l_max + 1

    @property
    def pilot_amp(self) -> float:
        return 10.0 ** (self.pilot_power_db / 20.0)

    @property
    def noise_power(self) -> float:
        return 10.0 ** (-self.snr_db / 10.0)


@dataclass
class Frame:
    symbols: np.ndarray  # N x M
    pilot_mask: np.ndarray
    guard_mask: np.ndarray
    data_mask: np.ndarray


@dataclass
class RxFrame:
    y_full: np.ndarray  # N x M
    y_trunc: np.ndarray  # length N_T * M_T, index k * M_T + l
    noise_power: float

    def y_matrix(self, cfg: OtfsConfig) -> np.ndarray:
        """Truncated observation as an N_T x M_T matrix."""
        return self.y_trunc.reshape(cfg.N_T, cfg.M_T)


def _symbols(kind, n, rng):
    if kind == "bpsk":
        return rng.choice([-1.0, 1.0], n).astype(complex)
    if kind == "qpsk":
        re = rng.choice([-1.0, 1.0], n)
        im = rng.choice([-1.0, 1.0], n)
        return (re + 1j * im) / np.sqrt(2)
    return np.zeros(n, dtype=complex)


def guard_mask(cfg: OtfsConfig) -> np.ndarray:
    """Cells within +-2 k_max (Doppler) and +-l_max (delay) of the pilot, pilot excluded."""
    dk = (np.arange(cfg.N) - cfg.pilot_k + cfg.N // 2) % cfg.N - cfg.N // 2
    dl = (np.arange(cfg.M) - cfg.pilot_l + cfg.M // 2) % cfg.M - cfg.M // 2
    mask = np.outer(np.abs(dk) <= 2 * cfg.k_max, np.abs(dl) <= cfg.l_max)
    mask[cfg.pilot_k, cfg.pilot_l] = False
    return mask


def build_frame(cfg: OtfsConfig, rng=None) -> Frame:
    if rng is None:
        rng = np.random.default_rng()
    pilot = np.zeros((cfg.N, cfg.M), dtype=bool)
    pilot[cfg.pilot_k, cfg.pilot_l] = True
    guard = guard_mask(cfg) if cfg.guard_enabled else np.zeros_like(pilot)
    data = ~(pilot | guard)
    x = np.zeros((cfg.N, cfg.M), dtype=complex)
    x[data] = _symbols(cfg.data_constellation, int(data.sum()), rng)
    x[cfg.pilot_k, cfg.pilot_l] = cfg.pilot_amp
    return Frame(x, pilot, guard, data)


def circular_convolve(x: np.ndarray, h_w: np.ndarray) -> np.ndarray:
    """y[k,l] = sum_{k',l'} x[k',l'] h_w[(k-k')_N, (l-l')_M] via the 2D DFT."""
    return np.fft.ifft2(np.fft.fft2(x) * np.fft.fft2(h_w))


def circular_convolve_direct(x: np.ndarray, h_w: np.ndarray) -> np.ndarray:
    N, M = x.shape
    y = np.zeros((N, M), dtype=complex)
    for kp, lp in zip(*np.nonzero(x)):
        y += x[kp, lp] * np.roll(np.roll(h_w, kp, axis=0), lp, axis=1)
    return y


def window_indices(cfg: OtfsConfig):
    """Grid rows/columns of the pilot observation window (wrapped modulo N, M)."""
    rows = (cfg.pilot_k - cfg.k_max + np.arange(cfg.N_T)) % cfg.N
    cols = (cfg.pilot_l + np.arange(cfg.M_T)) % cfg.M
    return rows, cols


def truncate(y_full: np.ndarray, cfg: OtfsConfig) -> np.ndarray:
    rows, cols = window_indices(cfg)
    return y_full[np.ix_(rows, cols)].reshape(-1)


def synthesize_rx(frame: Frame, channel, cfg: OtfsConfig, rng=None) -> RxFrame:
    h_w = channel.effective if hasattr(channel, "effective") else np.asarray(channel)
    if h_w.shape != (cfg.N, cfg.M) or frame.symbols.shape != (cfg.N, cfg.M):
        raise ValueError(f"channel {h_w.shape} / frame {frame.symbols.shape} do not match ({cfg.N}, {cfg.M})")
    y = circular_convolve(frame.symbols, h_w)
    n0 = cfg.noise_power
    if n0 > 0:
        if rng is None:
            rng = np.random.default_rng()
        y = y + np.sqrt(n0 / 2) * (rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape))
    return RxFrame(y, truncate(y, cfg), n0)
