"""Random delay-Doppler channels and their effective (kernel-spread) response."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .kernel import kernel


@dataclass(frozen=True)
class ChannelPath:
    k_nu: float  # normalized Doppler, grid units
    l_tau: float  # normalized delay, grid units
    coeff: complex  # phase-absorbed coefficient


@dataclass
class ChannelGenConfig:
    num_paths: int = 5
    k_max: float = 3.0
    l_max: float = 4.0
    pdp_decay: float = 0.1
    rng_seed: int = 0

    def __post_init__(self):
        if self.num_paths < 1:
            raise ValueError("num_paths must be >= 1")
        if self.k_max <= 0 or self.l_max <= 0:
            raise ValueError("k_max and l_max must be positive")


def generate_channel(cfg: ChannelGenConfig, N: int = 32, rng=None) -> list[ChannelPath]:
    """Draw ``cfg.num_paths`` paths with a normalized exponential power delay profile.

    Dopplers are uniform on (-k_max, k_max), delays uniform on (0, l_max) and
    h_i ~ CN(0, q_i) with q_i = exp(-decay*l_i) / sum_j exp(-decay*l_j). The
    stored coefficient carries the phase exp(-j 2 pi k_nu l_tau / N).
    """
    if rng is None:
        rng = np.random.default_rng(cfg.rng_seed)
    P = cfg.num_paths
    k_nu = rng.uniform(-cfg.k_max, cfg.k_max, P)
    l_tau = rng.uniform(0.0, cfg.l_max, P)
    w = np.exp(-cfg.pdp_decay * l_tau)
    q = w / w.sum()
    h = np.sqrt(q / 2) * (rng.standard_normal(P) + 1j * rng.standard_normal(P))
    h_tilde = h * np.exp(-2j * np.pi * k_nu * l_tau / N)
    return [ChannelPath(float(k), float(l), complex(c)) for k, l, c in zip(k_nu, l_tau, h_tilde)]


def effective_channel(paths, N: int, M: int) -> np.ndarray:
    """N x M effective channel h_w[a, b] = sum_i c_i w_N(a - k_i) w_M(b - l_i)."""
    if len(paths) == 0:
        raise ValueError("effective_channel needs at least one path")
    if N < 2 or M < 2:
        raise ValueError("N and M must be >= 2")
    k = np.array([p.k_nu for p in paths])
    l = np.array([p.l_tau for p in paths])
    c = np.array([p.coeff for p in paths], dtype=complex)
    kv = kernel(np.subtract.outer(np.arange(N), k), N)  # N x P
    kt = kernel(np.subtract.outer(np.arange(M), l), M)  # M x P
    return (kv * c) @ kt.T


@dataclass
class ChannelRealization:
    paths: list[ChannelPath]
    N: int
    M: int
    _override: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if not self.paths and self._override is None:
            raise ValueError("a channel realization needs at least one path")

    @classmethod
    def from_matrix(cls, h_w: np.ndarray) -> "ChannelRealization":
        """Wrap an explicit effective channel (used for synthetic test channels)."""
        h_w = np.asarray(h_w, dtype=complex)
        return cls([], h_w.shape[0], h_w.shape[1], _override=h_w)

    @cached_property
    def effective(self) -> np.ndarray:
        if self._override is not None:
            return self._override
        return effective_channel(self.paths, self.N, self.M)
