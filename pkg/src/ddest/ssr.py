"""Virtual DD grid and the dictionary of the linearized (off-grid) sparse model.

Joint index convention: dictionary column ``g = k2 * M_tau + l2`` belongs to
Doppler grid point ``k_bar[k2]`` and delay grid point ``l_bar[l2]``; row
``k * M_T + l`` is the observation at Doppler offset ``k - k_max`` and delay
offset ``l`` from the pilot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .frame import OtfsConfig
from .kernel import kernel, kernel_derivative


@dataclass(frozen=True)
class VirtualGrid:
    r_nu: float
    r_tau: float
    k_bar: np.ndarray  # N_nu Doppler grid points
    l_bar: np.ndarray  # M_tau delay grid points

    @property
    def N_nu(self) -> int:
        return len(self.k_bar)

    @property
    def M_tau(self) -> int:
        return len(self.l_bar)

    @property
    def size(self) -> int:
        return self.N_nu * self.M_tau

    def index(self, k2: int, l2: int) -> int:
        return k2 * self.M_tau + l2

    def unravel(self, g: int) -> tuple[int, int]:
        return divmod(int(g), self.M_tau)

    def point(self, g: int) -> tuple[float, float]:
        k2, l2 = self.unravel(g)
        return float(self.k_bar[k2]), float(self.l_bar[l2])

    def nearest(self, k_nu: float, l_tau: float) -> int:
        k2 = int(np.argmin(np.abs(self.k_bar - k_nu)))
        l2 = int(np.argmin(np.abs(self.l_bar - l_tau)))
        return self.index(k2, l2)


def _ceil(x: float) -> int:
    # guards against 4 / 0.2 = 20.000000000000004 style round-off
    return int(math.ceil(x - 1e-9))


def build_grid(k_max: float, l_max: float, r_nu: float, r_tau: float, closed: bool = False) -> VirtualGrid:
    """Equally spaced grid anchored at -k_max (Doppler) and 0 (delay).

    The default grid stops one step short of +k_max and l_max. ``closed=True``
    appends one more point per axis so the upper ends are grid points too.
    """
    if not (0 < r_nu <= 1 and 0 < r_tau <= 1):
        raise ValueError(f"virtual resolutions must lie in (0, 1], got {r_nu}, {r_tau}")
    N_nu = _ceil(2 * k_max / r_nu) + int(closed)
    M_tau = _ceil(l_max / r_tau) + int(closed)
    k_bar = np.arange(N_nu) * r_nu - k_max
    l_bar = np.arange(M_tau) * r_tau
    return VirtualGrid(float(r_nu), float(r_tau), k_bar, l_bar)


def max_sparsity(n_meas: int, n_atoms: int) -> int:
    """Recoverable sparsity floor(n_meas / ln(n_atoms)), at least 1 and at most n_atoms."""
    if n_atoms < 2:
        return 1
    return int(min(n_atoms, max(1, math.floor(n_meas / math.log(n_atoms)))))


@dataclass(frozen=True)
class Measurement1D:
    """Dictionary ``phi`` with its per-column derivatives along Doppler and delay.

    ``col_k``/``col_l`` hold each column's grid point; a derivative matrix of
    ``None`` means that axis carries no off-grid parameter.
    """

    phi: np.ndarray
    phi_dnu: np.ndarray | None
    phi_dtau: np.ndarray | None
    col_k: np.ndarray
    col_l: np.ndarray
    r_nu: float
    r_tau: float

    @property
    def shape(self):
        return self.phi.shape

    @property
    def n_sparse(self) -> int:
        return max_sparsity(*self.phi.shape)


def window_offsets(cfg: OtfsConfig):
    """Doppler offsets k - k_p and delay offsets l - l_p covered by the observation window."""
    return np.arange(-cfg.k_max, cfg.k_max + 1), np.arange(cfg.M_T)


def steering(k_nu, l_tau, cfg: OtfsConfig, pilot_amp: complex) -> np.ndarray:
    """Exact truncated response of unit-gain paths at (k_nu, l_tau); columns per path."""
    dk, dl = window_offsets(cfg)
    k_nu = np.atleast_1d(np.asarray(k_nu, dtype=float))
    l_tau = np.atleast_1d(np.asarray(l_tau, dtype=float))
    wv = kernel(np.subtract.outer(dk, k_nu), cfg.N)  # N_T x P
    wt = kernel(np.subtract.outer(dl, l_tau), cfg.M)  # M_T x P
    cols = pilot_amp * wv[:, None, :] * wt[None, :, :]
    return cols.reshape(cfg.N_T * cfg.M_T, -1)


def build_measurement(grid: VirtualGrid, cfg: OtfsConfig, pilot_amp: complex) -> Measurement1D:
    dk, dl = window_offsets(cfg)
    # row (k, l), column (k2, l2): all four axes broadcast explicitly
    xk = dk[:, None, None, None] - grid.k_bar[None, None, :, None]
    xl = dl[None, :, None, None] - grid.l_bar[None, None, None, :]
    wv, dwv = kernel(xk, cfg.N), kernel_derivative(xk, cfg.N)
    wt, dwt = kernel(xl, cfg.M), kernel_derivative(xl, cfg.M)
    shape = (cfg.N_T * cfg.M_T, grid.size)
    phi = (pilot_amp * wv * wt).reshape(shape)
    phi_dnu = (pilot_amp * dwv * wt).reshape(shape)
    phi_dtau = (pilot_amp * wv * dwt).reshape(shape)
    col_k = np.repeat(grid.k_bar, grid.M_tau)
    col_l = np.tile(grid.l_bar, grid.N_nu)
    return Measurement1D(phi, phi_dnu, phi_dtau, col_k, col_l, grid.r_nu, grid.r_tau)


def assemble_offgrid(meas: Measurement1D, kappa=None, iota=None) -> np.ndarray:
    """phi + phi_dnu diag(kappa) + phi_dtau diag(iota)."""
    G = meas.phi.shape[1]
    out = meas.phi.copy()
    for deriv, off, name in ((meas.phi_dnu, kappa, "kappa"), (meas.phi_dtau, iota, "iota")):
        if off is None:
            continue
        off = np.asarray(off, dtype=float)
        if off.shape != (G,):
            raise ValueError(f"{name} has shape {off.shape}, expected ({G},)")
        if deriv is not None:
            out += deriv * off
    return out
