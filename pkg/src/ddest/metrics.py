"""Channel reconstruction from sparse estimates and the NMSE score."""

from __future__ import annotations

import numpy as np

from .channel import ChannelPath, effective_channel
from .sbl1d import Estimate1D, top_indices
from .sbl2d import Estimate2D


def nmse(h_true, h_est) -> float:
    h_true = np.asarray(h_true)
    h_est = np.asarray(h_est)
    if h_true.shape != h_est.shape:
        raise ValueError(f"shape mismatch {h_true.shape} vs {h_est.shape}")
    energy = float(np.sum(np.abs(h_true) ** 2))
    if energy == 0.0:
        raise ValueError("NMSE is undefined for a zero-energy true channel")
    return float(np.sum(np.abs(h_true - h_est) ** 2)) / energy


def to_db(x) -> float:
    return float(10.0 * np.log10(x))


def _path_arrays(est):
    if isinstance(est, Estimate2D):
        n_nu, m_tau = est.h_mat.shape
        k = np.repeat(est.k_nu_hat[:, None], m_tau, axis=1)
        if est.iota_rows is not None and est.grid is not None:
            l = est.grid.l_bar[None, :] + est.iota_rows
        else:
            l = np.repeat(est.l_tau_hat[None, :], n_nu, axis=0)
        return k.ravel(), l.ravel(), est.h_mat.ravel()
    if isinstance(est, Estimate1D):
        return est.k_nu_hat, est.l_tau_hat, est.h_hat
    raise TypeError(f"cannot reconstruct from {type(est).__name__}")


def reconstruct_effective(est, N: int, M: int, keep: int | None = None) -> np.ndarray:
    """Effective N x M channel of the recovered path set.

    Every nonzero coefficient is used unless ``keep`` limits the reconstruction
    to the ``keep`` largest magnitudes.
    """
    k, l, h = _path_arrays(est)
    idx = np.flatnonzero(h)
    if keep is not None:
        idx = np.sort(top_indices(np.abs(h), keep))
        idx = idx[h[idx] != 0]
    if len(idx) == 0:
        return np.zeros((N, M), dtype=complex)
    paths = [ChannelPath(float(k[g]), float(l[g]), complex(h[g])) for g in idx]
    return effective_channel(paths, N, M)
