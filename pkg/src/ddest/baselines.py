"""Comparison estimators: on-grid OMP and the pilot-impulse threshold estimator."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frame import OtfsConfig, window_indices
from .sbl1d import Estimate1D, top_indices
from .ssr import Measurement1D


@dataclass
class OmpOptions:
    max_atoms: int | None = None  # None -> recoverable sparsity of the dictionary
    residual_tol: float = 1e-6

    def __post_init__(self):
        if self.max_atoms is not None and self.max_atoms < 1:
            raise ValueError("max_atoms must be >= 1")


@dataclass
class ImpulseOptions:
    threshold_factor: float = 3.0

    def __post_init__(self):
        if self.threshold_factor <= 0:
            raise ValueError("threshold_factor must be positive")


def omp_ongrid(y_t, meas: Measurement1D, opts: OmpOptions | None = None, history: list | None = None) -> Estimate1D:
    """Greedy on-grid pursuit with a least-squares refit after every selection.

    ``history``, if given, receives the residual norm after each iteration.
    """
    opts = opts or OmpOptions()
    phi = meas.phi
    if phi.size == 0:
        raise ValueError("empty dictionary")
    y = np.asarray(y_t, dtype=complex)
    G = phi.shape[1]
    max_atoms = opts.max_atoms or meas.n_sparse
    norms = np.linalg.norm(phi, axis=0)
    norms[norms == 0] = np.inf
    y_norm = np.linalg.norm(y)
    h = np.zeros(G, dtype=complex)
    chosen: list[int] = []
    r = y.copy()
    while len(chosen) < max_atoms and np.linalg.norm(r) > opts.residual_tol * y_norm and y_norm > 0:
        corr = np.abs(phi.conj().T @ r) / norms
        corr[chosen] = -1.0
        chosen.append(int(np.argmax(corr)))
        coef = np.linalg.lstsq(phi[:, chosen], y, rcond=None)[0]
        r = y - phi[:, chosen] @ coef
        if history is not None:
            history.append(float(np.linalg.norm(r)))
    if chosen:
        h[chosen] = coef
    return Estimate1D(
        h_hat=h,
        k_nu_hat=meas.col_k.copy(),
        l_tau_hat=meas.col_l.copy(),
        support=top_indices(np.abs(h), len(chosen)) if chosen else np.array([], dtype=int),
        converged=True,
    )


def impulse_threshold(y_full, cfg: OtfsConfig, opts: ImpulseOptions | None = None) -> np.ndarray:
    """Effective-channel estimate read off the pilot window, thresholded at k * sqrt(N0)."""
    opts = opts or ImpulseOptions()
    rows, cols = window_indices(cfg)
    win = np.asarray(y_full)[np.ix_(rows, cols)]
    # the relative floor only matters without noise, where FFT round-off would pass a zero threshold
    thr = max(opts.threshold_factor * np.sqrt(cfg.noise_power), 1e-12 * float(np.max(np.abs(win), initial=0.0)))
    est = np.where(np.abs(win) > thr, win / cfg.pilot_amp, 0.0)
    h = np.zeros((cfg.N, cfg.M), dtype=complex)
    # window row k sits at Doppler offset k - k_max, column l at delay offset l
    dk = (np.arange(cfg.N_T) - cfg.k_max) % cfg.N
    dl = np.arange(cfg.M_T) % cfg.M
    h[np.ix_(dk, dl)] = est
    return h
