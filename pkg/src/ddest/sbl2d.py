"""Decoupled two-step off-grid SBL.

Step 1 treats the M_T delay columns of the pilot window as snapshots sharing a
row-sparse Doppler support and recovers D = H Phi_R(iota)^T together with the
Doppler offsets. Step 2 solves one small delay-axis problem per active Doppler
row, d_k = Phi_R(iota) h_k, with the 1D solver.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .frame import OtfsConfig
from .kernel import kernel, kernel_derivative
from .sbl1d import (
    SblOptions,
    beta0_residual_term,
    init_state,
    offgrid_system,
    run_sbl_1d,
    solve_offsets,
    top_indices,
    woodbury_posterior,
)
from .ssr import Measurement1D, VirtualGrid, max_sparsity, window_offsets


@dataclass(frozen=True)
class Measurement2D:
    phi_L: np.ndarray  # N_T x N_nu
    phi_L_dnu: np.ndarray
    phi_R: np.ndarray  # M_T x M_tau
    phi_R_dtau: np.ndarray
    grid: VirtualGrid

    def left(self, kappa=None) -> np.ndarray:
        return self.phi_L if kappa is None else self.phi_L + self.phi_L_dnu * kappa

    def right(self, iota=None) -> np.ndarray:
        return self.phi_R if iota is None else self.phi_R + self.phi_R_dtau * iota


@dataclass
class MmvState:
    mu_cols: np.ndarray  # N_nu x M_T
    sigma_common: np.ndarray
    alpha_nu: np.ndarray
    kappa_nu: np.ndarray
    beta0: float
    iter: int = 0
    converged: bool = False


@dataclass
class Estimate2D:
    h_mat: np.ndarray  # N_nu x M_tau
    k_nu_hat: np.ndarray
    l_tau_hat: np.ndarray
    # per-entry delay offsets of the row solves; l_tau_hat merges them per column
    iota_rows: np.ndarray = field(repr=False, default=None)
    mmv: MmvState | None = field(repr=False, default=None)
    grid: VirtualGrid | None = field(repr=False, default=None)


def build_measurement_2d(grid: VirtualGrid, cfg: OtfsConfig, pilot_amp: complex) -> Measurement2D:
    """Axis dictionaries for the separable pilot x = x_nu * x_tau with x_nu = 1, x_tau = pilot_amp.

    With the pilot gain on the delay factor the rows of D carry the same noise
    level as Y, so the step-1 noise precision is the right start for step 2.
    """
    dk, dl = window_offsets(cfg)
    xk = np.subtract.outer(dk, grid.k_bar)
    xl = np.subtract.outer(dl, grid.l_bar)
    return Measurement2D(
        phi_L=kernel(xk, cfg.N).astype(complex),
        phi_L_dnu=kernel_derivative(xk, cfg.N),
        phi_R=pilot_amp * kernel(xl, cfg.M),
        phi_R_dtau=pilot_amp * kernel_derivative(xl, cfg.M),
        grid=grid,
    )


def _mmv_alpha(mu_cols, sigma, rho):
    L = mu_cols.shape[1]
    s = np.mean(np.abs(mu_cols) ** 2, axis=1) + np.real(np.diagonal(sigma))
    s = np.maximum(s, 0.0)
    r = rho / L
    return 2.0 * s / (np.sqrt(1.0 + 4.0 * r * s) + 1.0)


def run_mmv_sbl(Y_t, meas2d: Measurement2D, opts: SblOptions | None = None, n_support: int | None = None,
                callback=None) -> MmvState:
    opts = opts or SblOptions()
    Y = np.asarray(Y_t, dtype=complex)
    if Y.ndim != 2 or Y.shape[0] != meas2d.phi_L.shape[0]:
        raise ValueError(f"observation shape {Y.shape} does not match Phi_L {meas2d.phi_L.shape}")
    N_T, L = Y.shape
    N_nu = meas2d.phi_L.shape[1]
    if n_support is None:
        n_support = max_sparsity(N_T * L, N_nu * L)
    half = meas2d.grid.r_nu / 2

    alpha = np.maximum(np.mean(np.abs(meas2d.phi_L.conj().T @ Y), axis=1), opts.alpha_floor)
    sigma2 = np.vdot(Y, Y).real / (opts.sigma2_init_divisor * Y.size)
    beta0 = min(1.0 / sigma2, opts.beta0_cap) if sigma2 > 0 else opts.beta0_cap
    kappa = np.zeros(N_nu)
    state = MmvState(np.zeros((N_nu, L), complex), np.diag(alpha).astype(complex), alpha, kappa, beta0)

    for _ in range(opts.t_max):
        phi_bar = meas2d.left(state.kappa_nu)
        mu, sigma = woodbury_posterior(phi_bar, state.alpha_nu, state.beta0, Y)
        new_alpha = np.maximum(_mmv_alpha(mu, sigma, opts.rho), opts.alpha_floor)
        new_kappa = np.zeros(N_nu)
        if opts.offgrid_enabled:
            S = top_indices(state.alpha_nu, n_support)
            A, b = offgrid_system(mu, sigma, Y, meas2d.phi_L_dnu, meas2d.phi_L, S)
            new_kappa[S] = solve_offsets(A, b, state.kappa_nu[S], half, opts.cond_limit)
        A_total = sum(
            beta0_residual_term(Y[:, l], phi_bar, mu[:, l], sigma, state.alpha_nu, state.beta0) for l in range(L)
        )
        new_beta = min((opts.c - 1 + Y.size) / (opts.d + max(A_total, 0.0)), opts.beta0_cap)
        norm = np.linalg.norm(state.alpha_nu)
        change = np.linalg.norm(new_alpha - state.alpha_nu) / norm if norm > 0 else np.inf
        state = MmvState(mu, sigma, new_alpha, new_kappa, float(new_beta), state.iter + 1)
        if callback is not None:
            callback(state)
        if change <= opts.epsilon:
            state.converged = True
            break

    mu, sigma = woodbury_posterior(meas2d.left(state.kappa_nu), state.alpha_nu, state.beta0, Y)
    return replace(state, mu_cols=mu, sigma_common=sigma)


def row_measurement(meas2d: Measurement2D, k_nu: float) -> Measurement1D:
    """Delay-only dictionary for one Doppler row of D."""
    g = meas2d.grid
    return Measurement1D(
        phi=meas2d.phi_R,
        phi_dnu=None,
        phi_dtau=meas2d.phi_R_dtau,
        col_k=np.full(g.M_tau, k_nu),
        col_l=g.l_bar.copy(),
        r_nu=g.r_nu,
        r_tau=g.r_tau,
    )


def solve_row(d_row, meas_row: Measurement1D, opts: SblOptions, beta0: float):
    state = init_state(d_row, meas_row, opts)
    state.beta0 = beta0
    return run_sbl_1d(d_row, meas_row, opts, state=state)


def run_sbl_2d(Y_t, grid: VirtualGrid, cfg: OtfsConfig, opts: SblOptions | None = None,
               meas2d: Measurement2D | None = None, workers: int = 1) -> Estimate2D:
    opts = opts or SblOptions()
    if meas2d is None:
        meas2d = build_measurement_2d(grid, cfg, cfg.pilot_amp)
    Y = np.asarray(Y_t, dtype=complex)
    if Y.ndim == 1:
        Y = Y.reshape(cfg.N_T, cfg.M_T)
    n_support = max_sparsity(Y.size, grid.N_nu * Y.shape[1])
    mmv = run_mmv_sbl(Y, meas2d, opts, n_support)
    k_nu_hat = grid.k_bar + mmv.kappa_nu
    rows = np.sort(top_indices(mmv.alpha_nu, n_support))

    def task(k):
        return solve_row(mmv.mu_cols[k], row_measurement(meas2d, k_nu_hat[k]), opts, mmv.beta0)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(task, rows))
    else:
        results = [task(k) for k in rows]

    h_mat = np.zeros((grid.N_nu, grid.M_tau), dtype=complex)
    iota_rows = np.zeros((grid.N_nu, grid.M_tau))
    for k, est in zip(rows, results):
        h_mat[k] = est.h_hat
        iota_rows[k] = est.state.iota
    strongest = np.argmax(np.abs(h_mat), axis=0)
    l_tau_hat = grid.l_bar + iota_rows[strongest, np.arange(grid.M_tau)]
    return Estimate2D(h_mat, k_nu_hat, l_tau_hat, iota_rows, mmv, grid)
