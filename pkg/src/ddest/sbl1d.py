"""Off-grid sparse Bayesian learning on the 1D (joint delay-Doppler) dictionary.

Each EM iteration computes the Gaussian posterior of the sparse channel vector
for fixed hyper-parameters and then re-estimates the Gamma-prior precisions
``alpha``, the noise precision ``beta0`` and the per-atom off-grid offsets
``kappa`` (Doppler) / ``iota`` (delay). With ``offgrid_enabled=False`` the
offsets stay at zero and the solver is the plain on-grid SBL baseline.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg as sla

from .ssr import Measurement1D, assemble_offgrid

DOPPLER = "doppler"
DELAY = "delay"


@dataclass
class SblOptions:
    epsilon: float = 1e-3
    t_max: int = 200
    rho: float = 1e-2
    c: float = 1e-4
    d: float = 1e-4
    offgrid_enabled: bool = True
    sigma2_init_divisor: float = 100.0
    alpha_floor: float = 1e-12
    beta0_cap: float = 1e12
    cond_limit: float = 1e10

    def __post_init__(self):
        for name in ("epsilon", "rho", "c", "d", "sigma2_init_divisor"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.t_max < 1:
            raise ValueError("t_max must be >= 1")


@dataclass
class SblState:
    mu: np.ndarray
    sigma: np.ndarray
    alpha: np.ndarray
    kappa: np.ndarray
    iota: np.ndarray
    beta0: float
    iter: int = 0


@dataclass
class Estimate1D:
    h_hat: np.ndarray
    k_nu_hat: np.ndarray
    l_tau_hat: np.ndarray
    support: np.ndarray
    state: SblState | None = field(default=None, repr=False)
    converged: bool = False


def top_indices(values, count: int) -> np.ndarray:
    """Indices of the ``count`` largest entries, ties broken by lower index."""
    return np.argsort(-np.asarray(values), kind="stable")[:count]


def init_state(y_t, meas: Measurement1D, opts: SblOptions) -> SblState:
    y_t = np.asarray(y_t, dtype=complex)
    if y_t.size == 0:
        raise ValueError("empty observation")
    G = meas.phi.shape[1]
    alpha = np.maximum(np.abs(meas.phi.conj().T @ y_t), opts.alpha_floor)
    sigma2 = np.vdot(y_t, y_t).real / (opts.sigma2_init_divisor * y_t.size)
    beta0 = min(1.0 / sigma2, opts.beta0_cap) if sigma2 > 0 else opts.beta0_cap
    return SblState(
        mu=np.zeros(G, dtype=complex),
        sigma=np.diag(alpha).astype(complex),
        alpha=alpha,
        kappa=np.zeros(G),
        iota=np.zeros(G),
        beta0=float(beta0),
    )


def _solve_hpd(C, B):
    """Solve C X = B for Hermitian positive definite C, adding jitter if needed."""
    jitter = 0.0
    scale = max(1.0, float(np.mean(np.abs(np.diag(C)))))
    for _ in range(8):
        try:
            cf = sla.cho_factor(C + jitter * np.eye(len(C)), lower=True, check_finite=False)
            return sla.cho_solve(cf, B, check_finite=False)
        except np.linalg.LinAlgError:
            jitter = 1e-12 * scale if jitter == 0.0 else jitter * 100
    return np.linalg.lstsq(C, B, rcond=None)[0]


def woodbury_posterior(phi_bar, alpha, beta0, Y):
    """Posterior mean(s) and covariance via the m x m inner inverse.

    ``Y`` may be one observation vector or an m x L matrix of snapshots that
    share the prior; the covariance is common to all snapshots.
    """
    m = phi_bar.shape[0]
    la_ph = alpha[:, None] * phi_bar.conj().T  # Lambda Phi^H, G x m
    C = np.eye(m) / beta0 + phi_bar @ la_ph
    C = 0.5 * (C + C.conj().T)
    rhs = np.column_stack([phi_bar * alpha[None, :], Y])  # [Phi Lambda, Y]
    sol = _solve_hpd(C, rhs)
    G = phi_bar.shape[1]
    sigma = np.diag(alpha).astype(complex) - la_ph @ sol[:, :G]
    sigma = 0.5 * (sigma + sigma.conj().T)
    mu = la_ph @ sol[:, G:]
    return (mu[:, 0] if np.ndim(Y) == 1 else mu), sigma


def direct_posterior(phi_bar, alpha, beta0, y):
    """Textbook form (beta0 Phi^H Phi + Lambda^-1)^-1, used as a cross-check."""
    prec = beta0 * phi_bar.conj().T @ phi_bar + np.diag(1.0 / alpha)
    sigma = np.linalg.inv(prec)
    sigma = 0.5 * (sigma + sigma.conj().T)
    mu = beta0 * sigma @ phi_bar.conj().T @ y
    return mu, sigma


def posterior_update(state: SblState, y_t, meas: Measurement1D):
    phi_bar = assemble_offgrid(meas, state.kappa, state.iota)
    return woodbury_posterior(phi_bar, state.alpha, state.beta0, np.asarray(y_t, dtype=complex))


def update_alpha(mu, sigma, rho):
    """Closed-form Gamma-prior precision update, written without cancellation.

    (sqrt(1 + 4 rho s) - 1) / (2 rho) == 2 s / (sqrt(1 + 4 rho s) + 1),
    s = |mu|^2 + Sigma_gg.
    """
    diag = np.real(np.diagonal(sigma)) if np.ndim(sigma) == 2 else np.real(sigma)
    s = np.maximum(np.abs(mu) ** 2 + diag, 0.0)
    return 2.0 * s / (np.sqrt(1.0 + 4.0 * rho * s) + 1.0)


def beta0_residual_term(y_t, phi_bar, mu, sigma, alpha, beta0) -> float:
    """||y - Phi mu||^2 + beta0^-1 sum_g (1 - Sigma_gg / alpha_g)."""
    r = y_t - phi_bar @ mu
    trace = np.sum(1.0 - np.real(np.diagonal(sigma)) / alpha) / beta0
    return float(np.vdot(r, r).real + trace)


def update_beta0(state: SblState, y_t, meas: Measurement1D, opts: SblOptions) -> float:
    y_t = np.asarray(y_t, dtype=complex)
    phi_bar = assemble_offgrid(meas, state.kappa, state.iota)
    A = max(beta0_residual_term(y_t, phi_bar, state.mu, state.sigma, state.alpha, state.beta0), 0.0)
    return float(min((opts.c - 1 + y_t.size) / (opts.d + A), opts.beta0_cap))


def solve_offsets(A, b, x0, half_range, cond_limit=1e10):
    """Minimize x^T A x - 2 b^T x, then clamp to [-half_range, half_range].

    Falls back to one Gauss-Seidel sweep when A is (nearly) singular.
    """
    x = np.array(x0, dtype=float)
    solved = False
    if len(b) and np.all(np.isfinite(A)) and np.linalg.cond(A) <= cond_limit:
        try:
            x = np.linalg.solve(A, b)
            solved = True
        except np.linalg.LinAlgError:
            pass
    if not solved:
        for n in range(len(b)):
            if A[n, n] <= 0:
                continue
            x[n] = (b[n] - A[n] @ x + A[n, n] * x[n]) / A[n, n]
    return np.clip(x, -half_range, half_range)


def offgrid_system(mu, sigma, Y, phi_d, phi_0, support):
    """Truncated quadratic (A, b) of the expected residual in one offset axis.

    ``phi_d`` is the derivative dictionary of the axis being updated and
    ``phi_0`` the dictionary with the other axis' offsets applied. ``mu`` and
    ``Y`` may hold several snapshots column-wise; A and b are then averaged.
    """
    mu = np.asarray(mu).reshape(mu.shape[0], -1)
    Y = np.asarray(Y).reshape(phi_d.shape[0], -1)
    L = mu.shape[1]
    S = support
    pd_S = phi_d[:, S]
    gram = pd_S.conj().T @ pd_S
    cross = phi_0.conj().T @ pd_S  # G x |S|
    mu_S = mu[S]
    # E[h_S^* h_S^T] averaged over snapshots
    second = (mu_S.conj() @ mu_S.T) / L + sigma[np.ix_(S, S)].T
    A = np.real(gram * second)
    # rows S of E[h h^H] = mu mu^H + Sigma, averaged
    R_S = (mu_S @ mu.conj().T) / L + sigma[S, :]
    b = np.real(np.sum(mu_S * (pd_S.T @ Y.conj()), axis=1) / L - np.einsum("sj,js->s", R_S, cross))
    return A, b


def update_offgrid(state: SblState, y_t, meas: Measurement1D, axis: str, opts: SblOptions | None = None,
                   n_support: int | None = None) -> np.ndarray:
    """New offsets for one axis; entries outside the top-alpha support are zero."""
    opts = opts or SblOptions()
    if axis == DOPPLER:
        phi_d, half, cur = meas.phi_dnu, meas.r_nu / 2, state.kappa
        phi_0 = assemble_offgrid(meas, None, state.iota)
    elif axis == DELAY:
        phi_d, half, cur = meas.phi_dtau, meas.r_tau / 2, state.iota
        phi_0 = assemble_offgrid(meas, state.kappa, None)
    else:
        raise ValueError(f"unknown axis {axis!r}")
    G = meas.phi.shape[1]
    out = np.zeros(G)
    if phi_d is None:
        return out
    S = top_indices(state.alpha, n_support or meas.n_sparse)
    A, b = offgrid_system(state.mu, state.sigma, np.asarray(y_t, dtype=complex), phi_d, phi_0, S)
    out[S] = solve_offsets(A, b, cur[S], half, opts.cond_limit)
    return out


def em_step(state: SblState, y_t, meas: Measurement1D, opts: SblOptions) -> SblState:
    """One iteration: posterior, then alpha, kappa, iota, beta0 from that posterior."""
    mu, sigma = posterior_update(state, y_t, meas)
    post = replace(state, mu=mu, sigma=sigma)
    alpha = np.maximum(update_alpha(mu, sigma, opts.rho), opts.alpha_floor)
    if opts.offgrid_enabled:
        kappa = update_offgrid(post, y_t, meas, DOPPLER, opts)
        iota = update_offgrid(post, y_t, meas, DELAY, opts)
    else:
        kappa, iota = state.kappa, state.iota
    beta0 = update_beta0(post, y_t, meas, opts)
    return SblState(mu, sigma, alpha, kappa, iota, beta0, state.iter + 1)


def run_sbl_1d(y_t, meas: Measurement1D, opts: SblOptions | None = None, state: SblState | None = None,
               callback=None) -> Estimate1D:
    opts = opts or SblOptions()
    y_t = np.asarray(y_t, dtype=complex)
    if state is None:
        state = init_state(y_t, meas, opts)
    converged = False
    for _ in range(opts.t_max):
        new = em_step(state, y_t, meas, opts)
        if callback is not None:
            callback(new)
        norm = np.linalg.norm(state.alpha)
        change = np.linalg.norm(new.alpha - state.alpha) / norm if norm > 0 else np.inf
        state = new
        if change <= opts.epsilon:
            converged = True
            break
    # refresh the posterior so the mean matches the returned offsets
    mu, sigma = posterior_update(state, y_t, meas)
    state = replace(state, mu=mu, sigma=sigma)
    return Estimate1D(
        h_hat=mu,
        k_nu_hat=meas.col_k + state.kappa,
        l_tau_hat=meas.col_l + state.iota,
        support=top_indices(np.abs(mu), meas.n_sparse),
        state=state,
        converged=converged,
    )
