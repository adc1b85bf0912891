"""Periodic Dirichlet sampling kernels of the ideal-pulse, rectangular-window OTFS link.

All offsets are in normalized grid units. ``kernel(x, L)`` is

    (1/L) * sum_{n=0}^{L-1} exp(-j 2 pi n x / L)
      = (1/L) * exp(-j (L-1) pi x / L) * sin(pi x) / sin(pi x / L)

with L = N for the Doppler axis and L = M for the delay axis.
"""

from __future__ import annotations

import numpy as np

# below this |sin(pi x / L)| the closed form is replaced by the DFT sum
_SINGULAR_TOL = 1e-3


def _check(x, L):
    if int(L) != L or L < 2:
        raise ValueError(f"kernel length must be an integer >= 2, got {L!r}")
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("kernel offset must be finite")
    return x, int(L)


def kernel_dft(x, L):
    """Reference DFT-sum evaluation, O(L) per point and free of singularities."""
    x, L = _check(x, L)
    n = np.arange(L)
    ph = np.exp(-2j * np.pi * np.multiply.outer(x, n) / L)
    return ph.mean(axis=-1)


def kernel_derivative_dft(x, L):
    x, L = _check(x, L)
    n = np.arange(L)
    ph = (2j * np.pi * n / L) * np.exp(-2j * np.pi * np.multiply.outer(x, n) / L)
    return ph.mean(axis=-1)


def kernel(x, L):
    """Sampling kernel at offset(s) ``x``; scalar in, complex scalar out.

    Uses the closed form away from ``x = 0 (mod L)`` and the DFT sum near it.
    """
    x, L = _check(x, L)
    den = np.sin(np.pi * x / L)
    near = np.abs(den) < _SINGULAR_TOL
    safe = np.where(near, 1.0, den)
    out = np.exp(-1j * (L - 1) * np.pi * x / L) * np.sin(np.pi * x) / (L * safe)
    if np.any(near):
        out = np.where(near, kernel_dft(np.where(near, x, 0.0), L), out)
    return out[()] if out.ndim == 0 else out


def kernel_derivative(x, L):
    """Derivative of ``kernel(x - k, L)`` with respect to ``k`` at ``k = 0``.

    This is the sensitivity of a measurement column to a shift of the path
    parameter, i.e. ``-d kernel / dx``.
    """
    out = kernel_derivative_dft(x, L)
    return out[()] if out.ndim == 0 else out
