"""Wavepackets on symmetric grids and the unitary position-momentum transform.

Grids are power-of-two sized and symmetric about zero: x_n = (n - N/2) dx.
The conjugate grid has dk = 2 pi / (N dx) and the same symmetric layout, so
the discrete transform

    psi_hat(k_m) = dx / sqrt(2 pi) * sum_n psi(x_n) exp(-i k_m x_n)

reduces to an FFT with alternating-sign pre/post twiddles and satisfies
Parseval exactly (up to rounding).
"""

from __future__ import annotations

import math

import numpy as np

from .entropy import GriddedDensity
from .errors import ValidationError

NORMALIZATION_ATOL = 1e-8
TAIL_MASS_MAX = 1e-9


def symmetric_grid(num_points: int, spacing: float) -> np.ndarray:
    """Uniform grid x_n = (n - N/2) spacing for power-of-two N."""
    if num_points < 4 or num_points & (num_points - 1):
        raise ValidationError("grid size must be a power of two, at least 4")
    if not (spacing > 0.0 and math.isfinite(spacing)):
        raise ValidationError("grid spacing must be positive and finite")
    return (np.arange(num_points) - num_points // 2) * spacing


def check_symmetric_grid(x: np.ndarray) -> tuple[int, float]:
    """Validate symmetric power-of-two layout; return (N, spacing)."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 4 or n & (n - 1):
        raise ValidationError("grid size must be a power of two, at least 4")
    spacing = float(x[1] - x[0])
    ref = symmetric_grid(n, spacing)
    if spacing <= 0 or np.abs(x - ref).max() > 1e-9 * max(1.0, abs(spacing) * n):
        raise ValidationError("grid must be symmetric about zero with uniform spacing")
    return n, spacing


def grid_normalize(psi: np.ndarray, spacing: float) -> np.ndarray:
    """Scale amplitudes so sum |psi|^2 spacing = 1 exactly."""
    norm = float(np.sum(np.abs(psi) ** 2) * spacing)
    if norm <= 0.0:
        raise ValidationError("wavefunction has zero norm on this grid")
    return np.asarray(psi, dtype=complex) / math.sqrt(norm)


def fourier_pair(psi: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Momentum grid and transformed amplitudes for a position wavefunction.

    Uses psi_hat_m = dx/sqrt(2 pi) * (-1)^m FFT[(-1)^n psi_n]_m, which is the
    unitary continuum convention restricted to symmetric grids.
    """
    n, dx = check_symmetric_grid(x)
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (n,):
        raise ValidationError("wavefunction and grid sizes differ")
    signs = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    transformed = signs * np.fft.fft(signs * psi) * (dx / math.sqrt(2.0 * math.pi))
    dk = 2.0 * math.pi / (n * dx)
    k = symmetric_grid(n, dk)
    return k, transformed


def gaussian_packet(
    x: np.ndarray, sigma_x: float = 1.0 / math.sqrt(2.0), center: float = 0.0
) -> np.ndarray:
    """Normalized Gaussian wavepacket with position spread sigma_x."""
    if sigma_x <= 0:
        raise ValidationError("position spread must be positive")
    _, dx = check_symmetric_grid(x)
    psi = np.exp(-((x - center) ** 2) / (4.0 * sigma_x**2)).astype(complex)
    return grid_normalize(psi, dx)


def hermite_function(order: int, x: np.ndarray) -> np.ndarray:
    """Orthonormal Hermite function h_n(x) by the stable three-term recurrence."""
    if order < 0:
        raise ValidationError("order must be nonnegative")
    x = np.asarray(x, dtype=float)
    h_prev = np.pi**-0.25 * np.exp(-0.5 * x**2)
    if order == 0:
        return h_prev
    h_cur = math.sqrt(2.0) * x * h_prev
    for n in range(1, order):
        h_next = (
            math.sqrt(2.0 / (n + 1)) * x * h_cur
            - math.sqrt(n / (n + 1.0)) * h_prev
        )
        h_prev, h_cur = h_cur, h_next
    return h_cur


def oscillator_state(order: int, x: np.ndarray) -> np.ndarray:
    """Grid-normalized harmonic oscillator eigenstate."""
    _, dx = check_symmetric_grid(x)
    return grid_normalize(hermite_function(order, x).astype(complex), dx)


def gaussian_superposition(
    x: np.ndarray, separation: float, sigma_x: float = 1.0 / math.sqrt(2.0)
) -> np.ndarray:
    """Even superposition of two Gaussians centered at +/- separation."""
    if separation < 0:
        raise ValidationError("separation must be nonnegative")
    _, dx = check_symmetric_grid(x)
    psi = np.exp(-((x - separation) ** 2) / (4.0 * sigma_x**2)) + np.exp(
        -((x + separation) ** 2) / (4.0 * sigma_x**2)
    )
    return grid_normalize(psi.astype(complex), dx)


def thermal_oscillator_densities(
    levels: int, beta: float, x: np.ndarray
) -> tuple[GriddedDensity, GriddedDensity, float]:
    """Position and momentum densities of a truncated thermal oscillator.

    Mixes the lowest ``levels`` eigenstates with Gibbs weights e^{-beta n}.
    The momentum density is computed honestly through the grid transform of
    each eigenstate. Returns (position density, momentum density, mixing
    entropy of the weights).
    """
    if levels < 1:
        raise ValidationError("need at least one level")
    if not (beta > 0.0 and math.isfinite(beta)):
        raise ValidationError("inverse temperature must be positive and finite")
    n, dx = check_symmetric_grid(x)
    weights = np.exp(-beta * np.arange(levels))
    weights /= weights.sum()
    s_mix = float(-np.sum(weights * np.log(weights)))
    f_vals = np.zeros(n)
    g_vals = np.zeros(n)
    k = None
    dk = 2.0 * math.pi / (n * dx)
    for order, w in enumerate(weights):
        psi = oscillator_state(order, x)
        k, psi_hat = fourier_pair(psi, x)
        f_vals += w * np.abs(psi) ** 2
        g_vals += w * np.abs(psi_hat) ** 2
    f = GriddedDensity(start=float(x[0]), spacing=dx, values=f_vals, topology="line")
    g = GriddedDensity(start=float(k[0]), spacing=dk, values=g_vals, topology="line")
    return f, g, s_mix
