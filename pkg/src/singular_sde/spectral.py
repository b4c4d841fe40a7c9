"""Spectral realizations of (lam - Lap_h)^{-s} on the staggered Dirichlet grid.

The (2,-1)/h^2 tridiagonal with zero ghosts is diagonalized exactly by DST-I,
so resolvents and fractional powers of the grid Laplacian cost a few FFTs.
"""
from __future__ import annotations

import os

import numpy as np
from scipy.fft import dstn, idstn

from .grids import Grid


def fft_workers() -> int:
    try:
        return max(1, int(os.environ.get("SINGULAR_SDE_THREADS", "1")))
    except ValueError:
        return 1


def laplacian_symbol_1d(m: int, h: float) -> np.ndarray:
    k = np.arange(1, m + 1)
    return (4.0 / h**2) * np.sin(k * np.pi / (2.0 * (m + 1))) ** 2


def laplacian_symbol(grid: Grid) -> np.ndarray:
    s = laplacian_symbol_1d(grid.m, grid.h)
    return s[:, None, None] + s[None, :, None] + s[None, None, :]


class LaplacianPowers:
    """Applies (lam - Lap_h)^{-s} for a fixed grid via DST-I diagonalization."""

    def __init__(self, grid: Grid, lam: float):
        if lam <= 0:
            raise ValueError("lam must be positive")
        self.grid = grid
        self.lam = lam
        self._sym = lam + laplacian_symbol(grid)

    def apply_inverse_power(self, v: np.ndarray, s: float) -> np.ndarray:
        m = self.grid.m
        w = dstn(v.reshape(m, m, m), type=1, norm="ortho", workers=fft_workers())
        w /= self._sym**s
        return idstn(w, type=1, norm="ortho", workers=fft_workers())

    def solve(self, v: np.ndarray) -> np.ndarray:
        return self.apply_inverse_power(v, 1.0)


def dirichlet_energy(w: np.ndarray, grid: Grid, lam: float) -> float:
    """Quadratic form <(lam - Lap_h) w, w> including the zero-ghost boundary terms."""
    h, m = grid.h, grid.m
    q = lam * float(np.sum(w * w))
    for ax in range(3):
        d = np.diff(w, axis=ax)
        q += float(np.sum(d * d)) / h**2
        first = [slice(None)] * 3
        first[ax] = 0
        last = [slice(None)] * 3
        last[ax] = m - 1
        q += (float(np.sum(w[tuple(first)] ** 2)) + float(np.sum(w[tuple(last)] ** 2))) / h**2
    return q


def gradient(u: np.ndarray, grid: Grid) -> np.ndarray:
    """Central-difference gradient (one-sided at faces), shape (m,m,m,3)."""
    h = grid.h
    return np.stack([np.gradient(u, h, axis=ax) for ax in range(3)], axis=-1)
