"""Staggered Cartesian grids on [-L, L]^3 and the flat binary grid-array format.

Nodes sit at -L + (i + 1/2) h, i = 0..m-1, so the origin is never a node and
Hardy-type singularities stay off the lattice. The boundary condition everywhere
in this package is Dirichlet zero outside the box.
"""
from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, ExtentTooSmall, GridMismatch

_MAGIC = "sdegrid 1"


@dataclass(frozen=True)
class Grid:
    """Cubic staggered grid: extent L (box [-L,L]^3), m nodes per axis."""

    extent: float
    m: int

    def __post_init__(self):
        if self.m < 2 or self.extent <= 0:
            raise ValueError(f"bad grid: extent={self.extent}, m={self.m}")

    @property
    def h(self) -> float:
        return 2.0 * self.extent / self.m

    @property
    def axis(self) -> np.ndarray:
        return -self.extent + (np.arange(self.m) + 0.5) * self.h

    def meshgrid(self):
        x = self.axis
        return np.meshgrid(x, x, x, indexing="ij")

    def points(self) -> np.ndarray:
        """All nodes as an (m^3, 3) array."""
        X, Y, Z = self.meshgrid()
        return np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)

    def norms_weight(self) -> float:
        """Quadrature weight per node."""
        return self.h**3

    def lp_norm(self, values: np.ndarray, p: float) -> float:
        v = np.abs(np.asarray(values, dtype=float).ravel())
        if np.isinf(p):
            return float(v.max(initial=0.0))
        return float((self.h**3 * np.sum(v**p)) ** (1.0 / p))

    def same_layout(self, other: "Grid") -> bool:
        return self.m == other.m and abs(self.extent - other.extent) < 1e-12


def trilinear(grid: Grid, values: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Trilinear interpolation of node values at arbitrary points.

    values has shape (m, m, m) or (m, m, m, k); pts is (n, 3). Points outside
    the node hull are clamped to the boundary cell (the caller keeps paths
    inside the stored extent).
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    if pts.shape[1] != 3:
        raise DimensionMismatch(f"points must be (n, 3), got {pts.shape}")
    m, h, L = grid.m, grid.h, grid.extent
    t = (pts + L) / h - 0.5
    i0 = np.floor(t).astype(np.int64)
    frac = t - i0
    i0 = np.clip(i0, 0, m - 2)
    frac = np.clip(frac, 0.0, 1.0)
    i1 = i0 + 1

    scalar = values.ndim == 3
    vals = values[..., None] if scalar else values
    out = np.zeros((pts.shape[0], vals.shape[-1]), dtype=vals.dtype)
    for dx in (0, 1):
        wx = np.where(dx, frac[:, 0], 1.0 - frac[:, 0])
        ix = i1[:, 0] if dx else i0[:, 0]
        for dy in (0, 1):
            wy = np.where(dy, frac[:, 1], 1.0 - frac[:, 1])
            iy = i1[:, 1] if dy else i0[:, 1]
            for dz in (0, 1):
                wz = np.where(dz, frac[:, 2], 1.0 - frac[:, 2])
                iz = i1[:, 2] if dz else i0[:, 2]
                w = (wx * wy * wz)[:, None]
                out += w * vals[ix, iy, iz, :]
    return out[:, 0] if scalar else out


def save_grid_array(path, grid: Grid, values: np.ndarray) -> None:
    """Write a grid array as a small text header plus little-endian float64 payload."""
    arr = np.ascontiguousarray(values, dtype="<f8")
    dims = " ".join(str(s) for s in arr.shape)
    header = (
        f"{_MAGIC}\n"
        f"dims {dims}\n"
        f"extent {grid.extent!r}\n"
        f"spacing {grid.h!r}\n"
        f"byteorder little\n"
        f"dtype f8\n"
        f"end\n"
    )
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(arr.tobytes())


def load_grid_array(path):
    """Read a grid array written by save_grid_array. Returns (Grid, values)."""
    with open(path, "rb") as fh:
        raw = fh.read()
    text_end = raw.index(b"end\n") + 4
    lines = raw[:text_end].decode("ascii").splitlines()
    if lines[0] != _MAGIC:
        raise GridMismatch(f"not a grid-array file: {path}")
    meta = dict(ln.split(maxsplit=1) for ln in lines[1:-1])
    dims = tuple(int(s) for s in meta["dims"].split())
    extent = float(meta["extent"])
    arr = np.frombuffer(raw[text_end:], dtype="<f8").reshape(dims).copy()
    grid = Grid(extent=extent, m=dims[0])
    if abs(grid.h - float(meta["spacing"])) > 1e-12 * max(1.0, grid.h):
        raise GridMismatch(f"inconsistent spacing in {path}")
    return grid, arr


def require_covers(grid: Grid, needed_extent: float, what: str) -> None:
    if grid.extent + 1e-12 < needed_extent:
        raise ExtentTooSmall(
            f"{what}: grid extent {grid.extent} < required {needed_extent:.4g}"
        )
