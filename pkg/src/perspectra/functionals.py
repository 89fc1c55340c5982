"""Gradient-perspective integral functionals on regular 1-D and 2-D grids.

``f(x) = h^d * sum_cells phi~(x_i, grad x_i)`` with forward differences
(backward in the last cell of each axis) and the rectangle rule.  Any
negative cell makes the functional ``+inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .catalog import make_norm_power
from .core import INF, BadParam, ConvexFunction, ext_sum
from .perspective import Perspective

__all__ = ["Grid", "gradient_forward", "gradient_perspective_functional",
           "fisher_information", "total_variation", "read_grid"]


@dataclass(frozen=True)
class Grid:
    values: np.ndarray
    h: float = 1.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim not in (1, 2):
            raise BadParam("grids must be 1-D or 2-D")
        if min(v.shape) < 2:
            raise BadParam("each grid axis needs at least 2 cells")
        if not np.all(np.isfinite(v)):
            raise BadParam("grid values must be finite")
        h = float(self.h)
        if not (h > 0 and math.isfinite(h)):
            raise BadParam(f"spacing must be > 0, got {h}")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "h", h)

    @property
    def ndim(self) -> int:
        return self.values.ndim


def _grid(g, h=None) -> Grid:
    if isinstance(g, Grid):
        return g
    return Grid(g, 1.0 if h is None else h)


def gradient_forward(g, h=None) -> np.ndarray:
    """Per-cell gradients, shape ``values.shape + (ndim,)``."""
    g = _grid(g, h)
    v = g.values
    out = np.empty(v.shape + (v.ndim,))
    for axis in range(v.ndim):
        d = np.diff(v, axis=axis) / g.h
        last = np.take(d, [-1], axis=axis)
        out[..., axis] = np.concatenate([d, last], axis=axis)
    return out


def gradient_perspective_functional(phi: ConvexFunction, g, h=None) -> float:
    g = _grid(g, h)
    if phi.dim != g.ndim:
        raise BadParam(f"phi lives on R^{phi.dim} but the grid is {g.ndim}-D")
    v = g.values
    if np.any(v < 0):
        return INF
    P = Perspective(phi)
    grads = gradient_forward(g).reshape(-1, g.ndim)
    total = ext_sum(P.value(x, d) for x, d in zip(v.ravel(), grads))
    return total if total == INF else g.h ** g.ndim * total


def fisher_information(g, h=None) -> float:
    """Discrete ``integral of ||grad x||^2 / x`` over the positivity set."""
    g = _grid(g, h)
    return gradient_perspective_functional(make_norm_power(g.ndim, 2.0), g)


def total_variation(g, h=None) -> float:
    """Discrete ``integral of ||grad x||`` for nonnegative ``x``."""
    g = _grid(g, h)
    return gradient_perspective_functional(make_norm_power(g.ndim, 1.0), g)


def read_grid(path, h: float) -> Grid:
    """CSV grid: a single column is 1-D, otherwise rows are grid rows."""
    rows = [[float(tok) for tok in line.split(",") if tok.strip()]
            for line in Path(path).read_text().splitlines() if line.strip()]
    if not rows:
        raise ValueError(f"{path}: empty grid")
    if all(len(r) == 1 for r in rows):
        return Grid(np.array([r[0] for r in rows]), h)
    if len({len(r) for r in rows}) != 1:
        raise ValueError(f"{path}: ragged rows")
    return Grid(np.array(rows), h)
