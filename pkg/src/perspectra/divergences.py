"""phi-divergences between finite vectors.

``Phi(x, y) = sum_{x_i = 0} (rec phi)(y_i) + sum_{x_i > 0} x_i phi(y_i / x_i)``
and ``+inf`` as soon as some ``x_i < 0``.  Zero detection is exact, and all
sums are exactly rounded (``math.fsum``) in index order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .catalog import make_entropy, make_power_divergence_generator
from .core import INF, BadParam, ConvexFunction, as_vector, ext_scale, ext_sum
from .perspective import Perspective

__all__ = ["WeightedVector", "phi_divergence", "kl", "power_divergence", "read_vector"]


@dataclass(frozen=True)
class WeightedVector:
    """A vector ``x`` together with its sign partition ``I-``, ``I0``, ``I+``."""

    entries: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "entries", as_vector(self.entries))

    @property
    def negative(self) -> np.ndarray:
        return np.flatnonzero(self.entries < 0)

    @property
    def zero(self) -> np.ndarray:
        return np.flatnonzero(self.entries == 0)

    @property
    def positive(self) -> np.ndarray:
        return np.flatnonzero(self.entries > 0)

    def __len__(self):
        return self.entries.size


def _as_weighted(x) -> WeightedVector:
    return x if isinstance(x, WeightedVector) else WeightedVector(x)


def _weights(weights, n):
    if weights is None:
        return None
    w = as_vector(weights, n)
    if np.any(w < 0):
        raise BadParam("measure weights must be nonnegative")
    return w


def phi_divergence(phi: ConvexFunction, x, y, weights=None) -> float:
    """``sum_i w_i phi~(x_i, y_i)`` with the recession branch on ``x_i = 0``.

    ``weights`` defaults to the counting measure; zero-weight indices are
    skipped.
    """
    if phi.dim != 1:
        raise BadParam("divergence generator must be defined on R")
    x = _as_weighted(x)
    y = as_vector(y, len(x))
    w = _weights(weights, len(x))
    if x.negative.size and (w is None or np.any(w[x.negative] > 0)):
        return INF
    P = Perspective(phi)
    xs = x.entries
    terms = []
    for i in range(len(x)):
        if w is not None and w[i] == 0:
            continue
        t = P.value(xs[i], y[i:i + 1])
        terms.append(t if w is None else ext_scale(w[i], t))
    return ext_sum(terms)


_ENTROPY = make_entropy()


def kl(x, y) -> float:
    """Kullback-Leibler divergence ``sum y_i ln(y_i / x_i)`` (the entropy divergence).

    ``+inf`` when some ``x_i < 0``, some ``x_i = 0`` has ``y_i != 0``, or some
    ``x_i > 0`` has ``y_i < 0``.
    """
    x = _as_weighted(x)
    y = as_vector(y, len(x))
    xs = x.entries
    if np.any(xs < 0) or np.any((xs == 0) & (y != 0)) or np.any((xs > 0) & (y < 0)):
        return INF
    both = np.flatnonzero((xs > 0) & (y > 0))
    return math.fsum(y[i] * math.log(y[i] / xs[i]) for i in both)


def power_divergence(p: float, x, y) -> float:
    """Divergence generated by ``|t^(1/p) - 1|^p``: variational for p=1, Hellinger for p=2."""
    p = float(p)
    if not (p >= 1 and math.isfinite(p)):
        raise BadParam(f"p must be >= 1, got {p}")
    x = _as_weighted(x)
    y = as_vector(y, len(x))
    xs = x.entries
    if np.any(xs < 0) or np.any((xs >= 0) & (y < 0)):
        return INF
    terms = [y[i] for i in np.flatnonzero((xs == 0) & (y > 0))]
    terms += [abs(y[i] ** (1.0 / p) - xs[i] ** (1.0 / p)) ** p
              for i in np.flatnonzero(xs > 0)]
    return math.fsum(terms)


def entropy_generator() -> ConvexFunction:
    return _ENTROPY


def power_generator(p: float) -> ConvexFunction:
    return make_power_divergence_generator(p)


def read_vector(path) -> np.ndarray:
    """Read a vector from JSON (an array) or CSV (one value per line or one comma-separated line)."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json":
        data = json.loads(text)
        if not isinstance(data, list):
            raise ValueError(f"{path}: expected a JSON array")
        vals = [float(v) for v in data]
    else:
        vals = [float(tok) for line in text.splitlines() for tok in line.split(",")
                if tok.strip()]
    if not vals or not all(math.isfinite(v) for v in vals):
        raise ValueError(f"{path}: values must be finite decimals")
    return np.array(vals)
