"""Extended reals, vectors and the base-function interface.

Extended real values are plain Python floats in which ``math.inf`` and
``-math.inf`` play the role of the two infinite elements.  NaN is never a
legal value: every operation that could manufacture one (``inf - inf``,
``0 * inf``) goes through :func:`ext_add` / :func:`ext_scale`, which raise
instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

INF = math.inf

__all__ = [
    "INF", "PerspectraError", "IndeterminateSum", "BadScale", "BadParam",
    "FlagViolation", "NoWitness", "NotConverged", "MissingOracle",
    "Unsupported", "EmptyIntersection", "BadWitness", "AllInfinite",
    "BadWeights", "SamplerExhausted", "DemoOverflow",
    "ext_add", "ext_sum", "ext_scale", "check_ext", "as_vector",
    "euclidean_norm", "Ball", "Flags", "ConvexFunction",
]


class PerspectraError(Exception):
    """Base class for every error raised by this package."""


class IndeterminateSum(PerspectraError, ArithmeticError):
    pass


class BadScale(PerspectraError, ValueError):
    pass


class BadParam(PerspectraError, ValueError):
    pass


class FlagViolation(PerspectraError, ValueError):
    pass


class NoWitness(PerspectraError, ValueError):
    pass


class NotConverged(PerspectraError, ArithmeticError):
    pass


class MissingOracle(PerspectraError, LookupError):
    pass


class Unsupported(PerspectraError, NotImplementedError):
    pass


class EmptyIntersection(PerspectraError, ValueError):
    pass


class BadWitness(PerspectraError, ValueError):
    pass


class AllInfinite(PerspectraError, ArithmeticError):
    pass


class BadWeights(PerspectraError, ValueError):
    pass


class SamplerExhausted(PerspectraError, RuntimeError):
    pass


class DemoOverflow(PerspectraError, OverflowError):
    pass


# ---------------------------------------------------------------------------
# extended reals

def check_ext(a: float) -> float:
    """Return ``a`` as a float, rejecting NaN."""
    a = float(a)
    if math.isnan(a):
        raise IndeterminateSum("NaN is not an extended real")
    return a


def ext_add(a: float, b: float) -> float:
    """Extended addition; ``(+inf) + (-inf)`` raises :class:`IndeterminateSum`."""
    a, b = check_ext(a), check_ext(b)
    if (a == INF and b == -INF) or (a == -INF and b == INF):
        raise IndeterminateSum(f"{a} + {b} is undefined")
    return a + b


def ext_sum(terms) -> float:
    """Exactly rounded sum of extended reals (``math.fsum`` on the finite part)."""
    finite = []
    pos = neg = False
    for t in terms:
        t = check_ext(t)
        if t == INF:
            pos = True
        elif t == -INF:
            neg = True
        else:
            finite.append(t)
    if pos and neg:
        raise IndeterminateSum("sum contains both +inf and -inf")
    if pos:
        return INF
    if neg:
        return -INF
    return math.fsum(finite)


def ext_scale(lam: float, a: float) -> float:
    """``lam * a`` for ``lam > 0``; ``lam <= 0`` raises :class:`BadScale`."""
    lam = float(lam)
    if not lam > 0 or math.isinf(lam):
        raise BadScale(f"scale must be a finite positive real, got {lam}")
    return lam * check_ext(a)


# ---------------------------------------------------------------------------
# vectors

VectorLike = Union[Sequence[float], np.ndarray, float]


def as_vector(v: VectorLike, dim: Optional[int] = None) -> np.ndarray:
    """Coerce to a finite 1-D float64 array of length >= 1."""
    arr = np.atleast_1d(np.asarray(v, dtype=float))
    if arr.ndim != 1 or arr.size == 0:
        raise BadParam(f"expected a non-empty 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise BadParam("vector coordinates must be finite")
    if dim is not None and arr.size != dim:
        raise BadParam(f"expected dimension {dim}, got {arr.size}")
    return arr


def euclidean_norm(v: VectorLike) -> float:
    return math.hypot(*np.atleast_1d(np.asarray(v, dtype=float)))


@dataclass(frozen=True)
class Ball:
    """Closed ball ``B(center; radius)``, used for continuum subdifferentials."""

    center: np.ndarray
    radius: float

    def contains(self, u, tol: float = 1e-12) -> bool:
        return euclidean_norm(np.asarray(u) - self.center) <= self.radius + tol

    def sample(self, rng: np.random.Generator, k: int) -> list:
        n = self.center.size
        out = [self.center.copy()]
        for _ in range(k - 1):
            d = rng.standard_normal(n)
            d /= max(euclidean_norm(d), 1e-300)
            out.append(self.center + self.radius * rng.uniform() ** (1.0 / n) * d)
        return out


# ---------------------------------------------------------------------------
# base functions

@dataclass(frozen=True)
class Flags:
    supercoercive: bool = False
    positively_homogeneous: bool = False
    even: bool = False
    full_domain: bool = False
    nonneg_and_zero_at_zero: bool = False


SubgradientResult = Union[list, Ball]


@dataclass(frozen=True, eq=False)
class ConvexFunction:
    """A function in Gamma_0(R^n) described by oracles.

    ``value`` must accept a 1-D float array of length ``dim`` and return a
    float in ]-inf, +inf].  The optional oracles are closed forms:

    * ``subgradient(y)`` returns a list of generators whose convex hull is
      the subdifferential (an empty list means the subdifferential is empty)
      or a :class:`Ball`;
    * ``recession(y)`` is the recession function;
    * ``conjugate(u)`` is the Fenchel conjugate;
    * ``support_points(y)`` returns the generators of the face of
      ``dom conjugate`` exposed by ``y`` (needed only for the subdifferential
      of the perspective at ``eta = 0, y != 0``).

    ``witness`` must lie in the domain; properness is checked on
    construction.
    """

    dim: int
    value: Callable[[np.ndarray], float]
    witness: np.ndarray
    name: str = "phi"
    subgradient: Optional[Callable[[np.ndarray], SubgradientResult]] = None
    recession: Optional[Callable[[np.ndarray], float]] = None
    conjugate: Optional[Callable[[np.ndarray], float]] = None
    support_points: Optional[Callable[[np.ndarray], list]] = None
    flags: Flags = field(default_factory=Flags)

    def __post_init__(self):
        if int(self.dim) < 1:
            raise BadParam("dim must be a positive integer")
        object.__setattr__(self, "witness", as_vector(self.witness, self.dim))
        if not self.value(self.witness) < INF:
            raise NoWitness(f"{self.name}: witness {self.witness} is not in the domain")
        if self.flags.supercoercive and self.recession is not None:
            e = np.zeros(self.dim)
            e[0] = 1.0
            if self.recession(np.zeros(self.dim)) != 0.0 or self.recession(e) != INF:
                raise FlagViolation(
                    f"{self.name}: supercoercive but recession is not the indicator of {{0}}")

    def __call__(self, y) -> float:
        return check_ext(self.value(as_vector(y, self.dim)))
