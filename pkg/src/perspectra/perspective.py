"""The lower semicontinuous perspective of a base function.

For ``phi`` in Gamma_0(R^n) the perspective is::

    phi~(eta, y) = eta * phi(y / eta)     if eta > 0
                 = (rec phi)(y)           if eta = 0
                 = +inf                   if eta < 0

The recession branch uses the base function's closed form when it has one
and otherwise a difference-quotient estimate along a geometric ladder of
step lengths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import (INF, Ball, ConvexFunction, MissingOracle, NoWitness,
                   NotConverged, Unsupported, as_vector, check_ext, ext_add,
                   ext_scale)

__all__ = [
    "DEFAULT_ALPHAS", "STABILIZE_TOL", "DIVERGENCE_THRESHOLD", "MEMBERSHIP_TOL",
    "PerspectivePoint", "SubgradientPair", "FinitePairSet", "BallImageSet",
    "ConjugateSet", "ExposedRaySet", "Perspective", "recession_quotients",
    "perspective_value", "recession_value", "perspective_subdifferential",
    "conjugate_membership",
]

DEFAULT_ALPHAS = tuple(10.0 ** k for k in range(2, 11))
STABILIZE_TOL = 1e-8
DIVERGENCE_THRESHOLD = 1e12
MEMBERSHIP_TOL = 1e-12


@dataclass(frozen=True)
class PerspectivePoint:
    eta: float
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "eta", float(self.eta))
        object.__setattr__(self, "y", as_vector(self.y))
        if not math.isfinite(self.eta):
            raise ValueError("eta must be finite")


@dataclass(frozen=True)
class SubgradientPair:
    mu: float
    u: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "u", as_vector(self.u))


# ---------------------------------------------------------------------------
# subdifferential sets

@dataclass(frozen=True)
class FinitePairSet:
    """Convex hull of finitely many pairs; no generators means the empty set."""

    generators: tuple = ()

    @property
    def is_empty(self) -> bool:
        return not self.generators

    def sample(self, rng: np.random.Generator, k: int = 4) -> list:
        out = list(self.generators)
        if len(self.generators) > 1:
            for _ in range(k):
                w = rng.dirichlet(np.ones(len(self.generators)))
                mu = sum(wi * g.mu for wi, g in zip(w, self.generators))
                u = sum(wi * g.u for wi, g in zip(w, self.generators))
                out.append(SubgradientPair(mu, u))
        return out

    def __len__(self):
        return len(self.generators)

    def __iter__(self):
        return iter(self.generators)


@dataclass(frozen=True)
class BallImageSet:
    """``{(value - <point, u>, u) : u in ball}``: the image of a ball subdifferential."""

    point: np.ndarray
    value: float
    ball: Ball
    is_empty: bool = False

    def mu_of(self, u) -> float:
        return self.value - float(np.dot(self.point, u))

    def contains(self, pair: SubgradientPair, tol: float = MEMBERSHIP_TOL) -> bool:
        return self.ball.contains(pair.u, tol) and abs(pair.mu - self.mu_of(pair.u)) <= tol

    def sample(self, rng: np.random.Generator, k: int = 4) -> list:
        return [SubgradientPair(self.mu_of(u), u) for u in self.ball.sample(rng, k)]


@dataclass(frozen=True)
class ConjugateSet:
    """``C = {(mu, u) : mu + phi*(u) <= 0}``, given as a membership oracle."""

    base: ConvexFunction
    is_empty: bool = False

    def contains(self, pair: SubgradientPair, tol: float = MEMBERSHIP_TOL) -> bool:
        return ext_add(pair.mu, self.base.conjugate(pair.u)) <= tol

    def sample(self, rng: np.random.Generator, k: int = 4) -> list:
        """Pairs on the boundary of C at subgradients of the base taken at random points."""
        out = []
        n = self.base.dim
        tries = 0
        while len(out) < k and tries < 100 * k:
            tries += 1
            z = self.base.witness + rng.standard_normal(n)
            if self.base.subgradient is None or not self.base.value(z) < INF:
                continue
            g = self.base.subgradient(z)
            us = g.sample(rng, 1) if isinstance(g, Ball) else g
            for u in us:
                c = self.base.conjugate(u)
                if c < INF:
                    out.append(SubgradientPair(-c - rng.exponential(), u))
        return out


@dataclass(frozen=True)
class ExposedRaySet:
    """``{(mu, u) : u exposed in dom phi* by y, mu + phi*(u) <= 0}`` (eta = 0, y != 0)."""

    base: ConvexFunction
    points: tuple

    @property
    def is_empty(self) -> bool:
        return not any(self.base.conjugate(u) < INF for u in self.points)

    def contains(self, pair: SubgradientPair, tol: float = MEMBERSHIP_TOL) -> bool:
        on_face = any(np.allclose(pair.u, u, rtol=0, atol=tol) for u in self.points)
        return on_face and ext_add(pair.mu, self.base.conjugate(pair.u)) <= tol

    def sample(self, rng: np.random.Generator, k: int = 4) -> list:
        out = []
        for u in self.points:
            c = self.base.conjugate(u)
            if c < INF:
                out.extend(SubgradientPair(-c - s, u) for s in [0.0, *rng.exponential(size=k - 1)])
        return out


# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Perspective:
    """The perspective ``phi~`` of ``base``.

    ``recession_mode`` is ``"closed"`` (use ``base.recession``), ``"numeric"``
    (difference quotients from ``witness`` over ``alphas``) or ``"auto"``
    (closed form when present, numeric otherwise).
    """

    base: ConvexFunction
    recession_mode: str = "auto"
    witness: Optional[np.ndarray] = None
    alphas: Sequence[float] = field(default=DEFAULT_ALPHAS)

    def __post_init__(self):
        mode = self.recession_mode
        if mode not in ("auto", "closed", "numeric"):
            raise ValueError(f"unknown recession mode {mode!r}")
        if mode == "auto":
            mode = "closed" if self.base.recession is not None else "numeric"
            object.__setattr__(self, "recession_mode", mode)
        if mode == "closed" and self.base.recession is None:
            raise MissingOracle(f"{self.base.name} has no closed-form recession function")
        if mode == "numeric":
            z = self.base.witness if self.witness is None else self.witness
            try:
                z = as_vector(z, self.base.dim)
            except ValueError as exc:
                raise NoWitness(str(exc)) from None
            if not self.base.value(z) < INF:
                raise NoWitness(f"witness {z} is not in dom {self.base.name}")
            object.__setattr__(self, "witness", z)

    @property
    def dim(self) -> int:
        return self.base.dim

    def __call__(self, eta: float, y) -> float:
        return self.value(eta, y)

    def value(self, eta: float, y) -> float:
        eta = float(eta)
        y = as_vector(y, self.dim)
        if eta > 0:
            return ext_scale(eta, self.base.value(y * (1.0 / eta)))
        if eta == 0:
            return self.recession(y)
        return INF

    def recession(self, y) -> float:
        y = as_vector(y, self.dim)
        if self.recession_mode == "closed":
            return check_ext(self.base.recession(y))
        return self._numeric_recession(y)

    def _numeric_recession(self, y: np.ndarray) -> float:
        if not np.any(y):
            return 0.0
        prev = None
        for q in recession_quotients(self.base, y, self.alphas, self.witness):
            if q == INF or q > DIVERGENCE_THRESHOLD:
                return INF
            if prev is not None and abs(q - prev) <= STABILIZE_TOL * (1.0 + abs(q)):
                return q
            prev = q
        raise NotConverged(
            f"recession quotient of {self.base.name} along {y} did not settle "
            f"(last value {prev})")

    def subdifferential(self, eta: float, y):
        eta = float(eta)
        y = as_vector(y, self.dim)
        base = self.base
        if eta < 0:
            return FinitePairSet()
        if eta > 0:
            if base.subgradient is None:
                raise MissingOracle(f"{base.name} has no subgradient oracle")
            x = y * (1.0 / eta)
            fx = base.value(x)
            if fx == INF:
                return FinitePairSet()
            g = base.subgradient(x)
            if isinstance(g, Ball):
                return BallImageSet(point=x, value=fx, ball=g)
            return FinitePairSet(tuple(
                SubgradientPair(fx - float(np.dot(x, u)), u) for u in g))
        if base.conjugate is None:
            raise MissingOracle(f"{base.name} has no conjugate oracle")
        if not np.any(y):
            return ConjugateSet(base)
        if base.flags.supercoercive:
            return FinitePairSet()
        if base.support_points is not None:
            if self.recession(y) == INF:
                return FinitePairSet()
            return ExposedRaySet(base, tuple(base.support_points(y)))
        raise Unsupported(
            f"subdifferential of the perspective of {base.name} at eta=0, y!=0 needs "
            "support-point data")

    def conjugate_contains(self, pair: SubgradientPair, tol: float = MEMBERSHIP_TOL) -> bool:
        if self.base.conjugate is None:
            raise MissingOracle(f"{self.base.name} has no conjugate oracle")
        return ext_add(pair.mu, self.base.conjugate(as_vector(pair.u, self.dim))) <= tol


def recession_quotients(base: ConvexFunction, y, alphas=DEFAULT_ALPHAS, witness=None):
    """Yield ``(phi(z + a y) - phi(z)) / a`` for each step length ``a``."""
    z = base.witness if witness is None else as_vector(witness, base.dim)
    y = as_vector(y, base.dim)
    fz = base.value(z)
    if not fz < INF:
        raise NoWitness(f"witness {z} is not in dom {base.name}")
    for a in alphas:
        f = base.value(z + a * y)
        yield INF if f == INF else (f - fz) / a


# functional spellings of the methods above

def perspective_value(P: Perspective, pt: PerspectivePoint) -> float:
    return P.value(pt.eta, pt.y)


def recession_value(P: Perspective, y) -> float:
    return P.recession(y)


def perspective_subdifferential(P: Perspective, pt: PerspectivePoint):
    return P.subdifferential(pt.eta, pt.y)


def conjugate_membership(P: Perspective, pair: SubgradientPair,
                         tol: float = MEMBERSHIP_TOL) -> bool:
    return P.conjugate_contains(pair, tol)
