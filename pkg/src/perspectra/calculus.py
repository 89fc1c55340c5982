"""Combinators on base functions and functions built from perspectives.

The combinators return new :class:`ConvexFunction` objects carrying the
recession function implied by the construction, so that
``Perspective(result)`` agrees with the corresponding combination of
perspectives (sums, linear precomposition, monotone composition, direct sums).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .catalog import make_weighted_norm_power
from .core import (INF, AllInfinite, BadParam, BadScale, BadWeights,
                   BadWitness, Ball, ConvexFunction, EmptyIntersection, Flags,
                   FlagViolation, NoWitness, Unsupported, as_vector,
                   euclidean_norm, ext_add, ext_scale, ext_sum)
from .perspective import Perspective, PerspectivePoint

__all__ = [
    "AffineMap", "IntervalK", "scale_add", "precompose_linear",
    "compose_monotone", "composed_perspective", "direct_sum",
    "direct_sum_perspective", "affine_perspective", "AffinePerspective",
    "trex", "expectation_perspective", "marginal", "constrained_perspective",
    "generalized_huber_perspective",
]


def _and(*fs):
    return all(fs)


def _combine(a, b, how):
    """Combine two optional oracles; absent if either is absent."""
    if a is None or b is None:
        return None
    return how(a, b)


def _generators(g):
    if isinstance(g, Ball):
        raise Unsupported("ball-valued subdifferential cannot be combined here")
    return g


# ---------------------------------------------------------------------------

def scale_add(lam: float, phi: ConvexFunction, psi: ConvexFunction, witness=None) -> ConvexFunction:
    """``lam * phi + psi``; the witness must lie in ``dom phi`` and ``dom psi``."""
    lam = float(lam)
    if not (lam > 0 and math.isfinite(lam)):
        raise BadScale(f"lambda must be a finite real > 0, got {lam}")
    if phi.dim != psi.dim:
        raise BadParam("phi and psi must share a dimension")
    z = phi.witness if witness is None else as_vector(witness, phi.dim)
    if not (phi.value(z) < INF and psi.value(z) < INF):
        raise EmptyIntersection(f"witness {z} is not in dom {phi.name} and dom {psi.name}")

    def value(y):
        return ext_add(ext_scale(lam, phi.value(y)), psi.value(y))

    recession = _combine(phi.recession, psi.recession,
                         lambda a, b: lambda y: ext_add(ext_scale(lam, a(y)), b(y)))

    def sub_sum(a, b):
        def subgradient(y):
            ga, gb = a(y), b(y)
            if isinstance(ga, Ball) and isinstance(gb, Ball):
                return Ball(lam * ga.center + gb.center, lam * ga.radius + gb.radius)
            if isinstance(ga, Ball) and len(gb) == 1:
                return Ball(lam * ga.center + gb[0], lam * ga.radius)
            if isinstance(gb, Ball) and len(ga) == 1:
                return Ball(lam * ga[0] + gb.center, gb.radius)
            return [lam * u + w for u in _generators(ga) for w in _generators(gb)]
        return subgradient

    f1, f2 = phi.flags, psi.flags
    return ConvexFunction(
        dim=phi.dim, value=value, witness=z, name=f"{lam:g}*{phi.name}+{psi.name}",
        subgradient=_combine(phi.subgradient, psi.subgradient, sub_sum),
        recession=recession,
        flags=Flags(supercoercive=f1.supercoercive or f2.supercoercive,
                    positively_homogeneous=f1.positively_homogeneous and f2.positively_homogeneous,
                    even=f1.even and f2.even,
                    full_domain=f1.full_domain and f2.full_domain,
                    nonneg_and_zero_at_zero=(f1.nonneg_and_zero_at_zero
                                             and f2.nonneg_and_zero_at_zero)))


def precompose_linear(phi: ConvexFunction, matrix, witness=None) -> ConvexFunction:
    """``x -> phi(M x)`` for an ``m x n`` matrix ``M`` with ``m == phi.dim``."""
    M = np.atleast_2d(np.asarray(matrix, dtype=float))
    if M.shape[0] != phi.dim:
        raise BadParam(f"matrix has {M.shape[0]} rows, phi lives on R^{phi.dim}")
    n = M.shape[1]
    z = np.zeros(n) if witness is None else as_vector(witness, n)
    if not phi.value(M @ z) < INF:
        raise EmptyIntersection("witness is not mapped into dom phi")

    def value(x):
        return phi.value(M @ x)

    recession = None
    if phi.recession is not None:
        def recession(x):
            return phi.recession(M @ x)

    subgradient = None
    if phi.subgradient is not None:
        def subgradient(x):
            g = phi.subgradient(M @ x)
            if isinstance(g, Ball):
                if g.radius == 0:
                    return [M.T @ g.center]
                raise Unsupported("image of a ball under a linear map is not a ball")
            return [M.T @ u for u in g]

    injective = np.linalg.matrix_rank(M) == n
    f = phi.flags
    return ConvexFunction(
        dim=n, value=value, witness=z, name=f"{phi.name}∘L",
        subgradient=subgradient, recession=recession,
        flags=Flags(supercoercive=f.supercoercive and injective,
                    positively_homogeneous=f.positively_homogeneous,
                    even=f.even, full_domain=f.full_domain,
                    nonneg_and_zero_at_zero=f.nonneg_and_zero_at_zero))


def compose_monotone(outer: ConvexFunction, inner: ConvexFunction) -> ConvexFunction:
    """``outer ∘ inner`` for positively homogeneous, finite ``inner`` and scalar ``outer``.

    ``outer`` must be nondecreasing on ``[0, inf)`` with ``0`` in its domain.
    Even outer functions qualify outright; otherwise monotonicity is probed
    on a ladder of points.  The recession function is ``(rec outer)(inner(y))``.
    """
    if outer.dim != 1:
        raise BadParam("outer function must be defined on R")
    if not (inner.flags.positively_homogeneous and inner.flags.full_domain):
        raise FlagViolation("inner function must be positively homogeneous with full domain")
    if not outer.value(np.zeros(1)) < INF:
        raise FlagViolation("0 must lie in the domain of the outer function")
    if not inner.flags.nonneg_and_zero_at_zero:
        raise FlagViolation("inner function must be nonnegative")
    if not outer.flags.even:
        ladder = [outer.value(np.array([t])) for t in (0.0, *np.logspace(-3, 3, 25))]
        finite = [v for v in ladder if v < INF]
        if any(b < a for a, b in zip(finite, finite[1:])):
            raise FlagViolation("outer function must be nondecreasing on [0, inf)")

    def value(y):
        return outer.value(np.array([inner.value(y)]))

    recession = None
    if outer.recession is not None:
        def recession(y):
            return outer.recession(np.array([inner.value(y)]))

    subgradient = None
    if outer.subgradient is not None and inner.subgradient is not None:
        def subgradient(y):
            slopes = [float(a[0]) for a in _generators(outer.subgradient(np.array([inner.value(y)])))]
            g = inner.subgradient(y)
            if isinstance(g, Ball):
                if np.any(g.center):
                    raise Unsupported("off-centre ball subdifferential")
                if any(a < 0 for a in slopes):
                    raise Unsupported("negative outer slope on a ball subdifferential")
                return Ball(g.center, max(slopes) * g.radius)
            return [a * u for a in slopes for u in g]

    return ConvexFunction(
        dim=inner.dim, value=value, witness=np.zeros(inner.dim),
        name=f"{outer.name}∘{inner.name}", subgradient=subgradient, recession=recession,
        flags=Flags(even=inner.flags.even, full_domain=outer.flags.full_domain,
                    nonneg_and_zero_at_zero=outer.flags.nonneg_and_zero_at_zero))


def composed_perspective(outer: ConvexFunction, inner: ConvexFunction, eta: float, y) -> float:
    """``outer~(eta, inner(y))``; equals the perspective of ``outer ∘ inner``."""
    return Perspective(outer).value(eta, np.array([inner.value(as_vector(y, inner.dim))]))


def direct_sum(parts: Sequence[ConvexFunction]) -> ConvexFunction:
    """Separable sum ``(y_1, ..., y_k) -> sum_i phi_i(y_i)`` on the concatenated space."""
    parts = list(parts)
    if not parts:
        raise BadParam("direct_sum needs at least one part")
    cuts = np.cumsum([0] + [p.dim for p in parts])
    slices = [slice(a, b) for a, b in zip(cuts[:-1], cuts[1:])]

    def value(y):
        return ext_sum(p.value(y[s]) for p, s in zip(parts, slices))

    def lift(attr):
        if any(getattr(p, attr) is None for p in parts):
            return None

        def oracle(y):
            return ext_sum(getattr(p, attr)(y[s]) for p, s in zip(parts, slices))
        return oracle

    subgradient = None
    if all(p.subgradient is not None for p in parts):
        def subgradient(y):
            sets = [_generators(p.subgradient(y[s])) for p, s in zip(parts, slices)]
            return [np.concatenate(combo) for combo in itertools.product(*sets)]

    fl = [p.flags for p in parts]
    return ConvexFunction(
        dim=int(cuts[-1]), value=value, witness=np.concatenate([p.witness for p in parts]),
        name="⊕".join(p.name for p in parts), subgradient=subgradient,
        recession=lift("recession"), conjugate=lift("conjugate"),
        flags=Flags(supercoercive=_and(*(f.supercoercive for f in fl)),
                    positively_homogeneous=_and(*(f.positively_homogeneous for f in fl)),
                    even=_and(*(f.even for f in fl)),
                    full_domain=_and(*(f.full_domain for f in fl)),
                    nonneg_and_zero_at_zero=_and(*(f.nonneg_and_zero_at_zero for f in fl))))


def direct_sum_perspective(parts: Sequence[ConvexFunction], eta: float, ys: Sequence) -> float:
    """``sum_i phi_i~(eta, y_i)``: the same ``eta`` in every slot."""
    return ext_sum(Perspective(p).value(eta, y) for p, y in zip(parts, ys))


# ---------------------------------------------------------------------------
# affine composition

@dataclass(frozen=True)
class AffineMap:
    """``A: x -> (<x, u> - rho, L x - r)``."""

    L: np.ndarray
    r: np.ndarray
    u: np.ndarray
    rho: float = 0.0

    def __post_init__(self):
        L = np.atleast_2d(np.asarray(self.L, dtype=float))
        r = as_vector(self.r)
        u = as_vector(self.u)
        if L.shape != (r.size, u.size):
            raise BadParam(f"L must be {r.size}x{u.size}, got {L.shape}")
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "rho", float(self.rho))

    def __call__(self, x):
        x = as_vector(x, self.u.size)
        return float(np.dot(x, self.u)) - self.rho, self.L @ x - self.r


class AffinePerspective:
    """``f = phi~ ∘ A``; callable on ``R^n``."""

    def __init__(self, phi: ConvexFunction, A: AffineMap, witness):
        if A.r.size != phi.dim:
            raise BadParam(f"L maps into R^{A.r.size}, phi lives on R^{phi.dim}")
        self.phi = phi
        self.A = A
        self.persp = Perspective(phi)
        z = as_vector(witness, A.u.size)
        t, w = A(z)
        # witness condition: L z in r + t dom phi with t >= 0; t = 0 forces L z = r
        ok = t >= 0 and (self.persp.value(t, w) < INF if t > 0 else not np.any(w))
        if not ok:
            raise BadWitness(f"witness {z} does not certify properness")
        self.witness = z

    @property
    def dim(self) -> int:
        return self.A.u.size

    def __call__(self, x) -> float:
        t, w = self.A(x)
        return self.persp.value(t, w)


def affine_perspective(phi: ConvexFunction, A: AffineMap, witness) -> AffinePerspective:
    return AffinePerspective(phi, A, witness)


def _trex_witness(A: AffineMap) -> np.ndarray:
    nu = float(np.dot(A.u, A.u))
    if nu > 0:
        return A.u * ((A.rho + 1.0) / nu)
    if A.rho < 0:
        return np.zeros(A.u.size)
    if A.rho == 0:
        z, *_ = np.linalg.lstsq(A.L, A.r, rcond=None)
        if np.array_equal(A.L @ z, A.r):
            return z
    raise BadParam("no point satisfies <x, u> >= rho with L x = r on the boundary")


def trex(L, r, u, rho: float, q: float, s: float = 1.0, norm_weights=None) -> Callable:
    """Generalized TREX objective ``|||Lx - r|||^(qs) / |<x,u> - rho|^((q-1)s)``.

    ``|||y||| = ||w * y||`` with positive weights ``w`` (all ones by default).
    Built as ``(phi~ ∘ A)^s`` with ``phi = |||.|||^q``.
    """
    q, s = float(q), float(s)
    if not (q > 1 and math.isfinite(q)):
        raise BadParam(f"q must be > 1, got {q}")
    if not (s >= 1 and math.isfinite(s)):
        raise BadParam(f"s must be >= 1, got {s}")
    A = AffineMap(L, r, u, rho)
    w = np.ones(A.r.size) if norm_weights is None else as_vector(norm_weights, A.r.size)
    if not np.all(w > 0):
        raise BadParam("norm weights must be positive")
    f = AffinePerspective(make_weighted_norm_power(w, q), A, _trex_witness(A))

    def h(x):
        val = f(x)
        return INF if val == INF else val ** s

    h.inner = f
    return h


def expectation_perspective(weights, phi: ConvexFunction, X) -> float:
    """``E[X] * E[phi(X / E[X])]`` over a finite probability vector.

    ``E[X] = 0`` gives ``E[(rec phi)(X)]`` and ``E[X] < 0`` gives ``+inf``.
    Atoms with zero probability are ignored.
    """
    w = as_vector(weights)
    X = as_vector(X, w.size)
    if phi.dim != 1:
        raise BadParam("phi must be defined on R")
    if np.any(w < 0) or not math.isclose(math.fsum(w), 1.0, rel_tol=0, abs_tol=1e-12):
        raise BadWeights("weights must be nonnegative and sum to 1")
    keep = w > 0
    w, X = w[keep], X[keep]

    def value(x):
        return ext_sum(ext_scale(wi, phi.value(x[i:i + 1])) for i, wi in enumerate(w))

    recession = None
    if phi.recession is not None:
        def recession(x):
            return ext_sum(ext_scale(wi, phi.recession(x[i:i + 1])) for i, wi in enumerate(w))

    # integral functional x -> E[phi(x)]; its perspective evaluated at (E[X], X)
    integral = ConvexFunction(dim=w.size, value=value, recession=recession,
                              witness=np.full(w.size, phi.witness[0]), name=f"E[{phi.name}]")
    m = math.fsum(w * X)
    return Perspective(integral).value(m, X)


# ---------------------------------------------------------------------------
# marginal and ball-constrained perspectives

@dataclass(frozen=True)
class IntervalK:
    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if not (0 <= lo <= hi and math.isfinite(hi)):
            raise BadParam(f"need 0 <= lo <= hi < inf, got [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)


def marginal(P: Perspective, K: IntervalK, y, grid: int = 64) -> float:
    """``min_{eta in K} P(eta, y)`` by bracketed ternary search.

    ``eta -> P(eta, y)`` is convex on ``K``.  A coarse scan locates a finite
    best point (``eta = lo`` included, which covers the recession branch when
    ``lo = 0``), then a three-point bracket around it is shrunk to width
    ``1e-10 * (1 + hi)``.  Probes with value ``+inf`` lie outside the domain
    and simply shrink the bracket toward the finite point.
    """
    y = as_vector(y, P.dim)

    def f(eta):
        return P.value(eta, y)

    if K.lo == K.hi:
        v = f(K.lo)
        if v == INF:
            raise AllInfinite(f"perspective is +inf at eta={K.lo}")
        return v
    etas = np.linspace(K.lo, K.hi, grid + 1)
    vals = [f(e) for e in etas]
    k = int(np.argmin(vals))
    if vals[k] == INF:
        raise AllInfinite("perspective is +inf at every probed eta")
    best = vals[k]
    a = etas[max(k - 1, 0)]
    c = etas[min(k + 1, grid)]
    b, fb = etas[k], vals[k]
    width = 1e-10 * (1.0 + K.hi)
    while c - a > width:
        # probe the larger side of the bracket
        if c - b >= b - a:
            x = b + 0.5 * (c - b)
            fx = f(x)
            if fx < fb:
                a, b, fb = b, x, fx
            else:
                c = x
        else:
            x = b - 0.5 * (b - a)
            fx = f(x)
            if fx < fb:
                c, b, fb = b, x, fx
            else:
                a = x
        best = min(best, fb)
    return best


def constrained_perspective(psi: ConvexFunction, radius: float, eta: float, y) -> float:
    """Perspective of ``psi + indicator of B(0; radius)``."""
    radius = float(radius)
    if not radius > 0:
        raise BadParam("ball radius must be > 0")
    y = as_vector(y, psi.dim)
    eta = float(eta)
    if eta > 0:
        if euclidean_norm(y) > eta * radius:
            return INF
        return ext_scale(eta, psi.value(y * (1.0 / eta)))
    if eta == 0 and not np.any(y):
        # rec of the ball is {0} and rec psi(0) = 0
        return 0.0
    return INF


def generalized_huber_perspective(rho: float, eta: float, y) -> float:
    """Perspective of the Moreau envelope of ``rho ||.||`` via the projector onto ``B(0; rho)``."""
    rho = float(rho)
    if not rho > 0:
        raise BadParam("rho must be > 0")
    y = as_vector(y)
    eta = float(eta)
    if eta < 0:
        return INF
    r = euclidean_norm(y)
    if eta == 0:
        return rho * r  # support function of the ball
    if r <= eta * rho:
        return r * r / (2.0 * eta)
    x = y * (1.0 / eta)
    proj = x * (rho / euclidean_norm(x))
    return float(np.dot(y, proj)) - eta * float(np.dot(proj, proj)) / 2.0
