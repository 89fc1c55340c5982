"""Closed-form base functions with their recession, conjugate and subgradient data.

Every constructor returns a :class:`~perspectra.core.ConvexFunction`.  The
registry :data:`CATALOG` maps the command-line names to builders taking a
dimension and a dict of parsed parameters.
"""

from __future__ import annotations

import math
from typing import Callable, Dict, Optional

import numpy as np

from .core import (INF, BadParam, Ball, ConvexFunction, Flags, FlagViolation,
                   as_vector, euclidean_norm)

__all__ = [
    "make_norm_power", "make_huber", "make_berhu", "make_vapnik",
    "make_entropy", "make_power_divergence_generator", "make_fair",
    "make_log_barrier", "make_homogeneous_mix", "make_weighted_norm_power",
    "make_zero", "make_linear", "CATALOG", "build", "parse_params",
]

# Ball indicators accept ||u|| <= r (1 + BALL_SLACK) so that unit vectors
# built as y / ||y|| are not rejected because of rounding.
BALL_SLACK = 1e-12


def _in_ball(u, r):
    return euclidean_norm(u) <= r * (1.0 + BALL_SLACK)


def _require(cond, msg):
    if not cond:
        raise BadParam(msg)


def _positive(x, name):
    x = float(x)
    _require(math.isfinite(x) and x > 0, f"{name} must be a finite real > 0, got {x}")
    return x


def _at_least_one(p, name="p"):
    p = float(p)
    _require(math.isfinite(p) and p >= 1, f"{name} must be a finite real >= 1, got {p}")
    return p


def _dim(n):
    _require(int(n) == n and n >= 1, f"dimension must be a positive integer, got {n}")
    return int(n)


def _indicator_zero(y):
    return 0.0 if not np.any(y) else INF


def _unit(y):
    return y / euclidean_norm(y)


def _sign(t):
    return float(np.sign(t))


# ---------------------------------------------------------------------------
# norm-like functions on R^n

def make_norm_power(n: int, p: float = 2.0, scale: float = 1.0) -> ConvexFunction:
    """``scale * ||y||^p``; positively homogeneous for ``p == 1``, supercoercive otherwise."""
    n, p, scale = _dim(n), _at_least_one(p), _positive(scale, "scale")

    def value(y):
        return scale * euclidean_norm(y) ** p

    def subgradient(y):
        r = euclidean_norm(y)
        if r == 0.0:
            return Ball(np.zeros(n), scale) if p == 1 else [np.zeros(n)]
        return [scale * p * r ** (p - 2) * y]

    if p == 1:
        def recession(y):
            return scale * euclidean_norm(y)

        def conjugate(u):
            return 0.0 if _in_ball(u, scale) else INF

        def support_points(y):
            return [scale * _unit(y)]
    else:
        recession = _indicator_zero
        support_points = None

        def conjugate(u):
            return scale * (p - 1) * (euclidean_norm(u) / (scale * p)) ** (p / (p - 1))

    return ConvexFunction(
        dim=n, value=value, witness=np.zeros(n), name=f"norm_pow(p={p:g},scale={scale:g})",
        subgradient=subgradient, recession=recession, conjugate=conjugate,
        support_points=support_points,
        flags=Flags(supercoercive=p > 1, positively_homogeneous=p == 1, even=True,
                    full_domain=True, nonneg_and_zero_at_zero=True))


def make_weighted_norm_power(weights, q: float) -> ConvexFunction:
    """``||w * y||^q`` with positive weights ``w``; ``||w * y|| >= min(w) ||y||``."""
    w = as_vector(weights)
    _require(np.all(w > 0), "weights must be positive")
    q = _at_least_one(q, "q")
    n = w.size

    def value(y):
        return euclidean_norm(w * y) ** q

    def subgradient(y):
        wy = w * y
        r = euclidean_norm(wy)
        if r == 0.0:
            return Ball(np.zeros(n), float(w.max())) if q == 1 else [np.zeros(n)]
        return [q * r ** (q - 2) * w * wy]

    if q == 1:
        def recession(y):
            return euclidean_norm(w * y)
    else:
        recession = _indicator_zero

    return ConvexFunction(
        dim=n, value=value, witness=np.zeros(n), name=f"weighted_norm_pow(q={q:g})",
        subgradient=subgradient, recession=recession,
        flags=Flags(supercoercive=q > 1, positively_homogeneous=q == 1, even=True,
                    full_domain=True, nonneg_and_zero_at_zero=True))


def make_huber(n: int, rho: float = 1.0) -> ConvexFunction:
    """Moreau envelope of ``rho * ||.||``: quadratic on ``B(0; rho)``, affine in the norm outside."""
    n, rho = _dim(n), _positive(rho, "rho")

    def value(y):
        r = euclidean_norm(y)
        if r <= rho:
            return 0.5 * r * r
        return rho * r - 0.5 * rho * rho

    def subgradient(y):
        r = euclidean_norm(y)
        if r <= rho:
            return [np.array(y, dtype=float)]
        return [rho * y / r]

    def recession(y):
        return rho * euclidean_norm(y)

    def conjugate(u):
        return 0.5 * euclidean_norm(u) ** 2 if _in_ball(u, rho) else INF

    def support_points(y):
        return [rho * _unit(y)]

    return ConvexFunction(
        dim=n, value=value, witness=np.zeros(n), name=f"huber(rho={rho:g})",
        subgradient=subgradient, recession=recession, conjugate=conjugate,
        support_points=support_points,
        flags=Flags(even=True, full_domain=True, nonneg_and_zero_at_zero=True))


def make_berhu(n: int, rho: float = 1.0) -> ConvexFunction:
    """Reverse Huber: ``||y||`` on ``B(0; rho)``, ``(||y||^2 + rho^2) / (2 rho)`` outside."""
    n, rho = _dim(n), _positive(rho, "rho")

    def value(y):
        r = euclidean_norm(y)
        if r <= rho:
            return r
        return (r * r + rho * rho) / (2.0 * rho)

    def subgradient(y):
        r = euclidean_norm(y)
        if r == 0.0:
            return Ball(np.zeros(n), 1.0)
        if r <= rho:
            return [y / r]
        return [y / rho]

    def conjugate(u):
        t = max(euclidean_norm(u) - 1.0, 0.0)
        return rho * (t + 0.5 * t * t)

    return ConvexFunction(
        dim=n, value=value, witness=np.zeros(n), name=f"berhu(rho={rho:g})",
        subgradient=subgradient, recession=_indicator_zero, conjugate=conjugate,
        flags=Flags(supercoercive=True, even=True, full_domain=True,
                    nonneg_and_zero_at_zero=True))


def make_vapnik(n: int, eps: float = 1.0) -> ConvexFunction:
    """epsilon-insensitive loss ``max(||y|| - eps, 0)``, i.e. the distance to ``B(0; eps)``."""
    n, eps = _dim(n), _positive(eps, "eps")

    def value(y):
        return max(euclidean_norm(y) - eps, 0.0)

    def subgradient(y):
        r = euclidean_norm(y)
        if r < eps:
            return [np.zeros(n)]
        if r > eps:
            return [y / r]
        return [np.zeros(n), y / r]

    def recession(y):
        return euclidean_norm(y)

    def conjugate(u):
        return eps * euclidean_norm(u) if _in_ball(u, 1.0) else INF

    def support_points(y):
        return [_unit(y)]

    return ConvexFunction(
        dim=n, value=value, witness=np.zeros(n), name=f"vapnik(eps={eps:g})",
        subgradient=subgradient, recession=recession, conjugate=conjugate,
        support_points=support_points,
        flags=Flags(even=True, full_domain=True, nonneg_and_zero_at_zero=True))


# ---------------------------------------------------------------------------
# scalar functions

def make_entropy() -> ConvexFunction:
    """Boltzmann-Shannon entropy ``t ln t`` with ``0 ln 0 = 0`` and ``+inf`` on ``t < 0``."""

    def value(y):
        t = y[0]
        if t > 0:
            return t * math.log(t)
        return 0.0 if t == 0 else INF

    def subgradient(y):
        t = y[0]
        return [np.array([math.log(t) + 1.0])] if t > 0 else []

    def conjugate(u):
        return math.exp(u[0] - 1.0)

    return ConvexFunction(
        dim=1, value=value, witness=np.array([1.0]), name="entropy",
        subgradient=subgradient, recession=_indicator_zero, conjugate=conjugate,
        flags=Flags(supercoercive=True))


def make_power_divergence_generator(p: float = 2.0) -> ConvexFunction:
    """``|t^(1/p) - 1|^p`` on ``t >= 0``; p=1 gives the variational, p=2 the Hellinger generator."""
    p = _at_least_one(p)

    def value(y):
        t = y[0]
        if t < 0:
            return INF
        return abs(t ** (1.0 / p) - 1.0) ** p

    def subgradient(y):
        t = y[0]
        if t < 0:
            return []
        if t == 0:
            if p == 1:
                # ]-inf, -1] is not representable by finitely many generators
                raise BadParam("subdifferential of power_div(p=1) at 0 is unbounded")
            return []
        if t == 1 and p == 1:
            return [np.array([-1.0]), np.array([1.0])]
        s = t ** (1.0 / p)
        g = abs(s - 1.0) ** (p - 1) * _sign(s - 1.0) * t ** (1.0 / p - 1.0)
        return [np.array([g])]

    def recession(y):
        d = y[0]
        return d if d >= 0 else INF

    def support_points(y):
        # dom conjugate = ]-inf, 1]; only d > 0 is exposed (at 1)
        return [np.array([1.0])] if y[0] > 0 else []

    conjugate: Optional[Callable] = None
    if p == 1:
        def conjugate(u):
            return max(u[0], -1.0) if u[0] <= 1 else INF
    elif p == 2:
        def conjugate(u):
            return u[0] / (1.0 - u[0]) if u[0] < 1 else INF

    return ConvexFunction(
        dim=1, value=value, witness=np.array([1.0]), name=f"power_div(p={p:g})",
        subgradient=subgradient, recession=recession, conjugate=conjugate,
        support_points=support_points, flags=Flags())


def make_fair(rho: float = 1.0, p: float = 1.0) -> ConvexFunction:
    """``rho |t|^p - ln(1 + rho |t|^p)``."""
    rho, p = _positive(rho, "rho"), _at_least_one(p)

    def value(y):
        a = rho * abs(y[0]) ** p
        return a - math.log1p(a)

    def subgradient(y):
        t = y[0]
        a = rho * abs(t) ** p
        return [np.array([rho * p * abs(t) ** (p - 1) * _sign(t) * a / (1.0 + a)])]

    if p == 1:
        def recession(y):
            return rho * abs(y[0])

        def support_points(y):
            # dom conjugate = ]-rho, rho[ is open: no support points
            return []
    else:
        recession = _indicator_zero
        support_points = None

    return ConvexFunction(
        dim=1, value=value, witness=np.array([0.0]), name=f"fair(rho={rho:g},p={p:g})",
        subgradient=subgradient, recession=recession, support_points=support_points,
        flags=Flags(supercoercive=p > 1, even=True, full_domain=True,
                    nonneg_and_zero_at_zero=True))


def make_log_barrier(p: float = 2.0) -> ConvexFunction:
    """``-ln(1 - |t|^p)`` on ``|t| < 1``, ``+inf`` elsewhere."""
    p = _at_least_one(p)

    def value(y):
        a = abs(y[0])
        if a >= 1:
            return INF
        return -math.log1p(-(a ** p))

    def subgradient(y):
        t = y[0]
        a = abs(t)
        if a >= 1:
            return []
        if t == 0 and p == 1:
            return [np.array([-1.0]), np.array([1.0])]
        return [np.array([p * a ** (p - 1) * _sign(t) / (1.0 - a ** p)])]

    return ConvexFunction(
        dim=1, value=value, witness=np.array([0.0]), name=f"log_barrier(p={p:g})",
        subgradient=subgradient, recession=_indicator_zero,
        flags=Flags(supercoercive=True, even=True, nonneg_and_zero_at_zero=True))


def make_homogeneous_mix(psi: ConvexFunction, delta: float = 0.0, rho: float = 1.0,
                         p: float = 2.0, v=None) -> ConvexFunction:
    """``delta + <y, v> + (rho + psi(y)^p)^(1/p)`` for a nonnegative positively homogeneous ``psi``.

    Its recession function is ``<y, v> + psi(y)``.
    """
    if not (psi.flags.positively_homogeneous and psi.flags.nonneg_and_zero_at_zero):
        raise FlagViolation("psi must be positively homogeneous, nonnegative and zero at zero")
    delta = float(delta)
    rho = float(rho)
    _require(math.isfinite(delta), "delta must be finite")
    _require(math.isfinite(rho) and rho >= 0, f"rho must be >= 0, got {rho}")
    p = _at_least_one(p)
    n = psi.dim
    v = np.zeros(n) if v is None else as_vector(v)
    if v.size == 1 and n > 1:
        v = np.full(n, v[0])
    _require(v.size == n, f"v must have dimension {n}")

    def value(y):
        s = psi.value(y)
        if s == INF:
            return INF
        return delta + float(np.dot(y, v)) + (rho + s ** p) ** (1.0 / p)

    def recession(y):
        return float(np.dot(y, v)) + psi.value(y)

    subgradient = None
    if psi.subgradient is not None:
        def subgradient(y):
            s = psi.value(y)
            root = (rho + s ** p) ** (1.0 / p)
            factor = 1.0 if root == 0.0 or p == 1 else (s / root) ** (p - 1)
            g = psi.subgradient(y)
            if isinstance(g, Ball):
                return Ball(v + factor * g.center, factor * g.radius)
            return [v + factor * gi for gi in g]

    even = not np.any(v) and psi.flags.even
    return ConvexFunction(
        dim=n, value=value, witness=psi.witness, name="homog_mix",
        subgradient=subgradient, recession=recession,
        flags=Flags(positively_homogeneous=(rho == 0 and delta == 0), even=even,
                    full_domain=psi.flags.full_domain))


def make_zero(n: int) -> ConvexFunction:
    n = _dim(n)
    return ConvexFunction(
        dim=n, value=lambda y: 0.0, witness=np.zeros(n), name="zero",
        subgradient=lambda y: [np.zeros(n)], recession=lambda y: 0.0,
        conjugate=lambda u: 0.0 if not np.any(u) else INF,
        flags=Flags(positively_homogeneous=True, even=True, full_domain=True,
                    nonneg_and_zero_at_zero=True))


def make_linear(v) -> ConvexFunction:
    v = as_vector(v)

    def value(y):
        return float(np.dot(v, y))

    return ConvexFunction(
        dim=v.size, value=value, witness=np.zeros(v.size), name="linear",
        subgradient=lambda y: [v.copy()], recession=value,
        conjugate=lambda u: 0.0 if np.array_equal(u, v) else INF,
        flags=Flags(positively_homogeneous=True, full_domain=True))


# ---------------------------------------------------------------------------
# registry used by the CLI

def _scalar_only(n):
    if n != 1:
        raise BadParam("this function is defined on R only (dimension 1)")


def _build_homog_mix(n, prm):
    return make_homogeneous_mix(make_norm_power(n, 1.0), delta=prm.get("delta", 0.0),
                                rho=prm.get("rho", 1.0), p=prm.get("p", 2.0),
                                v=prm.get("v"))


def _scalar(name):
    def get(prm, key, default):
        val = prm.get(key, default)
        if isinstance(val, np.ndarray):
            if val.size != 1:
                raise BadParam(f"{name}: parameter {key} must be a single real")
            val = float(val[0])
        return val
    return get


def _builders():
    g = _scalar("param")

    def entropy(n, prm):
        _scalar_only(n)
        return make_entropy()

    def power_div(n, prm):
        _scalar_only(n)
        return make_power_divergence_generator(g(prm, "p", 2.0))

    def fair(n, prm):
        _scalar_only(n)
        return make_fair(g(prm, "rho", 1.0), g(prm, "p", 1.0))

    def log_barrier(n, prm):
        _scalar_only(n)
        return make_log_barrier(g(prm, "p", 2.0))

    return {
        "huber": (lambda n, prm: make_huber(n, g(prm, "rho", 1.0)), {"rho"}),
        "berhu": (lambda n, prm: make_berhu(n, g(prm, "rho", 1.0)), {"rho"}),
        "vapnik": (lambda n, prm: make_vapnik(n, g(prm, "eps", 1.0)), {"eps"}),
        "norm_pow": (lambda n, prm: make_norm_power(n, g(prm, "p", 2.0), g(prm, "scale", 1.0)),
                     {"p", "scale"}),
        "entropy": (entropy, set()),
        "power_div": (power_div, {"p"}),
        "fair": (fair, {"rho", "p"}),
        "log_barrier": (log_barrier, {"p"}),
        "homog_mix": (_build_homog_mix, {"delta", "rho", "p", "v"}),
    }


CATALOG: Dict[str, tuple] = _builders()


def parse_params(pairs) -> dict:
    """Parse ``key=value`` strings; values are decimals or comma-separated decimals."""
    out = {}
    for item in pairs or ():
        key, sep, raw = item.partition("=")
        key = key.strip()
        if not sep or not key:
            raise BadParam(f"parameter must look like key=value, got {item!r}")
        try:
            vals = [float(s) for s in raw.split(",")]
        except ValueError:
            raise BadParam(f"parameter {key}: not a decimal: {raw!r}") from None
        if not all(math.isfinite(x) for x in vals):
            raise BadParam(f"parameter {key} must be finite")
        out[key] = vals[0] if len(vals) == 1 else np.array(vals)
    return out


def build(name: str, dim: int, params: Optional[dict] = None) -> ConvexFunction:
    """Instantiate catalog entry ``name`` on ``R^dim``."""
    try:
        builder, keys = CATALOG[name]
    except KeyError:
        raise BadParam(f"unknown function {name!r}; choose from {sorted(CATALOG)}") from None
    params = dict(params or {})
    unknown = set(params) - keys
    if unknown:
        raise BadParam(f"{name}: unknown parameter(s) {sorted(unknown)}")
    return builder(dim, params)
