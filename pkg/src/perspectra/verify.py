"""Seeded property checks and the two pathology demonstrations.

Every check returns a :class:`CheckReport`.  :func:`run_all_checks` is the
suite behind ``perspectra check --all``; passing ``defect=k`` swaps every
perspective for one of three deliberately broken variants so that the
suite's sensitivity can itself be tested.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from . import catalog
from .calculus import (compose_monotone, composed_perspective, direct_sum,
                       direct_sum_perspective, precompose_linear, scale_add)
from .core import (INF, ConvexFunction, DemoOverflow, SamplerExhausted,
                   euclidean_norm, ext_add, ext_scale)
from .perspective import (FinitePairSet, Perspective, SubgradientPair)

__all__ = [
    "CheckReport", "MAX_ATTEMPTS", "perspective_sampler", "convexity_chord_check",
    "homogeneity_check", "fenchel_young_check", "lsc_path_check",
    "minimizing_sequence_demo", "minimizing_sequence_check", "identity_check",
    "make_mutant", "check_entries", "run_all_checks", "DEFECTS",
]

MAX_ATTEMPTS = 100_000
DEFECTS = {
    1: "recession replaced by 0",
    2: "eta < 0 branch evaluates eta * phi(y / eta)",
    3: "subgradient mu shifted by +1",
}


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if isinstance(x, (np.floating, np.integer)):
        return _jsonable(x.item())
    return x


@dataclass
class CheckReport:
    name: str
    trials: int
    seed: int
    failures: List[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def fail(self, input, relation: str, observed) -> None:
        self.failures.append({"input": _jsonable(input), "relation": relation,
                              "observed": _jsonable(observed)})

    def to_dict(self) -> dict:
        return {"name": self.name, "trials": self.trials, "seed": self.seed,
                "failures": self.failures, "passed": self.passed}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _close(a: float, b: float, tol: float, relative: bool = False) -> bool:
    if a == INF or b == INF:
        return a == b
    scale = max(1.0, abs(a), abs(b)) if relative else 1.0
    return abs(a - b) <= tol * scale


# ---------------------------------------------------------------------------
# samplers

def perspective_sampler(P, p_zero_eta=0.1, p_neg_eta=0.1, p_zero_y=0.1,
                        eta_max=4.0, y_scale=2.0, positive_only=False):
    """Random ``(eta, y)`` stacked into one vector, rejecting infinite values."""
    n = P.dim

    def draw(rng):
        u = rng.uniform()
        if positive_only:
            eta = rng.uniform(0.05, eta_max)
        elif u < p_zero_eta:
            eta = 0.0
        elif u < p_zero_eta + p_neg_eta:
            eta = -rng.uniform(0.05, eta_max)
        else:
            eta = rng.uniform(0.05, eta_max)
        y = np.zeros(n) if rng.uniform() < p_zero_y else y_scale * rng.standard_normal(n)
        return np.concatenate([[eta], y])

    def sample(rng, budget):
        for _ in range(budget[0]):
            budget[0] -= 1
            z = draw(rng)
            if P.value(z[0], z[1:]) < INF:
                return z
        raise SamplerExhausted("could not draw a point with a finite value")

    return sample


def _budgeted(sampler):
    budget = [MAX_ATTEMPTS]

    def draw(rng):
        return sampler(rng, budget)
    return draw


# ---------------------------------------------------------------------------
# checks

def convexity_chord_check(f: Callable, sampler, trials: int = 1000, tol: float = 1e-9,
                          seed: int = 0, name: str = "convexity") -> CheckReport:
    """``f(t a + (1 - t) b) <= t f(a) + (1 - t) f(b) + tol`` on sampled pairs.

    ``sampler(rng, budget)`` must return points where ``f`` is finite; it
    shares a budget of :data:`MAX_ATTEMPTS` draws.
    """
    rng = np.random.default_rng(seed)
    draw = _budgeted(sampler)
    report = CheckReport(name, trials, seed)
    for _ in range(trials):
        a, b = draw(rng), draw(rng)
        t = rng.uniform(1e-6, 1 - 1e-6)
        lhs = f(t * a + (1 - t) * b)
        rhs = t * f(a) + (1 - t) * f(b)
        if not lhs <= rhs + tol:
            report.fail([a, b, t], "f(ta+(1-t)b) <= tf(a)+(1-t)f(b)", [lhs, rhs])
    return report


def homogeneity_check(P, trials: int = 1000, tol: float = 1e-12, seed: int = 0,
                      sampler=None, name: str = "homogeneity") -> CheckReport:
    """``P(l eta, l y) = l P(eta, y)`` for ``l`` in ``(0, 10]``, relative ``tol``."""
    rng = np.random.default_rng(seed)
    draw = _budgeted(sampler or perspective_sampler(P))
    report = CheckReport(name, trials, seed)
    for _ in range(trials):
        z = draw(rng)
        lam = 10.0 * (1.0 - rng.uniform())
        lhs = P.value(lam * z[0], lam * z[1:])
        rhs = ext_scale(lam, P.value(z[0], z[1:]))
        if not _close(lhs, rhs, tol, relative=True):
            report.fail([z, lam], "P(l*z) == l*P(z)", [lhs, rhs])
    return report


def fenchel_young_check(P, trials: int = 1000, tol: float = 1e-9, seed: int = 0,
                        probes: int = 0, sampler=None,
                        name: str = "fenchel_young") -> CheckReport:
    """Every subgradient ``(mu, u)`` at ``eta > 0`` satisfies the Fenchel-Young identity.

    Checks ``P(eta, y) = eta mu + <y, u>`` and ``mu + phi*(u) <= tol``; with
    ``probes > 0`` also the subgradient inequality at that many random points.
    """
    rng = np.random.default_rng(seed)
    draw = _budgeted(sampler or perspective_sampler(P, positive_only=True, p_zero_y=0.05))
    probe_draw = _budgeted(perspective_sampler(P))
    report = CheckReport(name, trials, seed)
    for _ in range(trials):
        z = draw(rng)
        eta, y = z[0], z[1:]
        val = P.value(eta, y)
        S = P.subdifferential(eta, y)
        pairs = S.sample(rng, 3)
        if not pairs:
            report.fail(z, "nonempty subdifferential at a point of the domain interior", "empty")
            continue
        for pair in pairs:
            ident = eta * pair.mu + float(np.dot(y, pair.u))
            if not abs(val - ident) <= tol:
                report.fail([z, pair.mu, pair.u], "P(eta,y) == eta*mu + <y,u>", [val, ident])
            if not P.conjugate_contains(pair, tol):
                report.fail([z, pair.mu, pair.u], "mu + phi*(u) <= tol",
                            ext_add(pair.mu, P.base.conjugate(pair.u)))
            for _ in range(probes):
                w = probe_draw(rng)
                lhs = P.value(w[0], w[1:])
                rhs = val + pair.mu * (w[0] - eta) + float(np.dot(pair.u, w[1:] - y))
                if not lhs >= rhs - tol:
                    report.fail([z, pair.mu, pair.u, w], "subgradient inequality", [lhs, rhs])
    return report


def lsc_path_check(P, p: float, steps: int = 40, n0: int = 5, tol: float = 1e-9,
                   name: str = "lsc_path") -> CheckReport:
    """Discontinuity of ``||.||^p``'s perspective at the origin, and closure at ``eta = 0``.

    Along ``(a_n^(p/(p-1)), a_n v)`` with ``a_n = 2^-n`` the values must equal
    1 (to ``tol`` for ``n >= n0``) while ``P(0, 0) = 0`` exactly.  At the
    boundary point ``(0, v)`` the value must be the limit of ``P(2^-k, v)``.
    """
    if not p > 1:
        raise ValueError("p must be > 1")
    report = CheckReport(name, steps, 0)
    n = P.dim
    v = np.zeros(n)
    v[0] = 1.0
    for k in range(steps):
        a = 2.0 ** -k
        val = P.value(a ** (p / (p - 1)), a * v)
        if k >= n0 and not abs(val - 1.0) <= tol:
            report.fail(k, "P(y_n) -> 1", val)
    origin = P.value(0.0, np.zeros(n))
    if origin != 0.0:
        report.fail([0.0, 0.0], "P(0,0) == 0", origin)
    at_boundary = P.value(0.0, v)
    approach = [P.value(2.0 ** -k, v) for k in range(10, 41, 5)]
    if at_boundary == INF:
        if any(b < a for a, b in zip(approach, approach[1:])):
            report.fail(v, "P(2^-k, v) increasing toward P(0, v) = inf", approach)
    elif not abs(approach[-1] - at_boundary) <= 1e-6 * (1.0 + abs(at_boundary)):
        report.fail(v, "P(0, v) == lim P(2^-k, v)", [at_boundary, approach[-1]])
    return report


def minimizing_sequence_demo(p: float, n_max: int) -> list:
    """Rows ``(n, gap, distance)`` for ``x_n = ((n+1)^(p+2), n+1)`` on the perspective of ``|.|^2``.

    The minimum value is 0, attained on ``[0, inf) x {0}``.
    """
    p = float(p)
    if not p >= 1:
        raise ValueError("p must be >= 1")
    if n_max < 1:
        return []
    if (p + 2) * math.log10(n_max) > 300 or (p > 50 and n_max > 10_000):
        raise DemoOverflow(f"(n+1)^(p+2) is out of range for n_max={n_max}, p={p}")
    g = Perspective(catalog.make_norm_power(1, 2.0))
    rows = []
    for k in range(n_max):
        xi1, xi2 = float(k + 1) ** (p + 2), float(k + 1)
        gap = g.value(xi1, [xi2]) - 0.0
        proj = (max(xi1, 0.0), 0.0)
        rows.append((k, gap, math.hypot(xi1 - proj[0], xi2 - proj[1])))
    return rows


def minimizing_sequence_check(p: float, n_max: int = 101, tol: float = 1e-12) -> CheckReport:
    report = CheckReport(f"minseq(p={p:g})", n_max, 0)
    for k, gap, dist in minimizing_sequence_demo(p, n_max):
        if not abs(gap - (k + 1) ** -p) <= tol * (k + 1) ** -p:
            report.fail(k, "gap == 1/(n+1)^p", gap)
        if not abs(dist - (k + 1)) <= tol * (k + 1):
            report.fail(k, "distance == n+1", dist)
    return report


def identity_check(lhs: Callable, rhs: Callable, sampler, trials: int = 1000,
                   tol: float = 1e-9, seed: int = 0, name: str = "identity") -> CheckReport:
    """``lhs(z) == rhs(z)`` on sampled ``z`` (both ``+inf`` counts as equal)."""
    rng = np.random.default_rng(seed)
    report = CheckReport(name, trials, seed)
    for _ in range(trials):
        z = sampler(rng)
        a, b = lhs(z), rhs(z)
        if not _close(a, b, tol):
            report.fail(z, "lhs == rhs", [a, b])
    return report


# ---------------------------------------------------------------------------
# mutants

@dataclass(frozen=True, eq=False)
class _Mutant(Perspective):
    defect: int = 0
    mu_shift: float = 1.0

    def recession(self, y):
        if self.defect == 1:
            return 0.0
        return super().recession(y)

    def value(self, eta, y):
        eta = float(eta)
        if self.defect == 2 and eta < 0:
            y = np.asarray(y, dtype=float)
            return eta * self.base.value(y * (1.0 / eta))
        return super().value(eta, y)

    def subdifferential(self, eta, y):
        S = super().subdifferential(eta, y)
        if self.defect == 3 and isinstance(S, FinitePairSet):
            return FinitePairSet(tuple(SubgradientPair(g.mu + self.mu_shift, g.u) for g in S))
        if self.defect == 3 and hasattr(S, "ball"):
            return _ShiftedSet(S, self.mu_shift)
        return S


@dataclass(frozen=True)
class _ShiftedSet:
    inner: object
    shift: float
    is_empty: bool = False

    def sample(self, rng, k=4):
        return [SubgradientPair(g.mu + self.shift, g.u) for g in self.inner.sample(rng, k)]


def make_mutant(P: Perspective, defect: int, mu_shift: float = 1.0) -> Perspective:
    """A copy of ``P`` with defect ``1``, ``2`` or ``3`` (see :data:`DEFECTS`); ``0`` returns ``P``."""
    if defect == 0:
        return P
    if defect not in DEFECTS:
        raise ValueError(f"unknown defect {defect}")
    return _Mutant(P.base, P.recession_mode, P.witness, P.alphas, defect, mu_shift)


# ---------------------------------------------------------------------------
# the suite

def check_entries() -> Dict[str, ConvexFunction]:
    """One representative per catalog entry (two where the exponent changes the shape)."""
    norm1 = catalog.make_norm_power(1, 1.0)
    return {
        "norm_pow(p=1)": catalog.make_norm_power(2, 1.0),
        "norm_pow(p=2)": catalog.make_norm_power(2, 2.0),
        "norm_pow(p=3)": catalog.make_norm_power(1, 3.0, 0.5),
        "huber": catalog.make_huber(2, 1.0),
        "berhu": catalog.make_berhu(2, 1.0),
        "vapnik": catalog.make_vapnik(2, 1.0),
        "entropy": catalog.make_entropy(),
        "power_div(p=1)": catalog.make_power_divergence_generator(1.0),
        "power_div(p=2)": catalog.make_power_divergence_generator(2.0),
        "fair(p=1)": catalog.make_fair(1.0, 1.0),
        "fair(p=2)": catalog.make_fair(0.5, 2.0),
        "log_barrier": catalog.make_log_barrier(2.0),
        "homog_mix(pseudo_huber)": catalog.make_homogeneous_mix(
            catalog.make_norm_power(2, 1.0), delta=-1.0, rho=1.0, p=2.0),
        "homog_mix(fischer_burmeister)": catalog.make_homogeneous_mix(
            norm1, delta=-1.0, rho=1.0, p=2.0, v=[-1.0]),
    }


def _perspective_points(n, p_zero_eta=0.1):
    def draw(rng):
        u = rng.uniform()
        if u < p_zero_eta:
            eta = 0.0
        elif u < 2 * p_zero_eta:
            eta = -rng.uniform(0.05, 4.0)
        else:
            eta = rng.uniform(0.05, 4.0)
        y = np.zeros(n) if rng.uniform() < 0.1 else 2.0 * rng.standard_normal(n)
        return eta, y
    return draw


def calculus_checks(name: str, phi: ConvexFunction, trials: int, seed: int,
                    tol: float = 1e-9) -> List[CheckReport]:
    """Sum, linear precomposition, monotone composition and direct-sum identities for ``phi``."""
    n = phi.dim
    draw = _perspective_points(n)
    reports = []

    psi = catalog.make_norm_power(n, 1.0, 0.7)
    lam = 1.5
    combo = Perspective(scale_add(lam, phi, psi))
    P, Q = Perspective(phi), Perspective(psi)
    reports.append(identity_check(
        lambda z: combo.value(*z),
        lambda z: ext_add(ext_scale(lam, P.value(*z)), Q.value(*z)),
        draw, trials, tol, seed, name=f"scale_add[{name}]"))

    rng = np.random.default_rng(seed + 1)
    M = rng.standard_normal((n, n + 1))
    pre = Perspective(precompose_linear(phi, M))
    xdraw = _perspective_points(n + 1)
    reports.append(identity_check(
        lambda z: pre.value(*z), lambda z: P.value(z[0], M @ z[1]),
        xdraw, trials, tol, seed, name=f"precompose[{name}]"))

    if n == 1 and phi.flags.even and phi.value(np.zeros(1)) < INF:
        inner = catalog.make_norm_power(2, 1.0)
        comp = Perspective(compose_monotone(phi, inner))
        reports.append(identity_check(
            lambda z: comp.value(*z), lambda z: composed_perspective(phi, inner, *z),
            _perspective_points(2), trials, tol, seed, name=f"compose[{name}]"))

    other = catalog.make_huber(2, 0.8)
    ds = Perspective(direct_sum([phi, other]))
    sdraw = _perspective_points(n + 2)
    reports.append(identity_check(
        lambda z: ds.value(*z),
        lambda z: direct_sum_perspective([phi, other], z[0], [z[1][:n], z[1][n:]]),
        sdraw, trials, tol, seed, name=f"direct_sum[{name}]"))
    return reports


def run_all_checks(seed: int = 0, trials: int = 1000, defect: int = 0,
                   include_calculus: bool = True) -> List[CheckReport]:
    """Run the whole suite; with ``defect`` every perspective is replaced by a mutant."""
    reports = []
    for i, (name, phi) in enumerate(check_entries().items()):
        P = make_mutant(Perspective(phi), defect)
        s = seed + 1000 * i
        reports.append(convexity_chord_check(
            lambda z, P=P: P.value(z[0], z[1:]), perspective_sampler(P), trials, 1e-9, s,
            name=f"convexity[{name}]"))
        reports.append(homogeneity_check(P, trials, 1e-12, s, name=f"homogeneity[{name}]"))
        if include_calculus and defect == 0:
            reports.extend(calculus_checks(name, phi, trials, s))
    for name, phi in [("norm_pow(p=2)", catalog.make_norm_power(2, 2.0)),
                      ("norm_pow(p=1)", catalog.make_norm_power(2, 1.0)),
                      ("huber", catalog.make_huber(2, 1.0))]:
        P = make_mutant(Perspective(phi), defect)
        reports.append(fenchel_young_check(P, trials, 1e-9, seed, name=f"fenchel_young[{name}]"))
    for p in (2.0, 3.0):
        P = make_mutant(Perspective(catalog.make_norm_power(2, p)), defect)
        reports.append(lsc_path_check(P, p, name=f"lsc_path(p={p:g})"))
    for p in (1.0, 2.0, 3.0):
        reports.append(minimizing_sequence_check(p))
    return reports
