"""Closed-form security quantities: Pr(R_ef), Pr(D >= beta), E[D] and attack bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

MAX_RECEIVERS = 20


def _check_prob(name, p):
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name}={p} is not a probability")


def pr_ref_single(delta: float, eps: float) -> float:
    """Probability the eavesdropper holds a packet once one receiver's ARQ completes."""
    _check_prob("delta", delta)
    _check_prob("eps", eps)
    if delta == 1.0 and eps == 1.0:
        raise ValueError("Pr(R_ef) is undefined at delta = eps = 1")
    return (1.0 - eps) / (1.0 - eps * delta)


def _subset_products(deltas) -> tuple[np.ndarray, np.ndarray]:
    """Products and sizes over all subsets of ``deltas`` (the empty set first)."""
    prods = np.ones(1)
    sizes = np.zeros(1, dtype=np.int64)
    for d in deltas:
        prods = np.concatenate([prods, prods * d])
        sizes = np.concatenate([sizes, sizes + 1])
    return prods, sizes


def pr_ref_receivers(deltas, eps: float) -> float:
    """Inclusion-exclusion over receiver subsets T of (1 - eps) / (1 - eps * prod_T delta)."""
    deltas = [float(d) for d in deltas]
    if not 1 <= len(deltas) <= MAX_RECEIVERS:
        raise ValueError(f"exact evaluation needs 1 <= m <= {MAX_RECEIVERS}, got m={len(deltas)}")
    for d in deltas:
        _check_prob("delta", d)
    _check_prob("eps", eps)
    if eps == 1.0:
        if any(d == 1.0 for d in deltas):
            raise ValueError("Pr(R_ef) is undefined with eps = 1 and a receiver at delta = 1")
        return 0.0
    prods, sizes = _subset_products(deltas)
    prods, sizes = prods[1:], sizes[1:]
    signs = np.where(sizes % 2 == 1, 1.0, -1.0)
    return float(np.sum(signs * (1.0 - eps) / (1.0 - eps * prods)))


def pr_ref_receivers_printed(deltas, eps: float) -> float:
    """Variant whose full-set term drops eps from the denominator.

    Kept only so validation runs can show it disagrees with simulation.
    """
    deltas = [float(d) for d in deltas]
    prods, sizes = _subset_products(deltas)
    prods, sizes = prods[1:], sizes[1:]
    signs = np.where(sizes % 2 == 1, 1.0, -1.0)
    factor = np.full(len(prods), eps)
    factor[-1] = 1.0
    return float(np.sum(signs * (1.0 - eps) / (1.0 - factor * prods)))


def pr_ref_collab(delta: float, epsilons) -> float:
    """One receiver, l pooling eavesdroppers: the single-pair formula at eps' = prod(eps)."""
    eps_all = math.prod(float(e) for e in epsilons)
    for e in epsilons:
        _check_prob("eps", e)
    return pr_ref_single(delta, eps_all)


def pr_ref_general(deltas, epsilons) -> float:
    for e in epsilons:
        _check_prob("eps", e)
    return pr_ref_receivers(deltas, math.prod(float(e) for e in epsilons))


def _log_binom_terms(eta: int, p_erase: float, lo: int, hi: int) -> np.ndarray:
    i = np.arange(lo, hi + 1, dtype=np.float64)
    with np.errstate(divide="ignore"):
        logp = np.log(p_erase)
        logq = np.log1p(-p_erase)
    t = gammaln(eta + 1) - gammaln(i + 1) - gammaln(eta - i + 1)
    # 0 * log(0) contributes nothing
    t = t + np.where(i > 0, i * logp, 0.0) + np.where(eta - i > 0, (eta - i) * logq, 0.0)
    return t


def pr_d_geq(beta: float, alpha: int, eta: int, pr_ref: float) -> float:
    """Pr(D >= beta) for D = alpha * Binomial(eta, 1 - pr_ref)."""
    if not 1 <= beta <= alpha * eta:
        raise ValueError(f"beta={beta} outside [1, alpha*eta={alpha * eta}]")
    _check_prob("pr_ref", pr_ref)
    j = math.ceil(beta / alpha)
    p = 1.0 - pr_ref
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return 1.0
    upper = logsumexp(_log_binom_terms(eta, p, j, eta))
    if upper < math.log(0.5):
        return float(math.exp(upper))
    # large tail: subtract the small complement for accuracy
    lower = logsumexp(_log_binom_terms(eta, p, 0, j - 1))
    return float(-math.expm1(lower))


def expected_d(pr_ref: float, n: int) -> float:
    if n < 1:
        raise ValueError("n must be at least 1")
    _check_prob("pr_ref", pr_ref)
    return (1.0 - pr_ref) * n


def geometric_max_pmf(lambdas, t: int) -> float:
    """Pr(max of independent geometrics with success probabilities ``lambdas`` equals t)."""
    if t < 1:
        raise ValueError("t must be at least 1")
    lam = np.asarray(lambdas, dtype=np.float64)
    if ((lam <= 0) | (lam > 1)).any():
        raise ValueError("success probabilities must lie in (0, 1]")
    return float(np.prod(1.0 - (1.0 - lam) ** t) - np.prod(1.0 - (1.0 - lam) ** (t - 1)))


@dataclass(frozen=True)
class AttackBounds:
    """log2 of the lower and upper expected attack cost."""

    log2_lower: float
    log2_upper: float

    def linear(self) -> tuple[float, float]:
        return 2.0**self.log2_lower, 2.0**self.log2_upper


def attack_bounds(expected_d: float, L: int, c_a: float) -> AttackBounds:
    """Bounds on the cost of a successful attack when each of L blocks hides E[D] bits."""
    if L < 1:
        raise ValueError("L must be at least 1")
    if c_a <= 0:
        raise ValueError("c_a must be positive")
    log_ca = math.log2(c_a)
    # 1 - 2**(-1/L), kept accurate for large L
    lower = expected_d + math.log2(-math.expm1(-math.log(2.0) / L)) + log_ca
    upper = expected_d - 1.0 / L + log_ca
    return AttackBounds(lower, upper)


@dataclass(frozen=True)
class SecurityPoint:
    delta: float
    eps: float
    pr_ref: float
    pr_d_geq: float
    expected_d: float


def surface(beta, alpha, eta, deltas, epsilons) -> list[SecurityPoint]:
    """Grid of security quantities for one receiver and one eavesdropper (undefined corner skipped)."""
    out = []
    for d in deltas:
        for e in epsilons:
            if d == 1.0 and e == 1.0:
                continue
            p = pr_ref_single(d, e)
            out.append(SecurityPoint(float(d), float(e), p, pr_d_geq(beta, alpha, eta, p), expected_d(p, alpha * eta)))
    return out


@dataclass(frozen=True)
class Contour:
    points: list[tuple[float, float]]
    missing: list[float]


def threshold_contour(beta, alpha, eta, deltas, epsilons, level: float = 0.5) -> Contour:
    """For each delta, the eps where Pr(D >= beta) crosses ``level``.

    Linear interpolation between lattice points; columns without a crossing
    are reported in ``missing``.
    """
    deltas = np.asarray(deltas, dtype=np.float64)
    epsilons = np.sort(np.asarray(epsilons, dtype=np.float64))
    if len(deltas) < 2 or len(epsilons) < 2:
        raise ValueError("grid needs at least two points per axis")
    points, missing = [], []
    for d in deltas:
        es = epsilons[~((d == 1.0) & (epsilons == 1.0))]
        vals = np.array([pr_d_geq(beta, alpha, eta, pr_ref_single(d, e)) for e in es])
        above = vals >= level
        idx = np.flatnonzero(~above[:-1] & above[1:])
        if not len(idx):
            missing.append(float(d))
            continue
        i = idx[0]
        e0, e1, v0, v1 = es[i], es[i + 1], vals[i], vals[i + 1]
        points.append((float(d), float(e0 + (level - v0) * (e1 - e0) / (v1 - v0))))
    return Contour(points, missing)
