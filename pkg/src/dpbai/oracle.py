"""Characteristic time T*_eps and optimal allocation w*_eps via the nested
fixed-point solver, the beta-constrained variant, the explicit lower bound,
and the privacy-regime boundary diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as _k
from .scalars import ScalarDomainError, _require

_REL_TOL = 1e-12
_MAX_ITER = 200
_EDGE_SHRINK = 1e-12


class DegenerateInstanceError(ValueError):
    """The best arm is tied: the characteristic time is undefined."""


@dataclass(frozen=True)
class BanditInstance:
    """Bernoulli bandit instance with a unique best arm."""

    means: tuple[float, ...]

    def __post_init__(self):
        means = tuple(float(m) for m in self.means)
        object.__setattr__(self, "means", means)
        _require(len(means) >= 2, f"need at least 2 arms, got {len(means)}")
        for m in means:
            _require(0.0 < m < 1.0, f"means must lie strictly inside (0,1), got {m}")
        top = max(means)
        if sum(1 for m in means if m == top) != 1:
            raise DegenerateInstanceError(f"best arm is tied in {means}")

    @property
    def n_arms(self) -> int:
        return len(self.means)

    @property
    def best_arm(self) -> int:
        return int(np.argmax(self.means))


@dataclass(frozen=True)
class OracleSolution:
    t_star: float
    w_star: np.ndarray
    y_star: float
    per_arm_x: np.ndarray = field(repr=False)


def _pair_value_and_u(eps, mu_star, mu_a, x):
    v, u, _ = _k.transport(eps, mu_star, mu_a, 1.0, x)
    return v, u


def _x_of_y(eps, mu_star, mu_a, y, ceiling):
    """Invert the increasing map G_a(x) = inf_u {d^-(mu*,u) + x d^+(mu_a,u)}."""
    if y <= 0.0:
        return 0.0
    hi = 1.0
    it = 0
    while _pair_value_and_u(eps, mu_star, mu_a, hi)[0] < y:
        hi *= 2.0
        it += 1
        if it > _MAX_ITER:
            raise ScalarDomainError(
                "nonconvergence",
                f"x_a bracket search failed at y={y} (ceiling {ceiling})")
    lo = 0.0
    for _ in range(_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if _pair_value_and_u(eps, mu_star, mu_a, mid)[0] < y:
            lo = mid
        else:
            hi = mid
        if hi - lo <= _REL_TOL * (1.0 + lo):
            break
    return 0.5 * (lo + hi)


def _balance_sum(eps, mu_star, others, y):
    """F(y) = sum_a d^-(mu*, u_a) / d^+(mu_a, u_a) and the per-arm x_a(y)."""
    xs = np.empty(len(others))
    total = 0.0
    for i, mu_a in enumerate(others):
        ceiling = _k.d_minus(eps, mu_star, mu_a)[0]
        x = _x_of_y(eps, mu_star, mu_a, y, ceiling)
        xs[i] = x
        _, u = _pair_value_and_u(eps, mu_star, mu_a, x)
        num = _k.d_minus(eps, mu_star, u)[0]
        den = _k.d_plus(eps, mu_a, u)[0]
        total += num / den if den > 0.0 else math.inf
    return total, xs


def _solve(instance: BanditInstance, eps: float, target):
    """Bisect target(y) - 1 = 0 on [0, min_a d^-(mu*, mu_a)); target is
    increasing from 0 to +inf on that interval."""
    astar = instance.best_arm
    mu_star = instance.means[astar]
    others = [m for i, m in enumerate(instance.means) if i != astar]
    ymax = min(_k.d_minus(eps, mu_star, m)[0] for m in others)
    lo = 0.0
    hi = ymax * (1.0 - _EDGE_SHRINK)
    for _ in range(_MAX_ITER):
        y = 0.5 * (lo + hi)
        if target(y) < 1.0:
            lo = y
        else:
            hi = y
        if hi - lo <= _REL_TOL * max(ymax, lo):
            break
    return 0.5 * (lo + hi), others, astar


def _assemble(instance, astar, y_star, xs):
    K = instance.n_arms
    w = np.empty(K)
    denom = 1.0 + xs.sum()
    w[astar] = 1.0 / denom
    j = 0
    for a in range(K):
        if a == astar:
            continue
        w[a] = xs[j] / denom
        j += 1
    inv_t = y_star / denom
    return OracleSolution(t_star=1.0 / inv_t, w_star=w, y_star=y_star,
                          per_arm_x=xs)


def characteristic_time(eps: float, instance: BanditInstance) -> OracleSolution:
    """Solve the information-balance fixed point F(y*) = 1 and return
    (T*_eps, w*_eps, y*)."""
    _require(eps > 0.0, f"eps must be positive, got {eps}")
    mu_star = instance.means[instance.best_arm]

    def target(y):
        total, _ = _balance_sum(eps, mu_star,
                                [m for i, m in enumerate(instance.means)
                                 if i != instance.best_arm], y)
        return total

    y_star, others, astar = _solve(instance, eps, target)
    _, xs = _balance_sum(eps, mu_star, others, y_star)
    return _assemble(instance, astar, y_star, xs)


def beta_characteristic_time(eps: float, instance: BanditInstance,
                             beta: float) -> OracleSolution:
    """Constrained variant with w_{a*} = beta: solve sum_a x_a(z) = (1-beta)/beta."""
    _require(eps > 0.0, f"eps must be positive, got {eps}")
    _require(0.0 < beta < 1.0, f"beta must lie in (0,1), got {beta}")
    astar = instance.best_arm
    mu_star = instance.means[astar]
    others = [m for i, m in enumerate(instance.means) if i != astar]
    ratio = (1.0 - beta) / beta
    ymax = min(_k.d_minus(eps, mu_star, m)[0] for m in others)

    lo = 0.0
    hi = ymax * (1.0 - _EDGE_SHRINK)
    for _ in range(_MAX_ITER):
        z = 0.5 * (lo + hi)
        total = sum(
            _x_of_y(eps, mu_star, mu_a, z, _k.d_minus(eps, mu_star, mu_a)[0])
            for mu_a in others)
        if total < ratio:
            lo = z
        else:
            hi = z
        if hi - lo <= _REL_TOL * max(ymax, lo):
            break
    z_star = 0.5 * (lo + hi)

    K = instance.n_arms
    w = np.empty(K)
    w[astar] = beta
    xs = np.empty(K - 1)
    j = 0
    for a in range(K):
        if a == astar:
            continue
        xs[j] = _x_of_y(eps, mu_star, instance.means[a], z_star,
                        _k.d_minus(eps, mu_star, instance.means[a])[0])
        w[a] = beta * xs[j]
        j += 1
    # absorb the bisection residual so the simplex constraint holds exactly
    off = w.sum() - beta
    for a in range(K):
        if a != astar:
            w[a] *= (1.0 - beta) / off
    inv_t = beta * z_star
    return OracleSolution(t_star=1.0 / inv_t, w_star=w, y_star=z_star,
                          per_arm_x=xs)


def lower_bound_time(eps: float, instance: BanditInstance) -> float:
    """Explicit bound 1/Delta_{eps,a*} + sum_{a != a*} 1/Delta_{eps,a}."""
    _require(eps > 0.0, f"eps must be positive, got {eps}")
    astar = instance.best_arm
    mu_star = instance.means[astar]
    gap_star = min(_k.d_minus(eps, mu_star, m)[0]
                   for i, m in enumerate(instance.means) if i != astar)
    total = 1.0 / gap_star
    for i, m in enumerate(instance.means):
        if i == astar:
            continue
        total += 1.0 / _k.d_plus(eps, m, mu_star)[0]
    return total


def regime_boundary(instance: BanditInstance) -> tuple[dict[int, float], float]:
    """eps_{a*,a} = log(mu_a*(1-mu_a)/(mu_a(1-mu_a*))) for every a != a*, and
    their maximum; above the maximum the characteristic time is non-private."""
    astar = instance.best_arm
    mu_star = instance.means[astar]
    out = {}
    for a, m in enumerate(instance.means):
        if a == astar:
            continue
        out[a] = math.log(mu_star * (1.0 - m) / (m * (1.0 - mu_star)))
    return out, max(out.values())


def low_privacy_check(eps: float, instance: BanditInstance, w, a: int, b: int) -> bool:
    """Allocation-dependent low-privacy condition: when true, the private
    transportation cost of (a, b) equals the non-private Bernoulli cost."""
    mu_a = instance.means[a]
    mu_b = instance.means[b]
    _require(mu_a > mu_b, f"needs mu_a > mu_b, got {mu_a} <= {mu_b}")
    w = np.asarray(w, dtype=float)
    _require(w[a] > 0.0 and w[b] > 0.0, "weights on the pair must be positive")
    scale = -math.expm1(-eps)  # 1 - e^-eps
    lhs = mu_a - mu_b
    rhs = scale * min(
        (1.0 + w[a] / w[b]) * mu_a * _k.g_minus(eps, 1.0 - mu_a),
        (1.0 + w[b] / w[a]) * (1.0 - mu_b) * _k.g_minus(eps, mu_b),
    )
    return lhs <= rhs


def non_private_pair_cost(mu_a: float, mu_b: float, w_a: float, w_b: float) -> float:
    """w_a kl(mu_a, m) + w_b kl(mu_b, m) at the weighted mean m."""
    m = (w_a * mu_a + w_b * mu_b) / (w_a + w_b)
    return w_a * _k.kl01(mu_a, m) + w_b * _k.kl01(mu_b, m)
