"""Scalar special functions shared by every other module.

Thin validating wrappers over the jitted implementations in ``_kernels``:
Bernoulli relative entropy, the privacy warp maps g_eps^+/-, the Laplace
rate function h and its inverse, the tail envelope f, the Lambert-type
inverse W-bar, and the geometric-grid helpers.
"""

from __future__ import annotations

import math

from . import _kernels as _k

LN2 = _k.LN2
BOUNDARY_TOL = 1e-12


class ScalarDomainError(ValueError):
    """Raised when a documented precondition is violated (kind='out_of_domain')
    or an iterative solver exceeds its iteration cap (kind='nonconvergence')."""

    def __init__(self, kind: str, detail: str):
        self.kind = kind
        self.detail = detail
        super().__init__(f"{kind}: {detail}")


def _require(cond: bool, detail: str) -> None:
    if not cond:
        raise ScalarDomainError("out_of_domain", detail)


def kl(p: float, q: float) -> float:
    """Bernoulli KL divergence p log(p/q) + (1-p) log((1-p)/(1-q))."""
    _require(0.0 < p < 1.0 and 0.0 < q < 1.0,
             f"kl needs p, q strictly inside (0,1), got p={p}, q={q}")
    return _k.kl01(p, q)


def g_eps_minus(eps: float, x: float) -> float:
    """x e^eps / (x(e^eps - 1) + 1); maps a raw mean to the largest private mean."""
    _require(eps > 0.0, f"eps must be positive, got {eps}")
    _require(-BOUNDARY_TOL <= x <= 1.0 + BOUNDARY_TOL, f"x must lie in [0,1], got {x}")
    return _k.g_minus(eps, _k.snap01(x))


def g_eps_plus(eps: float, x: float) -> float:
    """Functional inverse of g_eps_minus: g_eps_plus = 1 - g_eps_minus(1 - x)."""
    _require(eps > 0.0, f"eps must be positive, got {eps}")
    _require(-BOUNDARY_TOL <= x <= 1.0 + BOUNDARY_TOL, f"x must lie in [0,1], got {x}")
    return _k.g_plus(eps, _k.snap01(x))


def h_rate(x: float) -> float:
    """Laplace large-deviation rate sqrt(1+x^2) - 1 + log(2(sqrt(1+x^2)-1)/x^2)."""
    _require(x > 0.0, f"h_rate needs x > 0, got {x}")
    return _k.h_rate(x)


def h_inv(y: float) -> float:
    """Unique positive preimage of h_rate (increasing, strictly convex)."""
    _require(y > 0.0, f"h_inv needs y > 0, got {y}")
    v = _k.h_inv(y)
    if math.isnan(v):
        raise ScalarDomainError("nonconvergence", f"h_inv bracket search failed at y={y}")
    return v


def lambert_bar(x: float) -> float:
    """Unique W >= 1 with W - log W = x (the -W_{-1}(-e^{-x}) branch)."""
    _require(x >= 1.0 - BOUNDARY_TOL, f"lambert_bar needs x >= 1, got {x}")
    return _k.lambert_bar(max(x, 1.0))


def f_envelope(x: float) -> float:
    """(x + 3 - log 2) e^{-x}; decreasing tail envelope on [0, inf)."""
    _require(x >= 0.0, f"f_envelope needs x >= 0, got {x}")
    return _k.f_envelope(x)


def k_eta(eta: float, x: float) -> float:
    """Phase-count bound 1 + log_{1+eta} x for x >= 1."""
    _require(eta > 0.0, f"eta must be positive, got {eta}")
    _require(x >= 1.0 - BOUNDARY_TOL, f"k_eta needs x >= 1, got {x}")
    return _k.k_eta(eta, max(x, 1.0))


def r_ratio(eta: float, x: float) -> float:
    """x / k_eta(eta, x), the per-phase sample ratio."""
    _require(eta > 0.0, f"eta must be positive, got {eta}")
    _require(x >= 1.0 - BOUNDARY_TOL, f"r_ratio needs x >= 1, got {x}")
    return _k.r_ratio(eta, max(x, 1.0))
