"""Signed private divergences d_eps^+/- (closed form) and the modified
divergences d~_eps^+/- (fixed-point form), plus the inversion used by the
concentration validator."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from . import _kernels as _k
from .scalars import ScalarDomainError, _require


@dataclass(frozen=True)
class PrivacyParams:
    """Privacy budget and algorithmic hyperparameters.

    eps: privacy budget, delta: risk, eta: geometric grid parameter,
    beta: leader target allocation.
    """

    eps: float
    delta: float = 0.1
    eta: float = 1.0
    beta: float = 0.5

    def __post_init__(self):
        _require(self.eps > 0.0, f"eps must be positive, got {self.eps}")
        _require(0.0 < self.delta < 1.0, f"delta must lie in (0,1), got {self.delta}")
        _require(self.eta > 0.0, f"eta must be positive, got {self.eta}")
        _require(0.0 < self.beta < 1.0, f"beta must lie in (0,1), got {self.beta}")


class DivergenceRegime(enum.IntEnum):
    zero = _k.REGIME_ZERO
    kl_regime = _k.REGIME_KL
    privacy_regime = _k.REGIME_PRIVACY


def _check_mu(eps: float, mu: float) -> None:
    _require(eps > 0.0, f"eps must be positive, got {eps}")
    _require(-1e-12 <= mu <= 1.0 + 1e-12, f"mu must lie in [0,1], got {mu}")


def d_plus(eps: float, lam: float, mu: float) -> tuple[float, DivergenceRegime]:
    """d_eps^+(lam, mu): evidence that a mean at lam looks >= mu; lam is
    clipped to [0,1] internally, mu must lie in [0,1]."""
    _check_mu(eps, mu)
    v, code = _k.d_plus(eps, lam, mu)
    return v, DivergenceRegime(code)


def d_minus(eps: float, lam: float, mu: float) -> tuple[float, DivergenceRegime]:
    """d_eps^-(lam, mu) = d_eps^+(1-lam, 1-mu)."""
    _check_mu(eps, mu)
    v, code = _k.d_minus(eps, lam, mu)
    return v, DivergenceRegime(code)


def d_eps_unsigned(eps: float, lam: float, mu: float) -> float:
    """d_eps between Bernoulli means in (0,1): the signed divergence matching
    the order of (lam, mu)."""
    _require(0.0 < lam < 1.0 and 0.0 < mu < 1.0,
             f"means must lie strictly inside (0,1), got lam={lam}, mu={mu}")
    _require(eps > 0.0, f"eps must be positive, got {eps}")
    if lam == mu:
        return 0.0
    if mu < lam:
        return _k.d_minus(eps, lam, mu)[0]
    return _k.d_plus(eps, lam, mu)[0]


def d_plus_dmu(eps: float, lam: float, mu: float) -> float:
    """Derivative of d_eps^+ in mu on (lam, 1]."""
    _require(0.0 < lam < 1.0, f"lam must lie in (0,1), got {lam}")
    _require(mu > lam, f"needs mu > lam, got mu={mu}, lam={lam}")
    _require(mu <= 1.0 + 1e-12, f"mu must lie in (lam,1], got {mu}")
    return _k.d_plus_dmu(eps, lam, min(mu, 1.0))


def d_tilde_plus(eps: float, lam: float, mu: float, r: float) -> float:
    """Modified divergence d~_eps^+(lam, mu, r); the linear privacy penalty is
    replaced by the Laplace rate h at scale r."""
    _require(eps > 0.0 and r > 0.0, f"eps and r must be positive, got {eps}, {r}")
    _require(0.0 < mu < 1.0, f"mu must lie in (0,1), got {mu}")
    v = _k.d_tilde_plus(eps, lam, mu, r)
    if math.isnan(v):
        raise ScalarDomainError("nonconvergence",
                                f"d_tilde fixed point failed at ({eps},{lam},{mu},{r})")
    return v


def d_tilde_minus(eps: float, lam: float, mu: float, r: float) -> float:
    """d~_eps^-(lam, mu, r) = d~_eps^+(1-lam, 1-mu, r)."""
    _require(eps > 0.0 and r > 0.0, f"eps and r must be positive, got {eps}, {r}")
    _require(0.0 < mu < 1.0, f"mu must lie in (0,1), got {mu}")
    v = _k.d_tilde_minus(eps, lam, mu, r)
    if math.isnan(v):
        raise ScalarDomainError("nonconvergence",
                                f"d_tilde fixed point failed at ({eps},{lam},{mu},{r})")
    return v


def invert_d_tilde(eps: float, mu: float, r: float, c: float, side: str) -> float:
    """The unique x > 0 with d~^+(mu-x, mu, r) = c (side='plus') or
    d~^-(mu+x, mu, r) = c (side='minus')."""
    _require(c > 0.0, f"c must be positive, got {c}")
    _require(0.0 < mu < 1.0, f"mu must lie in (0,1), got {mu}")
    _require(side in ("plus", "minus"), f"side must be 'plus' or 'minus', got {side!r}")
    x = _k.invert_d_tilde(eps, mu, r, c, side == "plus")
    if math.isnan(x):
        raise ScalarDomainError("nonconvergence",
                                f"invert_d_tilde bracket search failed at c={c}")
    return x
