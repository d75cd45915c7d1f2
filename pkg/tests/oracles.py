"""Independent brute-force oracles used to pin the closed-form code paths.

Everything here minimizes the defining objectives directly on dense grids
with plain numpy, deliberately avoiding the library's closed forms and
solvers.
"""

import math

import numpy as np

LN2 = math.log(2.0)


def kl_vec(p, q):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    out = np.zeros(np.broadcast(p, q).shape)
    p, q = np.broadcast_arrays(p, q)
    mask = p > 0
    out = np.where(mask, np.where(mask, p, 0.5) * np.log(np.where(mask, p, 0.5) / q), 0.0)
    mask1 = p < 1
    out = out + np.where(mask1,
                         np.where(mask1, 1 - p, 0.5)
                         * np.log(np.where(mask1, 1 - p, 0.5) / (1 - q)),
                         0.0)
    return out


def clip01(x):
    return min(1.0, max(0.0, x))


def d_plus_grid(eps, lam, mu, n=100_001):
    """inf over z in [clip(lam), mu] of kl(z, mu) + eps (z - clip(lam))."""
    lam_c = clip01(lam)
    if mu <= lam_c:
        return 0.0
    z = np.linspace(lam_c, mu, n)
    z = np.clip(z, 1e-15, 1 - 1e-15)
    vals = kl_vec(z, np.clip(mu, 1e-300, 1 - 1e-16)) + eps * (z - lam_c)
    if mu >= 1.0 - 1e-15:
        # kl(z, 1) is infinite for z < 1; the objective's infimum over the
        # open interval is the z -> 1 limit handled by the last grid point
        vals = kl_vec(z, 1 - 1e-12) + eps * (z - lam_c)
    return float(vals.min())


def d_minus_grid(eps, lam, mu, n=100_001):
    return d_plus_grid(eps, 1.0 - lam, 1.0 - mu, n)


def d_eps_grid(eps, lam, mu, n=100_001):
    """inf over z in (0,1) of kl(z, mu) + eps |lam - z| (unsigned form)."""
    z = np.linspace(1e-9, 1 - 1e-9, n)
    vals = kl_vec(z, mu) + eps * np.abs(lam - z)
    return float(vals.min())


def d_tilde_plus_grid(eps, lam, mu, r, n=100_001):
    """inf over z in (clip(lam), mu) of kl(z, mu) + h(r eps (z - lam))/r."""
    lam_c = clip01(lam)
    if mu <= lam_c:
        return 0.0
    z = np.linspace(lam_c + 1e-12, mu - 1e-12, n)
    x = r * eps * (z - lam)
    s = x * x / (1.0 + np.sqrt(1.0 + x * x))
    h = s - np.log1p(0.5 * s)
    vals = kl_vec(z, mu) + h / r
    return float(vals.min())


def d_tilde_minus_grid(eps, lam, mu, r, n=100_001):
    return d_tilde_plus_grid(eps, 1.0 - lam, 1.0 - mu, r, n)


def transport_pair_grid(eps, mu_hi, mu_lo, w_hi, w_lo, n=4001):
    """inf over ordered pairs u1 <= u2 of w_hi d^-(mu_hi, u1) + w_lo d^+(mu_lo, u2),
    the two-variable rewriting of the pair cost."""
    from dpbai import _kernels as _k
    us = np.linspace(0.0, 1.0, n)
    dm = np.array([_k.d_minus(eps, mu_hi, u)[0] for u in us])
    dp = np.array([_k.d_plus(eps, mu_lo, u)[0] for u in us])
    # suffix minimum of dp over u2 >= u1
    dp_suffix = np.minimum.accumulate(dp[::-1])[::-1]
    return float((w_hi * dm + w_lo * dp_suffix).min())


def modified_cost_nested_grid(eps, eta, mu_hi, mu_lo, w_hi, w_lo,
                              n_outer=801, n_inner=4001):
    """Nested brute force for the modified cost: outer u-grid, inner z-grids
    for both modified divergences."""
    lam = clip01(mu_hi)
    mu = clip01(mu_lo)
    if lam <= mu:
        return 0.0
    r_hi = w_hi / (1.0 + math.log(w_hi) / math.log1p(eta))
    r_lo = w_lo / (1.0 + math.log(w_lo) / math.log1p(eta))
    best = math.inf
    for u in np.linspace(mu + 1e-9, lam - 1e-9, n_outer):
        v = (w_hi * d_tilde_minus_grid(eps, mu_hi, u, r_hi, n_inner)
             + w_lo * d_tilde_plus_grid(eps, mu_lo, u, r_lo, n_inner))
        best = min(best, v)
    return best


def kl_characteristic_time_grid_k2(mu1, mu2, n_w=1000, n_u=2000):
    """Non-private characteristic time for K=2 by direct simplex search:
    max over w of min... (single pair), each pair cost by u-grid."""
    best = 0.0
    for w1 in np.linspace(1e-4, 1 - 1e-4, n_w):
        u = np.linspace(min(mu1, mu2) + 1e-9, max(mu1, mu2) - 1e-9, n_u)
        cost = (w1 * kl_vec(max(mu1, mu2), u)
                + (1 - w1) * kl_vec(min(mu1, mu2), u)).min()
        best = max(best, float(cost))
    return 1.0 / best
