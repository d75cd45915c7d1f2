"""Jitted numerical core.

Every function here is numba-compiled, validation-free and exception-free:
callers in the public modules check domains and translate NaN sentinels into
errors.  The episode kernels at the bottom are the hot path of the Monte
Carlo harness (~10^9 bandit steps across a full sweep), which is why this
layer exists at all.

Overflow discipline: nothing in this file ever evaluates exp(+eps).  All
closed forms are algebraically rewritten in terms of exp(-eps)/expm1(-eps)
so that privacy budgets up to 1e6 (the "noise off" sanity regime) stay
finite.
"""

import math

import numpy as np
from numba import njit

LN2 = math.log(2.0)
_SNAP = 1e-12          # inputs this close to a domain boundary sit on it
_BRACKET_SHRINK = 1e-14
_MAX_ITER = 200

# ---------------------------------------------------------------------------
# scalar special functions
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def snap01(x):
    """Clip to [0,1] and snap values within 1e-12 of {0,1} onto the boundary."""
    if x < 0.0:
        x = 0.0
    elif x > 1.0:
        x = 1.0
    if x < _SNAP:
        return 0.0
    if x > 1.0 - _SNAP:
        return 1.0
    return x


@njit(cache=True, nogil=True)
def kl01(p, q):
    """Bernoulli relative entropy, p in [0,1] closed, q in (0,1) open."""
    v = 0.0
    if p > 0.0:
        v += p * math.log(p / q)
    if p < 1.0:
        v += (1.0 - p) * math.log((1.0 - p) / (1.0 - q))
    return v


@njit(cache=True, nogil=True)
def g_minus(eps, x):
    # x e^eps / (x(e^eps - 1) + 1), written with exp(-eps) only
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    return x / (x + (1.0 - x) * math.exp(-eps))


@njit(cache=True, nogil=True)
def g_plus(eps, x):
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    e = math.exp(-eps)
    return x * e / ((1.0 - x) + x * e)


@njit(cache=True, nogil=True)
def h_rate(x):
    # sqrt(1+x^2) - 1 + log(2(sqrt(1+x^2)-1)/x^2), stable near 0 via
    # s = x^2/(1+sqrt(1+x^2)) = sqrt(1+x^2)-1 and 2s/x^2 = 2/(1+sqrt(1+x^2)).
    if x <= 0.0:
        return 0.0
    s = x * x / (1.0 + math.sqrt(1.0 + x * x))
    return s - math.log1p(0.5 * s)


@njit(cache=True, nogil=True)
def h_prime(x):
    return x / (math.sqrt(x * x + 1.0) + 1.0)


@njit(cache=True, nogil=True)
def h_inv(y):
    """Inverse of h_rate on (0, inf); NaN when the iteration cap is hit."""
    if y <= 0.0:
        return 0.0
    hi = 1.0
    it = 0
    while h_rate(hi) < y:
        hi *= 2.0
        it += 1
        if it > _MAX_ITER:
            return math.nan
    lo = 0.0
    for _ in range(_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if h_rate(mid) < y:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * (1.0 + lo):
            break
    return 0.5 * (lo + hi)


@njit(cache=True, nogil=True)
def lambert_bar(x):
    """Unique W >= 1 with W - log W = x, for x >= 1 (bisection on [x, x+log x+1])."""
    if x < 1.0:
        return math.nan
    lo = x
    hi = x + math.log(x) + 1.0
    for _ in range(_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if mid - math.log(mid) < x:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * lo:
            break
    return 0.5 * (lo + hi)


@njit(cache=True, nogil=True)
def f_envelope(x):
    return (x + 3.0 - LN2) * math.exp(-x)


@njit(cache=True, nogil=True)
def k_eta(eta, x):
    return 1.0 + math.log(x) / math.log1p(eta)


@njit(cache=True, nogil=True)
def r_ratio(eta, x):
    return x / k_eta(eta, x)


# ---------------------------------------------------------------------------
# signed private divergences (closed forms)
# ---------------------------------------------------------------------------

REGIME_ZERO = 0
REGIME_KL = 1
REGIME_PRIVACY = 2


@njit(cache=True, nogil=True)
def d_plus(eps, lam, mu):
    """Closed-form d_eps^+(lam, mu); returns (value, regime code)."""
    lam_c = snap01(lam)
    mu = snap01(mu)
    if mu <= lam_c:
        return 0.0, REGIME_ZERO
    if 0.0 < lam_c and mu < 1.0:
        gm = g_minus(eps, lam_c)
        if mu <= gm + _SNAP:
            return kl01(lam_c, mu), REGIME_KL
    # -log(1 - mu (1 - e^-eps)) - eps lam  ==  -log1p(mu expm1(-eps)) - eps lam
    return -math.log1p(mu * math.expm1(-eps)) - eps * lam_c, REGIME_PRIVACY


@njit(cache=True, nogil=True)
def d_minus(eps, lam, mu):
    """d_eps^-(lam, mu) = d_eps^+(1-lam, 1-mu)."""
    return d_plus(eps, 1.0 - lam, 1.0 - mu)


@njit(cache=True, nogil=True)
def d_plus_dmu(eps, lam, mu):
    """Derivative of d_eps^+ in its second argument, on (lam, 1]."""
    gm = g_minus(eps, lam)
    if mu > gm:
        a = -math.expm1(-eps)  # 1 - e^-eps
        return a / (1.0 - mu * a)
    return (mu - lam) / (mu * (1.0 - mu))


@njit(cache=True, nogil=True)
def d_tilde_plus_z(eps, lam, mu, r):
    """Stationary point z* of kl(z,mu) + h(r eps (z-lam))/r on (max{lam,g+(mu)}, mu)."""
    zlo = g_plus(eps, mu)
    if lam > zlo:
        zlo = lam
    zhi = mu
    w = zhi - zlo
    pad = _BRACKET_SHRINK
    if pad > 0.25 * w:
        pad = 0.25 * w
    lo = zlo + pad
    hi = zhi - pad
    for _ in range(_MAX_ITER):
        z = 0.5 * (lo + hi)
        grad = math.log(z * (1.0 - mu) / ((1.0 - z) * mu)) \
            + eps * h_prime(r * eps * (z - lam))
        if grad < 0.0:
            lo = z
        else:
            hi = z
        if hi - lo <= 1e-14 + 1e-12 * abs(lo):
            break
    return 0.5 * (lo + hi)


@njit(cache=True, nogil=True)
def d_tilde_plus(eps, lam, mu, r):
    """Modified divergence d~_eps^+(lam, mu, r); mu must lie in (0,1)."""
    lam_c = snap01(lam)
    if mu <= lam_c:
        return 0.0
    z = d_tilde_plus_z(eps, lam, mu, r)
    arg = r * eps * (z - lam)
    if arg < 0.0:
        arg = 0.0
    return kl01(z, mu) + h_rate(arg) / r


@njit(cache=True, nogil=True)
def d_tilde_minus(eps, lam, mu, r):
    return d_tilde_plus(eps, 1.0 - lam, 1.0 - mu, r)


@njit(cache=True, nogil=True)
def invert_d_tilde(eps, mu, r, c, plus_side):
    """Solve d~^+(mu-x, mu, r) = c (plus) or d~^-(mu+x, mu, r) = c (minus) for x > 0."""
    hi = 0.5
    it = 0
    while True:
        v = d_tilde_plus(eps, mu - hi, mu, r) if plus_side \
            else d_tilde_minus(eps, mu + hi, mu, r)
        if v >= c:
            break
        hi *= 2.0
        it += 1
        if it > _MAX_ITER:
            return math.nan
    lo = 0.0
    for _ in range(_MAX_ITER):
        x = 0.5 * (lo + hi)
        v = d_tilde_plus(eps, mu - x, mu, r) if plus_side \
            else d_tilde_minus(eps, mu + x, mu, r)
        if v < c:
            lo = x
        else:
            hi = x
        if hi - lo <= 1e-14 + 1e-12 * lo:
            break
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# transportation cost (7-case closed form)
# ---------------------------------------------------------------------------

CASE_ZERO = 0
CASE_ZERO_WEIGHT = 8
# 1..7: cases of the closed-form dispatch, in statement order.


@njit(cache=True, nogil=True)
def _pos_root(a, b, c):
    # positive root of a u^2 + b u - c = 0, a > 0, c >= 0; stable for |b| large
    disc = math.sqrt(b * b + 4.0 * a * c)
    if b >= 0.0:
        if disc + b == 0.0:
            return 0.0
        return 2.0 * c / (disc + b)
    return (disc - b) / (2.0 * a)


@njit(cache=True, nogil=True)
def transport(eps, mu_hi, mu_lo, w_hi, w_lo):
    """W_eps for the ordered pair (higher mean, lower mean); returns (value, u*, case)."""
    lam = snap01(mu_hi)
    mu = snap01(mu_lo)
    if lam <= mu:
        return 0.0, lam, CASE_ZERO
    if w_hi <= 0.0:
        return 0.0, mu, CASE_ZERO_WEIGHT
    if w_lo <= 0.0:
        return 0.0, lam, CASE_ZERO_WEIGHT

    emx = math.exp(-eps)
    gm = g_minus(eps, mu)
    gp = g_plus(eps, lam)
    mean_w = (w_lo * mu + w_hi * lam) / (w_hi + w_lo)
    # expm1(eps) overflows past ~709; the normalized quadratic coefficients
    # below take finite limits under IEEE inf arithmetic.
    big_x = math.expm1(eps)

    if gm >= lam:
        u = mean_w
        case = 1
    elif gp <= gm:
        if gp <= mean_w and mean_w <= gm:
            u = mean_w
            case = 2
        elif mean_w < gp:
            u = _pos_root(w_hi + w_lo, w_lo / big_x - (w_lo * mu + w_hi),
                          w_lo * mu / big_x)
            case = 4
        else:
            u = 1.0 - _pos_root(w_hi + w_lo,
                                w_hi / big_x - (w_hi * (1.0 - lam) + w_lo),
                                w_hi * (1.0 - lam) / big_x)
            case = 6
    else:
        u3 = (w_hi - w_lo * emx) / ((w_hi + w_lo) * (-math.expm1(-eps)))
        if gm <= u3 and u3 <= gp:
            u = u3
            case = 3
        elif u3 < gm:
            u = _pos_root(w_hi + w_lo, w_lo / big_x - (w_lo * mu + w_hi),
                          w_lo * mu / big_x)
            case = 5
        else:
            u = 1.0 - _pos_root(w_hi + w_lo,
                                w_hi / big_x - (w_hi * (1.0 - lam) + w_lo),
                                w_hi * (1.0 - lam) / big_x)
            case = 7

    if u < mu:
        u = mu
    elif u > lam:
        u = lam
    vhi, _ = d_minus(eps, lam, u)
    vlo, _ = d_plus(eps, mu, u)
    return w_hi * vhi + w_lo * vlo, u, case


@njit(cache=True, nogil=True)
def transport_value(eps, mu_hi, mu_lo, w_hi, w_lo):
    v, _, _ = transport(eps, mu_hi, mu_lo, w_hi, w_lo)
    return v


@njit(cache=True, nogil=True)
def transport_grid(eps, mu_hi, mu_lo, w_hi, w_lo, n_grid):
    """Brute-force minimization of the pair objective over a uniform u-grid,
    refined once by golden-section.  Verification oracle only."""
    lam = snap01(mu_hi)
    mu = snap01(mu_lo)
    if lam <= mu:
        return 0.0, lam
    best = math.inf
    best_i = 0
    step = 1.0 / (n_grid - 1.0)
    for i in range(n_grid):
        u = i * step
        vhi, _ = d_minus(eps, lam, u)
        vlo, _ = d_plus(eps, mu, u)
        v = w_hi * vhi + w_lo * vlo
        if v < best:
            best = v
            best_i = i
    lo = (best_i - 1) * step
    hi = (best_i + 1) * step
    if lo < 0.0:
        lo = 0.0
    if hi > 1.0:
        hi = 1.0
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a = hi - invphi * (hi - lo)
    b = lo + invphi * (hi - lo)
    for _ in range(80):
        va = w_hi * d_minus(eps, lam, a)[0] + w_lo * d_plus(eps, mu, a)[0]
        vb = w_hi * d_minus(eps, lam, b)[0] + w_lo * d_plus(eps, mu, b)[0]
        if va < vb:
            hi = b
            b = a
            a = hi - invphi * (hi - lo)
        else:
            lo = a
            a = b
            b = lo + invphi * (hi - lo)
    u = 0.5 * (lo + hi)
    v = w_hi * d_minus(eps, lam, u)[0] + w_lo * d_plus(eps, mu, u)[0]
    if best < v:
        return best, best_i * step
    return v, u


@njit(cache=True, nogil=True)
def transport_modified(eps, eta, mu_hi, mu_lo, w_hi, w_lo):
    """Modified cost W~_eps: root of the stationarity equation inside
    (clip(mu_lo), clip(mu_hi)); weights are counts >= 1.  Returns (value, u*)."""
    lam = snap01(mu_hi)
    mu = snap01(mu_lo)
    if lam <= mu:
        return 0.0, lam
    r_hi = r_ratio(eta, w_hi)
    r_lo = r_ratio(eta, w_lo)
    w = lam - mu
    pad = _BRACKET_SHRINK
    if pad > 0.25 * w:
        pad = 0.25 * w
    lo = mu + pad
    hi = lam - pad
    for _ in range(_MAX_ITER):
        u = 0.5 * (lo + hi)
        # x+ for d~+(mu_lo, u, r_lo), x- for d~-(mu_hi, u, r_hi)
        zp = d_tilde_plus_z(eps, mu_lo, u, r_lo)
        xp = zp - g_plus(eps, u)
        zm = d_tilde_plus_z(eps, 1.0 - mu_hi, 1.0 - u, r_hi)
        xm = zm - g_plus(eps, 1.0 - u)
        g1 = u * (w_hi + w_lo) - w_hi * g_minus(eps, u) - w_lo * g_plus(eps, u) \
            + w_hi * xm - w_lo * xp
        if g1 < 0.0:
            lo = u
        else:
            hi = u
        if hi - lo <= 1e-13 + 1e-11 * abs(lo):
            break
    u = 0.5 * (lo + hi)
    val = w_hi * d_tilde_minus(eps, mu_hi, u, r_hi) \
        + w_lo * d_tilde_plus(eps, mu_lo, u, r_lo)
    return val, u


# ---------------------------------------------------------------------------
# stopping thresholds
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def threshold_c1(n, delta, n_arms, s, zeta_s, eta):
    arg = math.log(n_arms * zeta_s / delta) + s * math.log(k_eta(eta, n)) \
        + 3.0 - LN2
    return lambert_bar(arg) - 3.0 + LN2


@njit(cache=True, nogil=True)
def threshold_c2(n, eps, eta):
    k = k_eta(eta, n)
    return k * (math.log1p(2.0 * eps * n / k) + 1.0)


@njit(cache=True, nogil=True)
def threshold_c_tilde(k, delta, n_arms, s, zeta_s):
    arg = math.log(n_arms * zeta_s / delta) + s * math.log(k) + 3.0 - LN2
    return lambert_bar(arg) - 3.0 + LN2


@njit(cache=True, nogil=True)
def threshold_heuristic(n, delta, n_arms):
    return math.log((1.0 + math.log(n)) * n_arms / delta)


@njit(cache=True, nogil=True)
def stop_threshold(n, eps, delta, eta, n_arms, s, zeta_s, mode, noise_off):
    """Per-arm threshold c(n, eps, delta); mode 0 = exact Eq-style, 1 = heuristic.
    With noise suppressed the privacy correction c2 is dropped."""
    if mode == 1:
        return threshold_heuristic(n, delta, n_arms)
    c = threshold_c1(n, delta, n_arms, s, zeta_s, eta)
    if not noise_off:
        c += threshold_c2(n, eps, eta)
    return c


# ---------------------------------------------------------------------------
# splittable counter-based RNG (splitmix64 core)
# ---------------------------------------------------------------------------

_SM_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_SM_M1 = np.uint64(0xBF58476D1CE4E5B9)
_SM_M2 = np.uint64(0x94D049BB133111EB)


@njit(cache=True, nogil=True)
def sm64_next(state):
    """One splitmix64 step: returns (new state, 64 random bits)."""
    state = state + _SM_GAMMA
    z = state
    z = (z ^ (z >> np.uint64(30))) * _SM_M1
    z = (z ^ (z >> np.uint64(27))) * _SM_M2
    z = z ^ (z >> np.uint64(31))
    return state, z


@njit(cache=True, nogil=True)
def sm64_mix(seed, key):
    """Derive a substream state from (seed, key); used for per-run seeds and
    the env/estimator/policy substreams."""
    s = np.uint64(seed) ^ (np.uint64(key) * _SM_M1 + _SM_GAMMA)
    s, z = sm64_next(s)
    s, z2 = sm64_next(s)
    return z ^ (z2 >> np.uint64(1))


@njit(cache=True, nogil=True)
def next_unit(state):
    """Uniform draw in the open interval (0,1)."""
    state, z = sm64_next(state)
    u = (float(z >> np.uint64(11)) + 0.5) * (1.0 / 9007199254740992.0)
    return state, u


@njit(cache=True, nogil=True)
def next_below(state, k):
    state, u = next_unit(state)
    j = int(u * k)
    if j >= k:
        j = k - 1
    return state, j


@njit(cache=True, nogil=True)
def next_laplace(state, scale):
    # inverse CDF written as scale * sign(u - 1/2) * log(1 - 2|u - 1/2|)
    state, u = next_unit(state)
    v = u - 0.5
    sign = 1.0 if v > 0.0 else (-1.0 if v < 0.0 else 0.0)
    return state, scale * sign * math.log(1.0 - 2.0 * abs(v))


# ---------------------------------------------------------------------------
# confidence indices (UCB / IMED / LUCB)
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def ucb_index(eps, mean_clipped, n_arm, budget):
    """max{u in [0,1] : n_arm * d^+(mean, u) <= budget}."""
    if budget <= 0.0:
        return mean_clipped
    v1, _ = d_plus(eps, mean_clipped, 1.0)
    if n_arm * v1 <= budget:
        return 1.0
    lo = mean_clipped
    hi = 1.0
    for _ in range(_MAX_ITER):
        u = 0.5 * (lo + hi)
        v, _ = d_plus(eps, mean_clipped, u)
        if n_arm * v <= budget:
            lo = u
        else:
            hi = u
        if hi - lo <= 1e-12:
            break
    return lo


@njit(cache=True, nogil=True)
def lcb_index(eps, mean_clipped, n_arm, budget):
    """Lower root of n_arm * d^-(mean, u) = budget below the clipped mean."""
    if budget <= 0.0:
        return mean_clipped
    v0, _ = d_minus(eps, mean_clipped, 0.0)
    if n_arm * v0 <= budget:
        return 0.0
    lo = 0.0
    hi = mean_clipped
    for _ in range(_MAX_ITER):
        u = 0.5 * (lo + hi)
        v, _ = d_minus(eps, mean_clipped, u)
        if n_arm * v <= budget:
            hi = u
        else:
            lo = u
        if hi - lo <= 1e-12:
            break
    return hi


# ---------------------------------------------------------------------------
# episode kernel
# ---------------------------------------------------------------------------

POLICY_DPTT = 0
POLICY_DPTT_TC = 1
POLICY_DPTT_UCB = 2
POLICY_DPTT_IMED = 3
POLICY_DPTT_IDS = 4
POLICY_DPTT_BOLD = 5
POLICY_LUCB = 6

STOP_GLR = 0
STOP_MODIFIED_GLR = 1


@njit(cache=True, nogil=True)
def _argmax_clipped(mut, pol_state):
    """EB recommendation: argmax of clipped means, ties uniform."""
    K = mut.shape[0]
    best = -1.0
    ties = 0
    for a in range(K):
        m = snap01(mut[a])
        if m > best:
            best = m
            ties = 1
        elif m == best:
            ties += 1
    if ties > 1:
        pol_state, j = next_below(pol_state, ties)
    else:
        j = 0
    seen = 0
    for a in range(K):
        if snap01(mut[a]) == best:
            if seen == j:
                return pol_state, a
            seen += 1
    return pol_state, 0


@njit(cache=True, nogil=True)
def episode(means, eps, delta, eta, beta, s, zeta_s,
            policy_id, threshold_mode, stop_rule, noise_off, direct_est,
            pull_cap, est_seed, pol_seed, env_seed,
            phases_out, pulls_out, noise_out, track_lo_out, track_hi_out):
    """Run one full episode; returns (stopping_time, recommendation, timed_out).

    Semantics mirror the pure-Python runner in harness.py step for step (the
    test suite pins them against each other on shared seeds).
    """
    K = means.shape[0]
    scale = 1.0 / eps

    N = np.zeros(K, np.int64)
    Ntil = np.zeros(K, np.int64)
    kph = np.zeros(K, np.int64)
    Stil = np.zeros(K, np.float64)
    mut = np.zeros(K, np.float64)
    pend = np.zeros(K, np.float64)
    pthr = np.zeros(K, np.float64)
    thrc = np.zeros(K, np.float64)
    L = np.zeros(K, np.int64)
    Nself = np.zeros(K, np.int64)
    scores = np.zeros(K, np.float64)

    est_state = np.uint64(est_seed)
    pol_state = np.uint64(pol_seed)
    env_state = np.uint64(env_seed)

    for a in range(K):
        env_state, u = next_unit(env_state)
        x = 1.0 if u < means[a] else 0.0
        y = 0.0
        if not noise_off:
            est_state, y = next_laplace(est_state, scale)
            noise_out[a] += 1
        N[a] = 1
        Ntil[a] = 1
        kph[a] = 1
        Stil[a] = x + y
        mut[a] = Stil[a]
        pthr[a] = 1.0 + eta
        thrc[a] = stop_threshold(1.0, eps, delta, eta, K, s, zeta_s,
                                 threshold_mode, noise_off)
        track_lo_out[a] = 0.0
        track_hi_out[a] = 0.0

    total = K
    dirty = True
    rec = 0
    last_a = -1
    last_b = -1
    timed_out = False

    while True:
        # per-arm geometric update grid (only pulled arms can switch)
        for which in range(2):
            arm = last_a if which == 0 else last_b
            if arm < 0:
                continue
            if direct_est:
                Ntil[arm] = N[arm]
                kph[arm] = N[arm]
                Stil[arm] += pend[arm]
                pend[arm] = 0.0
                mut[arm] = Stil[arm] / Ntil[arm]
                thrc[arm] = stop_threshold(float(Ntil[arm]), eps, delta, eta,
                                           K, s, zeta_s, threshold_mode,
                                           noise_off)
                dirty = True
            else:
                # eta < 1 can leave the trigger true after a switch: loop
                while N[arm] >= pthr[arm]:
                    kph[arm] += 1
                    Ntil[arm] = N[arm]
                    y = 0.0
                    if not noise_off:
                        est_state, y = next_laplace(est_state, scale)
                        noise_out[arm] += 1
                    Stil[arm] += pend[arm] + y
                    pend[arm] = 0.0
                    mut[arm] = Stil[arm] / Ntil[arm]
                    pthr[arm] = (1.0 + eta) ** kph[arm]
                    thrc[arm] = stop_threshold(float(Ntil[arm]), eps, delta,
                                               eta, K, s, zeta_s,
                                               threshold_mode, noise_off)
                    dirty = True
        last_a = -1
        last_b = -1

        if dirty and policy_id != POLICY_LUCB:
            pol_state, rec = _argmax_clipped(mut, pol_state)
            stopped = True
            for a in range(K):
                if a == rec:
                    continue
                if stop_rule == STOP_MODIFIED_GLR:
                    stat, _ = transport_modified(eps, eta, mut[rec], mut[a],
                                                 float(Ntil[rec]),
                                                 float(Ntil[a]))
                    thr = threshold_c_tilde(float(kph[rec]), delta, K, s, zeta_s) \
                        + threshold_c_tilde(float(kph[a]), delta, K, s, zeta_s)
                else:
                    stat = transport_value(eps, mut[rec], mut[a],
                                           float(Ntil[rec]), float(Ntil[a]))
                    thr = thrc[rec] + thrc[a]
                if not (stat > thr):
                    stopped = False
                    break
            if stopped:
                break
            dirty = False

        if policy_id == POLICY_LUCB:
            # EB leader + UCB challenger, LCB/UCB stopping, pulls both arms
            budget = math.log(float(total))
            pol_state, rec = _argmax_clipped(mut, pol_state)
            leader = rec
            best = -math.inf
            ties = 0
            for a in range(K):
                if a == leader:
                    scores[a] = -math.inf
                    continue
                scores[a] = ucb_index(eps, snap01(mut[a]), float(N[a]), budget)
                if scores[a] > best:
                    best = scores[a]
                    ties = 1
                elif scores[a] == best:
                    ties += 1
            if ties > 1:
                pol_state, j = next_below(pol_state, ties)
            else:
                j = 0
            challenger = -1
            seen = 0
            for a in range(K):
                if a != leader and scores[a] == best:
                    if seen == j:
                        challenger = a
                        break
                    seen += 1
            lcb = lcb_index(eps, snap01(mut[leader]), float(N[leader]), budget)
            if lcb > best:
                break
            for arm in (leader, challenger):
                env_state, u = next_unit(env_state)
                x = 1.0 if u < means[arm] else 0.0
                pend[arm] += x
                N[arm] += 1
                total += 1
            last_a = leader
            last_b = challenger
            if total >= pull_cap:
                timed_out = True
                break
            continue

        # ---- leader ----
        if policy_id == POLICY_DPTT_UCB or policy_id == POLICY_DPTT_IMED:
            budget = math.log(float(total))
            best = -math.inf if policy_id == POLICY_DPTT_UCB else math.inf
            ties = 0
            for a in range(K):
                if policy_id == POLICY_DPTT_UCB:
                    v = ucb_index(eps, snap01(mut[a]), float(N[a]), budget)
                    scores[a] = v
                    if v > best:
                        best = v
                        ties = 1
                    elif v == best:
                        ties += 1
                else:
                    mstar = -1.0
                    for b in range(K):
                        m = snap01(mut[b])
                        if m > mstar:
                            mstar = m
                    dv, _ = d_plus(eps, snap01(mut[a]), mstar)
                    v = N[a] * dv + math.log(float(N[a]))
                    scores[a] = v
                    if v < best:
                        best = v
                        ties = 1
                    elif v == best:
                        ties += 1
            if ties > 1:
                pol_state, j = next_below(pol_state, ties)
            else:
                j = 0
            leader = 0
            seen = 0
            for a in range(K):
                if scores[a] == best:
                    if seen == j:
                        leader = a
                        break
                    seen += 1
        else:
            leader = rec

        # ---- challenger (TCI, or TC without the log penalty) ----
        best = math.inf
        ties = 0
        for a in range(K):
            if a == leader:
                scores[a] = math.inf
                continue
            v = transport_value(eps, mut[leader], mut[a],
                                float(N[leader]), float(N[a]))
            if policy_id != POLICY_DPTT_TC:
                v += math.log(float(N[a]))
            scores[a] = v
            if v < best:
                best = v
                ties = 1
            elif v == best:
                ties += 1
        if ties > 1:
            pol_state, j = next_below(pol_state, ties)
        else:
            j = 0
        challenger = -1
        seen = 0
        for a in range(K):
            if a != leader and scores[a] == best:
                if seen == j:
                    challenger = a
                    break
                seen += 1

        # ---- target / tracking ----
        if policy_id == POLICY_DPTT_IDS:
            val, u_star, _ = transport(eps, mut[leader], mut[challenger],
                                       float(N[leader]), float(N[challenger]))
            if val > 0.0:
                dmv, _ = d_minus(eps, mut[leader], u_star)
                prob = N[leader] * dmv / val
            else:
                prob = beta
            pol_state, udraw = next_unit(pol_state)
            pulled = leader if udraw < prob else challenger
        elif policy_id == POLICY_DPTT_BOLD:
            ssum = 0.0
            force_leader = False
            for a in range(K):
                if a == leader:
                    continue
                _, u_star, _ = transport(eps, mut[leader], mut[a],
                                         float(N[leader]), float(N[a]))
                num, _ = d_minus(eps, mut[leader], u_star)
                den, _ = d_plus(eps, mut[a], u_star)
                if den <= 0.0:
                    force_leader = True
                    break
                ssum += num / den
            pulled = leader if (force_leader or ssum > 1.0) else challenger
        else:
            L[leader] += 1
            if Nself[leader] <= beta * L[leader]:
                pulled = leader
            else:
                pulled = challenger
            if pulled == leader:
                Nself[leader] += 1
            dev = Nself[leader] - beta * L[leader]
            if dev < track_lo_out[leader]:
                track_lo_out[leader] = dev
            if dev > track_hi_out[leader]:
                track_hi_out[leader] = dev

        env_state, u = next_unit(env_state)
        x = 1.0 if u < means[pulled] else 0.0
        pend[pulled] += x
        N[pulled] += 1
        total += 1
        last_a = pulled
        if total >= pull_cap:
            timed_out = True
            break

    for a in range(K):
        phases_out[a] = kph[a]
        pulls_out[a] = N[a]
    return total, rec, timed_out


# ---------------------------------------------------------------------------
# concentration-validator helper
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def grid_uniform_violations(eps, mu, mut_matrix, ntil, thresholds, upper):
    """Count trials whose reweighted modified-divergence statistic exceeds the
    per-phase threshold at any phase boundary.

    mut_matrix: (trials, phases) noisy means at each phase start;
    ntil: phase-start counts; thresholds: c~(k, delta) per phase.
    """
    trials, phases = mut_matrix.shape
    bad = 0
    for t in range(trials):
        for i in range(phases):
            n = ntil[i]
            r = n / (i + 1.0)
            m = mut_matrix[t, i]
            if upper:
                stat = n * d_tilde_minus(eps, m, mu, r)
            else:
                stat = n * d_tilde_plus(eps, m, mu, r)
            if stat > thresholds[i]:
                bad += 1
                break
    return bad
