"""Sampling rules: the default top-two rule (EB leader, TCI challenger,
beta-tracking) and its variants (TC challenger, UCB/IMED leaders, IDS and
BOLD targets, track-and-stop with C-tracking, LUCB's paired sampling)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as _k
from .oracle import BanditInstance, DegenerateInstanceError, characteristic_time
from .rng import SplitStream
from .scalars import _require

POLICY_IDS = {
    "dp-tt": _k.POLICY_DPTT,
    "dp-tt-tc": _k.POLICY_DPTT_TC,
    "dp-tt-ucb-leader": _k.POLICY_DPTT_UCB,
    "dp-tt-imed-leader": _k.POLICY_DPTT_IMED,
    "dp-tt-ids": _k.POLICY_DPTT_IDS,
    "dp-tt-bold": _k.POLICY_DPTT_BOLD,
    "lucb": _k.POLICY_LUCB,
    "tas": 7,
}


@dataclass
class TrackingState:
    """Per-arm leader counts L and self-pull counts for the K independent
    beta-tracking procedures; satisfies -1/2 <= N_self - beta L <= 1."""

    leader_count: np.ndarray
    self_count: np.ndarray

    @classmethod
    def fresh(cls, n_arms: int) -> "TrackingState":
        return cls(np.zeros(n_arms, dtype=np.int64),
                   np.zeros(n_arms, dtype=np.int64))


@dataclass(frozen=True)
class PolicyChoice:
    leader: int
    challenger: int
    pulled: int
    rng_events: int = 0


def _pick_tied(values, target, rng: SplitStream, use_min=False):
    """Uniform choice among exact ties; consumes one draw only when tied."""
    idx = [i for i, v in enumerate(values) if v == target]
    if len(idx) == 1:
        return idx[0], 0
    return idx[rng.below(len(idx))], 1


def eb_leader(mu_tilde, rng: SplitStream) -> int:
    """Arm with the highest clipped noisy mean, ties uniform."""
    clipped = [_k.snap01(float(m)) for m in mu_tilde]
    best = max(clipped)
    arm, _ = _pick_tied(clipped, best, rng)
    return arm


def tci_challenger(eps: float, mu_tilde, counts, leader: int,
                   rng: SplitStream, penalized: bool = True) -> int:
    """argmin over a != leader of W_eps(leader, a) + log N_a; the TC variant
    drops the log penalty."""
    K = len(mu_tilde)
    _require(K >= 2, "need at least 2 arms")
    scores = []
    for a in range(K):
        if a == leader:
            scores.append(math.inf)
            continue
        v = _k.transport_value(eps, float(mu_tilde[leader]), float(mu_tilde[a]),
                               float(counts[leader]), float(counts[a]))
        if penalized:
            v += math.log(float(counts[a]))
        scores.append(v)
    best = min(scores)
    arm, _ = _pick_tied(scores, best, rng)
    return arm


def beta_track(tracking: TrackingState, beta: float, leader: int,
               challenger: int) -> int:
    """One step of the leader's tracking procedure; increments L first, pulls
    the leader iff N_self <= beta L afterwards."""
    _require(leader != challenger, "leader and challenger must differ")
    tracking.leader_count[leader] += 1
    if tracking.self_count[leader] <= beta * tracking.leader_count[leader]:
        pulled = leader
        tracking.self_count[leader] += 1
    else:
        pulled = challenger
    return pulled


def ids_target(eps: float, mu_tilde, counts, leader: int, challenger: int,
               fallback_beta: float = 0.5) -> float:
    """Probability of pulling the leader under the randomized IDS target."""
    val, u_star, _ = _k.transport(eps, float(mu_tilde[leader]),
                                  float(mu_tilde[challenger]),
                                  float(counts[leader]),
                                  float(counts[challenger]))
    if val <= 0.0:
        return fallback_beta
    num = counts[leader] * _k.d_minus(eps, float(mu_tilde[leader]), u_star)[0]
    return num / val


def bold_choose(eps: float, mu_tilde, counts, leader: int, challenger: int) -> int:
    """Deterministic BOLD target: pull the leader iff the information-balance
    sum exceeds 1 (zero denominators force a leader pull)."""
    total = 0.0
    for a in range(len(mu_tilde)):
        if a == leader:
            continue
        _, u_star, _ = _k.transport(eps, float(mu_tilde[leader]),
                                    float(mu_tilde[a]),
                                    float(counts[leader]), float(counts[a]))
        num = _k.d_minus(eps, float(mu_tilde[leader]), u_star)[0]
        den = _k.d_plus(eps, float(mu_tilde[a]), u_star)[0]
        if den <= 0.0:
            return leader
        total += num / den
    return leader if total > 1.0 else challenger


def ucb_index(eps: float, mu_tilde, counts, n: int, arm: int) -> float:
    """Largest u with N_arm d^+(clip(mu), u) <= log n."""
    _require(counts[arm] >= 1, "arm needs at least one sample")
    _require(n >= 2, f"need n >= 2, got {n}")
    return _k.ucb_index(eps, _k.snap01(float(mu_tilde[arm])),
                        float(counts[arm]), math.log(float(n)))


def lcb_index(eps: float, mu_tilde, counts, n: int, arm: int) -> float:
    """Lower root of N_arm d^-(clip(mu), u) = log n below the clipped mean."""
    _require(counts[arm] >= 1, "arm needs at least one sample")
    _require(n >= 2, f"need n >= 2, got {n}")
    return _k.lcb_index(eps, _k.snap01(float(mu_tilde[arm])),
                        float(counts[arm]), math.log(float(n)))


def project_floor(w, floor: float):
    """Sup-norm projection of a simplex vector onto {w >= floor, sum = 1}:
    water-fill max(w_a - t, floor) to total 1."""
    w = np.asarray(w, dtype=float)
    K = w.shape[0]
    _require(floor <= 1.0 / K, f"floor {floor} infeasible for {K} arms")
    lo, hi = 0.0, 1.0
    while np.maximum(w - hi, floor).sum() > 1.0:
        hi *= 2.0
    for _ in range(200):
        t = 0.5 * (lo + hi)
        if np.maximum(w - t, floor).sum() > 1.0:
            lo = t
        else:
            hi = t
        if hi - lo <= 1e-15:
            break
    out = np.maximum(w - 0.5 * (lo + hi), floor)
    # push the residual onto the largest coordinate to hit the simplex exactly
    out[int(np.argmax(out))] += 1.0 - out.sum()
    return out


def tas_weights(eps: float, mu_tilde) -> np.ndarray:
    """Oracle allocation for the plug-in instance; uniform fallback when the
    empirical means are degenerate or the solver fails."""
    K = len(mu_tilde)
    uniform = np.full(K, 1.0 / K)
    if any(not (0.0 < m < 1.0) for m in mu_tilde):
        return uniform
    try:
        sol = characteristic_time(eps, BanditInstance(tuple(float(m) for m in mu_tilde)))
    except (DegenerateInstanceError, ValueError):
        return uniform
    return sol.w_star


def tas_choose(eps: float, mu_tilde, counts, n: int, cumulative_targets,
               rng: SplitStream, weights=None):
    """C-tracking pull: accumulate the floor-projected oracle allocation and
    pull the arm whose cumulative target exceeds its count the most."""
    K = len(mu_tilde)
    w = tas_weights(eps, mu_tilde) if weights is None else np.asarray(weights, float)
    floor = 0.5 / math.sqrt(K * K + n)
    w_proj = project_floor(w, floor)
    cumulative_targets = np.asarray(cumulative_targets, float) + w_proj
    gaps = cumulative_targets - np.asarray(counts, float)
    best = gaps.max()
    arm, _ = _pick_tied(list(gaps), best, rng)
    return arm, cumulative_targets
