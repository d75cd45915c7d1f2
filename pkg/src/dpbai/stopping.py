"""Stopping thresholds, the GLR and modified-GLR stopping tests, the LUCB
stopping test, and the recommendation rule."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from scipy.special import zeta as _zeta

from . import _kernels as _k
from .divergences import PrivacyParams
from .gpe import Snapshot
from .policies import eb_leader, lcb_index, ucb_index
from .rng import SplitStream
from .scalars import _require

THRESHOLD_MODES = ("exact", "heuristic")


@dataclass(frozen=True)
class StopDecision:
    stop: bool
    recommendation: int
    binding_challenger: Optional[int]
    statistic: float
    threshold: float


def zeta(s: float) -> float:
    _require(s > 1.0, f"zeta parameter must exceed 1, got {s}")
    return float(_zeta(s))


def threshold_c(n: float, params: PrivacyParams, n_arms: int,
                s: float = 2.0) -> tuple[float, float]:
    """Stopping threshold parts (c1, c2) at phase-start count n; the total
    per-arm threshold is their sum."""
    _require(n >= 1, f"count must be >= 1, got {n}")
    zs = zeta(s)
    c1 = _k.threshold_c1(float(n), params.delta, n_arms, s, zs, params.eta)
    c2 = _k.threshold_c2(float(n), params.eps, params.eta)
    return c1, c2


def threshold_c_tilde(k: int, params: PrivacyParams, n_arms: int,
                      s: float = 2.0) -> float:
    """Per-phase threshold of the modified GLR rule (c1 with the phase count
    substituted for k_eta(n))."""
    _require(k >= 1, f"phase count must be >= 1, got {k}")
    return _k.threshold_c_tilde(float(k), params.delta, n_arms, s, zeta(s))


def threshold_heuristic(n: float, params: PrivacyParams, n_arms: int) -> float:
    """log((1 + log n) K / delta); exploratory mode mirroring empirical
    thresholds, not covered by the correctness theorem."""
    _require(n >= 1, f"count must be >= 1, got {n}")
    return _k.threshold_heuristic(float(n), params.delta, n_arms)


def glr_stop(eps: float, params: PrivacyParams, snapshot: Snapshot,
             rng: SplitStream, s: float = 2.0, mode: str = "exact",
             noise_off: bool = False) -> StopDecision:
    """Parallel GLR tests: stop when every alternative's transportation
    statistic at (mu~, N~) clears the summed per-arm thresholds."""
    _require(mode in THRESHOLD_MODES, f"unknown threshold mode {mode!r}")
    K = len(snapshot.mu_tilde)
    rec = eb_leader(snapshot.mu_tilde, rng)
    zs = zeta(s)
    mode_id = 0 if mode == "exact" else 1

    def thr(n):
        return _k.stop_threshold(float(n), eps, params.delta, params.eta,
                                 K, s, zs, mode_id, noise_off)

    thr_rec = thr(snapshot.n_tilde[rec])
    stop = True
    worst_margin = math.inf
    binding = None
    b_stat = 0.0
    b_thr = 0.0
    for a in range(K):
        if a == rec:
            continue
        stat = _k.transport_value(eps, float(snapshot.mu_tilde[rec]),
                                  float(snapshot.mu_tilde[a]),
                                  float(snapshot.n_tilde[rec]),
                                  float(snapshot.n_tilde[a]))
        t = thr_rec + thr(snapshot.n_tilde[a])
        margin = stat - t
        if margin <= 0.0:
            stop = False
        if margin < worst_margin:
            worst_margin = margin
            binding = a
            b_stat = stat
            b_thr = t
    return StopDecision(stop, rec, binding, b_stat, b_thr)


def modified_glr_stop(eps: float, params: PrivacyParams, snapshot: Snapshot,
                      rng: SplitStream, s: float = 2.0) -> StopDecision:
    """GLR variant with the modified transportation cost and per-phase
    thresholds c~(k, delta)."""
    K = len(snapshot.mu_tilde)
    rec = eb_leader(snapshot.mu_tilde, rng)
    zs = zeta(s)
    thr_rec = _k.threshold_c_tilde(float(snapshot.phase[rec]), params.delta,
                                   K, s, zs)
    stop = True
    worst_margin = math.inf
    binding = None
    b_stat = 0.0
    b_thr = 0.0
    for a in range(K):
        if a == rec:
            continue
        stat, _ = _k.transport_modified(eps, params.eta,
                                        float(snapshot.mu_tilde[rec]),
                                        float(snapshot.mu_tilde[a]),
                                        float(snapshot.n_tilde[rec]),
                                        float(snapshot.n_tilde[a]))
        t = thr_rec + _k.threshold_c_tilde(float(snapshot.phase[a]),
                                           params.delta, K, s, zs)
        margin = stat - t
        if margin <= 0.0:
            stop = False
        if margin < worst_margin:
            worst_margin = margin
            binding = a
            b_stat = stat
            b_thr = t
    return StopDecision(stop, rec, binding, b_stat, b_thr)


def lucb_stop(eps: float, snapshot: Snapshot, n: int, leader: int,
              challenger: int) -> StopDecision:
    """Stop when the leader's lower confidence bound clears the challenger's
    upper confidence bound (indices on global counts)."""
    lcb = lcb_index(eps, snapshot.mu_tilde, snapshot.n_raw, n, leader)
    ucb = ucb_index(eps, snapshot.mu_tilde, snapshot.n_raw, n, challenger)
    return StopDecision(lcb > ucb, leader, challenger, lcb, ucb)
