"""Geometric private estimator: per-arm geometric phases, accumulated noisy
partial sums without forgetting, and constant snapshots between phase
switches.

Each arm keeps a phase index k, a raw count N, the phase-start count
N-tilde, the accumulated noisy sum S-tilde and the noisy mean.  Raw rewards
land in a pending buffer; when an arm's count reaches (1+eta)^k the buffer
is flushed into S-tilde together with one fresh Laplace(1/eps) draw.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .divergences import PrivacyParams
from .rng import SplitStream
from .scalars import _require


class Snapshot(NamedTuple):
    mu_tilde: np.ndarray
    n_tilde: np.ndarray
    phase: np.ndarray
    n_raw: np.ndarray


@dataclass
class PhaseEvent:
    """One flushed phase: raw sum collected in it and the noise added."""

    arm: int
    phase: int
    raw_sum: float
    noise: float


class GeometricPrivateEstimator:
    """One estimator instance is owned by one run; snapshots are value copies."""

    def __init__(self, n_arms: int, params: PrivacyParams, rng: SplitStream,
                 noise_off: bool = False, record_phases: bool = False):
        _require(n_arms >= 2, f"need at least 2 arms, got {n_arms}")
        self.n_arms = n_arms
        self.params = params
        self.rng = rng
        self.noise_off = noise_off
        self.scale = 1.0 / params.eps
        self.phase = np.zeros(n_arms, dtype=np.int64)
        self.n_raw = np.zeros(n_arms, dtype=np.int64)
        self.n_tilde = np.zeros(n_arms, dtype=np.int64)
        self.s_tilde = np.zeros(n_arms)
        self.mu_tilde = np.zeros(n_arms)
        self.pending = np.zeros(n_arms)
        self.noise_draws = np.zeros(n_arms, dtype=np.int64)
        self._phase_threshold = np.zeros(n_arms)
        self.phase_log: list[PhaseEvent] | None = [] if record_phases else None
        self._initialized = False

    def initialize(self, first_rewards) -> None:
        """Consume the one mandatory observation per arm: phase 1 holds
        exactly the initialization sample."""
        first_rewards = np.asarray(first_rewards, dtype=float)
        _require(first_rewards.shape == (self.n_arms,),
                 "initialize needs one reward per arm")
        for a in range(self.n_arms):
            x = first_rewards[a]
            _require(x in (0.0, 1.0), f"rewards must be 0/1, got {x}")
            noise = 0.0 if self.noise_off else self.rng.laplace(self.scale)
            if not self.noise_off:
                self.noise_draws[a] += 1
            self.phase[a] = 1
            self.n_raw[a] = 1
            self.n_tilde[a] = 1
            self.s_tilde[a] = x + noise
            self.mu_tilde[a] = self.s_tilde[a]
            self._phase_threshold[a] = 1.0 + self.params.eta
            if self.phase_log is not None:
                self.phase_log.append(PhaseEvent(a, 1, x, noise))
        self._initialized = True

    def record(self, arm: int, reward: int) -> None:
        """Store a raw reward; noisy fields stay untouched until a switch."""
        _require(0 <= arm < self.n_arms, f"invalid arm {arm}")
        _require(reward in (0, 1), f"rewards must be 0/1, got {reward}")
        self.n_raw[arm] += 1
        self.pending[arm] += reward

    def maybe_advance(self, arm: int) -> bool:
        """Fire a phase switch when N_arm >= (1+eta)^k; one Laplace draw per
        switch, pending observations accumulated without forgetting."""
        _require(0 <= arm < self.n_arms, f"invalid arm {arm}")
        if self.n_raw[arm] < self._phase_threshold[arm]:
            return False
        self.phase[arm] += 1
        self.n_tilde[arm] = self.n_raw[arm]
        noise = 0.0 if self.noise_off else self.rng.laplace(self.scale)
        if not self.noise_off:
            self.noise_draws[arm] += 1
        if self.phase_log is not None:
            self.phase_log.append(
                PhaseEvent(arm, int(self.phase[arm]), float(self.pending[arm]), noise))
        self.s_tilde[arm] += self.pending[arm] + noise
        self.pending[arm] = 0.0
        self.mu_tilde[arm] = self.s_tilde[arm] / self.n_tilde[arm]
        self._phase_threshold[arm] = (1.0 + self.params.eta) ** self.phase[arm]
        return True

    def snapshot(self) -> Snapshot:
        return Snapshot(self.mu_tilde.copy(), self.n_tilde.copy(),
                        self.phase.copy(), self.n_raw.copy())


class DirectEstimator:
    """Non-private baseline estimator: running means, N-tilde = N, no noise.

    Matches the eta -> 0 limit of the geometric estimator without its phase
    bookkeeping; used by the noise-suppressed baseline configuration.
    """

    def __init__(self, n_arms: int, params: PrivacyParams, rng: SplitStream,
                 noise_off: bool = True, record_phases: bool = False):
        self.n_arms = n_arms
        self.n_raw = np.zeros(n_arms, dtype=np.int64)
        self.n_tilde = np.zeros(n_arms, dtype=np.int64)
        self.s_tilde = np.zeros(n_arms)
        self.mu_tilde = np.zeros(n_arms)
        self.phase = np.zeros(n_arms, dtype=np.int64)
        self.noise_draws = np.zeros(n_arms, dtype=np.int64)
        self.phase_log = None

    def initialize(self, first_rewards) -> None:
        for a in range(self.n_arms):
            self.n_raw[a] = 1
            self.n_tilde[a] = 1
            self.s_tilde[a] = float(first_rewards[a])
            self.mu_tilde[a] = self.s_tilde[a]
            self.phase[a] = 1

    def record(self, arm: int, reward: int) -> None:
        self.n_raw[arm] += 1
        self.s_tilde[arm] += reward

    def maybe_advance(self, arm: int) -> bool:
        self.n_tilde[arm] = self.n_raw[arm]
        self.phase[arm] = self.n_raw[arm]
        self.mu_tilde[arm] = self.s_tilde[arm] / self.n_raw[arm]
        return True

    def snapshot(self) -> Snapshot:
        return Snapshot(self.mu_tilde.copy(), self.n_tilde.copy(),
                        self.phase.copy(), self.n_raw.copy())
