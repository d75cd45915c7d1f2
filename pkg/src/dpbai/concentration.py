"""Monte Carlo validation of the concentration bounds behind the stopping
threshold: Laplace tails, the Bernoulli+Laplace convolution envelope, and the
grid-uniform statistic driving the per-phase threshold."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import _kernels as _k
from .scalars import _require

# one-sided z=3 level used by the margin policy
_Z3_LEVEL = float(stats.norm.sf(3.0))


@dataclass(frozen=True)
class TailReport:
    lemma_id: str
    trials: int
    violations: int
    bound: float
    bound_margin: float
    passed: bool
    params: dict = field(default_factory=dict)

    @property
    def frequency(self) -> float:
        return self.violations / self.trials


def _judge(lemma_id: str, violations: int, trials: int, bound: float,
           params: dict) -> TailReport:
    """Pass when the empirical frequency sits below bound + 3 binomial
    standard errors; bounds near zero fall back to an exact one-sided
    binomial (Clopper-Pearson style) test."""
    phat = violations / trials
    b = min(bound, 1.0)
    margin = 3.0 * math.sqrt(b * (1.0 - b) / trials)
    ok = phat <= b + margin
    if not ok and b > 0.0:
        # exact tail probability of seeing >= violations under p = bound
        ok = float(stats.binom.sf(violations - 1, trials, b)) >= _Z3_LEVEL
    return TailReport(lemma_id, trials, violations, bound,
                      b + margin - phat, ok, params)


def laplace_tail_check(eps: float, t: int, x: float, trials: int,
                       seed: int = 0, lower: bool = False) -> TailReport:
    """P(S_t >= t x) <= exp(-t h(eps x)) for S_t a sum of t Laplace(1/eps)
    draws (the lower tail is its mirror image)."""
    _require(trials >= 10_000, f"need >= 1e4 trials, got {trials}")
    _require(x > 0.0 and t >= 1, f"need x > 0 and t >= 1, got x={x}, t={t}")
    rng = np.random.default_rng(seed)
    violations = 0
    done = 0
    chunk = max(1, 4_000_000 // t)
    while done < trials:
        m = min(chunk, trials - done)
        sums = rng.laplace(0.0, 1.0 / eps, size=(m, t)).sum(axis=1)
        violations += int((sums <= -t * x).sum() if lower
                          else (sums >= t * x).sum())
        done += m
    bound = math.exp(-t * _k.h_rate(eps * x))
    lemma = "laplace_lower" if lower else "laplace_upper"
    return _judge(lemma, violations, trials, bound,
                  dict(eps=eps, t=t, x=x, seed=seed))


def convolution_tail_check(eps: float, mu: float, t: int, n_t: int, x: float,
                           trials: int, seed: int = 0,
                           tail: str = "upper") -> TailReport:
    """Upper tail: P(Z_t + S_t >= t(mu+x)) <= f(t d~^-(mu+x, mu, t/n_t));
    lower tail uses d~^+ at mu-x."""
    _require(trials >= 10_000, f"need >= 1e4 trials, got {trials}")
    _require(0.0 < mu < 1.0, f"mu must lie in (0,1), got {mu}")
    _require(1 <= n_t <= t, f"need 1 <= n_t <= t, got n_t={n_t}, t={t}")
    _require(tail in ("upper", "lower"), f"tail must be upper/lower, got {tail!r}")
    rng = np.random.default_rng(seed)
    r = t / n_t
    violations = 0
    done = 0
    chunk = max(1, 4_000_000 // n_t)
    while done < trials:
        m = min(chunk, trials - done)
        z = rng.binomial(t, mu, size=m).astype(float)
        s = rng.laplace(0.0, 1.0 / eps, size=(m, n_t)).sum(axis=1)
        total = z + s
        if tail == "upper":
            violations += int((total >= t * (mu + x)).sum())
        else:
            violations += int((total <= t * (mu - x)).sum())
        done += m
    if tail == "upper":
        rate = t * _k.d_tilde_minus(eps, mu + x, mu, r)
    else:
        rate = t * _k.d_tilde_plus(eps, mu - x, mu, r)
    bound = _k.f_envelope(rate)
    return _judge(f"convolution_{tail}", violations, trials, bound,
                  dict(eps=eps, mu=mu, t=t, n_t=n_t, x=x, seed=seed))


def phase_grid(eta: float, horizon: int) -> np.ndarray:
    """Phase-start counts ceil((1+eta)^(k-1)) up to the horizon."""
    counts = []
    k = 1
    while True:
        n = math.ceil((1.0 + eta) ** (k - 1))
        if n > horizon:
            break
        counts.append(n)
        k += 1
    return np.asarray(counts, dtype=np.int64)


def geometric_grid_uniform_check(eps: float, eta: float, mu: float,
                                 horizon: int, trials: int, s: float = 2.0,
                                 delta: float = 0.1, seed: int = 0,
                                 tail: str = "upper") -> TailReport:
    """Simulate a single-arm private estimator stream to the horizon; the
    reweighted statistic N~ d~(mu~, mu, N~/k) must clear the per-phase
    threshold c~(k, delta) at every phase boundary, except with probability
    <= delta."""
    _require(trials >= 1_000, f"need >= 1e3 trials, got {trials}")
    _require(tail in ("upper", "lower"), f"tail must be upper/lower, got {tail!r}")
    from scipy.special import zeta as _zeta

    rng = np.random.default_rng(seed)
    ntil = phase_grid(eta, horizon)
    phases = len(ntil)
    # raw Bernoulli sums at phase starts (increments between grid points) and
    # one fresh Laplace draw per phase, accumulated without forgetting
    incr = np.diff(np.concatenate(([0], ntil)))
    z = np.zeros((trials, phases))
    acc = np.zeros(trials)
    for i in range(phases):
        acc = acc + rng.binomial(int(incr[i]), mu, size=trials)
        z[:, i] = acc
    lap = rng.laplace(0.0, 1.0 / eps, size=(trials, phases)).cumsum(axis=1)
    mut = (z + lap) / ntil[None, :]

    zs = float(_zeta(s))
    thresholds = np.array([
        _k.threshold_c_tilde(float(k + 1), delta, 1, s, zs)
        for k in range(phases)
    ])
    violations = int(_k.grid_uniform_violations(eps, mu, mut,
                                                ntil.astype(np.float64),
                                                thresholds, tail == "upper"))
    return _judge(f"grid_uniform_{tail}", violations, trials, delta,
                  dict(eps=eps, eta=eta, mu=mu, horizon=horizon, s=s,
                       delta=delta, seed=seed))


#: Versioned parameter grid of the validate subcommand (one row per report).
MANIFEST = (
    ("laplace_upper", dict(eps=1.0, t=10, x=0.5, trials=1_000_000, seed=101)),
    ("laplace_lower", dict(eps=1.0, t=10, x=0.5, trials=1_000_000, seed=102)),
    ("laplace_upper", dict(eps=2.0, t=25, x=0.3, trials=1_000_000, seed=103)),
    ("laplace_upper", dict(eps=0.5, t=40, x=0.8, trials=1_000_000, seed=104)),
    ("convolution_upper",
     dict(eps=1.0, mu=0.5, t=64, n_t=7, x=0.15, trials=1_000_000, seed=201)),
    ("convolution_lower",
     dict(eps=1.0, mu=0.5, t=64, n_t=7, x=0.15, trials=1_000_000, seed=202)),
    ("convolution_upper",
     dict(eps=1.0, mu=0.5, t=64, n_t=64, x=0.15, trials=1_000_000, seed=203)),
    ("convolution_upper",
     dict(eps=2.0, mu=0.4, t=128, n_t=8, x=0.2, trials=1_000_000, seed=204)),
    ("grid_uniform_upper",
     dict(eps=1.0, eta=1.0, mu=0.5, horizon=10_000, trials=2_000, s=2.0,
          delta=0.1, seed=301)),
    ("grid_uniform_lower",
     dict(eps=1.0, eta=1.0, mu=0.5, horizon=10_000, trials=2_000, s=2.0,
          delta=0.1, seed=302)),
    ("grid_uniform_upper",
     dict(eps=1e6, eta=1.0, mu=0.5, horizon=10_000, trials=2_000, s=2.0,
          delta=0.1, seed=303)),
)


def run_check(lemma_id: str, params: dict) -> TailReport:
    if lemma_id.startswith("laplace"):
        return laplace_tail_check(lower=lemma_id.endswith("lower"), **params)
    if lemma_id.startswith("convolution"):
        return convolution_tail_check(tail=lemma_id.split("_")[1], **params)
    if lemma_id.startswith("grid_uniform"):
        return geometric_grid_uniform_check(tail=lemma_id.split("_")[2], **params)
    raise ValueError(f"unknown lemma id {lemma_id!r}")


def run_manifest(only: str | None = None) -> list[TailReport]:
    reports = []
    for lemma_id, params in MANIFEST:
        if only is not None and only not in lemma_id:
            continue
        reports.append(run_check(lemma_id, params))
    return reports


def report_csv_rows(reports) -> list[str]:
    rows = ["lemma_id,trials,violations,frequency,bound,bound_margin,passed"]
    for r in reports:
        rows.append(f"{r.lemma_id},{r.trials},{r.violations},"
                    f"{r.frequency!r},{r.bound!r},{r.bound_margin!r},{r.passed}")
    return rows
