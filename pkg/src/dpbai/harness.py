"""Bernoulli environment, episode runner, Monte Carlo aggregation and the
epsilon sweep reproducing the two-regime behavior.

Two episode paths exist: a jitted kernel (the default for the top-two family
and LUCB) and a pure-Python reference that also hosts track-and-stop.  Both
consume the same splittable random streams and are pinned against each other
trace-for-trace in the test suite.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels as _k
from .divergences import PrivacyParams
from .gpe import DirectEstimator, GeometricPrivateEstimator
from .oracle import BanditInstance, characteristic_time, regime_boundary
from .policies import (POLICY_IDS, TrackingState, beta_track, bold_choose,
                       eb_leader, ids_target, tas_choose, tas_weights,
                       tci_challenger, ucb_index)
from .rng import KEY_ENV, KEY_EST, KEY_POL, SplitStream, derive_seed
from .scalars import _require
from .stopping import glr_stop, lucb_stop, modified_glr_stop, zeta

PRESETS = {
    "mu1": (0.95, 0.9, 0.9, 0.9, 0.5),
    "mu2": (0.75, 0.7, 0.7, 0.7, 0.7),
    "mu3": (0.1, 0.3, 0.5, 0.7, 0.9),
    "mu4": (0.75, 0.625, 0.5, 0.375, 0.25),
    "mu5": (0.75, 0.53125, 0.375, 0.28125, 0.25),
    "mu6": (0.75, 0.71875, 0.625, 0.46875, 0.25),
}

RUN_CSV_HEADER = ("run_id,policy,eps,delta,eta,beta,seed,stopping_time,"
                  "recommendation,correct,timed_out")
SUMMARY_CSV_HEADER = ("policy,eps,delta,eta,beta,runs,mean,std,sem,"
                     "error_rate,oracle_T,regime_eps,wall_time_s")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    instance: BanditInstance
    params: PrivacyParams
    policy: str = "dp-tt"
    eps_grid: tuple[float, ...] = ()
    runs: int = 200
    seed: int = 20240811
    threshold_mode: str = "exact"
    stop_rule: str = "glr"
    pull_cap: int = 10_000_000
    s: float = 2.0
    noise_off: bool = False
    estimator: str = "gpe"
    output_path: str = ""
    workers: int = 0
    force_python: bool = False

    def __post_init__(self):
        if self.policy not in POLICY_IDS:
            raise ConfigError(f"unknown policy {self.policy!r}; "
                              f"choose from {sorted(POLICY_IDS)}")
        if self.threshold_mode not in ("exact", "heuristic"):
            raise ConfigError(f"threshold_mode must be exact|heuristic, "
                              f"got {self.threshold_mode!r}")
        if self.stop_rule not in ("glr", "modified-glr"):
            raise ConfigError(f"stop_rule must be glr|modified-glr, "
                              f"got {self.stop_rule!r}")
        if self.estimator not in ("gpe", "direct"):
            raise ConfigError(f"estimator must be gpe|direct, "
                              f"got {self.estimator!r}")
        if self.estimator == "direct" and not self.noise_off:
            raise ConfigError("the direct estimator is the non-private "
                              "baseline: it requires noise_off = true")
        if self.runs < 1:
            raise ConfigError(f"runs must be >= 1, got {self.runs}")
        if self.pull_cap < len(self.instance.means) + 1:
            raise ConfigError(f"pull_cap too small: {self.pull_cap}")
        if self.s <= 1.0:
            raise ConfigError(f"s must exceed 1, got {self.s}")

    def effective_workers(self) -> int:
        if self.workers > 0:
            return self.workers
        env = os.environ.get("DPBAI_WORKERS", "")
        if env.strip():
            return max(1, int(env))
        return max(1, os.cpu_count() or 1)


@dataclass(frozen=True)
class RunRecord:
    seed: int
    stopping_time: int
    recommendation: int
    correct: bool
    phases_per_arm: tuple[int, ...]
    pulls_per_arm: tuple[int, ...]
    timed_out: bool


def parse_instance(text: str) -> BanditInstance:
    text = text.strip()
    if text in PRESETS:
        return BanditInstance(PRESETS[text])
    try:
        means = tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError as exc:
        raise ConfigError(f"cannot parse instance {text!r}") from exc
    return BanditInstance(means)


_BOOL = {"true": True, "1": True, "yes": True,
         "false": False, "0": False, "no": False}


def parse_config_text(text: str) -> dict:
    """Flat key = value format, one experiment per file, '#' comments."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def config_from_mapping(kv: dict) -> ExperimentConfig:
    kv = dict(kv)

    def pop(key, default=None):
        return kv.pop(key, default)

    try:
        instance = parse_instance(pop("instance", "mu2"))
        params = PrivacyParams(eps=float(pop("eps", 1.0)),
                               delta=float(pop("delta", 0.1)),
                               eta=float(pop("eta", 1.0)),
                               beta=float(pop("beta", 0.5)))
        grid_text = pop("eps_grid", "")
        grid = tuple(float(tok) for tok in grid_text.split(",") if tok.strip())
        cfg = ExperimentConfig(
            instance=instance, params=params,
            policy=pop("policy", "dp-tt"),
            eps_grid=grid,
            runs=int(pop("runs", 200)),
            seed=int(pop("seed", 20240811)),
            threshold_mode=pop("threshold_mode", "exact"),
            stop_rule=pop("stop_rule", "glr"),
            pull_cap=int(pop("pull_cap", 10_000_000)),
            s=float(pop("s", 2.0)),
            noise_off=_BOOL[pop("noise_off", "false").lower()],
            estimator=pop("estimator", "gpe"),
            output_path=pop("output", ""),
            workers=int(pop("workers", 0)),
            force_python=_BOOL[pop("force_python", "false").lower()],
        )
    except (KeyError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    if kv:
        raise ConfigError(f"unknown config keys: {sorted(kv)}")
    return cfg


def load_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return config_from_mapping(parse_config_text(fh.read()))


# ---------------------------------------------------------------------------
# episode runners
# ---------------------------------------------------------------------------


def _run_kernel(config: ExperimentConfig, run_seed: int) -> RunRecord:
    means = np.asarray(config.instance.means)
    K = len(means)
    phases = np.zeros(K, dtype=np.int64)
    pulls = np.zeros(K, dtype=np.int64)
    noise = np.zeros(K, dtype=np.int64)
    track_lo = np.zeros(K)
    track_hi = np.zeros(K)
    p = config.params
    total, rec, timed_out = _k.episode(
        means, p.eps, p.delta, p.eta, p.beta, config.s, zeta(config.s),
        POLICY_IDS[config.policy],
        0 if config.threshold_mode == "exact" else 1,
        _k.STOP_GLR if config.stop_rule == "glr" else _k.STOP_MODIFIED_GLR,
        config.noise_off, config.estimator == "direct",
        config.pull_cap,
        np.uint64(derive_seed(run_seed, KEY_EST)),
        np.uint64(derive_seed(run_seed, KEY_POL)),
        np.uint64(derive_seed(run_seed, KEY_ENV)),
        phases, pulls, noise, track_lo, track_hi)
    correct = (not timed_out) and rec == config.instance.best_arm
    return RunRecord(run_seed, int(total), int(rec), bool(correct),
                     tuple(int(x) for x in phases),
                     tuple(int(x) for x in pulls), bool(timed_out))


def _run_python(config: ExperimentConfig, run_seed: int,
                assert_tracking: bool = False,
                horizon: int | None = None,
                trace: list | None = None) -> RunRecord:
    """Reference runner; also the only path for track-and-stop.  `horizon`
    forces a fixed number of pulls (stop tests skipped) for trace tests."""
    means = config.instance.means
    K = len(means)
    p = config.params
    env = SplitStream.from_seed(run_seed, KEY_ENV)
    est_rng = SplitStream.from_seed(run_seed, KEY_EST)
    pol = SplitStream.from_seed(run_seed, KEY_POL)
    direct = config.estimator == "direct"
    est_cls = DirectEstimator if direct else GeometricPrivateEstimator
    est = est_cls(K, p, est_rng, noise_off=config.noise_off)
    est.initialize([env.bernoulli(m) for m in means])
    tracking = TrackingState.fresh(K)
    cum_targets = np.zeros(K)
    tas_w = None
    total = K
    dirty = True
    rec = 0
    last: list[int] = []
    timed_out = False
    policy = config.policy

    while True:
        for arm in last:
            if direct:
                est.maybe_advance(arm)
                dirty = True
            else:
                while est.maybe_advance(arm):
                    dirty = True
        last = []
        snap = est.snapshot()

        if policy != "lucb" and dirty:
            if config.stop_rule == "glr":
                dec = glr_stop(p.eps, p, snap, pol, s=config.s,
                               mode=config.threshold_mode,
                               noise_off=config.noise_off)
            else:
                dec = modified_glr_stop(p.eps, p, snap, pol, s=config.s)
            rec = dec.recommendation
            if dec.stop and horizon is None:
                break
            dirty = False
            if policy == "tas":
                tas_w = tas_weights(p.eps, snap.mu_tilde)

        if policy == "lucb":
            rec = eb_leader(snap.mu_tilde, pol)
            leader = rec
            scores = [-math.inf if a == leader else
                      ucb_index(p.eps, snap.mu_tilde, snap.n_raw, total, a)
                      for a in range(K)]
            best = max(scores)
            tied = [a for a, v in enumerate(scores) if v == best]
            challenger = tied[pol.below(len(tied))] if len(tied) > 1 else tied[0]
            dec = lucb_stop(p.eps, snap, total, leader, challenger)
            if dec.stop and horizon is None:
                break
            if trace is not None:
                trace.append((leader, challenger, leader))
            for arm in (leader, challenger):
                est.record(arm, env.bernoulli(means[arm]))
                total += 1
            last = [leader, challenger]
            if total >= config.pull_cap or (horizon is not None and total >= horizon):
                timed_out = total >= config.pull_cap
                break
            continue

        if policy == "tas":
            if tas_w is None:
                tas_w = tas_weights(p.eps, snap.mu_tilde)
            pulled, cum_targets = tas_choose(p.eps, snap.mu_tilde, snap.n_raw,
                                             total, cum_targets, pol,
                                             weights=tas_w)
            leader = rec
            challenger = pulled
        else:
            if policy == "dp-tt-ucb-leader":
                scores = [ucb_index(p.eps, snap.mu_tilde, snap.n_raw, total, a)
                          for a in range(K)]
                best = max(scores)
                tied = [a for a, v in enumerate(scores) if v == best]
                leader = tied[pol.below(len(tied))] if len(tied) > 1 else tied[0]
            elif policy == "dp-tt-imed-leader":
                mstar = max(_k.snap01(float(m)) for m in snap.mu_tilde)
                scores = [
                    snap.n_raw[a] * _k.d_plus(p.eps, _k.snap01(float(snap.mu_tilde[a])),
                                              mstar)[0]
                    + math.log(float(snap.n_raw[a]))
                    for a in range(K)]
                best = min(scores)
                tied = [a for a, v in enumerate(scores) if v == best]
                leader = tied[pol.below(len(tied))] if len(tied) > 1 else tied[0]
            else:
                leader = rec
            challenger = tci_challenger(p.eps, snap.mu_tilde, snap.n_raw,
                                        leader, pol,
                                        penalized=policy != "dp-tt-tc")
            if policy == "dp-tt-ids":
                prob = ids_target(p.eps, snap.mu_tilde, snap.n_raw, leader,
                                  challenger, fallback_beta=p.beta)
                pulled = leader if pol.uniform() < prob else challenger
            elif policy == "dp-tt-bold":
                pulled = bold_choose(p.eps, snap.mu_tilde, snap.n_raw, leader,
                                     challenger)
            else:
                pulled = beta_track(tracking, p.beta, leader, challenger)
                if assert_tracking:
                    dev = (tracking.self_count[leader]
                           - p.beta * tracking.leader_count[leader])
                    assert -0.5 <= dev <= 1.0, f"tracking invariant broken: {dev}"

        if trace is not None:
            trace.append((leader, challenger, pulled))
        est.record(pulled, env.bernoulli(means[pulled]))
        total += 1
        last = [pulled]
        if total >= config.pull_cap or (horizon is not None and total >= horizon):
            timed_out = total >= config.pull_cap
            break

    correct = (not timed_out) and rec == config.instance.best_arm
    return RunRecord(run_seed, total, rec, bool(correct),
                     tuple(int(x) for x in est.phase),
                     tuple(int(x) for x in est.n_raw), bool(timed_out))


def run_episode(config: ExperimentConfig, run_seed: int) -> RunRecord:
    """Execute one episode; deterministic in (config, run_seed)."""
    if config.policy == "tas" or config.force_python:
        return _run_python(config, run_seed)
    return _run_kernel(config, run_seed)


# ---------------------------------------------------------------------------
# Monte Carlo aggregation and sweeps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Summary:
    policy: str
    eps: float
    delta: float
    eta: float
    beta: float
    runs: int
    mean: float
    std: float
    sem: float
    error_rate: float
    oracle_t: float
    regime_eps: float
    wall_time_s: float

    def csv_row(self) -> str:
        return (f"{self.policy},{self.eps!r},{self.delta!r},{self.eta!r},"
                f"{self.beta!r},{self.runs},{self.mean!r},{self.std!r},"
                f"{self.sem!r},{self.error_rate!r},{self.oracle_t!r},"
                f"{self.regime_eps!r},{self.wall_time_s!r}")


@dataclass(frozen=True)
class MonteCarloResult:
    records: tuple[RunRecord, ...]
    summary: Summary


def run_seeds(master_seed: int, runs: int) -> list[int]:
    return [derive_seed(master_seed, 1000 + i) for i in range(runs)]


def monte_carlo(config: ExperimentConfig,
                oracle_t: float | None = None) -> MonteCarloResult:
    """Run `config.runs` seeded episodes (parallel across worker threads) and
    aggregate stopping times and the misidentification rate."""
    t0 = time.perf_counter()
    seeds = run_seeds(config.seed, config.runs)
    workers = config.effective_workers()
    if workers > 1 and config.runs > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(lambda sd: run_episode(config, sd), seeds))
    else:
        records = [run_episode(config, sd) for sd in seeds]
    wall = time.perf_counter() - t0

    times = np.array([r.stopping_time for r in records], dtype=float)
    errors = sum(1 for r in records if not r.timed_out and not r.correct)
    if oracle_t is None:
        oracle_t = characteristic_time(config.params.eps, config.instance).t_star
    _, boundary = regime_boundary(config.instance)
    summary = Summary(
        policy=config.policy, eps=config.params.eps, delta=config.params.delta,
        eta=config.params.eta, beta=config.params.beta, runs=config.runs,
        mean=float(times.mean()),
        std=float(times.std(ddof=1)) if config.runs > 1 else 0.0,
        sem=float(times.std(ddof=1) / math.sqrt(config.runs)) if config.runs > 1 else 0.0,
        error_rate=errors / config.runs,
        oracle_t=oracle_t, regime_eps=boundary, wall_time_s=wall)
    if config.output_path:
        write_records_csv(config, records, config.output_path)
        write_summary_csv([summary], _summary_path(config.output_path))
    return MonteCarloResult(tuple(records), summary)


def sweep_epsilon(config: ExperimentConfig) -> list[MonteCarloResult]:
    """One Monte Carlo batch per epsilon on the grid, annotated with the
    regime boundary and the oracle curve T*(eps) log(1/delta)."""
    _require(len(config.eps_grid) > 0, "sweep needs a nonempty eps_grid")
    results = []
    for eps in config.eps_grid:
        cfg = replace(config, params=replace(config.params, eps=eps),
                      output_path="")
        t_star = characteristic_time(eps, config.instance).t_star
        oracle_curve = t_star * math.log(1.0 / config.params.delta)
        res = monte_carlo(cfg, oracle_t=oracle_curve)
        results.append(res)
    if config.output_path:
        rows = []
        for res in results:
            cfg_rows, _ = records_csv_rows(
                replace(config,
                        params=replace(config.params, eps=res.summary.eps)),
                res.records)
            rows.extend(cfg_rows)
        _write_lines(config.output_path, [RUN_CSV_HEADER] + rows)
        write_summary_csv([r.summary for r in results],
                          _summary_path(config.output_path))
    return results


def records_csv_rows(config: ExperimentConfig, records) -> tuple[list[str], str]:
    p = config.params
    rows = []
    for i, r in enumerate(records):
        rows.append(f"{i},{config.policy},{p.eps!r},{p.delta!r},{p.eta!r},"
                    f"{p.beta!r},{r.seed},{r.stopping_time},"
                    f"{r.recommendation},{r.correct},{r.timed_out}")
    return rows, RUN_CSV_HEADER


def write_records_csv(config: ExperimentConfig, records, path: str) -> None:
    rows, header = records_csv_rows(config, records)
    _write_lines(path, [header] + rows)


def write_summary_csv(summaries, path: str) -> None:
    _write_lines(path, [SUMMARY_CSV_HEADER] + [s.csv_row() for s in summaries])


def _summary_path(path: str) -> str:
    root, ext = os.path.splitext(path)
    return f"{root}.summary{ext or '.csv'}"


def _write_lines(path: str, lines) -> None:
    try:
        parent = os.path.dirname(path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise IOError(f"cannot write {path}: {exc}") from exc
