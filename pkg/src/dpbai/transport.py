"""Pairwise transportation costs: the closed-form private cost, its
brute-force grid oracle, and the modified cost used by the modified GLR
stopping rule."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from . import _kernels as _k
from .scalars import _require


class TransportCase(enum.IntEnum):
    """Branch taken by the closed-form dispatch.

    zero: indicator vanished (clipped means out of order or equal);
    zero_weight: one side carries no weight, infimum is 0;
    case1/case2: both divergences on the kl branch, weighted-mean minimizer;
    case3: both on the privacy branch, interior ratio minimizer;
    case4/case5: privacy branch meets kl branch, lower quadratic root;
    case6/case7: kl branch meets privacy branch, upper quadratic root;
    modified: fixed-point stationarity of the modified cost.
    """

    zero = 0
    case1 = 1
    case2 = 2
    case3 = 3
    case4 = 4
    case5 = 5
    case6 = 6
    case7 = 7
    zero_weight = 8
    modified = 9


@dataclass(frozen=True)
class TransportResult:
    value: float
    minimizer_u: float
    case_tag: TransportCase


def _check(eps: float, w_a: float, w_b: float) -> None:
    _require(eps > 0.0, f"eps must be positive, got {eps}")
    _require(w_a >= 0.0 and w_b >= 0.0,
             f"weights must be nonnegative, got ({w_a}, {w_b})")


def transport_cost(eps: float, mu_a: float, mu_b: float,
                   w_a: float, w_b: float) -> TransportResult:
    """W_eps for the arm pair (a, b): zero unless clip(mu_a) > clip(mu_b),
    otherwise the infimum over u of w_a d^-(mu_a, u) + w_b d^+(mu_b, u)."""
    _check(eps, w_a, w_b)
    v, u, case = _k.transport(eps, mu_a, mu_b, w_a, w_b)
    return TransportResult(v, u, TransportCase(case))


def transport_cost_grid(eps: float, mu_a: float, mu_b: float,
                        w_a: float, w_b: float,
                        grid_points: int = 100_000) -> TransportResult:
    """Direct minimization over a uniform u-grid plus one golden-section
    refinement; verification oracle for the closed form."""
    _check(eps, w_a, w_b)
    _require(grid_points >= 100, f"grid_points must be >= 100, got {grid_points}")
    v, u = _k.transport_grid(eps, mu_a, mu_b, w_a, w_b, grid_points)
    tag = TransportCase.zero if v == 0.0 and _k.snap01(mu_a) <= _k.snap01(mu_b) \
        else TransportCase.modified
    return TransportResult(v, u, tag)


def transport_cost_modified(eps: float, eta: float, mu_a: float, mu_b: float,
                            w_a: float, w_b: float) -> TransportResult:
    """Modified cost W~_eps with per-side rates r(w) = w / k_eta(w); weights
    are phase-start counts and must be >= 1."""
    _require(eps > 0.0 and eta > 0.0,
             f"eps and eta must be positive, got {eps}, {eta}")
    _require(w_a >= 1.0 and w_b >= 1.0,
             f"modified cost needs counts >= 1, got ({w_a}, {w_b})")
    if _k.snap01(mu_a) <= _k.snap01(mu_b):
        return TransportResult(0.0, _k.snap01(mu_a), TransportCase.zero)
    v, u = _k.transport_modified(eps, eta, mu_a, mu_b, w_a, w_b)
    return TransportResult(v, u, TransportCase.modified)
