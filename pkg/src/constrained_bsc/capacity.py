"""Noisy constrained capacity: small-noise expansion, computable bounds and probes.

``C(S, eps)`` is sandwiched by

    h_m(S, eps) - H(eps) <= C(S, eps) <= H_n(S, eps) - H(eps)

where ``H_n`` maximizes the Birch upper bound over stationary laws on
``(n+1)``-words supported on ``S`` and ``h_m`` maximizes the output entropy
rate over order-``m`` chains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import null_space

from .asymptotics import expansion_of
from .channel import (
    MAX_N,
    binary_entropy,
    check_eps,
    cond_entropy_output_pvector,
    entropy_rate_sandwich,
)
from .constraint import FiniteTypeConstraint, essential_graph, require_irreducible
from .markov import (
    MarkovChain,
    StationaryPVector,
    chain_from_kernel,
    entropy_rate_markov,
    pvector_of,
    random_chain,
    two_state_chain,
)
from .rll import golden_family_g
from .spectral import noiseless_capacity, parry_chain

GRAD_STEP = 1e-6
GRAD_TOL = 1e-9
MAX_ITER = 10**4
RESTARTS = 4


@dataclass(frozen=True)
class CapacityExpansion:
    """``C(S, eps) ~ c0 + c_log eps log(1/eps) + c_lin eps``."""

    c0: float
    c_log: float
    c_lin: float

    def evaluate(self, eps: float) -> float:
        eps = check_eps(eps)
        if eps == 0.0:
            return self.c0
        return self.c0 + self.c_log * eps * math.log(1.0 / eps) + self.c_lin * eps


@dataclass(frozen=True)
class TaylorProbe:
    K1: float
    K2: float
    K3: float


@dataclass(frozen=True, eq=False)
class HnResult:
    pvector: StationaryPVector
    value: float
    converged: bool
    iterations: int
    boundary_distance: float  # smallest entry of the maximizer


@dataclass(frozen=True, eq=False)
class HmResult:
    chain: MarkovChain
    lower: float
    upper: float
    n: int  # conditioning length used for the final sandwich
    gap: float
    converged: bool


def capacity_expansion(c: FiniteTypeConstraint) -> CapacityExpansion:
    X = parry_chain(c)
    e = expansion_of(X)
    return CapacityExpansion(noiseless_capacity(c), e.f - 1.0, e.g - 1.0)


def _ascend(F, theta: np.ndarray, feasible) -> tuple[np.ndarray, float, bool, int]:
    """Gradient ascent with central-difference gradients and backtracking.

    ``feasible(theta)`` must hold at the start; every accepted step keeps it.
    """
    value = F(theta)
    step = 1.0
    d = theta.size
    if d == 0:
        return theta, value, True, 0
    for it in range(1, MAX_ITER + 1):
        grad = np.empty(d)
        for i in range(d):
            e = np.zeros(d)
            e[i] = GRAD_STEP
            # a coordinate probe may leave the domain near the boundary; shrink it
            h = GRAD_STEP
            while not (feasible(theta + e) and feasible(theta - e)):
                h /= 2.0
                e[i] = h
                if h < 1e-14:
                    break
            grad[i] = (F(theta + e) - F(theta - e)) / (2.0 * h)
        if float(np.abs(grad).max()) <= GRAD_TOL:
            return theta, value, True, it
        step = min(step * 2.0, 1e6)
        accepted = False
        while step * float(np.abs(grad).max()) > 1e-16:
            cand = theta + step * grad
            if feasible(cand):
                v = F(cand)
                if v > value + 1e-4 * step * float(grad @ grad):
                    theta, value, accepted = cand, v, True
                    break
            step /= 2.0
        if not accepted:
            # no further progress at floating-point resolution
            return theta, value, float(np.abs(grad).max()) <= 1e3 * GRAD_TOL, it
    return theta, value, False, MAX_ITER


def _stationarity_system(index: Sequence[str]) -> np.ndarray:
    """Rows: prefix minus suffix marginal for each ``n``-word, then total mass."""
    subwords = sorted({w[:-1] for w in index} | {w[1:] for w in index})
    row_of = {s: i for i, s in enumerate(subwords)}
    M = np.zeros((len(subwords) + 1, len(index)))
    for j, w in enumerate(index):
        M[row_of[w[:-1]], j] += 1.0
        M[row_of[w[1:]], j] -= 1.0
        M[-1, j] = 1.0
    return M


def optimize_Hn(c: FiniteTypeConstraint, n: int, eps: float, seed: int = 0) -> HnResult:
    """Maximize ``H(Z_0 | Z_{-n}^{-1})`` over stationary laws on ``(n+1)``-words supported on ``c``.

    Ascent runs in the affine slice ``p = p0 + N theta`` cut out by shift
    stationarity and total mass, starting from the Parry marginals and from
    ``RESTARTS`` random interior points.
    """
    eps = check_eps(eps)
    require_irreducible(c)
    if n < c.order:
        raise ValueError(f"need n >= topological order {c.order}")
    if n > MAX_N:
        raise ValueError(f"n = {n} exceeds cap {MAX_N}")
    parry = parry_chain(c)
    base = pvector_of(parry, n)
    if eps == 0.0:
        return HnResult(base, noiseless_capacity(c), True, 0, float(base.p.min()))
    N = null_space(_stationarity_system(base.index))

    def point(theta):
        return base.p + N @ theta

    def feasible(theta):
        return bool(np.all(point(theta) > 0.0))

    def F(theta):
        return cond_entropy_output_pvector(base.with_values(point(theta)), eps)

    starts = [np.zeros(N.shape[1])]
    rng = np.random.default_rng(seed)
    for _ in range(RESTARTS):
        q = pvector_of(random_chain(c, max(n, 1), rng), n).p
        # project onto the slice; q already satisfies the constraints up to rounding
        starts.append(N.T @ (q - base.p))
    best = None
    for theta0 in starts:
        if not feasible(theta0):
            continue
        theta, value, conv, iters = _ascend(F, theta0, feasible)
        if best is None or value > best[1]:
            best = (theta, value, conv, iters)
    theta, value, conv, iters = best
    p = point(theta)
    return HnResult(base.with_values(p), value, conv, iters, float(p.min()))


def _lift(X: MarkovChain, m: int) -> MarkovChain:
    """The same process viewed as an order-``m`` chain (``m >= X.order``)."""
    if m == X.order:
        return X
    kernel = {}
    for ctx in X.support_words(m):
        short = ctx[len(ctx) - X.order:]
        kernel[ctx] = (X.transition(short, "0"), X.transition(short, "1"))
    return chain_from_kernel(m, kernel)


def _sandwich_to_tol(X: MarkovChain, eps: float, tol: float, n_start: int, n_cap: int):
    n = n_start
    while True:
        lo, hi = entropy_rate_sandwich(X, eps, n)
        if hi - lo <= tol or n >= n_cap:
            return n, lo, hi
        n += 1


def optimize_hm(c: FiniteTypeConstraint, m: int, eps: float, tol: float = 1e-6,
                n_cap: int = 16) -> HmResult:
    """Maximize the output entropy rate over order-``m`` chains supported on ``c``.

    Free parameters are one logit per context with two allowed successors.
    The objective is the Birch sandwich midpoint at a conditioning length
    chosen so the starting chain's gap is within ``tol``; the returned chain is
    re-evaluated with the length grown until its own gap is within ``tol``.
    """
    eps = check_eps(eps)
    require_irreducible(c)
    if m < max(c.order, 1):
        raise ValueError(f"need m >= max(topological order, 1) = {max(c.order, 1)}")
    X0 = _lift(parry_chain(c), m)
    if eps == 0.0:
        h = entropy_rate_markov(X0)
        return HmResult(X0, h, h, m, 0.0, True)
    contexts, _ = essential_graph(c, m)
    ctxset = set(contexts)
    fixed, free = {}, []
    for ctx in contexts:
        ok = [c.is_allowed(ctx + v) and (ctx + v)[1:] in ctxset for v in "01"]
        if all(ok):
            free.append(ctx)
        else:
            fixed[ctx] = (1.0, 0.0) if ok[0] else (0.0, 1.0)

    def chain(theta):
        kernel = dict(fixed)
        for ctx, t in zip(free, theta):
            p1 = 1.0 / (1.0 + math.exp(-t))
            kernel[ctx] = (1.0 - p1, p1)
        return chain_from_kernel(m, kernel)

    theta0 = np.array([math.log(X0.transition(ctx, "1") / X0.transition(ctx, "0")) for ctx in free])
    n_eval, _, _ = _sandwich_to_tol(X0, eps, tol, m, n_cap)

    def F(theta):
        lo, hi = entropy_rate_sandwich(chain(theta), eps, n_eval)
        return 0.5 * (lo + hi)

    def feasible(theta):
        return bool(np.all(np.abs(theta) < 50.0))

    theta, _, conv, _ = _ascend(F, theta0, feasible)
    X = chain(theta)
    n, lo, hi = _sandwich_to_tol(X, eps, tol, n_eval, n_cap)
    return HmResult(X, lo, hi, n, hi - lo, conv)


def capacity_sandwich(c: FiniteTypeConstraint, eps: float, m: int, n: int,
                      tol: float = 1e-6) -> tuple[float, float]:
    """``(h_m lower bound - H(eps), H_n - H(eps))``."""
    eps = check_eps(eps)
    if eps == 0.0:
        cap = noiseless_capacity(c)
        return cap, cap
    hb = binary_entropy(eps)
    lower = optimize_hm(c, m, eps, tol).lower - hb
    upper = optimize_Hn(c, n, eps).value - hb
    return lower, upper


def _golden_p_max() -> float:
    lam = (1.0 + math.sqrt(5.0)) / 2.0
    return 1.0 / lam**2


def taylor_probe(c: FiniteTypeConstraint | None = None) -> TaylorProbe:
    """Derivatives along ``pi01`` at the maximizer for the first-order ``{11}``-free family.

    Only the no-two-consecutive-ones constraint is supported.
    """
    if c is not None and set(c.minimal_forbidden) != {"11"}:
        raise ValueError("taylor_probe is only defined for the constraint forbidding '11'")
    p = _golden_p_max()
    # H = h(p) / (1 + p), with h the binary entropy
    h = binary_entropy(p)
    h1 = math.log((1.0 - p) / p)
    h2 = -1.0 / (p * (1.0 - p))
    K1 = h2 / (1 + p) - 2.0 * h1 / (1 + p) ** 2 + 2.0 * h / (1 + p) ** 3
    K2 = (2.0 - 2.0 * p - p * p) / (1.0 + p) ** 2
    step = 1e-5
    K3 = (golden_family_g(p + step) - golden_family_g(p - step)) / (2.0 * step)
    return TaylorProbe(K1, K2, K3)


@dataclass(frozen=True)
class SharpnessRow:
    eps: float
    pi01: float
    residual: float
    uncertainty: float


def sharpness_probe(alpha: float, eps_grid: Sequence[float], n: int = 10) -> list[SharpnessRow]:
    """Achievable rate of ``pi01 = p_max + alpha eps log(1/eps)`` minus the capacity expansion.

    Diagnostic only; ``uncertainty`` is the Birch sandwich gap.
    """
    probe = taylor_probe()
    upper = probe.K2 / abs(probe.K1)
    if not 0.0 < alpha < upper:
        raise ValueError(f"alpha must lie in (0, {upper:.6g})")
    exp = capacity_expansion(FiniteTypeConstraint(["11"]))
    rows = []
    for eps in eps_grid:
        eps = check_eps(eps)
        if not 0.0 < eps <= 1e-2:
            raise ValueError("eps values must lie in (0, 1e-2]")
        pi01 = _golden_p_max() + alpha * eps * math.log(1.0 / eps)
        lo, hi = entropy_rate_sandwich(two_state_chain(pi01, 1.0), eps, n)
        rate = 0.5 * (lo + hi) - binary_entropy(eps)
        rows.append(SharpnessRow(eps, pi01, rate - exp.evaluate(eps), max(hi - lo, 0.0)))
    return rows


__all__ = [
    "CapacityExpansion",
    "TaylorProbe",
    "HnResult",
    "HmResult",
    "SharpnessRow",
    "capacity_expansion",
    "optimize_Hn",
    "optimize_hm",
    "capacity_sandwich",
    "taylor_probe",
    "sharpness_probe",
]
