"""(d, k) run-length-limited constraints and their closed-form coefficients."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .constraint import FiniteTypeConstraint
from .markov import MarkovChain
from .spectral import parry_chain

INF = math.inf


@dataclass(frozen=True)
class RLLParams:
    """Between ``d`` and ``k`` zeros separate consecutive ones; ``k`` may be ``math.inf``."""

    d: int
    k: float

    def __post_init__(self):
        if self.d < 0 or not (self.k == INF or (float(self.k).is_integer() and self.k >= self.d)):
            raise ValueError(f"invalid RLL parameters d={self.d}, k={self.k}")
        if self.k != INF:
            object.__setattr__(self, "k", int(self.k))

    @classmethod
    def parse(cls, text: str) -> "RLLParams":
        """Parse ``"D,K"`` with ``K`` an integer or ``inf``."""
        try:
            d_text, k_text = (s.strip() for s in text.split(","))
            d = int(d_text)
            k = INF if k_text.lower() in ("inf", "infinity", "∞") else int(k_text)
        except ValueError:
            raise ValueError(f"expected D,K with K an integer or 'inf', got {text!r}") from None
        return cls(d, k)

    @property
    def finite(self) -> bool:
        return self.k != INF

    def __str__(self) -> str:
        return f"({self.d},{'inf' if not self.finite else self.k})"


def rll_constraint(p: RLLParams) -> FiniteTypeConstraint:
    forbidden = ["1" + "0" * l + "1" for l in range(p.d)]
    if p.finite:
        forbidden.append("0" * (p.k + 1))
    return FiniteTypeConstraint(forbidden)


def rho0(p: RLLParams, tol: float = 1e-15) -> float:
    """Root in (0, 1) of ``sum_{l=d}^{k} rho^(l+1) = 1``; its reciprocal is the Perron eigenvalue."""
    if p.finite and p.k <= p.d:
        raise ValueError(f"{p} has zero capacity; no root in (0, 1)")

    def excess(r: float) -> float:
        if p.finite:
            return math.fsum(r ** (l + 1) for l in range(p.d, p.k + 1)) - 1.0
        return r ** (p.d + 1) / (1.0 - r) - 1.0

    lo, hi = 0.0, 1.0
    for _ in range(200):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _zeros(n: int) -> str:
    return "0" * n


def f_general(X: MarkovChain, p: RLLParams) -> float:
    """The ``eps log(1/eps)`` coefficient of a chain supported in ``S(d, k)``, from run-length words.

    For ``k = inf`` the run-length tail ``sum_{L >= L0} P(1 0^L 1)`` is
    summed in closed form as ``P(1 0^L0)``.
    """
    d = p.d
    prob = X.word_prob
    terms = []
    if p.finite:
        k = p.k
        for l2 in range(d):
            for l1 in range(d, k - l2):
                terms.append(prob("1" + _zeros(l1 + l2 + 1) + "1"))
        for l1 in range(d, k + 1):
            terms.append(prob("1" + _zeros(l1) + "1" + _zeros(k - l1)))
    else:
        for l2 in range(d):
            terms.append(prob("1" + _zeros(d + l2 + 1)))
    for l in range(1, d + 1):
        terms.append(prob("1" + _zeros(l)))
    return math.fsum(terms)


def f_maxentropy_closed_form(p: RLLParams) -> float:
    """``f`` of the maximum-entropy chain as a sum of powers of ``rho0``.

    ``P(1)`` is read off the Parry chain rather than a closed form.
    """
    r = rho0(p)
    p1 = parry_chain(rll_constraint(p)).word_prob("1")
    d = p.d
    terms = []
    if p.finite:
        k = p.k
        terms.append(r ** (k + 1))
        for l2 in range(d):
            for l1 in range(d, k - l2):
                terms.append(r ** (l1 + l2 + 2))
        for l1 in range(d, k):
            run = max(k - l1, d)  # the trailing zero run is at least d long
            terms.append(r ** (l1 + 1) * r ** (run + 1) * (1.0 - r ** (k - run + 1)) / (1.0 - r))
        for l in range(1, d + 1):
            run = max(l, d)
            terms.append(r ** (run + 1) * (1.0 - r ** (k - run + 1)) / (1.0 - r))
    else:
        for l2 in range(d):
            terms.append(r ** (d + l2 + 2) / (1.0 - r))
        for l in range(1, d + 1):
            terms.append(r ** (max(l, d) + 1) / (1.0 - r))
    return p1 * math.fsum(terms)


def golden_family_f(pi01: float) -> float:
    """``f`` of the first-order chain ``[[1 - pi01, pi01], [1, 0]]``."""
    if not 0.0 < pi01 <= 1.0:
        raise ValueError("pi01 must lie in (0, 1]")
    return pi01 * (2.0 - pi01) / (1.0 + pi01)


def golden_family_g(pi01: float) -> float:
    """``g`` of the first-order chain ``[[1 - pi01, pi01], [1, 0]]`` in closed form.

    Obtained by evaluating the general ``g`` sum symbolically for this family;
    the ``log(2 - pi01)`` contributions cancel.
    """
    p = pi01
    if not 0.0 < p < 1.0:
        raise ValueError("pi01 must lie in (0, 1)")
    q = 1.0 - 3.0 * p + p * p
    num = (p * (2.0 - p) + 2.0 * p * (p - 1.0) * math.log(2.0)
           - q * math.log(p) + 2.0 * q * math.log1p(-p))
    return num / (1.0 + p)


def golden_family_g_printed(pi01: float) -> float:
    """The five-line polynomial-log display for the same ``g``, term for term as published.

    Kept for comparison only: it does not agree with :func:`golden_family_g`
    or with the measured output entropy.
    """
    p = pi01
    if not 0.0 < p < 1.0:
        raise ValueError("pi01 must lie in (0, 1)")
    return ((2 * p - p**2 - 2 * p**3 + 3 * p**4 - p**5) / (1 + p)
            + (-2 * p + 4 * p**3 - 2 * p**4) * math.log(2)
            + (-1 + 3 * p - p**2 - 2 * p**3 + 5 * p**4 - 3 * p**5) * math.log(p)
            + (2 - 6 * p + 7 * p**3 - 8 * p**4 + 3 * p**5) * math.log(1 - p)
            + (2 * p + p**2 - 3 * p**3 + p**4) * math.log(2 - p))
