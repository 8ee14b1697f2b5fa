"""Small-noise expansion coefficients of the output entropy rate.

For a Markov input ``X`` of order ``m`` observed through BSC(eps),

    H(Z) = H(X) + f(X) eps log(1/eps) + g(X) eps + O(eps^2 log eps).

Everything here is eps-free: the coefficients are sums of word
probabilities of ``X`` and of their first eps-derivatives ``h`` (obtained by
single bit flips).  Which words vanish to first or second order is decided
from the exact support of ``X``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .constraint import flip
from .markov import MarkovChain, entropy_rate_markov


class WordClass(enum.Enum):
    ALLOWED_POSITIVE = "allowed"  # p_X(u) > 0
    THETA_EPS = "theta_eps"  # p_X(u) = 0, first derivative positive
    O_EPS_SQUARED = "o_eps2"  # p_X(u) = 0 and h = 0


@dataclass(frozen=True)
class AsymptoticExpansion:
    h0: float
    f: float
    g: float

    def evaluate(self, eps: float) -> float:
        if eps == 0.0:
            return self.h0
        return self.h0 + self.f * eps * math.log(1.0 / eps) + self.g * eps


def h_nk(X: MarkovChain, u: str, k: int) -> float:
    """First eps-derivative at 0 of the joint law of ``u`` (inputs before ``k``, outputs after)."""
    n = len(u)
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= len(u)")
    p = X.word_prob
    flips = math.fsum(p(flip(u, i)) for i in range(k, n))
    return flips - (n - k) * p(u)


def classify_word(X: MarkovChain, u: str, k: int) -> WordClass:
    if X.in_support(u):
        return WordClass.ALLOWED_POSITIVE
    if any(X.in_support(flip(u, i)) for i in range(k, len(u))):
        return WordClass.THETA_EPS
    return WordClass.O_EPS_SQUARED


def _check_nk(X: MarkovChain, n: int, k: int) -> None:
    if n < X.order:
        raise ValueError(f"need n >= order ({X.order}), got {n}")
    if not 0 <= k <= X.order:
        raise ValueError(f"need 0 <= k <= order, got {k}")


def boundary_pairs(X: MarkovChain, n: int) -> list[str]:
    """Words ``w v`` with ``w`` of length ``n`` in the support and ``w v`` outside it."""
    out = []
    for w in X.support_words(n):
        for v in "01":
            if not X.in_support(w + v):
                out.append(w + v)
    return out


def theta_words(X: MarkovChain, n: int, k: int) -> list[str]:
    """Length-``n`` words outside the support that one output-bit flip brings into it."""
    found = set()
    for w in X.support_words(n):
        for i in range(k, n):
            u = flip(w, i)
            if not X.in_support(u):
                found.add(u)
    return sorted(found)


def f_nk(X: MarkovChain, n: int, k: int) -> float:
    """Coefficient of ``eps log(1/eps)`` in the length-``n`` conditional bound."""
    _check_nk(X, n, k)
    return math.fsum(h_nk(X, wv, k) for wv in boundary_pairs(X, n))


def boundary_h(X: MarkovChain, wv: str, k: int) -> float:
    """``h`` of a boundary word, with the last-bit flip written as ``p(w v-bar)``."""
    p = X.word_prob
    n = len(wv) - 1
    flips = math.fsum(p(flip(wv, i)) for i in range(k, n))
    return flips + p(flip(wv, n))


def _allowed_drift_terms(X: MarkovChain, n: int, k: int) -> tuple[list[float], list[float]]:
    """Per allowed ``w v``: ``h(wv) log p(v|w)`` and ``(h(wv) p(w) - h(w) p(wv)) / p(w)``."""
    p = X.word_prob
    logs, drifts = [], []
    hw_cache: dict[str, float] = {}
    for w in X.support_words(n):
        pw = p(w)
        hw = hw_cache.setdefault(w, h_nk(X, w, k))
        for v in "01":
            wv = w + v
            pwv = p(wv)
            if pwv == 0.0:
                continue
            hwv = h_nk(X, wv, k)
            logs.append(hwv * math.log(pwv / pw))
            drifts.append((hwv * pw - hw * pwv) / pw)
    return logs, drifts


def _boundary_log_terms(X: MarkovChain, n: int, k: int) -> list[float]:
    p = X.word_prob
    out = []
    for wv in boundary_pairs(X, n):
        h = h_nk(X, wv, k)
        if not h > 0.0:
            raise ArithmeticError(f"boundary word {wv} has nonpositive derivative {h}")
        out.append(h * math.log(h / p(wv[:-1])))
    return out


def _theta_log_terms(X: MarkovChain, n: int, k: int) -> list[float]:
    out = []
    for w in theta_words(X, n, k):
        hw = h_nk(X, w, k)
        for v in "01":
            wv = w + v
            if classify_word(X, wv, k) is WordClass.THETA_EPS:
                hwv = h_nk(X, wv, k)
                if not (hwv > 0.0 and hw > 0.0):
                    raise ArithmeticError(f"theta word {wv} has nonpositive derivative")
                out.append(hwv * math.log(hwv / hw))
    return out


def g_nk(X: MarkovChain, n: int, k: int) -> float:
    """Coefficient of ``eps`` in the length-``n`` conditional bound."""
    _check_nk(X, n, k)
    logs, drifts = _allowed_drift_terms(X, n, k)
    terms = [-t for t in logs] + [-t for t in drifts]
    terms += [-t for t in _boundary_log_terms(X, n, k)]
    terms += [-t for t in _theta_log_terms(X, n, k)]
    return math.fsum(terms)


def g_positive(X: MarkovChain) -> float:
    """Divergence between the law of ``2m+1``-words and its middle-bit-flipped copy."""
    if not X.is_strictly_positive():
        raise ValueError("g_positive needs a strictly positive kernel")
    m = X.order
    terms = []
    for i in range(2 ** (2 * m + 1)):
        z = format(i, f"0{2 * m + 1}b")
        pz = X.word_prob(z)
        terms.append(pz * math.log(pz / X.word_prob(flip(z, m))))
    return math.fsum(terms)


def expansion_of(X: MarkovChain) -> AsymptoticExpansion:
    m = X.order
    return AsymptoticExpansion(entropy_rate_markov(X), f_nk(X, 2 * m, 0), g_nk(X, 3 * m, 0))


# Defining sums of the three n-independent pieces of g, and their reductions
# to windows of length 2m / 3m.

def drift_sum(X: MarkovChain, n: int, k: int) -> float:
    _check_nk(X, n, k)
    return math.fsum(_allowed_drift_terms(X, n, k)[1])


def drift_sum_closed_form(X: MarkovChain) -> float:
    m = X.order
    p = X.word_prob
    terms = [-1.0]
    for wv in boundary_pairs(X, 2 * m):
        terms.extend(-p(flip(wv, 2 * m - j)) for j in range(1, m + 1))
    for c in X.support_words(m):
        for v in "01":
            if X.in_support(c + v):
                terms.append(p(c + ("1" if v == "0" else "0")))
    return math.fsum(terms)


def boundary_log_sum(X: MarkovChain, n: int, k: int) -> float:
    _check_nk(X, n, k)
    return math.fsum(_boundary_log_terms(X, n, k))


def boundary_log_sum_closed_form(X: MarkovChain) -> float:
    m = X.order
    p = X.word_prob
    terms = []
    for wv in boundary_pairs(X, 2 * m):
        weight = boundary_h(X, wv, m)
        terms.append(weight * math.log(h_nk(X, wv, 0) / p(wv[:-1])))
    return math.fsum(terms)


def log_ratio_sum(X: MarkovChain, n: int, k: int) -> float:
    _check_nk(X, n, k)
    logs, _ = _allowed_drift_terms(X, n, k)
    return math.fsum(logs + _theta_log_terms(X, n, k))


def log_ratio_sum_closed_form(X: MarkovChain) -> float:
    m = X.order
    p = X.word_prob
    terms = []
    for c in X.support_words(m):
        for v in "01":
            pcv = p(c + v)
            if pcv > 0.0:
                terms.append((-m - 1) * pcv * math.log(pcv / p(c)))
    for w in X.support_words(2 * m):
        for v in "01":
            wv = w + v
            if not X.in_support(wv):
                continue
            weight = boundary_h(X, wv, m)
            terms.append(weight * math.log(p(wv[m:]) / p(w[m:])))
    # The (n - k - m) multiplier above assumes every flip at j > m of an
    # allowed word lands in the support or in a theta word whose prefix is
    # outside it.  For m >= 2 some land elsewhere; remove their mass.
    n = 3 * m
    for u in X.support_words(n + 1):
        log_cond = math.log(p(u[-m - 1:]) / p(u[-m - 1:-1]))
        for j in range(m + 1, n + 1):
            x = flip(u, n - j)
            if X.in_support(x):
                continue
            if X.in_support(x[:-1]) or X.in_support(x[: n - m]):
                terms.append(-p(u) * log_cond)
    for w in theta_words(X, 3 * m, 0):
        if not X.in_support(w[: 2 * m]):
            continue
        hw = h_nk(X, w, 0)
        for v in "01":
            if classify_word(X, w + v, 0) is WordClass.THETA_EPS:
                hwv = h_nk(X, w + v, 0)
                terms.append(hwv * math.log(hwv / hw))
    return math.fsum(terms)


def lemma_residual(X: MarkovChain, eps: float, n: int) -> float:
    """Birch upper bound minus its two-term expansion at conditioning length ``n``."""
    from .channel import cond_entropy_output
    from .markov import cond_entropy_words, pvector_of

    base = cond_entropy_words(pvector_of(X, n))
    approx = base + f_nk(X, n, 0) * eps * math.log(1.0 / eps) + g_nk(X, n, 0) * eps
    return cond_entropy_output(X, eps, n) - approx


def residual_ratio_diagnostic(p: float, eps_grid, n: int = 3) -> list[tuple[float, float, float]]:
    """``(eps, residual, residual / (eps^2 log(1/eps)))`` for the chain ``[[1-p, p], [1, 0]]``.

    Printed for manual inspection; no particular third-order coefficient is
    asserted from it.
    """
    from .markov import two_state_chain

    X = two_state_chain(p, 1.0)
    out = []
    for eps in eps_grid:
        r = lemma_residual(X, eps, n)
        out.append((float(eps), r, r / (eps * eps * math.log(1.0 / eps))))
    return out


__all__ = [
    "AsymptoticExpansion",
    "WordClass",
    "h_nk",
    "classify_word",
    "f_nk",
    "g_nk",
    "g_positive",
    "expansion_of",
    "drift_sum",
    "drift_sum_closed_form",
    "boundary_log_sum",
    "boundary_log_sum_closed_form",
    "log_ratio_sum",
    "log_ratio_sum_closed_form",
    "lemma_residual",
    "residual_ratio_diagnostic",
]
