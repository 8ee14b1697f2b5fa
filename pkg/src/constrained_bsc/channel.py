"""Binary symmetric channel driven by a stationary Markov input.

Output laws are computed with a forward recursion over the input context, for
every output word of a given length at once.  Word tables are indexed by the
integer whose binary expansion (most significant bit = oldest symbol) is the
word.
"""

from __future__ import annotations

import math

import numpy as np

from .constraint import ResourceError
from .markov import MarkovChain, StationaryPVector

#: Largest conditioning length accepted by the entropy routines.
MAX_N = 24


def check_eps(eps: float) -> float:
    eps = float(eps)
    if not 0.0 <= eps <= 0.5:
        raise ValueError(f"crossover probability must lie in [0, 1/2], got {eps}")
    return eps


def binary_entropy(eps: float) -> float:
    eps = check_eps(eps)
    if eps == 0.0:
        return 0.0
    return -eps * math.log(eps) - (1.0 - eps) * math.log1p(-eps)


def _emission(eps: float, observed: bool) -> np.ndarray:
    """``M[z, x]``: probability of reading ``z`` when ``x`` was sent."""
    if observed:
        return np.eye(2)
    return np.array([[1.0 - eps, eps], [eps, 1.0 - eps]])


def joint_table(X: MarkovChain, eps: float, length: int, k: int = 0) -> np.ndarray:
    """Probabilities of all ``2**length`` words whose first ``k`` symbols are inputs and the rest outputs."""
    eps = check_eps(eps)
    m = X.order
    if not 0 <= k <= length:
        raise ValueError("need 0 <= k <= length")
    if length > MAX_N + 1:
        raise ResourceError(f"word length {length} exceeds cap {MAX_N + 1}")
    if length < m:
        full = joint_table(X, eps, m, min(k, m))
        return full.reshape(2**length, 2 ** (m - length)).sum(axis=1)
    pi, T = X.full_arrays()
    # initial window: first m symbols
    E = np.ones((1, 1))
    for i in range(m):
        E = np.kron(E, _emission(eps, i < k))
    A = E * pi[None, :]
    size = 2**m
    half = size // 2
    for t in range(m, length):
        S = [(A * T[:, v]).reshape(A.shape[0], 2, half).sum(axis=1) for v in (0, 1)]
        ctx = np.stack(S, axis=-1).reshape(A.shape[0], size)
        M = _emission(eps, t < k)
        last = np.arange(size) & 1
        A = (ctx[:, None, :] * M[:, last][None, :, :]).reshape(2 * A.shape[0], size)
    return A.sum(axis=1)


def joint_xz_prob(X: MarkovChain, eps: float, k: int, w: str) -> float:
    """``P(X-part = w[:k], Z-part = w[k:])`` by forward recursion over contexts.

    Cost is ``O(len(w) * 2**order)``.
    """
    eps = check_eps(eps)
    L, m = len(w), X.order
    if not 0 <= k <= L:
        raise ValueError("need 0 <= k <= len(w)")
    if L == 0:
        return 1.0
    pi, T = X.full_arrays()
    size = 2**m
    bits = (np.arange(size)[:, None] >> np.arange(m - 1, -1, -1)[None, :]) & 1
    alpha = pi.copy()
    for i in range(min(L, m)):
        e = _emission(eps, i < k)[int(w[i])]
        alpha = alpha * e[bits[:, i]]
    if L <= m:
        return float(alpha.sum())
    half = size // 2
    last = np.arange(size) & 1
    for t in range(m, L):
        S = [(alpha * T[:, v]).reshape(2, half).sum(axis=0) for v in (0, 1)]
        ctx = np.stack(S, axis=-1).reshape(size)
        e = _emission(eps, t < k)[int(w[t])]
        alpha = ctx * e[last]
    return float(alpha.sum())


def _cond_entropy_from_table(table: np.ndarray) -> float:
    prefix = table.reshape(-1, 2).sum(axis=1)
    joint = table.reshape(-1, 2)
    mask = joint > 0
    ratio = np.where(mask, joint, 1.0) / np.where(mask, prefix[:, None], 1.0)
    terms = -(joint[mask] * np.log(ratio[mask]))
    # largest first; fsum is correctly rounded regardless of order
    return math.fsum(np.sort(terms)[::-1])


def cond_entropy_output(X: MarkovChain, eps: float, n: int) -> float:
    """Birch upper bound ``H(Z_0 | Z_{-n}^{-1})``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n > MAX_N:
        raise ResourceError(f"n = {n} exceeds cap {MAX_N}")
    return _cond_entropy_from_table(joint_table(X, eps, n + 1, 0))


def cond_entropy_birch_lower(X: MarkovChain, eps: float, n: int) -> float:
    """Birch lower bound ``H(Z_0 | Z_{-n+m}^{-1}, X_{-n}^{-n+m-1})``."""
    if n < X.order:
        raise ValueError("lower bound needs n >= order")
    if n > MAX_N:
        raise ResourceError(f"n = {n} exceeds cap {MAX_N}")
    return _cond_entropy_from_table(joint_table(X, eps, n + 1, X.order))


def entropy_rate_sandwich(X: MarkovChain, eps: float, n: int) -> tuple[float, float]:
    return cond_entropy_birch_lower(X, eps, n), cond_entropy_output(X, eps, n)


def output_law_from_pvector(p: StationaryPVector, eps: float) -> np.ndarray:
    """Output law on all ``2**(n+1)`` words for an input law on words of length ``n+1``.

    Applies the channel matrix along every time axis of the input tensor.
    """
    eps = check_eps(eps)
    L = p.n + 1
    if p.n > MAX_N:
        raise ResourceError(f"n = {p.n} exceeds cap {MAX_N}")
    x = np.zeros(2**L)
    for w, q in zip(p.index, p.p):
        x[int(w, 2)] += q
    x = x.reshape((2,) * L)
    M = _emission(eps, False)
    for axis in range(L):
        x = np.moveaxis(np.tensordot(M, x, axes=([1], [axis])), 0, axis)
    return x.reshape(-1)


def cond_entropy_output_pvector(p: StationaryPVector, eps: float) -> float:
    """``H(Z_0 | Z_{-n}^{-1})`` when the input's ``(n+1)``-marginal is ``p``."""
    return _cond_entropy_from_table(output_law_from_pvector(p, eps))
