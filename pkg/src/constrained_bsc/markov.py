"""Stationary binary Markov chains of arbitrary order.

A chain of order ``m`` is described by its contexts (the length-``m`` words of
positive stationary probability) and, for each context, the probabilities of
the next bit.  Zero transition probabilities are stored as exact zeros and the
support of the chain is decided from them, never from float thresholds.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from .constraint import FiniteTypeConstraint, ResourceError, enumerate_allowed, essential_graph

STOCHASTIC_TOL = 1e-12
DIRECT_SOLVE_MAX = 4096


class InvalidChainError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class MarkovChain:
    order: int
    contexts: tuple[str, ...]
    kernel: np.ndarray  # shape (len(contexts), 2): P(next bit = v | context)
    stationary: np.ndarray
    _index: dict = field(init=False, repr=False)
    _cache: dict = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {c: i for i, c in enumerate(self.contexts)})
        object.__setattr__(self, "_cache", {})

    def __repr__(self) -> str:
        rows = ", ".join(f"{c}:({t[0]:.6g},{t[1]:.6g})" for c, t in zip(self.contexts, self.kernel))
        return f"MarkovChain(order={self.order}, {rows})"

    def transition(self, context: str, v: str) -> float:
        i = self._index.get(context)
        if i is None:
            return 0.0
        return float(self.kernel[i, int(v)])

    def context_prob(self, context: str) -> float:
        i = self._index.get(context)
        return 0.0 if i is None else float(self.stationary[i])

    def _marginals(self, length: int) -> dict[str, float]:
        key = ("marg", length)
        if key not in self._cache:
            out: dict[str, float] = {}
            for c, p in zip(self.contexts, self.stationary):
                s = c[self.order - length:]
                out[s] = out.get(s, 0.0) + float(p)
            self._cache[key] = out
        return self._cache[key]

    def word_prob(self, w: str) -> float:
        """Stationary probability of the word ``w``; exactly 0 off the support."""
        cache = self._cache
        hit = cache.get(w)
        if hit is not None:
            return hit
        m = self.order
        if len(w) <= m:
            p = self._marginals(len(w)).get(w, 0.0)
        else:
            p = self.word_prob(w[:-1])
            if p != 0.0:
                p *= self.transition(w[-m - 1:-1], w[-1])
        cache[w] = p
        return p

    def in_support(self, w: str) -> bool:
        """Combinatorial support test: prefix is a context prefix and every step has a nonzero kernel entry."""
        m = self.order
        if len(w) <= m:
            return w in self._marginals(len(w))
        if w[:m] not in self._index:
            return False
        return all(self.transition(w[i - m:i], w[i]) > 0.0 for i in range(m, len(w)))

    def support_words(self, length: int) -> list[str]:
        """Words of the given length with positive probability, lexicographic."""
        key = ("support", length)
        if key not in self._cache:
            m = self.order
            if length <= m:
                words = sorted(self._marginals(length))
            else:
                words = []
                level = sorted(self.contexts)
                for _ in range(length - m):
                    nxt = []
                    for w in level:
                        for v in "01":
                            if self.transition(w[len(w) - m:], v) > 0.0:
                                nxt.append(w + v)
                    if len(nxt) > 2**24:
                        raise ResourceError("support enumeration too large")
                    level = nxt
                words = level
            self._cache[key] = words
        return list(self._cache[key])

    def full_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Stationary law and kernel indexed by all ``2**order`` contexts (MSB = oldest bit)."""
        size = 2**self.order
        pi = np.zeros(size)
        T = np.zeros((size, 2))
        for c, p, t in zip(self.contexts, self.stationary, self.kernel):
            j = int(c, 2) if c else 0
            pi[j] = p
            T[j] = t
        return pi, T

    def is_strictly_positive(self) -> bool:
        return len(self.contexts) == 2**self.order and bool(np.all(self.kernel > 0))


def _stationary(P: np.ndarray) -> np.ndarray:
    n = P.shape[0]
    if n <= DIRECT_SOLVE_MAX:
        M = P.T - np.eye(n)
        M[-1, :] = 1.0
        rhs = np.zeros(n)
        rhs[-1] = 1.0
        pi = np.linalg.solve(M, rhs)
    else:
        pi = np.full(n, 1.0 / n)
        for _ in range(10**6):
            nxt = 0.5 * (pi + pi @ P)
            if np.abs(nxt - pi).sum() <= 1e-14:
                pi = nxt
                break
            pi = nxt
        else:
            raise ArithmeticError("stationary power iteration did not converge")
    pi = np.abs(pi)
    return pi / pi.sum()


def chain_from_kernel(order: int, kernel: Mapping[str, Sequence[float]]) -> MarkovChain:
    """Build a chain from ``{context: (P(0|context), P(1|context))}``.

    The contexts must form a single irreducible class under the positive
    transitions; the stationary law is obtained by a linear solve.
    """
    if order < 1:
        raise InvalidChainError("order must be >= 1")
    contexts = tuple(sorted(kernel))
    if not contexts:
        raise InvalidChainError("no contexts")
    for c in contexts:
        if len(c) != order or any(ch not in "01" for ch in c):
            raise InvalidChainError(f"bad context {c!r} for order {order}")
    K = np.array([[float(kernel[c][0]), float(kernel[c][1])] for c in contexts])
    if np.any(K < 0) or np.any(np.abs(K.sum(axis=1) - 1.0) > STOCHASTIC_TOL):
        raise InvalidChainError("kernel rows must be nonnegative and sum to 1")
    index = {c: i for i, c in enumerate(contexts)}
    P = np.zeros((len(contexts), len(contexts)))
    for c, i in index.items():
        for v in (0, 1):
            if K[i, v] > 0.0:
                j = index.get(c[1:] + str(v))
                if j is None:
                    raise InvalidChainError(f"transition {c}->{v} leaves the declared contexts")
                P[i, j] += K[i, v]
    ncomp, _ = connected_components(P > 0, directed=True, connection="strong")
    if ncomp != 1:
        raise InvalidChainError("positive-kernel context graph is reducible")
    return MarkovChain(order, contexts, K, _stationary(P))


def fair_coin(order: int = 1) -> MarkovChain:
    words = [format(i, f"0{order}b") for i in range(2**order)]
    return chain_from_kernel(order, {c: (0.5, 0.5) for c in words})


def two_state_chain(p01: float, p10: float) -> MarkovChain:
    """First-order chain with flip probabilities ``0->1`` and ``1->0``."""
    if p01 == 0.0:
        return chain_from_kernel(1, {"0": (1.0, 0.0)})
    if p10 == 0.0:
        return chain_from_kernel(1, {"1": (0.0, 1.0)})
    return chain_from_kernel(1, {"0": (1.0 - p01, p01), "1": (p10, 1.0 - p10)})


def word_prob(X: MarkovChain, w: str) -> float:
    return X.word_prob(w)


def _xlogx_ratio(p: float, q: float) -> float:
    return 0.0 if p == 0.0 else p * math.log(p / q)


def entropy_rate_markov(X: MarkovChain) -> float:
    """``-sum pi(c) T(c,v) log T(c,v)`` in nats."""
    terms = []
    for pi, row in zip(X.stationary, X.kernel):
        for t in row:
            if t > 0.0:
                terms.append(-pi * t * math.log(t))
    return math.fsum(terms)


@dataclass(frozen=True, eq=False)
class StationaryPVector:
    """Probabilities of the words of length ``n + 1`` listed in ``index``."""

    n: int
    index: tuple[str, ...]
    p: np.ndarray

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.index, map(float, self.p)))

    def prefix_marginals(self) -> dict[str, float]:
        out: dict[str, float] = {}
        for w, q in zip(self.index, self.p):
            out[w[:-1]] = out.get(w[:-1], 0.0) + float(q)
        return out

    def suffix_marginals(self) -> dict[str, float]:
        out: dict[str, float] = {}
        for w, q in zip(self.index, self.p):
            out[w[1:]] = out.get(w[1:], 0.0) + float(q)
        return out

    def stationarity_residual(self) -> float:
        left, right = self.prefix_marginals(), self.suffix_marginals()
        keys = set(left) | set(right)
        return max((abs(left.get(k, 0.0) - right.get(k, 0.0)) for k in keys), default=0.0)

    def with_values(self, p: np.ndarray) -> "StationaryPVector":
        return StationaryPVector(self.n, self.index, np.asarray(p, dtype=float))


def cond_entropy_words(p: StationaryPVector) -> float:
    """``H(X_0 | X_{-n}^{-1})`` of the law ``p`` on words of length ``n + 1``."""
    prefix = p.prefix_marginals()
    return -math.fsum(_xlogx_ratio(float(q), prefix[w[:-1]]) for w, q in zip(p.index, p.p))


def pvector_of(X: MarkovChain, n: int, constraint: FiniteTypeConstraint | None = None) -> StationaryPVector:
    """The ``(n+1)``-marginal of ``X``.

    Indexed by the allowed words of ``constraint`` when given, otherwise by the
    support words of ``X``.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if constraint is not None:
        index = enumerate_allowed(constraint, n + 1)
    else:
        index = X.support_words(n + 1)
    return StationaryPVector(n, tuple(index), np.array([X.word_prob(w) for w in index]))


def chain_from_pvector(p: StationaryPVector, tol: float = 1e-9) -> MarkovChain:
    """Order-``n`` chain whose ``(n+1)``-marginals are ``p``."""
    if p.n < 1:
        raise InvalidChainError("need n >= 1 to define an order-n chain")
    if np.any(p.p < 0) or abs(float(np.sum(p.p)) - 1.0) > tol:
        raise InvalidChainError("p-vector must be a probability vector")
    if p.stationarity_residual() > tol:
        raise InvalidChainError("p-vector violates shift stationarity")
    prefix = p.prefix_marginals()
    kernel: dict[str, list[float]] = {}
    for w, q in zip(p.index, p.p):
        ctx = w[:-1]
        if prefix[ctx] > 0.0:
            row = kernel.setdefault(ctx, [0.0, 0.0])
            row[int(w[-1])] = float(q) / prefix[ctx]
    for row in kernel.values():
        # exact zeros stay zero; renormalize the surviving entry pair
        s = row[0] + row[1]
        row[0], row[1] = row[0] / s, row[1] / s
        if row[0] == 0.0:
            row[1] = 1.0
        elif row[1] == 0.0:
            row[0] = 1.0
    return chain_from_kernel(p.n, kernel)


def random_chain(constraint: FiniteTypeConstraint, order: int, rng: np.random.Generator,
                 concentration: float = 1.0) -> MarkovChain:
    """Random order-``order`` chain whose support is the essential part of ``constraint``.

    Every transition allowed by the constraint gets positive probability, drawn
    from a symmetric Dirichlet with the given concentration.
    """
    order = max(order, 1)
    if order < constraint.order:
        raise ValueError("order must be at least the topological order")
    contexts, _ = essential_graph(constraint, order)
    ctxset = set(contexts)
    kernel = {}
    for c in contexts:
        ok = [constraint.is_allowed(c + v) and (c + v)[1:] in ctxset for v in "01"]
        if all(ok):
            a = rng.dirichlet([concentration, concentration])
            kernel[c] = (float(a[0]), 1.0 - float(a[0]))
        else:
            kernel[c] = (1.0, 0.0) if ok[0] else (0.0, 1.0)
    return chain_from_kernel(order, kernel)


def random_positive_chain(order: int, rng: np.random.Generator, low: float = 0.05) -> MarkovChain:
    kernel = {}
    for i in range(2**order):
        a = rng.uniform(low, 1.0 - low)
        kernel[format(i, f"0{order}b")] = (a, 1.0 - a)
    return chain_from_kernel(order, kernel)


def load_chain(path: str | Path) -> MarkovChain:
    """Read a chain file: JSON with ``order``, ``contexts`` and two-entry ``kernel`` rows."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    try:
        order = int(data["order"])
        contexts = [str(c) for c in data["contexts"]]
        rows = data["kernel"]
    except (KeyError, TypeError) as exc:
        raise InvalidChainError(f"malformed chain file: {exc}") from None
    if len(rows) != len(contexts) or any(len(r) != 2 for r in rows):
        raise InvalidChainError("kernel must have one (p0, p1) row per context")
    return chain_from_kernel(order, {c: (float(r[0]), float(r[1])) for c, r in zip(contexts, rows)})


def dump_chain(X: MarkovChain) -> str:
    rows = [[float(t[0]), float(t[1])] for t in X.kernel]
    return json.dumps({"order": X.order, "contexts": list(X.contexts), "kernel": rows}, indent=2)
