"""Perron data of a constraint graph and the maximum-entropy (Parry) chain."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constraint import FiniteTypeConstraint, enumerate_allowed, essential_graph, require_irreducible
from .markov import MarkovChain, StationaryPVector, chain_from_kernel, cond_entropy_words, fair_coin

MAX_ITER = 10**6
RESIDUAL_TOL = 1e-12


class ConvergenceError(ArithmeticError):
    pass


@dataclass(frozen=True, eq=False)
class PerronData:
    vertices: tuple[str, ...]
    adjacency: np.ndarray
    lam: float
    left: np.ndarray
    right: np.ndarray  # scaled so that left @ right == 1

    @property
    def rho(self) -> float:
        return 1.0 / self.lam


def _power_vector(B: np.ndarray) -> np.ndarray:
    # B = A + I is primitive when A is irreducible, so plain iteration converges
    # even for periodic graphs.
    x = np.ones(B.shape[0])
    best = math.inf
    stall = 0
    for _ in range(MAX_ITER):
        y = B @ x
        y /= y.max()
        diff = float(np.abs(y - x).max())
        x = y
        if diff <= 1e-15:
            return x
        if diff < best:
            best, stall = diff, 0
        else:
            stall += 1
            if stall > 50 and best < 1e-13:
                return x
    raise ConvergenceError("power iteration did not converge")


def perron(c: FiniteTypeConstraint) -> PerronData:
    """Largest eigenvalue and positive eigenvectors of the essential graph presentation."""
    require_irreducible(c)
    vertices, A = essential_graph(c)
    A = A.astype(float)
    B = A + np.eye(A.shape[0])
    v = _power_vector(B)
    w = _power_vector(B.T)
    lam = float(w @ A @ v) / float(w @ v)
    res_v = np.abs(A @ v - lam * v).max() / v.max()
    res_w = np.abs(w @ A - lam * w).max() / w.max()
    if max(res_v, res_w) > RESIDUAL_TOL or np.any(v <= 0) or np.any(w <= 0):
        raise ConvergenceError(f"Perron residual too large ({max(res_v, res_w):.3g})")
    w = w / float(w @ v)
    return PerronData(tuple(vertices), A, lam, w, v)


def parry_chain(c: FiniteTypeConstraint) -> MarkovChain:
    """The maximum-entropy chain supported on ``c``, of order ``max(order, 1)``.

    ``T(u -> u') = A(u, u') v(u') / (lam v(u))`` on the essential vertices.
    """
    data = perron(c)
    if c.order == 0:
        symbols = enumerate_allowed(c, 1)
        if len(symbols) == 2:
            return fair_coin(1)
        b = symbols[0]
        return chain_from_kernel(1, {b: (1.0, 0.0) if b == "0" else (0.0, 1.0)})
    index = {u: i for i, u in enumerate(data.vertices)}
    kernel = {}
    for u, i in index.items():
        row = [0.0, 0.0]
        for b in (0, 1):
            j = index.get(u[1:] + str(b))
            if j is not None and data.adjacency[i, j] > 0:
                row[b] = data.right[j] / (data.lam * data.right[i])
        # fix the rounding so rows sum to one exactly, keeping exact zeros
        if row[0] == 0.0:
            row[1] = 1.0
        elif row[1] == 0.0:
            row[0] = 1.0
        else:
            row[1] = 1.0 - row[0]
        kernel[u] = tuple(row)
    return chain_from_kernel(c.order, kernel)


def noiseless_capacity(c: FiniteTypeConstraint) -> float:
    """``log lam`` in nats."""
    return math.log(perron(c).lam)


def hessian_probe(p: StationaryPVector, q: StationaryPVector, t: float, step: float = 1e-4) -> float:
    """Second derivative of ``H(X_0 | X_{-n}^{-1})`` along ``t p + (1 - t) q`` by central differences."""
    if p.index != q.index:
        raise ValueError("p and q must share an index")
    if np.array_equal(p.p, q.p):
        return 0.0

    def value(s: float) -> float:
        return cond_entropy_words(p.with_values(s * p.p + (1.0 - s) * q.p))

    return (value(t + step) - 2.0 * value(t) + value(t - step)) / step**2
