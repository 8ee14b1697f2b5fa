"""Binary finite-type constraints given by forbidden words.

Words are plain strings over ``'0'``/``'1'`` stored oldest symbol first, so
the rightmost character is the symbol at time 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable

import numpy as np
from scipy.sparse.csgraph import connected_components

#: Default cap on the number of words a single enumeration may return.
ENUMERATION_CAP = 2**24


class ResourceError(RuntimeError):
    """Raised when an enumeration or table would exceed its size cap."""


class ReducibleConstraintError(ValueError):
    """Raised when an operation needs an irreducible constraint."""


def _check_word(w: str) -> str:
    if not isinstance(w, str) or any(ch not in "01" for ch in w):
        raise ValueError(f"not a binary word: {w!r}")
    return w


def flip(w: str, i: int) -> str:
    """Return ``w`` with the bit at string index ``i`` complemented."""
    return w[:i] + ("1" if w[i] == "0" else "0") + w[i + 1:]


def complement(w: str) -> str:
    return w.translate(str.maketrans("01", "10"))


def minimal_forbidden_set(forbidden: Iterable[str]) -> frozenset[str]:
    """Drop every word that contains another forbidden word as a factor.

    >>> sorted(minimal_forbidden_set({"11", "110"}))
    ['11']
    """
    words = {_check_word(w) for w in forbidden}
    if "" in words:
        raise ValueError("the empty word cannot be forbidden")
    keep = set()
    for w in words:
        if not any(u != w and u in w for u in words):
            keep.add(w)
    return frozenset(keep)


@dataclass(frozen=True)
class FiniteTypeConstraint:
    """A binary shift of finite type.

    Parameters
    ----------
    forbidden : iterable of str
        User-supplied forbidden words; reduced on construction.
    """

    forbidden: frozenset[str]
    minimal_forbidden: frozenset[str] = field(init=False, repr=False)

    def __init__(self, forbidden: Iterable[str] = ()):
        object.__setattr__(self, "forbidden", frozenset(forbidden))
        object.__setattr__(self, "minimal_forbidden", minimal_forbidden_set(self.forbidden))

    @classmethod
    def from_file(cls, path: str | Path) -> "FiniteTypeConstraint":
        """Read one forbidden word per line; blank lines and ``#`` comments are skipped."""
        words = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            words.append(_check_word(line))
        return cls(words)

    @property
    def order(self) -> int:
        """Topological order: longest minimal forbidden word length minus one."""
        return topological_order(self)

    @property
    def irreducible(self) -> bool:
        return is_irreducible(self)

    def is_allowed(self, w: str) -> bool:
        return not any(f in w for f in self.minimal_forbidden)

    def ends_allowed(self, w: str) -> bool:
        """True if no forbidden word is a suffix of ``w``."""
        return not any(w.endswith(f) for f in self.minimal_forbidden)

    def __repr__(self) -> str:
        return f"FiniteTypeConstraint({sorted(self.minimal_forbidden, key=lambda s: (len(s), s))})"


def topological_order(c: FiniteTypeConstraint) -> int:
    if not c.minimal_forbidden:
        return 0
    return max(len(w) for w in c.minimal_forbidden) - 1


@lru_cache(maxsize=256)
def _enumerate(minimal: frozenset[str], n: int, cap: int) -> tuple[str, ...]:
    level = [""]
    for _ in range(n):
        nxt = []
        for w in level:
            for b in "01":
                u = w + b
                if not any(u.endswith(f) for f in minimal):
                    nxt.append(u)
        if len(nxt) > cap:
            raise ResourceError(f"more than {cap} allowed words of length <= {n}")
        level = nxt
    return tuple(level)


def enumerate_allowed(c: FiniteTypeConstraint, n: int, cap: int = ENUMERATION_CAP) -> list[str]:
    """All allowed words of length ``n`` in lexicographic order.

    Built level by level, extending each word by one bit and rejecting it as
    soon as a forbidden word appears as a suffix.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    return list(_enumerate(c.minimal_forbidden, n, cap))


def word_graph(c: FiniteTypeConstraint, length: int) -> tuple[list[str], np.ndarray]:
    """Vertices are allowed words of ``length``; ``u -> u[1:]+b`` when ``u+b`` is allowed.

    With ``length == 0`` the single empty vertex carries one self-loop per allowed symbol.
    """
    vertices = enumerate_allowed(c, length)
    if length == 0:
        return vertices, np.array([[len(enumerate_allowed(c, 1))]], dtype=np.int64)
    index = {u: i for i, u in enumerate(vertices)}
    A = np.zeros((len(vertices), len(vertices)), dtype=np.int64)
    for u, i in index.items():
        for b in "01":
            if c.ends_allowed(u + b):
                j = index.get(u[1:] + b)
                if j is not None:
                    A[i, j] = 1
    return vertices, A


def graph_presentation(c: FiniteTypeConstraint) -> tuple[list[str], np.ndarray]:
    """Adjacency matrix on the allowed words of length equal to the topological order."""
    return word_graph(c, c.order)


def essential_vertices(A: np.ndarray) -> np.ndarray:
    """Indices of vertices lying on bi-infinite paths (iteratively strip sources and sinks)."""
    alive = np.ones(A.shape[0], dtype=bool)
    while True:
        sub = A[np.ix_(alive, alive)]
        ok = (sub.sum(axis=1) > 0) & (sub.sum(axis=0) > 0)
        if ok.all():
            return np.flatnonzero(alive)
        idx = np.flatnonzero(alive)
        alive[idx[~ok]] = False


def essential_graph(c: FiniteTypeConstraint, length: int | None = None) -> tuple[list[str], np.ndarray]:
    """Graph presentation restricted to bi-extendable vertices."""
    vertices, A = word_graph(c, c.order if length is None else length)
    keep = essential_vertices(A)
    return [vertices[i] for i in keep], A[np.ix_(keep, keep)]


def is_irreducible(c: FiniteTypeConstraint) -> bool:
    vertices, A = essential_graph(c)
    if not vertices:
        return False
    ncomp, _ = connected_components(A, directed=True, connection="strong")
    return ncomp == 1


def require_irreducible(c: FiniteTypeConstraint) -> None:
    if not is_irreducible(c):
        raise ReducibleConstraintError(f"{c!r} is not irreducible")
