import math

import numpy as np
import pytest

from constrained_bsc.constraint import FiniteTypeConstraint, ReducibleConstraintError
from constrained_bsc.markov import (
    StationaryPVector,
    cond_entropy_words,
    entropy_rate_markov,
    pvector_of,
    random_chain,
)
from constrained_bsc.rll import INF, RLLParams, rho0, rll_constraint
from constrained_bsc.spectral import hessian_probe, noiseless_capacity, parry_chain, perron

LAM = (1 + math.sqrt(5)) / 2


def test_perron_examples(golden):
    assert perron(golden).lam == pytest.approx(LAM, abs=1e-13)
    assert perron(FiniteTypeConstraint([])).lam == 2.0
    assert perron(rll_constraint(RLLParams(2, INF))).lam == pytest.approx(1.465571, abs=1e-6)


@pytest.mark.parametrize("forbidden", [["11"], ["11", "0000"], ["00", "11"], ["11", "101", "00000"], ["010", "111"]])
def test_perron_invariants(forbidden):
    data = perron(FiniteTypeConstraint(forbidden))
    A, v, w = data.adjacency, data.right, data.left
    assert np.all(v > 0) and np.all(w > 0)
    assert w @ v == pytest.approx(1.0, abs=1e-14)
    assert np.abs(A @ v - data.lam * v).max() / v.max() <= 1e-12
    assert np.abs(w @ A - data.lam * w).max() / w.max() <= 1e-12
    assert data.rho == pytest.approx(1 / data.lam)


def test_periodic_graph():
    """Alternating sequences: the graph has period 2, which plain power iteration cannot handle."""
    c = FiniteTypeConstraint(["00", "11"])
    assert perron(c).lam == pytest.approx(1.0, abs=1e-14)
    X = parry_chain(c)
    assert X.transition("0", "1") == 1.0 and X.transition("1", "0") == 1.0
    assert noiseless_capacity(c) == pytest.approx(0.0, abs=1e-14)


def test_reducible_rejected():
    with pytest.raises(ReducibleConstraintError):
        perron(FiniteTypeConstraint(["01", "10"]))


def test_parry_examples(golden):
    X = parry_chain(golden)
    assert X.transition("0", "0") == pytest.approx(1 / LAM, abs=1e-14)
    assert X.transition("0", "1") == pytest.approx(1 / LAM**2, abs=1e-14)
    assert X.transition("1", "0") == 1.0 and X.transition("1", "1") == 0.0
    full = parry_chain(FiniteTypeConstraint([]))
    assert full.order == 1 and np.all(full.kernel == 0.5)
    for c in (golden, rll_constraint(RLLParams(2, INF)), rll_constraint(RLLParams(1, 3))):
        assert entropy_rate_markov(parry_chain(c)) == pytest.approx(noiseless_capacity(c), abs=1e-12)
        X = parry_chain(c)
        assert np.allclose(X.kernel.sum(axis=1), 1.0, atol=1e-12)
        assert X.stationary.sum() == pytest.approx(1.0, abs=1e-12)


def test_parry_support_is_constraint(s13):
    X = parry_chain(s13)
    for n in range(1, 9):
        for w in X.support_words(n):
            assert s13.is_allowed(w)


def test_noiseless_capacity_examples(golden):
    assert noiseless_capacity(golden) == pytest.approx(0.481212, abs=1e-6)
    assert noiseless_capacity(FiniteTypeConstraint([])) == pytest.approx(math.log(2), abs=1e-15)
    p = RLLParams(1, 3)
    r = rho0(p)
    assert r**2 + r**3 + r**4 == pytest.approx(1.0, abs=1e-14)
    assert noiseless_capacity(rll_constraint(p)) == pytest.approx(math.log(1 / r), abs=1e-10)


@pytest.mark.parametrize("dk", [(1, INF), (1, 3), (2, INF), (2, 4)])
def test_spectral_consistency(dk):
    p = RLLParams(*dk)
    assert math.log(1 / rho0(p)) == pytest.approx(noiseless_capacity(rll_constraint(p)), abs=1e-10)


def test_hessian_examples(golden, golden_parry):
    base = pvector_of(golden_parry, 1)
    assert hessian_probe(base, base, 0.5) == 0.0
    uniform = base.with_values(np.full(3, 1 / 3))
    assert hessian_probe(uniform, base, 0.5) < 0.0


def test_hessian_random_s13(s13, rng):
    for _ in range(100):
        p = pvector_of(random_chain(s13, 3, rng), 3)
        q = pvector_of(random_chain(s13, 3, rng), 3)
        assert p.index == q.index
        assert hessian_probe(p, q, rng.uniform(0.05, 0.95)) < 0.0


def test_maximality(golden, s13, rng):
    for c in (golden, s13):
        X = parry_chain(c)
        h = entropy_rate_markov(X)
        m = c.order
        for _ in range(100):
            Y = random_chain(c, m, rng)
            assert cond_entropy_words(pvector_of(Y, m)) < h


def test_hessian_index_mismatch(golden_parry):
    p = pvector_of(golden_parry, 1)
    q = StationaryPVector(1, ("00", "01", "11"), p.p)
    with pytest.raises(ValueError):
        hessian_probe(p, q, 0.5)
