import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from constrained_bsc.constraint import (
    FiniteTypeConstraint,
    ResourceError,
    enumerate_allowed,
    essential_graph,
    flip,
    graph_presentation,
    is_irreducible,
    minimal_forbidden_set,
    topological_order,
)
from constrained_bsc.rll import RLLParams, rll_constraint
from oracles import all_words, is_allowed_bruteforce

words = st.text(alphabet="01", min_size=1, max_size=4)
forbidden_sets = st.sets(words, max_size=4)


def test_minimal_forbidden_examples():
    assert minimal_forbidden_set({"11", "110"}) == {"11"}
    assert minimal_forbidden_set(set()) == frozenset()
    assert minimal_forbidden_set({"11", "101"}) == {"11", "101"}


def test_topological_order():
    assert topological_order(FiniteTypeConstraint(["11"])) == 1
    assert topological_order(FiniteTypeConstraint([])) == 0
    for d, k in [(1, 3), (2, 4), (0, 2), (3, 5)]:
        assert rll_constraint(RLLParams(d, k)).order == k


def test_enumerate_examples():
    g = FiniteTypeConstraint(["11"])
    assert enumerate_allowed(g, 2) == ["00", "01", "10"]
    assert [len(enumerate_allowed(g, n)) for n in (1, 2, 3)] == [2, 3, 5]
    assert enumerate_allowed(FiniteTypeConstraint([]), 5) == all_words(5)
    assert enumerate_allowed(g, 0) == [""]


def test_enumeration_cap():
    with pytest.raises(ResourceError):
        enumerate_allowed(FiniteTypeConstraint([]), 12, cap=1000)


def test_irreducibility():
    assert is_irreducible(FiniteTypeConstraint(["11"]))
    assert not is_irreducible(FiniteTypeConstraint(["01", "10"]))
    assert is_irreducible(FiniteTypeConstraint([]))
    # 0 can never be followed by 1
    assert not is_irreducible(FiniteTypeConstraint(["01"]))
    # the leading 0 of 0111... is transient; the rest is a single loop
    assert is_irreducible(FiniteTypeConstraint(["10", "00"]))


def test_graph_presentation_examples():
    v, A = graph_presentation(FiniteTypeConstraint(["11"]))
    assert v == ["0", "1"] and A.tolist() == [[1, 1], [1, 0]]
    v, A = graph_presentation(FiniteTypeConstraint([]))
    assert v == [""] and A.tolist() == [[2]]
    v, A = graph_presentation(rll_constraint(RLLParams(2, float("inf"))))
    assert v == ["00", "01", "10"]
    edges = {(v[i], v[j]) for i, j in zip(*np.nonzero(A))}
    assert edges == {("00", "00"), ("00", "01"), ("01", "10"), ("10", "00")}


def test_essential_graph_drops_transients():
    v, A = essential_graph(FiniteTypeConstraint(["10", "00"]))
    assert v == ["1"] and A.tolist() == [[1]]


def test_from_file(tmp_path):
    path = tmp_path / "c.txt"
    path.write_text("# golden mean\n\n11\n110\n", encoding="utf-8")
    c = FiniteTypeConstraint.from_file(path)
    assert c.minimal_forbidden == {"11"}
    path.write_text("12\n", encoding="utf-8")
    with pytest.raises(ValueError):
        FiniteTypeConstraint.from_file(path)


def test_flip():
    assert flip("0110", 0) == "1110"
    assert flip("0110", 3) == "0111"


@settings(max_examples=60, deadline=None)
@given(forbidden_sets, st.integers(min_value=0, max_value=10))
def test_enumeration_matches_bruteforce(F, n):
    c = FiniteTypeConstraint(F)
    expected = [w for w in all_words(n) if is_allowed_bruteforce(F, w)]
    assert enumerate_allowed(c, n) == expected
    # minimal set defines the same constraint
    assert enumerate_allowed(FiniteTypeConstraint(c.minimal_forbidden), n) == expected


@settings(max_examples=60, deadline=None)
@given(forbidden_sets)
def test_minimal_set_properties(F):
    M = minimal_forbidden_set(F)
    for a in M:
        for b in M:
            assert a == b or a not in b
    assert minimal_forbidden_set(M) == M


@settings(max_examples=40, deadline=None)
@given(forbidden_sets, st.integers(min_value=0, max_value=12))
def test_path_counting_identity(F, n):
    c = FiniteTypeConstraint(F)
    m = c.order
    if n < m:
        return
    _, A = graph_presentation(c)
    count = int(np.ones(A.shape[0]) @ np.linalg.matrix_power(A, n - m) @ np.ones(A.shape[0]))
    assert count == len(enumerate_allowed(c, n))


@settings(max_examples=40, deadline=None)
@given(forbidden_sets, st.integers(min_value=1, max_value=9))
def test_factor_closure(F, n):
    c = FiniteTypeConstraint(F)
    shorter = set(enumerate_allowed(c, n))
    for w in enumerate_allowed(c, n + 1):
        assert w[1:] in shorter and w[:-1] in shorter
