import itertools
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gromovlab.batch import CompiledDiagram, TrialBatch, monte_carlo, sample_trial_words
from gromovlab.complex import FixedPath, Side, cancel, fix_size
from gromovlab.decorate import ReductionPairError, delta_all, has_reduction_pair, is_reduced_diagram, kappa
from gromovlab.enumerate import EnumerationFilter, enumerate_abstract
from gromovlab.fulfill import (
    Fulfillment,
    UnfulfillableError,
    build_slots,
    exhaustive_fulfillment,
    find_fulfillment,
    fulfillment_probability_mc,
    is_fulfilled_by,
    partial_count_exact,
    partial_probability_exact,
)
from gromovlab.words import SizeCapError, enumerate_reduced_words, relator_count

from conftest import diagram, random_instance

a, A_, b, B_ = 1, -1, 2, -2


def test_build_slots_examples():
    ss = build_slots(diagram(1, 5))
    assert ss.groups() == [] and ss.pins == {}
    with pytest.raises(ReductionPairError):
        build_slots(diagram(2, 4, [((0, 1), (1, 1), False)], classes=[1, 1]))
    p = FixedPath(0, [Side(0, 3)], (a,))
    ss = build_slots(diagram(1, 4, paths=[p]))
    (g,) = ss.groups()
    assert g.members[0][:2] == (1, 3) and g.members[0].sign * g.pin == a
    ss = build_slots(diagram(1, 4, paths=[p], orient=[-1]))
    (g,) = ss.groups()
    # reversed reading: side 3 is slot 3 (1 + (3-1)*(-1) mod 4), read backwards, so letter A
    assert g.members[0][:2] == (1, 3) and g.members[0].sign * g.pin == A_


def test_build_slots_contradictions():
    with pytest.raises(UnfulfillableError) as info:
        build_slots(diagram(2, 4, [((0, 1), (1, 1), True)], classes=[1, 1]))
    assert info.value.kind == "twist"
    pins = [FixedPath(0, [Side(0, 1)], (a,)), FixedPath(1, [Side(1, 1)], (b,))]
    with pytest.raises(UnfulfillableError) as info:
        build_slots(diagram(2, 4, classes=[1, 1], paths=pins))
    assert info.value.kind == "pin"
    assert find_fulfillment(diagram(2, 4, classes=[1, 1], paths=pins), [(a, b, a, b)] * 3) is None


def test_is_fulfilled_by_examples():
    plain = diagram(1, 4)
    assert is_fulfilled_by(plain, [(a, b, a, b)], {1: 0})
    glued = diagram(1, 4, [((0, 1), (0, 3), True)])
    # flip: side 3 carries the inverse of side 1's letter
    assert is_fulfilled_by(glued, [(a, b, A_, b)], {1: 0})
    assert not is_fulfilled_by(glued, [(a, b, a, b)], {1: 0})
    pinned = diagram(1, 4, paths=[FixedPath(0, [Side(0, 2)], (a,))])
    assert is_fulfilled_by(pinned, [(b, a, b, a)], {1: 0})
    assert not is_fulfilled_by(pinned, [(a, b, a, b)], {1: 0})
    two = diagram(2, 4)
    assert not is_fulfilled_by(two, [(a, b, a, b)], {1: 0, 2: 0})
    assert not is_fulfilled_by(plain, [(a, A_, a, b)], {1: 0})


def test_find_fulfillment_examples():
    f = find_fulfillment(diagram(1, 4), [(a, b, a, b)])
    assert f is not None and f.assignment == {1: 0}
    rt = Fulfillment.from_json(f.to_json(), [(a, b, a, b)])
    assert rt == f
    assert find_fulfillment(diagram(1, 4), []) is None


def test_partial_probability_examples():
    assert partial_probability_exact(diagram(1, 4), 1, 2) == 1
    assert partial_probability_exact(diagram(1, 4), 0, 2) == 1
    A = diagram(1, 4, [((0, 1), (0, 3), True)])
    words = enumerate_reduced_words(2, 4)
    hits = sum(1 for w in words if w[2] == -w[0])
    assert len(words) == 108 and hits == 24
    assert partial_probability_exact(A, 1, 2) == Fraction(24, 108) == Fraction(2, 9)
    with pytest.raises(SizeCapError):
        partial_count_exact(diagram(2, 4), 2, 2, cap=1000)
    with pytest.raises(ValueError):
        partial_count_exact(diagram(1, 4), 2, 2)


def _brute_partial(A, i, m):
    """Oracle: try every i-tuple against the geometric check restricted to classes <= i."""
    words = enumerate_reduced_words(m, A.l)
    Y = A.complex
    fixed = A.base.fixed_letters
    hits = 0
    for tup in itertools.product(words, repeat=i):
        ok = True
        for e, edge in enumerate(Y.edges):
            seen = set()
            for s in edge.sides:
                r = A.slots[Y.side_index(s)]
                if r.cls <= i:
                    seen.add(r.twist * tup[r.cls - 1][r.position - 1])
            if len(seen) > 1 or (e in fixed and seen and seen != {fixed[e]}):
                ok = False
                break
        hits += ok
    return Fraction(hits, len(words) ** i)


def test_partial_probability_matches_brute_force():
    pop = list(enumerate_abstract(2, 1, 3, EnumerationFilter(max_identifications=2, dedup=True)))
    for A in pop[::17]:
        for i in range(0, A.n + 1):
            assert partial_probability_exact(A, i, 2) == _brute_partial(A, i, 2)


def test_stepwise_bound_and_monotonicity_small():
    for l in (2, 3, 4):
        for A in enumerate_abstract(2, 0, l, EnumerationFilter(max_identifications=2, dedup=True)):
            ds = delta_all(A)
            prev = Fraction(1)
            for i in range(1, A.n + 1):
                p = partial_probability_exact(A, i, 2)
                assert p <= prev
                assert p <= prev / 3 ** kappa(A, i, ds)
                prev = p


def test_solver_agrees_with_exhaustive_search():
    rng = random.Random(7)
    found = 0
    for _ in range(300):
        A, R = random_instance(rng)
        if has_reduction_pair(A):
            with pytest.raises(ReductionPairError):
                find_fulfillment(A, R)
            continue
        f = find_fulfillment(A, R)
        ex = exhaustive_fulfillment(A, R)
        assert (f is None) == (ex is None)
        if f is not None:
            found += 1
            assert is_fulfilled_by(A, R, f.assignment)
    assert found > 30


def test_mc_examples():
    contradiction = diagram(2, 6, [((0, 1), (1, 1), True)], classes=[1, 1])
    est = fulfillment_probability_mc(contradiction, 2, 6, 0.3, 500, seed=1)
    assert est.successes == 0 and est.estimate == 0
    est = fulfillment_probability_mc(diagram(1, 6), 2, 6, 0.3, 500, seed=1)
    assert est.estimate == 1
    shared = diagram(2, 6, [((0, 1), (1, 1), True)])
    est = fulfillment_probability_mc(shared, 2, 6, 0.3, 10_000, seed=1)
    bound = 3 ** ((2 * 6 * 0.3 - cancel(shared.complex) - fix_size(shared.base)) / 2)
    assert est.upper <= bound
    with pytest.raises(ValueError):
        fulfillment_probability_mc(shared, 2, 8, 0.3, 10, seed=1)


def test_mc_matches_exact_for_one_class():
    # one relator class: P(fulfilled) = 1 - (1 - p_1)^|R| exactly
    A = diagram(1, 6, [((0, 1), (0, 4), True), ((0, 2), (0, 5), False)])
    p = float(partial_probability_exact(A, 1, 2))
    N = relator_count(2, 6, 0.5)
    P = 1 - (1 - p) ** N
    est = monte_carlo([A], 2, 0.5, 20_000, seed=3)[0]
    assert abs(est.estimate - P) < 4 * (P * (1 - P) / 20_000) ** 0.5


def test_batch_agrees_with_solver():
    pop = [A for A in enumerate_abstract(3, 1, 3, EnumerationFilter(max_identifications=2, dedup=True))
           if A.K == 3][::40]
    batch = TrialBatch.sample(2, 3, 0.6, seed=5, trials=60)
    for A in pop:
        got = CompiledDiagram(A).evaluate(batch)
        for t in range(batch.T):
            R = [tuple(int(x) for x in row) for row in batch.words[t]]
            assert got[t] == (find_fulfillment(A, R) is not None)


def test_trial_sampling_does_not_depend_on_split():
    whole = sample_trial_words(2, 6, 0.4, 9, 0, 2500)
    parts = np.concatenate([sample_trial_words(2, 6, 0.4, 9, s, c)
                            for s, c in [(0, 700), (700, 1300), (2000, 500)]])
    assert (whole == parts).all()


def test_union_bound_over_tuples_exhaustive():
    # every R of 2 words of length 3: P(R has an i-tuple fulfilling) <= |R|^i p_i
    words = enumerate_reduced_words(2, 3)
    for A in [diagram(1, 3, [((0, 1), (0, 2), False)]),
              diagram(2, 3, [((0, 1), (1, 2), True)]),
              diagram(2, 3, [((0, 1), (1, 1), True), ((0, 2), (1, 3), True)])]:
        i = A.n
        p = partial_probability_exact(A, i, 2)
        hits = sum(1 for R in itertools.product(words, repeat=2) if find_fulfillment(A, list(R)))
        assert Fraction(hits, len(words) ** 2) <= 2 ** i * p


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31))
def test_solver_witness_property(seed):
    A, R = random_instance(random.Random(seed))
    if not is_reduced_diagram(A):
        return
    f = find_fulfillment(A, R)
    if f is not None:
        assert is_fulfilled_by(A, R, f.assignment)
        assert len(set(f.assignment.values())) == A.n
