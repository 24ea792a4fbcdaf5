import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from globalca.eca import evolve, representatives, rule_table, step
from globalca.errors import ConflictError, DomainError
from globalca.globalrule import (
    MIXED_TRIPLETS,
    N_ASSIGNMENTS,
    MixedAssignment,
    base_tables,
    compose,
    fill_mixed,
    global_evolve,
    global_step,
    pair_enumeration,
    recolor_to_01,
    recolor_to_02,
)

LISTED_ORDER = [(0, 1, 2), (0, 2, 1), (1, 0, 2), (2, 0, 1), (1, 2, 0), (2, 1, 0),
            (1, 1, 2), (1, 2, 1), (2, 1, 1), (1, 2, 2), (2, 1, 2), (2, 2, 1)]


def test_mixed_triplets_in_listed_order():
    assert list(MIXED_TRIPLETS) == LISTED_ORDER
    every_mixed = {t for t in itertools.product(range(3), repeat=3) if 1 in t and 2 in t}
    assert set(MIXED_TRIPLETS) == every_mixed
    assert N_ASSIGNMENTS == 3 ** 12 == 531441


def test_recolor():
    assert recolor_to_01([0, 2, 2, 0]).tolist() == [0, 1, 1, 0]
    assert recolor_to_01([0, 0, 0]).tolist() == [0, 0, 0]
    assert recolor_to_02([1, 0, 1]).tolist() == [2, 0, 2]
    with pytest.raises(DomainError):
        recolor_to_01([0, 1])
    with pytest.raises(DomainError):
        recolor_to_02([2])


@pytest.mark.parametrize("index, digits", [
    (1, (0,) * 12),
    (531441, (2,) * 12),
    # 36982 = 3^9 + 2*3^8 + 3^7 + 2*3^6 + 2*3^5 + 3^3 + 2*3^2 + 1
    (36983, (0, 0, 1, 2, 1, 2, 2, 0, 1, 2, 0, 1)),
])
def test_index_roundtrip(index, digits):
    m = MixedAssignment.from_index(index)
    assert m.digits == digits
    assert m.index == index


def base3(value):
    out = []
    for _ in range(12):
        value, d = divmod(value, 3)
        out.append(d)
    return tuple(reversed(out))


@given(st.integers(1, N_ASSIGNMENTS))
def test_decode_matches_base_conversion(index):
    assert MixedAssignment.from_index(index).digits == base3(index - 1)
    assert MixedAssignment.from_index(index).index == index


@given(st.tuples(*[st.integers(0, 2)] * 12))
def test_encode_decode(digits):
    assert MixedAssignment.from_index(MixedAssignment(digits).index).digits == digits


@pytest.mark.parametrize("bad", [0, 531442, -5])
def test_index_range(bad):
    with pytest.raises(DomainError):
        MixedAssignment.from_index(bad)


def test_compose_trivial():
    gr = compose(0, 0, 1)
    assert gr.table == (0,) * 27
    assert not gr.conflict
    assert gr.table_string() == "0" * 27


def test_compose_rule30():
    for index in (1, 5000, 531441):
        gr = compose(30, 30, index)
        assert gr.table[1] == 1   # (0,0,1)
        assert gr.table[2] == 2   # (0,0,2)


def table_oracle(eps, eps_prime, digits):
    """Neighbourhood-by-neighbourhood construction straight from the restriction laws."""
    e, ep = rule_table(eps), rule_table(eps_prime)
    mixed = dict(zip(LISTED_ORDER, digits))
    out = {}
    for t in itertools.product(range(3), repeat=3):
        if t == (0, 0, 0):
            out[t] = e.table[0] if e.table[0] else 2 * ep.table[0]
        elif set(t) <= {0, 1}:
            out[t] = e.table[4 * t[0] + 2 * t[1] + t[2]]
        elif set(t) <= {0, 2}:
            s = [c // 2 for c in t]
            out[t] = 2 * ep.table[4 * s[0] + 2 * s[1] + s[2]]
        else:
            out[t] = mixed[t]
    return tuple(out[t] for t in itertools.product(range(3), repeat=3))


@given(st.sampled_from(representatives()), st.sampled_from(representatives()),
       st.integers(1, N_ASSIGNMENTS))
def test_compose_matches_oracle(a, b, index):
    gr = compose(a, b, index)
    assert gr.table == table_oracle(a, b, MixedAssignment.from_index(index).digits)
    assert gr.conflict == (a % 2 == 1 and b % 2 == 1)


def test_mixed_positions_count():
    gr_lo, gr_hi = compose(30, 110, 1), compose(30, 110, N_ASSIGNMENTS)
    differing = [k for k in range(27) if gr_lo.table[k] != gr_hi.table[k]]
    assert len(differing) == 12


def test_conflict_and_strict():
    gr = compose(1, 1, 10)
    assert gr.conflict and gr.table[0] == 1
    with pytest.raises(ConflictError):
        compose(1, 3, 10, strict=True)
    assert not compose(1, 2, 10, strict=True).conflict


def test_global_step_quiescent():
    gr = compose(30, 110, 12345)
    assert gr.table[0] == 0
    assert global_step(gr, [0] * 9).tolist() == [0] * 9


def test_global_step_restrictions():
    row01 = [0, 1, 1, 0, 1, 0, 0, 1]
    row02 = [2 * c for c in row01]
    gr = compose(30, 110, 777)
    assert global_step(gr, row01).tolist() == step(30, row01).tolist()
    assert global_step(gr, row02).tolist() == recolor_to_02(step(110, recolor_to_01(row02))).tolist()
    with pytest.raises(DomainError):
        global_step(gr, [0, 3])


def test_restriction_laws_random():
    rng = np.random.default_rng(11)
    reps = representatives()
    for _ in range(200):
        a, b = (int(x) for x in rng.choice(reps, 2))
        gr = compose(a, b, int(rng.integers(1, N_ASSIGNMENTS + 1)))
        width = int(rng.integers(3, 33))
        row = rng.integers(0, 2, width)
        if gr.keeps_eps:
            assert np.array_equal(global_evolve(gr, row, 20), evolve(a, row, 20))
        if gr.keeps_eps_prime:
            assert np.array_equal(global_evolve(gr, 2 * row, 20), 2 * evolve(b, row, 20))


def test_pair_enumeration():
    pairs = pair_enumeration()
    assert len(pairs) == 3916
    assert pairs[0] == (0, 0)
    assert (30, 110) in pairs and (110, 30) not in pairs
    assert pairs == sorted(pairs)
    assert all(a <= b for a, b in pairs)


def test_batch_tables_match_compose():
    pairs = pair_enumeration()[::97]
    tables, conflicts = base_tables(pairs)
    for index in (1, 36983, 531441):
        filled = fill_mixed(tables, index)
        for k, (a, b) in enumerate(pairs):
            gr = compose(a, b, index)
            assert tuple(filled[k]) == gr.table
            assert conflicts[k] == gr.conflict
