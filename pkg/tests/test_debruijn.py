import itertools

import pytest

from globalca.debruijn import (
    enumerate_sequences,
    generate,
    initial_condition,
    initial_conditions,
    order_for_width,
    verify,
)
from globalca.errors import DomainError, ExhaustedError


def brute_force(n, k):
    """All B(k, n) linearisations starting with the zero word, by exhaustive search."""
    length = n ** k
    out = []
    for tail in itertools.product(range(n), repeat=length - k):
        seq = (0,) * k + tail
        if verify(seq, n, k):
            out.append(seq)
    return out


def test_first_binary_order2():
    assert enumerate_sequences(2, 2, 1)[0].symbols == (0, 0, 1, 1)
    assert brute_force(2, 2) == [(0, 0, 1, 1)]


@pytest.mark.parametrize("n, k", [(2, 2), (2, 3), (3, 2), (2, 4)])
def test_generator_matches_brute_force(n, k):
    assert [s.symbols for s in generate(n, k)] == brute_force(n, k)


def test_known_counts():
    # (n!)^(n^(k-1)) / n^k cyclic sequences
    assert sum(1 for _ in generate(2, 3)) == 2
    assert sum(1 for _ in generate(3, 2)) == 24
    assert sum(1 for _ in generate(2, 4)) == 16


def test_verify():
    assert verify([0, 0, 1, 1], 2, 2)
    assert not verify([0, 1, 0, 1], 2, 2)
    assert not verify([0, 0, 1], 2, 2)
    assert not verify([0, 0, 1, 3], 2, 2)


def test_first_ternary():
    seqs = enumerate_sequences(3, 3, 100)
    assert seqs[0].symbols[:4] == (0, 0, 0, 1)
    assert all(len(s) == 27 for s in seqs)
    assert all(verify(s.symbols, 3, 3) for s in seqs)
    assert all(a.symbols < b.symbols for a, b in zip(seqs, seqs[1:]))


def test_exhaustion():
    with pytest.raises(ExhaustedError):
        enumerate_sequences(2, 3, 3)
    with pytest.raises(DomainError):
        enumerate_sequences(1, 3, 1)


def test_initial_condition():
    seq = enumerate_sequences(3, 3, 1)[0]
    assert initial_condition(seq, 27).tolist() == list(seq.symbols)
    assert initial_condition(seq, 26).tolist() == list(seq.symbols[:26])
    with pytest.raises(DomainError):
        initial_condition(seq, 0)
    with pytest.raises(DomainError):
        initial_condition(seq, 28)


def test_initial_conditions_distinct():
    inits = initial_conditions(100, 26)
    assert inits.shape == (100, 26)
    assert len({row.tobytes() for row in inits}) == 100


def test_order_for_width():
    assert order_for_width(26) == 3
    assert order_for_width(27) == 3
    assert order_for_width(52) == 4
    assert initial_conditions(2, 52).shape == (2, 52)
