"""de Bruijn sequences B(k, n) in lexicographic order, and initial rows cut from them.

Sequences are linearised so that they start with the all-zero word; every
cyclic sequence has exactly one such rotation, so enumeration by the
linearisation visits each cyclic sequence once.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from globalca.errors import DomainError, ExhaustedError


@dataclass(frozen=True)
class DeBruijnSequence:
    alphabet_size: int
    order: int
    symbols: tuple[int, ...]

    def __len__(self):
        return len(self.symbols)

    def __str__(self):
        return "".join(map(str, self.symbols))


def _check_params(n: int, k: int):
    if n < 2:
        raise DomainError(f"alphabet size must be >= 2, got {n}")
    if k < 1:
        raise DomainError(f"order must be >= 1, got {k}")


def generate(n: int, k: int) -> Iterator[DeBruijnSequence]:
    """Yield every B(k, n) starting with ``0 * k``, in ascending lexicographic order.

    Walks Eulerian circuits of the de Bruijn graph on (k-1)-words from the
    zero node, always trying the smallest outgoing symbol first, and
    backtracks out of dead ends.
    """
    _check_params(n, k)
    length = n ** k
    top = n ** (k - 1)  # value of the leading digit of a k-word

    seq = [0] * k
    used = bytearray(length)
    used[0] = 1
    # one frame per appended symbol: (window code of the prefix, next symbol to try)
    word = 0
    stack: list[list[int]] = [[word, 0]]
    while stack:
        frame = stack[-1]
        if len(seq) == length:
            if _closes(seq, used, n, k):
                yield DeBruijnSequence(n, k, tuple(seq))
            _pop(stack, seq, used)
            continue
        prev, sym = frame
        if sym >= n:
            _pop(stack, seq, used)
            continue
        frame[1] = sym + 1
        code = (prev % top) * n + sym
        if used[code]:
            continue
        used[code] = 1
        seq.append(sym)
        stack.append([code, 0])


def _pop(stack, seq, used):
    code = stack.pop()[0]
    if stack:  # the root frame holds the fixed zero prefix
        used[code] = 0
        seq.pop()


def _closes(seq, used, n, k) -> bool:
    """Check that the k - 1 windows wrapping round the end are all new."""
    if k == 1:
        return True
    tail = seq[-(k - 1):] + seq[: k - 1]
    seen = set()
    for j in range(k - 1):
        code = 0
        for s in tail[j: j + k]:
            code = code * n + s
        if used[code] or code in seen:
            return False
        seen.add(code)
    return True


def enumerate_sequences(n: int, k: int, count: int) -> list[DeBruijnSequence]:
    """The ``count`` lexicographically smallest B(k, n) sequences."""
    if count < 1:
        raise DomainError(f"count must be >= 1, got {count}")
    return list(_first(n, k, count))


@lru_cache(maxsize=32)
def _first(n: int, k: int, count: int) -> tuple[DeBruijnSequence, ...]:
    out = tuple(itertools.islice(generate(n, k), count))
    if len(out) < count:
        raise ExhaustedError(f"only {len(out)} de Bruijn sequences B({k},{n}) exist, asked for {count}")
    return out


def verify(candidate: Sequence[int], n: int, k: int) -> bool:
    """Brute-force check that every length-k word over ``range(n)`` occurs once cyclically."""
    seq = list(candidate)
    if len(seq) != n ** k or any(s not in range(n) for s in seq):
        return False
    windows = Counter(tuple(seq[(i + j) % len(seq)] for j in range(k)) for i in range(len(seq)))
    return all(windows[w] == 1 for w in itertools.product(range(n), repeat=k))


def initial_condition(seq: DeBruijnSequence | Sequence[int], width: int) -> np.ndarray:
    symbols = seq.symbols if isinstance(seq, DeBruijnSequence) else tuple(seq)
    if width < 1:
        raise DomainError(f"width must be positive, got {width}")
    if width > len(symbols):
        raise DomainError(f"width {width} exceeds sequence length {len(symbols)}")
    return np.array(symbols[:width], dtype=np.uint8)


def order_for_width(width: int, n: int = 3) -> int:
    """Smallest order k whose B(k, n) sequences are at least ``width`` long."""
    if width < 1:
        raise DomainError(f"width must be positive, got {width}")
    k = 1
    while n ** k < width:
        k += 1
    return k


def initial_conditions(count: int, width: int, n: int = 3) -> np.ndarray:
    """``(count, width)`` array: prefixes of the first ``count`` B(k, n), smallest k that fits."""
    k = order_for_width(width, n)
    seqs = enumerate_sequences(n, k, count)
    return np.stack([initial_condition(s, width) for s in seqs])
