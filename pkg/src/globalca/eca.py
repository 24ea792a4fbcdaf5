"""Elementary cellular automata: rule tables, symmetries and stepping.

Rows are 1-D ``uint8`` numpy arrays on a cyclic tape; an evolution grid is a
``(steps + 1, width)`` array whose first row is the initial configuration.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from globalca.errors import DomainError


@dataclass(frozen=True)
class EcaRule:
    """A rule in Wolfram numbering.

    ``table[k]`` is the output for the neighbourhood ``(p, q, r)`` with
    ``k = 4p + 2q + r``, so ``table[k]`` is bit ``k`` of ``number``.
    """

    number: int
    table: tuple[int, ...]

    def __post_init__(self):
        if len(self.table) != 8 or any(v not in (0, 1) for v in self.table):
            raise DomainError(f"invalid ECA table {self.table!r}")

    @property
    def array(self) -> np.ndarray:
        return np.array(self.table, dtype=np.uint8)

    def __int__(self):
        return self.number


def _check_number(number: int) -> int:
    if isinstance(number, EcaRule):
        return number.number
    if not isinstance(number, (int, np.integer)) or isinstance(number, bool):
        raise DomainError(f"rule number must be an integer, got {number!r}")
    if not 0 <= number <= 255:
        raise DomainError(f"rule number {number} outside 0..255")
    return int(number)


@lru_cache(maxsize=None)
def rule_table(number: int) -> EcaRule:
    number = _check_number(number)
    return EcaRule(number, tuple((number >> k) & 1 for k in range(8)))


def as_rule(rule) -> EcaRule:
    return rule if isinstance(rule, EcaRule) else rule_table(rule)


def as_row(cells, alphabet=(0, 1)) -> np.ndarray:
    """Validate ``cells`` as a non-empty row over ``alphabet`` and return a copy."""
    if isinstance(cells, str):
        cells = [ord(c) - 48 for c in cells]
    row = np.array(cells, dtype=np.int64).ravel()
    if row.size == 0:
        raise DomainError("configuration must have positive width")
    bad = ~np.isin(row, alphabet)
    if bad.any():
        raise DomainError(
            f"symbol {int(row[bad][0])} outside alphabet {tuple(alphabet)}"
        )
    return row.astype(np.uint8)


def neighbourhood_codes(rows: np.ndarray, base: int) -> np.ndarray:
    """Neighbourhood code ``base**2 * left + base * self + right`` on a ring.

    Works on a single row or a batch of rows (last axis is the tape).
    """
    rows = rows.astype(np.intp, copy=False)
    left = np.roll(rows, 1, axis=-1)
    right = np.roll(rows, -1, axis=-1)
    return (left * base + rows) * base + right


def step(rule, config) -> np.ndarray:
    rule = as_rule(rule)
    row = as_row(config)
    return rule.array[neighbourhood_codes(row, 2)]


def evolve(rule, init, steps: int) -> np.ndarray:
    rule = as_rule(rule)
    row = as_row(init)
    if steps < 0:
        raise DomainError(f"steps must be >= 0, got {steps}")
    return evolve_lookup(rule.array, row, steps, base=2)


def evolve_lookup(table: np.ndarray, init: np.ndarray, steps: int, base: int) -> np.ndarray:
    """Evolve one row under a flat lookup table indexed by neighbourhood code."""
    grid = np.empty((steps + 1, init.size), dtype=np.uint8)
    grid[0] = init
    for t in range(steps):
        grid[t + 1] = table[neighbourhood_codes(grid[t], base)]
    return grid


def evolve_batch(tables: np.ndarray, which: np.ndarray, inits: np.ndarray,
                 steps: int, base: int) -> np.ndarray:
    """Evolve many rows at once, row ``n`` under ``tables[which[n]]``.

    ``tables`` has shape ``(R, base**3)``, ``inits`` shape ``(N, W)``.
    Returns an ``(N, steps + 1, W)`` array.
    """
    tables = np.ascontiguousarray(tables, dtype=np.uint8)
    flat = tables.ravel()
    offset = (np.asarray(which, dtype=np.intp) * tables.shape[1])[:, None]
    n, width = inits.shape
    grids = np.empty((n, steps + 1, width), dtype=np.uint8)
    state = inits.astype(np.intp)
    grids[:, 0] = inits
    b2 = base * base
    for t in range(steps):
        # roll along the tape written out by hand: cheaper than np.roll on 2-D
        code = state * base + offset
        code[:, 1:] += state[:, :-1] * b2
        code[:, 0] += state[:, -1] * b2
        code[:, :-1] += state[:, 1:]
        code[:, -1] += state[:, 0]
        nxt = flat[code]
        grids[:, t + 1] = nxt
        state = nxt.astype(np.intp)
    return grids


def naive_step(table, row, base: int = 2) -> list[int]:
    """Cell-by-cell reference evaluation; used to check the vectorised paths."""
    width = len(row)
    out = []
    for n in range(width):
        left, centre, right = row[(n - 1) % width], row[n], row[(n + 1) % width]
        out.append(int(table[left * base * base + centre * base + right]))
    return out


def reflect(number: int) -> int:
    """Left/right mirror image of a rule."""
    rule = rule_table(number)
    out = 0
    for p in (0, 1):
        for q in (0, 1):
            for r in (0, 1):
                out |= rule.table[4 * r + 2 * q + p] << (4 * p + 2 * q + r)
    return out


def complement(number: int) -> int:
    """Rule obtained by exchanging 0 and 1 in inputs and outputs."""
    rule = rule_table(number)
    return sum((1 - rule.table[7 - k]) << k for k in range(8))


def symmetry_orbit(number: int) -> frozenset[int]:
    number = _check_number(number)
    return frozenset(
        {number, reflect(number), complement(number), reflect(complement(number))}
    )


@lru_cache(maxsize=None)
def _representatives() -> tuple[int, ...]:
    return tuple(sorted({min(symmetry_orbit(n)) for n in range(256)}))


def representatives() -> list[int]:
    """Minimal rule number of each symmetry class, ascending (88 of them)."""
    return list(_representatives())
