"""Three-colour global rules extending a {0,1} rule and a {0,2} rule.

A global rule is a radius-1 CA over {0, 1, 2}. On neighbourhoods drawn from
{0, 1} it behaves as ``eps``; on neighbourhoods drawn from {0, 2} it behaves as
``eps_prime`` recoloured 1 -> 2. The twelve neighbourhoods that contain both
1 and 2 are free and are filled from a :class:`MixedAssignment`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from globalca.eca import EcaRule, as_rule, as_row, evolve_lookup, neighbourhood_codes, representatives
from globalca.errors import ConflictError, DomainError

#: Mixed neighbourhoods, bound positionally to the digits of a MixedAssignment.
MIXED_TRIPLETS: tuple[tuple[int, int, int], ...] = (
    (0, 1, 2), (0, 2, 1), (1, 0, 2), (2, 0, 1), (1, 2, 0), (2, 1, 0),
    (1, 1, 2), (1, 2, 1), (2, 1, 1), (1, 2, 2), (2, 1, 2), (2, 2, 1),
)
MIXED_CODES = np.array([9 * p + 3 * q + r for p, q, r in MIXED_TRIPLETS], dtype=np.intp)

N_MIXED = len(MIXED_TRIPLETS)
N_ASSIGNMENTS = 3 ** N_MIXED


def recolor_to_01(cells) -> np.ndarray:
    """Map a {0,2} row onto {0,1} (2 -> 1)."""
    row = as_row(cells, alphabet=(0, 2))
    return row // 2


def recolor_to_02(cells) -> np.ndarray:
    """Map a {0,1} row onto {0,2} (1 -> 2); inverse of :func:`recolor_to_01`."""
    row = as_row(cells, alphabet=(0, 1))
    return row * 2


@dataclass(frozen=True)
class MixedAssignment:
    """Outputs for the twelve mixed neighbourhoods.

    ``index`` is the 1-based position of ``digits`` in the lexicographic
    enumeration of all 12-tuples over {0, 1, 2}.
    """

    digits: tuple[int, ...]

    def __post_init__(self):
        if len(self.digits) != N_MIXED or any(d not in (0, 1, 2) for d in self.digits):
            raise DomainError(f"mixed assignment needs 12 digits in 0..2, got {self.digits!r}")

    @property
    def index(self) -> int:
        value = 0
        for d in self.digits:
            value = value * 3 + d
        return value + 1

    @classmethod
    def from_index(cls, index: int) -> MixedAssignment:
        return cls(_decode(_check_index(index)))


def _check_index(index) -> int:
    if isinstance(index, bool) or not isinstance(index, (int, np.integer)):
        raise DomainError(f"GR index must be an integer, got {index!r}")
    if not 1 <= index <= N_ASSIGNMENTS:
        raise DomainError(f"GR index {index} outside 1..{N_ASSIGNMENTS}")
    return int(index)


@lru_cache(maxsize=4096)
def _decode(index: int) -> tuple[int, ...]:
    value = index - 1
    digits = []
    for _ in range(N_MIXED):
        value, d = divmod(value, 3)
        digits.append(d)
    return tuple(reversed(digits))


def mixed_digits(index: int) -> tuple[int, ...]:
    return MixedAssignment.from_index(index).digits


@dataclass(frozen=True)
class GlobalRule:
    eps: EcaRule
    eps_prime: EcaRule
    mixed: MixedAssignment
    table: tuple[int, ...]
    conflict: bool

    @property
    def array(self) -> np.ndarray:
        return np.array(self.table, dtype=np.uint8)

    @property
    def index(self) -> int:
        return self.mixed.index

    def table_string(self) -> str:
        """27 digits, output for neighbourhood code 0..26 in order."""
        return "".join(map(str, self.table))

    @property
    def keeps_eps(self) -> bool:
        """True if the {0,1} restriction is exactly ``eps``."""
        return self.table[0] == self.eps.table[0]

    @property
    def keeps_eps_prime(self) -> bool:
        """True if the {0,2} restriction is exactly the recoloured ``eps_prime``."""
        return self.table[0] == 2 * self.eps_prime.table[0]


def _build_table(eps: EcaRule, eps_prime: EcaRule, digits) -> list[int]:
    table = [-1] * 27

    def put(code, value):
        if table[code] != -1:
            raise AssertionError(f"neighbourhood {code} written twice")
        table[code] = value

    for p, q, r in itertools.product((0, 1), repeat=3):
        if p or q or r:
            put(9 * p + 3 * q + r, eps.table[4 * p + 2 * q + r])
            put(18 * p + 6 * q + 2 * r, 2 * eps_prime.table[4 * p + 2 * q + r])
    # shared quiescent neighbourhood: eps wins unless it outputs 0
    put(0, eps.table[0] if eps.table[0] else 2 * eps_prime.table[0])
    for code, d in zip(MIXED_CODES, digits):
        put(int(code), d)
    if -1 in table:
        raise AssertionError("global rule table left a gap")
    return table


def compose(eps, eps_prime, mixed, strict: bool = False) -> GlobalRule:
    """Build the global rule extending ``eps`` on {0,1} and ``eps_prime`` on {0,2}.

    ``mixed`` may be a :class:`MixedAssignment` or its 1-based index. When both
    rules map 000 to a live colour the result keeps ``eps``'s output and is
    flagged; ``strict=True`` raises :class:`ConflictError` instead.
    """
    eps, eps_prime = as_rule(eps), as_rule(eps_prime)
    if not isinstance(mixed, MixedAssignment):
        mixed = MixedAssignment.from_index(mixed)
    conflict = bool(eps.table[0] == 1 and eps_prime.table[0] == 1)
    if conflict and strict:
        raise ConflictError(
            f"conflict: rules {eps.number} and {eps_prime.number} both map 000 to a non-zero colour"
        )
    table = _build_table(eps, eps_prime, mixed.digits)
    return GlobalRule(eps, eps_prime, mixed, tuple(table), conflict)


def global_step(gr: GlobalRule, config) -> np.ndarray:
    row = as_row(config, alphabet=(0, 1, 2))
    return gr.array[neighbourhood_codes(row, 3)]


def global_evolve(gr: GlobalRule, init, steps: int) -> np.ndarray:
    row = as_row(init, alphabet=(0, 1, 2))
    if steps < 0:
        raise DomainError(f"steps must be >= 0, got {steps}")
    return evolve_lookup(gr.array, row, steps, base=3)


@lru_cache(maxsize=None)
def _pairs() -> tuple[tuple[int, int], ...]:
    reps = representatives()
    return tuple(itertools.combinations_with_replacement(reps, 2))


def pair_enumeration() -> list[tuple[int, int]]:
    """All (a, b) with a <= b over the 88 representatives, lexicographic (3916)."""
    return list(_pairs())


def base_tables(pairs) -> tuple[np.ndarray, np.ndarray]:
    """Tables of every pair with the mixed entries zeroed, plus conflict flags.

    The mixed columns are overwritten per GR by :func:`fill_mixed`.
    """
    zero = (0,) * N_MIXED
    tables = np.empty((len(pairs), 27), dtype=np.uint8)
    conflicts = np.empty(len(pairs), dtype=bool)
    for i, (a, b) in enumerate(pairs):
        ea, eb = as_rule(a), as_rule(b)
        tables[i] = _build_table(ea, eb, zero)
        conflicts[i] = ea.table[0] == 1 and eb.table[0] == 1
    return tables, conflicts


def fill_mixed(tables: np.ndarray, index: int) -> np.ndarray:
    out = tables.copy()
    out[:, MIXED_CODES] = np.array(mixed_digits(index), dtype=np.uint8)
    return out
