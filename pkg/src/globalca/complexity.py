"""Compression-based complexity of evolution grids and Wolfram-class assignment.

A grid is serialised row-major as ASCII digits and compressed with raw
deflate at fixed settings. Its score is the compressed length minus that of
an all-``'0'`` string of the same length, so any all-zero grid scores 0.
"""

from __future__ import annotations

import bisect
import zlib
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from globalca.eca import as_rule, evolve_batch
from globalca.errors import CalibrationError, DataError, DomainError

# Pinned deflate parameters. Raw stream (negative wbits): no header or checksum.
LEVEL = 9
WBITS = -15
MEM_LEVEL = 8
STRATEGY = zlib.Z_DEFAULT_STRATEGY

CLASSES = (1, 2, 3, 4)


def compressed_size(data: bytes) -> int:
    comp = zlib.compressobj(LEVEL, zlib.DEFLATED, WBITS, MEM_LEVEL, STRATEGY)
    return len(comp.compress(data)) + len(comp.flush())


@lru_cache(maxsize=256)
def baseline_size(length: int) -> int:
    return compressed_size(b"0" * length)


def serialize_grid(grid) -> bytes:
    arr = np.asarray(grid)
    if arr.size and (arr.min() < 0 or arr.max() > 2):
        raise DomainError("grid symbols must lie in {0, 1, 2}")
    return (arr.astype(np.uint8) + 48).tobytes()


@dataclass(frozen=True)
class ClassScore:
    raw_bytes: int
    baseline_bytes: int
    assigned_class: int | None = None
    points: tuple = ()

    @property
    def normalized(self) -> int:
        return self.raw_bytes - self.baseline_bytes

    def with_class(self, cls: int) -> ClassScore:
        return ClassScore(self.raw_bytes, self.baseline_bytes, cls, self.points)


def score(grid) -> ClassScore:
    data = serialize_grid(grid)
    return ClassScore(compressed_size(data), baseline_size(len(data)))


class BatchScorer:
    """Normalised scores for stacks of grids, memoising repeated grids.

    Interacting runs collapse onto a small set of distinct spacetime
    diagrams (extinct or frozen rows) so the cache saves most compressions.
    """

    def __init__(self, max_entries: int = 200_000):
        self.max_entries = max_entries
        self._cache: dict[bytes, int] = {}

    def __call__(self, grids: np.ndarray) -> np.ndarray:
        n = grids.shape[0]
        flat = (grids.reshape(n, -1) + 48).astype(np.uint8, copy=False)
        base = baseline_size(flat.shape[1])
        out = np.empty(n, dtype=np.int64)
        cache = self._cache
        for i in range(n):
            key = flat[i].tobytes()
            size = cache.get(key)
            if size is None:
                size = compressed_size(key)
                if len(cache) >= self.max_entries:
                    cache.clear()
                cache[key] = size
            out[i] = size - base
        return out


# -- labelled rules ---------------------------------------------------------

def load_labels(path: str | Path | None = None) -> dict[int, int]:
    """Read ``rule,class`` lines; ``#`` comments and a header line are skipped.

    Without a path the bundled labelling of the 88 representatives is used.
    """
    if path is None:
        text = resources.files("globalca").joinpath("data/labels.csv").read_text()
    else:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise OSError(f"{path}: {exc.strerror}") from exc
    labels: dict[int, int] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#") or line.lower().startswith("rule"):
            continue
        try:
            rule, cls = (int(x) for x in line.split(","))
        except ValueError:
            raise DataError(f"{path or 'labels.csv'}:{lineno}: expected 'rule,class', got {line!r}")
        if cls not in CLASSES:
            raise DataError(f"{path or 'labels.csv'}:{lineno}: class {cls} not in 1..4")
        labels[rule] = cls
    return labels


# -- thresholds -------------------------------------------------------------

@dataclass(frozen=True)
class Thresholds:
    """Classes ordered by mean calibration score and the cuts between them.

    A score equal to a cut goes to the lower class.
    """

    order: tuple[int, ...]
    cuts: tuple[float, ...]
    means: tuple[float, ...] = ()
    provenance: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if sorted(self.order) != list(CLASSES):
            raise CalibrationError(f"class order {self.order} is not a permutation of 1..4")
        if len(self.cuts) != 3 or any(b <= a for a, b in zip(self.cuts, self.cuts[1:])):
            raise CalibrationError(f"cuts {self.cuts} must be three strictly increasing values")

    def classify(self, normalized: float) -> int:
        return self.order[bisect.bisect_left(self.cuts, normalized)]

    def classify_array(self, normalized: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(np.asarray(self.cuts), normalized, side="left")
        return np.asarray(self.order, dtype=np.int64)[idx]

    def dumps(self) -> str:
        lines = [
            "order=" + ",".join(map(str, self.order)),
            "cuts=" + ",".join(repr(float(c)) for c in self.cuts),
            "means=" + ",".join(repr(float(m)) for m in self.means),
        ]
        lines += [f"provenance.{k}={v}" for k, v in sorted(self.provenance.items())]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> Thresholds:
        fields: dict[str, str] = {}
        prov: dict[str, str] = {}
        for line in text.splitlines():
            if not line.strip() or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise DataError(f"bad thresholds line {line!r}")
            if key.startswith("provenance."):
                prov[key[len("provenance."):]] = value
            else:
                fields[key] = value
        try:
            order = tuple(int(x) for x in fields["order"].split(","))
            cuts = tuple(float(x) for x in fields["cuts"].split(","))
            means = tuple(float(x) for x in fields.get("means", "").split(",") if x)
        except (KeyError, ValueError) as exc:
            raise DataError(f"malformed thresholds: {exc}") from exc
        return cls(order, cuts, means, prov)

    def save(self, path: str | Path):
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path: str | Path) -> Thresholds:
        return cls.loads(Path(path).read_text())


def classify(score: ClassScore | float, thresholds: Thresholds) -> int:
    value = score.normalized if isinstance(score, ClassScore) else score
    return thresholds.classify(value)


def project(inits: np.ndarray, alphabet: int = 1) -> np.ndarray:
    """Keep symbol ``alphabet`` (1 or 2) and send the other live colour to 0."""
    inits = np.asarray(inits, dtype=np.uint8)
    return np.where(inits == alphabet, alphabet, 0).astype(np.uint8)


def rule_scores(rules: Iterable[int], inits: np.ndarray, steps: int,
                scorer: BatchScorer | None = None) -> np.ndarray:
    """``(len(rules), len(inits))`` normalised scores of isolated {0,1} runs."""
    rules = list(rules)
    inits = project(np.atleast_2d(inits))
    tables = np.stack([as_rule(r).array for r in rules])
    which = np.repeat(np.arange(len(rules)), len(inits))
    grids = evolve_batch(tables, which, np.tile(inits, (len(rules), 1)), steps, base=2)
    scorer = scorer or BatchScorer()
    return scorer(grids).reshape(len(rules), len(inits))


def calibrate(labels: Mapping[int, int], width: int, steps: int, inits,
              label_source: str = "bundled", method: str = "midpoint") -> Thresholds:
    """Train cut values from labelled rules.

    Each rule is scored by its mean over ``inits`` (projected onto {0,1}) and
    classes are ordered by the mean over their rules. With
    ``method="midpoint"`` each cut sits midway between neighbouring class
    means; ``method="min-error"`` instead places the cuts to minimise the
    number of misclassified training rules.
    """
    if method not in ("midpoint", "min-error"):
        raise DomainError(f"unknown calibration method {method!r}")
    inits = np.atleast_2d(np.asarray(inits, dtype=np.uint8))
    if inits.size == 0:
        raise DomainError("calibration needs at least one initial condition")
    if inits.shape[1] != width:
        raise DomainError(f"initial conditions have width {inits.shape[1]}, expected {width}")
    rules = sorted(labels)
    per_rule = rule_scores(rules, inits, steps).mean(axis=1)
    means = {}
    for cls in CLASSES:
        members = [s for r, s in zip(rules, per_rule) if labels[r] == cls]
        if not members:
            raise CalibrationError(f"no labelled rules in class {cls}")
        means[cls] = float(np.mean(members))
    order = tuple(sorted(CLASSES, key=lambda c: (means[c], c)))
    ordered = [means[c] for c in order]
    if any(b <= a for a, b in zip(ordered, ordered[1:])):
        raise CalibrationError(f"class means not separable: {means}")
    if method == "midpoint":
        cuts = tuple((a + b) / 2 for a, b in zip(ordered, ordered[1:]))
    else:
        cuts = _min_error_cuts(per_rule, np.array([labels[r] for r in rules]), order)
    provenance = {
        "labels": label_source,
        "rules": str(len(rules)),
        "width": str(width),
        "steps": str(steps),
        "inits": str(len(inits)),
        "statistic": "mean",
        "method": method,
    }
    return Thresholds(order, cuts, tuple(ordered), provenance)


def _min_error_cuts(scores: np.ndarray, labels: np.ndarray, order) -> tuple[float, ...]:
    """Three increasing cuts, each midway between two distinct sorted scores,
    maximising the number of rules that fall in their own class's interval.
    The first optimum in cut order wins.
    """
    idx = np.argsort(scores, kind="stable")
    s, y = scores[idx], labels[idx]
    n = len(s)
    # a cut at position i separates s[:i] from s[i:]
    positions = [i for i in range(1, n) if s[i] > s[i - 1]]
    if len(positions) < 3:
        raise CalibrationError("too few distinct scores to place three cuts")
    hits = {c: np.concatenate([[0], np.cumsum(y == c)]) for c in CLASSES}
    c0, c1, c2, c3 = (hits[c] for c in order)
    best = None
    for ia, a in enumerate(positions):
        for ib in range(ia + 1, len(positions)):
            b = positions[ib]
            head = c0[a] + c1[b] - c1[a]
            for c in positions[ib + 1:]:
                correct = head + c2[c] - c2[b] + c3[n] - c3[c]
                if best is None or correct > best[0]:
                    best = (correct, a, b, c)
    _, a, b, c = best
    return tuple(float(s[i - 1] + s[i]) / 2 for i in (a, b, c))


@lru_cache(maxsize=8)
def default_thresholds(width: int = 26, steps: int = 60, init_count: int = 100) -> Thresholds:
    """Thresholds trained on the bundled labels over the first de Bruijn inputs."""
    from globalca.debruijn import initial_conditions

    return calibrate(load_labels(), width, steps, initial_conditions(init_count, width))


def asymptotic_score(rule, ladder, init_count: int = 1, thresholds: Thresholds | None = None) -> ClassScore:
    """Largest mean score over a ladder of growing ``(width, steps)`` shapes.

    ``rule`` is an ECA (number or :class:`EcaRule`, run on {0,1}) or a
    :class:`GlobalRule`. Per-point ``(width, steps, mean)`` values are kept
    in ``points``; the returned raw/baseline pair is the one at the maximum.
    """
    from globalca.debruijn import initial_conditions
    from globalca.globalrule import GlobalRule

    ladder = [tuple(p) for p in ladder]
    if not ladder:
        raise DomainError("ladder must not be empty")
    for (w0, t0), (w1, t1) in zip(ladder, ladder[1:]):
        if w1 < w0 or t1 < t0:
            raise DomainError("ladder must be nondecreasing in width and steps")
    points = []
    best = None
    for width, steps in ladder:
        inits = initial_conditions(init_count, width)
        if isinstance(rule, GlobalRule):
            which = np.zeros(len(inits), dtype=np.intp)
            grids = evolve_batch(rule.array[None, :], which, inits, steps, base=3)
        else:
            tables = as_rule(rule).array[None, :]
            grids = evolve_batch(tables, np.zeros(len(inits), dtype=np.intp), project(inits), steps, base=2)
        raws = [compressed_size(serialize_grid(g)) for g in grids]
        base = baseline_size(width * (steps + 1))
        mean_raw = float(np.mean(raws))
        points.append((width, steps, mean_raw - base))
        if best is None or mean_raw - base > best[0] - best[1]:
            best = (mean_raw, base)
    result = ClassScore(best[0], best[1], None, tuple(points))
    if thresholds is not None:
        result = result.with_class(thresholds.classify(result.normalized))
    return result
