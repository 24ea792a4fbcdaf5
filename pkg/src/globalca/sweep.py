"""Sweeps over global rules: one CSV shard per GR, resumable and worker-count independent."""

from __future__ import annotations

import hashlib
import logging
import multiprocessing
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from globalca.complexity import BatchScorer, Thresholds, baseline_size, compressed_size, project, serialize_grid
from globalca.debruijn import initial_conditions
from globalca.eca import as_rule, as_row, evolve_batch, evolve_lookup
from globalca.errors import ConflictError, DataError, DomainError
from globalca.globalrule import N_ASSIGNMENTS, base_tables, compose, fill_mixed, pair_enumeration

log = logging.getLogger(__name__)

HEADER = "gr_index,eps,eps_prime,init_index,score,class,conflict"
DONE = "#done"
ISOLATED = 0  # gr_index of baseline runs without interaction

# executions evolved together; bounds the (chunk, steps + 1, width) grid buffer
CHUNK = 16384


@dataclass(frozen=True)
class RunRecord:
    gr_index: int
    eps: int
    eps_prime: int
    init_index: int
    score: int | None
    cls: int | None
    conflict: bool

    @property
    def key(self):
        return (self.gr_index, self.eps, self.eps_prime, self.init_index)

    def to_csv(self) -> str:
        score = "" if self.score is None else self.score
        cls = "" if self.cls is None else self.cls
        return f"{self.gr_index},{self.eps},{self.eps_prime},{self.init_index},{score},{cls},{int(self.conflict)}"

    @classmethod
    def from_csv(cls, line: str) -> RunRecord:
        try:
            gr, a, b, i, s, c, f = line.strip().split(",")
            return cls(int(gr), int(a), int(b), int(i),
                       int(s) if s else None, int(c) if c else None, f == "1")
        except ValueError:
            raise DataError(f"malformed record line {line!r}") from None


@dataclass
class SweepPlan:
    gr_indices: list[int]
    pairs: list[tuple[int, int]] = field(default_factory=pair_enumeration)
    init_count: int = 100
    width: int = 26
    steps: int = 60
    strict_conflicts: bool = False

    def validate(self):
        bad = [g for g in self.gr_indices if not 1 <= g <= N_ASSIGNMENTS]
        if bad:
            raise DomainError(f"GR index {bad[0]} outside 1..{N_ASSIGNMENTS}")
        if len(set(self.gr_indices)) != len(self.gr_indices):
            raise DomainError("duplicate GR indices in plan")
        if self.init_count < 1 or self.width < 1 or self.steps < 0:
            raise DomainError("init_count and width must be positive, steps non-negative")
        for a, b in self.pairs:
            as_rule(a), as_rule(b)

    def describe(self) -> dict[str, str]:
        return {
            "grs": str(len(self.gr_indices)),
            "gr_first": str(min(self.gr_indices, default=0)),
            "gr_last": str(max(self.gr_indices, default=0)),
            "pairs": str(len(self.pairs)),
            "init_count": str(self.init_count),
            "width": str(self.width),
            "steps": str(self.steps),
            "strict_conflicts": str(self.strict_conflicts).lower(),
        }


def parse_gr_spec(spec: str) -> list[int]:
    """``"1,5,9"``, ``"1-100"`` (inclusive), mixes of both, or ``"sample:SEED:COUNT"``."""
    spec = spec.strip()
    if spec.startswith("sample:"):
        try:
            _, seed, count = spec.split(":")
            seed, count = int(seed), int(count)
        except ValueError:
            raise DomainError(f"bad sample spec {spec!r}, expected sample:SEED:COUNT") from None
        return sample_grs(seed, count)
    out: list[int] = []
    for part in filter(None, (p.strip() for p in spec.split(","))):
        lo, sep, hi = part.partition("-")
        try:
            if sep:
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(lo))
        except ValueError:
            raise DomainError(f"bad GR list element {part!r}") from None
    if not out:
        raise DomainError("empty GR list")
    return out


def sample_grs(seed: int, count: int) -> list[int]:
    """``count`` distinct GR indices drawn uniformly with a seeded generator, ascending."""
    if not 1 <= count <= N_ASSIGNMENTS:
        raise DomainError(f"sample size {count} outside 1..{N_ASSIGNMENTS}")
    rng = np.random.default_rng(seed)
    picks = rng.choice(N_ASSIGNMENTS, size=count, replace=False) + 1
    return sorted(int(g) for g in picks)


# -- single runs -------------------------------------------------------------

def run_one(eps, eps_prime, mixed, init, steps: int, thresholds: Thresholds,
            init_index: int = 0, strict: bool = False) -> RunRecord:
    eps, eps_prime = as_rule(eps), as_rule(eps_prime)
    try:
        gr = compose(eps, eps_prime, mixed, strict=strict)
    except ConflictError:
        index = mixed if isinstance(mixed, int) else mixed.index
        return RunRecord(index, eps.number, eps_prime.number, init_index, None, None, True)
    row = as_row(init, alphabet=(0, 1, 2))
    grid = evolve_lookup(gr.array, row, steps, base=3)
    data = serialize_grid(grid)
    score = compressed_size(data) - baseline_size(len(data))
    return RunRecord(gr.index, eps.number, eps_prime.number, init_index,
                     score, thresholds.classify(score), gr.conflict)


def run_isolated(rule, init, steps: int, thresholds: Thresholds,
                 init_index: int = 0, side: int = 1) -> RunRecord:
    """Baseline run of one rule without interaction.

    ``side=1`` runs on {0,1} (the role of eps), ``side=2`` on {0,2} with the
    rule recoloured. Foreign live symbols in ``init`` are cleared to 0. The
    record repeats the rule number in both rule fields, with gr_index 0.
    """
    if side not in (1, 2):
        raise DomainError(f"side must be 1 or 2, got {side}")
    rule = as_rule(rule)
    row = project(as_row(init, alphabet=(0, 1, 2)), side) // side
    grid = evolve_lookup(rule.array, row, steps, base=2) * side
    data = serialize_grid(grid)
    score = compressed_size(data) - baseline_size(len(data))
    return RunRecord(ISOLATED, rule.number, rule.number, init_index,
                     score, thresholds.classify(score), False)


def measured_labels(thresholds: Thresholds, width: int = 26, steps: int = 60,
                    init_count: int = 100, rules: Iterable[int] | None = None) -> dict[int, int]:
    """Class of each rule from its mean isolated score, as the classifier sees it."""
    from globalca.complexity import rule_scores
    from globalca.eca import representatives

    rules = list(rules) if rules is not None else representatives()
    means = rule_scores(rules, initial_conditions(init_count, width), steps).mean(axis=1)
    return {r: thresholds.classify(float(m)) for r, m in zip(rules, means)}


# -- shards --------------------------------------------------------------------

class ShardBuilder:
    """Immutable per-sweep inputs plus the batched pipeline for one GR."""

    def __init__(self, plan: SweepPlan, thresholds: Thresholds):
        self.plan = plan
        self.thresholds = thresholds
        self.pairs = list(plan.pairs)
        self.tables, self.conflicts = base_tables(self.pairs)
        self.inits = initial_conditions(plan.init_count, plan.width)
        self.scorer = BatchScorer()

    def records(self, gr_index: int) -> Iterator[RunRecord]:
        """Records in canonical order: pairs in plan order, then init index ascending."""
        plan = self.plan
        n_init = len(self.inits)
        tables = fill_mixed(self.tables, gr_index)
        live = np.flatnonzero(~self.conflicts) if plan.strict_conflicts else np.arange(len(self.pairs))
        scores = np.zeros((len(self.pairs), n_init), dtype=np.int64)
        classes = np.zeros_like(scores)
        per_chunk = max(1, CHUNK // n_init)
        for start in range(0, len(live), per_chunk):
            chunk = live[start:start + per_chunk]
            which = np.repeat(chunk, n_init)
            grids = evolve_batch(tables, which, np.tile(self.inits, (len(chunk), 1)), plan.steps, base=3)
            sc = self.scorer(grids).reshape(len(chunk), n_init)
            scores[chunk] = sc
            classes[chunk] = self.thresholds.classify_array(sc)
        ran = np.zeros(len(self.pairs), dtype=bool)
        ran[live] = True
        for p, (a, b) in enumerate(self.pairs):
            conflict = bool(self.conflicts[p])
            for i in range(n_init):
                if ran[p]:
                    yield RunRecord(gr_index, a, b, i + 1, int(scores[p, i]), int(classes[p, i]), conflict)
                else:
                    yield RunRecord(gr_index, a, b, i + 1, None, None, conflict)

    def shard_text(self, gr_index: int) -> tuple[str, int, int, int]:
        """CSV body with completion marker, plus record, execution and conflict counts."""
        lines = [HEADER]
        executed = conflicts = 0
        for rec in self.records(gr_index):
            lines.append(rec.to_csv())
            executed += rec.score is not None
            conflicts += rec.conflict
        lines.append(DONE)
        return "\n".join(lines) + "\n", len(lines) - 2, executed, conflicts


def shard_path(output_dir: str | Path, gr_index: int) -> Path:
    return Path(output_dir) / f"gr_{gr_index:06d}.csv"


def shard_complete(path: Path) -> bool:
    try:
        with open(path, "rb") as fh:
            fh.seek(0, os.SEEK_END)
            size = fh.tell()
            fh.seek(max(0, size - len(DONE) - 2))
            return fh.read().rstrip(b"\n").endswith(DONE.encode())
    except FileNotFoundError:
        return False


def write_shard(builder: ShardBuilder, output_dir: Path, gr_index: int) -> tuple[int, int, int, int]:
    text, n_records, executed, conflicts = builder.shard_text(gr_index)
    final = shard_path(output_dir, gr_index)
    tmp = final.with_name(final.name + f".tmp{os.getpid()}")
    with open(tmp, "w") as fh:
        fh.write(text)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, final)
    return gr_index, n_records, executed, conflicts


def read_shard(path: str | Path) -> list[RunRecord]:
    """Records of a completed shard; an unmarked shard is a :class:`DataError`."""
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines or lines[-1] != DONE:
        raise DataError(f"{path}: shard has no completion marker")
    if lines[0] != HEADER:
        raise DataError(f"{path}: unexpected header {lines[0]!r}")
    return [RunRecord.from_csv(line) for line in lines[1:-1]]


def iter_shards(directory: str | Path) -> Iterator[Path]:
    """Completed shard files in GR order; unmarked ones are skipped."""
    for path in sorted(Path(directory).glob("gr_*.csv")):
        if shard_complete(path):
            yield path


def directory_digest(directory: str | Path) -> str:
    """SHA-256 over completed shard names and bytes, in GR order."""
    h = hashlib.sha256()
    for path in iter_shards(directory):
        h.update(path.name.encode())
        h.update(path.read_bytes())
    return h.hexdigest()


# -- execution -------------------------------------------------------------------

@dataclass
class SweepSummary:
    shards: int
    written: int
    skipped: int
    records: int
    executions: int
    conflicts: int
    wall_seconds: float

    def dumps(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in (
            ("shards", self.shards), ("shards_written", self.written),
            ("shards_skipped", self.skipped), ("records", self.records),
            ("executions", self.executions), ("conflict_records", self.conflicts),
            ("wall_seconds", f"{self.wall_seconds:.3f}"),
        ))


_builder: ShardBuilder | None = None


def _init_worker(plan, thresholds):
    global _builder
    _builder = ShardBuilder(plan, thresholds)


def _work(args):
    output_dir, gr_index = args
    return write_shard(_builder, output_dir, gr_index)


def _count_shard(path: Path) -> tuple[int, int]:
    records = conflicts = 0
    with open(path) as fh:
        next(fh)
        for line in fh:
            if line.startswith("#"):
                continue
            records += 1
            conflicts += line.rstrip("\n").endswith(",1")
    return records, conflicts


def execute(plan: SweepPlan, thresholds: Thresholds, output_dir: str | Path,
            worker_count: int = 1, config: dict[str, str] | None = None) -> SweepSummary:
    """Run every GR of ``plan`` not already present in ``output_dir``.

    Shard bytes depend only on the plan and thresholds, never on
    ``worker_count`` or scheduling. Shards bearing the completion marker are
    skipped, so re-running after a crash finishes the remaining work.
    """
    t0 = time.perf_counter()
    plan.validate()
    output_dir = Path(output_dir)
    try:
        output_dir.mkdir(parents=True, exist_ok=True)
        probe = output_dir / ".write-probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise OSError(f"{output_dir}: output directory not writable ({exc.strerror})") from exc

    effective = dict(plan.describe())
    effective["gr_indices"] = ",".join(map(str, plan.gr_indices))
    effective["workers"] = str(worker_count)
    effective.update(config or {})
    (output_dir / "config.txt").write_text("".join(f"{k}={v}\n" for k, v in sorted(effective.items())))
    (output_dir / "thresholds.txt").write_text(thresholds.dumps())

    pending = [g for g in plan.gr_indices if not shard_complete(shard_path(output_dir, g))]
    for stale in output_dir.glob("gr_*.csv.tmp*"):
        stale.unlink()
    log.info("%d shards pending of %d", len(pending), len(plan.gr_indices))

    results = []
    if pending:
        if worker_count <= 1:
            builder = ShardBuilder(plan, thresholds)
            for g in pending:
                results.append(write_shard(builder, output_dir, g))
                log.debug("shard %d written", g)
        else:
            ctx = multiprocessing.get_context("fork")
            with ctx.Pool(worker_count, initializer=_init_worker, initargs=(plan, thresholds)) as pool:
                for res in pool.imap_unordered(_work, [(output_dir, g) for g in pending]):
                    results.append(res)
                    log.debug("shard %d written", res[0])

    written = {g: (n, c) for g, n, _, c in results}
    records = conflicts = 0
    for g in plan.gr_indices:
        n, c = written[g] if g in written else _count_shard(shard_path(output_dir, g))
        records += n
        conflicts += c
    summary = SweepSummary(
        shards=len(plan.gr_indices),
        written=len(results),
        skipped=len(plan.gr_indices) - len(results),
        records=records,
        executions=sum(e for _, _, e, _ in results),
        conflicts=conflicts,
        wall_seconds=time.perf_counter() - t0,
    )
    (output_dir / "summary.txt").write_text(summary.dumps())
    return summary
