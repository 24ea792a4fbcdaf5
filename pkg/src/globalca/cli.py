"""Command-line entry point (``globalca``)."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, fields
from pathlib import Path

from globalca import aggregate, complexity, debruijn, sweep
from globalca.eca import evolve, representatives
from globalca.errors import GlobalCAError
from globalca.globalrule import compose

log = logging.getLogger("globalca")

EXIT_USAGE, EXIT_DATA, EXIT_IO = 1, 2, 3
CALIBRATION_INITS = 100


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class Config:
    width: int = 26
    steps: int = 60
    init_count: int = 100
    output_dir: str = "sweep-out"
    worker_count: int = 1
    strict_conflicts: bool = False
    thresholds_path: str = ""
    labels_path: str = ""

    def validate(self):
        if self.width < 1:
            raise UsageError(f"width must be positive, got {self.width}")
        if self.steps < 0:
            raise UsageError(f"steps must be non-negative, got {self.steps}")
        if self.init_count < 1:
            raise UsageError(f"init_count must be positive, got {self.init_count}")
        if self.worker_count < 1:
            raise UsageError(f"worker_count must be positive, got {self.worker_count}")

    def as_dict(self) -> dict[str, str]:
        return {f.name: str(getattr(self, f.name)).lower() if f.type == "bool" else str(getattr(self, f.name))
                for f in fields(self)}


def read_config(path: str | Path | None, ignore_unknown: bool = False) -> Config:
    """Flat ``key=value`` file; unknown keys are a usage error unless ignored."""
    cfg = Config()
    if not path:
        return cfg
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise OSError(f"{path}: {exc.strerror}") from exc
    types = {f.name: f.type for f in fields(Config)}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (s.strip() for s in line.partition("="))
        if sep and key not in types and ignore_unknown:
            continue
        if not sep or key not in types:
            raise UsageError(f"{path}:{lineno}: unknown or malformed setting {line!r}")
        if types[key] == "int":
            try:
                setattr(cfg, key, int(value))
            except ValueError:
                raise UsageError(f"{path}:{lineno}: {key} needs an integer") from None
        elif types[key] == "bool":
            setattr(cfg, key, value.lower() in ("1", "true", "yes", "on"))
        else:
            setattr(cfg, key, value)
    return cfg


def effective_config(args) -> Config:
    cfg = read_config(getattr(args, "config", None))
    for name in ("width", "steps", "thresholds_path", "labels_path"):
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    for flag, name in (("inits", "init_count"), ("out", "output_dir"), ("jobs", "worker_count")):
        value = getattr(args, flag, None)
        if value is not None and args.command == "sweep":
            setattr(cfg, name, value)
    if getattr(args, "strict", False):
        cfg.strict_conflicts = True
    cfg.validate()
    return cfg


def load_thresholds(cfg: Config) -> complexity.Thresholds:
    if cfg.thresholds_path:
        return complexity.Thresholds.load(cfg.thresholds_path)
    return complexity.default_thresholds(cfg.width, cfg.steps, CALIBRATION_INITS)


def load_labels(cfg: Config) -> dict[int, int]:
    return complexity.load_labels(cfg.labels_path or None)


def init_row(cfg: Config, index: int):
    if index < 1:
        raise UsageError(f"init index is 1-based, got {index}")
    return debruijn.initial_conditions(index, cfg.width)[index - 1]


# -- commands -------------------------------------------------------------------

def cmd_rules(args, cfg):
    labels = load_labels(cfg)
    print("rule,class")
    for r in representatives():
        print(f"{r},{labels.get(r, '')}")


def cmd_step(args, cfg):
    if args.init is not None:
        row = args.init
    else:
        row = complexity.project(init_row(cfg, args.init_index))
    grid = evolve(args.rule, row, cfg.steps)
    sys.stdout.write(aggregate.grid_text(grid))
    if args.out:
        aggregate.render_grid(grid, args.out)


def cmd_compose(args, cfg):
    gr = compose(args.eps, args.eps_prime, args.gr, strict=args.strict)
    print(f"table={gr.table_string()}")
    print(f"conflict={int(gr.conflict)}")


def cmd_run(args, cfg):
    th = load_thresholds(cfg)
    rec = sweep.run_one(args.eps, args.eps_prime, args.gr, init_row(cfg, args.init_index),
                        cfg.steps, th, init_index=args.init_index, strict=cfg.strict_conflicts)
    print(sweep.HEADER)
    print(rec.to_csv())


def cmd_isolated(args, cfg):
    th = load_thresholds(cfg)
    rec = sweep.run_isolated(args.rule, init_row(cfg, args.init_index), cfg.steps, th,
                             init_index=args.init_index, side=args.side)
    print(sweep.HEADER)
    print(rec.to_csv())


def cmd_debruijn(args, cfg):
    seqs = debruijn.enumerate_sequences(args.alphabet, args.order, args.count)
    width = args.dump_width if args.dump_width is not None else args.alphabet ** args.order
    for s in seqs:
        print("".join(map(str, debruijn.initial_condition(s, width))))


def cmd_calibrate(args, cfg):
    labels = complexity.load_labels(args.labels)
    inits = debruijn.initial_conditions(args.inits or CALIBRATION_INITS, cfg.width)
    th = complexity.calibrate(labels, cfg.width, cfg.steps, inits,
                              label_source=args.labels or "bundled", method=args.method)
    try:
        th.save(args.out)
    except OSError as exc:
        raise OSError(f"{args.out}: {exc.strerror}") from exc
    sys.stdout.write(th.dumps())


def cmd_sweep(args, cfg):
    out = Path(cfg.output_dir)
    existing = list(sweep.iter_shards(out)) if out.is_dir() else []
    if existing and not args.resume:
        raise GlobalCAError(f"{out} already holds {len(existing)} completed shards; pass --resume")
    plan = sweep.SweepPlan(
        gr_indices=sweep.parse_gr_spec(args.grs),
        init_count=cfg.init_count, width=cfg.width, steps=cfg.steps,
        strict_conflicts=cfg.strict_conflicts,
    )
    summary = sweep.execute(plan, load_thresholds(cfg), out, cfg.worker_count,
                            config=cfg.as_dict() | {"grs_spec": args.grs})
    sys.stdout.write(summary.dumps())


def cmd_aggregate(args, cfg):
    src = Path(args.input)
    if not src.is_dir():
        raise OSError(f"{src}: not a directory")
    paths = list(sweep.iter_shards(src))
    if args.measured:
        th_path = src / "thresholds.txt"
        th = complexity.Thresholds.load(th_path) if th_path.exists() else load_thresholds(cfg)
        run_cfg = read_config(src / "config.txt", ignore_unknown=True) if (src / "config.txt").exists() else cfg
        labels = sweep.measured_labels(th, run_cfg.width, run_cfg.steps, CALIBRATION_INITS)
    else:
        labels = load_labels(cfg)
    maps = aggregate.heatmaps_from_shards(paths, labels)
    title = args.title or f"{len(paths)} global rules"
    for path, text in ((args.out_csv, aggregate.heatmap_csv(maps)),
                       (args.out_svg, aggregate.heatmap_svg(maps, title))):
        if path:
            try:
                Path(path).write_text(text)
            except OSError as exc:
                raise OSError(f"{path}: {exc.strerror}") from exc
    print(f"shards={len(paths)}")
    print(f"records={maps.total}")
    for cls in complexity.CLASSES:
        print(f"class{cls}_records={int(maps.counts[cls - 1].sum())} modal_cell={maps.modal_cell(cls)}")


def _common(width: bool = True) -> Parser:
    c = Parser(add_help=False)
    sup = argparse.SUPPRESS
    c.add_argument("--config", default=sup, help="flat key=value settings file; flags override it")
    if width:
        c.add_argument("--width", type=int, default=sup)
    c.add_argument("--steps", type=int, default=sup)
    c.add_argument("--thresholds", dest="thresholds_path", default=sup, help="thresholds file from `calibrate`")
    c.add_argument("--labels-file", dest="labels_path", default=sup, help="rule,class file (default: bundled)")
    c.add_argument("-v", "--verbose", action="store_true", default=sup)
    return c


def build_parser() -> Parser:
    common = _common()
    p = Parser(prog="globalca", parents=[common],
               description="Interacting elementary CA under 3-colour global rules.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=Parser)

    def add(name, func, help, parents=(common,)):
        s = sub.add_parser(name, help=help, parents=list(parents))
        s.set_defaults(func=func)
        return s

    add("rules", cmd_rules, "list the 88 representatives with class labels")

    s = add("step", cmd_step, "evolve one ECA and print the grid")
    s.add_argument("--rule", type=int, required=True)
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--init", help="initial row as digits over {0,1}")
    g.add_argument("--init-index", type=int, help="1-based de Bruijn input, 2s cleared")
    s.add_argument("--out", help="also write <out>.txt and <out>.ppm")

    s = add("compose", cmd_compose, "print a global rule table")
    s.add_argument("--eps", type=int, required=True)
    s.add_argument("--eps-prime", type=int, required=True)
    s.add_argument("--gr", type=int, required=True)
    s.add_argument("--strict", action="store_true")

    s = add("run", cmd_run, "one interacting execution")
    s.add_argument("--eps", type=int, required=True)
    s.add_argument("--eps-prime", type=int, required=True)
    s.add_argument("--gr", type=int, required=True)
    s.add_argument("--init-index", type=int, required=True)
    s.add_argument("--strict", action="store_true")

    s = add("isolated", cmd_isolated, "baseline run of a single rule")
    s.add_argument("--rule", type=int, required=True)
    s.add_argument("--init-index", type=int, required=True)
    s.add_argument("--side", type=int, choices=(1, 2), default=1, help="alphabet {0,1} or {0,2}")

    s = add("debruijn", cmd_debruijn, "dump initial conditions", parents=(_common(width=False),))
    s.add_argument("--order", type=int, required=True)
    s.add_argument("--alphabet", type=int, required=True)
    s.add_argument("--count", type=int, required=True)
    s.add_argument("--width", type=int, dest="dump_width", help="prefix length (default: full sequence)")

    s = add("calibrate", cmd_calibrate, "train class thresholds")
    s.add_argument("--labels", help="rule,class file (default: bundled)")
    s.add_argument("--out", required=True)
    s.add_argument("--inits", type=int, help=f"de Bruijn inputs (default {CALIBRATION_INITS})")
    s.add_argument("--method", choices=("midpoint", "min-error"), default="midpoint")

    s = add("sweep", cmd_sweep, "run GR shards")
    s.add_argument("--grs", required=True, help="LIST, A-B range, or sample:SEED:COUNT")
    s.add_argument("--inits", type=int)
    s.add_argument("--out")
    s.add_argument("--jobs", type=int)
    s.add_argument("--resume", action="store_true")
    s.add_argument("--strict", action="store_true")

    s = add("aggregate", cmd_aggregate, "heat maps from a sweep directory")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out-csv")
    s.add_argument("--out-svg")
    s.add_argument("--measured", action="store_true",
                   help="class constituents by their isolated runs instead of the label file")
    s.add_argument("--title")
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.DEBUG if getattr(args, "verbose", False) else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        cfg = effective_config(args)
        args.func(args, cfg)
    except UsageError as exc:
        print(f"globalca: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GlobalCAError as exc:
        print(f"globalca: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"globalca: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
