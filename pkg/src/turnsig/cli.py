"""Command-line entry point: ``turnsig {extract,experiment,ablate,synth,signature}``.

Exit status is 0 on success, 1 for usage or configuration errors and 2 when
input data cannot be read or does not support the request. Diagnostics go to
stderr; results go to files or stdout.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError, ParseError, TurnsigError
from .features import FeatureExtractor, extract_csv
from .lexicon import LEXICON_ENV, load_lexicon_dir
from .pipeline import (ExperimentConfig, Task, ablation_tsv, parse_subject, permutation_null,
                       render_report, results_tsv, run_ablation, run_loocv)
from .sigcore import augment_basepoint, path_signature, signature_words
from .synth import SynthSpec, generate
from .transcript import load_dataset, write_dataset

log = logging.getLogger("turnsig")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse with exit status 1 on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _experiment_flags(p, with_task=True):
    p.add_argument("dataset", help="directory of *.interview.json files")
    if with_task:
        p.add_argument("--task", help="h-vs-bd, h-vs-bpd or bd-vs-bpd")
    p.add_argument("--subject", help="participant, interviewer or both")
    p.add_argument("--level", type=int, dest="sig_level", help="signature truncation level (1..5)")
    p.add_argument("--p-threshold", type=float, help="selection threshold (default 0.001, or 0.002 "
                   "for interviewer/both)")
    p.add_argument("--fallback-threshold", type=float)
    p.add_argument("--groups", help="comma-separated subset of LING,CNT,DIAL")
    p.add_argument("--l2", type=float, help="L2 penalty of the logistic regression")
    p.add_argument("--no-basepoint", dest="basepoint", action="store_const", const=False)
    p.add_argument("--no-normalize", dest="normalize", action="store_const", const=False)
    p.add_argument("--mattr-window", type=int)
    p.add_argument("--selection-target", choices=("ipde", "label"))
    p.add_argument("--seed", type=int)
    p.add_argument("--config", type=Path, help="JSON file with experiment settings; flags override it")
    p.add_argument("--print-config", action="store_true", help="print the resolved configuration")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")


def build_parser():
    parser = _Parser(prog="turnsig", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    parser.add_argument("--lexicons", type=Path,
                        help=f"lexicon directory (default: ${LEXICON_ENV} or the bundled set)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("extract", help="per-turn feature table as CSV")
    p.add_argument("dataset")
    p.add_argument("--subject", default="both")
    p.add_argument("--mattr-window", type=int, default=10)
    p.add_argument("--out", type=Path, help="CSV path (default stdout)")

    p = sub.add_parser("experiment", help="LOOCV for one task: results.tsv and report.txt")
    _experiment_flags(p)
    p.add_argument("--top-k", type=int, default=5)
    p.add_argument("--permutations", type=int, default=0,
                   help="also report the mean AUROC of this many label permutations")

    p = sub.add_parser("ablate", help="feature-group ablation table: ablation.tsv")
    _experiment_flags(p, with_task=False)
    p.add_argument("--task", action="append",
                   help="task to ablate; repeat for several, or 'all' (default)")

    p = sub.add_parser("synth", help="write a synthetic dataset")
    p.add_argument("--n-per-group", type=int, default=15)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--effect-scale", type=float, default=1.0, help="0 removes the planted effects")
    p.add_argument("--out", type=Path, required=True, help="dataset directory")

    p = sub.add_parser("signature", help="signature of a CSV of points (debugging aid)")
    p.add_argument("points", help="CSV file, one point per row; '-' reads stdin")
    p.add_argument("--level", type=int, default=3)
    p.add_argument("--basepoint", action="store_true", help="prepend the origin")
    return parser


_CONFIG_FLAGS = ("task", "subject", "sig_level", "p_threshold", "fallback_threshold", "groups", "l2",
                 "basepoint", "normalize", "mattr_window", "selection_target", "seed")


def resolve_config(args, task=None) -> ExperimentConfig:
    """Defaults, then the ``--config`` file, then explicit flags."""
    data = {}
    if args.config is not None:
        try:
            data = json.loads(args.config.read_text(encoding="utf-8"))
        except OSError as exc:
            raise UsageError(f"cannot read config file: {exc}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"{args.config}: invalid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise UsageError(f"{args.config}: expected a JSON object")
    for name in _CONFIG_FLAGS:
        value = getattr(args, name, None)
        if name == "task" and task is not None:
            value = task
        if value is None:
            continue
        if name == "groups":
            value = [g.strip() for g in value.split(",") if g.strip()]
        data[name] = value
    return ExperimentConfig.from_dict(data)


def _tasks(values):
    if not values or "all" in [v.lower() for v in values]:
        return list(Task)
    return [Task.parse(v) for v in values]


def _lexicons(args):
    return load_lexicon_dir(args.lexicons) if args.lexicons is not None else load_lexicon_dir()


def _read_points(source):
    fh = sys.stdin if source == "-" else open(source, newline="", encoding="utf-8")
    try:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    finally:
        if fh is not sys.stdin:
            fh.close()
    points = []
    for i, row in enumerate(rows):
        try:
            points.append([float(c) for c in row])
        except ValueError:
            if i == 0:  # header line
                continue
            raise ParseError(f"row {i + 1}: non-numeric value", str(source)) from None
    if not points:
        raise ParseError("no points", str(source))
    if len({len(pt) for pt in points}) != 1:
        raise ParseError("rows differ in the number of coordinates", str(source))
    return np.array(points, dtype=float)


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    log.info("wrote %s", path)


def cmd_extract(args):
    subject = parse_subject(args.subject)
    extractor = FeatureExtractor(_lexicons(args), mattr_window=args.mattr_window)
    text = extract_csv(load_dataset(args.dataset), extractor, subject)
    if args.out is None:
        sys.stdout.write(text)
    else:
        _write(args.out, text)


def cmd_experiment(args):
    config = resolve_config(args)
    if args.print_config:
        print(json.dumps(config.to_dict(), indent=2, sort_keys=True))
    if args.permutations < 0:
        raise UsageError("--permutations must be >= 0")
    lexicons = _lexicons(args)
    dataset = load_dataset(args.dataset)
    result = run_loocv(dataset, config, lexicons)
    _write(args.out / "results.tsv", results_tsv(result))
    _write(args.out / "report.txt", render_report(result.report, args.top_k))
    print(f"auroc={result.auroc:.6f}")
    if args.permutations:
        null = permutation_null(dataset, config, lexicons, args.permutations)
        print(f"null_auroc_mean={float(np.mean(null)):.6f}")


def cmd_ablate(args):
    tasks = _tasks(args.task)
    configs = [resolve_config(args, task=t) for t in tasks]
    if args.print_config:
        print(json.dumps(configs[0].to_dict(), indent=2, sort_keys=True))
    lexicons = _lexicons(args)
    dataset = load_dataset(args.dataset)
    parts = []
    for config in configs:
        rows = run_ablation(dataset, config, lexicons)
        text = ablation_tsv(rows, config.task)
        parts.append(text if not parts else text.split("\n", 1)[1])
    table = "".join(parts)
    _write(args.out / "ablation.tsv", table)
    sys.stdout.write(table)


def cmd_synth(args):
    spec = SynthSpec(n_per_group=args.n_per_group, seed=args.seed, effect_scale=args.effect_scale)
    spec.validate()
    interviews = generate(spec)
    write_dataset(interviews, args.out)
    print(f"wrote {len(interviews)} interviews to {args.out}")


def cmd_signature(args):
    points = _read_points(args.points)
    d = points.shape[1]
    path = augment_basepoint(points, d) if args.basepoint else points
    sig = path_signature(path, args.level, d=d)
    for word, value in zip(signature_words(d, args.level), sig.flatten().tolist()):
        print("(" + ",".join(str(i + 1) for i in word) + f")\t{value!r}")


COMMANDS = {"extract": cmd_extract, "experiment": cmd_experiment, "ablate": cmd_ablate,
            "synth": cmd_synth, "signature": cmd_signature}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        COMMANDS[args.command](args)
    except (UsageError, ConfigError) as exc:
        print(f"turnsig {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, DataError, OSError) as exc:
        print(f"turnsig {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except TurnsigError as exc:
        print(f"turnsig {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
