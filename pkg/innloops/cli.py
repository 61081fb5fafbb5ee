"""
Command-line interface.

    python -m innloops build c -o c.tab
    python -m innloops build chmu --h class:1 --delta 000000 --mu 00 -o c2.tab
    python -m innloops analyze c.tab --mlt
    python -m innloops greedy c.tab --subloop nucleus -o out.tab --history hist.json
    python -m innloops iso c.tab c2.tab --witness map.json
    python -m innloops groups64 --dedup --out-dir groups
    python -m innloops experiment theta-family --output theta.json

Exit codes: 0 success, 1 usage error, 2 invariant violation, 3 resource
limit or interrupted experiment, 10 negative answer (not isomorphic).
Reports go to stdout, logs to stderr.
"""

import argparse
import sys
from pathlib import Path
from typing import Callable, Dict, Optional, Sequence

from pydantic import ValidationError

from . import __version__
from .extensions import (build_C, build_Cbar, build_Gbar, build_pa64, build_theta_doubleprime,
                         build_theta_prime, build_theta_t)
from .greedy_search import greedy_minimize
from .iso import are_isomorphic, canonical_fingerprint
from .loop_core import LoopTable, analyze, center, nuclei, read_looptab, write_looptab
from .modification import (GROUP64_COUNT, Group64, TrilinearForm, build_CHmu, build_delta,
                           build_mu, group64, group64_class, sign_matrix, squaring_vector,
                           suitable_group_census)
from .shared.errors import (EXIT_NEGATIVE, EXIT_OK, EXIT_RESOURCE, InnLoopsError, InvalidSpec,
                            UsageError)
from .shared.logging_config import get_logger, setup_logging
from .shared.models import CensusManifest, DeltaMuParams, ExperimentName, ExperimentSpec
from .shared.settings import get_settings
from .shared.store import LoopStore, dump_json, write_json

logger = get_logger(__name__)

BUILD_TARGETS = ("c", "cbar", "gbar", "theta", "theta2prime", "thetaprime", "pa64", "chmu")

_NAMED_BUILDERS: Dict[str, Callable[[], LoopTable]] = {
    "c": build_C,
    "cbar": build_Cbar,
    "gbar": build_Gbar,
    "thetaprime": build_theta_prime,
    "theta2prime": build_theta_doubleprime,
    "pa64": build_pa64,
}


class _Parser(argparse.ArgumentParser):
    """Raises UsageError instead of exiting with status 2."""

    def error(self, message: str) -> None:
        raise UsageError(f"{self.prog}: {message}")


def _emit(data) -> None:
    sys.stdout.write(dump_json(data))


def _parse_group(spec: str) -> Group64:
    """``s1,s2,s3`` with entries in 0..7, or ``class:k`` with k in 1..10."""
    if spec.startswith("class:"):
        try:
            k = int(spec[len("class:"):])
        except ValueError:
            raise UsageError(f"bad group class {spec!r}")
        return group64_class(k)
    try:
        s = tuple(int(v) for v in spec.split(","))
    except ValueError:
        raise UsageError(f"bad squaring vector {spec!r}")
    if len(s) != 3 or any(not 0 <= v < 8 for v in s):
        raise UsageError("squaring vector needs three entries in 0..7")
    return group64(s)


def _read_table(path: Path) -> LoopTable:
    if not path.is_file():
        raise UsageError(f"no such table file: {path}")
    return read_looptab(path)


def _parse_params(delta: str, mu: str) -> DeltaMuParams:
    try:
        return DeltaMuParams.from_hex(delta, mu)
    except ValueError as e:
        raise UsageError(str(e)) from e


# Commands

def run_build(args: argparse.Namespace) -> int:
    target = args.target
    if target == "theta":
        if args.t is None or not 0 <= args.t < 128:
            raise UsageError("build theta needs an index t in 0..127")
        Q = build_theta_t(args.t)
    elif target == "chmu":
        H = _parse_group(args.h)
        f = TrilinearForm.determinant() if args.form == "det" else TrilinearForm.trivial()
        params = _parse_params(args.delta, args.mu)
        Q = build_CHmu(H, f, params)
        if args.signs is not None:
            delta = build_delta(H, f, params.delta_bits)
            mu = build_mu(H, delta, params.mu_bits)
            write_json(args.signs, dict(squaring_vector=list(H.squaring), delta=params.delta_hex,
                                        mu=params.mu_hex, delta_signs=sign_matrix(delta),
                                        mu_signs=sign_matrix(mu)))
    else:
        if args.t is not None:
            raise UsageError(f"build {target} takes no index")
        Q = _NAMED_BUILDERS[target]()
    path = write_looptab(Q, args.output)
    logger.info("Table built", target=target, order=Q.n, path=str(path))
    return EXIT_OK


def run_analyze(args: argparse.Namespace) -> int:
    Q = _read_table(args.file)
    report = analyze(Q, mlt=args.mlt)
    data = report.model_dump(mode="json")
    data["digest"] = canonical_fingerprint(Q)
    _emit(data)
    return EXIT_OK


def run_greedy(args: argparse.Namespace) -> int:
    Q = _read_table(args.file)
    N = nuclei(Q)[3] if args.subloop == "nucleus" else center(Q)
    h = args.h if args.h == "auto" else _parse_int(args.h, "--h")
    final, history = greedy_minimize(Q, N, h=h, workers=args.workers,
                                     max_steps=args.max_steps)
    write_looptab(final, args.output)
    if args.history is not None:
        write_json(args.history, history.model_dump(mode="json"))
    _emit(history.model_dump(mode="json"))
    return EXIT_OK


def run_iso(args: argparse.Namespace) -> int:
    Q1, Q2 = _read_table(args.first), _read_table(args.second)
    m = are_isomorphic(Q1, Q2, node_limit=args.node_limit)
    if m is not None and args.witness is not None:
        write_json(args.witness, dict(isomorphic=True, witness=[int(v) for v in m]))
    _emit(dict(isomorphic=m is not None))
    return EXIT_OK if m is not None else EXIT_NEGATIVE


def run_groups64(args: argparse.Namespace) -> int:
    out = Path(args.out_dir)
    store = LoopStore(out)
    if args.dedup:
        manifest = suitable_group_census(workers=args.workers,
                                         store=LoopStore(get_settings().cache_dir),
                                         refresh=args.refresh)
        entries = []
        for entry in manifest.classes:
            name = f"class{entry.class_index:02d}"
            store.write_table("", name, group64(tuple(entry.squaring_vector)).table)
            entries.append(entry.model_copy(update=dict(table_file=f"{name}.tab")))
        manifest = CensusManifest(total=manifest.total, classes=entries,
                                  tool_version=manifest.tool_version)
        write_json(out / "manifest.json", manifest.model_dump(mode="json"))
        _emit(dict(total=manifest.total, classes=len(manifest.classes)))
        return EXIT_OK
    rows = []
    for code in range(GROUP64_COUNT):
        name = f"h{code:03d}"
        store.write_table("", name, group64(squaring_vector(code)).table)
        rows.append(dict(code=code, squaring_vector=list(squaring_vector(code)),
                         table_file=f"{name}.tab"))
    write_json(out / "manifest.json", dict(total=GROUP64_COUNT, groups=rows))
    _emit(dict(total=GROUP64_COUNT))
    return EXIT_OK


def run_experiment_command(args: argparse.Namespace) -> int:
    from .experiments import run_experiment

    settings = get_settings()
    try:
        spec = ExperimentSpec(name=args.name,
                              seed=args.seed if args.seed is not None else settings.seed,
                              samples=args.samples, pairs=args.pairs, workers=args.workers,
                              output=args.output, summary_csv=args.summary_csv)
    except ValidationError as e:
        raise InvalidSpec(f"invalid experiment spec: {e}") from e
    report = run_experiment(spec)
    if spec.output is None:
        _emit(report.model_dump(mode="json"))
    else:
        _emit(dict(name=spec.name.value, tool_version=report.tool_version, seed=spec.seed,
                   complete=report.complete, items=len(report.items), summary=report.summary,
                   output=str(spec.output)))
    return EXIT_OK if report.complete else EXIT_RESOURCE


def _parse_int(text: str, flag: str) -> int:
    try:
        return int(text, 0)
    except ValueError:
        raise UsageError(f"{flag} expects an integer, got {text!r}")


def _seed(text: str) -> int:
    try:
        return int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}")


def build_parser() -> argparse.ArgumentParser:
    settings = get_settings()
    parser = _Parser(prog="innloops", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", type=str.upper, default=None,
                        choices=("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"),
                        help=f"logging level (default {settings.log_level})")
    parser.add_argument("--log-console", action="store_true",
                        help="human-readable logs instead of JSON")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("build", help="construct a named loop and write it as LOOPTAB")
    p.add_argument("target", choices=BUILD_TARGETS)
    p.add_argument("t", nargs="?", type=int, default=None, help="index for 'theta' (0..127)")
    p.add_argument("--h", default="class:1",
                   help="group H for 'chmu': s1,s2,s3 or class:k (default class:1)")
    p.add_argument("--delta", default="000000", help="21-bit delta parameters, hex")
    p.add_argument("--mu", default="00", help="7-bit mu parameters, hex")
    p.add_argument("--form", choices=("det", "trivial"), default="det")
    p.add_argument("--signs", type=Path, default=None,
                   help="also write delta and mu as 64x64 sign matrices (JSON)")
    p.add_argument("-o", "--output", type=Path, required=True)
    p.set_defaults(handler=run_build)

    p = sub.add_parser("analyze", help="print the structural invariants of a table")
    p.add_argument("file", type=Path)
    p.add_argument("--mlt", action="store_true", help="also compute Mlt and Inn")
    p.set_defaults(handler=run_analyze)

    p = sub.add_parser("greedy", help="greedy descent by block sign flips")
    p.add_argument("file", type=Path)
    p.add_argument("--subloop", choices=("nucleus", "center"), default="nucleus")
    p.add_argument("--h", default="auto", help="flip element index or 'auto'")
    p.add_argument("--max-steps", type=int, default=None)
    p.add_argument("--workers", type=int, default=settings.workers)
    p.add_argument("-o", "--output", type=Path, required=True)
    p.add_argument("--history", type=Path, default=None)
    p.set_defaults(handler=run_greedy)

    p = sub.add_parser("iso", help="decide isomorphism of two tables (exit 0 or 10)")
    p.add_argument("first", type=Path)
    p.add_argument("second", type=Path)
    p.add_argument("--witness", type=Path, default=None)
    p.add_argument("--node-limit", type=int, default=None)
    p.set_defaults(handler=run_iso)

    p = sub.add_parser("groups64", help="write the 512 groups H, or one per class")
    p.add_argument("--dedup", action="store_true")
    p.add_argument("--refresh", action="store_true", help="recompute the cached census")
    p.add_argument("--out-dir", type=Path, required=True)
    p.add_argument("--workers", type=int, default=settings.workers)
    p.set_defaults(handler=run_groups64)

    p = sub.add_parser("experiment", help="run a seeded experiment")
    p.add_argument("name", choices=[e.value for e in ExperimentName])
    p.add_argument("--seed", type=_seed, default=None)
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--pairs", type=int, default=50)
    p.add_argument("--workers", type=int, default=settings.workers)
    p.add_argument("--output", type=Path, default=None)
    p.add_argument("--summary-csv", type=Path, default=None)
    p.set_defaults(handler=run_experiment_command)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    settings = get_settings()
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        setup_logging(settings.service_name, settings.log_level, settings.log_json,
                      settings.environment)
        logger.error("Usage error", error=str(e))
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code

    setup_logging(settings.service_name, args.log_level or settings.log_level,
                  settings.log_json and not args.log_console, settings.environment)
    try:
        return args.handler(args)
    except InnLoopsError as e:
        logger.error("Command failed", command=args.command, error=str(e),
                     error_type=type(e).__name__)
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
