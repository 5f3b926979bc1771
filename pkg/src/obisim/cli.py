"""Command-line entry point: ``obisim run-day | exp1 | exp2 | analyze``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Sequence

from . import analysis, harness
from .analysis import AnalysisError, atomic_write
from .config import ConfigError, ScenarioConfig, load_config
from .kernel import CausalityError

log = logging.getLogger("obisim")

DAYS_HEADER = "day_seed,grid_latency_ns,rank_ties,mark_price_cents,events,messages,trades"


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage errors exit 2 with a one-line diagnostic
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def days_csv(days: Sequence[harness.DayResult]) -> str:
    lines = [DAYS_HEADER]
    for d in days:
        grid = "" if d.grid_latency_ns is None else str(d.grid_latency_ns)
        lines.append(f"{d.day_seed},{grid},{int(d.rank_ties)},{d.mark_price},{d.events},{d.messages},{d.trades}")
    return "\n".join(lines) + "\n"


def _write_results(out: Path, days: Sequence[harness.DayResult]) -> None:
    atomic_write(out / "results.csv", harness.results_csv(days))
    atomic_write(out / "days.csv", days_csv(days))


def _cmd_run_day(args: argparse.Namespace, cfg: ScenarioConfig) -> None:
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    day = harness.run_day(cfg, record_log=True)
    out = Path(args.out)
    _write_results(out, [day])
    atomic_write(out / "event_log.csv", day.event_log.dumps())
    atomic_write(out / "tape.csv", "\n".join(day.tape) + "\n")
    atomic_write(out / "fundamental.csv", "\n".join(day.fundamental_trace) + "\n")
    log.info("day %d: %d events, %d trades, %.1fs", day.day_seed, day.events, day.trades, day.wall_seconds)


def _cmd_exp1(args: argparse.Namespace, cfg: ScenarioConfig) -> None:
    days = harness.run_experiment1(cfg, args.grid, args.days, args.workers)
    _write_results(Path(args.out), days)


def _cmd_exp2(args: argparse.Namespace, cfg: ScenarioConfig) -> None:
    days = harness.run_experiment2(cfg, args.days, args.workers)
    _write_results(Path(args.out), days)


def _cmd_analyze(args: argparse.Namespace) -> None:
    rows = analysis.read_results(args.results)
    for path in analysis.analyze(rows, args.by, args.out).values():
        log.info("wrote %s", path)


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _nonneg(text: str) -> int:
    value = int(float(text))
    if value < 0:
        raise argparse.ArgumentTypeError(f"latency must be non-negative, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="obisim", description="Latency and order-book-imbalance market simulations.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run-day", help="simulate one day and write results plus full logs")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, help="override kernel.seed")

    p = sub.add_parser("exp1", help="fixed-control latency sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--grid", type=_nonneg, nargs="+", help="experimental latencies in ns (default: harness.latency_grid)")
    p.add_argument("--days", type=_positive)
    p.add_argument("--workers", type=_positive, default=1)
    p.add_argument("--out", required=True)

    p = sub.add_parser("exp2", help="independent days with freshly sampled OBI latencies")
    p.add_argument("--config", required=True)
    p.add_argument("--days", type=_positive)
    p.add_argument("--workers", type=_positive, default=1)
    p.add_argument("--out", required=True)

    p = sub.add_parser("analyze", help="rank or latency tables, box statistics and correlation")
    p.add_argument("--results", required=True)
    p.add_argument("--by", choices=("rank", "latency"), required=True)
    p.add_argument("--out", required=True)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "analyze":
            _cmd_analyze(args)
        else:
            cfg = load_config(args.config)
            {"run-day": _cmd_run_day, "exp1": _cmd_exp1, "exp2": _cmd_exp2}[args.command](args, cfg)
    except (ConfigError, AnalysisError, CausalityError, OSError) as exc:
        print(f"obisim {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
