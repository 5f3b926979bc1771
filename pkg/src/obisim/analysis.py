"""Aggregate per-agent result rows into rank tables, box statistics and correlations."""

from __future__ import annotations

import csv
import io
import logging
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .harness import RESULT_HEADER


log = logging.getLogger(__name__)


class AnalysisError(ValueError):
    pass


@dataclass(frozen=True)
class ResultRow:
    day_seed: int
    agent_id: int
    agent_type: str
    latency_ns: int
    latency_rank: int | None
    mtm_profit_cents: int


@dataclass(frozen=True)
class GroupStats:
    group: str
    mean: float
    std: float
    n: int

    @property
    def single(self) -> bool:
        return self.n == 1


@dataclass(frozen=True)
class BoxStats:
    group: str
    mean: float
    box_lo: float
    box_hi: float
    whisk_lo: float
    whisk_hi: float
    n: int


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape:
        raise AnalysisError("pearson needs two series of equal length")
    if x.size < 2:
        raise AnalysisError("pearson needs at least two points")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise AnalysisError("correlation undefined for a constant series")
    return float(dx @ dy) / math.sqrt(sxx * syy)


def read_results(path: str | Path) -> list[ResultRow]:
    p = Path(path)
    try:
        text = p.read_text()
    except FileNotFoundError:
        raise AnalysisError(f"results file not found: {p}") from None
    return parse_results(text)


def parse_results(text: str) -> list[ResultRow]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None:
        raise AnalysisError("results file is empty")
    missing = [c for c in RESULT_HEADER if c not in header]
    if missing and missing != ["latency_rank"]:
        raise AnalysisError(f"results file lacks columns: {', '.join(missing)}")
    idx = {name: header.index(name) for name in RESULT_HEADER if name in header}
    rows = []
    for lineno, rec in enumerate(reader, start=2):
        if not rec:
            continue
        try:
            rank_field = rec[idx["latency_rank"]] if "latency_rank" in idx else ""
            rows.append(ResultRow(
                day_seed=int(rec[idx["day_seed"]]),
                agent_id=int(rec[idx["agent_id"]]),
                agent_type=rec[idx["agent_type"]],
                latency_ns=int(rec[idx["latency_ns"]]),
                latency_rank=int(rank_field) if rank_field else None,
                mtm_profit_cents=int(rec[idx["mtm_profit_cents"]]),
            ))
        except (IndexError, ValueError) as exc:
            raise AnalysisError(f"line {lineno}: {exc}") from None
    return rows


def has_ranks(rows: Iterable[ResultRow]) -> bool:
    return any(r.latency_rank is not None for r in rows)


def _stats(group: str, values: Sequence[float]) -> GroupStats:
    arr = np.asarray(values, dtype=float)
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return GroupStats(group, float(arr.mean()), std, int(arr.size))


def aggregate_by_rank(rows: Iterable[ResultRow]) -> list[GroupStats]:
    """Mean and sample std of profit in dollars per latency rank (rank 1 first)."""
    groups: dict[int, list[float]] = {}
    for r in rows:
        if r.latency_rank is not None:
            groups.setdefault(r.latency_rank, []).append(r.mtm_profit_cents / 100)
    return [_stats(str(k), groups[k]) for k in sorted(groups)]


def aggregate_by_latency(rows: Iterable[ResultRow], agent_type: str | None = None) -> list[GroupStats]:
    """Profit in dollars grouped by exact latency, optionally for one agent type."""
    groups: dict[int, list[float]] = {}
    for r in rows:
        if r.agent_type.startswith("obi") and (agent_type is None or r.agent_type == agent_type):
            groups.setdefault(r.latency_ns, []).append(r.mtm_profit_cents / 100)
    return [_stats(str(k), groups[k]) for k in sorted(groups)]


def boxstats(group: str, values: Sequence[float]) -> BoxStats:
    """Mean with a one-sigma box and two-sigma whiskers."""
    s = _stats(group, values)
    return BoxStats(group, s.mean, s.mean - s.std, s.mean + s.std,
                    s.mean - 2 * s.std, s.mean + 2 * s.std, s.n)


def latency_profit_correlation(rows: Iterable[ResultRow]) -> float:
    obi = [r for r in rows if r.agent_type.startswith("obi")]
    return pearson([r.latency_ns for r in obi], [r.mtm_profit_cents for r in obi])


def atomic_write(path: str | Path, text: str) -> None:
    """Write to a temp file in the same directory, then rename over the target."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=p.parent, prefix=f".{p.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, p)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def rank_summary_csv(stats: Sequence[GroupStats]) -> str:
    lines = ["rank,mean_profit_usd,std_profit_usd,n"]
    lines += [f"{s.group},{_fmt(s.mean)},{_fmt(s.std)},{s.n}" for s in stats]
    return "\n".join(lines) + "\n"


def boxstats_csv(boxes: Sequence[BoxStats]) -> str:
    lines = ["group,mean,box_lo,box_hi,whisk_lo,whisk_hi,n"]
    for b in boxes:
        lines.append(",".join([b.group, *map(_fmt, (b.mean, b.box_lo, b.box_hi, b.whisk_lo, b.whisk_hi)), str(b.n)]))
    return "\n".join(lines) + "\n"


def analyze(rows: list[ResultRow], by: str, out_dir: str | Path) -> dict[str, Path]:
    """Write the summary files for ``by`` in {"rank", "latency"}; returns their paths."""
    out = Path(out_dir)
    if by == "rank":
        if not has_ranks(rows):
            raise AnalysisError("--by rank needs a latency_rank column with values; this looks like preliminary output")
        groups = aggregate_by_rank(rows)
        values: dict[str, list[float]] = {}
        for r in rows:
            if r.latency_rank is not None:
                values.setdefault(str(r.latency_rank), []).append(r.mtm_profit_cents / 100)
    elif by == "latency":
        groups = aggregate_by_latency(rows)
        values = {}
        for r in rows:
            if r.agent_type.startswith("obi"):
                values.setdefault(str(r.latency_ns), []).append(r.mtm_profit_cents / 100)
    else:
        raise AnalysisError(f"unknown grouping {by!r}; use 'rank' or 'latency'")
    if not groups:
        raise AnalysisError("no OBI rows in results")

    written = {}
    summary = rank_summary_csv(groups)
    if by == "latency":
        summary = summary.replace("rank,", "latency_ns,", 1)
    name = "rank_summary.csv" if by == "rank" else "latency_summary.csv"
    atomic_write(out / name, summary)
    written[name] = out / name
    boxes = [boxstats(g.group, values[g.group]) for g in groups]
    atomic_write(out / "boxstats.csv", boxstats_csv(boxes))
    written["boxstats.csv"] = out / "boxstats.csv"
    try:
        corr = f"{latency_profit_correlation(rows):.6f}\n"
    except AnalysisError as exc:
        log.warning("correlation: %s", exc)
        corr = "nan\n"
    atomic_write(out / "correlation.txt", corr)
    written["correlation.txt"] = out / "correlation.txt"
    return written
