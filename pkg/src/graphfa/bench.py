"""Benchmark harness for the recognizer engines.

Protocol per size: generate the member once, do one untimed warmup run (which
also absorbs any JIT compilation), then `reps` timed runs, each on a freshly
shuffled edge list with its own derived seed.  The `drops` slowest runs are
discarded and the rest averaged.  Every run must accept; a rejection here is
a bug, not a data point.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from hashlib import sha256
from typing import Callable, IO, List, Optional, Sequence, Tuple, Union

import numpy as np

from .engine import GraphArrays
from .errors import InternalError, InvariantViolation
from .langs import compiled_dfa, generate, lang
from .recognizer import recognize_linear

CSV_COLUMNS = ("language", "mode", "edges", "mean_s", "build_s", "exec_s",
               "reps", "dropped", "seed")


@dataclass(frozen=True)
class BenchConfig:
    language: str
    sizes: Tuple[int, ...]
    reps: int = 40
    drops: int = 4
    seed: int = 0
    mode: str = "efficient"
    engine: Optional[str] = None
    variant: int = 1

    def __post_init__(self):
        lang(self.language)
        if self.mode not in ("efficient", "simple"):
            raise InvariantViolation(f"mode must be efficient or simple, got {self.mode!r}")
        if not (self.reps > self.drops >= 0):
            raise InvariantViolation(
                f"need reps > drops >= 0, got reps={self.reps} drops={self.drops}")
        if not self.sizes:
            raise InvariantViolation("need at least one size")


@dataclass(frozen=True)
class BenchEvent:
    """One timed repetition, reported to the instrumentation callback."""

    language: str
    mode: str
    edges: int
    rep: int
    shuffle_seed: int
    perm_digest: str
    total_s: float
    build_s: float
    exec_s: float


@dataclass
class SizeResult:
    language: str
    mode: str
    edges: int
    mean_s: float
    build_s: float
    exec_s: float
    reps: int
    dropped: int
    seed: int
    rep_total: Tuple[float, ...] = ()
    rep_build: Tuple[float, ...] = ()
    rep_exec: Tuple[float, ...] = ()
    dropped_reps: Tuple[int, ...] = ()

    def row(self) -> Tuple:
        return (self.language, self.mode, self.edges,
                f"{self.mean_s:.9f}", f"{self.build_s:.9f}", f"{self.exec_s:.9f}",
                self.reps, self.dropped, self.seed)


def _derived_seed(*parts: int) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


def _digest(arrays: GraphArrays) -> str:
    h = sha256()
    h.update(arrays.e_label.tobytes())
    h.update(arrays.e_att.tobytes())
    return h.hexdigest()[:16]


def run_bench(config: BenchConfig,
              instrument: Optional[Callable[[BenchEvent], None]] = None) -> List[SizeResult]:
    dfa = compiled_dfa(config.language)
    results: List[SizeResult] = []
    for size in config.sizes:
        gen_seed = _derived_seed(config.seed, size)
        arrays = generate(config.language, size, seed=gen_seed, variant=config.variant)

        warm = arrays.shuffled(_derived_seed(config.seed, size, 1 << 40))
        out = recognize_linear(dfa, warm, mode=config.mode, engine=config.engine,
                               want_witness=False)
        if not out.accepted:
            raise InternalError(
                f"benchmark warmup rejected a generated {config.language} member "
                f"of {size} edges: {out.reason}")

        totals: List[float] = []
        builds: List[float] = []
        execs: List[float] = []
        for rep in range(config.reps):
            shuffle_seed = _derived_seed(config.seed, size, rep)
            shuffled = arrays.shuffled(shuffle_seed)
            out = recognize_linear(dfa, shuffled, mode=config.mode,
                                   engine=config.engine, want_witness=False)
            if not out.accepted:
                raise InternalError(
                    f"benchmark run rejected a generated {config.language} member "
                    f"of {size} edges (rep {rep}): {out.reason}")
            totals.append(out.build_s + out.exec_s)
            builds.append(out.build_s)
            execs.append(out.exec_s)
            if instrument is not None:
                instrument(BenchEvent(
                    language=config.language, mode=config.mode, edges=size,
                    rep=rep, shuffle_seed=shuffle_seed, perm_digest=_digest(shuffled),
                    total_s=totals[-1], build_s=out.build_s, exec_s=out.exec_s))

        order = sorted(range(config.reps), key=lambda r: totals[r])
        kept = order[:config.reps - config.drops]
        dropped = tuple(sorted(order[config.reps - config.drops:]))
        results.append(SizeResult(
            language=config.language, mode=config.mode, edges=size,
            mean_s=float(np.mean([totals[r] for r in kept])),
            build_s=float(np.mean([builds[r] for r in kept])),
            exec_s=float(np.mean([execs[r] for r in kept])),
            reps=config.reps, dropped=config.drops, seed=config.seed,
            rep_total=tuple(totals), rep_build=tuple(builds),
            rep_exec=tuple(execs), dropped_reps=dropped))
    return results


def write_csv(results: Sequence[SizeResult], out: Union[str, IO[str]]) -> None:
    close = False
    if isinstance(out, str):
        out = open(out, "w", newline="")
        close = True
    try:
        w = csv.writer(out)
        w.writerow(CSV_COLUMNS)
        for r in results:
            w.writerow(r.row())
    finally:
        if close:
            out.close()


def csv_text(results: Sequence[SizeResult]) -> str:
    buf = io.StringIO()
    write_csv(results, buf)
    return buf.getvalue()


def format_table(results: Sequence[SizeResult]) -> str:
    rows = [CSV_COLUMNS] + [tuple(str(v) for v in r.row()) for r in results]
    widths = [max(len(row[i]) for row in rows) for i in range(len(CSV_COLUMNS))]
    lines = []
    for row in rows:
        lines.append("  ".join(cell.rjust(w) for cell, w in zip(row, widths)))
    return "\n".join(lines) + "\n"


def linear_fit_r2(sizes: Sequence[int], times: Sequence[float]) -> float:
    """R^2 of the least-squares line time = a*size + b."""
    x = np.asarray(sizes, dtype=float)
    y = np.asarray(times, dtype=float)
    if len(x) < 3:
        raise InvariantViolation("need at least 3 sizes for a meaningful fit")
    coef = np.polyfit(x, y, 1)
    pred = np.polyval(coef, x)
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    if ss_tot == 0.0:
        return 1.0
    return 1.0 - ss_res / ss_tot


def fit_residual(sizes: Sequence[int], times: Sequence[float], degree: int) -> float:
    """Sum of squared residuals of the best degree-`degree` polynomial."""
    x = np.asarray(sizes, dtype=float)
    y = np.asarray(times, dtype=float)
    coef = np.polyfit(x, y, degree)
    pred = np.polyval(coef, x)
    return float(np.sum((y - pred) ** 2))
