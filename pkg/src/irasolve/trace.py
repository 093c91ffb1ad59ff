"""Per-run progress traces and their CSV form."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

WORD_COLUMNS = ("mapping_words", "strategy_words", "regret_words", "aux_words",
                "cache_peak_words", "br_strategy_peak_words")


@dataclass
class TraceRow:
    iteration: int
    exploitability_sum: float
    abstract_infoset_count: int
    mapping_words: int
    strategy_words: int
    regret_words: int
    aux_words: int
    cache_peak_words: int
    br_strategy_peak_words: int
    wall_seconds: float

    @property
    def total_words(self) -> int:
        """Words the algorithm holds at this point (cache and BR peaks included)."""
        return sum(getattr(self, c) for c in WORD_COLUMNS)


COLUMNS = tuple(f.name for f in fields(TraceRow))


class RunTrace(list):
    """List of :class:`TraceRow` with strictly increasing iterations."""

    def append(self, row: TraceRow) -> None:
        if self and row.iteration <= self[-1].iteration:
            raise ValueError(f"iteration {row.iteration} does not follow {self[-1].iteration}")
        for c in WORD_COLUMNS:
            if getattr(row, c) < 0:
                raise ValueError(f"negative word count in column {c}")
        super().append(row)

    def column(self, name: str) -> list:
        return [getattr(r, name) for r in self]

    @property
    def final(self) -> TraceRow:
        return self[-1]

    def to_csv(self, path: str | Path | None = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in self:
            w.writerow([repr(v) if isinstance(v, float) else v for v in asdict(r).values()])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, source: str | Path) -> "RunTrace":
        text = Path(source).read_text() if isinstance(source, Path) or "\n" not in str(source) else source
        rows = list(csv.DictReader(io.StringIO(text)))
        out = cls()
        types = {f.name: f.type for f in fields(TraceRow)}
        for r in rows:
            vals = {}
            for k in COLUMNS:
                vals[k] = float(r[k]) if types[k] in ("float", float) else int(r[k])
            out.append(TraceRow(**vals))
        return out


def interpolate_at(trace: RunTrace, column: str, thresholds) -> list[float]:
    """Value of ``column`` when exploitability first drops to each threshold.

    Between checkpoints the column is interpolated linearly in
    exploitability; thresholds never reached give NaN.
    """
    xs = trace.column("exploitability_sum")
    ys = trace.column(column)
    out = []
    for thr in thresholds:
        val = math.nan
        for k, x in enumerate(xs):
            if x <= thr:
                if k == 0 or xs[k - 1] == x:
                    val = float(ys[k])
                else:
                    x0, y0 = xs[k - 1], ys[k - 1]
                    frac = (x0 - thr) / (x0 - x)
                    val = float(y0 + frac * (ys[k] - y0))
                break
        out.append(val)
    return out
