"""Period distributions of archived GBPOs and space-time rasters of orbits."""

from __future__ import annotations

import csv
import io
import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import jsonschema

from pbnn.core import BinaryState


@dataclass(frozen=True)
class PeriodDistribution:
    points: tuple[tuple[int, int], ...]
    p_max: int

    @property
    def total(self) -> int:
        return self.points[-1][1] if self.points else 0


def cumulative_distribution(ep: Iterable, distinct_periods: bool = False) -> PeriodDistribution:
    """Cumulative count of archive entries with period <= x.

    ``ep`` yields archive entries (anything with a ``period``) or bare periods,
    one per CPID. With ``distinct_periods`` each period value counts once
    regardless of how many CPIDs produced it.
    """
    counts = Counter(getattr(e, "period", e) for e in ep)
    if distinct_periods:
        counts = Counter(dict.fromkeys(counts, 1))
    points = []
    running = 0
    for p in sorted(counts):
        running += counts[p]
        points.append((p, running))
    return PeriodDistribution(tuple(points), max(counts, default=0))


def _comment_lines(meta: Optional[Mapping[str, object]], prefix: str) -> list[str]:
    if not meta:
        return []
    return [f"{prefix} {k}: {v}" for k, v in meta.items()]


def export_distribution_csv(d: PeriodDistribution, path: str | Path,
                            meta: Optional[Mapping[str, object]] = None) -> None:
    """Write ``period,cumulative_count`` rows; ``meta`` becomes leading ``#`` comment lines."""
    buf = io.StringIO()
    for line in _comment_lines(meta, "#"):
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["period", "cumulative_count"])
    w.writerows(d.points)
    Path(path).write_text(buf.getvalue())


def read_distribution_csv(path: str | Path) -> PeriodDistribution:
    rows = [line for line in Path(path).read_text().splitlines() if line and not line.startswith("#")]
    reader = csv.reader(rows)
    header = next(reader)
    if header != ["period", "cumulative_count"]:
        raise ValueError(f"unexpected CSV header {header}")
    points = tuple((int(p), int(c)) for p, c in reader)
    return PeriodDistribution(points, points[-1][0] if points else 0)


def raster(traj: Sequence[BinaryState]) -> list[str]:
    """One text row per time step, ``#`` for +1 and ``.`` for -1, neuron 1 leftmost."""
    if not traj:
        raise ValueError("empty trajectory")
    return ["".join("#" if v == 1 else "." for v in x.values()) for x in traj]


def raster_pbm(traj: Sequence[BinaryState], meta: Optional[Mapping[str, object]] = None) -> str:
    """Plain (P1) portable bitmap of the raster; black pixels are +1."""
    rows = raster(traj)
    lines = ["P1"] + _comment_lines(meta, "#") + [f"{len(rows[0])} {len(rows)}"]
    lines += [" ".join("1" if c == "#" else "0" for c in row) for row in rows]
    return "\n".join(lines) + "\n"


def read_pbm(text: str) -> list[str]:
    """Inverse of :func:`raster_pbm`, back to ``#``/``.`` rows."""
    body = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    if body[0] != "P1":
        raise ValueError("not a plain PBM file")
    width, height = map(int, body[1].split())
    bits = "".join(body[2:]).replace(" ", "")
    if len(bits) != width * height:
        raise ValueError("PBM pixel count does not match its header")
    return ["".join("#" if b == "1" else "." for b in bits[r * width:(r + 1) * width]) for r in range(height)]


EP_SCHEMA = {
    "type": "object",
    "required": ["entries"],
    "properties": {
        "manifest": {"type": "object"},
        "entries": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["cpid", "period", "f1_num", "generation", "part", "seed"],
                "properties": {
                    "cpid": {"type": "string"},
                    "period": {"type": "integer", "minimum": 1},
                    "f1_num": {"type": "integer", "minimum": 1},
                    "generation": {"type": "integer", "minimum": 0},
                    "part": {"enum": [1, 2]},
                    "seed": {"type": ["integer", "null"]},
                },
            },
        },
    },
}


class SchemaError(ValueError):
    pass


def load_ep(path: str | Path) -> list[dict]:
    """Read an EP dump (``{"manifest", "entries"}`` or a bare entry list) and validate it."""
    doc = json.loads(Path(path).read_text())
    if isinstance(doc, list):
        doc = {"entries": doc}
    try:
        jsonschema.validate(doc, EP_SCHEMA)
    except jsonschema.ValidationError as e:
        where = "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in e.absolute_path)
        raise SchemaError(f"{path}: $" + where + f": {e.message}") from None
    return doc["entries"]
