"""Pattern summaries, attribution, success and path statistics, report rendering."""

from __future__ import annotations

import csv
import enum
import io
import statistics
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .detectors import BreakdownFinding, Detector
from .dialogue import Dialogue, IntentLabel, Participant, dumps_canonical, intent_sequence
from .interaction import InteractionModel


class Attribution(str, enum.Enum):
    CRS = "CRS"
    US = "US"
    UNATTRIBUTED = "Unattributed"


# Error kinds emitted by the bundled toy agent. Kinds missing here stay unattributed.
ERROR_KIND_SIDES: dict[str, Attribution] = {
    "ConcludeError": Attribution.CRS,
    "RemovePreferenceError": Attribution.CRS,
}

Path = tuple[IntentLabel, ...]


@dataclass(frozen=True)
class PatternSummary:
    detector: Detector
    rows: tuple[tuple[Path, int], ...]
    total: int

    def __post_init__(self):
        if self.total != sum(c for _, c in self.rows):
            raise ValueError("total must equal the sum of row counts")
        if len({p for p, _ in self.rows}) != len(self.rows):
            raise ValueError("summary rows must have distinct paths")
        if any(c < 1 for _, c in self.rows):
            raise ValueError("row counts must be positive")


@dataclass(frozen=True)
class IterationStats:
    unique_paths: int
    length_mean: float
    length_std: float
    existing_success: int
    existing_fail: int
    new_success: int
    new_fail: int


def _row_key(row: tuple[Path, int]):
    path, count = row
    return (-count, tuple(str(x) for x in path))


def summarize(detector: Detector, paths: Iterable[Path]) -> PatternSummary:
    counts = Counter(tuple(p) for p in paths)
    rows = tuple(sorted(counts.items(), key=_row_key))
    return PatternSummary(detector, rows, sum(counts.values()))


def aggregate_patterns(findings: Iterable[BreakdownFinding]) -> dict[Detector, PatternSummary]:
    by_detector: dict[Detector, list[Path]] = {det: [] for det in Detector}
    for f in findings:
        if f.flagged:
            by_detector[f.detector].append(f.path)
    return {det: summarize(det, paths) for det, paths in by_detector.items()}


def attribute(f: BreakdownFinding, kind_sides: Mapping[str, Attribution] = ERROR_KIND_SIDES) -> Attribution:
    """Attribution from the finding alone (no dialogue lookup needed)."""
    if f.detector is Detector.DIALOGUE_OF_DEAF:
        return Attribution.UNATTRIBUTED
    if f.detector is Detector.SYSTEM_FAILURE:
        return kind_sides.get(f.detail, Attribution.UNATTRIBUTED)
    if not f.path:
        return Attribution.UNATTRIBUTED
    # the utterer of the forbidden transition's target
    return Attribution.CRS if f.path[-1].participant is Participant.AGENT else Attribution.US


def attribute_breakdown(
    f: BreakdownFinding,
    d: Dialogue,
    m: InteractionModel | None = None,
    kind_sides: Mapping[str, Attribution] = ERROR_KIND_SIDES,
) -> Attribution:
    if f.dialogue_id != d.id:
        raise ValueError(f"finding belongs to {f.dialogue_id!r}, not {d.id!r}")
    return attribute(f, kind_sides)


def attribution_counts(findings: Iterable[BreakdownFinding]) -> dict[Detector, dict[Attribution, int]]:
    out = {det: {a: 0 for a in Attribution} for det in Detector}
    for f in findings:
        if f.flagged:
            out[f.detector][attribute(f)] += 1
    return out


def classify_success(d: Dialogue) -> bool:
    """True if some agent recommendation is answered by an accept in the very next user turn."""
    pending = False
    for u in d.utterances:
        if u.participant is Participant.AGENT:
            if "A_RECOMMEND" in u.intent:
                pending = True
            continue
        if pending and "U_ACCEPT" in u.intent:
            return True
        pending = False
    return False


def path_statistics(corpus: Sequence[Dialogue]) -> tuple[int, float, float]:
    if not corpus:
        raise ValueError("path statistics need a non-empty corpus")
    unique = len({tuple(intent_sequence(d)) for d in corpus})
    lengths = [len(d.utterances) for d in corpus]
    return unique, statistics.fmean(lengths), statistics.pstdev(lengths)


def compare_iterations(prev: Sequence[Dialogue], cur: Sequence[Dialogue]) -> IterationStats:
    if not cur:
        raise ValueError("current corpus is empty")
    seen = {tuple(intent_sequence(d)) for d in prev}
    buckets = Counter()
    for d in cur:
        existing = tuple(intent_sequence(d)) in seen
        buckets[(existing, classify_success(d))] += 1
    unique, mean, std = path_statistics(cur)
    return IterationStats(
        unique_paths=unique,
        length_mean=mean,
        length_std=std,
        existing_success=buckets[(True, True)],
        existing_fail=buckets[(True, False)],
        new_success=buckets[(False, True)],
        new_fail=buckets[(False, False)],
    )


# --- rendering ---

FORMATS = ("table-text", "csv", "structured")

STATS_HEADER = (
    "| # Unique conv. path | Avg. conv. length "
    "| Existing Success | Existing Not Success | New Success | New Not Success"
)


def format_mean_std(mean: float, std: float) -> str:
    return f"{mean:.2f} ± {std:.2f}"


def render_path_tuple(path: Path) -> str:
    if not path:
        return "()"
    inner = ", ".join(f"'{x.abbreviated()}'" for x in path)
    return f"({inner})"


def render_stats_row(label: str, stats: IterationStats, first_iteration: bool = False) -> str:
    existing = ("", "") if first_iteration else (str(stats.existing_success), str(stats.existing_fail))
    cells = [
        label,
        str(stats.unique_paths),
        format_mean_std(stats.length_mean, stats.length_std),
        *existing,
        str(stats.new_success),
        str(stats.new_fail),
    ]
    return " | ".join(cells)


def _table_text(summaries, attributions, stats, stats_label, first_iteration) -> str:
    lines: list[str] = []
    for det in Detector:
        s = summaries.get(det)
        if s is None:
            continue
        lines.append(f"## {det.title} ({det.value})")
        for path, count in s.rows:
            lines.append(f"{render_path_tuple(path)} | {count}")
        lines.append(f"Total | {s.total}")
        lines.append("")
    if attributions:
        lines.append("## Attribution")
        lines.append("Detector | CRS | US | Unattributed")
        for det in Detector:
            if det in attributions:
                a = attributions[det]
                lines.append(f"{det.value} | {a[Attribution.CRS]} | {a[Attribution.US]} | {a[Attribution.UNATTRIBUTED]}")
        lines.append("")
    if stats is not None:
        lines.append("## Conversational paths")
        lines.append(STATS_HEADER)
        lines.append(render_stats_row(stats_label, stats, first_iteration))
        lines.append("")
    return "\n".join(lines)


def _csv(summaries) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["detector", "path", "count"])
    for det in Detector:
        s = summaries.get(det)
        if s is None:
            continue
        for path, count in s.rows:
            writer.writerow([det.value, ",".join(str(x) for x in path), count])
    return buf.getvalue()


def parse_csv_report(text: str) -> dict[Detector, PatternSummary]:
    rows: dict[Detector, list[tuple[Path, int]]] = {det: [] for det in Detector}
    reader = csv.DictReader(io.StringIO(text))
    for rec in reader:
        path = tuple(IntentLabel.parse(x) for x in rec["path"].split(",")) if rec["path"] else ()
        rows[Detector(rec["detector"])].append((path, int(rec["count"])))
    return {det: PatternSummary(det, tuple(r), sum(c for _, c in r)) for det, r in rows.items()}


def stats_to_dict(stats: IterationStats) -> dict:
    return {
        "unique_paths": stats.unique_paths,
        "length_mean": round(stats.length_mean, 6),
        "length_std": round(stats.length_std, 6),
        "existing_success": stats.existing_success,
        "existing_fail": stats.existing_fail,
        "new_success": stats.new_success,
        "new_fail": stats.new_fail,
    }


def _structured(summaries, attributions, stats) -> str:
    doc = {
        "summaries": {
            det.value: {
                "title": det.title,
                "rows": [{"path": [str(x) for x in p], "count": c} for p, c in s.rows],
                "total": s.total,
            }
            for det, s in sorted(summaries.items(), key=lambda kv: kv[0].value)
        },
        "attribution_counts": {
            det.value: {a.value: n for a, n in counts.items()}
            for det, counts in sorted((attributions or {}).items(), key=lambda kv: kv[0].value)
        },
        "stats": stats_to_dict(stats) if stats is not None else None,
    }
    return dumps_canonical(doc)


def render_report(
    summaries: Mapping[Detector, PatternSummary],
    attributions: Mapping[Detector, Mapping[Attribution, int]] | None = None,
    stats: IterationStats | None = None,
    fmt: str = "table-text",
    stats_label: str = "Current",
    first_iteration: bool = False,
) -> str:
    if fmt == "table-text":
        return _table_text(summaries, attributions, stats, stats_label, first_iteration)
    if fmt == "csv":
        return _csv(summaries)
    if fmt == "structured":
        return _structured(summaries, attributions, stats)
    raise ValueError(f"unknown report format {fmt!r}; expected one of {', '.join(FORMATS)}")
