"""Event logs: parsing, encoding, labeling and descriptive statistics.

A log is read from CSV into immutable :class:`Trace` objects whose events
carry integer activity ids from a shared :class:`ActivityDictionary`.
"""

from __future__ import annotations

import csv
import math
from collections import OrderedDict
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta, timezone
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence


class LogError(Exception):
    """Base class for problems with event log input."""


class MissingColumnError(LogError):
    pass


class TimestampParseError(LogError):
    pass


class EmptyLogError(LogError):
    pass


class LabelingError(LogError):
    pass


class MissingTimestampError(LabelingError):
    pass


class UnknownOutcomeError(LabelingError):
    pass


class UnlabeledTraceError(LogError):
    pass


class ClassLabel(str, Enum):
    NORMAL = "normal"
    DEVIANT = "deviant"

    def __str__(self) -> str:
        return self.value


class ActivityDictionary:
    """Bijection between activity names and dense integer ids."""

    def __init__(self, names: Iterable[str] = ()):
        self._names: list[str] = []
        self._ids: dict[str, int] = {}
        for name in names:
            self.encode(name)

    def encode(self, name: str) -> int:
        """Return the id of ``name``, assigning the next free id if unseen."""
        idx = self._ids.get(name)
        if idx is None:
            idx = len(self._names)
            self._names.append(name)
            self._ids[name] = idx
        return idx

    def id_of(self, name: str) -> int:
        return self._ids[name]

    def name(self, idx: int) -> str:
        return self._names[idx]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self._names)

    def __len__(self) -> int:
        return len(self._names)

    def __contains__(self, name: object) -> bool:
        return name in self._ids

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ActivityDictionary) and self._names == other._names

    def __repr__(self) -> str:
        return f"ActivityDictionary({self._names!r})"


@dataclass(frozen=True)
class Event:
    activity_id: int
    timestamp: datetime | None = None


@dataclass(frozen=True)
class Trace:
    case_id: str
    events: tuple[Event, ...]
    label: ClassLabel | None = None
    attributes: Mapping[str, str] = field(default_factory=dict, compare=True)

    def __post_init__(self):
        if not self.events:
            raise ValueError(f"trace {self.case_id!r} has no events")
        stamps = [e.timestamp for e in self.events if e.timestamp is not None]
        if any(b < a for a, b in zip(stamps, stamps[1:])):
            raise ValueError(f"trace {self.case_id!r} has decreasing timestamps")

    @property
    def symbols(self) -> tuple[int, ...]:
        return tuple(e.activity_id for e in self.events)

    @property
    def is_deviant(self) -> bool:
        return self.label is ClassLabel.DEVIANT

    def duration(self) -> timedelta:
        first, last = self.events[0].timestamp, self.events[-1].timestamp
        if first is None or last is None:
            raise MissingTimestampError(
                f"trace {self.case_id!r} lacks a first or last timestamp"
            )
        return last - first

    def __len__(self) -> int:
        return len(self.events)


@dataclass(frozen=True)
class EventLog:
    traces: tuple[Trace, ...]
    activities: ActivityDictionary

    def __len__(self) -> int:
        return len(self.traces)

    def __iter__(self):
        return iter(self.traces)

    def __getitem__(self, i: int) -> Trace:
        return self.traces[i]

    @property
    def case_ids(self) -> tuple[str, ...]:
        return tuple(t.case_id for t in self.traces)

    @property
    def sequences(self) -> list[tuple[int, ...]]:
        return [t.symbols for t in self.traces]

    def labels(self) -> list[ClassLabel]:
        out = []
        for t in self.traces:
            if t.label is None:
                raise UnlabeledTraceError(f"trace {t.case_id!r} is unlabeled")
            out.append(t.label)
        return out

    def deviant_mask(self) -> list[bool]:
        return [label is ClassLabel.DEVIANT for label in self.labels()]

    def subset(self, indices: Iterable[int]) -> "EventLog":
        """Log restricted to the given trace positions (activity ids kept)."""
        return EventLog(tuple(self.traces[i] for i in indices), self.activities)

    def select_cases(self, case_ids: Iterable[str]) -> "EventLog":
        pos = {t.case_id: i for i, t in enumerate(self.traces)}
        return self.subset(pos[c] for c in case_ids)

    def with_traces(self, traces: Sequence[Trace]) -> "EventLog":
        return EventLog(tuple(traces), self.activities)

    def describe(self, symbols: Iterable[int]) -> list[str]:
        return [self.activities.name(s) for s in symbols]


@dataclass(frozen=True)
class FormatConfig:
    """CSV column mapping. ``timestamp`` and ``outcome`` may be omitted."""

    case_id: str = "case_id"
    activity: str = "activity"
    timestamp: str | None = "timestamp"
    outcome: str | None = None

    @classmethod
    def from_dict(cls, d: Mapping) -> "FormatConfig":
        return cls(**d)


def parse_timestamp(text: str) -> datetime:
    """ISO-8601 or epoch seconds; naive values are taken as UTC."""
    text = text.strip()
    try:
        seconds = float(text)
    except ValueError:
        pass
    else:
        if not math.isfinite(seconds):
            raise TimestampParseError(f"unparseable timestamp {text!r}")
        return datetime.fromtimestamp(seconds, tz=timezone.utc)
    iso = text[:-1] + "+00:00" if text.endswith("Z") else text
    try:
        ts = datetime.fromisoformat(iso)
    except ValueError:
        raise TimestampParseError(f"unparseable timestamp {text!r}") from None
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts


def format_timestamp(ts: datetime | None) -> str:
    return "" if ts is None else ts.isoformat()


def parse_event_log(path: str | Path, format_config: FormatConfig | None = None) -> EventLog:
    """Read a CSV event log, one row per event.

    Events of a case are ordered by timestamp; equal timestamps (or cases
    without timestamps) keep file order. Cases appear in order of first
    occurrence and activity ids follow first appearance in that canonical
    event order, so writing the log back and re-reading it is lossless.
    """
    fc = format_config or FormatConfig()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        if not header:
            raise EmptyLogError(f"{path}: no header row")
        required = [fc.case_id, fc.activity]
        required += [c for c in (fc.timestamp, fc.outcome) if c is not None]
        missing = [c for c in required if c not in header]
        if missing:
            raise MissingColumnError(f"{path}: missing column(s) {missing}")

        cases: OrderedDict[str, list[tuple[datetime | None, int, str]]] = OrderedDict()
        outcomes: dict[str, str] = {}
        for row_no, row in enumerate(reader):
            case = row[fc.case_id]
            ts = None
            if fc.timestamp is not None and (row[fc.timestamp] or "").strip():
                ts = parse_timestamp(row[fc.timestamp])
            cases.setdefault(case, []).append((ts, row_no, row[fc.activity]))
            if fc.outcome is not None and (row[fc.outcome] or "") != "":
                outcomes.setdefault(case, row[fc.outcome])

    if not cases:
        raise EmptyLogError(f"{path}: header only, no events")

    activities = ActivityDictionary()
    traces = []
    for case, rows in cases.items():
        if all(ts is not None for ts, _, _ in rows):
            rows = sorted(rows, key=lambda r: (r[0], r[1]))
        events = tuple(Event(activities.encode(name), ts) for ts, _, name in rows)
        attrs = {fc.outcome: outcomes[case]} if fc.outcome and case in outcomes else {}
        traces.append(Trace(case, events, None, attrs))
    return EventLog(tuple(traces), activities)


def write_event_log(log: EventLog, path: str | Path, format_config: FormatConfig | None = None) -> None:
    fc = format_config or FormatConfig()
    columns = [fc.case_id, fc.activity]
    columns += [c for c in (fc.timestamp, fc.outcome) if c is not None]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for trace in log.traces:
            for ev in trace.events:
                row = [trace.case_id, log.activities.name(ev.activity_id)]
                if fc.timestamp is not None:
                    row.append(format_timestamp(ev.timestamp))
                if fc.outcome is not None:
                    row.append(trace.attributes.get(fc.outcome, ""))
                writer.writerow(row)


@dataclass(frozen=True)
class LabelingSpec:
    """How traces are split into normal and deviant.

    ``temporal``: case duration against ``duration_threshold``; a duration
    equal to the threshold is normal. ``outcome``: a case attribute compared
    with ``deviant_value``; if ``normal_value`` is set, any other value is an
    error.
    """

    mode: str
    duration_threshold: timedelta | None = None
    deviant_when: str = "above"
    outcome_attribute: str | None = None
    deviant_value: str | None = None
    normal_value: str | None = None

    def __post_init__(self):
        if self.mode == "temporal":
            if self.duration_threshold is None:
                raise ValueError("temporal labeling needs duration_threshold")
            if self.deviant_when not in ("above", "below"):
                raise ValueError(f"deviant_when must be 'above' or 'below', got {self.deviant_when!r}")
            if self.outcome_attribute is not None or self.deviant_value is not None:
                raise ValueError("temporal labeling takes no outcome fields")
        elif self.mode == "outcome":
            if self.outcome_attribute is None or self.deviant_value is None:
                raise ValueError("outcome labeling needs outcome_attribute and deviant_value")
            if self.duration_threshold is not None:
                raise ValueError("outcome labeling takes no duration threshold")
        else:
            raise ValueError(f"unknown labeling mode {self.mode!r}")

    @classmethod
    def from_dict(cls, d: Mapping) -> "LabelingSpec":
        d = dict(d)
        minutes = d.pop("threshold_minutes", None)
        if minutes is not None:
            d["duration_threshold"] = timedelta(minutes=minutes)
        return cls(**d)


def label_trace(trace: Trace, spec: LabelingSpec) -> ClassLabel:
    if spec.mode == "temporal":
        duration = trace.duration()
        if spec.deviant_when == "above":
            deviant = duration > spec.duration_threshold
        else:
            deviant = duration < spec.duration_threshold
    else:
        value = trace.attributes.get(spec.outcome_attribute)
        if value is None:
            raise UnknownOutcomeError(
                f"trace {trace.case_id!r} has no {spec.outcome_attribute!r} value"
            )
        deviant = value == spec.deviant_value
        if not deviant and spec.normal_value is not None and value != spec.normal_value:
            raise UnknownOutcomeError(
                f"trace {trace.case_id!r}: unknown outcome {value!r}"
            )
    return ClassLabel.DEVIANT if deviant else ClassLabel.NORMAL


def label_traces(log: EventLog, spec: LabelingSpec) -> EventLog:
    return log.with_traces([replace(t, label=label_trace(t, spec)) for t in log.traces])


@dataclass(frozen=True)
class LogStats:
    normal_cases: int
    deviant_cases: int
    total_cases: int
    total_event_classes: int
    mean_event_classes_per_case: float
    mean_events_per_case: float

    def as_rows(self) -> list[tuple[str, object]]:
        return [(k, getattr(self, k)) for k in self.__dataclass_fields__]


def compute_log_stats(log: EventLog) -> LogStats:
    labels = log.labels()
    n = len(log)
    deviant = sum(label is ClassLabel.DEVIANT for label in labels)
    classes = set()
    for t in log.traces:
        classes.update(t.symbols)
    return LogStats(
        normal_cases=n - deviant,
        deviant_cases=deviant,
        total_cases=n,
        total_event_classes=len(classes),
        mean_event_classes_per_case=sum(len(set(t.symbols)) for t in log.traces) / n if n else 0.0,
        mean_events_per_case=sum(len(t) for t in log.traces) / n if n else 0.0,
    )
