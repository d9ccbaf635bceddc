"""Signal and feedback ingestion, plus the Formula 1 channel derivations."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Callable, Iterable, Mapping

import numpy as np

from .rct import Signal

M_FULL_KG = 100.0
LAPTIME_S_PER_KG = 0.033


class DataError(ValueError):
    pass


SignalStore = dict  # signal id -> Signal


@dataclass(frozen=True)
class PreferencePair:
    left: str
    right: str
    label: int = 1

    def __post_init__(self):
        if self.label not in (1, -1):
            raise DataError(f"label must be 1 or -1, got {self.label!r}")

    @property
    def winner(self) -> str:
        return self.left if self.label == 1 else self.right

    @property
    def loser(self) -> str:
        return self.right if self.label == 1 else self.left

    def flipped(self) -> PreferencePair:
        return PreferencePair(self.left, self.right, -self.label)


@dataclass(frozen=True)
class RankingDataset:
    ordered: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "ordered", tuple(self.ordered))
        if len(set(self.ordered)) != len(self.ordered):
            raise DataError("ranking contains duplicate ids")

    def pairs(self) -> list[PreferencePair]:
        """All C(P, 2) pairs, higher-ranked element on the left with label 1."""
        return [PreferencePair(a, b, 1) for a, b in combinations(self.ordered, 2)]

    def __len__(self):
        return len(self.ordered)


@dataclass(frozen=True)
class DemoDataset:
    demos: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "demos", tuple(self.demos))
        if not self.demos:
            raise DataError("demonstration set is empty")

    def __len__(self):
        return len(self.demos)


# -- signals ----------------------------------------------------------------

def read_signal_csv(path: str | Path, name: str | None = None) -> Signal:
    """Header row of channel names, then one row of decimals per time step."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r and any(cell.strip() for cell in r)]
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if len(set(header)) != len(header):
        raise DataError(f"{path}: duplicate channel names in header")
    data = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise DataError(f"{path}: row {lineno} has {len(row)} fields, expected {len(header)}")
        try:
            data.append([float(cell) for cell in row])
        except ValueError:
            raise DataError(f"{path}: non-numeric value in row {lineno}") from None
    arr = np.asarray(data, dtype=float).reshape(len(data), len(header))
    return Signal({h: arr[:, i] for i, h in enumerate(header)}, name or path.stem)


def write_signal_csv(signal: Signal, path: str | Path) -> None:
    path = Path(path)
    names = list(signal.channels)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for t in range(signal.length):
            w.writerow([repr(float(signal.channels[c][t])) for c in names])


def load_signals(path: str | Path) -> SignalStore:
    """Load a signal store.

    ``path`` may be a single CSV, a directory of CSVs (ids are file stems), or
    a JSON manifest ``{"signals": {"id": "file.csv", ...}}`` (a plain list of
    files is accepted too). Relative files resolve against the manifest.
    """
    path = Path(path)
    if path.is_dir():
        files = sorted(path.glob("*.csv"))
        if not files:
            raise DataError(f"{path}: no CSV files")
        return {f.stem: read_signal_csv(f) for f in files}
    if path.suffix.lower() == ".json":
        doc = json.loads(path.read_text(encoding="utf-8"))
        entries = doc.get("signals", doc) if isinstance(doc, dict) else doc
        if isinstance(entries, list):
            entries = {Path(p).stem: p for p in entries}
        store = {}
        for sid, rel in entries.items():
            store[sid] = read_signal_csv(path.parent / rel, sid)
        return store
    sig = read_signal_csv(path)
    return {sig.name: sig}


def min_max_normalize(
    store: SignalStore,
    group_key: Mapping[str, object] | Callable[[str], object] | None = None,
    exclude: Iterable[str] = (),
) -> SignalStore:
    """Scale each channel to [0, 1] per group: ``(x - min) / (max - min)``.

    Extremes are taken over all samples of all signals in the group; a
    constant channel maps to 0. Channels in ``exclude`` pass through.
    """
    if group_key is None:
        key = lambda sid: None  # noqa: E731
    elif callable(group_key):
        key = group_key
    else:
        key = group_key.__getitem__
    exclude = set(exclude)
    groups: dict[object, list[str]] = {}
    for sid in store:
        groups.setdefault(key(sid), []).append(sid)

    out: SignalStore = {}
    for members in groups.values():
        channels = set().union(*(store[s].channels for s in members))
        lo, hi = {}, {}
        for ch in channels:
            vals = [store[s].channels[ch] for s in members if ch in store[s].channels]
            joined = np.concatenate(vals) if vals else np.zeros(0)
            lo[ch] = float(joined.min()) if joined.size else 0.0
            hi[ch] = float(joined.max()) if joined.size else 0.0
        for s in members:
            chans = {}
            for ch, v in store[s].channels.items():
                if ch in exclude:
                    chans[ch] = v.copy()
                elif hi[ch] > lo[ch]:
                    chans[ch] = (v - lo[ch]) / (hi[ch] - lo[ch])
                else:
                    chans[ch] = np.zeros_like(v)
            out[s] = Signal(chans, store[s].name)
    return {sid: out[sid] for sid in store}


# -- Formula 1 --------------------------------------------------------------

@dataclass(frozen=True)
class LapRecord:
    t_raw: float
    t_pit: float
    lap: int
    r_lap: float
    position: float
    delta_to_lead: float
    safety_car: int

    def __post_init__(self):
        if self.t_pit < 0:
            raise DataError("pit time must be nonnegative")
        if not 0.0 <= self.r_lap <= 1.0:
            raise DataError("lap completion must lie in [0, 1]")
        if self.safety_car not in (-1, 1):
            raise DataError("safety car flag must be -1 or 1")
        if self.lap < 1:
            raise DataError("lap index is 1-based")

    def corrected_lap_time(self, c_per_lap: float) -> float:
        return fuel_corrected_lap_time(self.t_raw, self.lap, c_per_lap, self.t_pit)


def fuel_corrected_lap_time(t_raw: float, lap: int, c_per_lap: float, t_pit: float = 0.0) -> float:
    """Lap time corrected for remaining fuel mass and time spent in the pit."""
    if lap < 1:
        raise DataError("lap index is 1-based")
    return t_raw - (M_FULL_KG - c_per_lap * lap) * LAPTIME_S_PER_KG - t_pit


F1_COLUMNS = ("driver", "group", "lap", "t_raw", "t_pit", "r_lap", "position", "delta_to_lead", "safety_car")
F1_CHANNELS = ("r_lap", "t_pit", "t_lap", "p", "t_dlead", "b_sc")


def derive_f1_signals(
    laps_csv: str | Path,
    c_per_lap: float,
    normalize: bool = True,
    exclude: Iterable[str] = ("b_sc",),
) -> tuple[SignalStore, dict[str, str], dict[str, list[str]]]:
    """Turn a per-lap table into per-car signals.

    Expected columns: ``driver, group, lap, t_raw, t_pit, r_lap, position,
    delta_to_lead, safety_car`` (``group`` is typically the season). Returns
    the store (ids ``<group>_<driver>``), the id -> group map, and for each
    group the final standing (most laps first, then position on the last lap).
    """
    laps_csv = Path(laps_csv)
    with laps_csv.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = set(F1_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise DataError(f"{laps_csv}: missing columns {sorted(missing)}")
        rows = list(reader)

    cars: dict[str, list[LapRecord]] = {}
    groups: dict[str, str] = {}
    for lineno, row in enumerate(rows, start=2):
        sid = f"{row['group']}_{row['driver']}"
        try:
            rec = LapRecord(
                t_raw=float(row["t_raw"]),
                t_pit=float(row["t_pit"]),
                lap=int(row["lap"]),
                r_lap=float(row["r_lap"]),
                position=float(row["position"]),
                delta_to_lead=float(row["delta_to_lead"]),
                safety_car=int(float(row["safety_car"])),
            )
        except ValueError as exc:
            raise DataError(f"{laps_csv}: row {lineno}: {exc}") from None
        cars.setdefault(sid, []).append(rec)
        groups[sid] = row["group"]

    store: SignalStore = {}
    for sid, recs in cars.items():
        recs.sort(key=lambda r: r.lap)
        store[sid] = Signal(
            {
                "r_lap": [r.r_lap for r in recs],
                "t_pit": [r.t_pit for r in recs],
                "t_lap": [r.corrected_lap_time(c_per_lap) for r in recs],
                "p": [r.position for r in recs],
                "t_dlead": [r.delta_to_lead for r in recs],
                "b_sc": [float(r.safety_car) for r in recs],
            },
            sid,
        )
    standings: dict[str, list[str]] = {}
    for sid, recs in cars.items():
        standings.setdefault(groups[sid], []).append(sid)
    for g, ids in standings.items():
        ids.sort(key=lambda s: (-len(cars[s]), -cars[s][-1].r_lap, cars[s][-1].position, s))
    if normalize:
        store = min_max_normalize(store, groups, exclude=exclude)
    return store, groups, standings


# -- feedback ---------------------------------------------------------------

MODES = ("preferences", "ranking", "demonstrations")
_KEY_MODE = {"pairs": "preferences", "ranking": "ranking", "demos": "demonstrations"}


def parse_feedback(doc: Mapping, mode: str | None = None, store: Mapping | None = None):
    keys = [k for k in _KEY_MODE if k in doc]
    if len(keys) != 1:
        raise DataError("feedback must contain exactly one of 'pairs', 'ranking', 'demos'")
    found = _KEY_MODE[keys[0]]
    if mode is not None and mode != found:
        raise DataError(f"feedback file holds {found}, but mode {mode} was requested")
    if found == "preferences":
        pairs = []
        for item in doc["pairs"]:
            if len(item) != 3:
                raise DataError(f"pair must be [left, right, label], got {item!r}")
            left, right, label = item
            if isinstance(label, bool) or label not in (1, -1):
                raise DataError(f"bad label {label!r} in pair {item!r}")
            pairs.append(PreferencePair(str(left), str(right), int(label)))
        ids = [i for p in pairs for i in (p.left, p.right)]
        data = pairs
    elif found == "ranking":
        data = RankingDataset(tuple(str(s) for s in doc["ranking"]))
        ids = list(data.ordered)
    else:
        data = DemoDataset(tuple(str(s) for s in doc["demos"]))
        ids = list(data.demos)
    if store is not None:
        unknown = sorted({i for i in ids if i not in store})
        if unknown:
            raise DataError(f"unknown signal id(s): {', '.join(unknown)}")
    return data


def load_feedback(path: str | Path, mode: str | None = None, store: Mapping | None = None):
    """Read a feedback JSON document; see :func:`parse_feedback`."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return parse_feedback(doc, mode, store)


def feedback_mode(data) -> str:
    if isinstance(data, RankingDataset):
        return "ranking"
    if isinstance(data, DemoDataset):
        return "demonstrations"
    return "preferences"


def feedback_document(data) -> dict:
    if isinstance(data, RankingDataset):
        return {"ranking": list(data.ordered)}
    if isinstance(data, DemoDataset):
        return {"demos": list(data.demos)}
    return {"pairs": [[p.left, p.right, p.label] for p in data]}


def signal_ids(data) -> list[str]:
    """Signal ids referenced by a dataset, first-appearance order."""
    if isinstance(data, RankingDataset):
        ids = list(data.ordered)
    elif isinstance(data, DemoDataset):
        ids = list(data.demos)
    else:
        ids = [i for p in data for i in (p.left, p.right)]
    return list(dict.fromkeys(ids))


def write_valuation(path: str | Path, weights: Mapping[str, float], objective: float, status: str) -> None:
    doc = {
        "weights": {k: float(v) for k, v in weights.items()},
        "objective": float(objective) if math.isfinite(objective) else None,
        "status": status,
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=False) + "\n", encoding="utf-8")


def read_valuation(path: str | Path) -> dict[str, float]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    weights = doc.get("weights", doc)
    return {str(k): float(v) for k, v in weights.items()}
