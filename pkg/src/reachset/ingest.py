"""Tracking data ingestion: CSV parsing, central-difference velocities, trails.

Tracking files are wide CSVs with one row per frame and an ``x``/``y`` column
pair per player, in the style of the Metrica Sports sample data. A
:class:`TrackingSchema` describes where the columns live.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

log = logging.getLogger(__name__)

TRAIL_COLUMNS = ("x0", "y0", "vx0", "vy0", "xt", "yt", "dt")


class TrackingParseError(ValueError):
    pass


class SchemaError(ValueError):
    pass


class TrailSamplingError(ValueError):
    pass


@dataclass(frozen=True)
class TrackingSchema:
    """Column layout of a tracking CSV.

    ``players`` maps a player id to its ``(x column, y column)`` pair. Leave
    it empty to detect players from a Metrica-style header, where a named
    column is followed by an unnamed one holding the y coordinate.
    ``header_row`` is the zero-based line index holding the column names;
    earlier lines are skipped.
    """

    frame_col: str = "Frame"
    frame_rate_hz: float = 25.0
    pitch_length_m: float = 105.0
    pitch_width_m: float = 68.0
    normalized: bool = True
    players: dict[str, tuple[str, str]] = field(default_factory=dict)
    header_row: int = 0
    ball_prefix: str = "Ball"

    def __post_init__(self):
        if not self.frame_rate_hz > 0:
            raise SchemaError(f"frame_rate_hz must be positive, got {self.frame_rate_hz}")
        if not (self.pitch_length_m > 0 and self.pitch_width_m > 0):
            raise SchemaError("pitch dimensions must be positive")
        if self.header_row < 0:
            raise SchemaError("header_row must be >= 0")

    @classmethod
    def from_dict(cls, cfg: dict) -> "TrackingSchema":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(cfg) - known
        if unknown:
            raise SchemaError(f"unknown schema field(s): {sorted(unknown)}")
        cfg = dict(cfg)
        if "players" in cfg:
            players = {}
            for pid, cols in cfg["players"].items():
                if len(cols) != 2:
                    raise SchemaError(f"player {pid!r} needs exactly two columns, got {cols!r}")
                players[str(pid)] = (str(cols[0]), str(cols[1]))
            cfg["players"] = players
        return cls(**cfg)

    @classmethod
    def metrica(cls) -> "TrackingSchema":
        """Layout of the Metrica Sports sample CSVs (three header lines)."""
        return cls(header_row=2)


@dataclass(frozen=True)
class PlayerTrack:
    """Time-ordered samples of one player; NaN rows mark missing frames."""

    player_id: str
    frame_rate: float
    frames: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray | None = None

    def __post_init__(self):
        if len(self.frames) != len(self.positions):
            raise ValueError("frames and positions differ in length")
        if np.any(np.diff(self.frames) <= 0):
            raise ValueError(f"frame indices of {self.player_id} must be strictly increasing")

    @property
    def frame_period(self) -> float:
        return 1.0 / self.frame_rate

    def __len__(self):
        return len(self.frames)


@dataclass(frozen=True)
class Trail:
    x0: tuple[float, float]
    v0: tuple[float, float]
    xt: tuple[float, float]
    dt: float

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not np.all(np.isfinite(np.r_[self.x0, self.v0, self.xt, self.dt])):
            raise ValueError("trail components must be finite")


@dataclass(frozen=True)
class TrailSet:
    """Column-oriented collection of trails.

    ``x0``, ``v0`` and ``xt`` have shape ``(N, 2)``; ``dt`` has shape ``(N,)``.
    """

    x0: np.ndarray
    v0: np.ndarray
    xt: np.ndarray
    dt: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.dt)
        for name in ("x0", "v0", "xt"):
            a = getattr(self, name)
            if a.shape != (n, 2):
                raise ValueError(f"{name} must have shape ({n}, 2), got {a.shape}")
        if not np.all(self.dt > 0):
            raise ValueError("all trail horizons must be positive")
        if not (np.all(np.isfinite(self.x0)) and np.all(np.isfinite(self.v0))
                and np.all(np.isfinite(self.xt)) and np.all(np.isfinite(self.dt))):
            raise ValueError("trail components must be finite")

    @classmethod
    def from_trails(cls, trails: Iterable[Trail], provenance: dict | None = None) -> "TrailSet":
        trails = list(trails)
        return cls(
            x0=np.array([t.x0 for t in trails], dtype=float).reshape(-1, 2),
            v0=np.array([t.v0 for t in trails], dtype=float).reshape(-1, 2),
            xt=np.array([t.xt for t in trails], dtype=float).reshape(-1, 2),
            dt=np.array([t.dt for t in trails], dtype=float),
            provenance=provenance or {},
        )

    def __len__(self):
        return len(self.dt)

    def __iter__(self) -> Iterator[Trail]:
        for i in range(len(self)):
            yield self[i]

    def __getitem__(self, i) -> Trail:
        return Trail(tuple(self.x0[i]), tuple(self.v0[i]), tuple(self.xt[i]), float(self.dt[i]))

    def subset(self, idx) -> "TrailSet":
        return TrailSet(self.x0[idx], self.v0[idx], self.xt[idx], self.dt[idx],
                        dict(self.provenance))

    def as_array(self) -> np.ndarray:
        return np.column_stack([self.x0, self.v0, self.xt, self.dt])

    def save(self, path) -> tuple[Path, Path]:
        """Write ``path`` as CSV plus a ``.json`` sidecar with the provenance."""
        path = Path(path)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TRAIL_COLUMNS)
            for row in self.as_array():
                w.writerow([repr(float(v)) for v in row])
        sidecar = path.with_suffix(".json")
        sidecar.write_text(json.dumps(self.provenance, indent=2, sort_keys=True) + "\n")
        return path, sidecar

    @classmethod
    def load(cls, path) -> "TrailSet":
        path = Path(path)
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or tuple(h.strip() for h in header) != TRAIL_COLUMNS:
                raise TrackingParseError(
                    f"{path}: expected header {','.join(TRAIL_COLUMNS)}, got {header}")
            rows = []
            for lineno, row in enumerate(reader, start=2):
                if len(row) != len(TRAIL_COLUMNS):
                    raise TrackingParseError(f"{path}: row {lineno} has {len(row)} fields")
                try:
                    rows.append([float(v) for v in row])
                except ValueError:
                    raise TrackingParseError(f"{path}: row {lineno} is not numeric") from None
        data = np.array(rows, dtype=float).reshape(-1, len(TRAIL_COLUMNS))
        sidecar = path.with_suffix(".json")
        provenance = json.loads(sidecar.read_text()) if sidecar.exists() else {}
        return cls(data[:, 0:2].copy(), data[:, 2:4].copy(), data[:, 4:6].copy(),
                   data[:, 6].copy(), provenance)


def _detect_players(header: Sequence[str], schema: TrackingSchema) -> dict[str, tuple[str, str]]:
    players = {}
    for i, name in enumerate(header):
        name = name.strip()
        if not name or name == schema.frame_col:
            continue
        if i + 1 < len(header) and header[i + 1].strip() == "":
            if name.startswith(schema.ball_prefix):
                continue
            players[name] = (name, f"#{i + 1}")
    return players


def _column_index(header: Sequence[str]) -> dict[str, int]:
    index = {}
    for i, name in enumerate(header):
        index[name.strip()] = i
        index[f"#{i}"] = i
    return index


def parse_tracking(source, schema: TrackingSchema, name: str = "<stream>") -> list[PlayerTrack]:
    """Read a wide tracking CSV into one :class:`PlayerTrack` per player.

    ``source`` may be a path, a binary or text stream, or raw bytes. Empty
    coordinate cells become gaps (NaN). Ball columns are never returned.
    """
    if isinstance(source, (str, Path)):
        name = str(source)
        with open(source, "rb") as fh:
            return parse_tracking(fh.read(), schema, name)
    if isinstance(source, (bytes, bytearray)):
        text = io.StringIO(bytes(source).decode("utf-8-sig"))
    else:
        data = source.read()
        text = io.StringIO(data.decode("utf-8-sig") if isinstance(data, bytes) else data)

    reader = csv.reader(text)
    header = None
    for lineno, row in enumerate(reader, start=1):
        if lineno - 1 == schema.header_row:
            header = row
            break
    if header is None:
        raise TrackingParseError(f"{name}: missing header line {schema.header_row + 1}")

    index = _column_index(header)
    if schema.frame_col not in index:
        raise TrackingParseError(f"{name}: frame column {schema.frame_col!r} not found in header")
    players = dict(schema.players) or _detect_players(header, schema)
    if not players:
        raise TrackingParseError(f"{name}: no player columns found")
    for pid, (cx, cy) in players.items():
        for col in (cx, cy):
            if col not in index:
                raise TrackingParseError(f"{name}: column {col!r} for player {pid!r} not found in header")

    frame_i = index[schema.frame_col]
    cols = {pid: (index[cx], index[cy]) for pid, (cx, cy) in players.items()}
    scale = (np.array([schema.pitch_length_m, schema.pitch_width_m])
             if schema.normalized else np.ones(2))

    frames: list[int] = []
    coords: dict[str, list[tuple[float, float]]] = {pid: [] for pid in cols}
    for lineno, row in enumerate(reader, start=schema.header_row + 2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) < len(header):
            raise TrackingParseError(
                f"{name}: row {lineno} has {len(row)} fields, expected {len(header)}")
        try:
            frames.append(int(float(row[frame_i])))
        except ValueError:
            raise TrackingParseError(f"{name}: row {lineno} has invalid frame {row[frame_i]!r}") from None
        for pid, (ix, iy) in cols.items():
            sx, sy = row[ix].strip(), row[iy].strip()
            if not sx or not sy or sx.lower() == "nan" or sy.lower() == "nan":
                coords[pid].append((math.nan, math.nan))
                continue
            try:
                coords[pid].append((float(sx), float(sy)))
            except ValueError:
                raise TrackingParseError(
                    f"{name}: row {lineno} has non-numeric coordinates for {pid!r}") from None

    frame_arr = np.array(frames, dtype=np.int64)
    tracks = []
    for pid in cols:
        pos = np.array(coords[pid], dtype=float).reshape(-1, 2) * scale
        tracks.append(PlayerTrack(pid, schema.frame_rate_hz, frame_arr, pos))
    log.info("parsed %d frames for %d players from %s", len(frame_arr), len(tracks), name)
    return tracks


def _dense(track: PlayerTrack) -> tuple[int, np.ndarray]:
    """Positions on a contiguous frame grid starting at the first frame."""
    first = int(track.frames[0])
    grid = np.full((int(track.frames[-1]) - first + 1, 2), np.nan)
    grid[track.frames - first] = track.positions
    return first, grid


def derive_velocities(track: PlayerTrack) -> PlayerTrack:
    """Central-difference velocity ``(x[i+1] - x[i-1]) / (2 * frame_period)``.

    Neighbours are looked up by frame index, so a missing frame (absent row
    or NaN coordinates) leaves the velocity of both adjacent frames, and of
    the missing frame itself, absent.
    """
    vel = np.full_like(track.positions, np.nan)
    if len(track):
        first, grid = _dense(track)
        central = np.full_like(grid, np.nan)
        central[1:-1] = (grid[2:] - grid[:-2]) / (2.0 * track.frame_period)
        central[np.any(np.isnan(central) | np.isnan(grid), axis=1)] = np.nan
        vel = central[track.frames - first]
    return PlayerTrack(track.player_id, track.frame_rate, track.frames, track.positions, vel)


def trail_candidates(track: PlayerTrack, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Row indices ``(i, j)`` of valid trail start and end frames in ``track``."""
    steps = dt * track.frame_rate
    k = int(round(steps))
    if k < 1 or abs(steps - k) > 1e-9 * max(1.0, steps):
        raise TrailSamplingError(
            f"dt={dt} s is not a positive multiple of the frame period {track.frame_period} s")
    if track.velocities is None:
        track = derive_velocities(track)
    if not len(track):
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    first, grid = _dense(track)
    row_of = np.full(len(grid), -1, dtype=np.int64)
    row_of[track.frames - first] = np.arange(len(track))
    start = track.frames - first
    end = start + k
    inside = end < len(grid)
    j = np.where(inside, row_of[np.minimum(end, len(grid) - 1)], -1)
    ok = (
        inside & (j >= 0)
        & np.all(np.isfinite(track.positions), axis=1)
        & np.all(np.isfinite(track.velocities), axis=1)
    )
    ok[ok] &= np.all(np.isfinite(track.positions[j[ok]]), axis=1)
    return np.flatnonzero(ok), j[ok]


def extract_trails(tracks: Sequence[PlayerTrack], dt: float, n: int, seed: int,
                   source: str = "") -> TrailSet:
    """Sample ``n`` trails uniformly without replacement from all players.

    Candidates are pooled across ``tracks`` in order; the seeded generator
    picks ``n`` of them and the result keeps the candidate order.
    """
    if n < 1:
        raise TrailSamplingError(f"n must be >= 1, got {n}")
    parts = []
    for track in tracks:
        if track.velocities is None:
            track = derive_velocities(track)
        i, j = trail_candidates(track, dt)
        parts.append(np.column_stack([track.positions[i], track.velocities[i], track.positions[j]]))
    pool = np.concatenate(parts) if parts else np.empty((0, 6))
    if len(pool) < n:
        raise TrailSamplingError(f"requested {n} trails but only {len(pool)} candidates are available")
    rng = np.random.default_rng(seed)
    pick = np.sort(rng.choice(len(pool), size=n, replace=False))
    chosen = pool[pick]
    provenance = {"source": source, "seed": seed, "dt": dt, "n_trails": n,
                  "n_candidates": int(len(pool)), "n_players": len(tracks)}
    return TrailSet(chosen[:, 0:2].copy(), chosen[:, 2:4].copy(), chosen[:, 4:6].copy(),
                    np.full(n, float(dt)), provenance)
