"""Hit ratio, precision and the thresholded validation score.

A prediction is correct when the target position lies inside (or on) the
polygon the model predicts. The score is the inverse mean area of correct
predictions, or zero when the hit ratio falls below ``hit_ratio_min``.
"""

from __future__ import annotations

import json
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .geometry import contains_points, polygon_areas
from .ingest import Trail, TrailSet
from .models import DEFAULT_N_VERTICES, ModelError, MotionModel

CHUNK_SIZE = 2048


class ValidationError(ValueError):
    pass


@dataclass(frozen=True)
class ValidationConfig:
    hit_ratio_min: float = 0.99975
    n_vertices: int = DEFAULT_N_VERTICES
    threads: int = 1

    def __post_init__(self):
        if not (0.0 < self.hit_ratio_min <= 1.0):
            raise ValidationError(f"hit_ratio_min must lie in (0, 1], got {self.hit_ratio_min}")
        if self.n_vertices < 3:
            raise ValidationError(f"n_vertices must be >= 3, got {self.n_vertices}")
        if self.threads < 1:
            raise ValidationError(f"threads must be >= 1, got {self.threads}")


@dataclass(frozen=True)
class ValidationResult:
    score: float
    hit_ratio: float
    n_correct: int
    n_incorrect: int
    sum_correct_area: float
    terminated_early: bool
    n_total: int

    @property
    def inverse_score(self) -> float:
        """Mean area of correct predictions in m^2; infinite for a zero score."""
        return 1.0 / self.score if self.score > 0 else math.inf

    def to_dict(self) -> dict:
        d = asdict(self)
        d["score_inverse_m2"] = self.inverse_score if self.score > 0 else None
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def hit_ratio(n_correct: int, n_total: int) -> float:
    if n_total < 1:
        raise ValidationError("hit ratio needs at least one prediction")
    return n_correct / n_total


def precision(n_correct: int, sum_correct_area: float) -> float:
    """Inverse mean area of the correct predictions, in 1/m^2."""
    if n_correct < 1 or not sum_correct_area > 0:
        raise ValidationError("precision is undefined without a correct prediction of positive area")
    return n_correct / sum_correct_area


def miss_budget(hit_ratio_min: float, n_total: int) -> int:
    """Largest number of misses that still satisfies ``hit_ratio >= hit_ratio_min``.

    Equivalent to ``floor((1 - hit_ratio_min) * n_total)`` in exact arithmetic,
    but evaluated with the same float comparison the score uses, so that
    ``(1 - 0.9) * 10`` does not round down to a budget of zero.
    """
    k = max(0, min(n_total, math.floor((1.0 - hit_ratio_min) * n_total)))
    while k < n_total and (n_total - (k + 1)) / n_total >= hit_ratio_min:
        k += 1
    while k > 0 and (n_total - k) / n_total < hit_ratio_min:
        k -= 1
    return k


def check_threshold_condition(hit_ratio_min: float, n_outlier_estimate: float, n_trails: int) -> bool:
    """Whether ``hit_ratio_min`` tolerates the expected number of outliers."""
    if n_trails <= 0:
        return n_outlier_estimate <= 0
    return hit_ratio_min <= 1.0 - n_outlier_estimate / n_trails


def _evaluate_chunk(model: MotionModel, trails: TrailSet, sl: slice, n_vertices: int):
    x0, v0, xt, dt = trails.x0[sl], trails.v0[sl], trails.xt[sl], trails.dt[sl]
    hit = np.zeros(len(dt), dtype=bool)
    area = np.zeros(len(dt))
    ok = np.asarray(model.valid_horizon(dt), dtype=bool)
    if ok.any():
        polys = model.polygons(x0[ok], v0[ok], dt[ok], n_vertices)
        hit[ok] = contains_points(xt[ok], polys)
        area[ok] = polygon_areas(polys)
    area[~hit] = 0.0
    return hit, area


def evaluate_trail(model: MotionModel, trail: Trail, n_vertices: int = DEFAULT_N_VERTICES):
    """``(correct, area)`` for a single trail; ``area`` is None when incorrect.

    A model that cannot make a prediction for this trail counts as incorrect.
    """
    try:
        if not model.valid_horizon(trail.dt):
            return False, None
        polys = model.polygons(trail.x0, trail.v0, trail.dt, n_vertices)
    except ModelError:
        return False, None
    correct = bool(contains_points(np.asarray(trail.xt, dtype=float)[None], polys)[0])
    return (True, float(polygon_areas(polys)[0])) if correct else (False, None)


def _result(hits: int, misses: int, areas: list, n_total: int, cfg: ValidationConfig,
            early: bool) -> ValidationResult:
    total_area = math.fsum(areas)
    ratio = hit_ratio(hits, n_total) if not early else hits / max(hits + misses, 1)
    if early or ratio < cfg.hit_ratio_min or hits == 0:
        score = 0.0
    else:
        score = precision(hits, total_area)
    return ValidationResult(score, ratio, hits, misses, total_area, early, n_total)


def validate(model: MotionModel, trails: TrailSet, cfg: ValidationConfig | None = None,
             chunk_size: int = CHUNK_SIZE) -> ValidationResult:
    """Score ``model`` on ``trails``, stopping once the miss budget is exceeded.

    Trails are processed in order in chunks; within the chunk that breaks the
    budget the exact trail index is located, so the reported counts are those
    at the moment of abort. With ``cfg.threads > 1`` chunks are evaluated by a
    thread pool and reduced in trail order, giving the same result.
    """
    cfg = cfg or ValidationConfig()
    n = len(trails)
    if n < 1:
        raise ValidationError("cannot validate on an empty trail set")
    budget = miss_budget(cfg.hit_ratio_min, n)
    slices = [slice(s, min(s + chunk_size, n)) for s in range(0, n, chunk_size)]

    hits = misses = 0
    areas: list[np.ndarray] = []

    def consume(hit, area):
        nonlocal hits, misses
        chunk_misses = int(np.count_nonzero(~hit))
        if misses + chunk_misses > budget:
            # index of the miss that exceeds the budget
            cut = int(np.flatnonzero(~hit)[budget - misses]) + 1
            hits += int(np.count_nonzero(hit[:cut]))
            misses = budget + 1
            areas.append(area[:cut][hit[:cut]])
            return True
        hits += len(hit) - chunk_misses
        misses += chunk_misses
        areas.append(area[hit])
        return False

    if cfg.threads == 1 or len(slices) == 1:
        for sl in slices:
            if consume(*_evaluate_chunk(model, trails, sl, cfg.n_vertices)):
                return _result(hits, misses, np.concatenate(areas), n, cfg, True)
        return _result(hits, misses, np.concatenate(areas), n, cfg, False)

    abort = threading.Event()

    def work(sl):
        if abort.is_set():
            return None
        return _evaluate_chunk(model, trails, sl, cfg.n_vertices)

    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        futures = [pool.submit(work, sl) for sl in slices]
        for fut, sl in zip(futures, slices):
            out = fut.result()
            if out is None:
                out = _evaluate_chunk(model, trails, sl, cfg.n_vertices)
            if consume(*out):
                abort.set()
                for f in futures:
                    f.cancel()
                return _result(hits, misses, np.concatenate(areas), n, cfg, True)
    return _result(hits, misses, np.concatenate(areas), n, cfg, False)


def validate_reference(model: MotionModel, trails: TrailSet,
                       cfg: ValidationConfig | None = None) -> ValidationResult:
    """Plain full scan without early exit: every trail is evaluated, then the
    thresholded score is computed from the complete counts."""
    cfg = cfg or ValidationConfig()
    n = len(trails)
    if n < 1:
        raise ValidationError("cannot validate on an empty trail set")
    hit, area = _evaluate_chunk(model, trails, slice(0, n), cfg.n_vertices)
    hits = int(np.count_nonzero(hit))
    ratio = hits / n
    total = math.fsum(area[hit])
    score = hits / total if ratio >= cfg.hit_ratio_min and hits > 0 else 0.0
    return ValidationResult(score, ratio, hits, n - hits, total, False, n)
