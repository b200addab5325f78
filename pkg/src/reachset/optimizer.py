"""Parameter search for motion models.

Continuous parameters are tuned by Bayesian optimisation: a Gaussian-process
surrogate with a Matern-5/2 kernel over the unit-scaled box, expected
improvement as acquisition, and a scrambled Sobol initial design. Discrete
parameters are handled by running one continuous search per combination.
"""

from __future__ import annotations

import csv
import itertools
import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.stats import norm, qmc

from .ingest import TrailSet
from .models import ConstantAccel, ConstantSpeed, CappedAccel, MotionModel, TwoSegment
from .validation import ValidationConfig, validate

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 60
DEFAULT_INITIAL = 10


class OptimizationError(ValueError):
    pass


def default_bounds(dt: float = 1.0) -> dict[str, tuple[float, float]]:
    return {
        "v_max": (4.0, 15.0),
        "a_max": (1.0, 30.0),
        "t_inert": (0.01, 0.9 * dt),
        "v_const": (2.0, 12.0),
    }


@dataclass(frozen=True)
class ParamSpace:
    continuous: dict[str, tuple[float, float]]
    discrete: dict[str, tuple] = field(default_factory=dict)

    def __post_init__(self):
        for name, (lo, hi) in self.continuous.items():
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise OptimizationError(f"invalid bounds for {name}: ({lo}, {hi})")
        for name, values in self.discrete.items():
            if not len(values):
                raise OptimizationError(f"discrete parameter {name} has no values")

    def combinations(self) -> list[dict]:
        names = sorted(self.discrete)
        return [dict(zip(names, vals)) for vals in itertools.product(*(self.discrete[n] for n in names))]


@dataclass(frozen=True)
class ModelFamily:
    """A motion model class plus the mapping from search vectors to instances."""

    name: str
    build: Callable[[dict, dict], MotionModel]
    active: Callable[[dict], tuple[str, ...]]
    discrete: dict[str, tuple] = field(default_factory=dict)

    def space(self, dt: float = 1.0, bounds: Mapping | None = None) -> ParamSpace:
        names = set()
        for combo in ParamSpace({}, self.discrete).combinations():
            names.update(self.active(combo))
        b = {**default_bounds(dt), **(bounds or {})}
        return ParamSpace({n: tuple(b[n]) for n in sorted(names)}, dict(self.discrete))


def _two_segment_active(combo):
    names = ["t_inert"]
    if not combo["keep_initial"] or not combo["limits"]:
        names.append("v_const")
    if combo["limits"]:
        names += ["a_max", "v_max"]
    return tuple(names)


def _two_segment_build(combo, x):
    limited = combo["limits"]
    return TwoSegment(
        t_inert=x["t_inert"], keep_initial=bool(combo["keep_initial"]),
        v_const=x.get("v_const"),
        a_max=x["a_max"] if limited else None,
        v_max=x["v_max"] if limited else None,
    )


FAMILIES: dict[str, ModelFamily] = {
    "constant_speed": ModelFamily("constant_speed", lambda c, x: ConstantSpeed(x["v_max"]),
                                  lambda c: ("v_max",)),
    "constant_accel": ModelFamily("constant_accel", lambda c, x: ConstantAccel(x["a_max"]),
                                  lambda c: ("a_max",)),
    "capped_accel": ModelFamily("capped_accel", lambda c, x: CappedAccel(x["a_max"], x["v_max"]),
                                lambda c: ("a_max", "v_max")),
    "two_segment": ModelFamily("two_segment", _two_segment_build, _two_segment_active,
                               {"keep_initial": (True, False), "limits": (True, False)}),
}


def get_family(name: str) -> ModelFamily:
    try:
        return FAMILIES[name]
    except KeyError:
        raise OptimizationError(f"unknown model family {name!r}; expected one of {sorted(FAMILIES)}") from None


@dataclass
class OptimizationResult:
    family: str
    best_params: MotionModel | None
    best_score: float
    evaluations: int
    trace: list[tuple[MotionModel, float]]
    runs: list["OptimizationResult"] = field(default_factory=list)
    combo: dict = field(default_factory=dict)

    @property
    def best_inverse_score(self) -> float:
        return 1.0 / self.best_score if self.best_score > 0 else math.inf

    def to_dict(self) -> dict:
        d = {
            "family": self.family,
            "best_params": self.best_params.to_dict() if self.best_params else None,
            "best_score": self.best_score,
            "best_score_inverse_m2": self.best_inverse_score if self.best_score > 0 else None,
            "evaluations": self.evaluations,
        }
        if self.combo:
            d["combo"] = self.combo
        if self.runs:
            d["runs"] = [r.to_dict() for r in self.runs]
        return d

    def write_trace(self, path) -> None:
        names = sorted({k for m, _ in self.trace for k in m.to_dict() if k != "model"})
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["step", "model", *names, "score"])
            for i, (m, s) in enumerate(self.trace):
                p = m.to_dict()
                w.writerow([i, p["model"], *(p.get(k, "") for k in names), repr(s)])


def expected_improvement(mu, sigma, best, xi=0.01):
    sigma = np.maximum(sigma, 1e-12)
    z = (mu - best - xi) / sigma
    return (mu - best - xi) * norm.cdf(z) + sigma * norm.pdf(z)


def _sobol(engine, n):
    with warnings.catch_warnings():
        # sample sizes are not always powers of two
        warnings.simplefilter("ignore", UserWarning)
        return engine.random(n)


def _fit_gp(X, y, seed):
    from sklearn.gaussian_process import GaussianProcessRegressor
    from sklearn.gaussian_process.kernels import ConstantKernel, Matern

    kernel = ConstantKernel(1.0, (1e-3, 1e3)) * Matern(
        length_scale=np.full(X.shape[1], 0.2), length_scale_bounds=(1e-3, 10.0), nu=2.5)
    gp = GaussianProcessRegressor(kernel=kernel, alpha=1e-6, normalize_y=True,
                                  n_restarts_optimizer=2, random_state=seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        gp.fit(X, y)
    return gp


def bayes_maximize(objective: Callable[[np.ndarray], float], lower, upper, budget: int,
                   seed: int = 0, n_initial: int = DEFAULT_INITIAL,
                   initial_points: Sequence[Sequence[float]] = (), xi: float = 0.01,
                   n_candidates: int = 2048):
    """Maximise ``objective`` over the box ``[lower, upper]`` with ``budget`` calls.

    The first ``n_initial`` evaluations are ``initial_points`` followed by a
    scrambled Sobol design. Each later point maximises expected improvement
    over a Sobol candidate set, polished with L-BFGS-B from the best few
    candidates. Returns the evaluated points and values in call order.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    d = len(lower)
    if budget < 1 or budget < n_initial:
        raise OptimizationError(f"budget {budget} is smaller than the initial design ({n_initial})")
    rng = np.random.default_rng(seed)
    span = upper - lower

    init = [(np.asarray(p, dtype=float) - lower) / span for p in initial_points]
    if len(init) > n_initial:
        raise OptimizationError("more initial points than the initial design size")
    n_sobol = n_initial - len(init)
    cand_gen = qmc.Sobol(d, scramble=True, seed=rng)
    if n_sobol:
        init.extend(_sobol(qmc.Sobol(d, scramble=True, seed=rng), n_sobol))

    X: list[np.ndarray] = []
    y: list[float] = []

    def call(u):
        u = np.clip(u, 0.0, 1.0)
        X.append(u)
        y.append(float(objective(lower + u * span)))

    for u in init:
        call(np.asarray(u))

    while len(y) < budget:
        Xa, ya = np.array(X), np.array(y)
        best = ya.max()
        if np.ptp(ya) == 0.0:
            # flat so far: the surrogate is uninformative, keep filling the box
            call(_sobol(cand_gen, 1)[0])
            continue
        gp = _fit_gp(Xa, ya, seed)
        scale = float(np.std(ya))
        cand = _sobol(cand_gen, n_candidates)

        def neg_ei(u):
            mu, sd = gp.predict(np.atleast_2d(u), return_std=True)
            return -expected_improvement(mu, sd, best, xi * scale)

        ei = -neg_ei(cand)
        starts = cand[np.argsort(ei)[::-1][:5]]
        best_u, best_val = starts[0], -ei.max()
        for s in starts:
            res = minimize(lambda u: float(neg_ei(u)[0]), s, method="L-BFGS-B",
                           bounds=[(0.0, 1.0)] * d)
            if res.fun < best_val:
                best_u, best_val = res.x, res.fun
        if np.min(np.linalg.norm(Xa - best_u, axis=1)) < 1e-9:
            best_u = cand[np.argsort(ei)[::-1][1]]
        call(best_u)

    return [lower + u * span for u in X], y


def optimize_continuous(family: ModelFamily | str, trails: TrailSet, cfg: ValidationConfig,
                        bounds: Mapping[str, tuple[float, float]], budget: int = DEFAULT_BUDGET,
                        seed: int = 0, combo: dict | None = None,
                        n_initial: int = DEFAULT_INITIAL,
                        initial_points: Sequence[Mapping[str, float]] = ()) -> OptimizationResult:
    """Bayesian optimisation of the continuous parameters for one discrete combination."""
    if isinstance(family, str):
        family = get_family(family)
    combo = dict(combo or {})
    names = family.active(combo)
    missing = [n for n in names if n not in bounds]
    if missing:
        raise OptimizationError(f"no bounds given for {missing}")
    box = ParamSpace({n: tuple(bounds[n]) for n in names})
    lower = [box.continuous[n][0] for n in names]
    upper = [box.continuous[n][1] for n in names]
    if "t_inert" in names and upper[names.index("t_inert")] >= float(np.min(trails.dt)):
        raise OptimizationError("t_inert upper bound must stay below the trail horizon dt")

    trace: list[tuple[MotionModel, float]] = []

    def objective(x):
        model = family.build(combo, dict(zip(names, map(float, x))))
        score = validate(model, trails, cfg).score
        trace.append((model, score))
        return score

    points = [[p[n] for n in names] for p in initial_points]
    bayes_maximize(objective, lower, upper, budget, seed=seed, n_initial=n_initial,
                   initial_points=points)
    best_i = int(np.argmax([s for _, s in trace]))
    best_model, best_score = trace[best_i]
    log.info("%s %s: best score %.6g after %d evaluations", family.name, combo, best_score, len(trace))
    return OptimizationResult(family.name, best_model, best_score, len(trace), trace, combo=combo)


def optimize_model_family(family: ModelFamily | str, trails: TrailSet, cfg: ValidationConfig,
                          space: ParamSpace | None = None, budget: int | None = None,
                          seed: int = 0, n_initial: int = DEFAULT_INITIAL) -> OptimizationResult:
    """One continuous search per discrete combination; the total budget is split evenly."""
    if isinstance(family, str):
        family = get_family(family)
    dt = float(trails.dt[0])
    space = space or family.space(dt)
    combos = space.combinations()
    if budget is None:
        budget = DEFAULT_BUDGET * len(combos)
    per_run = budget // len(combos)
    runs = [
        optimize_continuous(family, trails, cfg, space.continuous, per_run, seed=seed + i,
                            combo=combo, n_initial=min(n_initial, per_run))
        for i, combo in enumerate(combos)
    ]
    best = max(runs, key=lambda r: r.best_score)
    trace = [t for r in runs for t in r.trace]
    return OptimizationResult(family.name, best.best_params, best.best_score, len(trace), trace,
                              runs=runs if len(runs) > 1 else [], combo=best.combo)


def select_best_model(results: Mapping[str, OptimizationResult]) -> tuple[str, OptimizationResult]:
    """Family with the highest score; ties go to fewer parameters, then by name."""
    if not results:
        raise OptimizationError("no optimisation results to choose from")

    def key(item):
        name, res = item
        n_params = res.best_params.n_params if res.best_params is not None else math.inf
        return (-res.best_score, n_params, name)

    return min(results.items(), key=key)
