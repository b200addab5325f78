"""Command-line driver: ``reachset {trails,validate,optimize,synth,plot}``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import config as cfgmod
from .config import ConfigError, RunConfig, load_config
from .ingest import TrackingSchema, TrailSet, extract_trails, parse_tracking
from .models import KinematicState, ModelError, model_from_dict
from .optimizer import (FAMILIES, OptimizationError, default_bounds, get_family,
                        optimize_model_family, select_best_model)
from .plotting import boundaries_svg, score_bars_svg
from .synthetic import SyntheticSpec, generate_trails
from .validation import ValidationConfig, check_threshold_condition, validate

log = logging.getLogger("reachset")


class CLIError(Exception):
    pass


def _threads(args) -> int:
    return args.threads or os.cpu_count() or 1


def _write_json(obj, out: Path | None):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)


def _load_trails(path) -> TrailSet:
    if path is None:
        raise CLIError("--trails is required")
    try:
        return TrailSet.load(path)
    except OSError as exc:
        raise CLIError(f"cannot read trails: {exc}") from None


def cmd_trails(args) -> int:
    if not args.inputs:
        raise CLIError("no tracking files given")
    schema = (TrackingSchema.from_dict(load_config(args.schema)) if args.schema
              else TrackingSchema.metrica())
    tracks = []
    for path in args.inputs:
        tracks.extend(parse_tracking(path, schema))
    ts = extract_trails(tracks, args.dt, args.n_trails, args.seed,
                        source=";".join(str(p) for p in args.inputs))
    out = args.out or Path("trails.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    csv_path, sidecar = ts.save(out)
    log.info("wrote %d trails to %s (+ %s)", len(ts), csv_path, sidecar)
    return 0


def _model_arg(spec: str):
    if spec is None:
        raise CLIError("--model is required")
    path = Path(spec)
    block = load_config(path) if path.exists() else json.loads(spec)
    if "model" not in block and len(block) == 1:
        block = next(iter(block.values()))
    return model_from_dict(block)


def cmd_validate(args) -> int:
    trails = _load_trails(args.trails)
    model = _model_arg(args.model)
    vcfg = ValidationConfig(args.hit_ratio_min, args.n_vertices, _threads(args))
    if args.n_outliers is not None and not check_threshold_condition(
            args.hit_ratio_min, args.n_outliers, len(trails)):
        log.warning("hit_ratio_min=%s does not tolerate %s expected outliers in %d trails",
                    args.hit_ratio_min, args.n_outliers, len(trails))
    result = validate(model, trails, vcfg)
    _write_json({**result.to_dict(), "model": model.to_dict()}, args.out)
    return 0


def cmd_optimize(args) -> int:
    trails = _load_trails(args.trails)
    opts = load_config(args.config) if args.config else {}
    families = args.families if args.families is not None else opts.get("families", sorted(FAMILIES))
    if not families:
        raise ConfigError("no model families to optimise")
    budget = int(opts.get("budget", args.budget))
    seed = int(opts.get("seed", args.seed))
    dt = float(trails.dt[0])
    bounds = {**default_bounds(dt), **{k: tuple(v) for k, v in opts.get("bounds", {}).items()}}
    vcfg = ValidationConfig(float(opts.get("hit_ratio_min", args.hit_ratio_min)),
                            int(opts.get("n_vertices", args.n_vertices)), _threads(args))

    out = args.out or Path("optimize")
    out.mkdir(parents=True, exist_ok=True)
    results = {}
    for name in families:
        family = get_family(name)
        space = family.space(dt, bounds)
        n_combos = len(space.combinations())
        res = optimize_model_family(family, trails, vcfg, space, budget * n_combos, seed)
        res.write_trace(out / f"trace_{name}.csv")
        results[name] = res
    winner, _ = select_best_model(results)
    _write_json({"winner": winner, "hit_ratio_min": vcfg.hit_ratio_min, "seed": seed,
                 "budget_per_combination": budget,
                 "families": {k: v.to_dict() for k, v in results.items()}},
                out / "optimize.json")
    log.info("winner: %s", winner)
    return 0


def cmd_synth(args) -> int:
    spec = SyntheticSpec(generator=args.generator, v_true=args.v_true, a_true=args.a_true,
                         t_inert_true=args.t_inert_true, n_trails=args.n_trails,
                         outlier_fraction=args.outlier_fraction,
                         outlier_offset=args.outlier_offset, seed=args.seed, dt=args.dt,
                         sampling=args.sampling)
    ts = generate_trails(spec)
    out = args.out or Path("synthetic.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    ts.save(out)
    return 0


def _inverse_scores(path: Path) -> dict[str, float]:
    doc = load_config(path)
    if "families" in doc:
        entries = doc["families"]
        if not isinstance(entries, dict):
            raise ConfigError(f"{path}: field 'families' must be an object")
        return {name: _inverse(e, path, "best_score") for name, e in entries.items()}
    if "model" not in doc or not isinstance(doc["model"], dict) or "model" not in doc["model"]:
        raise ConfigError(f"{path}: missing field 'model'")
    return {doc["model"]["model"]: _inverse(doc, path, "score")}


def _inverse(entry, path, key):
    if not isinstance(entry, dict) or key not in entry:
        raise ConfigError(f"{path}: missing field {key!r}")
    score = entry[key]
    if not isinstance(score, (int, float)):
        raise ConfigError(f"{path}: field {key!r} must be a number")
    return 1.0 / score if score > 0 else float("inf")


def cmd_plot(args) -> int:
    out = args.out or Path("figures")
    if not args.results and not args.models and not args.figure_models:
        raise ConfigError("nothing to plot: give --models, --figure-models or --results")
    out.mkdir(parents=True, exist_ok=True)
    if args.models or args.figure_models:
        if args.models:
            doc = load_config(args.models)
            if "models" not in doc:
                raise ConfigError(f"{args.models}: missing field 'models'")
            models = {label: model_from_dict(block) for label, block in doc["models"].items()}
            state = KinematicState(tuple(doc.get("x0", (0.0, 0.0))), tuple(doc.get("v0", (5.0, 0.0))))
            dt = float(doc.get("dt", args.dt))
        else:
            models, state, dt = cfgmod.FIGURE_MODELS, None, args.dt
        (out / "boundaries.svg").write_text(boundaries_svg(models, state, dt, args.n_vertices))
    if args.results:
        values = {}
        for path in args.results:
            values.update(_inverse_scores(Path(path)))
        (out / "scores.svg").write_text(score_bars_svg(values))
    return 0


def build_parser() -> argparse.ArgumentParser:
    defaults = RunConfig()
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dt", type=float, default=defaults.dt, help="trail horizon in seconds")
    common.add_argument("--hit-ratio-min", type=float, default=defaults.hit_ratio_min)
    common.add_argument("--n-trails", type=int, default=defaults.n_trails)
    common.add_argument("--n-vertices", type=int, default=defaults.n_vertices)
    common.add_argument("--seed", type=int, default=defaults.seed)
    common.add_argument("--threads", type=int, default=defaults.threads,
                        help="worker threads (default: all cores)")
    common.add_argument("--schema", type=Path, help="tracking schema (TOML/JSON)")
    common.add_argument("--out", type=Path)

    parser = argparse.ArgumentParser(prog="reachset", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("trails", parents=[common], help="sample trails from tracking CSVs")
    p.add_argument("inputs", nargs="*", type=Path)
    p.set_defaults(func=cmd_trails)

    p = sub.add_parser("validate", parents=[common], help="score one model on a trail set")
    p.add_argument("--trails", type=Path)
    p.add_argument("--model", help="model config file or inline JSON")
    p.add_argument("--n-outliers", type=float, help="expected outlier count, for a threshold warning")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("optimize", parents=[common], help="optimise model parameters")
    p.add_argument("--trails", type=Path)
    p.add_argument("--config", type=Path, help="bounds/budget/seed/families (TOML/JSON)")
    p.add_argument("--families", nargs="*", choices=sorted(FAMILIES))
    p.add_argument("--budget", type=int, default=defaults.budget,
                   help="evaluations per discrete combination")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("synth", parents=[common], help="generate synthetic trails")
    p.add_argument("--generator", default="constant_speed",
                   choices=("constant_speed", "capped_accel", "two_segment"))
    p.add_argument("--v-true", type=float, default=8.0)
    p.add_argument("--a-true", type=float)
    p.add_argument("--t-inert-true", type=float)
    p.add_argument("--outlier-fraction", type=float, default=0.0)
    p.add_argument("--outlier-offset", type=float, default=5.0)
    p.add_argument("--sampling", choices=("area", "boundary"), default="area")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("plot", parents=[common], help="write SVG figures")
    p.add_argument("--models", type=Path, help="models to overlay (TOML/JSON)")
    p.add_argument("--figure-models", action="store_true",
                   help="overlay the four built-in example models")
    p.add_argument("--results", nargs="*", type=Path, help="validate/optimize result JSONs")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("REACHSET_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CLIError, ConfigError, ModelError, OptimizationError, ValueError, OSError) as exc:
        print(f"reachset {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
