"""Fit every model family to data and pick a winner.

The trails come from a capped-acceleration ground truth (a = 6 m/s^2,
v_max = 8 m/s). Bayesian optimisation searches each family's parameters;
the capped family matches the generator and should win, with parameters
close to the true ones.
Runs in roughly a minute on one core.
"""

from reachset import ValidationConfig
from reachset.optimizer import get_family, optimize_model_family, select_best_model
from reachset.synthetic import SyntheticSpec, generate_trails

trails = generate_trails(SyntheticSpec(generator="capped_accel", v_true=8.0, a_true=6.0,
                                       n_trails=3000, seed=2))
cfg = ValidationConfig(hit_ratio_min=0.999)

results = {}
for name in ("constant_speed", "constant_accel", "capped_accel", "two_segment"):
    family = get_family(name)
    space = family.space(dt=1.0)
    # 25 evaluations per discrete combination keeps the demo quick
    res = optimize_model_family(family, trails, cfg, space, budget=25 * len(space.combinations()),
                                seed=0)
    results[name] = res
    print(f"{name:15s} mean area {res.best_inverse_score:7.2f} m^2  {res.best_params}")

winner, best = select_best_model(results)
print("winner:", winner, best.best_params)

# %% the full search history is kept for inspection
trace = results["capped_accel"].trace
print("capped_accel: first five evaluations")
for model, score in trace[:5]:
    print(f"  a_max={model.a_max:6.2f} v_max={model.v_max:5.2f} -> score {score:.4f}")
