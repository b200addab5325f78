"""Reachable areas of the four motion models for a single player.

A player stands at the origin and runs at 5 m/s along x. We ask each model
where the player can be one second later, compare the enclosed areas and
write an SVG overlay next to this script.
"""

from pathlib import Path

import numpy as np

from reachset import KinematicState, polygon_area
from reachset.config import FIGURE_MODELS
from reachset.plotting import boundaries_svg

state = KinematicState(x0=(0.0, 0.0), v0=(5.0, 0.0))
dt = 1.0

# %% every model returns a 200-vertex polygon
for label, model in FIGURE_MODELS.items():
    poly = model.reachable_polygon(state, dt)
    v = poly.vertices
    print(f"{label:28s} area {polygon_area(poly):7.1f} m^2   "
          f"x-range [{v[:, 0].min():6.2f}, {v[:, 0].max():6.2f}]")

# %% the constant-speed disk ignores the current velocity; the others are
# pushed forward. The capped model is bounded by both the acceleration disk
# and the top speed, so it is never larger than the constant-acceleration one.
capped, accel = FIGURE_MODELS["(c) capped acceleration"], FIGURE_MODELS["(b) constant acceleration"]
print("capped <= accel:",
      polygon_area(capped.reachable_polygon(state, dt)) <= polygon_area(accel.reachable_polygon(state, dt)))

# %% a single boundary point: straight ahead, phi = 0
for label, model in FIGURE_MODELS.items():
    print(label, np.round(model.boundary_point(state, dt, 0.0), 3))

out = Path(__file__).with_name("reachable_areas.svg")
out.write_text(boundaries_svg(FIGURE_MODELS, state, dt))
print("wrote", out)
