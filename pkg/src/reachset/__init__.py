"""Validation and optimisation of reachable-area motion models for football players."""

from .geometry import Point2, Polygon, boundary_polygon, point_in_polygon, polygon_area
from .ingest import (PlayerTrack, TrackingSchema, Trail, TrailSet, derive_velocities,
                     extract_trails, parse_tracking)
from .models import (CappedAccel, ConstantAccel, ConstantSpeed, KinematicState, MotionModel,
                     TwoSegment, model_from_dict, reachable_polygon)
from .optimizer import (OptimizationResult, ParamSpace, optimize_continuous,
                        optimize_model_family, select_best_model)
from .synthetic import SyntheticSpec, analytic_optimum_constant_speed, generate_trails
from .validation import (ValidationConfig, ValidationResult, check_threshold_condition,
                         hit_ratio, precision, validate)

__version__ = "0.1.0"
