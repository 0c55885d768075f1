"""Wildfire front propagation in one dimension.

Advection-diffusion-reaction fire models, front-speed estimation from PDE
runs and travelling-wave speeds by shooting on the reduced ODE system.
"""

from .front import FrontTrack, FrontTracker, TWClassification, classify_tw, estimate_speed, locate_fronts
from .harness import ScenarioReport, run_scenario, run_table
from .params import (DimensionlessParams, LinearizationFit, PhysicalParams, calibrate_lambda,
                     eval_K_dimensionless, fit_lambda, nondimensionalize)
from .pde import FieldState, Grid1D, ModelVariant, make_hot_region_ic, simulate, step
from .scenario import ConfigError, Scenario, load_scenario
from .shooting import ShootingConfig, ShootingResult, closest_approach, find_both_speeds, find_c_plus
from .twode import TWState, first_integral, integrate_backward, tw_rhs

__version__ = "0.1.0"
