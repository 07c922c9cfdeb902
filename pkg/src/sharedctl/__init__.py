"""Performance-weighted shared control for path tracing.

A human force input and an autonomous path-following command are each
scored for smoothness and directness, weighted by those scores, summed,
and the result is scored once more before it is filtered, saturated and
sent to a velocity-controlled end effector. The package bundles the
controller, a reactive lookahead goal selector, a synthetic operator
cohort with an experiment harness, and a live teleoperation service.
"""

from .control import (
    AdmittanceState, ControlFrame, FilterState, LoopState, PerformanceBreakdown,
    admittance_step, blend, finalize, impedance_tick, performance,
    robot_command, shared_tick, standalone_tick,
)
from .follower import FollowerState, nearest_param, select_goal, sphere_radius
from .geometry import PathSpec, circle_path, load_path_file, path_point, path_tangent, plant_step
from .metrics import TrialMetrics, compute_metrics
from .operator import OperatorProfile, SyntheticOperator, default_population
from .params import ControllerParams, ImpedanceParams, Mode
from .session import (
    Scenario, StreamEngine, TrialRecord, read_telemetry, run_trial,
    stream_trial, write_telemetry,
)
from .stats import HypothesisResult, anova_oneway

__version__ = "0.1.0"
