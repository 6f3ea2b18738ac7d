"""Deterministic aerial-haptics simulator and evaluation harness.

A drone flies to virtual objects under language-conditioned 7D
velocity+haptic actions; tactile patterns render through two inverse
five-bar linkage arrays; a network-served policy boundary stands in for
the learned model. Everything is seeded and bit-reproducible.
"""

from .core import (ActionVector, DroneState, FrameRaster, HapticPattern,
                   Observation, Shape, Texture, VibrationLevel, VirtualObject,
                   action_to_list, clamp_action, parse_action)
from .evaluation import (FlightCriteria, FlightOutcome, OutcomeClass,
                         aggregate_confusion, classify_flight, decode_pattern,
                         flight_metrics, run_flight_suite, run_generalization)
from .linkage import (ArrayCommand, LinkageGeometry, ServoAngles,
                      forward_kinematics, haptic_to_array_commands,
                      inverse_kinematics, render_pattern, workspace_contains)
from .loop import ControlLoop, run_closed_loop
from .policy import (OracleConfig, OraclePolicy, PolicyInterface, RemotePolicy,
                     ZeroPolicy, oracle_act, parse_instruction, resolve_target)
from .world import (SceneConfig, SimConfig, Trajectory, WorldState,
                    contact_query, render_topdown, spawn, step_control)

__version__ = "0.1.0"
