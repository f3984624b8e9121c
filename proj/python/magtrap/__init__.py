"""Charged-particle escape from a flux-free magnetic region.

Thin wrapper over the C++ core: classical RK4 trajectories, the
Crank-Nicolson wavepacket solver and the scenario runner.
"""

import json

from ._magtrap import (
    FieldParams,
    Scenario,
    SolverError,
    ValidationError,
    bounding_radius,
    escape_speed,
    eval_A,
    eval_B,
    evolve,
    expectations,
    flux_check,
    initial_gaussian,
    integrate,
    load_scenario,
    parse_scenario,
    preset,
    preset_names,
)
from ._magtrap import _run_json


def run(scenario, out_dir=None, stride=None):
    """Run a scenario, write its CSV files and return the summary as a dict."""
    return json.loads(_run_json(scenario, None if out_dir is None else str(out_dir), stride))


__all__ = [
    "FieldParams",
    "Scenario",
    "SolverError",
    "ValidationError",
    "bounding_radius",
    "escape_speed",
    "eval_A",
    "eval_B",
    "evolve",
    "expectations",
    "flux_check",
    "initial_gaussian",
    "integrate",
    "load_scenario",
    "parse_scenario",
    "preset",
    "preset_names",
    "run",
]
