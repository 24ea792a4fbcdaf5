"""Interacting elementary cellular automata under 3-color global rules."""

from globalca.eca import (
    EcaRule,
    evolve,
    representatives,
    rule_table,
    step,
    symmetry_orbit,
)
from globalca.globalrule import (
    GlobalRule,
    MixedAssignment,
    compose,
    global_evolve,
    global_step,
    pair_enumeration,
)

__all__ = [
    "EcaRule",
    "GlobalRule",
    "MixedAssignment",
    "compose",
    "evolve",
    "global_evolve",
    "global_step",
    "pair_enumeration",
    "representatives",
    "rule_table",
    "step",
    "symmetry_orbit",
]

__version__ = "0.1.0"
