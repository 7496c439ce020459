"""Trace-based analysis of counterfactual communication interferometers."""

__version__ = "0.1.0"

from .adversary import EveProbe, KeyReport, eve_joint_distribution, keydist_simulate
from .bohm import BohmReport, bohm_estimate
from .errors import ConfigurationError, PostSelectionError, RegimeWarning, SizeError
from .metrics import Standard, compare, eval_asymptotic, single_particle_standard
from .modes import BeamSplitter, ModeState, chain_evolve
from .networks import NetworkSpec, build, path_amplitudes, simulate
from .oracle import exact_oracle_simulate
from .trace import BranchedState, ProbeModel, TraceReport, post_select, trace_detect_prob

__all__ = [
    "BeamSplitter",
    "BohmReport",
    "BranchedState",
    "ConfigurationError",
    "EveProbe",
    "KeyReport",
    "ModeState",
    "NetworkSpec",
    "PostSelectionError",
    "ProbeModel",
    "RegimeWarning",
    "SizeError",
    "Standard",
    "TraceReport",
    "bohm_estimate",
    "build",
    "chain_evolve",
    "compare",
    "eval_asymptotic",
    "eve_joint_distribution",
    "exact_oracle_simulate",
    "keydist_simulate",
    "path_amplitudes",
    "post_select",
    "simulate",
    "single_particle_standard",
    "trace_detect_prob",
]
