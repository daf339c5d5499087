"""fatflow: deterministic flow-level simulation of fat-tree data centers."""

from .engine import Engine, EngineParams, ProbeResult, waterfill
from .experiment import ExperimentConfig, run_experiment, run_one
from .schedulers import SchedulerDecision, SchedulerKind
from .topology import (Link, NodeId, Path, Tier, Topology, build_fat_tree,
                       build_nonblocking)
from .traffic import Flow, WorkloadSpec, generate_workload, probe_schedule

__all__ = [
    "Engine", "EngineParams", "ProbeResult", "waterfill",
    "ExperimentConfig", "run_experiment", "run_one",
    "SchedulerDecision", "SchedulerKind",
    "Link", "NodeId", "Path", "Tier", "Topology",
    "build_fat_tree", "build_nonblocking",
    "Flow", "WorkloadSpec", "generate_workload", "probe_schedule",
]

__version__ = "0.1.0"
