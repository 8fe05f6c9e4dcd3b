"""Causality toolkit: layered decaying Bloom clocks with baseline logical
clocks, a ground-truth derivation oracle, verifiable mutation transcripts,
and a deterministic simulator for an eventually consistent key-value store.
"""

from .baselines import LamportClock, VectorClock, lamport_step, vc_compare, vc_new, vc_step
from .bloomclock import BloomClock, bc_compare, bc_merge, bc_new, bc_tick
from .dag import DerivationDag
from .dobc import (
    CapacityReport,
    Dobc,
    DobcConfig,
    capacity_stats,
    default_config,
    deserialize_clock,
    dobc_compare,
    dobc_merge,
    dobc_new,
    dobc_tick,
    is_perfect_decay,
    serialize_clock,
    window_capacity,
)
from .hashing import HashConfig, hash_indices, state_digest
from .kvsim import ScenarioSpec, SimReport, SimWorld, parse_scenario, run_scenario
from .objects import MutationRegistry, Obj, create, default_registry, mutate
from .proofs import (
    TranscriptBackend,
    TranscriptProof,
    deserialize_proof,
    prove_genesis,
    prove_step,
    serialize_proof,
    verify,
)
from .ring import Ring
from .vbf import Vbf, unit_filter, vbf_dominates, vbf_sum
from .verdicts import CausalVerdict
from .workload import FpReport, WorkloadSpec, generate_workload, measure_accuracy, sample_pairs

__version__ = "0.1.0"

__all__ = [
    "BloomClock",
    "CapacityReport",
    "CausalVerdict",
    "DerivationDag",
    "Dobc",
    "DobcConfig",
    "FpReport",
    "HashConfig",
    "LamportClock",
    "MutationRegistry",
    "Obj",
    "Ring",
    "ScenarioSpec",
    "SimReport",
    "SimWorld",
    "TranscriptBackend",
    "TranscriptProof",
    "Vbf",
    "VectorClock",
    "WorkloadSpec",
    "bc_compare",
    "bc_merge",
    "bc_new",
    "bc_tick",
    "capacity_stats",
    "create",
    "default_config",
    "default_registry",
    "deserialize_clock",
    "deserialize_proof",
    "dobc_compare",
    "dobc_merge",
    "dobc_new",
    "dobc_tick",
    "generate_workload",
    "hash_indices",
    "is_perfect_decay",
    "lamport_step",
    "measure_accuracy",
    "mutate",
    "parse_scenario",
    "prove_genesis",
    "prove_step",
    "run_scenario",
    "sample_pairs",
    "serialize_clock",
    "serialize_proof",
    "state_digest",
    "unit_filter",
    "vbf_dominates",
    "vbf_sum",
    "vc_compare",
    "vc_new",
    "vc_step",
    "verify",
    "window_capacity",
]
