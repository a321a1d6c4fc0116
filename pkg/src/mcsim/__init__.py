"""Deterministic multi-goal participant-selection simulator.

A grid-world ride-sharing environment stepped in decision intervals,
scored on five normalized objectives (assignment distance, served trip
distance, completion time, fairness, energy), with greedy/random
baselines, an exhaustive small-instance oracle, and a line-delimited
JSON protocol for external agents.
"""
from .baselines import (
    NearestAvailableFirst,
    NearestFirst,
    OraclePolicy,
    POLICY_NAMES,
    Policy,
    RandomPolicy,
    WorkloadFirst,
    enumerate_actions,
    make_policy,
    search_bound,
    solve,
)
from .configfile import (
    config_from_mapping,
    config_to_mapping,
    load_config,
    merge_config,
    parse_config_text,
)
from .domain import (
    Action,
    EmptyPoolError,
    EmptyResultsError,
    EpisodeDoneError,
    GridCoord,
    GridMap,
    InvalidAssignmentError,
    InvalidConfigError,
    McsError,
    Observation,
    OutOfBboxError,
    Participant,
    ParticipantColumns,
    ProtocolError,
    RewardBreakdown,
    RewardWeights,
    SchemaMismatchError,
    SearchTooLargeError,
    SimConfig,
    Task,
    TaskStatus,
    Transition,
    TripFileMissingError,
    UnknownPresetError,
    Violation,
    derive_seed,
    grid_distance,
    validate_action,
)
from .generation import (
    IngestReport,
    ScriptedSource,
    TripPool,
    TripRecord,
    ingest_trip_records,
    latlon_to_grid,
    load_participant_points,
)
from .instances import atom_instance
from .protocol import ExternalPolicy, Session, serve_stdio, serve_tcp
from .reward import PRESETS, RewardScales, preset_weights, resolve_weights
from .runner import (
    EpisodeResult,
    episode_seed,
    format_report,
    load_results,
    play_episode,
    run_episodes,
    run_grid,
    summarize,
    write_results,
)
from .simulator import Event, Simulator

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
