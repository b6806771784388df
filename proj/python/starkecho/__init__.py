"""Photon-echo simulator with ac Stark phase control."""

from ._core import (
    analyze,
    build_ensemble,
    efficiency_sweep,
    oracle,
    parse_sequence,
    preset,
    preset_names,
    pulse_area,
    run,
    serialize_sequence,
    stark_phase,
    Pulse,
    Sequence,
    __version__,
)

__all__ = [
    "analyze",
    "build_ensemble",
    "efficiency_sweep",
    "oracle",
    "parse_sequence",
    "preset",
    "preset_names",
    "pulse_area",
    "run",
    "serialize_sequence",
    "stark_phase",
    "Pulse",
    "Sequence",
    "__version__",
]
