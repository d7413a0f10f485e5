"""Decoders and Monte Carlo simulation for CSS quantum LDPC codes."""

from .bp import BpConfig, BpOutcome, TannerGraph, run_bp
from .codes import (
    BUILTIN_NAMES,
    CodeSector,
    CssCode,
    build_bicycle,
    build_builtin,
    build_hgp,
    build_surface,
    load_code,
    save_code,
)
from .decoders import (
    DecodeOutcome,
    OsdParams,
    RelayParams,
    RestartBeliefParams,
    decode_bp,
    decode_bp_osd,
    decode_bpgd,
    decode_relay,
    decode_restart_belief,
    early_termination,
    make_decoder,
    osd_postprocess,
)
from .sim import (
    DecoderSpec,
    PauliSample,
    SweepPoint,
    is_logical_failure_z,
    iteration_table,
    run_monte_carlo,
    sample_depolarizing,
    verify_up_to_t,
)

__all__ = [
    "BUILTIN_NAMES",
    "BpConfig",
    "BpOutcome",
    "CodeSector",
    "CssCode",
    "DecodeOutcome",
    "DecoderSpec",
    "OsdParams",
    "PauliSample",
    "RelayParams",
    "RestartBeliefParams",
    "SweepPoint",
    "TannerGraph",
    "build_bicycle",
    "build_builtin",
    "build_hgp",
    "build_surface",
    "decode_bp",
    "decode_bp_osd",
    "decode_bpgd",
    "decode_relay",
    "decode_restart_belief",
    "early_termination",
    "is_logical_failure_z",
    "iteration_table",
    "load_code",
    "make_decoder",
    "osd_postprocess",
    "run_bp",
    "run_monte_carlo",
    "sample_depolarizing",
    "save_code",
    "verify_up_to_t",
]

__version__ = "0.1.0"
