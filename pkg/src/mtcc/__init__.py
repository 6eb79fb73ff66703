"""Multi-transmitter decentralized coded caching over finite-field linear networks."""

from .analytics import delay_hybrid_L1, delay_infinite, delay_tdma, finite_delay, fit_gamma, hybrid_superior
from .channel import LinearNetwork, sample_network, transmit
from .content import (
    CacheMap,
    FileLibrary,
    PieceTable,
    SystemConfig,
    build_piece_table,
    distinct_demands,
    piece_length_distribution,
    random_library,
)
from .decoder import decode_user, received_streams, verify_all
from .delivery import TransmissionSchedule, coding_delay_of_schedule, schedule_delivery, schedule_tdma
from .experiments import ExperimentSpec, emit_results, run_monte_carlo, run_trial, sweep_figure
from .gf import GF, field
from .placement import place_centralized, place_decentralized, place_hybrid

__version__ = "0.1.0"

__all__ = [
    "CacheMap", "ExperimentSpec", "FileLibrary", "GF", "LinearNetwork", "PieceTable", "SystemConfig",
    "TransmissionSchedule", "build_piece_table", "coding_delay_of_schedule", "decode_user", "delay_hybrid_L1",
    "delay_infinite", "delay_tdma", "distinct_demands", "emit_results", "field", "finite_delay", "fit_gamma",
    "hybrid_superior", "piece_length_distribution", "place_centralized", "place_decentralized", "place_hybrid",
    "random_library", "received_streams", "run_monte_carlo", "run_trial", "sample_network", "schedule_delivery",
    "schedule_tdma", "sweep_figure", "transmit", "verify_all",
]
