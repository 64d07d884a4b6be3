"""Deterministic simulator of blocked Floyd-Warshall APSP on an HBM3 stack
with in-bank min-plus processing elements and channel-level reducers."""

__version__ = "0.1.0"

from .graphs import (
    INF,
    EdgeList,
    TiledMatrix,
    build_distance_matrix,
    from_tile_major,
    gen_synthetic,
    load_edge_list,
    parse_edge_list,
    to_tile_major,
)
from .fw import (
    TileOpRecord,
    TilePhase,
    fw_blocked,
    fw_reference,
    min_plus,
    saturating_add,
    tile_fw,
    tile_minplus_update,
)
from .hbm import (
    HbmConfig,
    TileMap,
    default_config,
    load_config,
    map_tile_to_bank_group,
    tiles_on_bank_group,
    validate_config,
)
from .perf import (
    CostQuote,
    EnergyBreakdown,
    OpCounts,
    bpe_minplus_cycles,
    broadcast_cost,
    cpe_reduction_cost,
    energy_of,
    pivot_tile_cost,
    tile_row_pass_cost,
    tile_update_cost,
)
from .scheduler import (
    EventKind,
    PhaseEvent,
    SimResult,
    schedule_round,
    simulate,
    simulate_functional,
    utilization_report,
)

__all__ = [
    "INF",
    "EdgeList",
    "TiledMatrix",
    "TileOpRecord",
    "TilePhase",
    "HbmConfig",
    "TileMap",
    "CostQuote",
    "EnergyBreakdown",
    "OpCounts",
    "EventKind",
    "PhaseEvent",
    "SimResult",
    "build_distance_matrix",
    "from_tile_major",
    "gen_synthetic",
    "load_edge_list",
    "parse_edge_list",
    "to_tile_major",
    "fw_blocked",
    "fw_reference",
    "min_plus",
    "saturating_add",
    "tile_fw",
    "tile_minplus_update",
    "default_config",
    "load_config",
    "map_tile_to_bank_group",
    "tiles_on_bank_group",
    "validate_config",
    "bpe_minplus_cycles",
    "broadcast_cost",
    "cpe_reduction_cost",
    "energy_of",
    "pivot_tile_cost",
    "tile_row_pass_cost",
    "tile_update_cost",
    "schedule_round",
    "simulate",
    "simulate_functional",
    "utilization_report",
]
