"""Phased timeline construction and the end-to-end simulator.

Each pivot round is a sequence of stages separated by barriers:

  pivot tile -> pivot broadcast -> pivot-row/column updates (concurrent
  across bank-groups, serialized within one) -> result broadcasts ->
  remaining-tile wavefront -> per-tile channel-PE reductions.

Tiles that share a bank-group serialize FIFO in a fixed row-major order;
broadcast fill events serialize on the TSV bus; steady-state pivot-vector
streams ride inside the tile events (counts always charged, cycles hidden
under compute when broadcast_overlap is on). Rounds never overlap.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .errors import ConstraintViolation, GuardError, TimelineUnavailable
from .fw import TilePhase, fw_blocked, round_records
from .graphs import from_tile_major, to_tile_major
from .hbm import HbmConfig, TileMap, validate_config
from .perf import (
    OpCounts,
    ZERO_COUNTS,
    broadcast_cost,
    cpe_reduction_cost,
    energy_of,
    pivot_tile_cost,
    tile_row_pass_cost,
    tile_update_cost,
)

# Keep the full event list only for runs up to this many pivot rounds;
# larger sweeps aggregate counters and drop per-event records.
TIMELINE_ROUND_LIMIT = 64

# simulate_functional refuses matrices larger than this by default.
FUNCTIONAL_GUARD = 4096


class EventKind(Enum):
    PIVOT_FW = "pivot_fw"
    BROADCAST = "broadcast"
    ROW_COL_UPDATE = "row_col_update"
    REMAINING_UPDATE = "remaining_update"
    CPE_REDUCE = "cpe_reduce"


@dataclass(frozen=True)
class PhaseEvent:
    """One scheduled occupancy interval on a resource.

    resource is "bg:<id>" for bank-groups, "ch:<id>" for a channel's reducer
    and broadcast port, or "tsv" for the shared vertical bus. Events on the
    same resource never overlap in [start_cycle, end_cycle).
    """

    kind: EventKind
    k: int
    target: tuple[int, int] | None
    resource: str
    start_cycle: int
    end_cycle: int
    counts: OpCounts


@dataclass
class SimResult:
    """Totals of one simulated run plus the (optionally elided) timeline."""

    n: int
    block_size: int
    tiles_per_row: int
    total_cycles: int
    total_time_ps: int
    bulk_load_cycles: int
    counts: OpCounts
    energy: "object"
    per_bank_group_busy: list[int]
    timeline: list[PhaseEvent] | None

    @property
    def total_time_seconds(self) -> float:
        return self.total_time_ps * 1e-12


class _Builder:
    """Mutable scheduling state for one simulate() call."""

    def __init__(self, cfg: HbmConfig, tilemap: TileMap, keep_timeline: bool):
        self.cfg = cfg
        self.tilemap = tilemap
        self.keep = keep_timeline
        self.events: list[PhaseEvent] = []
        self.counts = ZERO_COUNTS
        self.busy = [0] * tilemap.total_bank_groups
        self.max_end = 0

    def emit(self, kind, k, target, resource, start, cycles, counts) -> int:
        end = start + cycles
        if self.keep:
            self.events.append(
                PhaseEvent(kind, k, target, resource, start, end, counts)
            )
        self.counts = self.counts + counts
        if resource.startswith("bg:"):
            self.busy[int(resource[3:])] += cycles
        self.max_end = max(self.max_end, end)
        return end


@lru_cache(maxsize=16384)
def _vector_quote(src_bg: int, dst_bg: int, b: int, cfg: HbmConfig):
    """Memoized single-destination broadcast quote (hot path: one or two of
    these per tile update)."""
    return broadcast_cost(src_bg, (dst_bg,), b, cfg)


def _tile_event_cycles(b: int, step_cycles: int, vec_cycles: int, overlap: bool) -> int:
    """Makespan of one tile update whose b inner-product steps each consume a
    freshly broadcast pivot vector (vec_cycles per step, possibly two vectors
    merged). With overlap, step t+1's vector rides under step t's compute."""
    if vec_cycles == 0:
        return b * step_cycles
    if overlap:
        return b * max(step_cycles, vec_cycles)
    return b * (step_cycles + vec_cycles)


def schedule_round(
    k: int,
    m: int,
    b: int,
    tilemap: TileMap,
    cfg: HbmConfig,
    round_start: int = 0,
    builder: _Builder | None = None,
) -> list[PhaseEvent]:
    """Emit the events of pivot round k, starting no earlier than round_start.

    Returns the event list (always materialized when called directly; the
    internal builder may elide storage for very large sweeps).
    """
    if builder is None:
        builder = _Builder(cfg, tilemap, keep_timeline=True)
    first_event = len(builder.events)
    pim = cfg.pim
    records = round_records(k, m)
    pivot_bg = tilemap.bank_group(k, k)

    pivot = pivot_tile_cost(b, cfg)
    update = tile_update_cost(b, cfg)
    step_cycles = b * tile_row_pass_cost(b, cfg).cycles
    overlap = pim.broadcast_overlap

    pivot_end = builder.emit(
        EventKind.PIVOT_FW, k, (k, k), f"bg:{pivot_bg}",
        round_start, pivot.cycles, pivot.counts,
    )

    p2 = [r for r in records if r.phase in (TilePhase.PIVOT_ROW, TilePhase.PIVOT_COL)]
    p3 = [r for r in records if r.phase is TilePhase.REMAINING]
    if not p2:
        return builder.events[first_event:] if builder.keep else []

    tsv_free = round_start
    chan_free: dict[int, int] = {}
    group_free: dict[int, int] = {}

    # Stage the pivot's first vector at every pivot-row/column holder.
    p2_groups = sorted({tilemap.bank_group(*r.target) for r in p2})
    fill = broadcast_cost(pivot_bg, p2_groups, b, cfg)
    bcast_end = builder.emit(
        EventKind.BROADCAST, k, (k, k), "tsv",
        max(pivot_end, tsv_free), fill.cycles, fill.counts,
    )
    tsv_free = bcast_end

    def run_update(record, kind, start_floor, vec_quotes):
        bg = tilemap.bank_group(*record.target)
        vec_cycles = sum(q.cycles for q in vec_quotes)
        stream = ZERO_COUNTS
        for q in vec_quotes:
            stream = stream + q.counts.scaled(b)
        cycles = _tile_event_cycles(b, step_cycles, vec_cycles, overlap)
        start = max(start_floor, group_free.get(bg, round_start))
        end = builder.emit(
            kind, k, record.target, f"bg:{bg}", start, cycles,
            update.counts + stream,
        )
        group_free[bg] = end
        if pim.cpe_reduce_per_tile:
            ch = tilemap.channel_of(bg)
            cpe = cpe_reduction_cost(cfg.bank_groups_per_channel, cfg)
            cstart = max(end, chan_free.get(ch, round_start))
            chan_free[ch] = builder.emit(
                EventKind.CPE_REDUCE, k, record.target, f"ch:{ch}",
                cstart, cpe.cycles, cpe.counts,
            )
        return end

    # Phase 2: pivot-row and pivot-column tiles, concurrent across groups.
    p2_barrier = bcast_end
    for r in p2:
        bg = tilemap.bank_group(*r.target)
        vec = _vector_quote(pivot_bg, bg, b, cfg)
        end = run_update(r, EventKind.ROW_COL_UPDATE, bcast_end, [vec])
        p2_barrier = max(p2_barrier, end)
        if p3:
            # Stage this tile's first result vector at its wavefront consumers.
            ti, tj = r.target
            if r.phase is TilePhase.PIVOT_ROW:
                consumers = {tilemap.bank_group(i, tj) for i in range(m) if i != k}
            else:
                consumers = {tilemap.bank_group(ti, j) for j in range(m) if j != k}
            f = broadcast_cost(bg, sorted(consumers), b, cfg)
            tsv_free = builder.emit(
                EventKind.BROADCAST, k, r.target, "tsv",
                max(end, tsv_free), f.cycles, f.counts,
            )
            p2_barrier = max(p2_barrier, tsv_free)

    # Phase 3: the remaining-tile wavefront, after every source is published.
    for r in p3:
        (i, j) = r.target
        bg = tilemap.bank_group(i, j)
        vec_ik = _vector_quote(tilemap.bank_group(i, k), bg, b, cfg)
        vec_kj = _vector_quote(tilemap.bank_group(k, j), bg, b, cfg)
        run_update(r, EventKind.REMAINING_UPDATE, p2_barrier, [vec_ik, vec_kj])

    return builder.events[first_event:] if builder.keep else []


def simulate(
    n: int,
    b: int,
    cfg: HbmConfig,
    *,
    enforce_wavefront: bool = True,
    keep_timeline: bool | None = None,
) -> SimResult:
    """Simulate blocked FW on an n-vertex graph with b x b tiles.

    Purely analytic: runtime scales with the number of tiles, not n^3.
    Deterministic: identical inputs produce identical results, timeline
    included.
    """
    if n < 1 or b < 1:
        raise ValueError("n and b must be >= 1")
    m = -(-n // b)
    try:
        validate_config(cfg, m)
    except ConstraintViolation:
        if enforce_wavefront:
            raise
    tilemap = TileMap(m=m, channels=cfg.channels,
                      groups_per_channel=cfg.bank_groups_per_channel)
    if keep_timeline is None:
        keep_timeline = m <= TIMELINE_ROUND_LIMIT
    builder = _Builder(cfg, tilemap, keep_timeline)

    start = 0
    if cfg.pim.bulk_load_cycles > 0:
        load_bits = (m * b) * (m * b) * cfg.pim.operand_bits
        start = builder.emit(
            EventKind.BROADCAST, -1, None, "tsv", 0,
            cfg.pim.bulk_load_cycles, OpCounts(tsv_bits=load_bits),
        )
    for k in range(m):
        schedule_round(k, m, b, tilemap, cfg, round_start=start, builder=builder)
        start = builder.max_end

    total = builder.max_end
    return SimResult(
        n=n,
        block_size=b,
        tiles_per_row=m,
        total_cycles=total,
        total_time_ps=total * cfg.clock_period_ps,
        bulk_load_cycles=cfg.pim.bulk_load_cycles,
        counts=builder.counts,
        energy=energy_of(builder.counts, cfg.energy),
        per_bank_group_busy=builder.busy,
        timeline=builder.events if keep_timeline else None,
    )


def simulate_functional(
    d: np.ndarray,
    b: int,
    cfg: HbmConfig,
    *,
    max_functional_n: int = FUNCTIONAL_GUARD,
    enforce_wavefront: bool = True,
) -> tuple[np.ndarray, SimResult]:
    """Run the blocked algorithm for values and the scheduler for timing on
    the same workload. Returns (distance matrix, SimResult)."""
    n = d.shape[0]
    if n > max_functional_n:
        raise GuardError(
            f"functional execution is guarded at n <= {max_functional_n} "
            f"(got {n}); use the timing-only simulate() for larger runs"
        )
    tiled = to_tile_major(d, b)
    result = simulate(n, b, cfg, enforce_wavefront=enforce_wavefront)
    updated, trace = fw_blocked(tiled)
    assert len(trace) == sum(len(round_records(k, tiled.m)) for k in range(tiled.m))
    return from_tile_major(updated, n), result


def utilization_report(result: SimResult) -> dict:
    """Per-bank-group busy fractions plus max/min/mean. Needs the timeline."""
    if result.timeline is None:
        raise TimelineUnavailable(
            "the event timeline was elided for this run; re-run with "
            "keep_timeline=True to compute utilization"
        )
    total = result.total_cycles
    if total == 0:
        fractions = [0.0] * len(result.per_bank_group_busy)
    else:
        fractions = [busy / total for busy in result.per_bank_group_busy]
    return {
        "per_bank_group": fractions,
        "max": max(fractions),
        "min": min(fractions),
        "mean": sum(fractions) / len(fractions),
    }
