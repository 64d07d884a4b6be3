"""Simulated hardware description: HBM3 geometry, timing and energy constants,
processing-element model knobs, and the interleaved tile-to-bank-group map.

Configs are immutable after validation and freely shareable. All durations are
kept as integer picoseconds internally to avoid rounding drift; JSON config
files annotate units in the field names (t_rc_ns, clock_period_ps, ...).
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

from .errors import ConfigError, ConstraintViolation


@dataclass(frozen=True)
class TimingParams:
    """DRAM timing constraints, nanoseconds."""

    t_rc: float = 30.0     # row cycle: minimum interval between activations of a bank
    t_rcd: float = 8.0     # activate to column command
    t_ras: float = 24.0    # minimum row-active time
    t_rrd: float = 2.0     # activate-to-activate, different banks
    t_wr: float = 12.0     # write recovery
    t_ccds: float = 2.0    # column-to-column, different bank-group (carried, unused by the analytic model)
    t_ccdl: float = 4.0    # column-to-column, same bank-group (carried, unused by the analytic model)

    def ps(self, name: str) -> int:
        return round(getattr(self, name) * 1000)


@dataclass(frozen=True)
class EnergyParams:
    """Per-event energy constants, picojoules.

    These are calibration knobs: the architecture defines the accounting
    categories, not the constants. Every energy report is stamped with the
    values used.
    """

    e_activate_pj: float = 900.0   # per row activation
    e_read_bit_pj: float = 0.05    # per bit read through the row-buffer interface
    e_write_bit_pj: float = 0.05   # per bit written back
    e_bpe_cycle_pj: float = 0.05   # per bank-PE active cycle
    e_cpe_cycle_pj: float = 0.1    # per channel-PE active cycle
    e_tsv_bit_pj: float = 0.4      # per bit crossing the TSV bus between channels

    def fj(self, name: str) -> int:
        return round(getattr(self, name) * 1000)


@dataclass(frozen=True)
class PimParams:
    """Processing-element and dataflow model knobs."""

    operand_bits: int = 32
    # Bit-serial passes per min-plus op: one for the sum, one for the
    # compare/select. Each pass costs operand_bits cycles.
    add_passes: int = 2
    # Fixed per-row-pass overhead: command issue, row-buffer slice select,
    # PE array start/drain. Calibrated so halving/quartering the PEs per
    # bank-group lands on the observed ~1.45x / ~2.35x slowdowns.
    row_pass_setup_cycles: int = 60
    # Channel-PE comparison tree: base + ceil(log2(fan_in)) * stage cycles.
    cpe_base_cycles: int = 4
    cpe_stage_cycles: int = 2
    # Overlap steady-state pivot-vector broadcasts with compute of the
    # previous inner-product step (one-deep pipeline).
    broadcast_overlap: bool = True
    # Emit one channel-PE reduction per tile-update completion signal.
    cpe_reduce_per_tile: bool = True
    # Host bulk load of the tile-major matrix, charged once up front and
    # reported separately. Default 0: not modeled.
    bulk_load_cycles: int = 0


@dataclass(frozen=True)
class HbmConfig:
    """One simulated HBM3 stack with per-bank PEs and per-channel reducers."""

    channels: int = 8
    bank_groups_per_channel: int = 4
    banks_per_bank_group: int = 16
    bpes_per_bank: int = 16
    row_bits: int = 8192          # bits latched per row activation
    dq_bits: int = 1024           # TSV lanes: bits moved per bus beat
    rows_per_bank: int = 32768    # capacity checks only
    stack_height: int = 4         # capacity checks only
    clock_period_ps: int = 1000   # one PIM/DRAM logic cycle
    timing: TimingParams = field(default_factory=TimingParams)
    energy: EnergyParams = field(default_factory=EnergyParams)
    pim: PimParams = field(default_factory=PimParams)

    @property
    def total_bank_groups(self) -> int:
        return self.channels * self.bank_groups_per_channel

    @property
    def bpes_per_bank_group(self) -> int:
        return self.banks_per_bank_group * self.bpes_per_bank

    def cycles_from_ns(self, ns_value: float) -> int:
        """Convert a duration in ns to whole cycles, rounding up."""
        ps = round(ns_value * 1000)
        return -(-ps // self.clock_period_ps)


def default_config() -> HbmConfig:
    """The baseline stack: 8 channels x 4 bank-groups, 256 PEs per bank-group
    (16 banks x 16 PEs), 8192-bit rows, 1024 TSV lanes, 1 ns logic cycle."""
    return HbmConfig()


def validate_config(cfg: HbmConfig, tiles_per_row: int) -> None:
    """Check structural invariants and the wavefront staging constraint.

    The pivot-row/column wavefront stages 2M tiles simultaneously, so a run
    with M tiles per row needs 2M <= total bank-groups; violations raise
    ConstraintViolation naming both quantities.
    """
    c = cfg
    for name in ("channels", "bank_groups_per_channel", "banks_per_bank_group",
                 "bpes_per_bank", "row_bits", "dq_bits", "rows_per_bank",
                 "stack_height", "clock_period_ps"):
        if getattr(c, name) < 1:
            raise ConfigError(f"{name} must be >= 1, got {getattr(c, name)}")
    if c.row_bits % 32 != 0 or c.row_bits < 32:
        raise ConfigError(f"row_bits must be a positive multiple of 32, got {c.row_bits}")
    t = c.timing
    for name in ("t_rc", "t_rcd", "t_ras", "t_rrd", "t_wr", "t_ccds", "t_ccdl"):
        if getattr(t, name) < 0:
            raise ConfigError(f"timing.{name} must be non-negative")
    if t.t_ras > t.t_rc:
        raise ConfigError(f"t_ras ({t.t_ras}) must not exceed t_rc ({t.t_rc})")
    if t.t_rcd > t.t_ras:
        raise ConfigError(f"t_rcd ({t.t_rcd}) must not exceed t_ras ({t.t_ras})")
    for name in ("e_activate_pj", "e_read_bit_pj", "e_write_bit_pj",
                 "e_bpe_cycle_pj", "e_cpe_cycle_pj", "e_tsv_bit_pj"):
        if getattr(c.energy, name) < 0:
            raise ConfigError(f"energy.{name} must be non-negative")
    p = c.pim
    if p.operand_bits < 1 or p.add_passes < 1:
        raise ConfigError("pim.operand_bits and pim.add_passes must be >= 1")
    if min(p.row_pass_setup_cycles, p.cpe_base_cycles, p.cpe_stage_cycles,
           p.bulk_load_cycles) < 0:
        raise ConfigError("pim cycle constants must be non-negative")
    if tiles_per_row < 1:
        raise ConfigError(f"tiles per row must be >= 1, got {tiles_per_row}")
    if 2 * tiles_per_row > c.total_bank_groups:
        raise ConstraintViolation(
            f"parallelism constraint violated: the wavefront stages "
            f"2M = {2 * tiles_per_row} pivot-row/column tiles but the stack "
            f"has only C*G = {c.total_bank_groups} bank-groups"
        )


def map_tile_to_bank_group(i: int, j: int, m: int, c: int, g: int) -> int:
    """Interleaved mapping of logical tile (i, j) to a physical bank-group:
    (i * m + j) mod (c * g)."""
    if not (0 <= i < m and 0 <= j < m):
        raise IndexError(f"tile ({i}, {j}) out of range for m={m}")
    return (i * m + j) % (c * g)


def tiles_on_bank_group(bg: int, m: int, c: int, g: int) -> list[tuple[int, int]]:
    """All tiles the interleaved map assigns to bank-group bg, row-major."""
    if not (0 <= bg < c * g):
        raise IndexError(f"bank-group {bg} out of range for {c * g} groups")
    return [
        (i, j)
        for i in range(m)
        for j in range(m)
        if (i * m + j) % (c * g) == bg
    ]


@dataclass(frozen=True)
class TileMap:
    """The static tile-to-bank-group assignment for one workload."""

    m: int
    channels: int
    groups_per_channel: int

    @property
    def total_bank_groups(self) -> int:
        return self.channels * self.groups_per_channel

    def bank_group(self, i: int, j: int) -> int:
        return map_tile_to_bank_group(i, j, self.m, self.channels, self.groups_per_channel)

    def channel_of(self, bg: int) -> int:
        return bg // self.groups_per_channel

    def group_within_channel(self, bg: int) -> int:
        return bg % self.groups_per_channel

    def tiles_on(self, bg: int) -> list[tuple[int, int]]:
        return tiles_on_bank_group(bg, self.m, self.channels, self.groups_per_channel)


# --- JSON config files -----------------------------------------------------

_TOP_KEYS = {
    "channels": "channels",
    "bank_groups_per_channel": "bank_groups_per_channel",
    "banks_per_bank_group": "banks_per_bank_group",
    "bpes_per_bank": "bpes_per_bank",
    "row_bits": "row_bits",
    "dq_bits": "dq_bits",
    "rows_per_bank": "rows_per_bank",
    "stack_height": "stack_height",
    "clock_period_ps": "clock_period_ps",
}
_TIMING_KEYS = {f"{f.name}_ns": f.name for f in dataclasses.fields(TimingParams)}
_ENERGY_KEYS = {f.name: f.name for f in dataclasses.fields(EnergyParams)}
_PIM_KEYS = {f.name: f.name for f in dataclasses.fields(PimParams)}


def config_to_dict(cfg: HbmConfig) -> dict:
    """Flat JSON-ready view of a config, units annotated in field names."""
    out = {json_key: getattr(cfg, attr) for json_key, attr in _TOP_KEYS.items()}
    out["timing"] = {k: getattr(cfg.timing, a) for k, a in _TIMING_KEYS.items()}
    out["energy"] = {k: getattr(cfg.energy, a) for k, a in _ENERGY_KEYS.items()}
    out["pim"] = {k: getattr(cfg.pim, a) for k, a in _PIM_KEYS.items()}
    return out


def _section(data: dict, name: str, keymap: dict, cls):
    raw = data.get(name, {})
    if not isinstance(raw, dict):
        raise ConfigError(f"config section {name!r} must be an object")
    unknown = set(raw) - set(keymap)
    if unknown:
        raise ConfigError(f"unknown {name} config keys: {sorted(unknown)}")
    return cls(**{keymap[k]: v for k, v in raw.items()})


def config_from_dict(data: dict) -> HbmConfig:
    """Build a config from a (possibly partial) dict; unknown keys rejected.

    Missing keys fall back to the defaults, so calibration files only need to
    state the constants they override.
    """
    if not isinstance(data, dict):
        raise ConfigError("config document must be a JSON object")
    unknown = set(data) - set(_TOP_KEYS) - {"timing", "energy", "pim"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    kwargs = {attr: data[json_key] for json_key, attr in _TOP_KEYS.items() if json_key in data}
    kwargs["timing"] = _section(data, "timing", _TIMING_KEYS, TimingParams)
    kwargs["energy"] = _section(data, "energy", _ENERGY_KEYS, EnergyParams)
    kwargs["pim"] = _section(data, "pim", _PIM_KEYS, PimParams)
    try:
        return HbmConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def load_config(source: str) -> HbmConfig:
    """Load a config: the literal string 'default' or a path to a JSON file."""
    if source == "default":
        return default_config()
    with open(source, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid config JSON in {source}: {exc}") from None
    return config_from_dict(data)
