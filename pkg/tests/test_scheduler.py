"""Timeline construction: dependencies, serialization, totals, determinism."""

import dataclasses
from collections import defaultdict, deque

import numpy as np
import pytest

from fwsim import (
    EventKind,
    TileMap,
    build_distance_matrix,
    default_config,
    fw_reference,
    gen_synthetic,
    pivot_tile_cost,
    schedule_round,
    simulate,
    simulate_functional,
    utilization_report,
)
from fwsim.errors import ConstraintViolation, GuardError, TimelineUnavailable
from fwsim.scheduler import TIMELINE_ROUND_LIMIT


def tilemap_for(cfg, m):
    return TileMap(m=m, channels=cfg.channels,
                   groups_per_channel=cfg.bank_groups_per_channel)


def events_by_kind(events):
    out = defaultdict(list)
    for e in events:
        out[e.kind].append(e)
    return out


class TestRoundStructure:
    def test_m1_single_pivot_event(self):
        cfg = default_config()
        events = schedule_round(0, 1, 64, tilemap_for(cfg, 1), cfg)
        assert len(events) == 1
        assert events[0].kind is EventKind.PIVOT_FW
        assert events[0].start_cycle == 0
        assert events[0].end_cycle == pivot_tile_cost(64, cfg).cycles

    def test_m1_simulate_total_equals_pivot(self):
        cfg = default_config()
        r = simulate(64, 64, cfg)
        assert r.total_cycles == pivot_tile_cost(64, cfg).cycles

    def test_m2_event_census(self):
        cfg = default_config()
        events = schedule_round(0, 2, 8, tilemap_for(cfg, 2), cfg)
        kinds = events_by_kind(events)
        assert len(kinds[EventKind.PIVOT_FW]) == 1
        assert len(kinds[EventKind.ROW_COL_UPDATE]) == 2
        assert len(kinds[EventKind.REMAINING_UPDATE]) == 1
        # pivot fill + one result fill per phase-2 tile
        assert len(kinds[EventKind.BROADCAST]) == 3
        assert len(kinds[EventKind.CPE_REDUCE]) == 3

    def test_m2_phase2_tiles_start_together_on_distinct_groups(self):
        cfg = default_config()
        events = schedule_round(0, 2, 8, tilemap_for(cfg, 2), cfg)
        kinds = events_by_kind(events)
        p2 = kinds[EventKind.ROW_COL_UPDATE]
        assert p2[0].resource != p2[1].resource
        assert p2[0].start_cycle == p2[1].start_cycle

    def test_phase3_max_serialization_default_m16(self):
        # 225 wavefront tiles over 32 groups: the most loaded group queues 8.
        cfg = default_config()
        events = schedule_round(3, 16, 8, tilemap_for(cfg, 16), cfg)
        per_group = defaultdict(int)
        for e in events_by_kind(events)[EventKind.REMAINING_UPDATE]:
            per_group[e.resource] += 1
        assert max(per_group.values()) == 8
        assert sum(per_group.values()) == 225

    def test_round_offsets_shift_uniformly(self):
        cfg = default_config()
        base = schedule_round(1, 4, 8, tilemap_for(cfg, 4), cfg, round_start=0)
        moved = schedule_round(1, 4, 8, tilemap_for(cfg, 4), cfg, round_start=1000)
        assert len(base) == len(moved)
        for a, b in zip(base, moved):
            assert b.start_cycle - a.start_cycle == 1000
            assert b.end_cycle - a.end_cycle == 1000


class TestInvariants:
    def scan_exclusive(self, events):
        per_resource = defaultdict(list)
        for e in events:
            per_resource[e.resource].append((e.start_cycle, e.end_cycle))
        for spans in per_resource.values():
            spans.sort()
            for (s1, e1), (s2, _) in zip(spans, spans[1:]):
                assert s2 >= e1

    def test_resource_exclusivity(self):
        cfg = default_config()
        r = simulate(1024, 64, cfg)  # m=16
        self.scan_exclusive(r.timeline)

    def test_resource_exclusivity_oversubscribed(self):
        cfg = dataclasses.replace(default_config(), channels=1)
        r = simulate(256, 16, cfg, enforce_wavefront=False)
        self.scan_exclusive(r.timeline)

    def test_dependency_soundness(self):
        cfg = default_config()
        r = simulate(512, 64, cfg)  # m=8
        rounds = defaultdict(list)
        for e in r.timeline:
            rounds[e.k].append(e)
        for k, events in rounds.items():
            kinds = events_by_kind(events)
            pivot_end = kinds[EventKind.PIVOT_FW][0].end_cycle
            pivot_bcast = kinds[EventKind.BROADCAST][0]
            assert pivot_bcast.start_cycle >= pivot_end
            for e in kinds[EventKind.ROW_COL_UPDATE]:
                assert e.start_cycle >= pivot_bcast.end_cycle
            if kinds[EventKind.REMAINING_UPDATE]:
                sources_published = max(
                    e.end_cycle
                    for e in kinds[EventKind.ROW_COL_UPDATE] + kinds[EventKind.BROADCAST]
                )
                for e in kinds[EventKind.REMAINING_UPDATE]:
                    assert e.start_cycle >= sources_published

    def test_round_barriers(self):
        cfg = default_config()
        r = simulate(512, 64, cfg)
        end_of = defaultdict(int)
        start_of = defaultdict(lambda: 1 << 62)
        for e in r.timeline:
            end_of[e.k] = max(end_of[e.k], e.end_cycle)
            start_of[e.k] = min(start_of[e.k], e.start_cycle)
        for k in range(1, 8):
            assert start_of[k] >= end_of[k - 1]

    def test_total_is_max_event_end(self):
        r = simulate(512, 64, default_config())
        assert r.total_cycles == max(e.end_cycle for e in r.timeline)

    def test_aggregate_counts_equal_event_sum(self):
        from fwsim.perf import OpCounts

        r = simulate(256, 32, default_config())
        total = OpCounts()
        for e in r.timeline:
            total = total + e.counts
        assert total == r.counts

    def test_work_conservation_small(self):
        cfg = default_config()
        for n, b in [(64, 16), (256, 64)]:
            r = simulate(n, b, cfg)
            m = n // b
            analytic = m * (1 + 2 * (m - 1) + (m - 1) ** 2) * b**3
            assert r.counts.minplus_ops == analytic == n**3

    def test_work_conservation_with_padding(self):
        r = simulate(100, 16, default_config())  # pads to 112, m=7
        assert r.counts.minplus_ops == 7 * (1 + 12 + 36) * 16**3

    def test_bpe_cycles_track_ops(self):
        cfg = default_config()
        r = simulate(128, 32, cfg)
        assert r.counts.bpe_cycles == r.counts.minplus_ops * 64

    def test_busy_bounded_by_total(self):
        r = simulate(1024, 64, default_config())
        assert all(0 <= busy <= r.total_cycles for busy in r.per_bank_group_busy)


class TestScalingProperties:
    def test_bpe_saturation_identical_results(self):
        cfg = default_config()
        a = simulate(1024, 256, dataclasses.replace(cfg, bpes_per_bank=16))
        b = simulate(1024, 256, dataclasses.replace(cfg, bpes_per_bank=32))
        assert a.total_cycles == b.total_cycles
        assert a.counts.bpe_cycles == b.counts.bpe_cycles

    def test_channel_monotonicity(self):
        cfg = default_config()
        totals = []
        for ch in (1, 2, 4, 8):
            c = dataclasses.replace(cfg, channels=ch)
            totals.append(simulate(128, 64, c).total_cycles)  # m=2, 2m <= 4
        assert totals == sorted(totals, reverse=True)

    def test_more_pes_never_slower(self):
        cfg = default_config()
        t = [
            simulate(512, 256, dataclasses.replace(cfg, bpes_per_bank=pe)).total_cycles
            for pe in (4, 8, 16)
        ]
        assert t == sorted(t, reverse=True)


class TestDeterminism:
    def test_repeat_runs_identical(self):
        cfg = default_config()
        a = simulate(512, 64, cfg)
        b = simulate(512, 64, cfg)
        assert a == b

    def test_functional_repeat_identical(self):
        cfg = default_config()
        d = build_distance_matrix(gen_synthetic(48, 0.4, seed=33))
        m1, r1 = simulate_functional(d, 16, cfg)
        m2, r2 = simulate_functional(d, 16, cfg)
        assert np.array_equal(m1, m2)
        assert r1 == r2


class TestWavefrontEnforcement:
    def test_constraint_raised_by_default(self):
        with pytest.raises(ConstraintViolation):
            simulate(8192, 256, default_config())  # m=32 on 32 groups

    def test_relaxed_run_completes(self):
        r = simulate(8192, 256, default_config(), enforce_wavefront=False,
                     keep_timeline=False)
        assert r.counts.minplus_ops == 8192**3

    def test_other_config_errors_still_raised_when_relaxed(self):
        from fwsim.errors import ConfigError

        bad = dataclasses.replace(default_config(), row_bits=100)
        with pytest.raises(ConfigError):
            simulate(64, 16, bad, enforce_wavefront=False)


class TestFunctional:
    def test_matches_reference_and_timing(self):
        cfg = default_config()
        d = build_distance_matrix(gen_synthetic(64, 0.5, seed=44))
        got, sim = simulate_functional(d, 16, cfg)
        assert np.array_equal(got, fw_reference(d))
        assert sim == simulate(64, 16, cfg)

    def test_single_tile(self):
        cfg = default_config()
        d = build_distance_matrix(gen_synthetic(20, 0.5, seed=45))
        got, _ = simulate_functional(d, 20, cfg)
        assert np.array_equal(got, fw_reference(d))

    def test_guard_refuses_large_matrices(self):
        cfg = default_config()
        d = np.zeros((10, 10), dtype=np.uint32)
        with pytest.raises(GuardError) as exc:
            simulate_functional(d, 4, cfg, max_functional_n=8)
        assert "timing-only" in str(exc.value)

    def test_unreachable_pairs_stay_inf(self):
        # BFS oracle: d[i][j] is INF exactly when j is unreachable from i.
        from fwsim import INF

        cfg = default_config()
        e = gen_synthetic(40, 0.04, seed=46)
        d = build_distance_matrix(e)
        got, _ = simulate_functional(d, 8, cfg, enforce_wavefront=False)

        adj = defaultdict(list)
        for u, v, _w in e.edges:
            adj[int(u)].append(int(v))
        for src in range(40):
            seen = {src}
            queue = deque([src])
            while queue:
                u = queue.popleft()
                for v in adj[u]:
                    if v not in seen:
                        seen.add(v)
                        queue.append(v)
            for dst in range(40):
                assert (got[src, dst] == INF) == (dst not in seen)


class TestUtilization:
    def test_equal_busy_when_groups_divide_tiles(self):
        # m=16 on 32 groups: every group holds 8 tiles and every tile update
        # costs the same, so busy cycles match exactly.
        r = simulate(1024, 64, default_config())
        util = utilization_report(r)
        assert util["max"] == util["min"] > 0
        assert len(set(r.per_bank_group_busy)) == 1

    def test_m1_single_group_busy(self):
        r = simulate(64, 64, default_config())
        busy = r.per_bank_group_busy
        assert busy[0] > 0
        assert all(v == 0 for v in busy[1:])

    def test_fractions_in_unit_interval(self):
        r = simulate(320, 64, default_config())
        util = utilization_report(r)
        assert all(0.0 <= f <= 1.0 for f in util["per_bank_group"])
        assert 0.0 <= util["min"] <= util["mean"] <= util["max"] <= 1.0

    def test_elided_timeline_unavailable(self, monkeypatch):
        import fwsim.scheduler as sched

        monkeypatch.setattr(sched, "TIMELINE_ROUND_LIMIT", 4)
        r = simulate(80, 16, default_config(), enforce_wavefront=False)  # m=5
        assert r.timeline is None
        with pytest.raises(TimelineUnavailable):
            utilization_report(r)

    def test_elision_threshold(self, monkeypatch):
        import fwsim.scheduler as sched

        monkeypatch.setattr(sched, "TIMELINE_ROUND_LIMIT", 4)
        cfg = default_config()
        kept = simulate(64, 16, cfg)  # m=4: at the limit, kept
        assert kept.timeline is not None
        elided = simulate(80, 16, cfg, enforce_wavefront=False)  # m=5: elided
        assert elided.timeline is None
        assert TIMELINE_ROUND_LIMIT == 64  # shipped default


class TestBulkLoad:
    def test_bulk_load_reported_and_charged(self):
        cfg = default_config()
        pim = dataclasses.replace(cfg.pim, bulk_load_cycles=5000)
        with_load = simulate(128, 64, dataclasses.replace(cfg, pim=pim))
        without = simulate(128, 64, cfg)
        assert with_load.bulk_load_cycles == 5000
        assert with_load.total_cycles == without.total_cycles + 5000
        assert with_load.counts.tsv_bits > without.counts.tsv_bits
