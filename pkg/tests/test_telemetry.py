"""CSV export: headers, ordering, durations, formatting, consistency."""

import pytest

from skysim.telemetry import (
    EVENTS_HEADER,
    FRAMES_HEADER,
    TelemetryFrame,
    TripEvent,
    export_events_csv,
    export_frames_csv,
)

from conftest import run_greedy, single_request


def frame(t, drone="d1", **overrides):
    base = dict(
        time_s=t,
        drone_id=drone,
        swarm_id="",
        x_m=1.0,
        y_m=2.0,
        z_m=3.0,
        phase="cruise",
        speed_mps=10.0,
        power_w=480.0,
        soc_wh=90.0,
        soc_pct=90.0,
        cum_energy_wh=10.0,
        node_id="",
        segment_id="s1",
        payload_kg=1.0,
    )
    base.update(overrides)
    return TelemetryFrame(**base)


class TestFramesCsv:
    def test_empty_run_is_header_only(self):
        assert export_frames_csv([]) == (FRAMES_HEADER + "\n").encode()
        assert export_events_csv([]) == (EVENTS_HEADER + "\n").encode()

    def test_header_column_order(self):
        assert FRAMES_HEADER.split(",") == [
            "time_s", "drone_id", "swarm_id", "x_m", "y_m", "z_m", "phase",
            "speed_mps", "power_w", "soc_wh", "soc_pct", "cum_energy_wh",
            "node_id", "segment_id", "payload_kg",
        ]

    def test_rows_sorted_by_time_then_drone(self):
        frames = [frame(1.0, "b"), frame(0.5, "z"), frame(1.0, "a")]
        lines = export_frames_csv(frames).decode().strip().split("\n")[1:]
        keys = [(line.split(",")[0], line.split(",")[1]) for line in lines]
        assert keys == [("0.500000", "z"), ("1.000000", "a"), ("1.000000", "b")]

    def test_fixed_six_decimals(self):
        line = export_frames_csv([frame(0.1)]).decode().strip().split("\n")[1]
        assert line.startswith("0.100000,d1,,1.000000,2.000000,3.000000,cruise,")

    def test_byte_stability(self):
        frames = [frame(0.1), frame(0.2)]
        assert export_frames_csv(frames) == export_frames_csv(list(frames))


class TestEventsCsv:
    def test_header(self):
        assert EVENTS_HEADER == "time_s,drone_id,kind,location_id,duration_s"

    def test_durations_attach_to_closing_events(self):
        events = [
            TripEvent(0.0, "d1", "node_arrive", "a"),
            TripEvent(4.0, "d1", "node_depart", "a"),
            TripEvent(4.0, "d1", "segment_start", "s1"),
            TripEvent(14.0, "d1", "segment_end", "s1"),
            TripEvent(14.0, "d1", "node_arrive", "b"),
            TripEvent(15.0, "d1", "charge_start", "b"),
            TripEvent(20.0, "d1", "charge_end", "b"),
            TripEvent(21.0, "d1", "complete", "b"),
        ]
        rows = export_events_csv(events).decode().strip().split("\n")[1:]
        by_kind = {row.split(",")[2]: row.split(",")[4] for row in rows}
        assert by_kind["node_depart"] == "4.000000"
        assert by_kind["segment_end"] == "10.000000"
        assert by_kind["charge_end"] == "5.000000"
        assert by_kind["node_arrive"] == ""  # openers carry no duration
        assert by_kind["complete"] == ""

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            TripEvent(0.0, "d1", "teleport", "a")


class TestRunConsistency:
    def test_power_integral_matches_cumulative_energy(self, line_net):
        result = run_greedy(line_net, single_request())
        dt = line_net.settings.dt_s
        by_drone = {}
        for f in result.frames:
            by_drone.setdefault(f.drone_id, []).append(f)
        for frames in by_drone.values():
            integral = sum(f.power_w * dt for f in frames) / 3600.0
            assert integral == pytest.approx(frames[-1].cum_energy_wh, abs=1e-6)

    def test_travel_duration_matches_frame_span(self, line_net):
        result = run_greedy(line_net, single_request())
        dt = line_net.settings.dt_s
        seg_frames = [f.time_s for f in result.frames if f.segment_id == "ab"]
        span = max(seg_frames) - min(seg_frames)
        start = next(e for e in result.events if e.kind == "segment_start")
        end = next(e for e in result.events if e.kind == "segment_end")
        assert abs((end.time_s - start.time_s) - span) <= dt + 1e-9

    def test_soc_pct_consistent(self, line_net):
        result = run_greedy(line_net, single_request())
        capacity = line_net.settings.drone.battery_capacity_wh
        for f in result.frames:
            assert f.soc_pct == pytest.approx(100.0 * f.soc_wh / capacity, abs=1e-9)

    def test_context_exclusivity(self, line_net):
        result = run_greedy(line_net, single_request())
        for f in result.frames:
            if f.phase in ("done", "failed"):
                assert f.node_id == "" and f.segment_id == ""
            else:
                assert (f.node_id == "") != (f.segment_id == "")

    def test_event_pairing(self, line_net):
        result = run_greedy(line_net, single_request())
        opens = {"segment_start": 0, "charge_start": 0}
        for e in result.events:
            if e.kind == "segment_start":
                opens["segment_start"] += 1
            elif e.kind == "segment_end":
                opens["segment_start"] -= 1
                assert opens["segment_start"] >= 0
            elif e.kind == "charge_start":
                opens["charge_start"] += 1
            elif e.kind == "charge_end":
                opens["charge_start"] -= 1
                assert opens["charge_start"] >= 0
        assert opens["segment_start"] == 0
        assert opens["charge_start"] == 0
        times = [e.time_s for e in result.events]
        assert times == sorted(times)
