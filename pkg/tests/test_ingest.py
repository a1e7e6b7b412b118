"""Ingestion tests: unit conversion, table parsing, splits, neighbor slots.

The neighbor tests compare against a brute-force per-slot scan written here,
independently of the package implementation.
"""

from __future__ import annotations

import numpy as np
import pytest

from laneintent.ingest import (
    DEFAULT_GAP_CAP,
    FOOT_IN_METERS,
    DataError,
    NeighborSlot,
    SchemaError,
    Sequence,
    SiteGeometry,
    VehicleLookupError,
    VehicleState,
    bumper_gap,
    neighbors_at,
    parse_trajectory_table,
    split_sequence,
)

THREE_LANES = SiteGeometry(lane_boundaries=(0.0, 3.7, 7.4, 11.1), site_name="test-3lane")


def make_state(vid, frame, x, y, lane, v=25.0, a=0.0, length=4.5, width=1.8):
    return VehicleState(vid, frame, x, y, lane, v, a, length, width)


def table_text(rows, header=None):
    header = header or "Vehicle_ID Frame_ID Local_X Local_Y v_Vel v_Acc Lane_ID v_Length v_Width"
    lines = [header]
    lines += [" ".join(str(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Brute-force slot oracle: scans every vehicle for every slot independently.
# ---------------------------------------------------------------------------

def oracle_slots(seq, vehicle_id, frame, cap=DEFAULT_GAP_CAP):
    ego = seq.state_at(vehicle_id, frame)
    everyone = [s for s in seq.states_at(frame) if s.vehicle_id != vehicle_id]
    left_lane = ego.lane_id + 1
    right_lane = ego.lane_id - 1

    def best(pred):
        pool = [s for s in everyone if pred(s)]
        if not pool:
            return None
        pool.sort(key=lambda s: (abs(s.local_y - ego.local_y), s.vehicle_id))
        return pool[0]

    def spans_overlap(s):
        return (
            s.local_y - 0.5 * s.length < ego.local_y + 0.5 * ego.length
            and s.local_y + 0.5 * s.length > ego.local_y - 0.5 * ego.length
        )

    picks = {
        "p": best(lambda s: s.lane_id == ego.lane_id and s.local_y > ego.local_y),
        "f": best(lambda s: s.lane_id == ego.lane_id and s.local_y < ego.local_y),
        "pl": best(lambda s: s.lane_id == left_lane and s.local_y > ego.local_y),
        "pr": best(lambda s: s.lane_id == right_lane and s.local_y > ego.local_y),
        "fl": best(lambda s: s.lane_id == left_lane and s.local_y < ego.local_y),
        "fr": best(lambda s: s.lane_id == right_lane and s.local_y < ego.local_y),
        "asl": best(lambda s: s.lane_id == left_lane and spans_overlap(s)),
        "asr": best(lambda s: s.lane_id == right_lane and spans_overlap(s)),
    }
    slots = {}
    for name, st in picks.items():
        if st is None:
            slots[name] = NeighborSlot(False, None, ego.velocity, cap)
        else:
            gap = max(abs(st.local_y - ego.local_y) - 0.5 * (st.length + ego.length), 0.0)
            slots[name] = NeighborSlot(True, st.vehicle_id, st.velocity, min(gap, cap))
    return slots


def random_scene(rng, site=THREE_LANES, n_vehicles=8, frame=100):
    states = []
    for vid in range(1, n_vehicles + 1):
        lane = int(rng.integers(1, site.lane_count + 1))
        x = site.lane_center(lane) + rng.uniform(-0.4, 0.4)
        y = rng.uniform(0.0, 200.0)
        v = rng.uniform(5.0, 35.0)
        states.append(make_state(vid, frame, x, y, lane, v=v, length=rng.uniform(3.5, 6.0)))
    return Sequence(site, states)


class TestSiteGeometry:
    def test_lane_centers_and_widths(self):
        assert THREE_LANES.lane_count == 3
        assert THREE_LANES.lane_center(1) == pytest.approx(1.85)
        assert THREE_LANES.lane_center(2) == pytest.approx(5.55)
        assert THREE_LANES.lane_width(3) == pytest.approx(3.7)

    def test_lane_of_spans(self):
        assert THREE_LANES.lane_of(0.0) == 1
        assert THREE_LANES.lane_of(3.69) == 1
        assert THREE_LANES.lane_of(3.7) == 2  # half-open spans
        assert THREE_LANES.lane_of(11.05) == 3

    def test_boundaries_must_increase(self):
        with pytest.raises(ValueError):
            SiteGeometry(lane_boundaries=(0.0, 3.7, 3.7))

    def test_roundtrip_file(self, tmp_path):
        path = tmp_path / "site.txt"
        THREE_LANES.to_file(path)
        loaded = SiteGeometry.from_file(path)
        assert loaded == THREE_LANES


class TestParseTrajectoryTable:
    def test_feet_conversion_fixed_factor(self):
        # row (id=7, frame=120, Local_X=24.6 ft, v_Vel=60 ft/s)
        text = table_text([[7, 120, 24.6, 100.0, 60.0, 0.0, 3, 14.0, 6.0]])
        seq = parse_trajectory_table(text.encode(), THREE_LANES, unit="feet")
        st = seq.state_at(7, 120)
        assert st.local_x == pytest.approx(7.49808)
        assert st.velocity == pytest.approx(18.288)
        assert st.local_y == pytest.approx(100.0 * FOOT_IN_METERS)
        assert st.length == pytest.approx(14.0 * FOOT_IN_METERS)

    def test_meters_pass_through(self):
        text = table_text([[7, 120, 5.55, 100.0, 20.0, 0.5, 2, 4.5, 1.8]])
        seq = parse_trajectory_table(text.encode(), THREE_LANES, unit="meters")
        st = seq.state_at(7, 120)
        assert st.local_x == 5.55
        assert st.velocity == 20.0
        assert st.acceleration == 0.5

    def test_unit_roundtrip(self):
        rng = np.random.default_rng(7)
        meters = rng.uniform(0.1, 500.0, size=200)
        feet = meters / FOOT_IN_METERS
        back = feet * FOOT_IN_METERS
        np.testing.assert_allclose(back, meters, rtol=1e-9)

    def test_three_vehicle_fifty_frame_table(self):
        # Expected structure built by direct row enumeration.
        rows = []
        expected = {}
        for vid in (1, 2, 3):
            lane = vid
            for k in range(50):
                frame = 100 + k
                x = THREE_LANES.lane_center(lane)
                y = 10.0 * vid + 20.0 * k * 0.1
                rows.append([vid, frame, x, y, 20.0, 0.0, lane, 4.5, 1.8])
                expected[(vid, frame)] = (x, y, lane)
        seq = parse_trajectory_table(
            table_text(rows).encode(), THREE_LANES, unit="meters"
        )
        assert seq.vehicle_ids() == [1, 2, 3]
        for vid in (1, 2, 3):
            traj = seq.trajectory(vid)
            assert len(traj) == 50
            assert [s.frame for s in traj] == list(range(100, 150))
        for (vid, frame), (x, y, lane) in expected.items():
            st = seq.state_at(vid, frame)
            assert (st.local_x, st.local_y, st.lane_id) == (x, y, lane)

    def test_csv_delimiter(self):
        header = "Vehicle_ID,Frame_ID,Local_X,Local_Y,v_Vel,v_Acc,Lane_ID,v_Length,v_Width"
        text = header + "\n1,5,5.55,10.0,20.0,0.0,2,4.5,1.8\n"
        seq = parse_trajectory_table(text.encode(), THREE_LANES, unit="meters")
        assert seq.state_at(1, 5).local_x == 5.55

    def test_missing_column_schema_error(self):
        text = table_text([[1, 5, 5.55, 10.0, 20.0, 0.0, 2, 4.5, 1.8]],
                          header="Vehicle_ID Frame_ID Local_X Local_Y v_Vel v_Acc Lane_ID v_Length")
        with pytest.raises(SchemaError, match="v_Width"):
            parse_trajectory_table(text.encode(), THREE_LANES)

    def test_duplicate_frame_data_error_names_vehicle(self):
        rows = [[9, 5, 5.55, 10.0, 20.0, 0.0, 2, 4.5, 1.8],
                [9, 5, 5.55, 12.0, 20.0, 0.0, 2, 4.5, 1.8]]
        with pytest.raises(DataError, match="vehicle 9"):
            parse_trajectory_table(table_text(rows).encode(), THREE_LANES, unit="meters")

    def test_lane_out_of_range(self):
        rows = [[1, 5, 5.55, 10.0, 20.0, 0.0, 9, 4.5, 1.8]]
        with pytest.raises(DataError, match="lane_id 9"):
            parse_trajectory_table(table_text(rows).encode(), THREE_LANES, unit="meters")

    def test_malformed_row_rejected_with_line_number(self, caplog):
        rows = [[1, 5, 5.55, 10.0, 20.0, 0.0, 2, 4.5, 1.8],
                [1, 6, "oops", 10.0, 20.0, 0.0, 2, 4.5, 1.8],
                [1, 7, 5.55, 10.0, 20.0, 0.0, 2, 4.5, 1.8]]
        with caplog.at_level("WARNING"):
            seq = parse_trajectory_table(table_text(rows).encode(), THREE_LANES, unit="meters")
        assert [s.frame for s in seq.trajectory(1)] == [5, 7]
        assert "3" in caplog.text  # header is line 1, bad row is line 3

    def test_accepts_file_object_and_path(self, tmp_path):
        text = table_text([[1, 5, 5.55, 10.0, 20.0, 0.0, 2, 4.5, 1.8]])
        path = tmp_path / "table.txt"
        path.write_text(text)
        seq_a = parse_trajectory_table(path, THREE_LANES, unit="meters")
        with open(path, "rb") as fh:
            seq_b = parse_trajectory_table(fh, THREE_LANES, unit="meters")
        assert seq_a.state_at(1, 5) == seq_b.state_at(1, 5)


class TestSplitSequence:
    def _sequence(self, n_frames, start=0):
        states = [make_state(1, start + k, 5.55, 2.0 * k, 2) for k in range(n_frames)]
        return Sequence(THREE_LANES, states)

    def test_ten_minute_split_counts(self):
        seq = self._sequence(6000)  # 10 min at 10 Hz
        train, test = split_sequence(seq, test_minutes=2.0)
        assert test.n_frames == 1200
        assert train.n_frames == 4800

    def test_zero_minutes_degenerate(self):
        seq = self._sequence(100)
        train, test = split_sequence(seq, test_minutes=0.0)
        assert test.n_frames == 0
        assert len(test.all_states()) == 0
        assert train.n_frames == 100

    def test_half_minute_frame_indices(self):
        seq = self._sequence(600)
        train, test = split_sequence(seq, test_minutes=0.5)
        test_frames = sorted(s.frame for s in test.all_states())
        train_frames = sorted(s.frame for s in train.all_states())
        assert test_frames == list(range(0, 300))
        assert train_frames == list(range(300, 600))

    def test_partition_property(self):
        seq = self._sequence(457)
        train, test = split_sequence(seq, test_minutes=0.31)
        assert train.n_frames + test.n_frames == seq.n_frames
        overlap = {s.frame for s in train.all_states()} & {s.frame for s in test.all_states()}
        assert not overlap

    def test_too_long_window_rejected(self):
        seq = self._sequence(100)
        with pytest.raises(ValueError):
            split_sequence(seq, test_minutes=1.0)


class TestNeighborsAt:
    def test_ego_alone(self):
        seq = Sequence(THREE_LANES, [make_state(1, 10, 5.55, 50.0, 2)])
        ctx = neighbors_at(seq, 1, 10)
        for name in ctx.slot_names:
            slot = getattr(ctx, name)
            assert not slot.present
            assert slot.gap == DEFAULT_GAP_CAP
        assert ctx.left_lane_exists and ctx.right_lane_exists

    def test_leftmost_lane_has_no_left_lane(self):
        # Leftmost lane is lane_count under the +x-left convention.
        seq = Sequence(THREE_LANES, [make_state(1, 10, 9.25, 50.0, 3)])
        ctx = neighbors_at(seq, 1, 10)
        assert not ctx.left_lane_exists
        assert ctx.right_lane_exists

    def test_rightmost_lane_has_no_right_lane(self):
        seq = Sequence(THREE_LANES, [make_state(1, 10, 1.85, 50.0, 1)])
        ctx = neighbors_at(seq, 1, 10)
        assert ctx.left_lane_exists
        assert not ctx.right_lane_exists

    def test_five_vehicle_scripted_scene(self):
        # Hand-placed scene, checked against the brute-force oracle and
        # against hand-computed slot ids and gaps.
        states = [
            make_state(1, 10, 5.55, 100.0, 2, v=25.0),   # ego, middle lane
            make_state(2, 10, 5.55, 130.0, 2, v=22.0),   # ahead same lane -> P
            make_state(3, 10, 9.25, 118.0, 3, v=28.0),   # ahead left -> PL
            make_state(4, 10, 1.85, 80.0, 1, v=20.0),    # behind right -> FR
            make_state(5, 10, 9.25, 101.0, 3, v=26.0),   # alongside left -> ASL (and PL pool)
        ]
        seq = Sequence(THREE_LANES, states)
        ctx = neighbors_at(seq, 1, 10)
        assert ctx.p.vehicle_id == 2
        assert ctx.p.gap == pytest.approx(30.0 - 4.5)
        assert ctx.pl.vehicle_id == 5  # nearest ahead in left lane
        assert ctx.fl.present is False
        assert ctx.fr.vehicle_id == 4
        assert ctx.fr.gap == pytest.approx(20.0 - 4.5)
        assert ctx.asl.vehicle_id == 5
        assert ctx.asr.present is False
        expected = oracle_slots(seq, 1, 10)
        for name in ctx.slot_names:
            assert getattr(ctx, name) == expected[name], name

    def test_random_scenes_match_oracle_exactly(self):
        rng = np.random.default_rng(42)
        for _ in range(60):
            seq = random_scene(rng, n_vehicles=int(rng.integers(2, 12)))
            for vid in seq.vehicle_ids():
                ctx = neighbors_at(seq, vid, 100)
                expected = oracle_slots(seq, vid, 100)
                for name in ctx.slot_names:
                    assert getattr(ctx, name) == expected[name], (vid, name)

    def test_symmetric_consistency(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            seq = random_scene(rng, n_vehicles=6)
            for vid in seq.vehicle_ids():
                ctx = neighbors_at(seq, vid, 100)
                if ctx.p.present:
                    back = neighbors_at(seq, ctx.p.vehicle_id, 100)
                    # B preceding A => A behind B only if A is B's nearest rear.
                    if back.f.present and back.f.vehicle_id == vid:
                        assert back.f.gap == pytest.approx(ctx.p.gap)

    def test_absent_vehicle_lookup_error(self):
        seq = Sequence(THREE_LANES, [make_state(1, 10, 5.55, 50.0, 2)])
        with pytest.raises(VehicleLookupError):
            neighbors_at(seq, 1, 11)
        with pytest.raises(VehicleLookupError):
            neighbors_at(seq, 99, 10)

    def test_gap_clamped_to_cap(self):
        states = [
            make_state(1, 10, 5.55, 0.0, 2),
            make_state(2, 10, 5.55, 500.0, 2),
        ]
        seq = Sequence(THREE_LANES, states)
        ctx = neighbors_at(seq, 1, 10, gap_cap=100.0)
        assert ctx.p.present
        assert ctx.p.gap == 100.0

    def test_bumper_gap_subtracts_half_lengths(self):
        a = make_state(1, 0, 5.55, 0.0, 2, length=4.0)
        b = make_state(2, 0, 5.55, 10.0, 2, length=6.0)
        assert bumper_gap(a, b) == pytest.approx(10.0 - 5.0)
