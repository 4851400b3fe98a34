import pytest

from trajindex import RawRecord, normalize, parse_binary, parse_csv


class TestParseCsv:
    def test_basic(self):
        got = parse_csv("1,0,3,4\n2,1.5,0.25,9\n")
        assert got == [RawRecord(1, 0.0, 3.0, 4.0), RawRecord(2, 1.5, 0.25, 9.0)]

    def test_bytes_and_iterable_inputs(self):
        want = [RawRecord(7, 2.0, 1.0, 1.0)]
        assert parse_csv(b"7,2,1,1\n") == want
        assert parse_csv(iter(["7,2,1,1\n"])) == want

    def test_header_skipped(self):
        got = parse_csv("id,time,x,y\n3,1,2,2\n", has_header=True)
        assert got == [RawRecord(3, 1.0, 2.0, 2.0)]

    def test_blank_lines_ignored(self):
        assert parse_csv("\n1,1,1,1\n\n") == [RawRecord(1, 1.0, 1.0, 1.0)]

    def test_field_count_error_names_line(self):
        with pytest.raises(ValueError, match="line 2: expected 4 fields, got 3"):
            parse_csv("1,1,1,1\n2,2,2\n")

    def test_non_numeric_error_names_line(self):
        with pytest.raises(ValueError, match="line 3: non-numeric"):
            parse_csv("id,time,x,y\n1,1,1,1\n1,2,east,4\n", has_header=True)


class TestParseBinary:
    def test_row_layout(self):
        data = bytes([2, 2, 2, 3]) + (
            (7).to_bytes(2, "little")
            + (260).to_bytes(2, "little")
            + (1).to_bytes(2, "little")
            + (70000).to_bytes(3, "little")
        )
        assert parse_binary(data) == [RawRecord(7, 260, 1, 70000)]

    def test_empty_body(self):
        assert parse_binary(bytes([1, 1, 1, 1])) == []

    def test_missing_header(self):
        with pytest.raises(ValueError, match="missing 4-byte width header"):
            parse_binary(b"\x01\x02")

    def test_bad_width(self):
        with pytest.raises(ValueError, match="invalid column width"):
            parse_binary(bytes([0, 1, 1, 1]))
        with pytest.raises(ValueError, match="invalid column width"):
            parse_binary(bytes([1, 9, 1, 1]) + b"\x00" * 12)

    def test_truncated_row_reports_offset(self):
        data = bytes([2, 2, 2, 3]) + b"\x00" * 5
        with pytest.raises(ValueError, match=r"offset 4 \(row size 9\)"):
            parse_binary(data)

    def test_round_trip(self):
        rows = [(0, 5, 10, 3), (12, 6, 255, 127), (3, 1000, 0, 64)]
        data = bytes([1, 2, 1, 1]) + b"".join(
            o.to_bytes(1, "little")
            + t.to_bytes(2, "little")
            + x.to_bytes(1, "little")
            + y.to_bytes(1, "little")
            for o, t, x, y in rows
        )
        assert parse_binary(data) == [RawRecord(*r) for r in rows]


class TestNormalize:
    def test_interpolates_midpoint(self):
        recs = [RawRecord(1, 0, 0, 0), RawRecord(1, 2, 2, 2)]
        assert normalize(recs, 1, 1) == {1: [(0, [(0, 0), (1, 1), (2, 2)])]}

    def test_gap_splits_into_segments(self):
        recs = [RawRecord(1, 0, 0, 0), RawRecord(1, 20, 5, 5)]
        got = normalize(recs, 1, 1, gap_threshold=15)
        assert got == {1: [(0, [(0, 0)]), (20, [(5, 5)])]}

    def test_small_gap_interpolated_through(self):
        recs = [RawRecord(1, 0, 0, 0), RawRecord(1, 10, 10, 0)]
        got = normalize(recs, 1, 1, gap_threshold=15)
        assert got == {1: [(0, [(i, 0) for i in range(11)])]}

    def test_speed_filter_drops_outlier(self):
        recs = [
            RawRecord(1, 0, 0, 0),
            RawRecord(1, 1, 100, 0),  # 100 cells in one tick: impossible
            RawRecord(1, 2, 2, 0),
        ]
        got = normalize(recs, 1, 1, speed_cap=5)
        assert got == {1: [(0, [(0, 0), (1, 0), (2, 0)])]}

    def test_duplicate_timestamp_first_wins(self):
        recs = [
            RawRecord(1, 0, 0, 0),
            RawRecord(1, 0, 9, 9),
            RawRecord(1, 1, 1, 1),
        ]
        assert normalize(recs, 1, 1) == {1: [(0, [(0, 0), (1, 1)])]}

    def test_unsorted_input(self):
        recs = [RawRecord(1, 2, 2, 2), RawRecord(1, 0, 0, 0)]
        assert normalize(recs, 1, 1) == {1: [(0, [(0, 0), (1, 1), (2, 2)])]}

    def test_cell_and_step_scaling(self):
        # readings every 30s, 10m cells
        recs = [RawRecord(4, 0, 5, 5), RawRecord(4, 60, 25, 15)]
        got = normalize(recs, 10, 30)
        assert got == {4: [(0, [(0, 0), (1, 1), (2, 1)])]}

    def test_offgrid_timestamps_round_to_instants(self):
        recs = [RawRecord(1, 0.6, 4, 4), RawRecord(1, 1.6, 6, 6)]
        got = normalize(recs, 1, 1)
        # nearest instants are 1 and 2; positions clamp to the raw extent
        assert got == {1: [(1, [(4, 4), (6, 6)])]}

    def test_objects_sorted_and_kept_separate(self):
        recs = [
            RawRecord(5, 0, 1, 1),
            RawRecord(2, 0, 3, 3),
            RawRecord(2, 1, 3, 3),
        ]
        got = normalize(recs, 1, 1)
        assert list(got) == [2, 5]
        assert got[5] == [(0, [(1, 1)])]

    def test_idempotent_on_clean_series(self, walkthrough_series):
        recs = [
            RawRecord(oid, t0 + i, x, y)
            for oid, segs in walkthrough_series.items()
            for t0, cells in segs
            for i, (x, y) in enumerate(cells)
        ]
        got = normalize(recs, 1, 1, gap_threshold=2)
        assert got == walkthrough_series

    def test_parameter_validation(self):
        recs = [RawRecord(1, 0, 0, 0)]
        with pytest.raises(ValueError, match="cell_size"):
            normalize(recs, 0, 1)
        with pytest.raises(ValueError, match="time_step"):
            normalize(recs, 1, 0)
        with pytest.raises(ValueError, match="gap_threshold"):
            normalize(recs, 1, 1, gap_threshold=1)
        with pytest.raises(ValueError, match="negative timestamp"):
            normalize([RawRecord(1, -3, 0, 0)], 1, 1)

    def test_empty_input(self):
        assert normalize([], 1, 1) == {}
