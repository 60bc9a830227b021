import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pixelvote.encode import (
    IGNORE,
    PanopticAnnotation,
    SegmentInfo,
    centroid,
    downsample_annotation,
    encode_labels,
    round_half_away,
)
from pixelvote.grid import invert_grid, lookup


def make_annotation(id_map, things, stuff=()):
    segments = {sid: SegmentInfo(cat, True) for sid, cat in things}
    segments.update({sid: SegmentInfo(cat, False) for sid, cat in stuff})
    return PanopticAnnotation(np.asarray(id_map, dtype=np.int32), segments)


class TestCentroid:
    def test_single_pixel(self):
        assert centroid([(5, 5)]) == (5.0, 5.0)

    def test_symmetric_square(self):
        assert centroid([(0, 0), (0, 1), (1, 0), (1, 1)]) == (0.5, 0.5)

    def test_rectangle_closed_form(self):
        # 3x5 rectangle anchored at (10, 20): mean is (11, 22)
        pixels = [(r, c) for r in range(10, 13) for c in range(20, 25)]
        assert centroid(pixels) == (11.0, 22.0)

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            centroid([])


class TestRounding:
    @pytest.mark.parametrize(
        "value,expected",
        [(0.5, 1), (1.5, 2), (2.5, 3), (-0.5, -1), (-1.5, -2), (2.4, 2), (2.6, 3), (3.0, 3)],
    )
    def test_half_away_from_zero(self, value, expected):
        assert round_half_away(value) == expected

    def test_rounding_error_bound(self):
        rng = np.random.default_rng(0)
        for value in rng.uniform(-50, 50, size=200):
            assert abs(round_half_away(float(value)) - value) <= 0.5


class TestEncodeLabels:
    def test_offset_reads_off_size3_cell(self, toy_table):
        # three-pixel instance symmetric about its centroid, so the centroid
        # is exact; the probe pixel sits at offset (-3, +2) from it
        center = (10, 10)
        probe = (center[0] - 3, center[1] + 2)
        mirror = (center[0] + 3, center[1] - 2)
        id_map = np.zeros((21, 21), dtype=np.int32)
        for r, c in (center, probe, mirror):
            id_map[r, c] = 1
        ann = make_annotation(id_map, things=[(1, 7)])
        labels = encode_labels(ann, toy_table)
        assert labels.centroids[1] == (10.0, 10.0)
        vote = int(labels.vote[probe])
        assert vote == lookup(toy_table, (3, -2))
        assert toy_table.cell_size[vote] == 3
        # the looked-up offset lies inside the assigned cell's block
        y0, x0 = toy_table.cell_origin[vote]
        assert y0 <= 3 < y0 + 3 and x0 <= -2 < x0 + 3

    def test_single_pixel_instance_votes_central_cell(self, toy_table):
        id_map = np.zeros((9, 9), dtype=np.int32)
        id_map[4, 4] = 1
        labels = encode_labels(make_annotation(id_map, things=[(1, 2)]), toy_table)
        assert labels.vote[4, 4] == lookup(toy_table, (0, 0))

    def test_reach_boundary_default_grid(self, default_table):
        # pixels 100 px left of the centroid land in a size-27 outer cell;
        # beyond the 121-px reach the label is IGNORE
        height, width = 11, 661
        center = (5, 330)
        id_map = np.zeros((height, width), dtype=np.int32)
        for distance, sid in ((100, 1), (130, 2), (200, 3)):
            id_map[center[0], center[1]] = sid
            id_map[center[0], center[1] - distance] = sid
            id_map[center[0], center[1] + distance] = sid
            ann = make_annotation(id_map, things=[(sid, 1)])
            labels = encode_labels(ann, default_table)
            left = labels.vote[center[0], center[1] - distance]
            if distance <= default_table.reach:
                assert default_table.cell_size[left] == 27
                assert left == lookup(default_table, (0, distance))
            else:
                assert left == IGNORE
            id_map[:] = 0

    def test_stuff_and_unlabeled_abstain(self, toy_table):
        id_map = np.zeros((6, 6), dtype=np.int32)
        id_map[0:2, :] = 5
        ann = make_annotation(id_map, things=[], stuff=[(5, 30)])
        labels = encode_labels(ann, toy_table)
        assert (labels.vote == labels.abstention).all()
        assert (labels.semantic[0:2, :] == 30).all()
        assert (labels.semantic[2:, :] == IGNORE).all()

    def test_abstention_exactly_on_non_thing_pixels(self, toy_table):
        id_map = np.zeros((12, 12), dtype=np.int32)
        id_map[3:6, 3:6] = 1
        id_map[8:10, 8:10] = 2
        ann = make_annotation(id_map, things=[(1, 1)], stuff=[(2, 20)])
        labels = encode_labels(ann, toy_table)
        thing = id_map == 1
        assert (labels.vote[thing] != labels.abstention).all()
        assert (labels.vote[~thing] == labels.abstention).all()


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_round_trip_through_query_filter(toy_table, seed):
    # instances within grid reach: querying back from the rounded centroid
    # reproduces every thing pixel's assigned cell
    rng = np.random.default_rng(seed)
    id_map = np.zeros((24, 24), dtype=np.int32)
    for sid in (1, 2):
        r = int(rng.integers(4, 16))
        c = int(rng.integers(4, 16))
        h = int(rng.integers(2, 6))
        w = int(rng.integers(2, 6))
        id_map[r : r + h, c : c + w] = sid
    things = [(sid, sid) for sid in np.unique(id_map) if sid != 0]
    ann = make_annotation(id_map, things=things)
    labels = encode_labels(ann, toy_table)
    qf = invert_grid(toy_table)
    for sid, (cy, cx) in labels.centroids.items():
        ry, rx = round_half_away(cy), round_half_away(cx)
        rows, cols = np.nonzero(id_map == sid)
        for r, c in zip(rows.tolist(), cols.tolist()):
            vote = int(labels.vote[r, c])
            if vote == IGNORE:
                continue
            assert lookup(qf, (r - ry, c - rx)) == vote


def test_translation_invariance(toy_table):
    # the table is defined purely on offsets, so shifting a scene shifts its
    # labels verbatim
    id_map = np.zeros((30, 30), dtype=np.int32)
    id_map[4:9, 5:11] = 1
    ann = make_annotation(id_map, things=[(1, 3)])
    moved_map = np.zeros((30, 30), dtype=np.int32)
    dy, dx = 7, 9
    moved_map[4 + dy : 9 + dy, 5 + dx : 11 + dx] = 1
    moved = make_annotation(moved_map, things=[(1, 3)])
    labels = encode_labels(ann, toy_table)
    labels_moved = encode_labels(moved, toy_table)
    assert (labels.vote[4:9, 5:11] == labels_moved.vote[4 + dy : 9 + dy, 5 + dx : 11 + dx]).all()


class TestAnnotationValidation:
    def test_missing_record(self):
        ann = PanopticAnnotation(np.ones((2, 2), dtype=np.int32), {})
        with pytest.raises(ValueError, match="no record"):
            ann.validate()

    def test_empty_thing(self):
        ann = PanopticAnnotation(
            np.zeros((2, 2), dtype=np.int32), {1: SegmentInfo(1, True)}
        )
        with pytest.raises(ValueError, match="empty mask"):
            ann.validate()

    def test_reserved_zero(self):
        ann = PanopticAnnotation(
            np.zeros((2, 2), dtype=np.int32), {0: SegmentInfo(1, False)}
        )
        with pytest.raises(ValueError, match="reserved"):
            ann.validate()

    def test_conflicting_category_flags(self):
        id_map = np.array([[1, 2]], dtype=np.int32)
        ann = PanopticAnnotation(
            id_map, {1: SegmentInfo(3, True), 2: SegmentInfo(3, False)}
        )
        with pytest.raises(ValueError, match="both thing and stuff"):
            ann.categories()


class TestDownsample:
    def test_nearest_sampling(self):
        id_map = np.arange(16, dtype=np.int32).reshape(4, 4)
        segments = {i: SegmentInfo(1, False) for i in range(1, 16)}
        ann = PanopticAnnotation(id_map, segments)
        small = downsample_annotation(ann, 2)
        assert (small.segment_id_map == id_map[::2, ::2]).all()

    def test_vanished_segments_dropped(self):
        id_map = np.zeros((4, 4), dtype=np.int32)
        id_map[1, 1] = 1  # off the sampling lattice
        id_map[0, 0] = 2
        ann = make_annotation(id_map, things=[(1, 1), (2, 2)])
        small = downsample_annotation(ann, 2)
        assert set(small.segments) == {2}

    def test_bad_factor(self):
        ann = make_annotation(np.zeros((2, 2), dtype=np.int32), things=[])
        with pytest.raises(ValueError, match="factor"):
            downsample_annotation(ann, 0)
