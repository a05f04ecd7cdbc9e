import numpy as np
import pytest
from hypothesis import given, strategies as st

from kvvstream import hypercube as hc
from kvvstream.hypercube import ConstraintSystem
from kvvstream.params import ToyParams

P = ToyParams(K=2, L=1, n=3, m=4, W=2)


def test_weight_examples():
    assert hc.weight(hc.pack((0, 0, 0), P), P) == 0
    assert hc.weight(hc.pack((1, 2, 3), P), P) == 6
    p12 = ToyParams(K=2, L=1, n=12, m=4, W=2)
    assert hc.weight(hc.pack((3,) * 12, p12), p12) == 36


@given(st.lists(st.integers(0, 3), min_size=3, max_size=3))
def test_pack_unpack_round_trip(coords):
    assert hc.unpack(hc.pack(coords, P), P) == tuple(coords)


def test_count_examples():
    cs = ConstraintSystem.make({0: (0, 2)})
    assert hc.count(cs, P) == 32
    cs2 = ConstraintSystem.make({0: (0, 2)}, residues={0})
    assert hc.count(cs2, P) == 16
    assert hc.count(ConstraintSystem(), P) == 64


def test_count_matches_enumeration_examples():
    for cs in (ConstraintSystem.make({0: (0, 2)}),
               ConstraintSystem.make({0: (0, 2)}, residues={0})):
        assert hc.count(cs, P) == len(hc.members(cs, P))


@st.composite
def constraint_systems(draw):
    n, m, W = 4, 4, 2
    intervals = {}
    for c in range(n):
        if draw(st.booleans()):
            lo = draw(st.integers(0, m - 1))
            hi = draw(st.integers(lo + 1, m))
            intervals[c] = (lo, hi)
    residues = None
    if draw(st.booleans()) and len(intervals) < n:
        residues = draw(st.sets(st.integers(0, W - 1), min_size=1, max_size=W))
    return ConstraintSystem.make(intervals, residues)


@given(constraint_systems())
def test_count_equals_members_property(cs):
    p = ToyParams(K=2, L=1, n=4, m=4, W=2)
    got = hc.count(cs, p)
    assert got == len(hc.members(cs, p))
    mask = hc.members_mask(cs, p)
    assert got == int(mask.sum())


def test_contains_examples():
    tk = ConstraintSystem.make({0: (0, 2)})
    assert hc.contains(tk, hc.pack((0, 0, 0), P), P)
    assert not hc.contains(tk, hc.pack((2, 0, 0), P), P)


def test_residue_without_free_coordinate_enumerates():
    p = ToyParams(K=2, L=1, n=2, m=4, W=2)
    cs = ConstraintSystem.make({0: (0, 2), 1: (1, 2)}, residues={0})
    assert hc.count(cs, p) == len(hc.members(cs, p))


def test_line_members():
    ln = hc.line_through(hc.pack((1, 2, 3), P), 0, P)
    got = sorted(ln.labels(P).tolist())
    want = sorted(hc.pack((v, 2, 3), P) for v in range(4))
    assert got == want


def test_line_dedup_and_partition():
    cover = hc.line_cover(0, ConstraintSystem(), P)
    assert len(cover) == 16
    seen = np.concatenate([ln.labels(P) for ln in cover])
    assert len(np.unique(seen)) == 64  # partition of the full cube
    # equal off-j coordinates give the same line
    a = hc.line_through(hc.pack((0, 2, 3), P), 0, P)
    b = hc.line_through(hc.pack((3, 2, 3), P), 0, P)
    assert a == b


def test_every_label_in_exactly_one_cover_line():
    region = ConstraintSystem.make({1: (0, 2)})
    cover = hc.line_cover(2, region, P)
    labels = np.concatenate([ln.labels(P) for ln in cover])
    assert len(np.unique(labels)) == len(labels) == hc.count(region, P)


def test_members_cap():
    big = ToyParams(K=2, L=1, n=14, m=4, W=2)
    with pytest.raises(hc.CapExceeded):
        hc.members(ConstraintSystem(), big)
