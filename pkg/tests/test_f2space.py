"""Tests for the F2 linear algebra layer.

The counting formulas are checked against brute-force enumeration, which is
the independent oracle here: gaussian_count values are frozen from exhaustive
subspace listings done by hand or by the enumerator itself at tiny sizes.
"""

import itertools
import random

import pytest

from symlen.errors import (
    DependentInput,
    DimensionCapExceeded,
    EnumerationTooLarge,
    MixedAmbientDim,
    NotProperSubspace,
)
from symlen.f2space import (
    BitVector,
    Subspace,
    canonicalize,
    count_upper_bound,
    enumerate_subspaces,
    enumerate_superspaces,
    extend_basis,
    gaussian_count,
    gaussian_count_q,
    in_span,
    mask_to_str,
    rank_ints,
    rref_ints,
    subspace_from_masks,
    superspace_count,
)


def brute_force_subspaces(d, m):
    """Independent oracle: all m-dim spans found by hashing every span."""
    seen = set()
    vectors = list(range(1 << d))
    for combo in itertools.combinations([v for v in vectors if v], m):
        rows = tuple(rref_ints(combo))
        if len(rows) == m:
            seen.add(rows)
    if m == 0:
        seen = {()}
    return seen


def test_display_convention():
    assert mask_to_str(1, 2) == "01"
    assert mask_to_str(2, 2) == "10"
    assert str(BitVector.from_string("110")) == "110"
    assert BitVector.from_string("01").mask == 1


def test_bitvector_arithmetic():
    a = BitVector.from_string("101")
    b = BitVector.from_string("011")
    assert (a ^ b).mask == 0b110
    assert a.bits == (1, 0, 1)
    with pytest.raises(MixedAmbientDim):
        a ^ BitVector.from_string("01")


def test_ambient_cap():
    BitVector(0, 24)
    with pytest.raises(DimensionCapExceeded):
        BitVector(0, 25)


def test_rref_frozen_examples():
    # {100, 010, 110}: third row dependent
    assert rref_ints([0b100, 0b010, 0b110]) == [0b100, 0b010]
    assert rref_ints([0b11, 0b11]) == [0b11]
    assert rref_ints([]) == []
    assert rank_ints([0b101, 0b011, 0b110]) == 2


def test_rref_is_canonical():
    rng = random.Random(7)
    for _ in range(200):
        d = rng.randrange(1, 7)
        rows = [rng.randrange(1 << d) for _ in range(rng.randrange(5))]
        a = rref_ints(rows)
        rng.shuffle(rows)
        b = rref_ints(rows)
        assert a == b
        assert a == rref_ints(a)
        # RREF shape: decreasing pivots, pivot column cleared elsewhere
        pivots = [r.bit_length() - 1 for r in a]
        assert pivots == sorted(pivots, reverse=True)
        for i, r in enumerate(a):
            for j, s in enumerate(a):
                if i != j:
                    assert not (s >> pivots[i]) & 1


def test_canonicalize():
    z = canonicalize([], ambient_dim=3)
    assert z.dim == 0 and z.ambient_dim == 3
    v = BitVector.from_string("101")
    assert canonicalize([v, v]).dim == 1
    s = canonicalize([BitVector.from_string(t) for t in ("100", "010", "110")])
    assert s.rows == (0b100, 0b010)
    with pytest.raises(MixedAmbientDim):
        canonicalize([BitVector.from_string("10"), BitVector.from_string("100")])
    with pytest.raises(MixedAmbientDim):
        canonicalize([], ambient_dim=None)


def test_gaussian_count_frozen():
    assert gaussian_count(3, 1) == 7
    assert gaussian_count(4, 2) == 35
    assert gaussian_count(5, 2) == 155
    assert gaussian_count(6, 3) == 1395
    assert gaussian_count(5, 7) == 0
    assert gaussian_count(0, 0) == 1
    assert gaussian_count_q(4, 2, 3) == 130


def test_enumerate_subspaces_order_small():
    subs = enumerate_subspaces(2, 1)
    assert [s.rows for s in subs] == [(0b10,), (0b11,), (0b01,)]
    assert [s.rows for s in enumerate_subspaces(3, 0)] == [()]


def test_enumerate_matches_brute_force():
    for d in range(5):
        for m in range(d + 1):
            subs = enumerate_subspaces(d, m)
            assert len(subs) == gaussian_count(d, m)
            assert {s.rows for s in subs} == brute_force_subspaces(d, m)
            assert len({s.rows for s in subs}) == len(subs)


def test_enumerate_counts_d6():
    for d in range(7):
        for m in range(d + 1):
            assert len(enumerate_subspaces(d, m)) == gaussian_count(d, m)


def test_enumeration_cap():
    with pytest.raises(EnumerationTooLarge):
        enumerate_subspaces(24, 12)


def test_count_upper_bound():
    assert count_upper_bound(4, 2) == 64
    assert count_upper_bound(3, 0) == 1
    assert count_upper_bound(6, 3) == 4096
    for d in range(9):
        for m in range(d + 1):
            assert gaussian_count(d, m) <= count_upper_bound(d, m)


def test_superspace_count():
    assert superspace_count(3, 1) == 3
    assert superspace_count(5, 4) == 1
    with pytest.raises(NotProperSubspace):
        superspace_count(3, 3)


def test_enumerate_superspaces_against_filter():
    w = canonicalize([BitVector.from_string("100")])
    sup = enumerate_superspaces(w)
    assert len(sup) == 3
    planes = [s for s in enumerate_subspaces(3, 2) if s.contains_subspace(w)]
    assert {s.rows for s in sup} == {s.rows for s in planes}
    for d in range(1, 7):
        for m in range(d):
            for w in enumerate_subspaces(d, m)[: 8]:
                sup = enumerate_superspaces(w)
                assert len(sup) == superspace_count(d, m)
                assert len({s.rows for s in sup}) == len(sup)
                for s in sup:
                    assert s.dim == m + 1 and s.contains_subspace(w)


def test_extend_basis():
    assert [v.mask for v in extend_basis([], 2)] == [1, 2]
    got = extend_basis([BitVector.from_string("11")], 2)
    assert [str(v) for v in got] == ["11", "01"]
    same = [BitVector.from_string("10"), BitVector.from_string("01")]
    assert extend_basis(same, 2) == same
    with pytest.raises(DependentInput):
        extend_basis([BitVector.from_string("11"), BitVector.from_string("11")], 2)
    rng = random.Random(3)
    for _ in range(50):
        d = rng.randrange(1, 8)
        k = rng.randrange(d + 1)
        rows = []
        while len(rref_ints(rows)) < k:
            rows.append(rng.randrange(1, 1 << d))
            rows = rref_ints(rows)
        part = [BitVector(r, d) for r in rows]
        full = extend_basis(part, d)
        assert len(full) == d
        assert rank_ints([v.mask for v in full]) == d
        assert full[: len(part)] == part


def test_subspace_membership():
    s = subspace_from_masks([0b110, 0b011], 3)
    assert s.contains(0b101)
    assert not s.contains(0b100)
    assert sorted(s.members()) == [0b000, 0b011, 0b101, 0b110]
    assert in_span(0, [])
