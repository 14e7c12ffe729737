"""Tests for basis chains, Pfister sum rewriting, merging, and certificates."""

import json
import random

import pytest

from symlen.builders import build_from_text, standard_library
from symlen.decompose import (
    build_basis_chain,
    certify,
    entry_stratum,
    expand_slot,
    find_linked_pair,
    make_sum,
    merge_linked,
    rewrite_to_basis,
    run_decomposition,
    sum_residue,
)
from symlen.errors import (
    DegreeMismatch,
    EnumerationTooLarge,
    InvalidCase,
    NotFactorable,
)
from symlen.scheme import pfister_expand


# ---------------------------------------------------------------------------
# basis chains

CHAIN_TABLE = [
    ("QC", (), (0,)),
    ("RC", (1,), (1,)),
    ("F1", (1,), (0, 1)),
    ("laurent(F2)", (1, 2), (1, 1, 2)),
    ("laurent(laurent(QC))", (1, 2), (0, 2)),
    ("laurent(laurent(laurent(QC)))", (1, 2, 4), (0, 3)),
    ("laurent(laurent(RC))", (1, 2, 4), (1,)),
    ("product(RC,laurent(F2))", (3, 1, 4), (1, 2, 3)),
]


@pytest.mark.parametrize("expr,basis,ranks", CHAIN_TABLE)
def test_chain_frozen(expr, basis, ranks):
    chain = build_basis_chain(build_from_text(expr))
    assert chain.basis == basis
    assert chain.ranks == ranks


def test_chain_structure():
    for s in standard_library(3):
        chain = build_basis_chain(s)
        assert len(chain.basis) == s.d
        prof = s.invariants()
        for m in range(prof.stabilization + 2):
            r = chain.rank(m)
            # the absorbed prefix spans exactly the group generated by
            # the classes represented up to sign at level m
            pm = s.pm_d2m(m)
            assert 1 << r == bin(pm).count("1")
            acc = {0}
            for a in chain.absorbed_basis(m):
                acc |= {a ^ x for x in acc}
            assert acc == {c for c in s.classes if (pm >> c) & 1}
            assert len(chain.free_basis(m)) == prof.d_m(m)
        assert chain.rank(0) <= chain.rank(1)


def test_chain_coordinates_roundtrip():
    for s in standard_library(3):
        chain = build_basis_chain(s)
        for c in s.classes:
            coords = chain.coordinates(c)
            rebuilt = 0
            for i in range(len(chain.basis)):
                if (coords >> i) & 1:
                    rebuilt ^= chain.basis[i]
            assert rebuilt == c
        assert chain.coordinates(0) == 0
        assert build_basis_chain(s) is chain


# ---------------------------------------------------------------------------
# sums and strata

def test_entry_stratum():
    assert entry_stratum((0, 0, 3)) == 2
    assert entry_stratum((1, 2)) == 0
    assert entry_stratum((0,)) == 1
    assert entry_stratum(()) == 0
    assert entry_stratum((0, 0)) == 2


def test_make_sum_normalizes():
    q3 = build_from_text("laurent(F2)")
    psum = make_sum(q3, 2, [(2, 0), (3, 1)])
    assert psum.entries == ((0, 2), (1, 3))
    assert psum.length == 2
    assert psum.strata_counts() == {0: 1, 1: 1, 2: 0}
    assert psum.as_lists() == [[0, 2], [1, 3]]


def test_make_sum_rejects_bad_input():
    q3 = build_from_text("laurent(F2)")
    with pytest.raises(DegreeMismatch):
        make_sum(q3, 2, [(1, 2, 3)])
    with pytest.raises(DegreeMismatch):
        make_sum(q3, 0, [])
    with pytest.raises(InvalidCase):
        make_sum(q3, 2, [(1, 4)])


# ---------------------------------------------------------------------------
# slot expansion

def test_expand_slot_rigid():
    r3 = build_from_text("laurent(laurent(laurent(QC)))")
    assert expand_slot(r3, (3, 4), 0) == ((1, 4), (2, 4))


def test_expand_slot_skips_minus_one_coordinate():
    # over the dyadic Laurent model the class 3 is -t, whose lowest
    # coordinate is -1; the factor must come from the other coordinate
    q3 = build_from_text("laurent(F2)")
    assert expand_slot(q3, (3, 2), 0) == ((2, 2), (0, 2))


def test_expand_slot_product_scheme():
    pr = build_from_text("product(RC,laurent(F2))")
    assert pr.eps == 3
    assert expand_slot(pr, (7, 5), 0) == ((4, 5), (0, 5))


@pytest.mark.parametrize("expr,slots", [
    ("laurent(laurent(laurent(QC)))", (3, 4)),
    ("laurent(F2)", (3, 2)),
    ("product(RC,laurent(F2))", (7, 5)),
    ("product(RC,laurent(F2))", (2, 6)),
])
def test_expand_slot_preserves_residue(expr, slots):
    s = build_from_text(expr)
    first, second = expand_slot(s, slots, 0)
    whole = sum_residue(s, make_sum(s, 2, [slots]))
    parts = sum_residue(s, make_sum(s, 2, [first, second]))
    assert whole.coords == parts.coords


def test_expand_slot_not_factorable():
    r3 = build_from_text("laurent(laurent(laurent(QC)))")
    with pytest.raises(NotFactorable):
        expand_slot(r3, (1, 4), 0)
    with pytest.raises(NotFactorable):
        expand_slot(r3, (0, 4), 0)
    with pytest.raises(InvalidCase):
        expand_slot(r3, (3, 4), 5)


# ---------------------------------------------------------------------------
# rewriting

def test_rewrite_rigid_splits_composite_slot():
    r3 = build_from_text("laurent(laurent(laurent(QC)))")
    out = rewrite_to_basis(r3, make_sum(r3, 2, [(3, 4)]))
    assert out.entries == ((1, 4), (2, 4))


def test_rewrite_maximizes_leading_ones():
    # <<ut, ut>> is anisotropic and isometric to the unique four
    # dimensional anisotropic form <<1, t>>
    q3 = build_from_text("laurent(F2)")
    out = rewrite_to_basis(q3, make_sum(q3, 2, [(3, 3)]))
    assert out.entries == ((0, 2),)


def test_rewrite_drops_hyperbolic_entries():
    q3 = build_from_text("laurent(F2)")
    assert rewrite_to_basis(q3, make_sum(q3, 2, [(1, 2)])).entries == ()


def test_rewrite_cancels_identical_pair():
    rc = build_from_text("RC")
    out = rewrite_to_basis(rc, make_sum(rc, 2, [(0, 0), (0, 0)]))
    assert out.entries == ()


def test_rewrite_keeps_settled_entries():
    rr = build_from_text("laurent(laurent(RC))")
    out = rewrite_to_basis(rr, make_sum(rr, 2, [(0, 2), (2, 4)]))
    assert out.entries == ((0, 2), (2, 4))


def test_rewrite_empty_sum():
    q3 = build_from_text("laurent(F2)")
    assert rewrite_to_basis(q3, make_sum(q3, 2, [])).entries == ()


def _assert_settled_shape(scheme, chain, psum):
    seen = set()
    for slots in psum.entries:
        assert slots not in seen
        seen.add(slots)
        m = entry_stratum(slots)
        tail = slots[m:]
        assert all(a == 0 for a in slots[:m])
        assert tail == tuple(sorted(tail))
        assert len(set(tail)) == len(tail)
        free = set(chain.free_basis(m))
        assert set(tail) <= free
        assert not scheme.isotropic(pfister_expand(slots))


def test_rewrite_random_sums_settle():
    rng = random.Random(11)
    for s in standard_library(2):
        chain = build_basis_chain(s)
        for n in (2, 3):
            for k in range(4):
                entries = [
                    tuple(rng.randrange(s.size) for _ in range(n))
                    for _ in range(k)
                ]
                psum = make_sum(s, n, entries)
                out = rewrite_to_basis(s, psum)
                assert sum_residue(s, psum).coords == sum_residue(s, out).coords
                _assert_settled_shape(s, chain, out)


# ---------------------------------------------------------------------------
# linkage merging

def test_merge_common_slot_pair():
    r4 = build_from_text("laurent(laurent(laurent(laurent(QC))))")
    out = merge_linked(r4, make_sum(r4, 2, [(1, 2), (1, 4)]))
    assert out.entries == ((1, 6),)


def test_merge_cross_stratum_pair():
    # <<1, s>> and <<s, t>> share the divisor <<s>>; the merged entry
    # carries the mandatory -1 twist on the free slot
    rr = build_from_text("laurent(laurent(RC))")
    psum = make_sum(rr, 2, [(0, 2), (2, 4)])
    assert find_linked_pair(rr, psum) == (0, 1, (2,), 0, 4)
    out = merge_linked(rr, psum)
    assert out.entries == ((2, 5),)
    assert sum_residue(rr, psum).coords == sum_residue(rr, out).coords


def test_merge_identical_pair_cancels():
    rc = build_from_text("RC")
    assert merge_linked(rc, make_sum(rc, 2, [(0, 0), (0, 0)])).entries == ()


def test_merge_leaves_unlinked_pair():
    r4 = build_from_text("laurent(laurent(laurent(laurent(QC))))")
    psum = make_sum(r4, 2, [(1, 2), (4, 8)])
    assert find_linked_pair(r4, psum) is None
    assert merge_linked(r4, psum).entries == ((1, 2), (4, 8))


def test_find_linked_pair_respects_cap():
    r4 = build_from_text("laurent(laurent(laurent(laurent(QC))))")
    psum = make_sum(r4, 2, [(1, 2), (1, 4)])
    with pytest.raises(EnumerationTooLarge):
        find_linked_pair(r4, psum, candidate_cap=1)


# ---------------------------------------------------------------------------
# certificates

def test_certificate_passes_and_serializes():
    r3 = build_from_text("laurent(laurent(laurent(QC)))")
    psum = make_sum(r3, 2, [(3, 4)])
    final, cert = run_decomposition(r3, psum, merge=False)
    assert final.entries == ((1, 4), (2, 4))
    assert cert.passed
    assert cert.residues_equal and cert.counts_ok and cert.length_ok
    assert cert.strata_output == (2, 0, 0)
    data = cert.as_dict()
    assert set(data) == {
        "scheme", "degree", "input", "output", "residue", "residues_equal",
        "strata", "counts_ok", "bounds", "length_ok", "passed",
    }
    json.dumps(data)


def test_merge_can_shorten_past_the_basis_form():
    # the two basis entries produced by the rigid split are themselves
    # linked through their common slot, so the merge collapses them back
    # into a single entry of length 1
    r3 = build_from_text("laurent(laurent(laurent(QC)))")
    psum = make_sum(r3, 2, [(3, 4)])
    final, cert = run_decomposition(r3, psum, merge=True)
    assert final.entries == ((3, 4),)
    assert final.length == 1
    assert cert.passed


def test_certify_detects_corruption():
    r3 = build_from_text("laurent(laurent(laurent(QC)))")
    psum = make_sum(r3, 2, [(3, 4)])
    bad = make_sum(r3, 2, [(1, 4)])
    cert = certify(r3, 2, psum, bad)
    assert not cert.residues_equal
    assert not cert.passed


def test_certify_degree_mismatch():
    r3 = build_from_text("laurent(laurent(laurent(QC)))")
    with pytest.raises(DegreeMismatch):
        certify(r3, 3, make_sum(r3, 2, [(3, 4)]), make_sum(r3, 2, []))


def test_seeded_decompositions_certify():
    rng = random.Random(2024)
    family = standard_library(3)
    checked = 0
    nonempty = 0
    for _ in range(60):
        s = family[rng.randrange(len(family))]
        n = rng.choice((2, 3))
        k = rng.randrange(4)
        entries = [
            tuple(rng.randrange(s.size) for _ in range(n))
            for _ in range(k)
        ]
        psum = make_sum(s, n, entries)
        final, cert = run_decomposition(s, psum)
        assert cert.passed
        if final.entries:
            nonempty += 1
            hit = find_linked_pair(s, final)
            assert hit is None
        checked += 1
    assert checked == 60
    assert nonempty >= 5
