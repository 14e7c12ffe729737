"""Finite quadratic form schemes over an elementary abelian 2-group.

A scheme packages a group of square classes G = F2^d (classes are int masks
0..2^d-1, the class product is XOR, the identity class 0 plays the role of 1)
together with a distinguished class eps for -1 and a table of binary value
sets.  The table row for a class a is the set D<1,a> of classes represented
by the form <1,a>, stored as a bitmask over the 2^d classes (bit b set iff
class b is represented).

Everything else is derived from the table: value sets of longer diagonal
forms by the usual recursion, isotropy, Witt decomposition by breadth-first
search over chain moves, isometry, the chain of subgroups represented by sums
of squares, the level / Pythagoras number / quotient-dimension invariants,
and the stratification of Pfister forms by how many slots can be rewritten
as 1.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import (
    AxiomViolation,
    DimensionCapExceeded,
    DimensionMismatch,
    EmptyForm,
    EnumerationTooLarge,
    IsotropicInput,
    NotAGroup,
    ProfileInconsistency,
    RoundnessViolation,
    TooLarge,
)
from .f2space import Subspace, in_span, rref_ints

DEFAULT_WITT_STATE_CAP = 1 << 21
SCHEME_DIM_CAP = 6


def iter_bits(mask: int):
    """Indices of the set bits of mask, ascending."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def translate(setmask: int, x: int) -> int:
    """Image of a set of classes under multiplication by the class x."""
    if x == 0:
        return setmask
    out = 0
    m = setmask
    while m:
        low = m & -m
        out |= 1 << ((low.bit_length() - 1) ^ x)
        m ^= low
    return out


def set_to_sorted(setmask: int) -> list[int]:
    return list(iter_bits(setmask))


# ---------------------------------------------------------------------------
# value data


@dataclass(frozen=True)
class SquareClassGroup:
    """The group of square classes: F2^dim with a distinguished class of -1."""

    dim: int
    minus_one: int

    def __post_init__(self):
        if self.dim < 0:
            raise NotAGroup("negative group dimension")
        if not 0 <= self.minus_one < (1 << self.dim):
            raise NotAGroup(
                "class of -1 (%d) outside the group of dimension %d"
                % (self.minus_one, self.dim)
            )


@dataclass(frozen=True)
class ValueSetTable:
    """Binary value sets D<1,a>, one bitmask over the classes per class a."""

    rows: tuple[int, ...]

    def __post_init__(self):
        size = len(self.rows)
        if size & (size - 1):
            raise NotAGroup("table size %d is not a power of two" % size)


@dataclass(frozen=True)
class DiagonalForm:
    """A diagonal quadratic form given by the multiset of its entry classes."""

    entries: tuple[int, ...]

    @property
    def dimension(self) -> int:
        return len(self.entries)

    def scaled(self, b: int) -> "DiagonalForm":
        return DiagonalForm(tuple(e ^ b for e in self.entries))


@dataclass(frozen=True)
class PfisterForm:
    """An n-fold Pfister form <<a_1,...,a_n>> = <1,a_1> x ... x <1,a_n>."""

    slots: tuple[int, ...]

    @property
    def degree(self) -> int:
        return len(self.slots)

    def expand(self) -> DiagonalForm:
        return DiagonalForm(pfister_expand(self.slots))


def pfister_expand(slots) -> tuple[int, ...]:
    """Entries of the 2^n dimensional expansion, subset products in mask order."""
    n = len(slots)
    out = []
    for t in range(1 << n):
        v = 0
        for i in range(n):
            if (t >> i) & 1:
                v ^= slots[i]
        out.append(v)
    return tuple(out)


@dataclass(frozen=True)
class WittClass:
    """Anisotropic kernel (canonical sorted entry tuple) plus Witt index."""

    kernel: tuple[int, ...]
    index: int


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    checked_triples: int
    message: str


@dataclass(frozen=True)
class InvariantProfile:
    """Derived numeric invariants of a scheme.

    chain[m] is the set of classes represented by 2^m squares, as a bitmask,
    for m = 0..stabilization; q[m-1], s_seq[m], d_seq[m] are the index of
    chain step m over step m-1, the order of the plus-minus quotient at step
    m, and the dimension of the class group modulo plus-minus step m.
    """

    d: int
    is_real: bool
    level_exponent: int | None
    pythagoras: int
    stabilization: int
    q: tuple[int, ...]
    s_seq: tuple[int, ...]
    d_seq: tuple[int, ...]
    chain: tuple[int, ...]

    @property
    def level(self) -> int | None:
        if self.level_exponent is None:
            return None
        return 1 << self.level_exponent

    def d_m(self, m: int) -> int:
        return self.d_seq[min(m, self.stabilization)]

    def s_m(self, m: int) -> int:
        return self.s_seq[min(m, self.stabilization)]

    def q_m(self, m: int) -> int:
        if m < 1:
            raise ProfileInconsistency("q_m defined for m >= 1")
        if m > self.stabilization:
            return 1
        return self.q[m - 1]


# ---------------------------------------------------------------------------
# the scheme itself


class Scheme:
    """A finite quadratic form scheme with memoized derived data.

    Query methods are pure with respect to the table; the instance carries
    memo dictionaries only.  assume_associative prunes the value-set union
    to a single distinguished entry; the default recomputes over every entry
    so that unvalidated tables cannot silently give order-dependent sets.
    """

    def __init__(self, group: SquareClassGroup, values: ValueSetTable, name: str,
                 assume_associative: bool = False,
                 witt_state_cap: int = DEFAULT_WITT_STATE_CAP):
        if group.dim > SCHEME_DIM_CAP:
            raise DimensionCapExceeded(
                "scheme dimension %d exceeds cap %d" % (group.dim, SCHEME_DIM_CAP)
            )
        if len(values.rows) != (1 << group.dim):
            raise NotAGroup(
                "table has %d rows for group of order %d"
                % (len(values.rows), 1 << group.dim)
            )
        self.group = group
        self.values = values
        self.name = name
        self.assume_associative = assume_associative
        self.witt_state_cap = witt_state_cap
        self.d = group.dim
        self.size = 1 << group.dim
        self.eps = group.minus_one
        full = (1 << self.size) - 1
        for a, row in enumerate(values.rows):
            if row < 0 or row > full:
                raise NotAGroup("value set row %d out of range" % a)
        self._bin_cache: dict[tuple[int, int], int] = {}
        self._vs: dict[tuple[int, ...], int] = {}
        self._iso: dict[tuple[int, ...], bool] = {}
        self._witt: dict[tuple[int, ...], WittClass] = {}
        self._ones: dict[tuple[int, tuple[int, ...]], tuple[int, tuple[int, ...]]] = {}
        self._sos_chain: list[int] | None = None
        self._d2m: list[int] | None = None
        self._round_ok: set[int] = set()
        self._kn: dict[int, object] = {}
        self._profile: InvariantProfile | None = None
        self._validated = False

    def __repr__(self):
        return "Scheme(%r, d=%d)" % (self.name, self.d)

    @property
    def classes(self):
        return range(self.size)

    @property
    def full_mask(self) -> int:
        return (1 << self.size) - 1

    def binary(self, x: int, y: int) -> int:
        """Value set D<x,y> as a class bitmask."""
        key = (x ^ y, x)
        hit = self._bin_cache.get(key)
        if hit is None:
            hit = translate(self.values.rows[x ^ y], x)
            self._bin_cache[key] = hit
        return hit

    def binary_unit(self, a: int) -> int:
        """Value set D<1,a>."""
        return self.values.rows[a]

    # -- value sets of longer forms -------------------------------------

    def value_set(self, entries) -> int:
        """Class bitmask of the values represented by the diagonal form."""
        key = tuple(sorted(entries))
        if not key:
            raise EmptyForm("value set of the empty form")
        hit = self._vs.get(key)
        if hit is not None:
            return hit
        n = len(key)
        if n == 1:
            res = 1 << key[0]
        elif n == 2:
            res = self.binary(key[0], key[1])
        else:
            res = 0
            seen_rest = set()
            positions = (0,) if self.assume_associative else range(n)
            for i in positions:
                rest = key[:i] + key[i + 1:]
                if rest in seen_rest:
                    continue
                seen_rest.add(rest)
                a = key[i]
                m = self.value_set(rest)
                while m:
                    low = m & -m
                    res |= self.binary(a, low.bit_length() - 1)
                    m ^= low
        self._vs[key] = res
        return res

    def represents(self, entries, c: int) -> bool:
        return bool((self.value_set(entries) >> c) & 1)

    # -- isotropy and Witt decomposition --------------------------------

    def isotropic(self, entries) -> bool:
        if not entries:
            raise EmptyForm("isotropy of the empty form")
        key = tuple(sorted(entries))
        hit = self._iso.get(key)
        if hit is not None:
            return hit
        n = len(key)
        if n == 1:
            res = False
        else:
            res = False
            seen_rest = set()
            for i in range(n):
                rest = key[:i] + key[i + 1:]
                if rest in seen_rest:
                    continue
                seen_rest.add(rest)
                if self.represents(rest, self.eps ^ key[i]):
                    res = True
                    break
                if self.isotropic(rest):
                    res = True
                    break
        self._iso[key] = res
        return res

    def _find_hyperbolic_pair(self, state):
        eps = self.eps
        for i in range(len(state)):
            for j in range(i + 1, len(state)):
                if state[i] ^ state[j] == eps:
                    return i, j
        return None

    def witt_decompose(self, entries) -> WittClass:
        """Witt class of the form: canonical anisotropic kernel plus index.

        Breadth-first search over the chain move set: a pair (x, y) may be
        replaced by (z, x*y*z) for any z in D<x,y>.  Either some reachable
        state exposes a pair multiplying to -1 (extract it and recurse), or
        the whole chain class is exhausted and the form is anisotropic with
        canonical kernel the least sorted tuple seen.
        """
        key = tuple(sorted(entries))
        cached = self._witt.get(key)
        if cached is not None:
            return cached
        if not key:
            result = WittClass((), 0)
            self._witt[key] = result
            return result

        from collections import deque

        visited = {key}
        queue = deque([key])
        result = None
        while queue and result is None:
            state = queue.popleft()
            known = self._witt.get(state)
            if known is not None:
                result = known
                break
            pair = self._find_hyperbolic_pair(state)
            if pair is not None:
                i, j = pair
                rest = state[:i] + state[i + 1:j] + state[j + 1:]
                sub = self.witt_decompose(rest)
                result = WittClass(sub.kernel, sub.index + 1)
                break
            n = len(state)
            for i in range(n):
                for j in range(i + 1, n):
                    x, y = state[i], state[j]
                    if j > i + 1 and y == state[j - 1]:
                        continue
                    rest = state[:i] + state[i + 1:j] + state[j + 1:]
                    m = self.binary(x, y)
                    while m:
                        low = m & -m
                        z = low.bit_length() - 1
                        m ^= low
                        ns = tuple(sorted(rest + (z, x ^ y ^ z)))
                        if ns not in visited:
                            if len(visited) >= self.witt_state_cap:
                                raise TooLarge(
                                    "chain class of %r exceeds %d states"
                                    % (key, self.witt_state_cap)
                                )
                            visited.add(ns)
                            queue.append(ns)
        if result is None:
            result = WittClass(min(visited), 0)
        for state in visited:
            self._witt[state] = result
        return result

    def isometric(self, f_entries, g_entries) -> bool:
        f = tuple(f_entries)
        g = tuple(g_entries)
        if len(f) != len(g):
            return False
        if not f:
            return True
        joined = f + tuple(e ^ self.eps for e in g)
        return self.witt_decompose(joined).kernel == ()

    # -- sums of squares and invariants ---------------------------------

    def sos_chain(self) -> list[int]:
        """Bitmasks of D(k ones) for k = 1.. until the chain stabilizes."""
        if self._sos_chain is None:
            chain = [1]  # D of a single <1> is {identity}
            while True:
                cur = chain[-1]
                nxt = 0
                m = cur
                while m:
                    low = m & -m
                    nxt |= self.values.rows[low.bit_length() - 1]
                    m ^= low
                if nxt == cur:
                    break
                if nxt & cur != cur:
                    raise ProfileInconsistency("sum of squares chain not increasing")
                chain.append(nxt)
            self._sos_chain = chain
        return self._sos_chain

    def _check_subgroup(self, setmask: int) -> None:
        members = set_to_sorted(setmask)
        if 0 not in members:
            raise NotAGroup("represented set lacks the identity class")
        rows = rref_ints(members)
        count = 1 << len(rows)
        if count != len(members):
            raise NotAGroup("represented set of size %d is not a subgroup" % len(members))
        span = 0
        for combo in range(count):
            v = 0
            for i in range(len(rows)):
                if (combo >> i) & 1:
                    v ^= rows[i]
            span |= 1 << v
        if span != setmask:
            raise NotAGroup("represented set is not closed under products")

    def d2m_chain(self) -> list[int]:
        """Subgroup chain D(2^m) for m = 0..stabilization, as bitmasks."""
        if self._d2m is not None:
            return self._d2m
        chain = self.sos_chain()
        p = len(chain)
        masks = [chain[0]]
        m = 1
        while True:
            nxt = chain[min(1 << m, p) - 1]
            if nxt == masks[-1]:
                break
            masks.append(nxt)
            m += 1
        for sm in masks:
            self._check_subgroup(sm)
        self._d2m = masks
        return masks

    def pm_d2m(self, m: int) -> int:
        """Bitmask of +-D(2^m) (the chain step joined with its -1 translate)."""
        masks = self.d2m_chain()
        sm = masks[min(m, len(masks) - 1)]
        return sm | translate(sm, self.eps)

    def invariants(self) -> InvariantProfile:
        if self._profile is not None:
            return self._profile
        chain = self.sos_chain()
        fixpoint = chain[-1]
        p = len(chain)
        eps = self.eps
        is_real = not (fixpoint >> eps) & 1
        if is_real:
            level_exponent = None
        else:
            level = next(k for k, sm in enumerate(chain, start=1) if (sm >> eps) & 1)
            if level & (level - 1):
                raise ProfileInconsistency("finite level %d is not a power of two" % level)
            level_exponent = level.bit_length() - 1
            if not (1 << level_exponent) <= p <= (1 << level_exponent) + 1:
                raise ProfileInconsistency(
                    "Pythagoras number %d outside [level, level+1]" % p
                )
        masks = self.d2m_chain()
        big_m = len(masks) - 1
        q = []
        for m in range(1, big_m + 1):
            lo = masks[m - 1].bit_count()
            hi = masks[m].bit_count()
            if hi % lo:
                raise ProfileInconsistency("chain index at step %d not integral" % m)
            qm = hi // lo
            if qm & (qm - 1):
                raise ProfileInconsistency("chain index at step %d not a 2-power" % m)
            q.append(qm)
        s_seq = []
        d_seq = []
        for m in range(big_m + 1):
            sm = masks[m]
            pm = sm | translate(sm, eps)
            size = sm.bit_count()
            psize = pm.bit_count()
            if psize % size or psize // size not in (1, 2):
                raise ProfileInconsistency("plus-minus index at step %d not in {1,2}" % m)
            s_seq.append(psize // size)
            if psize & (psize - 1):
                raise ProfileInconsistency("plus-minus set size not a 2-power")
            dm = self.d - (psize.bit_length() - 1)
            formula = self.d - (s_seq[m].bit_length() - 1)
            for i in range(m):
                formula -= q[i].bit_length() - 1
            if dm != formula:
                raise ProfileInconsistency(
                    "direct d_%d = %d but index formula gives %d" % (m, dm, formula)
                )
            d_seq.append(dm)
        profile = InvariantProfile(
            d=self.d,
            is_real=is_real,
            level_exponent=level_exponent,
            pythagoras=p,
            stabilization=big_m,
            q=tuple(q),
            s_seq=tuple(s_seq),
            d_seq=tuple(d_seq),
            chain=tuple(masks),
        )
        self._profile = profile
        return profile

    # -- roundness of the 2-power all-ones forms ------------------------

    def ensure_round(self, m: int) -> None:
        """Check that every value of the 2^m all-ones form is a similarity.

        The stratum and rewrite logic silently replaces a form by a scaled
        copy for scale factors represented by 2^m squares; that replacement
        is only sound when those scalings are isometries.  Schemes built by
        the provided constructors satisfy this; a hand-built table might
        not, and is refused here rather than given wrong answers.
        """
        if m in self._round_ok:
            return
        sigma = (0,) * (1 << m)
        base = self.witt_decompose(sigma)
        values = self.value_set(sigma)
        v = values
        while v:
            low = v & -v
            b = low.bit_length() - 1
            v ^= low
            scaled = tuple(e ^ b for e in sigma)
            if self.witt_decompose(scaled) != base:
                raise RoundnessViolation(
                    "class %d is a value but not a similarity of the %d-ones form"
                    % (b, 1 << m)
                )
        self._round_ok.add(m)


# ---------------------------------------------------------------------------
# validation


def validate_scheme(scheme: Scheme, sample_triples: int | None = None,
                    seed: int = 0) -> ValidationReport:
    """Check the table axioms and order-independence of ternary value sets.

    Raises AxiomViolation with a witness description at the first failure.
    For groups of dimension at most 4 the ternary check is exhaustive; above
    that a seeded sample of triples is used unless sample_triples forces a
    count.
    """
    size = scheme.size
    eps = scheme.eps
    rows = scheme.values.rows
    for a in range(size):
        row = rows[a]
        if not (row >> 0) & 1:
            raise AxiomViolation("identity not in D<1,%d>" % a)
        if not (row >> a) & 1:
            raise AxiomViolation("class %d not in D<1,%d>" % (a, a))
    if rows[eps] != scheme.full_mask:
        raise AxiomViolation("D<1,-1> is not the whole group")
    for a in range(size):
        row = rows[a]
        m = row
        while m:
            low = m & -m
            b = low.bit_length() - 1
            m ^= low
            if not (rows[b ^ eps] >> (a ^ eps)) & 1:
                raise AxiomViolation(
                    "%d in D<1,%d> but %d not in D<1,%d>" % (b, a, a ^ eps, b ^ eps)
                )

    if scheme.d <= 4 and sample_triples is None:
        triples = itertools.combinations_with_replacement(range(size), 3)
    else:
        import random

        rng = random.Random(seed)
        count = sample_triples if sample_triples is not None else 2000
        triples = (
            tuple(rng.randrange(size) for _ in range(3)) for _ in range(count)
        )
    checked = 0
    for (a, b, c) in triples:
        ref = None
        for first, p, q in ((a, b, c), (b, a, c), (c, a, b)):
            acc = 0
            m = scheme.binary(p, q)
            while m:
                low = m & -m
                acc |= scheme.binary(first, low.bit_length() - 1)
                m ^= low
            if ref is None:
                ref = acc
            elif acc != ref:
                raise AxiomViolation(
                    "ternary value set of (%d,%d,%d) depends on the order" % (a, b, c)
                )
        checked += 1
    scheme._validated = True
    return ValidationReport(True, checked, "ok")


# ---------------------------------------------------------------------------
# Pfister strata


def pfister_ones_rank(scheme: Scheme, pf: PfisterForm) -> int:
    """Largest m so the form is isometric to one with m leading slots 1."""
    return pfister_ones_witness(scheme, pf)[0]


def pfister_ones_witness(scheme: Scheme, pf: PfisterForm) -> tuple[int, tuple[int, ...]]:
    """The stratum of an anisotropic Pfister form plus a witnessing slot tuple.

    The witness has the stratum count of leading 1 slots; among all cofactor
    slot multisets achieving the stratum it is the lexicographically least.
    """
    n = pf.degree
    expansion = pfister_expand(pf.slots)
    wc = scheme.witt_decompose(expansion)
    if wc.index:
        raise IsotropicInput("Pfister form %r is isotropic" % (pf.slots,))
    return _ones_rank_of_kernel(scheme, n, wc.kernel, pf.slots)


def _ones_rank_of_kernel(scheme, n, kernel, fallback_slots):
    memo_key = (n, kernel)
    hit = scheme._ones.get(memo_key)
    if hit is not None:
        return hit
    result = None
    for m in range(n, 0, -1):
        for cand in itertools.combinations_with_replacement(range(scheme.size), n - m):
            slots = (0,) * m + cand
            wc = scheme.witt_decompose(pfister_expand(slots))
            if wc.kernel == kernel and wc.index == 0:
                result = (m, slots)
                break
        if result is not None:
            break
    if result is None:
        result = (0, tuple(sorted(fallback_slots)))
    scheme._ones[memo_key] = result
    return result


def enumerate_pfister_strata(scheme: Scheme, n: int, cap: int = 1 << 20) -> dict[int, int]:
    """Counts of anisotropic degree-n Pfister classes by ones-stratum.

    Returns a dict with keys 0..n; the sum of the values is the number of
    anisotropic isometry classes of n-fold Pfister forms of the scheme.
    """
    groups = pfister_classes(scheme, n, cap)
    counts = {m: 0 for m in range(n + 1)}
    for kernel, rep_slots in groups.items():
        m, _ = _ones_rank_of_kernel(scheme, n, kernel, rep_slots)
        counts[m] += 1
    return counts


def pfister_classes(scheme: Scheme, n: int, cap: int = 1 << 20) -> dict[tuple[int, ...], tuple[int, ...]]:
    """Map of Witt kernel -> first representative slots, anisotropic classes only."""
    if scheme.size ** n > cap:
        raise EnumerationTooLarge(
            "strata enumeration needs %d slot tuples, cap is %d"
            % (scheme.size ** n, cap)
        )
    groups: dict[tuple[int, ...], tuple[int, ...]] = {}
    for slots in itertools.combinations_with_replacement(range(scheme.size), n):
        wc = scheme.witt_decompose(pfister_expand(slots))
        if wc.index:
            continue
        if wc.kernel not in groups:
            groups[wc.kernel] = slots
    return groups


def quotient_basis(scheme: Scheme, m: int) -> list[int]:
    """Deterministic class lifts of a basis of G modulo +-D(2^m)."""
    pm = scheme.pm_d2m(m)
    h_rows = rref_ints(set_to_sorted(pm))
    basis: list[int] = []
    span = list(h_rows)
    for c in range(1, scheme.size):
        if not in_span(c, span):
            basis.append(c)
            span = rref_ints(span + [c])
    return basis


def subspace_to_pfister(scheme: Scheme, m: int, u: Subspace) -> PfisterForm:
    """The Pfister form with m leading 1 slots attached to a quotient subspace.

    u lives in the quotient of the class group by +-D(2^m), coordinatized by
    quotient_basis; each basis row of u is lifted to the least class in its
    coset and the lifts fill the remaining slots.
    """
    scheme.ensure_round(m)
    profile = scheme.invariants()
    dm = profile.d_m(m)
    if u.ambient_dim != dm:
        raise DimensionMismatch(
            "subspace ambient %d but quotient dimension is %d" % (u.ambient_dim, dm)
        )
    basis = quotient_basis(scheme, m)
    pm = scheme.pm_d2m(m)
    coset = set_to_sorted(pm)
    lifts = []
    for row in u.rows:
        raw = 0
        for i in iter_bits(row):
            raw ^= basis[i]
        lifts.append(min(raw ^ h for h in coset))
    return PfisterForm((0,) * m + tuple(lifts))
