"""Constructive Pfister decompositions with machine-checked certificates.

The functions here rewrite a formal sum of Pfister forms into a normal form
whose entries draw their slots from a fixed basis chain, merge entries that
share a common divisor of codimension one, and certify that every step
preserved the class of the sum in the degree-n symbol algebra.

The engine works with the shifted slot vectors v = a + eps rather than the
slot classes a themselves, because the image of <<a_1,...,a_n>> in the
symbol algebra is the tensor of the shifted vectors and tensors are exactly
linear in each position.  Splitting a slot c into a basis factor x therefore
pairs it with the cofactor eps*x*c, and two entries differing in one slot
position merge into the entry carrying eps*c1*c2 there.  The sign carried by
eps is not optional: dropping it changes the residue by a tensor with an
eps factor, which is nonzero on any scheme of level above one.

Termination of the rewrite loop is a lexicographic measure: the number of
slots not equal to 1 never increases and strictly decreases whenever a
stratum rises, and between rises every expansion strictly reduces the
number of basis factors hidden in non-basic slots.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .bounds import bound_sl_binomial, bound_sl_linked, bound_strata_count
from .errors import (
    ChainInconsistency,
    DegreeMismatch,
    EnumerationTooLarge,
    InvalidCase,
    NotFactorable,
    VerificationFailure,
)
from .f2space import in_span, rref_ints
from .milnor import DEFAULT_TENSOR_CAP, SymbolVector, kn_space
from .scheme import (
    PfisterForm,
    Scheme,
    iter_bits,
    pfister_expand,
    pfister_ones_witness,
    set_to_sorted,
)

REWRITE_STEP_CAP = 1 << 20


# ---------------------------------------------------------------------------
# basis chains


@dataclass(frozen=True)
class BasisChain:
    """A basis of the square class group adapted to the square-sum tower.

    The first ranks[m] vectors span the subgroup generated by +-D(2^m); the
    remaining vectors project to a basis of the quotient.  ranks is indexed
    up to the stabilization degree of the tower and clamps beyond it.
    """

    scheme_name: str
    basis: tuple[int, ...]
    ranks: tuple[int, ...]

    def rank(self, m: int) -> int:
        return self.ranks[min(m, len(self.ranks) - 1)]

    def absorbed_basis(self, m: int) -> tuple[int, ...]:
        """Basis of the subgroup generated by +-D(2^m)."""
        return self.basis[: self.rank(m)]

    def free_basis(self, m: int) -> tuple[int, ...]:
        """Lifts of a basis of the quotient modulo +-D(2^m)."""
        return self.basis[self.rank(m):]

    def coordinates(self, c: int) -> int:
        """Bitmask of basis positions whose sum is the class c."""
        residue = c
        picked = 0
        for pos, row, tag in self._solver:
            if residue and residue.bit_length() == row.bit_length():
                residue ^= row
                picked ^= tag
        if residue:
            raise ChainInconsistency(
                "class %d outside the span of the chain basis" % c
            )
        return picked

    @property
    def _solver(self):
        # echelonized copies of the basis with bookkeeping tags, built once
        cached = getattr(self, "_solver_rows", None)
        if cached is not None:
            return cached
        rows = [(v, 1 << i) for i, v in enumerate(self.basis)]
        out = []
        for v, tag in rows:
            for _, rv, rt in out:
                if v and v.bit_length() == rv.bit_length():
                    v ^= rv
                    tag ^= rt
            if v == 0:
                raise ChainInconsistency("chain basis is dependent")
            out.append((v.bit_length(), v, tag))
            out.sort(reverse=True)
        object.__setattr__(self, "_solver_rows", tuple(out))
        return self._solver_rows


def build_basis_chain(scheme: Scheme) -> BasisChain:
    """Basis of the class group with a prefix spanning each +-D(2^m).

    Raises ChainInconsistency when a +-D(2^m) fails to be a subgroup, which
    cannot happen for a table that passed validation but is checked anyway.
    """
    cached = getattr(scheme, "_basis_chain", None)
    if cached is not None:
        return cached
    stab = scheme.invariants().stabilization
    basis: list[int] = []
    span: list[int] = []
    ranks: list[int] = []
    for m in range(stab + 1):
        members = set_to_sorted(scheme.pm_d2m(m))
        rows = rref_ints(members)
        if (1 << len(rows)) != len(members):
            raise ChainInconsistency(
                "+-D(2^%d) has %d elements but rank %d" % (m, len(members), len(rows))
            )
        for e in members:
            if e and not in_span(e, span):
                basis.append(e)
                span = rref_ints(span + [e])
        ranks.append(len(basis))
        if len(span) != len(rows):
            raise ChainInconsistency("+-D(2^%d) span disagrees with its rank" % m)
    for c in range(1, scheme.size):
        if len(basis) == scheme.d:
            break
        if not in_span(c, span):
            basis.append(c)
            span = rref_ints(span + [c])
    chain = BasisChain(scheme.name, tuple(basis), tuple(ranks))
    scheme._basis_chain = chain
    return chain


# ---------------------------------------------------------------------------
# formal sums of Pfister forms


def entry_stratum(slots) -> int:
    """Number of leading slots equal to the class 1."""
    m = 0
    for a in slots:
        if a:
            break
        m += 1
    return m


@dataclass(frozen=True)
class PfisterSum:
    """A formal sum of n-fold Pfister forms, entries as sorted slot tuples."""

    scheme_name: str
    degree: int
    entries: tuple[tuple[int, ...], ...]

    @property
    def length(self) -> int:
        return len(self.entries)

    def strata_counts(self) -> dict[int, int]:
        counts = {m: 0 for m in range(self.degree + 1)}
        for slots in self.entries:
            counts[entry_stratum(slots)] += 1
        return counts

    def as_lists(self) -> list[list[int]]:
        return [list(slots) for slots in self.entries]


def make_sum(scheme: Scheme, n: int, entries) -> PfisterSum:
    if n < 1:
        raise DegreeMismatch("degree must be at least 1, got %d" % n)
    normalized = []
    for slots in entries:
        slots = tuple(slots)
        if len(slots) != n:
            raise DegreeMismatch(
                "entry %r has %d slots, expected %d" % (slots, len(slots), n)
            )
        for a in slots:
            if not 0 <= a < scheme.size:
                raise InvalidCase("slot %r is not a class of %s" % (a, scheme.name))
        normalized.append(tuple(sorted(slots)))
    normalized.sort()
    return PfisterSum(scheme.name, n, tuple(normalized))


def sum_residue(scheme: Scheme, psum: PfisterSum, tensor_cap: int = DEFAULT_TENSOR_CAP):
    """Class of the sum in the degree-n symbol algebra."""
    algebra = kn_space(scheme, psum.degree, tensor_cap)
    coords = 0
    for slots in psum.entries:
        coords ^= algebra.image_of_slots(slots).coords
    return SymbolVector(coords, algebra.dim)


# ---------------------------------------------------------------------------
# slot expansion


def expand_slot(scheme: Scheme, slots, position: int, chain: BasisChain | None = None):
    """Split one slot into a basis factor and the eps-corrected cofactor.

    <<c, rest>> has the same symbol algebra residue as the sum of <<x, rest>>
    and <<eps*x*c, rest>> for any x, because the shifted vectors satisfy
    (c+eps) = (x+eps) + (eps*x*c+eps).  The factor x is the lowest indexed
    coordinate of c over the chain basis; a slot with at most one coordinate
    has nothing to split.
    """
    if chain is None:
        chain = build_basis_chain(scheme)
    slots = tuple(slots)
    if not 0 <= position < len(slots):
        raise InvalidCase("position %d outside the %d slots" % (position, len(slots)))
    c = slots[position]
    coords = chain.coordinates(c)
    if bin(coords).count("1") < 2:
        raise NotFactorable(
            "slot %d is already a basis element or 1" % c
        )
    # factor off the lowest coordinate other than eps; pairing with eps
    # itself would reproduce the original slot
    x = None
    for i in iter_bits(coords):
        if chain.basis[i] != scheme.eps:
            x = chain.basis[i]
            break
    if x is None:
        raise NotFactorable("slot %d has no coordinate besides -1" % c)
    partner = scheme.eps ^ x ^ c
    first = slots[:position] + (x,) + slots[position + 1:]
    second = slots[:position] + (partner,) + slots[position + 1:]
    return first, second


# ---------------------------------------------------------------------------
# rewriting into the basis


def rewrite_to_basis(scheme: Scheme, psum: PfisterSum,
                     chain: BasisChain | None = None) -> PfisterSum:
    """Rewrite a sum so every entry draws its non-1 slots from the chain.

    The output entries of stratum m have m leading 1 slots and the remaining
    slots are distinct elements of the quotient basis at level m; identical
    entries cancel in pairs.  The residue in the symbol algebra is preserved
    exactly, and the number of entries is bounded by the binomial bound of
    the profile.
    """
    if chain is None:
        chain = build_basis_chain(scheme)
    n = psum.degree
    d2m = scheme.d2m_chain()
    # work items: (slots, settled); unsettled entries still need their
    # maximal-ones representative computed
    work = [(slots, False) for slots in psum.entries]
    parity: dict[tuple[int, ...], int] = {}
    steps = 0
    while work:
        steps += 1
        if steps > REWRITE_STEP_CAP:
            raise VerificationFailure("rewrite did not terminate within the step cap")
        slots, settled = work.pop()
        if not settled:
            expansion = pfister_expand(slots)
            if scheme.witt_decompose(expansion).index:
                continue
            m, canonical = pfister_ones_witness(scheme, PfisterForm(tuple(slots)))
            work.append((canonical, True))
            continue
        m = entry_stratum(slots)
        a_rank = chain.rank(m)
        d_mask = d2m[min(m, len(d2m) - 1)]
        for i in range(m, n):
            c = slots[i]
            coords = chain.coordinates(c)
            low = coords & ((1 << a_rank) - 1)
            high = coords >> a_rank
            if low == 0 and bin(high).count("1") == 1:
                continue
            # expand slot i: basis factors, a parity slot, and the absorbed
            # remainder from the subgroup part
            factors = [chain.basis[a_rank + j] for j in iter_bits(high)]
            for x in factors:
                work.append((slots[:i] + (x,) + slots[i + 1:], True))
            if len(factors) % 2 == 0:
                work.append((slots[:i] + (0,) + slots[i + 1:], False))
            w = 0
            for j in iter_bits(low):
                w ^= chain.basis[j]
            if w:
                leftover = scheme.eps ^ w
                if leftover == 0 or (d_mask >> leftover) & 1:
                    # the slot reduces to 1: the stratum rises
                    work.append((slots[:i] + (0,) + slots[i + 1:], False))
                elif (d_mask >> w) & 1:
                    # the slot reduces to eps and the entry is hyperbolic
                    pass
                else:
                    raise ChainInconsistency(
                        "remainder %d escapes +-D(2^%d)" % (w, m)
                    )
            break
        else:
            tail = sorted(slots[m:])
            repeated = next(
                (j for j in range(len(tail) - 1) if tail[j] == tail[j + 1]), None
            )
            if repeated is not None:
                # <<x,x>>-type pairs: the cross term x ox eps*x is a defining
                # relation of the symbol algebra, so the second copy becomes 1
                tail[repeated + 1] = 0
                work.append(((0,) * m + tuple(tail), False))
                continue
            final = (0,) * m + tuple(tail)
            if scheme.witt_decompose(pfister_expand(final)).index:
                continue
            parity[final] = parity.get(final, 0) ^ 1
    kept = sorted(slots for slots, odd in parity.items() if odd)
    return PfisterSum(scheme.name, n, tuple(kept))


# ---------------------------------------------------------------------------
# linkage merging


def _cofactor(scheme: Scheme, kernel, divisor):
    for c in range(scheme.size):
        wc = scheme.witt_decompose(pfister_expand(divisor + (c,)))
        if wc.index == 0 and wc.kernel == kernel:
            return c
    return None


def find_linked_pair(scheme: Scheme, psum: PfisterSum,
                     candidate_cap: int = 1 << 14):
    """First pair of entries sharing an (n-1)-fold Pfister divisor.

    Returns (i, j, divisor slots, cofactor_i, cofactor_j) or None.  The
    divisor search is exhaustive over slot multisets, so entries linked
    through slots outside their own spans are found too.
    """
    n = psum.degree
    if n < 2:
        return None
    count = 1
    for k in range(n - 1):
        count = count * (scheme.size + k) // (k + 1)
    if count > candidate_cap:
        raise EnumerationTooLarge(
            "divisor search needs %d candidates, cap is %d" % (count, candidate_cap)
        )
    kernels = []
    for slots in psum.entries:
        wc = scheme.witt_decompose(pfister_expand(slots))
        kernels.append(None if wc.index else wc.kernel)
    candidates = list(itertools.combinations_with_replacement(range(scheme.size), n - 1))
    for i in range(len(psum.entries)):
        if kernels[i] is None:
            continue
        for j in range(i + 1, len(psum.entries)):
            if kernels[j] is None:
                continue
            for divisor in candidates:
                ci = _cofactor(scheme, kernels[i], divisor)
                if ci is None:
                    continue
                cj = _cofactor(scheme, kernels[j], divisor)
                if cj is None:
                    continue
                return i, j, divisor, ci, cj
    return None


def merge_linked(scheme: Scheme, psum: PfisterSum,
                 candidate_cap: int = 1 << 14) -> PfisterSum:
    """Merge linked entry pairs until none remain.

    Two entries isometric to <<X, c1>> and <<X, c2>> over a common divisor
    X sum to the residue of <<X, eps*c1*c2>>, so the pair collapses to one
    entry, or to nothing when the merged form is hyperbolic.
    """
    entries = list(psum.entries)
    while True:
        current = PfisterSum(psum.scheme_name, psum.degree, tuple(entries))
        hit = find_linked_pair(scheme, current, candidate_cap)
        if hit is None:
            break
        i, j, divisor, ci, cj = hit
        merged = tuple(sorted(divisor + (scheme.eps ^ ci ^ cj,)))
        del entries[j]
        del entries[i]
        if scheme.witt_decompose(pfister_expand(merged)).index == 0:
            entries.append(merged)
        entries.sort()
    return PfisterSum(psum.scheme_name, psum.degree, tuple(sorted(entries)))


# ---------------------------------------------------------------------------
# certificates


@dataclass(frozen=True)
class DecompositionCertificate:
    """Verification record tying an input sum to its decomposition."""

    scheme_name: str
    degree: int
    input_sum: PfisterSum
    output_sum: PfisterSum
    residue_coords: int
    residue_dim: int
    residues_equal: bool
    strata_input: tuple[int, ...]
    strata_output: tuple[int, ...]
    strata_caps: tuple[int, ...]
    counts_ok: bool
    binomial_bound: int
    linked_bound: int
    length_ok: bool
    passed: bool

    def as_dict(self) -> dict:
        return {
            "scheme": self.scheme_name,
            "degree": self.degree,
            "input": self.input_sum.as_lists(),
            "output": self.output_sum.as_lists(),
            "residue": {"coords": self.residue_coords, "dim": self.residue_dim},
            "residues_equal": self.residues_equal,
            "strata": {
                "input": list(self.strata_input),
                "output": list(self.strata_output),
                "caps": list(self.strata_caps),
            },
            "counts_ok": self.counts_ok,
            "bounds": {
                "binomial": self.binomial_bound,
                "linked": self.linked_bound,
            },
            "length_ok": self.length_ok,
            "passed": self.passed,
        }


def certify(scheme: Scheme, n: int, input_sum: PfisterSum,
            output_sum: PfisterSum,
            tensor_cap: int = DEFAULT_TENSOR_CAP) -> DecompositionCertificate:
    """Check residue equality, per-stratum counts and the length bound."""
    if input_sum.degree != n or output_sum.degree != n:
        raise DegreeMismatch(
            "certificate degree %d does not match the sums (%d, %d)"
            % (n, input_sum.degree, output_sum.degree)
        )
    r_in = sum_residue(scheme, input_sum, tensor_cap)
    r_out = sum_residue(scheme, output_sum, tensor_cap)
    residues_equal = r_in == r_out
    profile = scheme.invariants()
    caps = tuple(bound_strata_count(profile, n, m) for m in range(n + 1))
    strata_in = tuple(input_sum.strata_counts()[m] for m in range(n + 1))
    strata_out = tuple(output_sum.strata_counts()[m] for m in range(n + 1))
    counts_ok = all(strata_out[m] <= caps[m] for m in range(n + 1))
    binomial = bound_sl_binomial(profile, n)
    linked = bound_sl_linked(profile, n)
    length_ok = output_sum.length <= binomial
    return DecompositionCertificate(
        scheme_name=scheme.name,
        degree=n,
        input_sum=input_sum,
        output_sum=output_sum,
        residue_coords=r_in.coords,
        residue_dim=r_in.dim,
        residues_equal=residues_equal,
        strata_input=strata_in,
        strata_output=strata_out,
        strata_caps=caps,
        counts_ok=counts_ok,
        binomial_bound=binomial,
        linked_bound=linked,
        length_ok=length_ok,
        passed=residues_equal and counts_ok and length_ok,
    )


def run_decomposition(scheme: Scheme, psum: PfisterSum, merge: bool = True,
                      tensor_cap: int = DEFAULT_TENSOR_CAP):
    """Full pipeline: rewrite into the basis, optionally merge, certify."""
    rewritten = rewrite_to_basis(scheme, psum)
    final = merge_linked(scheme, rewritten) if merge else rewritten
    cert = certify(scheme, psum.degree, psum, final, tensor_cap)
    return final, cert
