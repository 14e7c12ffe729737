"""Mod 2 Milnor k-groups of a scheme and exact symbol lengths.

For a scheme with square class group G = F2^d, the degree n group k_n is the
n-fold tensor power of G over F2 modulo the subspace generated by placing a
split 2-tensor in any adjacent pair of slots.  The split 2-tensors are the
span of a (x) b over all pairs with b in D<1, -a>, which is exactly the
condition that the 2-fold multiplicative form <<a, b>> is hyperbolic.

An n-fold multiplicative form <<a_1, ..., a_n>> maps to the class of
(-a_1) (x) ... (x) (-a_n).  With that normalization the degree 2 map kills
precisely the hyperbolic 2-folds, and chain equivalent slot tuples give the
same class, so the map factors through isometry (checked by the tests rather
than assumed).  The image of a multiplicative form is called a pure symbol.

The symbol length of an element is the least number of pure symbols summing
to it; the symbol length of the scheme in degree n is the maximum over the
whole group, computed by one breadth first search of the Cayley graph of
k_n with the nonzero pure symbols as generators.

Tensors are int bitmasks over d^n coordinates; the flat index of the basis
tensor e_{i_0} (x) ... (x) e_{i_{n-1}} is sum_j i_j * d^j.  Elements of k_n
are SymbolVector values whose coordinates are indexed by the non-pivot
columns of the row reduced relation matrix, so representatives and
dimensions are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DegreeMismatch, TooLarge, VerificationFailure
from .f2space import reduce_mod, rref_ints
from .scheme import PfisterForm, Scheme, iter_bits

DEFAULT_TENSOR_CAP = 1 << 16
DEFAULT_SL_CAP = 1 << 24


@dataclass(frozen=True, order=True)
class SymbolVector:
    """An element of k_n in the free-column coordinates of its algebra."""

    coords: int
    dim: int

    def __post_init__(self):
        if self.coords < 0 or self.coords >> self.dim:
            raise DegreeMismatch(
                "coordinate mask %d does not fit dimension %d"
                % (self.coords, self.dim)
            )

    @property
    def is_zero(self) -> bool:
        return self.coords == 0


def tensor_of_vectors(vectors, d: int) -> int:
    """Bitmask of v_0 (x) ... (x) v_{k-1} for vector masks in F2^d."""
    out = 1
    width = 1
    for v in vectors:
        nxt = 0
        for i in iter_bits(v):
            nxt |= out << (i * width)
        out = nxt
        width *= d
        if not out:
            break
    return out


def split_pair_basis(scheme: Scheme) -> list[int]:
    """RREF basis of the split 2-tensors a (x) b with b in D<1, -a>."""
    d = scheme.d
    rows = []
    for a in range(1, scheme.size):
        for b in iter_bits(scheme.binary_unit(a ^ scheme.eps) & ~1):
            rows.append(tensor_of_vectors((a, b), d))
    return rref_ints(rows)


class SymbolAlgebra:
    """k_n of a scheme with a fixed coordinate choice.

    Relation rows are kept in RREF over the d^n tensor coordinates; the
    non-pivot columns, in increasing order, index the quotient coordinates.
    """

    def __init__(self, scheme: Scheme, n: int, tensor_cap: int = DEFAULT_TENSOR_CAP):
        if n < 1:
            raise DegreeMismatch("symbol degree must be at least 1, got %d" % n)
        self.scheme = scheme
        self.n = n
        d = scheme.d
        self.tensor_dim = d ** n
        if self.tensor_dim > tensor_cap:
            raise TooLarge(
                "tensor space needs %d coordinates, cap is %d"
                % (self.tensor_dim, tensor_cap)
            )
        rel: list[int] = []
        if n >= 2:
            pair = split_pair_basis(scheme)
            outer = d ** (n - 2)
            for pos in range(n - 1):
                lo, hi = d ** pos, d ** (pos + 1)
                for rest in range(outer):
                    base = 0
                    digits = rest
                    slot = 0
                    for j in range(n):
                        if j in (pos, pos + 1):
                            continue
                        base += (digits % d) * d ** j
                        digits //= d
                        slot += 1
                    for r in pair:
                        row = 0
                        for e in iter_bits(r):
                            row |= 1 << (base + (e % d) * lo + (e // d) * hi)
                        rel.append(row)
        self.relations = rref_ints(rel)
        pivots = {r.bit_length() - 1 for r in self.relations}
        self.free_cols = tuple(
            c for c in range(self.tensor_dim) if c not in pivots
        )
        self.dim = len(self.free_cols)
        self._col_index = {c: j for j, c in enumerate(self.free_cols)}
        self._pures: tuple[int, ...] | None = None
        self._dist: dict[int, int] | None = None

    def __repr__(self):
        return "SymbolAlgebra(%r, n=%d, dim=%d)" % (
            self.scheme.name, self.n, self.dim)

    def zero(self) -> SymbolVector:
        return SymbolVector(0, self.dim)

    def project(self, tensor_mask: int) -> SymbolVector:
        """Class of a raw tensor bitmask in the quotient coordinates."""
        red = reduce_mod(tensor_mask, self.relations)
        coords = 0
        for c in iter_bits(red):
            coords |= 1 << self._col_index[c]
        return SymbolVector(coords, self.dim)

    def representative(self, x: SymbolVector) -> int:
        """Canonical tensor bitmask representing x (supported on free columns)."""
        mask = 0
        for j in iter_bits(x.coords):
            mask |= 1 << self.free_cols[j]
        return mask

    def image_of_slots(self, slots) -> SymbolVector:
        if len(slots) != self.n:
            raise DegreeMismatch(
                "form has %d slots, algebra degree is %d" % (len(slots), self.n)
            )
        eps = self.scheme.eps
        return self.project(
            tensor_of_vectors([a ^ eps for a in slots], self.scheme.d)
        )

    def pure_symbols(self) -> tuple[int, ...]:
        """Sorted coords of the distinct nonzero pure symbols."""
        if self._pures is None:
            d = self.scheme.d
            seen = set()
            for idx in range((self.scheme.size - 1) ** self.n):
                vs = []
                k = idx
                for _ in range(self.n):
                    vs.append(1 + k % (self.scheme.size - 1))
                    k //= self.scheme.size - 1
                seen.add(self.project(tensor_of_vectors(vs, d)).coords)
            seen.discard(0)
            self._pures = tuple(sorted(seen))
        return self._pures

    def _distances(self, cap: int) -> dict[int, int]:
        """Distance from 0 to every element in the pure-symbol Cayley graph."""
        if self._dist is None:
            if (1 << self.dim) > cap:
                raise TooLarge(
                    "k_n has 2^%d elements, enumeration cap is %d"
                    % (self.dim, cap)
                )
            gens = self.pure_symbols()
            dist = {0: 0}
            frontier = [0]
            layer = 0
            while frontier:
                layer += 1
                nxt = []
                for x in frontier:
                    for g in gens:
                        y = x ^ g
                        if y not in dist:
                            dist[y] = layer
                            nxt.append(y)
                frontier = nxt
            if len(dist) != 1 << self.dim:
                raise VerificationFailure(
                    "pure symbols span only %d of %d classes"
                    % (len(dist), 1 << self.dim)
                )
            self._dist = dist
        return self._dist

    def symbol_length(self, x: SymbolVector, cap: int = DEFAULT_SL_CAP) -> int:
        if x.dim != self.dim:
            raise DegreeMismatch(
                "element dimension %d does not match algebra dimension %d"
                % (x.dim, self.dim)
            )
        return self._distances(cap)[x.coords]

    def max_symbol_length(self, cap: int = DEFAULT_SL_CAP) -> tuple[int, SymbolVector]:
        """Largest symbol length over k_n and the least witness attaining it."""
        dist = self._distances(cap)
        best = max(dist.values())
        witness = min(c for c, k in dist.items() if k == best)
        return best, SymbolVector(witness, self.dim)


def kn_space(scheme: Scheme, n: int, tensor_cap: int = DEFAULT_TENSOR_CAP) -> SymbolAlgebra:
    """The degree n symbol algebra of a scheme, cached on the scheme.

    The cap is enforced on cache hits too, so that a request refused on a
    cold cache is refused identically on a warm one.
    """
    if scheme.d ** n > tensor_cap:
        raise TooLarge(
            "tensor space needs %d coordinates, cap is %d"
            % (scheme.d ** n, tensor_cap)
        )
    hit = scheme._kn.get(n)
    if hit is None or not isinstance(hit, SymbolAlgebra):
        hit = SymbolAlgebra(scheme, n, tensor_cap)
        scheme._kn[n] = hit
    return hit


def symbol_image(scheme: Scheme, pf: PfisterForm,
                 tensor_cap: int = DEFAULT_TENSOR_CAP) -> SymbolVector:
    """Class of an n-fold multiplicative form in k_n."""
    alg = kn_space(scheme, pf.degree, tensor_cap)
    return alg.image_of_slots(pf.slots)


def sl_element(scheme: Scheme, x: SymbolVector, n: int,
               cap: int = DEFAULT_SL_CAP) -> int:
    """Least number of pure symbols of degree n summing to x."""
    return kn_space(scheme, n).symbol_length(x, cap)


def sl_field(scheme: Scheme, n: int,
             cap: int = DEFAULT_SL_CAP) -> tuple[int, SymbolVector]:
    """Exact degree n symbol length of the scheme with a least witness."""
    return kn_space(scheme, n).max_symbol_length(cap)
