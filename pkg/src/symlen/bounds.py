"""Upper bounds for symbol length from square class invariants.

Every bound here is a pure function of the invariant profile of a scheme
(dimension d, realness, level, Pythagoras number p, the tower sizes q_k,
the two-element invariants s_m and the quotient dimensions d_m).  The s
entering the case splits is the Kaplansky exponent with 2^s <= p < 2^{s+1};
summation limits that depend on the level of a nonreal scheme use the level
exponent instead.  Exponents in the closed-form stratum caps can be negative
on small profiles, so terms are accumulated as exact rationals and each
bound is floored once at the end.

Two closed-form displays are implemented in a corrected form; the shipped
formulas are the ones the underlying counting argument actually supports,
and both corrections are observable on small schemes:

* The per-stratum cap obtained by chaining the tower inequalities
  q_k >= 2^{s+1-k} uses the drop m(2s-m+1)/2 (plus the s_m term where the
  level makes it available).  The variant with m(2s+m+3)/2 would assert
  d_1 <= -1 on the 2-dimensional dyadic Laurent model, whose d_1 is 1.
* Stratum caps count slot choices modulo the value group D(2^m) itself,
  whose codimension is d_m plus the two-element s_m term.  With d_m alone
  the stratum-1 cap in degree 2 would be 4 on the twice-iterated Laurent
  extension of a real closed base, where six classes exist (the lines of
  a three-dimensional quotient minus the line of -1).
* The paired binomial bound counts the all-ones stratum as one extra
  summand when the degree n is even.  Dropping it (a binomial with lower
  index -1) would give the bound 0 in degree 2 over a real closed base,
  where the form <<1,1>> needs one symbol.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    DegenerateDenominator,
    DegreeViolation,
    InvalidCase,
    LemmaViolation,
    VerificationFailure,
)
from .f2space import gaussian_count

BOUND_NOTES = (
    "stratum cap exponents use the tower drop m(2s-m+1)/2 with the level-aware s_m term",
    "paired bound adds the all-ones stratum term when the degree is even",
    "base-change comparison for the linked cap holds for one-dimensional cofactors only",
)


def kaplansky_s(p: int) -> int:
    """The exponent s with 2^s <= p < 2^{s+1}."""
    if p < 1:
        raise InvalidCase("pythagoras number must be positive, got %d" % p)
    return p.bit_length() - 1


def pow2(exponent: int) -> Fraction:
    if exponent >= 0:
        return Fraction(1 << exponent)
    return Fraction(1, 1 << -exponent)


def _check_args(d, s, m):
    if d < 0 or s < 0 or m < 0:
        raise InvalidCase("arguments must be nonnegative: d=%r s=%r m=%r" % (d, s, m))


def _sm_exponent(m: int, is_real: bool, level_exponent) -> int:
    """log2 of the index of D(2^m) in its plus-minus closure."""
    if is_real:
        return 1
    if level_exponent is None:
        raise InvalidCase("nonreal case needs the level exponent")
    return 1 if m < level_exponent else 0


def bound_dm_estimate(d, s, m, is_real, p_equals_power=None, level_exponent=None):
    """Case-split upper bound for d_m from the square-sum tower sizes.

    The drop through degree m is sum_{k<=m}(s+1-k) = m(2s-m+1)/2 plus the
    s_m contribution.  Beyond m = s the tower is stationary; a real scheme
    whose Pythagoras number is not a power of two gains one further factor
    of two at degree s+1.  The nonreal value for m > s is exactly 0.
    """
    _check_args(d, s, m)
    if m < s:
        return d - m * (2 * s - m + 1) // 2 - _sm_exponent(m, is_real, level_exponent)
    if m == s:
        return d - s * (s + 1) // 2 - _sm_exponent(m, is_real, level_exponent)
    if not is_real:
        return 0
    if p_equals_power is None:
        raise InvalidCase("real case with m > s needs to know if p is a power of two")
    return d - s * (s + 1) // 2 - (1 if p_equals_power else 2)


def dm_estimate_for_profile(profile, m: int) -> int:
    p = profile.pythagoras
    return bound_dm_estimate(
        profile.d,
        kaplansky_s(p),
        m,
        profile.is_real,
        p_equals_power=(p & (p - 1) == 0),
        level_exponent=profile.level_exponent,
    )


def bound_strata_count(profile, n: int, m: int) -> int:
    """Upper bound for the number of anisotropic classes in stratum m.

    A stratum-m form is 2^m times an (n-m)-fold Pfister form, and single
    slots absorb exactly the value group D(2^m), not its plus-minus
    closure.  The relevant codimension is therefore d_m plus the two
    element term; with the smaller d_m alone the cap would be 4 on the
    twice-iterated Laurent extension of a real closed base at n = 2,
    m = 1, where six classes exist (the lines of a three-dimensional
    quotient minus the line of -1).
    """
    if not 0 <= m <= n:
        raise InvalidCase("stratum index %d outside [0, %d]" % (m, n))
    if not profile.is_real and m > profile.level_exponent:
        return 0
    codim = profile.d_m(m) + _sm_exponent(m, profile.is_real, profile.level_exponent)
    exponent = (n - m) * (codim - n + m + 1)
    return math.floor(pow2(exponent))


def _stratum_cap_exponent(d, s, n, m, sm):
    """Closed-form cap exponent for strata below the stationary range."""
    return (n - m) * (d - m * (2 * s - m - 1) // 2 - n + 1 - sm)


def bound_sl_exponential(profile, n: int) -> int:
    """Symbol length bound by summing power-of-two stratum caps."""
    d = profile.d
    p = profile.pythagoras
    s = kaplansky_s(p)
    sigma = profile.level_exponent
    terms = []
    if s > n:
        for m in range(n + 1):
            sm = _sm_exponent(m, profile.is_real, sigma)
            terms.append(pow2(_stratum_cap_exponent(d, s, n, m, sm)))
    elif not profile.is_real:
        for m in range(s):
            sm = _sm_exponent(m, False, sigma)
            terms.append(pow2(_stratum_cap_exponent(d, s, n, m, sm)))
        terms.append(pow2((n - s) * (d - s * (s - 1) // 2 - n + 1)))
    else:
        for m in range(s + 1):
            terms.append(pow2(_stratum_cap_exponent(d, s, n, m, 1)))
        stationary = d - s * (s + 1) // 2 - n
        shift = 0 if p & (p - 1) == 0 else 1
        for m in range(s + 1, n + 1):
            terms.append(pow2((n - m) * (stationary + m - shift)))
    return math.floor(sum(terms))


def linked_stratum_cap(d, d_m, n, m, is_real, s, use_exact_subspace_count=False):
    """Stratum contribution to the linkage-based bound.

    Any two distinct stratum-m forms whose slot spans fit in a common
    (n-m+1)-dimensional subspace are linked and merge into one summand, so
    the stratum needs at most one form per such subspace, and each subspace
    is counted once per (n-m)-dimensional hyperplane of it.
    """
    if not is_real and m > s:
        return 0
    if n - m >= d_m - 1:
        return 1
    if d - n + m <= 0:
        raise DegenerateDenominator(
            "no proper superspaces in dimension %d for cofactor %d" % (d, n - m)
        )
    if use_exact_subspace_count:
        numerator = gaussian_count(d, n - m + 1)
    else:
        numerator = 1 << ((n - m + 1) * (d - n + m))
    return numerator // ((1 << (d - n + m)) - 1)


def bound_sl_linked(profile, n: int, use_exact_subspace_count=False) -> int:
    p = profile.pythagoras
    s = kaplansky_s(p)
    return sum(
        linked_stratum_cap(
            profile.d, profile.d_m(m), n, m, profile.is_real, s,
            use_exact_subspace_count,
        )
        for m in range(n + 1)
    )


def _comb0(a: int, b: int) -> int:
    return math.comb(a, b) if b >= 0 else 0


def _nonreal_top(profile, n: int) -> int:
    if profile.is_real:
        return n
    return min(profile.level_exponent, n)


def bound_sl_binomial(profile, n: int) -> int:
    """Choices of slot sets from a nested basis, one summand per stratum."""
    return sum(
        _comb0(profile.d_m(m), n - m) for m in range(_nonreal_top(profile, n) + 1)
    )


def bound_sl_paired(profile, n: int) -> int:
    """Binomial bound with adjacent strata merged through a shared slot.

    Strata 2m and 2m+1 share the count of (n-2m-1)-subsets of the level-2m
    basis.  When n is even the final pair degenerates to the single
    all-ones form, which contributes one summand, not a binomial with a
    negative lower index.
    """
    top = _nonreal_top(profile, n) // 2
    total = 0
    for m in range(top + 1):
        if n - 2 * m - 1 >= 0:
            total += _comb0(profile.d_m(2 * m), n - 2 * m - 1)
        else:
            total += 1
    return total


def split_basis_term(d_m: int, j: int) -> int:
    """Number of j-subsets of a basis split into halves, even on one side."""
    return sum(
        math.comb(d_m // 2, 2 * r) * _comb0((d_m + 1) // 2, j - 2 * r)
        for r in range(j // 2 + 1)
    )


def bound_sl_split_basis(profile, n: int) -> int:
    top = n - 1 if profile.is_real else min(profile.level_exponent, n - 1)
    return sum(split_basis_term(profile.d_m(m), n - m - 1) for m in range(top + 1))


def compare_quotient_floor_bases(d: int, d_m: int, k: int):
    """Linked caps over the full group and over a quotient, as exact rationals.

    Returns (full, reduced) for cofactor dimension k.  For k = 0 the full
    value never exceeds the reduced one; for k >= 1 and d_m < d the
    reduced base gives the strictly smaller cap.
    """
    if not 0 <= k < d_m <= d:
        raise InvalidCase("need 0 <= k < d_m <= d, got k=%r d_m=%r d=%r" % (k, d_m, d))
    full = Fraction(1 << ((k + 1) * (d - k)), (1 << (d - k)) - 1)
    reduced = Fraction(1 << ((k + 1) * (d_m - k)), (1 << (d_m - k)) - 1)
    return full, reduced


# ---------------------------------------------------------------------------
# exact polynomial side


@dataclass(frozen=True)
class RationalPolynomial:
    """Polynomial with exact rational coefficients, lowest degree first."""

    coeffs: tuple

    @staticmethod
    def make(seq) -> "RationalPolynomial":
        coeffs = [Fraction(c) for c in seq]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        return RationalPolynomial(tuple(coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def coefficient(self, i: int) -> Fraction:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else Fraction(0)

    @property
    def leading(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __call__(self, x) -> Fraction:
        out = Fraction(0)
        for c in reversed(self.coeffs):
            out = out * x + c
        return out

    def __add__(self, other: "RationalPolynomial") -> "RationalPolynomial":
        width = max(len(self.coeffs), len(other.coeffs))
        return RationalPolynomial.make(
            self.coefficient(i) + other.coefficient(i) for i in range(width)
        )

    def __sub__(self, other: "RationalPolynomial") -> "RationalPolynomial":
        width = max(len(self.coeffs), len(other.coeffs))
        return RationalPolynomial.make(
            self.coefficient(i) - other.coefficient(i) for i in range(width)
        )

    def __mul__(self, other):
        if isinstance(other, RationalPolynomial):
            out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs))
            for i, a in enumerate(self.coeffs):
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
            return RationalPolynomial.make(out)
        return RationalPolynomial.make(c * Fraction(other) for c in self.coeffs)

    __rmul__ = __mul__


def binom_poly(r: int) -> RationalPolynomial:
    """C(X, r) as an exact polynomial in X."""
    if r < 0:
        raise InvalidCase("binomial index must be nonnegative, got %d" % r)
    out = RationalPolynomial.make([1])
    for i in range(r):
        out = out * RationalPolynomial.make([-i, 1])
    return out * Fraction(1, math.factorial(r))


def poly_affine(p: RationalPolynomial, a, b) -> RationalPolynomial:
    """The polynomial p(a X + b)."""
    arg = RationalPolynomial.make([b, a])
    out = RationalPolynomial.make([0])
    power = RationalPolynomial.make([1])
    for c in p.coeffs:
        out = out + power * c
        power = power * arg
    return out


def poly_binom_sum(n: int, m: int):
    """The two split-basis stratum counts as exact polynomials.

    With j = n - m - 1, returns sum_r C(X,2r) C(X,j-2r) and
    sum_r C(X,2r) C(X+1,j-2r).  Both have degree at most j; for j >= 1 the
    coefficient of X^j is at most 2^j / (2 j!).  The j = 0 sums are the
    constant 1, which exceeds the half bound, so that edge is exempt from
    the leading-coefficient check.
    """
    j = n - m - 1
    if j < 0:
        raise InvalidCase("need n - m - 1 >= 0, got n=%d m=%d" % (n, m))
    plain = RationalPolynomial.make([0])
    shifted = RationalPolynomial.make([0])
    for r in range(j // 2 + 1):
        even = binom_poly(2 * r)
        plain = plain + even * binom_poly(j - 2 * r)
        shifted = shifted + even * poly_affine(binom_poly(j - 2 * r), 1, 1)
    cap = Fraction(2 ** j, 2 * math.factorial(j))
    for poly in (plain, shifted):
        if poly.degree > j:
            raise LemmaViolation(
                "degree %d exceeds %d for n=%d m=%d" % (poly.degree, j, n, m)
            )
        if j >= 1 and poly.coefficient(j) > cap:
            raise LemmaViolation(
                "leading coefficient %s exceeds %s for n=%d m=%d"
                % (poly.coefficient(j), cap, n, m)
            )
    return plain, shifted


def bound_sl_polynomial(d0: int, n: int):
    """Leading monomial and remainder of the split-basis bound in d_0.

    Substitutes d_m := d_0 throughout the split-basis bound and expands the
    halving floors for the parity of d0.  Returns (leading, f) with
    leading = X^{n-1} / (2 (n-1)!) and f of degree at most n - 2 such that
    leading(d0) + f(d0) is the expanded bound.
    """
    if n < 2:
        raise InvalidCase("polynomial bound needs degree at least 2, got %d" % n)
    if d0 < 0:
        raise InvalidCase("d0 must be nonnegative, got %d" % d0)
    total = RationalPolynomial.make([0])
    for j in range(n):
        plain, shifted = poly_binom_sum(j + 1, 0)
        if d0 % 2 == 0:
            total = total + poly_affine(plain, Fraction(1, 2), 0)
        else:
            total = total + poly_affine(shifted, Fraction(1, 2), Fraction(-1, 2))
    leading = RationalPolynomial.make(
        [0] * (n - 1) + [Fraction(1, 2 * math.factorial(n - 1))]
    )
    remainder = total - leading
    if remainder.degree > n - 2:
        raise DegreeViolation(
            "remainder degree %d exceeds %d for n=%d parity=%d"
            % (remainder.degree, n - 2, n, d0 % 2)
        )
    return leading, remainder


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class BoundRow:
    bound_id: str
    value: int
    formula: str


@dataclass(frozen=True)
class BoundReport:
    scheme_name: str
    degree: int
    rows: tuple
    exact_sl: int | None
    notes: tuple

    def value_of(self, bound_id: str) -> int:
        for row in self.rows:
            if row.bound_id == bound_id:
                return row.value
        raise KeyError(bound_id)

    def check_dominance(self) -> None:
        if self.exact_sl is None:
            return
        for row in self.rows:
            if row.value < self.exact_sl:
                raise VerificationFailure(
                    "bound %s = %d is below the exact symbol length %d for %s"
                    % (row.bound_id, row.value, self.exact_sl, self.scheme_name)
                )

    def as_dict(self) -> dict:
        bounds = {row.bound_id: row.value for row in self.rows}
        tightness = {}
        if self.exact_sl is not None and self.exact_sl > 0:
            for row in self.rows:
                tightness[row.bound_id] = str(Fraction(row.value, self.exact_sl))
        return {
            "scheme": self.scheme_name,
            "n": self.degree,
            "bounds": bounds,
            "exact_sl": self.exact_sl,
            "tightness": tightness,
            "formulas": {row.bound_id: row.formula for row in self.rows},
            "notes": list(self.notes),
        }


BOUND_FORMULAS = {
    "exponential": "sum over strata of 2^((n-m)(d_m_cap - n + m + 1))",
    "linked-power": "sum over strata of min(1, floor(2^((n-m+1)(d-n+m)) / (2^(d-n+m)-1)))",
    "linked-exact": "linked cap with the exact subspace count as numerator",
    "binomial": "sum over strata of C(d_m, n-m)",
    "paired": "sum over even strata of C(d_2m, n-2m-1), plus the all-ones stratum",
    "split-basis": "sum over strata of C(floor(d_m/2), 2r) C(ceil(d_m/2), n-m-1-2r)",
}


def make_bound_report(scheme, n: int, exact_sl: int | None = None) -> BoundReport:
    profile = scheme.invariants()
    rows = (
        BoundRow("exponential", bound_sl_exponential(profile, n),
                 BOUND_FORMULAS["exponential"]),
        BoundRow("linked-power", bound_sl_linked(profile, n),
                 BOUND_FORMULAS["linked-power"]),
        BoundRow("linked-exact", bound_sl_linked(profile, n, True),
                 BOUND_FORMULAS["linked-exact"]),
        BoundRow("binomial", bound_sl_binomial(profile, n),
                 BOUND_FORMULAS["binomial"]),
        BoundRow("paired", bound_sl_paired(profile, n),
                 BOUND_FORMULAS["paired"]),
        BoundRow("split-basis", bound_sl_split_basis(profile, n),
                 BOUND_FORMULAS["split-basis"]),
    )
    return BoundReport(scheme.name, n, rows, exact_sl, BOUND_NOTES)
