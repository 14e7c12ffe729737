"""Constructors for validated schemes of elementary type.

Five base schemes are provided: QC (one square class), RC (two classes,
binary form <1,1> definite), F1 and F2 (two classes with universal binary
forms; -1 a square for F1, a nonsquare for F2), and Q2 (the eight-class
dyadic local scheme, loaded from a frozen table).  Larger schemes come from
two combinators: laurent(S) adjoins a uniformizer coordinate with the usual
two-residue-form value sets, product(S1, S2) takes the direct product of the
class groups with componentwise value sets.

A small expression language (see parse_scheme_expr) names these
constructions; build() caches schemes by canonical label and validates every
table it returns.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path

from .errors import DimensionCapExceeded, ParseError
from .scheme import Scheme, SquareClassGroup, ValueSetTable, validate_scheme

BASE_KINDS = ("QC", "RC", "F1", "F2", "Q2")
DATA_DIR = Path(__file__).parent / "data"
MAX_DIM = 6


# ---------------------------------------------------------------------------
# expression AST


@dataclass(frozen=True)
class BaseExpr:
    kind: str


@dataclass(frozen=True)
class LaurentExpr:
    child: object


@dataclass(frozen=True)
class ProductExpr:
    left: object
    right: object


def expr_dim(expr) -> int:
    if isinstance(expr, BaseExpr):
        return {"QC": 0, "RC": 1, "F1": 1, "F2": 1, "Q2": 3}[expr.kind]
    if isinstance(expr, LaurentExpr):
        return expr_dim(expr.child) + 1
    if isinstance(expr, ProductExpr):
        return expr_dim(expr.left) + expr_dim(expr.right)
    raise TypeError("not a scheme expression: %r" % (expr,))


def expr_label(expr) -> str:
    if isinstance(expr, BaseExpr):
        return expr.kind
    if isinstance(expr, LaurentExpr):
        return "laurent(%s)" % expr_label(expr.child)
    if isinstance(expr, ProductExpr):
        return "product(%s,%s)" % (expr_label(expr.left), expr_label(expr.right))
    raise TypeError("not a scheme expression: %r" % (expr,))


# ---------------------------------------------------------------------------
# base tables


def _qc_table():
    return SquareClassGroup(0, 0), ValueSetTable((1,))


def _rc_table():
    # classes {1, -1}; <1,1> is definite, <1,-1> universal
    return SquareClassGroup(1, 1), ValueSetTable((0b01, 0b11))


def _f1_table():
    # two classes, -1 a square, every binary form universal
    return SquareClassGroup(1, 0), ValueSetTable((0b11, 0b11))


def _f2_table():
    # two classes, -1 the nonsquare, every binary form universal
    return SquareClassGroup(1, 1), ValueSetTable((0b11, 0b11))


def _hilbert2(u: int, v: int) -> int:
    """2-adic Hilbert symbol of two nonzero integers, +1 or -1."""
    alpha, u1 = _split_two(u)
    beta, v1 = _split_two(v)
    e = ((u1 - 1) // 2) * ((v1 - 1) // 2)
    e += alpha * ((v1 * v1 - 1) // 8)
    e += beta * ((u1 * u1 - 1) // 8)
    return -1 if e & 1 else 1


def _split_two(u: int):
    k = 0
    while u % 2 == 0:
        u //= 2
        k += 1
    return k, u


def _dyadic_rep(a: int) -> int:
    """Integer representative of dyadic class mask a (bits: sign, 2, 5)."""
    r = 1
    if a & 1:
        r = -r
    if a & 2:
        r *= 2
    if a & 4:
        r *= 5
    return r


def generate_dyadic_table() -> dict:
    """Recompute the dyadic base table from the 2-adic Hilbert symbol.

    b is a value of <1,a> exactly when the ternary form <1, a, -b> is
    isotropic over the dyadic field; for a not in the class of -1 that is
    the symbol condition (b, -a) = 1, and for a in the class of -1 the form
    <1,a> is hyperbolic, hence universal.  The shipped JSON file freezes
    this table; a test regenerates and compares it.
    """
    eps = 1
    rows = []
    for a in range(8):
        if a == eps:
            rows.append(255)
            continue
        row = 0
        for b in range(8):
            if _hilbert2(_dyadic_rep(b), -_dyadic_rep(a)) == 1:
                row |= 1 << b
        assert row & 1 and (row >> a) & 1
        rows.append(row)
    return {
        "dim": 3,
        "minus_one": eps,
        "coordinates": ["-1", "2", "5"],
        "rows": rows,
    }


def _q2_table():
    with open(DATA_DIR / "dyadic_table.json") as fh:
        data = json.load(fh)
    return (
        SquareClassGroup(data["dim"], data["minus_one"]),
        ValueSetTable(tuple(data["rows"])),
    )


_BASE_TABLES = {
    "QC": _qc_table,
    "RC": _rc_table,
    "F1": _f1_table,
    "F2": _f2_table,
    "Q2": _q2_table,
}


# ---------------------------------------------------------------------------
# combinators


def laurent_extend(scheme: Scheme, name: str | None = None,
                   validate: bool = True) -> Scheme:
    """Adjoin a uniformizer coordinate as the new highest class bit.

    Value sets follow the two-residue-form rule: classes from the base keep
    their base value sets, except the class of -1 whose binary form stays
    universal; classes carrying the new coordinate have rigid two-element
    value sets.
    """
    d = scheme.d
    if d + 1 > MAX_DIM:
        raise DimensionCapExceeded("laurent extension would reach dimension %d" % (d + 1))
    size = scheme.size
    new_size = size * 2
    full = (1 << new_size) - 1
    eps = scheme.eps
    rows = []
    for a in range(new_size):
        if a == eps:
            rows.append(full)
        elif a < size:
            rows.append(scheme.values.rows[a])
        else:
            rows.append(1 | (1 << a))
    out = Scheme(
        SquareClassGroup(d + 1, eps),
        ValueSetTable(tuple(rows)),
        name if name is not None else "laurent(%s)" % scheme.name,
    )
    if validate:
        validate_scheme(out)
    return out


def product(s1: Scheme, s2: Scheme, name: str | None = None,
            validate: bool = True) -> Scheme:
    """Direct product scheme: class pairs, componentwise value sets."""
    d = s1.d + s2.d
    if d > MAX_DIM:
        raise DimensionCapExceeded("product would reach dimension %d" % d)
    shift = 1 << s1.d
    eps = s1.eps | (s2.eps << s1.d)
    rows = []
    for a in range(1 << d):
        a1 = a & (shift - 1)
        a2 = a >> s1.d
        row1 = s1.values.rows[a1]
        row2 = s2.values.rows[a2]
        row = 0
        m = row2
        while m:
            low = m & -m
            y = low.bit_length() - 1
            m ^= low
            row |= row1 << (y * shift)
        rows.append(row)
    out = Scheme(
        SquareClassGroup(d, eps),
        ValueSetTable(tuple(rows)),
        name if name is not None else "product(%s,%s)" % (s1.name, s2.name),
    )
    if validate:
        validate_scheme(out)
    return out


# ---------------------------------------------------------------------------
# building from expressions


_CACHE: dict[str, Scheme] = {}


def build(expr, validate: bool = True) -> Scheme:
    """Scheme for an expression; cached by canonical label."""
    label = expr_label(expr)
    hit = _CACHE.get(label)
    if hit is not None:
        return hit
    if expr_dim(expr) > MAX_DIM:
        raise DimensionCapExceeded(
            "expression %s has dimension %d, cap is %d"
            % (label, expr_dim(expr), MAX_DIM)
        )
    if isinstance(expr, BaseExpr):
        group, table = _BASE_TABLES[expr.kind]()
        out = Scheme(group, table, label)
        if validate:
            validate_scheme(out)
    elif isinstance(expr, LaurentExpr):
        out = laurent_extend(build(expr.child, validate), name=label, validate=validate)
    else:
        out = product(build(expr.left, validate), build(expr.right, validate),
                      name=label, validate=validate)
    _CACHE[label] = out
    return out


def parse_scheme_expr(text: str) -> object:
    """Parse the scheme expression grammar.

    expr := base | "laurent" "(" expr ")" | "product" "(" expr "," expr ")"
    with base one of QC, RC, F1, F2, Q2; case and whitespace insensitive.
    """
    pos = 0

    def skip_ws():
        nonlocal pos
        while pos < len(text) and text[pos].isspace():
            pos += 1

    def expect(ch):
        nonlocal pos
        skip_ws()
        if pos >= len(text) or text[pos] != ch:
            raise ParseError("expected %r at offset %d" % (ch, pos), position=pos)
        pos += 1

    def word():
        nonlocal pos
        skip_ws()
        start = pos
        while pos < len(text) and (text[pos].isalnum() or text[pos] == "_"):
            pos += 1
        if start == pos:
            raise ParseError("expected a name at offset %d" % pos, position=pos)
        return text[start:pos], start

    def expr():
        w, start = word()
        up = w.upper()
        if up in BASE_KINDS:
            return BaseExpr(up)
        low = w.lower()
        if low == "laurent":
            expect("(")
            inner = expr()
            expect(")")
            return LaurentExpr(inner)
        if low == "product":
            expect("(")
            left = expr()
            expect(",")
            right = expr()
            expect(")")
            return ProductExpr(left, right)
        raise ParseError("unknown scheme name %r at offset %d" % (w, start), position=start)

    result = expr()
    skip_ws()
    if pos != len(text):
        raise ParseError("trailing input at offset %d" % pos, position=pos)
    return result


def build_from_text(text: str, max_d: int = MAX_DIM) -> Scheme:
    expr = parse_scheme_expr(text)
    d = expr_dim(expr)
    if d > max_d:
        raise DimensionCapExceeded("scheme dimension %d exceeds limit %d" % (d, max_d))
    return build(expr)


# ---------------------------------------------------------------------------
# the standard test family


def standard_expressions(max_d: int) -> list:
    """The canonical family of expressions of each dimension up to max_d.

    Dimension 0 holds QC alone; dimension 1 the three nontrivial bases plus
    laurent(QC); higher dimensions take laurent extensions of the previous
    layer, products of lower layers (QC factors excluded, operands ordered
    by dimension then label), and Q2 at dimension 3.  Sorted by (dimension,
    label).
    """
    layers: list[list] = [[BaseExpr("QC")]]
    for d in range(1, max_d + 1):
        layer = []
        if d == 1:
            layer.extend([BaseExpr("RC"), BaseExpr("F1"), BaseExpr("F2")])
        if d == 3:
            layer.append(BaseExpr("Q2"))
        layer.extend(LaurentExpr(e) for e in layers[d - 1])
        for i in range(1, d // 2 + 1):
            j = d - i
            left_pool = sorted(layers[i], key=expr_label)
            right_pool = sorted(layers[j], key=expr_label)
            if i == j:
                for a, b in itertools.combinations_with_replacement(left_pool, 2):
                    layer.append(ProductExpr(a, b))
            else:
                for a in left_pool:
                    for b in right_pool:
                        layer.append(ProductExpr(a, b))
        layers.append(layer)
    out = [e for layer in layers for e in layer]
    out.sort(key=lambda e: (expr_dim(e), expr_label(e)))
    return out


def standard_library(max_d: int, validate: bool = True) -> list[Scheme]:
    """Built schemes for the standard family, ordered by (dimension, label)."""
    return [build(e, validate) for e in standard_expressions(max_d)]
