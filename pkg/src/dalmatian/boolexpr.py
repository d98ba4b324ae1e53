"""Boolean expression trees over property columns.

Connectives are fixed: NOT, AND, OR, XOR, IMPLIES.  AND/OR/XOR are
commutative and follow the same canonical-orientation rule as arithmetic
trees; IMPLIES is not.  Evaluation is strict two-valued with missing
propagation: any missing input makes the whole row missing.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import StructuralError


class BoolOp:
    __slots__ = ("id", "np_fn", "symbol", "commutative")

    def __init__(self, id, np_fn, symbol, commutative):
        self.id = id
        self.np_fn = np_fn
        self.symbol = symbol
        self.commutative = commutative

    def __repr__(self) -> str:  # pragma: no cover
        return f"BoolOp({self.id})"


AND = BoolOp("and", lambda a, b: a & b, "&", True)
OR = BoolOp("or", lambda a, b: a | b, "|", True)
XOR = BoolOp("xor", lambda a, b: a ^ b, "^", True)
IMPLIES = BoolOp("implies", lambda a, b: ~a | b, "->", False)

BOOL_BINARY = (AND, OR, XOR, IMPLIES)


class PLeaf:
    __slots__ = ("index", "size", "key")

    def __init__(self, index: int):
        self.index = index
        self.size = 1
        self.key = ((0, f"{index:08d}"),)

    def __eq__(self, other):
        return isinstance(other, (PLeaf, PNot, PBinary)) and self.key == other.key

    def __hash__(self):
        return hash(self.key)


class PNot:
    __slots__ = ("child", "size", "key")

    def __init__(self, child):
        self.child = child
        self.size = child.size + 1
        self.key = child.key + ((1, "not"),)

    def __eq__(self, other):
        return isinstance(other, (PLeaf, PNot, PBinary)) and self.key == other.key

    def __hash__(self):
        return hash(self.key)


class PBinary:
    __slots__ = ("op", "left", "right", "size", "key")

    def __init__(self, op: BoolOp, left, right):
        self.op = op
        self.left = left
        self.right = right
        self.size = left.size + right.size + 1
        self.key = left.key + right.key + ((2, op.id),)

    def __eq__(self, other):
        return isinstance(other, (PLeaf, PNot, PBinary)) and self.key == other.key

    def __hash__(self):
        return hash(self.key)


BoolExpression = PLeaf | PNot | PBinary


def bool_to_string(expr: BoolExpression, names: Sequence[str]) -> str:
    text, _ = _render(expr, names)
    return text


def _render(expr, names):
    if isinstance(expr, PLeaf):
        return names[expr.index], True
    if isinstance(expr, PNot):
        t, atomic = _render(expr.child, names)
        return ("~" + (t if atomic else f"({t})")), True
    lt, _ = _render(expr.left, names)
    rt, _ = _render(expr.right, names)
    return f"({lt} {expr.op.symbol} {rt})", True


def eval_bool(expr: BoolExpression, row: Sequence[bool | None]):
    """Single-row evaluation: True/False, or None when any referenced
    property is missing on the row."""
    if isinstance(expr, PLeaf):
        if not 0 <= expr.index < len(row):
            raise StructuralError(f"property index {expr.index} outside row of arity {len(row)}")
        return row[expr.index]
    if isinstance(expr, PNot):
        v = eval_bool(expr.child, row)
        return None if v is None else not v
    left = eval_bool(expr.left, row)
    right = eval_bool(expr.right, row)
    if left is None or right is None:
        return None
    return bool(expr.op.np_fn(np.bool_(left), np.bool_(right)))


def eval_bool_columns(
    expr: BoolExpression,
    columns: Sequence[np.ndarray],
    missing: Sequence[np.ndarray | None],
):
    """Vectorized evaluation; returns (values, missing_mask-or-None)."""
    if isinstance(expr, PLeaf):
        if not 0 <= expr.index < len(columns):
            raise StructuralError(
                f"property index {expr.index} outside table of arity {len(columns)}"
            )
        return columns[expr.index], missing[expr.index]
    if isinstance(expr, PNot):
        v, m = eval_bool_columns(expr.child, columns, missing)
        return ~v, m
    lv, lm = eval_bool_columns(expr.left, columns, missing)
    rv, rm = eval_bool_columns(expr.right, columns, missing)
    if lm is None:
        m = rm
    elif rm is None:
        m = lm
    else:
        m = lm | rm
    return expr.op.np_fn(lv, rv), m


def truth_set(expr: BoolExpression, columns, missing) -> np.ndarray:
    """Boolean mask of rows where the expression is definitely true;
    missing rows count as not-true."""
    vals, m = eval_bool_columns(expr, columns, missing)
    return vals if m is None else vals & ~m
