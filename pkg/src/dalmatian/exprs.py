"""Expression trees over numeric invariants.

Leaves are column indices, internal nodes are unary/binary operators drawn
from an :class:`OperatorRegistry`.  Trees are immutable after construction
and safe to share between threads.

Evaluation distinguishes three outcomes per row:

* a finite float,
* ``MISSING`` (some referenced invariant has no value on that row),
* ``UNDEFINED`` (a sub-evaluation hit a domain violation, overflowed to
  infinity, or produced a NaN).

Missing dominates undefined: a row that cannot be addressed at all is
treated as absent rather than ill-defined.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError, StructuralError


class _Undefined:
    __slots__ = ()

    def __repr__(self) -> str:  # pragma: no cover
        return "UNDEFINED"


class _Missing:
    __slots__ = ()

    def __repr__(self) -> str:  # pragma: no cover
        return "MISSING"


#: Singleton returned by scalar evaluation on a domain violation / overflow.
UNDEFINED = _Undefined()
#: Singleton returned by scalar evaluation when an input value is absent.
MISSING = _Missing()


class UnaryOp:
    """A real -> real operator with scalar and vectorized evaluators.

    ``render`` turns the child's text into this node's text; ``atomic``
    says whether the result is self-delimiting (function forms and the
    paren-wrapped affix forms are; ``e^2`` is not).  Function forms take
    the child's bare text, affix forms take operand text (parenthesized
    when the child is not atomic).
    """

    __slots__ = ("id", "fn", "np_fn", "render", "atomic", "takes_bare")

    def __init__(self, id: str, fn, np_fn, render, atomic: bool, takes_bare: bool):
        self.id = id
        self.fn = fn
        self.np_fn = np_fn
        self.render = render
        self.atomic = atomic
        self.takes_bare = takes_bare

    def __repr__(self) -> str:
        return f"UnaryOp({self.id})"


class BinaryOp:
    """A real x real -> real operator.

    ``symbol`` is the infix token, or None for function-form operators
    (max, min).  Commutative operators are subject to the canonical-child
    orientation rule during enumeration.
    """

    __slots__ = ("id", "fn", "np_fn", "symbol", "commutative")

    def __init__(self, id: str, fn, np_fn, symbol: str | None, commutative: bool):
        self.id = id
        self.fn = fn
        self.np_fn = np_fn
        self.symbol = symbol
        self.commutative = commutative

    def __repr__(self) -> str:
        return f"BinaryOp({self.id})"


# ---------------------------------------------------------------------------
# node types
# ---------------------------------------------------------------------------


class Leaf:
    __slots__ = ("index", "size", "_key")

    def __init__(self, index: int):
        self.index = index
        self.size = 1
        self._key = ((0, f"{index:08d}"),)

    @property
    def key(self):
        return self._key

    def __eq__(self, other):
        return isinstance(other, (Leaf, Unary, Binary)) and self._key == other.key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self) -> str:
        return f"Leaf({self.index})"


class Unary:
    __slots__ = ("op", "child", "size", "_key")

    def __init__(self, op: UnaryOp, child):
        self.op = op
        self.child = child
        self.size = child.size + 1
        self._key = child.key + ((1, op.id),)

    @property
    def key(self):
        return self._key

    def __eq__(self, other):
        return isinstance(other, (Leaf, Unary, Binary)) and self._key == other.key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self) -> str:
        return f"Unary({self.op.id}, {self.child!r})"


class Binary:
    __slots__ = ("op", "left", "right", "size", "_key")

    def __init__(self, op: BinaryOp, left, right):
        self.op = op
        self.left = left
        self.right = right
        self.size = left.size + right.size + 1
        self._key = left.key + right.key + ((2, op.id),)

    @property
    def key(self):
        return self._key

    def __eq__(self, other):
        return isinstance(other, (Leaf, Unary, Binary)) and self._key == other.key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self) -> str:
        return f"Binary({self.op.id}, {self.left!r}, {self.right!r})"


Expression = Leaf | Unary | Binary


def complexity(expr: Expression) -> int:
    """Total node count: invariants + unary operators + binary operators."""
    return expr.size


def leaf_indices(expr: Expression) -> tuple[int, ...]:
    """Leaf column indices in left-to-right order."""
    if isinstance(expr, Leaf):
        return (expr.index,)
    if isinstance(expr, Unary):
        return leaf_indices(expr.child)
    return leaf_indices(expr.left) + leaf_indices(expr.right)


def is_canonical(expr: Expression) -> bool:
    """True iff no invariant repeats and every commutative binary node is
    canonically oriented (larger subtree left; equal sizes broken by the
    suffix label key, smaller key left).

    Exactly one orientation of each commutative node passes, since sibling
    subtrees never share invariants and therefore never share a key.
    """
    idx = leaf_indices(expr)
    if len(set(idx)) != len(idx):
        return False
    return _oriented(expr)


def _oriented(expr: Expression) -> bool:
    if isinstance(expr, Leaf):
        return True
    if isinstance(expr, Unary):
        return _oriented(expr.child)
    if expr.op.commutative:
        l, r = expr.left, expr.right
        if l.size < r.size:
            return False
        if l.size == r.size and l.key >= r.key:
            return False
    return _oriented(expr.left) and _oriented(expr.right)


def canonical_label_string(expr: Expression, names: Sequence[str] | None = None) -> str:
    """Suffix-order label sequence used for commutative tie-breaking.

    Children appear before their parent, left to right.  With ``names``
    given, leaves print as column names; otherwise as zero-padded indices.
    """
    tokens: list[str] = []

    def walk(node):
        if isinstance(node, Leaf):
            tokens.append(names[node.index] if names is not None else f"{node.index:08d}")
        elif isinstance(node, Unary):
            walk(node.child)
            tokens.append(node.op.id)
        else:
            walk(node.left)
            walk(node.right)
            tokens.append(node.op.id)

    walk(expr)
    return " ".join(tokens)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def evaluate(expr: Expression, row: Sequence[float | None]):
    """Evaluate on a single row; values are floats or None for missing.

    Returns a float, MISSING, or UNDEFINED.  A leaf index outside the row
    raises StructuralError.
    """
    if isinstance(expr, Leaf):
        if not 0 <= expr.index < len(row):
            raise StructuralError(f"leaf index {expr.index} outside row of arity {len(row)}")
        v = row[expr.index]
        return MISSING if v is None else float(v)
    if isinstance(expr, Unary):
        child = evaluate(expr.child, row)
        if child is MISSING or child is UNDEFINED:
            return child
        try:
            out = expr.op.fn(child)
        except (ValueError, OverflowError, ZeroDivisionError):
            return UNDEFINED
        return out if math.isfinite(out) else UNDEFINED
    left = evaluate(expr.left, row)
    right = evaluate(expr.right, row)
    if left is MISSING or right is MISSING:
        return MISSING
    if left is UNDEFINED or right is UNDEFINED:
        return UNDEFINED
    try:
        out = expr.op.fn(left, right)
    except (ValueError, OverflowError, ZeroDivisionError):
        return UNDEFINED
    return out if math.isfinite(out) else UNDEFINED


def evaluate_columns(
    expr: Expression,
    columns: Sequence[np.ndarray],
    missing: Sequence[np.ndarray | None],
):
    """Vectorized evaluation over whole columns.

    Returns ``(values, missing_mask, undefined_mask)`` where either mask may
    be None when no row is affected.  ``undefined_mask`` marks rows where
    any sub-evaluation left the finite range, even if later operations
    brought the value back (1/exp(x) overflowing inside, say).
    """
    with np.errstate(all="ignore"):
        vals, miss, undef = _eval_cols(expr, columns, missing)
    return vals, miss, undef


def _eval_cols(expr, columns, missing):
    if isinstance(expr, Leaf):
        if not 0 <= expr.index < len(columns):
            raise StructuralError(f"leaf index {expr.index} outside table of arity {len(columns)}")
        return columns[expr.index], missing[expr.index], None
    if isinstance(expr, Unary):
        cv, cm, cu = _eval_cols(expr.child, columns, missing)
        vals = expr.op.np_fn(cv)
        return vals, cm, _grow_undef(cu, vals)
    lv, lm, lu = _eval_cols(expr.left, columns, missing)
    rv, rm, ru = _eval_cols(expr.right, columns, missing)
    vals = expr.op.np_fn(lv, rv)
    if lu is None:
        undef = ru
    elif ru is None:
        undef = lu
    else:
        undef = lu | ru
    return vals, _or_masks(lm, rm), _grow_undef(undef, vals)


def _or_masks(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return a | b


def _grow_undef(undef, vals):
    finite = np.isfinite(vals)
    if finite.all():
        return undef
    bad = ~finite
    return bad if undef is None else undef | bad


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------

_INFIX_SYMBOLS = {"add": "+", "sub": "-", "mult": "*", "div": "/", "pow": "^"}


def to_canonical_string(expr: Expression, names: Sequence[str]) -> str:
    """Deterministic text form; structurally equal trees render identically.

    Identifiers stay bare, function forms delimit themselves, and every
    other operand of an infix operator is parenthesized.
    """
    text, _ = _render(expr, names)
    return text


def _render(expr, names):
    # returns (text, atomic)
    if isinstance(expr, Leaf):
        return names[expr.index], True
    if isinstance(expr, Unary):
        child_text, child_atomic = _render(expr.child, names)
        if expr.op.takes_bare:
            inner = child_text
        else:
            inner = child_text if child_atomic else f"({child_text})"
        return expr.op.render(inner), expr.op.atomic
    lt, la = _render(expr.left, names)
    rt, ra = _render(expr.right, names)
    if expr.op.symbol is None:
        return f"{expr.op.id}({lt},{rt})", True
    left = lt if la else f"({lt})"
    right = rt if ra else f"({rt})"
    return f"{left}{expr.op.symbol}{right}", False


# ---------------------------------------------------------------------------
# operator registry
# ---------------------------------------------------------------------------


class OperatorRegistry:
    """The configurable operator pool used by enumeration and evaluation."""

    def __init__(self, unary: Sequence[UnaryOp], binary: Sequence[BinaryOp]):
        ids = [op.id for op in unary] + [op.id for op in binary]
        if len(set(ids)) != len(ids):
            raise ConfigurationError("duplicate operator ids in registry")
        self.unary = tuple(unary)
        self.binary = tuple(binary)

    def subset(self, names: Sequence[str]) -> "OperatorRegistry":
        """Registry restricted to the named operators, in the order given.

        The order matters: enumeration labels nodes operator by operator in
        registry order, and the candidate order feeds an order-sensitive
        filter.
        """
        unary_by_id = {op.id: op for op in self.unary}
        binary_by_id = {op.id: op for op in self.binary}
        unknown = [n for n in names if n not in unary_by_id and n not in binary_by_id]
        if unknown:
            known = sorted(unary_by_id) + sorted(binary_by_id)
            raise ConfigurationError(
                f"unknown operator name(s) {', '.join(unknown)}; "
                f"valid names: {', '.join(known)}"
            )
        unary = [unary_by_id[n] for n in names if n in unary_by_id]
        binary = [binary_by_id[n] for n in names if n in binary_by_id]
        return OperatorRegistry(unary, binary)


def _safe_pow(a: float, b: float) -> float:
    return math.pow(a, b)


def _func_op(id: str, fn, np_fn) -> UnaryOp:
    return UnaryOp(id, fn, np_fn, lambda e, _n=id: f"{_n}({e})", True, True)


_UNARY_TABLE = [
    UnaryOp("plus1", lambda x: x + 1.0, lambda x: x + 1.0, lambda e: f"({e}+1)", True, False),
    UnaryOp("minus1", lambda x: x - 1.0, lambda x: x - 1.0, lambda e: f"({e}-1)", True, False),
    UnaryOp("times2", lambda x: 2.0 * x, lambda x: 2.0 * x, lambda e: f"(2*{e})", True, False),
    UnaryOp("half", lambda x: x / 2.0, lambda x: x / 2.0, lambda e: f"({e}/2)", True, False),
    UnaryOp("square", lambda x: x * x, np.square, lambda e: f"{e}^2", False, False),
    _func_op("sqrt", math.sqrt, np.sqrt),
    _func_op("floor", lambda x: float(math.floor(x)), np.floor),
    _func_op("ceil", lambda x: float(math.ceil(x)), np.ceil),
    _func_op("abs", abs, np.abs),
    _func_op("log", math.log, np.log),
    _func_op("log10", math.log10, np.log10),
    _func_op("exp", math.exp, np.exp),
    _func_op("pow10", lambda x: math.pow(10.0, x), lambda x: np.power(10.0, x)),
    _func_op("recip", lambda x: 1.0 / x, lambda x: 1.0 / x),
    _func_op("neg", lambda x: -x, lambda x: -x),
    _func_op("sin", math.sin, np.sin),
    _func_op("cos", math.cos, np.cos),
    _func_op("asin", math.asin, np.arcsin),
    _func_op("atan", math.atan, np.arctan),
]

_BINARY_TABLE = [
    BinaryOp("add", lambda a, b: a + b, lambda a, b: a + b, "+", True),
    BinaryOp("sub", lambda a, b: a - b, lambda a, b: a - b, "-", False),
    BinaryOp("mult", lambda a, b: a * b, lambda a, b: a * b, "*", True),
    BinaryOp("div", lambda a, b: a / b, lambda a, b: a / b, "/", False),
    BinaryOp("pow", _safe_pow, np.power, "^", False),
    BinaryOp("max", max, np.maximum, None, True),
    BinaryOp("min", min, np.minimum, None, True),
]

UNARY_OPS = {op.id: op for op in _UNARY_TABLE}
BINARY_OPS = {op.id: op for op in _BINARY_TABLE}


def default_registry() -> OperatorRegistry:
    """Every built-in operator."""
    return OperatorRegistry(_UNARY_TABLE, _BINARY_TABLE)


#: Named operator subsets, smallest to largest.
PRESETS = {
    "basic": ["plus1", "minus1", "square", "sqrt", "add", "sub", "mult", "div"],
    "trig": [
        "plus1", "minus1", "square", "sqrt", "sin", "cos", "log", "recip", "exp",
        "add", "sub", "mult", "div",
    ],
    "full": [
        "plus1", "minus1", "square", "sqrt", "sin", "cos", "log", "recip", "exp",
        "abs", "asin", "atan",
        "add", "sub", "mult", "div",
    ],
}


def preset_registry(name: str) -> OperatorRegistry:
    if name not in PRESETS:
        raise ConfigurationError(
            f"unknown operator preset {name!r}; valid presets: {', '.join(sorted(PRESETS))}"
        )
    return default_registry().subset(PRESETS[name])
