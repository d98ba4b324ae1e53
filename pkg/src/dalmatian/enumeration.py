"""Deterministic enumeration of expression shapes and canonical labelings.

The candidate order is part of the package contract (the conjecture store
is order-sensitive), so it is pinned here precisely:

* budgets come out of :func:`shape_schedule` in nondecreasing complexity,
  ties broken by unary count ascending;
* within a budget, shapes are produced by root decomposition: a lone leaf,
  else all unary-rooted shapes (child shapes recursively, in order), else
  all binary-rooted shapes, splitting the remaining budget with the left
  child taking (u1, b1) for u1 = 0..u outer and b1 = 0..b-1 inner, left
  stream outer, right stream inner;
* within a shape, leaves take invariants in the order given (distinct per
  tree), unary nodes every unary operator in registry order, binary nodes
  every binary operator in registry order; children enumerate before the
  operator choice at their parent, left before right;
* commutative binary nodes are emitted only in canonical orientation
  (larger subtree left; equal sizes keep the smaller suffix label key on
  the left).

tests/oracle.py re-implements this order independently; the two are held
together by the equivalence suite.
"""

from __future__ import annotations

from typing import Iterator, NamedTuple, Sequence

from .exprs import Binary, Expression, Leaf, OperatorRegistry, Unary

LEAF = "L"


class ShapeBudget(NamedTuple):
    u: int
    b: int

    @property
    def complexity(self) -> int:
        return self.u + 2 * self.b + 1


def shape_schedule(max_complexity: int) -> list[ShapeBudget]:
    """All (u, b) with u + 2b + 1 <= max_complexity, complexity ascending,
    unary count ascending within equal complexity."""
    if max_complexity < 1:
        raise ValueError("max_complexity must be >= 1")
    out = []
    for c in range(1, max_complexity + 1):
        # u + 2b = c - 1 with u ascending
        for u in range(0, c):
            rem = c - 1 - u
            if rem % 2 == 0:
                out.append(ShapeBudget(u, rem // 2))
    return out


def generate_shapes(budget: ShapeBudget) -> Iterator[tuple]:
    """Every plane tree with exactly budget.u unary and budget.b binary
    internal nodes, each once, as nested tuples ("U", child) / ("B", l, r)
    with LEAF at the leaves."""
    u, b = budget
    if u == 0 and b == 0:
        yield LEAF
        return
    if u > 0:
        for child in generate_shapes(ShapeBudget(u - 1, b)):
            yield ("U", child)
    if b > 0:
        for u1 in range(u + 1):
            for b1 in range(b):
                right = ShapeBudget(u - u1, b - 1 - b1)
                for left_shape in generate_shapes(ShapeBudget(u1, b1)):
                    for right_shape in generate_shapes(right):
                        yield ("B", left_shape, right_shape)


def shape_size(shape) -> int:
    if shape == LEAF:
        return 1
    if shape[0] == "U":
        return 1 + shape_size(shape[1])
    return 1 + shape_size(shape[1]) + shape_size(shape[2])


def label_shapes(
    shape,
    registry: OperatorRegistry,
    invariants: Sequence[int],
) -> Iterator[Expression]:
    """Every canonical labeling of ``shape`` over distinct invariants drawn
    from ``invariants`` (operators repeat freely)."""
    for tree, _used in _label(shape, registry, tuple(invariants)):
        yield tree


def _label(shape, registry, avail):
    if shape == LEAF:
        for idx in avail:
            yield Leaf(idx), (idx,)
        return
    if shape[0] == "U":
        for child, used in _label(shape[1], registry, avail):
            for op in registry.unary:
                yield Unary(op, child), used
        return
    left_shape, right_shape = shape[1], shape[2]
    lsize = shape_size(left_shape)
    rsize = shape_size(right_shape)
    commutative_ok = lsize >= rsize  # size rule decided by the shape alone
    for left, lused in _label(left_shape, registry, avail):
        remaining = tuple(i for i in avail if i not in lused)
        for right, rused in _label(right_shape, registry, remaining):
            tie_ok = True
            if lsize == rsize:
                tie_ok = left.key < right.key
            for op in registry.binary:
                if op.commutative and not (commutative_ok and tie_ok):
                    continue
                yield Binary(op, left, right), lused + rused


def iter_canonical(
    registry: OperatorRegistry,
    invariants: Sequence[int],
    max_complexity: int,
) -> Iterator[Expression]:
    """The full candidate stream: schedule order, then shapes, then labels."""
    inv = tuple(invariants)
    for budget in shape_schedule(max_complexity):
        if budget.b + 1 > len(inv):
            continue  # not enough distinct invariants for the leaves
        for shape in generate_shapes(budget):
            yield from label_shapes(shape, registry, inv)
