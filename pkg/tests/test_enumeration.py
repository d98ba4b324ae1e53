"""Shape schedule, shape generation, and canonical labeling."""

import math

import pytest

from dalmatian.enumeration import (
    ShapeBudget,
    generate_shapes,
    iter_canonical,
    label_shapes,
    shape_schedule,
    shape_size,
)
from dalmatian.exprs import (
    complexity,
    default_registry,
    is_canonical,
    leaf_indices,
    to_canonical_string,
)
from oracle import oracle_enumerate, render


def test_schedule_single():
    assert shape_schedule(1) == [ShapeBudget(0, 0)]


def test_schedule_to_three():
    assert shape_schedule(3) == [
        ShapeBudget(0, 0),
        ShapeBudget(1, 0),
        ShapeBudget(0, 1),
        ShapeBudget(2, 0),
    ]


def test_schedule_count_seven():
    # brute-force count of (u, b) pairs with u + 2b <= 6
    expected = sum(1 for u in range(7) for b in range(4) if u + 2 * b <= 6)
    assert expected == 16
    assert len(shape_schedule(7)) == 16


def test_schedule_monotone_complexity():
    sched = shape_schedule(9)
    comps = [s.complexity for s in sched]
    assert comps == sorted(comps)
    assert len(set(sched)) == len(sched)


def test_schedule_rejects_zero():
    with pytest.raises(ValueError):
        shape_schedule(0)


def _catalan(n):
    return math.comb(2 * n, n) // (n + 1)


def test_shape_counts():
    assert len(list(generate_shapes(ShapeBudget(0, 0)))) == 1
    assert len(list(generate_shapes(ShapeBudget(0, 2)))) == _catalan(2)
    assert len(list(generate_shapes(ShapeBudget(1, 1)))) == 3
    for b in range(4):
        assert len(list(generate_shapes(ShapeBudget(0, b)))) == _catalan(b)


def test_shapes_unique_and_sized():
    for budget in shape_schedule(7):
        shapes = list(generate_shapes(budget))
        assert len(set(map(repr, shapes))) == len(shapes)
        for s in shapes:
            assert shape_size(s) == budget.complexity


def test_one_unary_one_binary_structures():
    shapes = set(map(repr, generate_shapes(ShapeBudget(1, 1))))
    assert shapes == {
        repr(("U", ("B", "L", "L"))),   # unary above binary
        repr(("B", ("U", "L"), "L")),   # unary on the left leaf
        repr(("B", "L", ("U", "L"))),   # unary on the right leaf
    }


def _strings(exprs, names):
    return [to_canonical_string(e, names) for e in exprs]


def test_label_commutative_pair_single_orientation():
    reg = default_registry().subset(["add"])
    shape = ("B", "L", "L")
    got = _strings(label_shapes(shape, reg, [0, 1]), ["a", "b"])
    assert got == ["a+b"]


def test_label_noncommutative_pair_both_orientations():
    reg = default_registry().subset(["sub"])
    shape = ("B", "L", "L")
    got = _strings(label_shapes(shape, reg, [0, 1]), ["a", "b"])
    assert set(got) == {"a-b", "b-a"}


def test_label_unary_ops():
    reg = default_registry().subset(["sqrt", "square"])
    shape = ("U", "L")
    got = _strings(label_shapes(shape, reg, [0]), ["a"])
    assert set(got) == {"sqrt(a)", "a^2"}


def test_stream_unique_monotone_canonical():
    reg = default_registry().subset(["sqrt", "plus1", "add", "sub"])
    names = ["a", "b", "c"]
    seen = []
    last_complexity = 0
    for expr in iter_canonical(reg, range(3), 5):
        assert complexity(expr) >= last_complexity
        last_complexity = complexity(expr)
        assert is_canonical(expr)
        idx = leaf_indices(expr)
        assert len(set(idx)) == len(idx)
        seen.append(to_canonical_string(expr, names))
    assert len(set(seen)) == len(seen)


def test_leaf_count_matches_binary_count():
    reg = default_registry().subset(["sqrt", "add", "mult"])
    for budget in shape_schedule(5):
        if budget.b + 1 > 3:
            continue
        for shape in generate_shapes(budget):
            for expr in label_shapes(shape, reg, [0, 1, 2]):
                assert len(leaf_indices(expr)) == budget.b + 1


def test_budget_skipped_when_leaves_exceed_invariants():
    reg = default_registry().subset(["add"])
    # one invariant: no binary shapes possible, stream is just the leaf
    got = _strings(iter_canonical(reg, [0], 5), ["a"])
    assert got == ["a"]


def test_matches_oracle_enumeration_order():
    # the oracle re-implements the documented order with separate code
    configs = [
        (["sqrt", "plus1"], ["add", "sub"], 3, 5),
        (["square"], ["mult", "div"], 2, 5),
        ([], ["add"], 3, 5),
        (["neg"], [], 1, 4),
        (["half", "abs"], ["max", "sub"], 3, 4),
    ]
    for unary, binary, n_inv, maxc in configs:
        reg = default_registry().subset(unary + binary)
        names = [f"v{i}" for i in range(n_inv)]
        mine = _strings(iter_canonical(reg, range(n_inv), maxc), names)
        theirs = [render(t, names) for t in oracle_enumerate(n_inv, unary, binary, maxc)]
        assert mine == theirs
