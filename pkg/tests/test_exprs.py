"""Expression tree construction, evaluation, complexity, and text forms."""

import math
import random

import numpy as np
import pytest

from dalmatian.errors import ConfigurationError, StructuralError
from dalmatian.exprs import (
    BINARY_OPS,
    Binary,
    Leaf,
    MISSING,
    UNARY_OPS,
    UNDEFINED,
    Unary,
    OperatorRegistry,
    canonical_label_string,
    complexity,
    default_registry,
    evaluate,
    evaluate_columns,
    is_canonical,
    preset_registry,
    to_canonical_string,
)
from expr_parser import parse_expression

U = UNARY_OPS
B = BINARY_OPS


def test_evaluate_direct_arithmetic():
    # x1/x2 + x3 on (300000, 100, 2)
    expr = Binary(B["add"], Binary(B["div"], Leaf(0), Leaf(1)), Leaf(2))
    assert evaluate(expr, [300000.0, 100.0, 2.0]) == 3002.0


def test_evaluate_domain_violation_is_undefined():
    expr = Unary(U["sqrt"], Leaf(0))
    assert evaluate(expr, [-1.0]) is UNDEFINED


def test_evaluate_missing_propagates():
    expr = Binary(B["mult"], Leaf(0), Leaf(1))
    assert evaluate(expr, [None, 5.0]) is MISSING


def test_missing_dominates_undefined():
    # one branch missing, the other undefined -> missing
    expr = Binary(B["add"], Leaf(0), Unary(U["sqrt"], Leaf(1)))
    assert evaluate(expr, [None, -4.0]) is MISSING


def test_overflow_is_undefined():
    expr = Unary(U["exp"], Leaf(0))
    assert evaluate(expr, [1000.0]) is UNDEFINED


def test_leaf_out_of_range_is_structural():
    with pytest.raises(StructuralError):
        evaluate(Leaf(3), [1.0, 2.0])


def test_evaluate_deterministic():
    expr = Binary(B["div"], Unary(U["sin"], Leaf(0)), Leaf(1))
    row = [0.7234234, 3.1]
    first = evaluate(expr, row)
    assert all(evaluate(expr, row) == first for _ in range(5))


def gravity_expr():
    return Binary(
        B["div"], Binary(B["mult"], Leaf(0), Leaf(1)), Unary(U["square"], Leaf(2))
    )


def test_complexity_gravity_form_is_six():
    assert complexity(gravity_expr()) == 6


def test_complexity_single_leaf():
    assert complexity(Leaf(0)) == 1


def test_complexity_recursions():
    t = Leaf(0)
    assert complexity(Unary(U["sqrt"], t)) == complexity(t) + 1
    l, r = Leaf(0), Leaf(1)
    assert complexity(Binary(B["add"], l, r)) == complexity(l) + complexity(r) + 1


def test_complexity_constant_expansion_is_nineteen():
    # One realization of 5*10^-2 + 5*10^-3 ~= 0.057 over constant columns
    # one_a=1, two_b=2, negone_a=-1, negone_b=-1:
    #   five_a = one_a+1+1+1+1            (5 nodes)
    #   five_b = two_b+1+1+1              (4 nodes)
    #   e2 = negone_a-1                   (2 nodes, value -2)
    #   e3 = (negone_b-1)-1               (3 nodes, value -3)
    #   five_a*pow10(e2) + five_b*pow10(e3)   (+2 pow10, +2 mult, +1 add)
    plus = lambda t: Unary(U["plus1"], t)  # noqa: E731
    minus = lambda t: Unary(U["minus1"], t)  # noqa: E731
    five_a = plus(plus(plus(plus(Leaf(0)))))
    five_b = plus(plus(plus(Leaf(1))))
    e2 = minus(Leaf(2))
    e3 = minus(minus(Leaf(3)))
    expansion = Binary(
        B["add"],
        Binary(B["mult"], five_a, Unary(U["pow10"], e2)),
        Binary(B["mult"], five_b, Unary(U["pow10"], e3)),
    )
    assert complexity(expansion) == 19
    value = evaluate(expansion, [1.0, 2.0, -1.0, -1.0])
    assert value == pytest.approx(0.055, abs=1e-12)


def test_canonical_string_gravity():
    assert to_canonical_string(gravity_expr(), ["m1", "m2", "r"]) == "(m1*m2)/(r^2)"


def test_canonical_string_leaf():
    assert to_canonical_string(Leaf(0), ["x"]) == "x"


def test_canonical_string_exp_product():
    expr = Unary(U["exp"], Binary(B["mult"], Leaf(1), Unary(U["log"], Leaf(0))))
    assert to_canonical_string(expr, ["x", "y"]) == "exp(y*log(x))"


def test_canonical_string_affix_forms():
    names = ["x", "y"]
    assert to_canonical_string(Unary(U["plus1"], Leaf(0)), names) == "(x+1)"
    assert to_canonical_string(Unary(U["minus1"], Leaf(0)), names) == "(x-1)"
    assert to_canonical_string(Unary(U["times2"], Leaf(0)), names) == "(2*x)"
    assert to_canonical_string(Unary(U["half"], Leaf(0)), names) == "(x/2)"
    nested = Unary(U["times2"], Binary(B["mult"], Leaf(0), Leaf(1)))
    assert to_canonical_string(nested, names) == "(2*(x*y))"


def test_structurally_equal_trees_render_identically():
    a = gravity_expr()
    b = gravity_expr()
    assert a == b
    assert to_canonical_string(a, ["m1", "m2", "r"]) == to_canonical_string(b, ["m1", "m2", "r"])


def test_label_string_orders_leaves():
    assert canonical_label_string(Leaf(0), ["a", "b"]) < canonical_label_string(
        Leaf(1), ["a", "b"]
    )


def test_exactly_one_orientation_of_commutative_pair():
    ab = Binary(B["add"], Leaf(0), Leaf(1))
    ba = Binary(B["add"], Leaf(1), Leaf(0))
    assert [is_canonical(ab), is_canonical(ba)].count(True) == 1
    assert is_canonical(ab)  # the committed orientation is a+b


def test_size_rule_orientation():
    inner = Binary(B["add"], Leaf(0), Leaf(1))
    assert is_canonical(Binary(B["add"], inner, Leaf(2)))
    assert not is_canonical(Binary(B["add"], Leaf(2), inner))


def test_repeated_invariant_rejected():
    assert not is_canonical(Binary(B["mult"], Leaf(0), Leaf(0)))


def _random_tree(rng, n_names, depth, registry):
    roll = rng.random()
    if depth <= 0 or roll < 0.35:
        return Leaf(rng.randrange(n_names))
    if roll < 0.6:
        return Unary(rng.choice(registry.unary), _random_tree(rng, n_names, depth - 1, registry))
    return Binary(
        rng.choice(registry.binary),
        _random_tree(rng, n_names, depth - 1, registry),
        _random_tree(rng, n_names, depth - 1, registry),
    )


def test_roundtrip_through_parser():
    rng = random.Random(7)
    registry = default_registry()
    names = ["alpha", "beta", "gamma", "delta"]
    for _ in range(300):
        tree = _random_tree(rng, len(names), 4, registry)
        text = to_canonical_string(tree, names)
        back = parse_expression(text, names)
        assert back == tree, text


def test_swapping_any_commutative_node_breaks_canonicity():
    rng = random.Random(11)
    registry = default_registry()
    checked = 0
    while checked < 120:
        tree = _random_tree(rng, 5, 3, registry)
        if not is_canonical(tree):
            continue

        def swaps(node):
            # all trees obtained by swapping exactly one commutative node
            if isinstance(node, Leaf):
                return
            if isinstance(node, Unary):
                for sub in swaps(node.child):
                    yield Unary(node.op, sub)
                return
            if node.op.commutative:
                yield Binary(node.op, node.right, node.left)
            for sub in swaps(node.left):
                yield Binary(node.op, sub, node.right)
            for sub in swaps(node.right):
                yield Binary(node.op, node.left, sub)

        for swapped in swaps(tree):
            assert not is_canonical(swapped)
            checked += 1
        checked += 1


# Operators whose IEEE results are identical between libm scalars and numpy
# arrays; transcendentals may legitimately differ in the last ulp.
EXACT_OPS = [
    "plus1", "minus1", "times2", "half", "square", "sqrt", "neg", "abs",
    "floor", "ceil", "recip", "add", "sub", "mult", "div", "max", "min",
]


def test_vector_scalar_agreement():
    rng = random.Random(3)
    registry = default_registry().subset(EXACT_OPS)
    names = ["a", "b", "c"]
    for _ in range(200):
        tree = _random_tree(rng, 3, 3, registry)
        rows = []
        for _ in range(6):
            row = []
            for _ in range(3):
                r = rng.random()
                if r < 0.15:
                    row.append(None)
                elif r < 0.3:
                    row.append(-rng.uniform(0, 5))
                else:
                    row.append(rng.uniform(0, 5))
            rows.append(row)
        cols = [
            np.array([np.nan if row[j] is None else row[j] for row in rows])
            for j in range(3)
        ]
        miss = [np.array([row[j] is None for row in rows]) for j in range(3)]
        vals, m, undef = evaluate_columns(tree, cols, miss)
        for i, row in enumerate(rows):
            scalar = evaluate(tree, row)
            if scalar is MISSING:
                assert m is not None and m[i]
            elif scalar is UNDEFINED:
                assert m is None or not m[i]
                assert undef is not None and undef[i]
            else:
                assert m is None or not m[i]
                assert undef is None or not undef[i]
                assert vals[i] == scalar or (math.isnan(vals[i]) and math.isnan(scalar))


def test_vector_scalar_agreement_transcendentals_close():
    rng = random.Random(5)
    registry = default_registry()
    for _ in range(150):
        tree = _random_tree(rng, 3, 3, registry)
        row = [rng.uniform(0.1, 3.0) for _ in range(3)]
        cols = [np.array([v]) for v in row]
        vals, m, undef = evaluate_columns(tree, cols, [None, None, None])
        scalar = evaluate(tree, row)
        if scalar is UNDEFINED:
            assert undef is not None and undef[0]
        else:
            assert undef is None or not undef[0]
            assert math.isclose(vals[0], scalar, rel_tol=1e-12, abs_tol=1e-300)


def test_undefined_propagates_through_recovering_ops():
    # exp overflows to infinity inside; 1/inf would be 0, but the row must
    # still count as undefined
    expr = Unary(U["recip"], Unary(U["exp"], Leaf(0)))
    assert evaluate(expr, [1000.0]) is UNDEFINED
    vals, miss, undef = evaluate_columns(expr, [np.array([1000.0, 1.0])], [None])
    assert undef is not None and undef[0] and not undef[1]


def test_registry_rejects_duplicate_ids():
    op = UNARY_OPS["sqrt"]
    with pytest.raises(ConfigurationError):
        OperatorRegistry([op, op], [])


def test_registry_subset_unknown_name_lists_valid():
    with pytest.raises(ConfigurationError) as err:
        default_registry().subset(["mult", "nosuch"])
    assert "nosuch" in str(err.value)
    assert "mult" in str(err.value)


def test_presets():
    basic = preset_registry("basic")
    ids = {op.id for op in basic.unary} | {op.id for op in basic.binary}
    assert {"mult", "div", "square"} <= ids
    with pytest.raises(ConfigurationError):
        preset_registry("bogus")
