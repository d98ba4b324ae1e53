"""The Dalmatian filter and the bound-conjecturing run."""

import numpy as np
import pytest

from conftest import numeric_dataset
from dalmatian.engine import (
    BoundConjecture,
    ConjectureStore,
    LOWER,
    RunConfig,
    STOP_COMPLEXITY,
    STOP_TIME,
    UPPER,
    insert_and_prune,
    nondominance_test,
    run_inv,
    truth_test,
)
from dalmatian.enumeration import iter_canonical
from dalmatian.errors import ConfigurationError, InputError
from dalmatian.exprs import Leaf, default_registry, evaluate_columns
from dalmatian.engine import _iter_fused


def conj(values, direction=UPPER, missing=None, undefined=None):
    return BoundConjecture(
        Leaf(0),
        direction,
        np.asarray(values, dtype=float),
        np.asarray(missing, dtype=bool) if missing is not None else None,
        np.asarray(undefined, dtype=bool) if undefined is not None else None,
    )


def store_with(direction, target, *value_rows):
    store = ConjectureStore(direction, np.asarray(target, dtype=float))
    for values in value_rows:
        insert_and_prune(conj(values, direction), store)
    return store


# truth test -----------------------------------------------------------------


def test_truth_upper_holds():
    assert truth_test(conj([6, 6]), np.array([4.0, 5.0]))


def test_truth_upper_violation():
    assert not truth_test(conj([6, 4.9]), np.array([4.0, 5.0]))


def test_truth_undefined_rejects():
    c = conj([np.inf, 9.0], undefined=[True, False])
    assert not truth_test(c, np.array([4.0, 5.0]))


def test_truth_all_missing_rejects():
    c = conj([np.nan, np.nan], missing=[True, True])
    assert not truth_test(c, np.array([4.0, 5.0]))


def test_truth_missing_rows_skipped():
    c = conj([np.nan, 6.0], missing=[True, False])
    assert truth_test(c, np.array([100.0, 5.0]))


def test_truth_tie_satisfies():
    assert truth_test(conj([4, 5]), np.array([4.0, 5.0]))


def test_truth_lower_mirrored():
    assert truth_test(conj([3, 4], LOWER), np.array([4.0, 5.0]))
    assert not truth_test(conj([4.1, 4], LOWER), np.array([4.0, 5.0]))


def test_truth_slack():
    assert not truth_test(conj([3.9, 5]), np.array([4.0, 5.0]))
    assert truth_test(conj([3.9, 5]), np.array([4.0, 5.0]), eps=0.2)


# non-dominance ---------------------------------------------------------------


def test_nondominance_empty_store_vacuous():
    store = ConjectureStore(UPPER, np.array([4.0, 5.0]))
    assert nondominance_test(conj([100, 100]), store)


def test_nondominance_improvement_somewhere():
    store = store_with(UPPER, [4, 5], [5, 7])
    assert nondominance_test(conj([6, 6]), store)


def test_nondominance_tie_is_not_improvement():
    store = store_with(UPPER, [4, 5], [5, 7])
    assert not nondominance_test(conj([5, 7]), store)


def test_nondominance_envelope_of_two():
    store = store_with(UPPER, [4, 5], [5, 7], [6, 6])
    # envelope is [5, 6]
    assert not nondominance_test(conj([5.5, 6.5]), store)
    assert nondominance_test(conj([5.5, 5.9]), store)


def test_nondominance_crossed_pair():
    store = store_with(UPPER, [4, 4], [5, 8], [8, 5])
    # envelope is [5, 5]; the middling candidate improves nowhere
    assert not nondominance_test(conj([6, 6]), store)


# insertion and pruning --------------------------------------------------------


def test_insert_keeps_both_when_each_best_somewhere():
    store = store_with(UPPER, [4, 5], [5, 7], [6, 6])
    assert [list(c.values) for c in store.conjectures] == [[5, 7], [6, 6]]


def test_insert_prunes_dominated_everywhere():
    store = store_with(UPPER, [4, 5], [6, 6], [5, 5])
    assert [list(c.values) for c in store.conjectures] == [[5, 5]]


def test_prune_handles_exact_duplicates():
    # the second identical conjecture never passes non-dominance, so force
    # the insert directly to exercise the pruning loop
    store = store_with(UPPER, [4, 4], [5, 5])
    insert_and_prune(conj([5, 5]), store)
    assert len(store.conjectures) == 1


def test_store_envelope_and_tightness():
    store = store_with(UPPER, [5, 6], [5, 7], [8, 6])
    assert list(store.envelope()) == [5, 6]
    assert store.is_tight()
    loose = store_with(UPPER, [5, 6], [5, 8])
    assert not loose.is_tight()


def test_lower_direction_envelope_is_max():
    store = store_with(LOWER, [4, 5], [1, 4], [3, 2])
    assert list(store.envelope()) == [3, 4]


# run_inv ----------------------------------------------------------------------


def test_run_requires_numeric_target():
    ds = numeric_dataset(x=[1.0, 2.0], flag=[True, False])
    with pytest.raises(InputError):
        run_inv(ds, "flag", default_registry(), RunConfig())


def test_run_rejects_missing_target_values():
    ds = numeric_dataset(x=[1.0, 2.0], y=[1.0, None])
    with pytest.raises(InputError):
        run_inv(ds, "y", default_registry(), RunConfig())


def test_run_requires_eligible_invariants():
    ds = numeric_dataset(x=[1.0, 2.0])
    with pytest.raises(ConfigurationError):
        run_inv(ds, "x", default_registry(), RunConfig())


def test_run_skips_filter_can_empty_pool():
    ds = numeric_dataset(x=[1.0, 2.0, 3.0, 4.0], y=[1.0, None, None, None])
    cfg = RunConfig(skips=0.5)
    with pytest.raises(ConfigurationError):
        run_inv(ds, "x", default_registry(), cfg)


def test_gravity_ten_rows_recovers_product_over_square():
    from dalmatian.benchmarks import gen_gravity

    train, _ = gen_gravity(seed=1, n_train=10, n_test=1)
    reg = default_registry().subset(["mult", "div", "square"])
    res = run_inv(train, "F", reg, RunConfig(direction=UPPER, max_complexity=6))
    assert "(m1*m2)/(r^2)" in res.expressions


def test_constant_zero_target_lower_with_negate():
    ds = numeric_dataset(target=[0.0, 0.0, 0.0], x=[1.0, 2.0, 3.0])
    reg = default_registry().subset(["neg"])
    res = run_inv(ds, "target", reg, RunConfig(direction=LOWER, max_complexity=5))
    # x itself is not a lower bound of 0; neg(x) is; deeper negations either
    # fail the truth test or tie the stored bound
    assert res.expressions == ["neg(x)"]
    assert res.stop_reason == STOP_COMPLEXITY


def test_store_invariants_after_run():
    ds = numeric_dataset(
        t=[3.0, 1.0, 4.0, 1.0, 5.0],
        a=[2.0, 7.0, 1.0, 8.0, 2.0],
        b=[8.0, 1.0, 8.0, 2.0, 8.0],
    )
    reg = default_registry().subset(["sqrt", "square", "add", "mult", "max"])
    res = run_inv(ds, "t", reg, RunConfig(direction=UPPER, max_complexity=5))
    store = res.store
    n = ds.n_rows
    assert len(store) <= n
    env = store.envelope()
    target = ds.column("t").values
    assert (env >= target).all()
    for i in range(len(store.conjectures)):
        assert store.strictly_best_somewhere(i)
    for c in store.conjectures:
        assert not nondominance_test(c, store)


def test_run_deterministic_and_thread_invariant():
    ds = numeric_dataset(
        t=[3.0, 1.0, 4.0, 1.0, 5.0],
        a=[2.0, 7.0, 1.0, 8.0, 2.0],
        b=[8.0, 1.0, 8.0, 2.0, 8.0],
    )
    reg = default_registry().subset(["sqrt", "plus1", "add", "mult"])
    cfg = RunConfig(direction=UPPER, max_complexity=5)
    first = run_inv(ds, "t", reg, cfg)
    second = run_inv(ds, "t", reg, cfg)
    threaded = run_inv(ds, "t", reg, cfg, threads=4)
    assert first.expressions == second.expressions == threaded.expressions
    assert first.n_evaluated == threaded.n_evaluated


def test_fused_stream_matches_tree_stream():
    ds = numeric_dataset(
        t=[1.0, 2.0, 3.0],
        a=[2.0, 7.0, 1.0],
        b=[8.0, 1.0, 8.0],
    )
    reg = default_registry().subset(["sqrt", "half", "add", "div"])
    columns = [ds.column(n).values for n in ("a", "b")]
    missing = [None, None]
    fused = list(_iter_fused(reg, columns, missing, 5))
    trees = list(iter_canonical(reg, range(2), 5))
    assert len(fused) == len(trees)
    for (fe, fv, fm, fu), te in zip(fused, trees):
        assert fe == te
        vals, miss, undef = evaluate_columns(te, columns, missing)
        defined = np.ones(3, dtype=bool)
        if fu is not None:
            defined &= ~fu
        assert (fv[defined] == vals[defined]).all()
        assert (fu is None) == (undef is None) or ((fu == undef).all())


def test_time_limit_stops_run():
    ds = numeric_dataset(
        t=[1.0, 2.0, 3.0],
        a=[2.0, 7.0, 1.0],
        b=[8.0, 1.0, 8.0],
        c=[3.0, 3.0, 9.0],
    )
    reg = default_registry()
    cfg = RunConfig(direction=UPPER, max_complexity=9, time_limit=1e-9)
    res = run_inv(ds, "t", reg, cfg)
    assert res.stop_reason == STOP_TIME


def test_tight_stop_on_exact_recovery():
    ds = numeric_dataset(
        t=[2.0, 4.0, 6.0],
        x=[1.0, 2.0, 3.0],
    )
    reg = default_registry().subset(["times2", "plus1"])
    res = run_inv(ds, "t", reg, RunConfig(direction=UPPER, max_complexity=4))
    assert res.stop_reason == "tight"
    assert "(2*x)" in res.expressions


def test_config_validation():
    with pytest.raises(ConfigurationError):
        RunConfig(direction="sideways")
    with pytest.raises(ConfigurationError):
        RunConfig(skips=1.5)
    with pytest.raises(ConfigurationError):
        RunConfig(eps=-1.0)
