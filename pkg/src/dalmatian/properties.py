"""Condition conjecturing: sufficient and necessary conditions for a
boolean property of interest.

A candidate sufficient condition survives when its truth-set is a nonempty
subset of the positives and is not contained in the truth-set of any single
stored condition; insertion evicts stored conditions whose truth-sets the
newcomer swallows.  Necessary conditions for a property are sufficient
conditions for its negation.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .boolexpr import (
    BOOL_BINARY,
    BoolExpression,
    PBinary,
    PLeaf,
    PNot,
    bool_to_string,
)
from .data import BOOLEAN, Dataset
from .enumeration import LEAF, generate_shapes, shape_schedule, shape_size
from .errors import ConfigurationError, InputError

SUFFICIENT = "sufficient"
NECESSARY = "necessary"

STOP_COVERED = "positives_covered"
STOP_TIME = "time_limit"
STOP_COMPLEXITY = "complexity_exhausted"


@dataclass
class PropConfig:
    direction: str = SUFFICIENT
    max_complexity: int = 3
    time_limit: float | None = None

    def __post_init__(self):
        if self.direction not in (SUFFICIENT, NECESSARY):
            raise ConfigurationError(
                f"direction must be {SUFFICIENT!r} or {NECESSARY!r}"
            )


@dataclass(eq=False)
class ConditionConjecture:
    """A retained condition.  For NECESSARY results, ``expr`` is the
    sufficient condition found for the negated target; the necessary
    statement is ``target -> ~expr``."""

    expr: BoolExpression
    direction: str
    truth: np.ndarray   # rows where expr is definitely true
    expression: str | None = None

    @property
    def truth_indices(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.truth))


def suff_truth_test(truth: np.ndarray, positives: np.ndarray) -> bool:
    """Nonempty and contained in the positives.  All-false candidates are
    rejected: they pass vacuously but can never help coverage."""
    if not truth.any():
        return False
    return not bool((truth & ~positives).any())


def suff_nondominance_test(truth: np.ndarray, store: list[ConditionConjecture]) -> bool:
    """True iff the truth-set is not a subset of any single stored one."""
    for c in store:
        if not (truth & ~c.truth).any():
            return False
    return True


def insert_and_prune_condition(
    conj: ConditionConjecture, store: list[ConditionConjecture]
) -> list[ConditionConjecture]:
    """Append, then drop stored conditions whose truth-sets the newcomer
    contains (the mirror image of the non-dominance test)."""
    keep = [c for c in store if bool((c.truth & ~conj.truth).any())]
    keep.append(conj)
    store[:] = keep
    return store


def _label_bool(shape, avail):
    if shape == LEAF:
        for idx in avail:
            yield PLeaf(idx), (idx,)
        return
    if shape[0] == "U":
        for child, used in _label_bool(shape[1], avail):
            yield PNot(child), used
        return
    left_shape, right_shape = shape[1], shape[2]
    lsize = shape_size(left_shape)
    rsize = shape_size(right_shape)
    commutative_ok = lsize >= rsize
    for left, lused in _label_bool(left_shape, avail):
        remaining = tuple(i for i in avail if i not in lused)
        for right, rused in _label_bool(right_shape, remaining):
            tie_ok = True
            if lsize == rsize:
                tie_ok = left.key < right.key
            for op in BOOL_BINARY:
                if op.commutative and not (commutative_ok and tie_ok):
                    continue
                yield PBinary(op, left, right), lused + rused


def iter_bool_canonical(n_properties_or_avail, max_complexity: int):
    """Candidate stream over boolean expressions, same schedule and shape
    order as the arithmetic enumeration (unary = NOT)."""
    if isinstance(n_properties_or_avail, int):
        avail = tuple(range(n_properties_or_avail))
    else:
        avail = tuple(n_properties_or_avail)
    for budget in shape_schedule(max_complexity):
        if budget.b + 1 > len(avail):
            continue
        for shape in generate_shapes(budget):
            for expr, _ in _label_bool(shape, avail):
                yield expr


def _fused_bool(shape, avail, columns, missing):
    """_label_bool with truth values carried along."""
    if shape == LEAF:
        for idx in avail:
            yield PLeaf(idx), columns[idx], missing[idx], (idx,)
        return
    if shape[0] == "U":
        for child, cv, cm, used in _fused_bool(shape[1], avail, columns, missing):
            yield PNot(child), ~cv, cm, used
        return
    left_shape, right_shape = shape[1], shape[2]
    lsize = shape_size(left_shape)
    rsize = shape_size(right_shape)
    commutative_ok = lsize >= rsize
    for left, lv, lm, lused in _fused_bool(left_shape, avail, columns, missing):
        remaining = tuple(i for i in avail if i not in lused)
        for right, rv, rm, rused in _fused_bool(right_shape, remaining, columns, missing):
            tie_ok = True
            if lsize == rsize:
                tie_ok = left.key < right.key
            if lm is None:
                miss = rm
            elif rm is None:
                miss = lm
            else:
                miss = lm | rm
            used = lused + rused
            for op in BOOL_BINARY:
                if op.commutative and not (commutative_ok and tie_ok):
                    continue
                yield PBinary(op, left, right), op.np_fn(lv, rv), miss, used


@dataclass
class PropRunResult:
    conjectures: list[ConditionConjecture]
    stop_reason: str
    n_evaluated: int
    n_valid: int
    property_names: list[str]
    target: str
    direction: str

    @property
    def expressions(self) -> list[str]:
        return [c.expression for c in self.conjectures]


def run_prop(
    dataset: Dataset,
    target: str,
    config: PropConfig,
) -> PropRunResult:
    """Conjecture conditions for boolean column ``target`` over the
    dataset's other boolean columns.

    SUFFICIENT searches conditions implying the target; NECESSARY runs the
    same search against the negated target and reports each hit c as the
    necessary statement target -> ~c.  Stops when every positive example is
    covered by some stored condition, on time-out, or when the schedule is
    exhausted.
    """
    tcol = dataset.column(target)
    if tcol.kind != BOOLEAN:
        raise InputError(f"target column {target!r} is {tcol.kind}, expected boolean")
    known = ~tcol.missing
    base_true = tcol.values & known
    base_false = ~tcol.values & known
    if not base_true.any() or not base_false.any():
        raise ConfigurationError(
            f"target property {target!r} must have at least one true and one false example"
        )
    positives = base_false if config.direction == NECESSARY else base_true

    names = [c.name for c in dataset.columns if c.kind == BOOLEAN and c.name != target]
    if not names:
        raise ConfigurationError("no property columns besides the target")
    columns = [dataset.column(n).values for n in names]
    missing = [
        dataset.column(n).missing if dataset.column(n).missing.any() else None for n in names
    ]
    avail = tuple(range(len(names)))

    store: list[ConditionConjecture] = []
    n_evaluated = 0
    n_valid = 0
    stop_reason = STOP_COMPLEXITY
    started = time.monotonic()
    covered = np.zeros(len(positives), dtype=bool)

    done = False
    for budget in shape_schedule(config.max_complexity):
        if done:
            break
        if budget.b + 1 > len(avail):
            continue
        for shape in generate_shapes(budget):
            if done:
                break
            for expr, vals, miss, _ in _fused_bool(shape, avail, columns, missing):
                n_evaluated += 1
                truth = vals if miss is None else vals & ~miss
                if suff_truth_test(truth, positives):
                    n_valid += 1
                    if suff_nondominance_test(truth, store):
                        conj = ConditionConjecture(
                            expr, config.direction, truth.copy(), bool_to_string(expr, names)
                        )
                        insert_and_prune_condition(conj, store)
                        covered |= truth
                        if bool((covered | ~positives).all()):
                            stop_reason = STOP_COVERED
                            done = True
                            break
                if (
                    config.time_limit is not None
                    and n_evaluated % 256 == 0
                    and time.monotonic() - started > config.time_limit
                ):
                    stop_reason = STOP_TIME
                    done = True
                    break

    return PropRunResult(
        list(store), stop_reason, n_evaluated, n_valid, names, target, config.direction
    )
