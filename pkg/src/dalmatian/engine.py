"""Bound conjecturing: stream candidates through the Dalmatian filter.

A candidate upper bound survives only if it holds on every training example
(truth test) and strictly improves on the current store somewhere
(non-dominance test); insertion then evicts any stored bound that is no
longer strictly best on at least one example.  Lower bounds run through the
same machinery mirrored.

Internally both directions work in "minimization space": values and target
are multiplied by +1 (upper) or -1 (lower) so the envelope is always a
pointwise minimum and "better" always means smaller.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import islice

import numpy as np

from .data import Dataset, NUMERIC, eligible_invariants
from .enumeration import LEAF, generate_shapes, shape_schedule, shape_size
from .errors import ConfigurationError, InputError
from .exprs import (
    Binary,
    Expression,
    Leaf,
    OperatorRegistry,
    Unary,
    _grow_undef,
    _or_masks,
    evaluate_columns,
    to_canonical_string,
)

UPPER = "upper"
LOWER = "lower"


@dataclass
class RunConfig:
    direction: str = UPPER
    max_complexity: int = 5
    time_limit: float | None = None
    skips: float = 1.0
    eps: float = 0.0          # truth-test slack
    eps_tight: float = 1e-9   # envelope-tightness stopping tolerance

    def __post_init__(self):
        if self.direction not in (UPPER, LOWER):
            raise ConfigurationError(f"direction must be {UPPER!r} or {LOWER!r}")
        if not 0.0 <= self.skips <= 1.0:
            raise ConfigurationError("skips must lie in [0, 1]")
        if self.eps < 0 or self.eps_tight <= 0:
            raise ConfigurationError("eps must be >= 0 and eps_tight > 0")


@dataclass(eq=False)
class BoundConjecture:
    """A bound together with its cached per-example values.

    ``values`` holds NaN on rows the bound does not cover (a referenced
    invariant was missing).  ``undefined`` is only populated on fresh
    candidates; stored conjectures never have undefined rows.
    """

    expr: Expression
    direction: str
    values: np.ndarray
    missing: np.ndarray | None = None
    undefined: np.ndarray | None = None
    expression: str | None = None

    @property
    def covered(self) -> np.ndarray:
        """Rows where the bound evaluates to a finite value."""
        mask = np.ones(len(self.values), dtype=bool)
        if self.missing is not None:
            mask &= ~self.missing
        if self.undefined is not None:
            mask &= ~self.undefined
        return mask


class ConjectureStore:
    """The current non-dominated set of bounds for one run."""

    def __init__(self, direction: str, target: np.ndarray, eps_tight: float = 1e-9):
        self.direction = direction
        self.target = np.asarray(target, dtype=float)
        self.eps_tight = eps_tight
        self.sign = 1.0 if direction == UPPER else -1.0
        self.conjectures: list[BoundConjecture] = []
        self._w: list[np.ndarray] = []  # sign*values, +inf on uncovered rows
        self._target_w = self.sign * self.target

    def __len__(self) -> int:
        return len(self.conjectures)

    def _as_w(self, candidate: BoundConjecture) -> np.ndarray:
        covered = candidate.covered
        w = np.where(covered, self.sign * candidate.values, np.inf)
        return w

    def envelope_w(self) -> np.ndarray:
        if not self._w:
            return np.full(len(self.target), np.inf)
        return np.minimum.reduce(self._w)

    def envelope(self) -> np.ndarray:
        """Pointwise best bound per example (min for upper, max for lower);
        +/-inf where no stored bound covers the example."""
        return self.sign * self.envelope_w()

    def is_tight(self) -> bool:
        """True when the envelope matches the target within eps_tight on
        every example."""
        gap = self.envelope_w() - self._target_w
        return bool((gap <= self.eps_tight).all())

    def strictly_best_somewhere(self, i: int) -> bool:
        w = self._w[i]
        others = [self._w[j] for j in range(len(self._w)) if j != i]
        if not others:
            return bool(np.isfinite(w).any())
        env = np.minimum.reduce(others)
        return bool((w < env).any())


def truth_test(candidate: BoundConjecture, target: np.ndarray, eps: float = 0.0) -> bool:
    """Upper: target <= value + eps on every covered example; lower
    mirrored.  Any undefined evaluation rejects outright, as does a
    candidate with no covered example at all."""
    if candidate.undefined is not None:
        bad = candidate.undefined
        if candidate.missing is not None:
            bad = bad & ~candidate.missing
        if bad.any():
            return False
    covered = candidate.covered
    if not covered.any():
        return False
    vals = candidate.values[covered]
    t = np.asarray(target, dtype=float)[covered]
    if candidate.direction == UPPER:
        return bool((t <= vals + eps).all())
    return bool((t >= vals - eps).all())


def nondominance_test(candidate: BoundConjecture, store: ConjectureStore) -> bool:
    """True iff the candidate is strictly better than the stored envelope
    on at least one example it covers.  Vacuously true on an empty store."""
    w = store._as_w(candidate)
    env = store.envelope_w()
    return bool((w < env).any())


def insert_and_prune(candidate: BoundConjecture, store: ConjectureStore) -> ConjectureStore:
    """Append the candidate, then drop stored conjectures (oldest first,
    rescanning after every removal) that are strictly best nowhere."""
    store.conjectures.append(candidate)
    store._w.append(store._as_w(candidate))
    changed = True
    while changed:
        changed = False
        for i in range(len(store.conjectures)):
            if not store.strictly_best_somewhere(i):
                del store.conjectures[i]
                del store._w[i]
                changed = True
                break
    return store


# ---------------------------------------------------------------------------
# candidate streams
# ---------------------------------------------------------------------------


def _fused_label(shape, registry, avail, columns, missing):
    """Mirror of enumeration._label that carries value arrays along, so
    shared subtrees are evaluated once.  Yields
    (expr, values, missing_mask, undefined_mask, used_indices)."""
    if shape == LEAF:
        for idx in avail:
            yield Leaf(idx), columns[idx], missing[idx], None, (idx,)
        return
    if shape[0] == "U":
        for child, cv, cm, cu, used in _fused_label(shape[1], registry, avail, columns, missing):
            for op in registry.unary:
                vals = op.np_fn(cv)
                yield Unary(op, child), vals, cm, _grow_undef(cu, vals), used
        return
    left_shape, right_shape = shape[1], shape[2]
    lsize = shape_size(left_shape)
    rsize = shape_size(right_shape)
    commutative_ok = lsize >= rsize
    for left, lv, lm, lu, lused in _fused_label(left_shape, registry, avail, columns, missing):
        remaining = tuple(i for i in avail if i not in lused)
        for right, rv, rm, ru, rused in _fused_label(
            right_shape, registry, remaining, columns, missing
        ):
            tie_ok = True
            if lsize == rsize:
                tie_ok = left.key < right.key
            miss = _or_masks(lm, rm)
            undef = lu if ru is None else (ru if lu is None else lu | ru)
            used = lused + rused
            for op in registry.binary:
                if op.commutative and not (commutative_ok and tie_ok):
                    continue
                vals = op.np_fn(lv, rv)
                yield Binary(op, left, right), vals, miss, _grow_undef(undef, vals), used


def _iter_fused(registry, columns, missing, max_complexity):
    avail = tuple(range(len(columns)))
    for budget in shape_schedule(max_complexity):
        if budget.b + 1 > len(avail):
            continue
        for shape in generate_shapes(budget):
            for expr, vals, miss, undef, _ in _fused_label(
                shape, registry, avail, columns, missing
            ):
                yield expr, vals, miss, undef


def _iter_threaded(registry, columns, missing, max_complexity, threads):
    """Same stream as _iter_fused, with candidate evaluation spread over a
    thread pool and results merged back in submission order."""
    from .enumeration import iter_canonical

    def ev(expr):
        vals, miss, undef = evaluate_columns(expr, columns, missing)
        return expr, vals, miss, undef

    trees = iter_canonical(registry, range(len(columns)), max_complexity)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        while True:
            chunk = list(islice(trees, 2048))
            if not chunk:
                return
            yield from pool.map(ev, chunk, chunksize=max(1, len(chunk) // (4 * threads)))


# ---------------------------------------------------------------------------
# the run
# ---------------------------------------------------------------------------

STOP_TIGHT = "tight"
STOP_TIME = "time_limit"
STOP_COMPLEXITY = "complexity_exhausted"


@dataclass
class RunResult:
    conjectures: list[BoundConjecture]
    stop_reason: str
    n_evaluated: int
    n_valid: int
    invariant_names: list[str]
    target: str
    direction: str
    store: ConjectureStore = field(repr=False, default=None)

    @property
    def expressions(self) -> list[str]:
        return [c.expression for c in self.conjectures]


def run_inv(
    dataset: Dataset,
    target: str,
    registry: OperatorRegistry,
    config: RunConfig,
    threads: int = 1,
) -> RunResult:
    """Conjecture bounds on ``target`` over the dataset's numeric columns.

    Stops when the envelope is tight on every example, the time limit is
    hit, or the complexity schedule is exhausted; conjectures come back in
    insertion order.
    """
    tcol = dataset.column(target)
    if tcol.kind != NUMERIC:
        raise InputError(f"target column {target!r} is {tcol.kind}, expected numeric")
    if tcol.missing.any():
        raise InputError(f"target column {target!r} has missing values")
    names = eligible_invariants(dataset, target, config.skips)
    if not names:
        raise ConfigurationError(
            "no eligible invariant columns remain after excluding the target "
            "and applying the skips filter"
        )
    columns = [dataset.column(n).values for n in names]
    missing = [
        dataset.column(n).missing if dataset.column(n).missing.any() else None for n in names
    ]
    target_vals = tcol.values.astype(float)

    store = ConjectureStore(config.direction, target_vals, config.eps_tight)
    if threads > 1:
        stream = _iter_threaded(registry, columns, missing, config.max_complexity, threads)
    else:
        stream = _iter_fused(registry, columns, missing, config.max_complexity)

    n_evaluated = 0
    n_valid = 0
    stop_reason = STOP_COMPLEXITY
    started = time.monotonic()
    old_err = np.seterr(all="ignore")
    try:
        for expr, vals, miss, undef in stream:
            n_evaluated += 1
            cand = BoundConjecture(expr, config.direction, vals, miss, undef)
            if truth_test(cand, target_vals, config.eps):
                n_valid += 1
                if nondominance_test(cand, store):
                    stored = BoundConjecture(
                        expr,
                        config.direction,
                        np.where(cand.covered, vals, np.nan),
                        miss.copy() if miss is not None else None,
                        None,
                        to_canonical_string(expr, names),
                    )
                    insert_and_prune(stored, store)
                    if store.is_tight():
                        stop_reason = STOP_TIGHT
                        break
            if (
                config.time_limit is not None
                and n_evaluated % 256 == 0
                and time.monotonic() - started > config.time_limit
            ):
                stop_reason = STOP_TIME
                break
    finally:
        np.seterr(**old_err)

    return RunResult(
        list(store.conjectures),
        stop_reason,
        n_evaluated,
        n_valid,
        names,
        target,
        config.direction,
        store,
    )
