"""Post-hoc evaluation of conjectures: NRMSE for bounds, precision /
support / lift for conditions, envelope gap tables, and the JSON report
shapes the CLI serializes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .boolexpr import eval_bool_columns
from .data import Dataset
from .engine import UPPER, BoundConjecture, RunResult
from .errors import DegenerateTargetError
from .exprs import Expression, evaluate_columns
from .properties import NECESSARY, PropRunResult


def nrmse(predictions: np.ndarray, targets: np.ndarray) -> float:
    """Root-mean-square error divided by the population standard deviation
    of the targets.  The constant mean predictor scores exactly 1."""
    p = np.asarray(predictions, dtype=float)
    t = np.asarray(targets, dtype=float)
    if len(t) < 2:
        raise DegenerateTargetError("nrmse needs at least two rows")
    sigma = float(np.sqrt(np.mean((t - t.mean()) ** 2)))
    if sigma == 0.0:
        raise DegenerateTargetError("target standard deviation is zero")
    rmse = float(np.sqrt(np.mean((p - t) ** 2)))
    return rmse / sigma


def mean_absolute_error(conj: BoundConjecture, target: np.ndarray) -> float:
    """MAE over the rows the conjecture covers; inf when it covers none."""
    covered = conj.covered
    if not covered.any():
        return float("inf")
    return float(np.mean(np.abs(conj.values[covered] - np.asarray(target, float)[covered])))


def select_best(conjectures: list[BoundConjecture], target: np.ndarray) -> BoundConjecture:
    """The conjecture with the smallest training MAE; ties keep the earliest
    inserted one."""
    if not conjectures:
        raise ValueError("select_best needs at least one conjecture")
    best = conjectures[0]
    best_mae = mean_absolute_error(best, target)
    for c in conjectures[1:]:
        mae = mean_absolute_error(c, target)
        if mae < best_mae:
            best, best_mae = c, mae
    return best


@dataclass
class ConditionEval:
    precision: float | None  # None when the antecedent never fires
    support: int
    lift: float | None
    base_rate: float
    n_counted: int


def condition_metrics(
    antecedent: np.ndarray,
    consequent: np.ndarray,
    valid: np.ndarray | None = None,
) -> ConditionEval:
    """Evaluate the conditional antecedent -> consequent on a row mask.

    Rows where either side is missing are excluded from every count via
    ``valid``.  precision = |A and C| / |A|, support = |A|, lift =
    precision / base rate of the consequent among counted rows.
    """
    a = np.asarray(antecedent, dtype=bool)
    c = np.asarray(consequent, dtype=bool)
    if valid is not None:
        a = a[valid]
        c = c[valid]
    n = len(a)
    support = int(a.sum())
    base = float(c.sum()) / n if n else 0.0
    if support == 0:
        return ConditionEval(None, 0, None, base, n)
    precision = float((a & c).sum()) / support
    lift = precision / base if base > 0 else None
    return ConditionEval(precision, support, lift, base, n)


def evaluate_bound(
    expr: Expression, invariant_names: list[str], dataset: Dataset
) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate a bound expression on another dataset by column name.

    Returns (values, defined_mask); rows that are missing or undefined are
    not defined.
    """
    cols = [dataset.column(n) for n in invariant_names]
    values = [c.values for c in cols]
    missing = [c.missing if c.missing.any() else None for c in cols]
    vals, miss, undef = evaluate_columns(expr, values, missing)
    defined = np.ones(dataset.n_rows, dtype=bool)
    if miss is not None:
        defined &= ~miss
    if undef is not None:
        defined &= ~undef
    return vals, defined


def build_inv_report(
    result: RunResult, train: Dataset, test: Dataset | None = None
) -> dict:
    """The serializable bound report: one row per conjecture with training
    MAE and, when test data is given, NRMSE over the defined test rows
    (excluded rows are counted, not silently dropped)."""
    train_target = train.column(result.target).values
    rows = []
    for conj in result.conjectures:
        row = {
            "expression": conj.expression,
            "direction": conj.direction,
            "complexity": conj.expr.size,
            "train_mae": mean_absolute_error(conj, train_target),
            "test_nrmse": None,
        }
        if test is not None:
            tvals, defined = evaluate_bound(conj.expr, result.invariant_names, test)
            ttarget = test.column(result.target).values
            row["test_excluded"] = int((~defined).sum())
            if defined.sum() >= 2:
                try:
                    row["test_nrmse"] = nrmse(tvals[defined], ttarget[defined])
                except DegenerateTargetError:
                    row["test_nrmse"] = None
        rows.append(row)
    best = select_best(result.conjectures, train_target) if result.conjectures else None
    return {
        "target": result.target,
        "direction": result.direction,
        "stop_reason": result.stop_reason,
        "n_evaluated": result.n_evaluated,
        "n_valid": result.n_valid,
        "n_conjectures": len(result.conjectures),
        "selected_best": best.expression if best is not None else None,
        "conjectures": rows,
    }


def build_prop_report(result: PropRunResult, eval_data: Dataset) -> dict:
    """The serializable condition report.  Metrics treat each conjecture as
    the conditional it states: antecedent -> target for sufficient runs,
    antecedent -> NOT target for necessary runs (the sufficient-for-negation
    form)."""
    tcol = eval_data.column(result.target)
    consequent = tcol.values if result.direction != NECESSARY else ~tcol.values
    consequent_name = result.target if result.direction != NECESSARY else f"~{result.target}"
    rows = []
    for conj in result.conjectures:
        cols = [eval_data.column(n) for n in result.property_names]
        vals, miss = eval_bool_columns(
            conj.expr,
            [c.values for c in cols],
            [c.missing if c.missing.any() else None for c in cols],
        )
        valid = ~tcol.missing
        if miss is not None:
            valid &= ~miss
        ev = condition_metrics(vals, consequent, valid)
        rows.append(
            {
                "expression": conj.expression,
                "consequent": consequent_name,
                "precision": ev.precision,
                "support": ev.support,
                "lift": ev.lift,
            }
        )
    return {
        "target": result.target,
        "direction": result.direction,
        "stop_reason": result.stop_reason,
        "n_evaluated": result.n_evaluated,
        "n_valid": result.n_valid,
        "n_conditions": len(result.conjectures),
        "conditions": rows,
    }


@dataclass
class EnvelopeRow:
    example: int
    target: float
    envelope: float
    gap: float
    best: str  # canonical string of the conjecture attaining the envelope


def envelope_report(
    conjectures: list[BoundConjecture],
    target: np.ndarray,
    direction: str,
) -> list[EnvelopeRow]:
    """Per-example envelope table: the pointwise min (upper) or max (lower)
    of the stored bounds, its gap to the target, and which conjecture
    attains it (earliest on ties)."""
    if not conjectures:
        raise ValueError("envelope_report needs a nonempty store")
    t = np.asarray(target, dtype=float)
    sign = 1.0 if direction == UPPER else -1.0
    W = np.vstack([
        np.where(c.covered, sign * c.values, np.inf) for c in conjectures
    ])
    env_w = W.min(axis=0)
    best_idx = W.argmin(axis=0)
    rows = []
    for i in range(len(t)):
        env = sign * env_w[i]
        gap = env_w[i] - sign * t[i]
        rows.append(
            EnvelopeRow(
                i,
                float(t[i]),
                float(env),
                float(gap),
                conjectures[int(best_idx[i])].expression or "",
            )
        )
    return rows
