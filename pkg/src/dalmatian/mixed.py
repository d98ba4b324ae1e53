"""Mixed-data conjecturing: mine numeric bounds per class, recast them as
boolean properties, pool with the native boolean features, then conjecture
sufficient and necessary conditions for each class level.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import BOOLEAN, CATEGORICAL, Column, Dataset
from .engine import LOWER, UPPER, RunConfig, RunResult, run_inv
from .errors import ConfigurationError, InputError
from .exprs import Expression, OperatorRegistry, evaluate_columns
from .properties import NECESSARY, PropConfig, PropRunResult, SUFFICIENT, run_prop


@dataclass(eq=False)
class DerivedProperty:
    """A mined bound reread as a per-row predicate.

    For an upper bound the predicate is ``feature <= expr``; rows where the
    feature is missing or the expression does not evaluate to a finite
    value are missing, not false.
    """

    feature: str
    direction: str
    expr: Expression
    invariant_names: list[str]
    expression: str  # canonical text of the bound's right-hand side

    @property
    def name(self) -> str:
        symbol = "<=" if self.direction == UPPER else ">="
        return f"({self.feature}{symbol}{self.expression})"

    def evaluate(self, dataset: Dataset) -> Column:
        cols = [dataset.column(n) for n in self.invariant_names]
        values = [c.values for c in cols]
        missing = [c.missing if c.missing.any() else None for c in cols]
        with np.errstate(all="ignore"):
            vals, miss, undef = evaluate_columns(self.expr, values, missing)
        fcol = dataset.column(self.feature)
        bad = fcol.missing.copy()
        if miss is not None:
            bad |= miss
        if undef is not None:
            bad |= undef
        with np.errstate(all="ignore"):
            if self.direction == UPPER:
                holds = fcol.values <= vals
            else:
                holds = fcol.values >= vals
        return Column(self.name, BOOLEAN, holds & ~bad, bad)


@dataclass
class MixedConfig:
    max_complexity: int = 4        # bound-mining budget per sub-run
    prop_max_complexity: int = 3   # condition budget per level
    time_limit: float | None = None          # global, split across sub-runs
    sub_run_time_limit: float | None = None  # explicit per-sub-run override
    skips: float = 1.0
    eps: float = 0.0
    eps_tight: float = 1e-9


@dataclass
class MixedResult:
    class_feature: str
    levels: list[str]
    sufficient: dict[str, PropRunResult]
    necessary: dict[str, PropRunResult]
    derived: list[DerivedProperty]
    derived_by_name: dict[str, DerivedProperty]
    bound_runs: list[RunResult] = field(repr=False, default_factory=list)
    n_native_properties: int = 0
    n_bounds_by_level: dict[str, int] = field(default_factory=dict)
    pooled_property_names: list[str] = field(default_factory=list)
    property_dataset: Dataset = field(repr=False, default=None)
    n_sub_runs: int = 0
    sub_run_time_limit: float | None = None
    warnings: list[str] = field(default_factory=list)


def _class_levels(col: Column) -> list[str]:
    if col.kind == CATEGORICAL:
        levels: list[str] = []
        for v, m in zip(col.values, col.missing):
            if not m and v not in levels:
                levels.append(v)
        return levels
    if col.kind == BOOLEAN:
        return ["true", "false"]
    raise ConfigurationError(f"class feature {col.name!r} must be categorical or boolean")


def _level_mask(col: Column, level: str) -> np.ndarray:
    if col.kind == CATEGORICAL:
        return np.array(
            [(not m) and v == level for v, m in zip(col.values, col.missing)]
        )
    want = level == "true"
    return (col.values == want) & ~col.missing


def build_property_dataset(
    dataset: Dataset,
    class_feature: str,
    levels: list[str],
    derived: list[DerivedProperty],
) -> Dataset:
    """The pooled property table: native booleans, then bound-derived
    properties, then the class-level indicators.  Indicators go last so
    that a level which is trivially another's negation does not shadow the
    informative bound-derived separators."""
    ccol = dataset.column(class_feature)
    prop_cols: list[Column] = [dataset.column(n) for n in dataset.boolean_names()]
    for prop in derived:
        prop_cols.append(prop.evaluate(dataset))
    for level in levels:
        mask = _level_mask(ccol, level)
        prop_cols.append(
            Column(f"{class_feature}__{level}", BOOLEAN, mask, ccol.missing.copy())
        )
    return Dataset(tuple(prop_cols))


def run_mixed(
    dataset: Dataset,
    class_feature: str,
    registry: OperatorRegistry,
    config: MixedConfig,
    threads: int = 1,
) -> MixedResult:
    """Per level: mine upper and lower bounds for every numeric feature on
    the rows of that level; convert all bounds to properties; pool with the
    native boolean features and the level indicators; then conjecture
    SUFFICIENT and NECESSARY conditions for each level over all examples.
    """
    ccol = dataset.column(class_feature)
    levels = _class_levels(ccol)
    if len(levels) < 2:
        raise ConfigurationError(
            f"class feature {class_feature!r} needs at least two levels, found {levels}"
        )
    numeric = [n for n in dataset.numeric_names()]
    if not numeric:
        raise ConfigurationError("mixed conjecturing needs at least one numeric feature")
    native_bool = dataset.boolean_names()

    n_sub_runs = len(levels) * len(numeric) * 2
    per_run_limit = config.sub_run_time_limit
    if per_run_limit is None and config.time_limit is not None:
        per_run_limit = config.time_limit / n_sub_runs

    warnings: list[str] = []
    derived: list[DerivedProperty] = []
    derived_by_name: dict[str, DerivedProperty] = {}
    bound_runs: list[RunResult] = []
    n_bounds_by_level: dict[str, int] = {lvl: 0 for lvl in levels}

    for level in levels:
        mask = _level_mask(ccol, level)
        if not mask.any():
            warnings.append(f"level {level!r} has no examples; skipped")
            continue
        rows = dataset.take(mask)
        for feature in numeric:
            for direction in (UPPER, LOWER):
                cfg = RunConfig(
                    direction=direction,
                    max_complexity=config.max_complexity,
                    time_limit=per_run_limit,
                    skips=config.skips,
                    eps=config.eps,
                    eps_tight=config.eps_tight,
                )
                try:
                    result = run_inv(rows, feature, registry, cfg, threads=threads)
                except (ConfigurationError, InputError) as exc:
                    warnings.append(
                        f"level {level!r}, feature {feature!r}, {direction}: {exc}"
                    )
                    continue
                bound_runs.append(result)
                n_bounds_by_level[level] += len(result.conjectures)
                for conj in result.conjectures:
                    prop = DerivedProperty(
                        feature, direction, conj.expr, result.invariant_names,
                        conj.expression,
                    )
                    if prop.name not in derived_by_name:
                        derived_by_name[prop.name] = prop
                        derived.append(prop)

    property_dataset = build_property_dataset(dataset, class_feature, levels, derived)
    indicator_names = {level: f"{class_feature}__{level}" for level in levels}

    sufficient: dict[str, PropRunResult] = {}
    necessary: dict[str, PropRunResult] = {}
    for level in levels:
        target = indicator_names[level]
        for direction, sink in ((SUFFICIENT, sufficient), (NECESSARY, necessary)):
            cfg = PropConfig(
                direction=direction,
                max_complexity=config.prop_max_complexity,
                time_limit=per_run_limit,
            )
            try:
                sink[level] = run_prop(property_dataset, target, cfg)
            except (ConfigurationError, InputError) as exc:
                warnings.append(f"level {level!r}, {direction}: {exc}")

    return MixedResult(
        class_feature=class_feature,
        levels=levels,
        sufficient=sufficient,
        necessary=necessary,
        derived=derived,
        derived_by_name=derived_by_name,
        bound_runs=bound_runs,
        n_native_properties=len(native_bool),
        n_bounds_by_level=n_bounds_by_level,
        pooled_property_names=[c.name for c in prop_cols],
        property_dataset=property_dataset,
        n_sub_runs=n_sub_runs,
        sub_run_time_limit=per_run_limit,
        warnings=warnings,
    )
