"""Conjecturing nonlinear bounds and boolean conditions from tabular data.

Numeric columns get upper/lower bound conjectures found by enumerating
expression trees of increasing complexity and keeping those that pass the
Dalmatian truth and non-dominance tests; boolean columns get sufficient and
necessary conditions the same way; mixed data runs the bound phase per
class and feeds the results into the condition phase.
"""

from .benchmarks import (
    BenchmarkSpec,
    SplitMix64,
    gen_gravity,
    gen_interaction,
    gen_nguyen,
    gen_noise_columns,
    nguyen_augmentation,
)
from .boolexpr import (
    BoolExpression,
    PBinary,
    PLeaf,
    PNot,
    bool_to_string,
    eval_bool,
    truth_set,
)
from .data import (
    AugmentationSpec,
    Column,
    ConstantColumn,
    Dataset,
    DerivedColumn,
    eligible_invariants,
    inject,
    load_csv,
    load_whitespace,
    one_hot,
    save_csv,
)
from .engine import (
    LOWER,
    UPPER,
    BoundConjecture,
    ConjectureStore,
    RunConfig,
    RunResult,
    insert_and_prune,
    nondominance_test,
    run_inv,
    truth_test,
)
from .errors import (
    ConfigurationError,
    DalmatianError,
    DegenerateTargetError,
    InputError,
    ParseError,
    SchemaError,
    StructuralError,
)
from .exprs import (
    MISSING,
    PRESETS,
    UNDEFINED,
    Binary,
    Expression,
    Leaf,
    OperatorRegistry,
    Unary,
    canonical_label_string,
    complexity,
    default_registry,
    evaluate,
    is_canonical,
    preset_registry,
    to_canonical_string,
)
from .metrics import (
    ConditionEval,
    EnvelopeRow,
    condition_metrics,
    envelope_report,
    mean_absolute_error,
    nrmse,
    select_best,
)
from .mixed import DerivedProperty, MixedConfig, MixedResult, run_mixed
from .properties import (
    NECESSARY,
    SUFFICIENT,
    ConditionConjecture,
    PropConfig,
    PropRunResult,
    run_prop,
)

__version__ = "0.1.0"
