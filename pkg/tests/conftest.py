import sys
from pathlib import Path

import numpy as np

from dalmatian.data import BOOLEAN, CATEGORICAL, Column, Dataset, NUMERIC

# make the helper modules (oracle, expr_parser) importable from any test
sys.path.insert(0, str(Path(__file__).parent))


def numeric_dataset(target: str | None = None, **columns) -> Dataset:
    """Build a Dataset from name -> list-of-values; None cells are missing.

    Lists of floats become numeric columns, of bools boolean columns, of
    strings categorical columns.
    """
    cols = []
    for name, values in columns.items():
        missing = np.array([v is None for v in values])
        sample = next((v for v in values if v is not None), 0.0)
        if isinstance(sample, bool):
            vals = np.array([bool(v) if v is not None else False for v in values])
            cols.append(Column(name, BOOLEAN, vals, missing))
        elif isinstance(sample, str):
            vals = np.array([v if v is not None else "" for v in values], dtype=object)
            cols.append(Column(name, CATEGORICAL, vals, missing))
        else:
            vals = np.array(
                [float(v) if v is not None else np.nan for v in values], dtype=float
            )
            cols.append(Column(name, NUMERIC, vals, missing))
    return Dataset(tuple(cols), target)
