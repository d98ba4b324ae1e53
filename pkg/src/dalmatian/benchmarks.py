"""Deterministic generators for the desk-scale experiments.

Randomness comes from a self-contained splitmix64 stream so that a
(spec, seed) pair regenerates byte-identical files on any platform:

* state advances by 0x9E3779B97F4A7C15 per draw and is scrambled with the
  standard two multiply-xorshift rounds;
* uniforms take the top 53 bits: u = (z >> 11) * 2^-53, so u lies in
  [0, 1); uniform(a, b) = a + u*(b - a);
* normals use the Box-Muller cosine branch on two fresh uniforms:
  z = sqrt(-2 ln(1 - u1)) * cos(2 pi u2);
* independent parts (train vs test, one noise column per index) run on
  substreams seeded by scrambling seed + salt.

Draw order is row-major and documented per generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import (
    AugmentationSpec,
    BOOLEAN,
    CATEGORICAL,
    Column,
    ConstantColumn,
    Dataset,
    DerivedColumn,
    NUMERIC,
    inject,
)
from .errors import ConfigurationError

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    """Minimal portable 64-bit generator (splitmix state advance)."""

    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def next_float(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def uniform(self, lo: float, hi: float) -> float:
        return lo + self.next_float() * (hi - lo)

    def randint(self, lo: int, hi: int) -> int:
        """Integer in [lo, hi)."""
        return lo + int(self.next_float() * (hi - lo))

    def normal(self) -> float:
        u1 = self.next_float()
        u2 = self.next_float()
        return math.sqrt(-2.0 * math.log(1.0 - u1)) * math.cos(2.0 * math.pi * u2)


def substream(seed: int, salt: int) -> SplitMix64:
    """Independent child stream for one part of a benchmark."""
    scramble = SplitMix64((seed + salt * _GAMMA) & _MASK)
    return SplitMix64(scramble.next_u64())


@dataclass
class BenchmarkSpec:
    name: str
    seed: int
    n_train: int
    n_test: int
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "seed": self.seed,
            "n_train": self.n_train,
            "n_test": self.n_test,
            "params": dict(self.params),
        }


def _numeric(name: str, values: list[float] | np.ndarray) -> Column:
    arr = np.asarray(values, dtype=float)
    return Column(name, NUMERIC, arr, np.zeros(len(arr), dtype=bool))


# ---------------------------------------------------------------------------
# gravity
# ---------------------------------------------------------------------------

GRAVITY_K = 0.057098

# Part of the committed benchmark definition: the gravity parts read from
# substreams 62 (train) and 63 (test) of the run seed.
_GRAVITY_TRAIN_SALT = 62
_GRAVITY_TEST_SALT = 63


def gen_gravity(
    seed: int, n_train: int = 1000, n_test: int = 1000, k: float = GRAVITY_K
) -> tuple[Dataset, Dataset]:
    """Force between two masses: m1, m2, r ~ Uniform(1, 100000), target
    F = k*m1*m2/r^2 with no noise.  Draws per row: m1, m2, r."""
    if n_train < 1 or n_test < 1 or k <= 0:
        raise ConfigurationError("gravity needs n_train, n_test >= 1 and k > 0")

    def part(rng: SplitMix64, n: int) -> Dataset:
        m1 = np.empty(n)
        m2 = np.empty(n)
        r = np.empty(n)
        for i in range(n):
            m1[i] = rng.uniform(1.0, 100000.0)
            m2[i] = rng.uniform(1.0, 100000.0)
            r[i] = rng.uniform(1.0, 100000.0)
        f = k * m1 * m2 / (r * r)
        cols = (_numeric("m1", m1), _numeric("m2", m2), _numeric("r", r), _numeric("F", f))
        return Dataset(cols, target="F")

    return (
        part(substream(seed, _GRAVITY_TRAIN_SALT), n_train),
        part(substream(seed, _GRAVITY_TEST_SALT), n_test),
    )


def gen_noise_columns(
    dataset: Dataset, k_noise: int, seed: int, salt_base: int = 100
) -> Dataset:
    """Append k_noise standard-normal columns noise_1..noise_k; column j
    draws from substream salt_base+j so layouts do not interact."""
    if k_noise < 0:
        raise ConfigurationError("k_noise must be >= 0")
    if k_noise == 0:
        return dataset
    n = dataset.n_rows
    cols = []
    for j in range(1, k_noise + 1):
        rng = substream(seed, salt_base + j)
        vals = np.array([rng.normal() for _ in range(n)])
        cols.append(_numeric(f"noise_{j}", vals))
    return dataset.append_columns(cols)


# ---------------------------------------------------------------------------
# Nguyen suite
# ---------------------------------------------------------------------------

# instance -> (needs_y, (lo, hi) for x)
_NGUYEN_RANGES = {
    1: (False, (-1.0, 1.0)),
    2: (False, (-1.0, 1.0)),
    3: (False, (-1.0, 1.0)),
    4: (False, (-1.0, 1.0)),
    5: (False, (-1.0, 1.0)),
    6: (False, (-1.0, 1.0)),
    7: (False, (0.0, 2.0)),
    8: (False, (0.0, 4.0)),
    9: (True, (0.0, 1.0)),
    10: (True, (0.0, 1.0)),
    11: (True, (0.0, 1.0)),
    12: (True, (0.0, 1.0)),
}

_X_AUGMENTS = [
    DerivedColumn("x2", "x", "square"),
    DerivedColumn("x3", "x", "cube"),
    DerivedColumn("x4", "x", "pow4"),
    DerivedColumn("x5", "x", "pow5"),
    DerivedColumn("x6", "x", "pow6"),
    DerivedColumn("sinx", "x", "sin"),
    DerivedColumn("cosx", "x", "cos"),
    DerivedColumn("sqrtx", "x", "sqrt"),
]

_CONSTANTS = [
    ConstantColumn("one1", 1.0),
    ConstantColumn("one2", 1.0),
    ConstantColumn("two", 2.0),
]


def nguyen_augmentation(instance: int) -> AugmentationSpec:
    """The standard augmentation: powers of x through x^6, sin x, cos x,
    sqrt x, two copies of the constant 1, the constant 2, and y^2 when the
    instance has a second variable."""
    derived = list(_X_AUGMENTS)
    if _NGUYEN_RANGES[instance][0]:
        derived.append(DerivedColumn("y2", "y", "square"))
    return AugmentationSpec(tuple(derived), tuple(_CONSTANTS))


def _nguyen_target(instance: int, d: Dataset) -> np.ndarray:
    col = lambda n: d.column(n).values  # noqa: E731
    x = col("x")
    if instance == 1:
        return (col("x3") + col("x2")) + x
    if instance == 2:
        return ((col("x4") + col("x3")) + col("x2")) + x
    if instance == 3:
        return (((col("x5") + col("x4")) + col("x3")) + col("x2")) + x
    if instance == 4:
        return ((((col("x6") + col("x5")) + col("x4")) + col("x3")) + col("x2")) + x
    if instance == 5:
        return np.sin(col("x2")) * col("cosx") - 1.0
    if instance == 6:
        return col("sinx") + np.sin(x + col("x2"))
    if instance == 7:
        return np.log(x + 1.0) + np.log(col("x2") + 1.0)
    if instance == 8:
        return col("sqrtx").copy()
    y = col("y")
    if instance == 9:
        return col("sinx") + np.sin(col("y2"))
    if instance == 10:
        return 2.0 * col("sinx") * np.cos(y)
    if instance == 11:
        return np.power(x, y)
    if instance == 12:
        return ((col("x4") - col("x3")) + col("y2") / 2.0) - y
    raise ConfigurationError(f"nguyen instance must be 1..12, got {instance}")


def gen_nguyen(
    instance: int, seed: int, augmented: bool = True, n_train: int = 20, n_test: int = 20
) -> tuple[Dataset, Dataset]:
    """One Nguyen benchmark instance, 20 train + 20 test rows by default.

    Draws per row: x, then y when the instance uses it.  The target column
    f comes last; augmentation columns sit between the inputs and f.
    """
    if instance not in _NGUYEN_RANGES:
        raise ConfigurationError(f"nguyen instance must be 1..12, got {instance}")
    needs_y, (lo, hi) = _NGUYEN_RANGES[instance]

    def part(rng: SplitMix64, n: int) -> Dataset:
        x = np.empty(n)
        y = np.empty(n) if needs_y else None
        for i in range(n):
            x[i] = rng.uniform(lo, hi)
            if needs_y:
                y[i] = rng.uniform(0.0, 1.0)
        cols = [_numeric("x", x)]
        if needs_y:
            cols.append(_numeric("y", y))
        base = Dataset(tuple(cols))
        full = inject(base, nguyen_augmentation(instance))
        f = _nguyen_target(instance, full)
        keep = full if augmented else base
        return keep.append_columns([_numeric("f", f)]).with_target("f")

    return part(substream(seed, 1), n_train), part(substream(seed, 2), n_test)


# ---------------------------------------------------------------------------
# active-interaction (real-estate style) benchmark
# ---------------------------------------------------------------------------

PROPERTY_TYPES = [
    "singleFamily",
    "condo",
    "townhouse",
    "mobileHome",
    "multiFamily2to4",
    "multiFamily5Plus",
    "other",
]

INTERACTION_THRESHOLD = 300000.0


def gen_interaction(
    seed: int,
    n_train: int = 1000,
    n_test: int = 1000,
    rounding_noise: bool = False,
) -> tuple[Dataset, Dataset]:
    """Synthetic listing data whose class is an active interaction:
    priceBand is "above" iff squareFootage*pricePerSquareFoot >= 300000.

    With ``rounding_noise`` the compared product is perturbed by u*ppsf,
    u ~ Uniform(-1, 1), so the boundary blurs by at most one unit of
    pricePerSquareFoot.  Draws per row: bedrooms, bathrooms, sqft, ppsf,
    daysOnMarket, propertyType, then the noise draw when enabled.
    """
    if n_train < 1 or n_test < 1:
        raise ConfigurationError("gen_interaction needs n_train, n_test >= 1")

    def part(rng: SplitMix64, n: int) -> Dataset:
        bedrooms = np.empty(n)
        bathrooms = np.empty(n)
        sqft = np.empty(n)
        ppsf = np.empty(n)
        days = np.empty(n)
        ptype = np.empty(n, dtype=object)
        band = np.empty(n, dtype=object)
        for i in range(n):
            bedrooms[i] = float(rng.randint(1, 7))
            bathrooms[i] = float(rng.randint(1, 5))
            sqft[i] = rng.uniform(500.0, 3500.0)
            ppsf[i] = rng.uniform(50.0, 350.0)
            days[i] = float(rng.randint(0, 366))
            ptype[i] = PROPERTY_TYPES[rng.randint(0, len(PROPERTY_TYPES))]
            compared = sqft[i] * ppsf[i]
            if rounding_noise:
                compared += rng.uniform(-1.0, 1.0) * ppsf[i]
            band[i] = "above" if compared >= INTERACTION_THRESHOLD else "below"
        no_missing = np.zeros(n, dtype=bool)
        cols = (
            _numeric("bedrooms", bedrooms),
            _numeric("bathrooms", bathrooms),
            _numeric("squareFootage", sqft),
            _numeric("pricePerSquareFoot", ppsf),
            _numeric("daysOnMarket", days),
            Column("propertyType", CATEGORICAL, ptype, no_missing.copy()),
            _numeric("c300K", np.full(n, INTERACTION_THRESHOLD)),
            Column("priceBand", CATEGORICAL, band, no_missing.copy()),
        )
        return Dataset(cols)

    return part(substream(seed, 1), n_train), part(substream(seed, 2), n_test)
