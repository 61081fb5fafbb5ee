"""
Shared data models and Pydantic schemas used across modules.

Reports deliberately carry no timestamps: reruns of the same computation
serialize to identical bytes.
"""

from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .settings import DEFAULT_SEED

DELTA_PARAM_COUNT = 21
MU_PARAM_COUNT = 7


# Enums
class ExperimentName(str, Enum):
    THETA_FAMILY = "theta-family"
    SINGLE_DELTA_PARAMS = "single-delta-params"
    RANDOM_MU_PAIRS = "random-mu-pairs"
    GREEDY_DESCENT = "greedy-descent"
    GROUPS64_CENSUS = "groups64-census"
    MLT_ORDERS = "mlt-orders"
    CHMU_PROPERTIES = "chmu-properties"


class LoopCategory(str, Enum):
    GROUP = "group"
    CLASS3_ABELIAN_INN = "class3-abelian-inn"
    OTHER = "other"


# Loop analysis
class AnalysisReport(BaseModel):
    """Structural invariants of one loop table."""
    order: int = Field(..., ge=1)
    is_associative: bool
    left_nucleus_size: int
    middle_nucleus_size: int
    right_nucleus_size: int
    nucleus_size: int
    center_size: int
    associator_subloop_size: int
    nilpotency_class: Optional[int] = None
    mu_count: int = Field(..., ge=0)
    power_associative: bool
    nuclei_cover_loop: bool
    nucleus_elementary_abelian_2: bool
    center_is_associator_subloop: bool
    mlt_order: Optional[int] = None
    inn_order: Optional[int] = None
    inn_abelian: Optional[bool] = None
    inn_elementary_abelian_2: Optional[bool] = None

    @model_validator(mode="after")
    def check_containments(self) -> "AnalysisReport":
        one_sided = (self.left_nucleus_size, self.middle_nucleus_size, self.right_nucleus_size)
        if any(size % self.nucleus_size for size in one_sided):
            raise ValueError("nucleus size must divide every one-sided nucleus size")
        if self.nucleus_size % self.center_size:
            raise ValueError("center size must divide nucleus size")
        if self.is_associative != (self.mu_count == 0):
            raise ValueError("is_associative disagrees with mu_count")
        return self


class GroupFingerprint(BaseModel):
    """Isomorphism invariants of a permutation group."""
    order: int
    center_order: int
    derived_series_orders: List[int]
    abelian_invariants: List[int]
    element_order_histogram: Optional[Dict[int, int]] = None
    histogram_skipped: bool = False


class PermGroupExport(BaseModel):
    degree: int
    generators: List[List[int]]
    base: List[int]
    order: str


# Modification parameters
def _signs_from_int(value: int, count: int) -> Tuple[int, ...]:
    return tuple(-1 if (value >> k) & 1 else 1 for k in range(count))


def _int_from_signs(signs: Tuple[int, ...]) -> int:
    return sum(1 << k for k, s in enumerate(signs) if s == -1)


class DeltaMuParams(BaseModel):
    """The 21 + 7 free parameters of a delta/mu pair.

    delta_bits[k] belongs to the k-th transversal pair (i, j), 1 < i < j <= 8,
    in lexicographic order; mu_bits[k] belongs to t_{k+2}. Values are signs;
    in the integer/hex encoding bit k set means value -1.
    """
    model_config = ConfigDict(frozen=True)

    delta_bits: Tuple[int, ...] = (1,) * DELTA_PARAM_COUNT
    mu_bits: Tuple[int, ...] = (1,) * MU_PARAM_COUNT

    @field_validator("delta_bits")
    @classmethod
    def validate_delta_bits(cls, v: Tuple[int, ...]) -> Tuple[int, ...]:
        if len(v) != DELTA_PARAM_COUNT:
            raise ValueError(f"expected {DELTA_PARAM_COUNT} delta parameters, got {len(v)}")
        if any(s not in (1, -1) for s in v):
            raise ValueError("delta parameters must be 1 or -1")
        return v

    @field_validator("mu_bits")
    @classmethod
    def validate_mu_bits(cls, v: Tuple[int, ...]) -> Tuple[int, ...]:
        if len(v) != MU_PARAM_COUNT:
            raise ValueError(f"expected {MU_PARAM_COUNT} mu parameters, got {len(v)}")
        if any(s not in (1, -1) for s in v):
            raise ValueError("mu parameters must be 1 or -1")
        return v

    @classmethod
    def from_ints(cls, delta: int = 0, mu: int = 0) -> "DeltaMuParams":
        if not 0 <= delta < 2 ** DELTA_PARAM_COUNT:
            raise ValueError(f"delta value {delta:#x} exceeds {DELTA_PARAM_COUNT} bits")
        if not 0 <= mu < 2 ** MU_PARAM_COUNT:
            raise ValueError(f"mu value {mu:#x} exceeds {MU_PARAM_COUNT} bits")
        return cls(delta_bits=_signs_from_int(delta, DELTA_PARAM_COUNT),
                   mu_bits=_signs_from_int(mu, MU_PARAM_COUNT))

    @classmethod
    def from_hex(cls, delta: str = "0", mu: str = "0") -> "DeltaMuParams":
        try:
            return cls.from_ints(int(delta, 16), int(mu, 16))
        except ValueError as e:
            raise ValueError(f"bad parameter string: {e}") from e

    @classmethod
    def random(cls, rng: np.random.Generator) -> "DeltaMuParams":
        return cls.from_ints(int(rng.integers(0, 2 ** DELTA_PARAM_COUNT)),
                             int(rng.integers(0, 2 ** MU_PARAM_COUNT)))

    @property
    def delta_int(self) -> int:
        return _int_from_signs(self.delta_bits)

    @property
    def mu_int(self) -> int:
        return _int_from_signs(self.mu_bits)

    @property
    def delta_hex(self) -> str:
        return f"{self.delta_int:06x}"

    @property
    def mu_hex(self) -> str:
        return f"{self.mu_int:02x}"


# Greedy search
class GreedyStep(BaseModel):
    pair: Tuple[int, int]
    mu_count: int


class GreedyHistory(BaseModel):
    initial_mu_count: int
    final_mu_count: int
    coset_count: int
    h: int
    steps: List[GreedyStep] = Field(default_factory=list)


# Theorem validation
class ConditionReport(BaseModel):
    c1: bool
    c2: bool
    c3: bool

    def all_hold(self) -> bool:
        return self.c1 and self.c2 and self.c3


class TheoremReport(BaseModel):
    """Outcome of the exhaustive identity checks on one modification context."""
    c1: bool
    c2: bool
    c3: bool
    associator_formula: Optional[bool] = None
    lr_identities: Optional[bool] = None
    conjugation_identity: Optional[bool] = None
    class_bound: Optional[bool] = None
    group_class2_equivalence: Optional[bool] = None
    loop_class2_equivalence: Optional[bool] = None
    inner_square_identity: Optional[bool] = None
    hall_witt: Optional[bool] = None

    def all_hold(self) -> bool:
        return all(v is not False for v in self.model_dump().values())


# Group census
class CensusEntry(BaseModel):
    class_index: int
    representative: int
    squaring_vector: Tuple[int, int, int]
    members: List[int]
    digest: str
    table_file: Optional[str] = None


class CensusManifest(BaseModel):
    total: int
    classes: List[CensusEntry]
    tool_version: Optional[str] = None


# Experiments
class ExperimentSpec(BaseModel):
    """What to run, with which seed, and where to write the results."""
    name: ExperimentName
    seed: int = DEFAULT_SEED
    samples: int = Field(default=20, ge=1)
    pairs: int = Field(default=50, ge=1)
    workers: int = Field(default=1, ge=1)
    output: Optional[Path] = None
    summary_csv: Optional[Path] = None

    @field_validator("seed")
    @classmethod
    def validate_seed(cls, v: int) -> int:
        if not 0 <= v < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        return v


class ExperimentReport(BaseModel):
    tool_version: str
    prng: str = "PCG64"
    seed: int
    spec: ExperimentSpec
    complete: bool = True
    items: List[Dict[str, Any]] = Field(default_factory=list)
    summary: Dict[str, Any] = Field(default_factory=dict)
