"""Coupon-probability families and their normalizers.

A family describes a sequence of positive weights a_j; for a given number of
types N the weights are normalized into a probability vector p_j = a_j / A_N.
The log-Zipf family uses a_j = (ln j)^{-p} over indices j = 2..N+1, so that a
distribution always has exactly N types (index 1 is excluded because ln 1 = 0).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

EQUAL = "equal"
ZIPF = "zipf"
LOG_ZIPF = "log-zipf"
EXPLICIT = "explicit"

_KINDS = (EQUAL, ZIPF, LOG_ZIPF, EXPLICIT)

# Index of the first log-Zipf weight: (ln j)^{-p} needs j >= 2.
LOG_ZIPF_FIRST_INDEX = 2


@dataclass(frozen=True)
class CouponFamily:
    """Symbolic descriptor of a coupon weight sequence."""

    kind: str
    p: float | None = None
    weights: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown family kind {self.kind!r}; expected one of {_KINDS}")
        if self.kind in (ZIPF, LOG_ZIPF):
            if self.p is None or not (self.p > 0) or not math.isfinite(self.p):
                raise ValueError(f"{self.kind} family requires a finite exponent p > 0")
        if self.kind == EXPLICIT:
            if not self.weights:
                raise ValueError("explicit family requires a non-empty weight list")
            if any(not (w > 0) or not math.isfinite(w) for w in self.weights):
                raise ValueError("explicit weights must be finite and strictly positive")

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind}
        if self.p is not None:
            d["p"] = self.p
        if self.weights is not None:
            d["weights"] = list(self.weights)
        return d

    @staticmethod
    def from_dict(d: dict) -> "CouponFamily":
        weights = d.get("weights")
        return CouponFamily(
            kind=d["kind"],
            p=d.get("p"),
            weights=tuple(weights) if weights is not None else None,
        )

    @staticmethod
    def from_json(text: str) -> "CouponFamily":
        return CouponFamily.from_dict(json.loads(text))


def equal_family() -> CouponFamily:
    return CouponFamily(EQUAL)


def zipf_family(p: float) -> CouponFamily:
    return CouponFamily(ZIPF, p=p)


def log_zipf_family(p: float) -> CouponFamily:
    return CouponFamily(LOG_ZIPF, p=p)


def explicit_family(weights) -> CouponFamily:
    return CouponFamily(EXPLICIT, weights=tuple(float(w) for w in weights))


def load_weights_file(path) -> CouponFamily:
    """Read an explicit family from a text file, one positive weight per line."""
    weights = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                weights.append(float(line))
    return explicit_family(weights)


def weight(family: CouponFamily, j: int) -> float:
    """The j-th raw weight a_j of the family (1-based type index).

    For the log-Zipf family the type index j maps to sequence index j + 1,
    i.e. the first type carries weight (ln 2)^{-p}.
    """
    if j < 1:
        raise ValueError(f"type index must be >= 1, got {j}")
    if family.kind == EQUAL:
        return 1.0
    if family.kind == ZIPF:
        return float(j) ** -family.p
    if family.kind == LOG_ZIPF:
        # Raw sequence value (ln j)^{-p}; only defined from j = 2 on.
        if j < LOG_ZIPF_FIRST_INDEX:
            raise ValueError(f"log-Zipf weight undefined for j={j}: ln {j} <= 0")
        return math.log(j) ** -family.p
    assert family.weights is not None
    if j > len(family.weights):
        raise IndexError(f"explicit family has {len(family.weights)} weights, index {j} out of range")
    return family.weights[j - 1]


def raw_weights(family: CouponFamily, n_types: int) -> np.ndarray:
    """Weight vector for a distribution with `n_types` types."""
    if n_types < 1:
        raise ValueError(f"need at least one type, got {n_types}")
    if family.kind == EQUAL:
        return np.ones(n_types)
    if family.kind == ZIPF:
        return np.arange(1, n_types + 1, dtype=float) ** -family.p
    if family.kind == LOG_ZIPF:
        j = np.arange(LOG_ZIPF_FIRST_INDEX, LOG_ZIPF_FIRST_INDEX + n_types, dtype=float)
        return np.log(j) ** -family.p
    assert family.weights is not None
    if n_types != len(family.weights):
        raise ValueError(
            f"explicit family has {len(family.weights)} weights, cannot build {n_types} types"
        )
    return np.asarray(family.weights, dtype=float)


@dataclass(frozen=True)
class CouponDistribution:
    """A concrete N-type coupon distribution p_j = a_j / A_N."""

    n_types: int
    probs: np.ndarray = field(repr=False)
    normalizer: float
    family: CouponFamily

    def __post_init__(self) -> None:
        if self.n_types != len(self.probs):
            raise ValueError("probs length must equal n_types")
        if np.any(self.probs <= 0):
            raise ValueError("all probabilities must be strictly positive")
        total = float(np.sum(self.probs))
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {total}, expected 1 within 1e-12")
        self.probs.setflags(write=False)

    @property
    def min_prob(self) -> float:
        return float(self.probs.min())

    def to_dict(self) -> dict:
        return {
            "n_types": self.n_types,
            "normalizer": self.normalizer,
            "family": self.family.to_dict(),
        }


def build_distribution(family: CouponFamily, n_types: int) -> CouponDistribution:
    """Normalize the family's first `n_types` weights into a distribution.

    The normalizer A_N is accumulated with exactly-rounded summation so that
    the probabilities sum to 1 within 1e-12 even at 1e7 types.
    """
    w = raw_weights(family, n_types)
    a_n = math.fsum(w)
    return CouponDistribution(
        n_types=n_types, probs=w / a_n, normalizer=a_n, family=family
    )


@dataclass(frozen=True)
class NormalizerExpansion:
    """Three-term expansion of the log-Zipf normalizer plus its error scale."""

    terms: tuple[tuple[str, float], ...]
    error_scale: float

    @property
    def total(self) -> float:
        return math.fsum(v for _, v in self.terms)

    def to_dict(self) -> dict:
        return {
            "terms": [{"label": lbl, "value": v} for lbl, v in self.terms],
            "total": self.total,
            "error_scale": self.error_scale,
        }


def normalizer_exact(p: float, n: int) -> float:
    """Direct summation of sum_{j=2}^{n} (ln j)^{-p}."""
    if n < 2:
        raise ValueError("need n >= 2")
    j = np.arange(2, n + 1, dtype=float)
    return math.fsum(np.log(j) ** -p)


def normalizer_asymptotic(p: float, n: int) -> NormalizerExpansion:
    """Expansion of sum_{j=2}^{n} (ln j)^{-p} in powers of 1/ln n.

    Terms are n/(ln n)^p, p*n/(ln n)^{p+1}, p(p+1)*n/(ln n)^{p+2};
    the neglected remainder is of order n/(ln n)^{p+3}.
    """
    if not (p > 0):
        raise ValueError("exponent p must be positive")
    if n < 3:
        raise ValueError("need n >= 3")
    ln_n = math.log(n)
    t1 = n / ln_n**p
    t2 = p * n / ln_n ** (p + 1)
    t3 = p * (p + 1) * n / ln_n ** (p + 2)
    return NormalizerExpansion(
        terms=(
            ("n/(log n)^p", t1),
            ("p*n/(log n)^(p+1)", t2),
            ("p(p+1)*n/(log n)^(p+2)", t3),
        ),
        error_scale=n / ln_n ** (p + 3),
    )
