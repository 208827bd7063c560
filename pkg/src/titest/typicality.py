"""M-extension sampling, weak-typicality predicates, and exact enumeration.

Sequence probabilities are never multiplied out directly: every predicate works
on per-symbol surprisals (bits) summed in log space, so membership stays exact
at extensions where the linear product would underflow.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .model import DiscreteJointModel

__all__ = [
    "CensusBound",
    "CensusReport",
    "EnumerationTooLargeError",
    "SequencePair",
    "TypicalityCheck",
    "TypicalityParams",
    "TypicalityVerdict",
    "conditional_members",
    "draw_index_pair",
    "is_jointly_typical",
    "is_typical",
    "resolve_enum_cap",
    "sample_extension",
    "typical_set_census",
]

DEFAULT_ENUM_CAP = 10_000_000
ENUM_CAP_ENV = "TI_TEST_ENUM_CAP"

# Lower cardinality/mass bounds only kick in for "sufficiently large" M;
# below this threshold a failed lower bound is reported but not asserted.
M_MIN_LOWER_BOUNDS = 8

# Deviations inside this band around epsilon count as boundary hits and
# classify as non-typical, so fp noise cannot flip a strict inequality.
BOUNDARY_ATOL = 1e-12


class EnumerationTooLargeError(RuntimeError):
    """Candidate space exceeds the enumeration cap; use Monte Carlo instead."""


def resolve_enum_cap(cap: int | None = None) -> int:
    """Explicit cap, else the TI_TEST_ENUM_CAP env var, else the default."""
    if cap is not None:
        return int(cap)
    env = os.environ.get(ENUM_CAP_ENV)
    return int(env) if env else DEFAULT_ENUM_CAP


@dataclass(frozen=True)
class TypicalityParams:
    epsilon: float
    extension: int

    def __post_init__(self) -> None:
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon!r}")
        if not isinstance(self.extension, (int, np.integer)) or self.extension < 1:
            raise ValueError(f"extension must be a positive integer, got {self.extension!r}")


@dataclass(frozen=True)
class SequencePair:
    x_seq: tuple[int, ...]
    y_seq: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "x_seq", tuple(int(v) for v in self.x_seq))
        object.__setattr__(self, "y_seq", tuple(int(v) for v in self.y_seq))
        if len(self.x_seq) != len(self.y_seq):
            raise ValueError(
                f"sequence lengths differ: {len(self.x_seq)} vs {len(self.y_seq)}"
            )


class TypicalityCheck(NamedTuple):
    typical: bool
    rate: float


@dataclass(frozen=True)
class TypicalityVerdict:
    x_typical: bool
    y_typical: bool
    jointly_typical: bool
    x_rate: float
    y_rate: float
    joint_rate: float
    x_deviation: float
    y_deviation: float
    joint_deviation: float


def _strictly_inside(deviation: float, epsilon: float) -> bool:
    return deviation < epsilon - BOUNDARY_ATOL


def draw_index_pair(
    model: DiscreteJointModel,
    m: int,
    rng: np.random.Generator,
    prior_cdf: np.ndarray | None = None,
    lik_cdf: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Index-level sampler behind sample_extension; also used by trials.

    Draw order is part of the determinism contract: m uniforms for the
    hypothesis symbols first, then m uniforms for the observations, each
    mapped through an inverse CDF in the model's storage order.
    """
    from .rules import inverse_cdf_pick

    if prior_cdf is None:
        prior_cdf = np.cumsum(model.prior)
    if lik_cdf is None:
        lik_cdf = np.cumsum(model.likelihood, axis=1)
    xi = inverse_cdf_pick(prior_cdf, rng.random(m))
    yi = inverse_cdf_pick(lik_cdf[xi], rng.random(m))
    return xi, yi


def sample_extension(
    model: DiscreteJointModel, m: int, rng: np.random.Generator
) -> SequencePair:
    """Draw an i.i.d. pair of length-m label sequences from the model."""
    if m < 1:
        raise ValueError(f"extension must be >= 1, got {m}")
    xi, yi = draw_index_pair(model, m, rng)
    x_labels = np.asarray(model.hypothesis_values)
    y_labels = np.asarray(model.observation_values)
    return SequencePair(x_seq=tuple(x_labels[xi]), y_seq=tuple(y_labels[yi]))


def _x_indices(model: DiscreteJointModel, seq: Sequence[int]) -> np.ndarray:
    return np.array([model.x_index(v) for v in seq], dtype=np.intp)


def _y_indices(model: DiscreteJointModel, seq: Sequence[int]) -> np.ndarray:
    return np.array([model.y_index(v) for v in seq], dtype=np.intp)


def is_typical(
    seq: Sequence[int],
    model: DiscreteJointModel,
    which: str,
    params: TypicalityParams,
) -> TypicalityCheck:
    """Marginal typicality of one sequence: |rate - H| strictly below epsilon.

    which is "X" (sequence of hypothesis labels, measured against the prior)
    or "Y" (observation labels against the output marginal). A symbol of zero
    probability makes the rate infinite and the verdict False.
    """
    if len(seq) != params.extension:
        raise ValueError(f"sequence length {len(seq)} != extension {params.extension}")
    from .model import entropy  # local import keeps module load order simple

    if which.upper() == "X":
        rate = float(-model.log2_prior[_x_indices(model, seq)].mean())
        h = entropy(model.prior)
    elif which.upper() == "Y":
        rate = float(-model.log2_y_marginal[_y_indices(model, seq)].mean())
        h = entropy(model.y_marginal)
    else:
        raise ValueError(f"which must be 'X' or 'Y', got {which!r}")
    return TypicalityCheck(typical=_strictly_inside(abs(rate - h), params.epsilon), rate=rate)


def is_jointly_typical(
    pair: SequencePair, model: DiscreteJointModel, params: TypicalityParams
) -> TypicalityVerdict:
    """Evaluate all three joint-typicality conditions and report every rate.

    The x-marginal condition measures the x-sequence against the prior, the
    y condition against the output marginal, and the joint condition against
    the joint table; jointly_typical requires all three deviations strictly
    inside epsilon.
    """
    if len(pair.x_seq) != params.extension:
        raise ValueError(f"pair length {len(pair.x_seq)} != extension {params.extension}")
    from .model import entropy, info_summary

    xi = _x_indices(model, pair.x_seq)
    yi = _y_indices(model, pair.y_seq)
    x_rate = float(-model.log2_prior[xi].mean())
    y_rate = float(-model.log2_y_marginal[yi].mean())
    joint_rate = float(-model.log2_joint[xi, yi].mean())
    h_x = entropy(model.prior)
    h_y = entropy(model.y_marginal)
    h_xy = entropy(model.joint.ravel())
    x_dev = abs(x_rate - h_x)
    y_dev = abs(y_rate - h_y)
    j_dev = abs(joint_rate - h_xy)
    x_ok = _strictly_inside(x_dev, params.epsilon)
    y_ok = _strictly_inside(y_dev, params.epsilon)
    j_ok = _strictly_inside(j_dev, params.epsilon)
    return TypicalityVerdict(
        x_typical=x_ok,
        y_typical=y_ok,
        jointly_typical=x_ok and y_ok and j_ok,
        x_rate=x_rate,
        y_rate=y_rate,
        joint_rate=joint_rate,
        x_deviation=x_dev,
        y_deviation=y_dev,
        joint_deviation=j_dev,
    )


def _index_blocks(n_symbols: int, m: int, block: int = 1 << 16) -> Iterator[np.ndarray]:
    """Yield (B, m) arrays covering all n_symbols**m index tuples in order."""
    total = n_symbols**m
    shape = (n_symbols,) * m
    for lo in range(0, total, block):
        flat = np.arange(lo, min(lo + block, total))
        yield np.stack(np.unravel_index(flat, shape), axis=1)


def conditional_members(
    y_seq: Sequence[int],
    model: DiscreteJointModel,
    params: TypicalityParams,
    cap: int | None = None,
) -> list[tuple[int, ...]]:
    """All x-sequences jointly typical with y_seq, by exhaustive enumeration.

    Returns label tuples in lexicographic index order. The set is empty
    whenever y_seq itself fails its marginal condition, since that condition
    does not depend on x. Candidate count |X|^m beyond the cap raises
    EnumerationTooLargeError; Monte Carlo trials are the fallback at scale.
    """
    m = params.extension
    if len(y_seq) != m:
        raise ValueError(f"sequence length {len(y_seq)} != extension {m}")
    limit = resolve_enum_cap(cap)
    n_x = model.n_hypotheses
    if n_x**m > limit:
        raise EnumerationTooLargeError(
            f"|X|^M = {n_x}^{m} exceeds the enumeration cap {limit}; "
            "use Monte Carlo trials instead"
        )
    from .model import entropy

    yi = _y_indices(model, y_seq)
    h_x = entropy(model.prior)
    h_y = entropy(model.y_marginal)
    h_xy = entropy(model.joint.ravel())
    y_rate = float(-model.log2_y_marginal[yi].mean())
    if not _strictly_inside(abs(y_rate - h_y), params.epsilon):
        return []
    x_labels = np.asarray(model.hypothesis_values)
    out: list[tuple[int, ...]] = []
    for combos in _index_blocks(n_x, m):
        x_rates = -model.log2_prior[combos].mean(axis=1)
        joint_rates = -model.log2_joint[combos, yi[None, :]].mean(axis=1)
        keep = (np.abs(x_rates - h_x) < params.epsilon - BOUNDARY_ATOL) & (
            np.abs(joint_rates - h_xy) < params.epsilon - BOUNDARY_ATOL
        )
        out.extend(tuple(row) for row in x_labels[combos[keep]])
    return out


@dataclass(frozen=True)
class CensusBound:
    """One inequality record: holds iff lhs < rhs (or <= for *_ge_* names)."""

    name: str
    lhs: float
    rhs: float
    holds: bool


@dataclass(frozen=True)
class CensusReport:
    m: int
    epsilon: float
    sizes: dict
    masses: dict
    bounds: list[CensusBound] = field(default_factory=list)
    m_min: int = M_MIN_LOWER_BOUNDS

    def bound(self, name: str) -> CensusBound:
        for b in self.bounds:
            if b.name == name:
                return b
        raise KeyError(name)

    def to_json_dict(self) -> dict:
        return {
            "m": self.m,
            "epsilon": self.epsilon,
            "sizes": dict(self.sizes),
            "masses": dict(self.masses),
            "m_min": self.m_min,
            "bounds": [
                {"name": b.name, "lhs": b.lhs, "rhs": b.rhs, "holds": b.holds}
                for b in self.bounds
            ],
        }


def _census_scan(
    per_symbol_surprisals: list[np.ndarray],
    entropies: list[float],
    n_symbols: int,
    m: int,
    epsilon: float,
    prob_surprisal: np.ndarray,
) -> tuple[int, float, float, float]:
    """Scan all n_symbols**m sequences; keep those inside every condition.

    per_symbol_surprisals/entropies describe the conditions (one pair for a
    marginal census, three for the joint census on the flattened pair
    alphabet). prob_surprisal defines the measure used for mass and the
    extreme member probabilities. Returns (count, mass, min_prob, max_prob).
    """
    count = 0
    mass = 0.0
    min_p = np.inf
    max_p = 0.0
    for combos in _index_blocks(n_symbols, m):
        keep = np.ones(combos.shape[0], dtype=bool)
        for s, h in zip(per_symbol_surprisals, entropies):
            rates = s[combos].mean(axis=1)
            keep &= np.abs(rates - h) < epsilon - BOUNDARY_ATOL
        if not keep.any():
            continue
        member_surprisal = prob_surprisal[combos[keep]].sum(axis=1)
        probs = np.exp2(-member_surprisal)
        count += int(keep.sum())
        mass += float(probs.sum())
        min_p = min(min_p, float(probs.min()))
        max_p = max(max_p, float(probs.max()))
    return count, mass, min_p, max_p


def typical_set_census(
    model: DiscreteJointModel, params: TypicalityParams, cap: int | None = None
) -> CensusReport:
    """Exact sizes, masses, and bound records for the three typical sets.

    Bound records per marginal set: mass above 1 - eps, member probabilities
    inside the 2^{-M(H +/- eps)} window, count below 2^{M(H+eps)}, and two
    readings of the count lower bound. The "*_count_lower" record uses the
    standard (1-eps) 2^{M(H-eps)} form; "*_count_lower_printed" keeps the
    H+eps exponent variant for visibility and is never asserted by tests.
    The joint set gets mass and member-probability records. Lower bounds are
    generally expected to hold only for m >= m_min (reported in the record).
    """
    from .model import entropy

    m, eps = params.extension, params.epsilon
    limit = resolve_enum_cap(cap)
    n_x, n_y = model.n_hypotheses, model.n_observations
    for label, candidates in (
        ("|X|^M", n_x**m),
        ("|Y|^M", n_y**m),
        ("(|X||Y|)^M", (n_x * n_y) ** m),
    ):
        if candidates > limit:
            raise EnumerationTooLargeError(
                f"{label} = {candidates} exceeds the enumeration cap {limit}"
            )

    h_x = entropy(model.prior)
    h_y = entropy(model.y_marginal)
    h_xy = entropy(model.joint.ravel())
    s_x = -model.log2_prior
    s_y = -model.log2_y_marginal
    s_joint_flat = -model.log2_joint.ravel()
    # the joint scan runs on the flattened (x, y) symbol alphabet
    s_x_flat = np.repeat(s_x, n_y)
    s_y_flat = np.tile(s_y, n_x)

    cx, mx, minpx, maxpx = _census_scan([s_x], [h_x], n_x, m, eps, s_x)
    cy, my, minpy, maxpy = _census_scan([s_y], [h_y], n_y, m, eps, s_y)
    cj, mj, minpj, maxpj = _census_scan(
        [s_x_flat, s_y_flat, s_joint_flat], [h_x, h_y, h_xy], n_x * n_y, m, eps, s_joint_flat
    )

    bounds: list[CensusBound] = []

    def strict(name: str, lhs: float, rhs: float) -> None:
        bounds.append(CensusBound(name=name, lhs=lhs, rhs=rhs, holds=bool(lhs < rhs)))

    def weak(name: str, lhs: float, rhs: float) -> None:
        bounds.append(CensusBound(name=name, lhs=lhs, rhs=rhs, holds=bool(lhs <= rhs)))

    for tag, h, count, mass, min_p, max_p in (
        ("x", h_x, cx, mx, minpx, maxpx),
        ("y", h_y, cy, my, minpy, maxpy),
    ):
        strict(f"{tag}_mass_lower", 1.0 - eps, mass)
        if count:
            strict(f"{tag}_member_prob_lower", 2.0 ** (-m * (h + eps)), min_p)
            strict(f"{tag}_member_prob_upper", max_p, 2.0 ** (-m * (h - eps)))
        strict(f"{tag}_count_upper", float(count), 2.0 ** (m * (h + eps)))
        strict(f"{tag}_count_lower", (1.0 - eps) * 2.0 ** (m * (h - eps)), float(count))
        strict(
            f"{tag}_count_lower_printed",
            (1.0 - eps) * 2.0 ** (m * (h + eps)),
            float(count),
        )
    weak("joint_mass_lower", 1.0 - eps, mj)
    if cj:
        strict("joint_member_prob_lower", 2.0 ** (-m * (h_xy + eps)), minpj)
        strict("joint_member_prob_upper", maxpj, 2.0 ** (-m * (h_xy - eps)))

    return CensusReport(
        m=m,
        epsilon=eps,
        sizes={"x": cx, "y": cy, "joint": cj},
        masses={"x": mx, "y": my, "joint": mj},
        bounds=bounds,
    )
