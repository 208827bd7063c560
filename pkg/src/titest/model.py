"""Finite-alphabet joint probability models and information measures.

Everything here works in bits (base-2 logs). A model couples a prior over
integer hypothesis labels with a row-stochastic likelihood matrix; entropies,
posteriors, surprisals and the test information are all derived from it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "DiscreteJointModel",
    "InfoSummary",
    "InvalidDistributionError",
    "PosteriorColumn",
    "ZeroEvidenceError",
    "build_bsc_model",
    "build_coin_model",
    "build_constant_model",
    "build_identity_model",
    "entropy",
    "info_summary",
    "posterior",
    "surprisal",
]

# Construction invariants are checked at 1e-12, derived identities at 1e-9.
CONSTRUCT_ATOL = 1e-12
DERIVED_ATOL = 1e-9

# Dense tables are materialized eagerly, so coin models are capped well above
# the sizes used anywhere in the experiments (the contract requires >= 64).
COIN_N_CAP = 512


class InvalidDistributionError(ValueError):
    """A vector or matrix that should be a probability distribution is not."""


class ZeroEvidenceError(ValueError):
    """The requested observation has zero marginal probability."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DiscreteJointModel:
    """Prior + likelihood over finite integer alphabets, with derived tables.

    Instances are immutable after construction and safe to share across
    threads or worker processes. The derived tables (joint, marginals, log2
    lookups, posterior matrix, per-column posterior entropies) are computed
    once in ``__post_init__`` because every downstream consumer needs them.
    """

    hypothesis_values: tuple[int, ...]
    observation_values: tuple[int, ...]
    prior: np.ndarray
    likelihood: np.ndarray

    def __post_init__(self) -> None:
        for v in (*self.hypothesis_values, *self.observation_values):
            if int(v) != v:
                raise ValueError(f"labels must be integers, got {v!r}")
        x_labels = tuple(int(v) for v in self.hypothesis_values)
        y_labels = tuple(int(v) for v in self.observation_values)
        if len(set(x_labels)) != len(x_labels) or len(set(y_labels)) != len(y_labels):
            raise ValueError("alphabet labels must be distinct")
        prior = np.asarray(self.prior, dtype=float)
        lik = np.asarray(self.likelihood, dtype=float)
        if prior.shape != (len(x_labels),):
            raise InvalidDistributionError(
                f"prior has shape {prior.shape}, expected ({len(x_labels)},)"
            )
        if lik.shape != (len(x_labels), len(y_labels)):
            raise InvalidDistributionError(
                f"likelihood has shape {lik.shape}, expected "
                f"({len(x_labels)}, {len(y_labels)})"
            )
        if (prior < 0).any():
            raise InvalidDistributionError("prior has negative entries")
        if abs(prior.sum() - 1.0) > CONSTRUCT_ATOL:
            raise InvalidDistributionError(f"prior sums to {prior.sum()!r}, not 1")
        if (lik < 0).any():
            raise InvalidDistributionError("likelihood has negative entries")
        row_sums = lik.sum(axis=1)
        bad = np.flatnonzero(np.abs(row_sums - 1.0) > CONSTRUCT_ATOL)
        if bad.size:
            raise InvalidDistributionError(
                f"likelihood row {bad[0]} sums to {row_sums[bad[0]]!r}, not 1"
            )

        joint = prior[:, None] * lik
        if abs(joint.sum() - 1.0) > DERIVED_ATOL:
            raise InvalidDistributionError(f"joint sums to {joint.sum()!r}, not 1")
        y_marginal = joint.sum(axis=0)

        with np.errstate(divide="ignore"):
            log2_prior = np.log2(prior)
            log2_y_marginal = np.log2(y_marginal)
            log2_joint = np.log2(joint)

        # Posterior columns for zero-evidence observations are left as NaN;
        # posterior() guards them and nothing downstream can sample such y.
        safe_y = np.where(y_marginal > 0, y_marginal, np.nan)
        post = joint / safe_y[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            plogp = np.where(post > 0, post * np.log2(post), 0.0)
        h_cols = np.where(np.isnan(post).any(axis=0), np.nan, -plogp.sum(axis=0))

        object.__setattr__(self, "hypothesis_values", x_labels)
        object.__setattr__(self, "observation_values", y_labels)
        object.__setattr__(self, "prior", _readonly(prior))
        object.__setattr__(self, "likelihood", _readonly(lik))
        object.__setattr__(self, "joint", _readonly(joint))
        object.__setattr__(self, "y_marginal", _readonly(y_marginal))
        object.__setattr__(self, "log2_prior", _readonly(log2_prior))
        object.__setattr__(self, "log2_y_marginal", _readonly(log2_y_marginal))
        object.__setattr__(self, "log2_joint", _readonly(log2_joint))
        object.__setattr__(self, "posterior_matrix", _readonly(post))
        object.__setattr__(self, "posterior_col_entropy", _readonly(h_cols))
        object.__setattr__(self, "_x_index", {v: i for i, v in enumerate(x_labels)})
        object.__setattr__(self, "_y_index", {v: i for i, v in enumerate(y_labels)})

    # Derived tables bound in __post_init__ (not dataclass fields): joint,
    # y_marginal, log2_prior, log2_y_marginal, log2_joint, posterior_matrix,
    # posterior_col_entropy.

    @property
    def n_hypotheses(self) -> int:
        return len(self.hypothesis_values)

    @property
    def n_observations(self) -> int:
        return len(self.observation_values)

    def x_index(self, label: int) -> int:
        try:
            return self._x_index[label]
        except KeyError:
            raise ValueError(f"unknown hypothesis label {label!r}") from None

    def y_index(self, label: int) -> int:
        try:
            return self._y_index[label]
        except KeyError:
            raise ValueError(f"unknown observation label {label!r}") from None

    def to_json_dict(self) -> dict:
        return {
            "hypothesis_values": list(self.hypothesis_values),
            "observation_values": list(self.observation_values),
            "prior": [float(p) for p in self.prior],
            "likelihood": [[float(p) for p in row] for row in self.likelihood],
        }

    @classmethod
    def from_json_dict(cls, doc: Mapping) -> "DiscreteJointModel":
        for field in ("hypothesis_values", "observation_values", "prior", "likelihood"):
            if field not in doc:
                raise InvalidDistributionError(f"model document missing field {field!r}")
        return cls(
            hypothesis_values=tuple(doc["hypothesis_values"]),
            observation_values=tuple(doc["observation_values"]),
            prior=np.asarray(doc["prior"], dtype=float),
            likelihood=np.asarray(doc["likelihood"], dtype=float),
        )


@dataclass(frozen=True)
class PosteriorColumn:
    """P(x | y) for one observation label, over the hypothesis alphabet."""

    y: int
    labels: tuple[int, ...]
    probs: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "probs", _readonly(self.probs))


@dataclass(frozen=True)
class InfoSummary:
    h_x: float
    h_y: float
    h_xy: float
    h_x_given_y: float
    ti: float


def entropy(dist: Sequence[float] | np.ndarray) -> float:
    """Shannon entropy of a probability vector, in bits. 0*log(0) counts as 0."""
    p = np.asarray(dist, dtype=float)
    if (p < 0).any():
        raise InvalidDistributionError("distribution has negative entries")
    if abs(p.sum() - 1.0) > DERIVED_ATOL:
        raise InvalidDistributionError(f"distribution sums to {p.sum()!r}, not 1")
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())


def build_coin_model(n: int, theta: float) -> DiscreteJointModel:
    """Binomial coin-count model: n coins for n = 1..N, k heads observed.

    Hypotheses carry a uniform prior. P(k|n) = C(n,k) theta^k (1-theta)^(n-k),
    with C(n,k) = 0 for k > n so impossible counts stay at exact zero. The
    binomials are evaluated through log-gamma, so rows stay finite at any
    supported N.
    """
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise ValueError(f"N must be an integer, got {n!r}")
    if n < 1 or n > COIN_N_CAP:
        raise ValueError(f"N must be in 1..{COIN_N_CAP}, got {n}")
    if not 0.0 < theta < 1.0:
        raise ValueError(f"theta must lie strictly inside (0, 1), got {theta!r}")
    log_t = math.log(theta)
    log_c = math.log1p(-theta)
    lik = np.zeros((n, n + 1))
    for i in range(n):
        trials = i + 1
        ks = np.arange(trials + 1)
        log_binom = (
            math.lgamma(trials + 1)
            - np.array([math.lgamma(k + 1) + math.lgamma(trials - k + 1) for k in ks])
        )
        lik[i, : trials + 1] = np.exp(log_binom + ks * log_t + (trials - ks) * log_c)
        # renormalize away the residual rounding so row sums hit 1e-12
        lik[i, : trials + 1] /= lik[i, : trials + 1].sum()
    return DiscreteJointModel(
        hypothesis_values=tuple(range(1, n + 1)),
        observation_values=tuple(range(0, n + 1)),
        prior=np.full(n, 1.0 / n),
        likelihood=lik,
    )


def build_identity_model(n: int, labels: Iterable[int] | None = None) -> DiscreteJointModel:
    """Noiseless channel: y = x with probability 1, uniform prior over n labels."""
    if n < 1:
        raise ValueError("need at least one symbol")
    labs = tuple(labels) if labels is not None else tuple(range(n))
    return DiscreteJointModel(
        hypothesis_values=labs,
        observation_values=labs,
        prior=np.full(n, 1.0 / n),
        likelihood=np.eye(n),
    )


def build_constant_model(n: int, y_dist: Sequence[float] | None = None) -> DiscreteJointModel:
    """Channel whose output ignores the input; TI is exactly zero."""
    if n < 1:
        raise ValueError("need at least one hypothesis")
    row = np.asarray(y_dist, dtype=float) if y_dist is not None else np.array([0.5, 0.5])
    return DiscreteJointModel(
        hypothesis_values=tuple(range(n)),
        observation_values=tuple(range(row.size)),
        prior=np.full(n, 1.0 / n),
        likelihood=np.tile(row, (n, 1)),
    )


def build_bsc_model(crossover: float) -> DiscreteJointModel:
    """Binary symmetric channel with uniform prior."""
    if not 0.0 <= crossover <= 1.0:
        raise ValueError(f"crossover must lie in [0, 1], got {crossover!r}")
    p = float(crossover)
    return DiscreteJointModel(
        hypothesis_values=(0, 1),
        observation_values=(0, 1),
        prior=np.array([0.5, 0.5]),
        likelihood=np.array([[1 - p, p], [p, 1 - p]]),
    )


def posterior(model: DiscreteJointModel, y: int) -> PosteriorColumn:
    """Bayes column P(x|y) = pi(x) P(y|x) / P(y). Requires P(y) > 0."""
    j = model.y_index(y)
    if model.y_marginal[j] <= 0.0:
        raise ZeroEvidenceError(f"observation {y!r} has zero probability under the model")
    return PosteriorColumn(
        y=y, labels=model.hypothesis_values, probs=model.posterior_matrix[:, j].copy()
    )


def info_summary(model: DiscreteJointModel) -> InfoSummary:
    """All five information measures in bits; ti = h_x - h_x_given_y.

    H(X|Y) is the evidence-weighted entropy of the posterior columns,
    sum_y P(y) H(X|Y=y), which is what makes ti equal the mutual information.
    """
    h_x = entropy(model.prior)
    h_y = entropy(model.y_marginal)
    h_xy = entropy(model.joint.ravel())
    pos = model.y_marginal > 0
    h_x_given_y = float((model.y_marginal[pos] * model.posterior_col_entropy[pos]).sum())
    return InfoSummary(
        h_x=h_x, h_y=h_y, h_xy=h_xy, h_x_given_y=h_x_given_y, ti=h_x - h_x_given_y
    )


def surprisal(model: DiscreteJointModel, kind: str, symbol) -> float:
    """-log2 of a model probability; +inf for zero-probability symbols.

    kind selects the distribution: "prior" (symbol is a hypothesis label),
    "y-marginal" (observation label), or "joint" (symbol is an (x, y) pair).
    """
    if kind == "prior":
        p = model.prior[model.x_index(symbol)]
    elif kind == "y-marginal":
        p = model.y_marginal[model.y_index(symbol)]
    elif kind == "joint":
        x, y = symbol
        p = model.joint[model.x_index(x), model.y_index(y)]
    else:
        raise ValueError(f"kind must be 'prior', 'y-marginal' or 'joint', got {kind!r}")
    return float(-np.log2(p)) if p > 0 else float("inf")
