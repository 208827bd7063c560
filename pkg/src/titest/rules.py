"""Decision rules over posterior columns, plus exact per-rule error probability.

All four rules consume a PosteriorColumn. Ties always break toward the lowest
hypothesis label so that runs are reproducible; the stochastic rule (SAP) takes
an explicit numpy Generator and never touches global randomness.
"""

from __future__ import annotations

import enum
from typing import Optional

import numpy as np

from .model import DiscreteJointModel, PosteriorColumn, posterior

__all__ = [
    "DecisionRule",
    "decide",
    "decide_eap",
    "decide_map",
    "decide_meap",
    "decide_sap",
    "error_probability",
    "inverse_cdf_pick",
    "sap_sample",
]


class DecisionRule(str, enum.Enum):
    MAP = "map"
    EAP = "eap"
    MEAP = "meap"
    SAP = "sap"

    @property
    def is_stochastic(self) -> bool:
        return self is DecisionRule.SAP

    @classmethod
    def from_name(cls, name: str) -> "DecisionRule":
        try:
            return cls(name.lower())
        except ValueError:
            valid = ", ".join(r.value for r in cls)
            raise ValueError(f"unknown rule {name!r}; valid rules: {valid}") from None


def _ascending(post: PosteriorColumn) -> tuple[np.ndarray, np.ndarray]:
    labels = np.asarray(post.labels)
    order = np.argsort(labels, kind="stable")
    return labels[order], np.asarray(post.probs)[order]


def decide_map(post: PosteriorColumn) -> int:
    """Label with the largest posterior probability, lowest label on ties."""
    labels, probs = _ascending(post)
    return int(labels[np.flatnonzero(probs == probs.max()).min()])


def decide_eap(post: PosteriorColumn) -> int:
    """Label whose posterior probability is nearest the expected posterior mass.

    The reference point is the probability-weighted mean of the posterior
    probabilities themselves, E[p] = sum_n p(n)^2; the winner minimizes
    |p(n) - E[p]|, lowest label on ties. A positive-probability label always
    wins: the smallest in-support p satisfies p <= E[p], so its distance to
    E[p] is strictly below the E[p] distance any zero-probability label has.
    """
    labels, probs = _ascending(post)
    score = np.abs(probs - float((probs * probs).sum()))
    return int(labels[np.flatnonzero(score == score.min()).min()])


def decide_meap(post: PosteriorColumn) -> int:
    """Label whose running CDF (in ascending label order) is closest to 1/2.

    Candidates are restricted to the support: a zero-probability label never
    moves the CDF, so admitting it could only matter through tie-breaks, and
    a point-mass posterior must decide its own atom rather than an unrelated
    lower label. Ties among support labels break toward the lowest.
    """
    labels, probs = _ascending(post)
    score = np.abs(np.cumsum(probs) - 0.5)
    score[probs <= 0.0] = np.inf
    return int(labels[np.flatnonzero(score == score.min()).min()])


def inverse_cdf_pick(cdf: np.ndarray, u) -> np.ndarray:
    """Index of the smallest entry with cdf > u, along the last axis.

    Shared by the single-draw SAP rule and the vectorized per-symbol sampler
    so both use identical boundary semantics (a draw landing exactly on a CDF
    step selects the next support point). The count is clipped so a terminal
    cdf of 1 - 1ulp cannot index past the end.
    """
    u = np.asarray(u)
    idx = (cdf <= u[..., None]).sum(axis=-1)
    return np.minimum(idx, cdf.shape[-1] - 1)


def sap_sample(post: PosteriorColumn, rng: np.random.Generator, size: int) -> np.ndarray:
    """size independent posterior draws (labels), via inverse-CDF sampling."""
    labels, probs = _ascending(post)
    cdf = np.cumsum(probs)
    return labels[inverse_cdf_pick(cdf, rng.random(size))]


def decide_sap(post: PosteriorColumn, rng: np.random.Generator) -> int:
    """One posterior draw: smallest label whose CDF strictly exceeds u."""
    return int(sap_sample(post, rng, 1)[0])


def decide(
    rule: DecisionRule,
    post: PosteriorColumn,
    rng: Optional[np.random.Generator] = None,
) -> int:
    rule = DecisionRule(rule)
    if rule is DecisionRule.MAP:
        return decide_map(post)
    if rule is DecisionRule.EAP:
        return decide_eap(post)
    if rule is DecisionRule.MEAP:
        return decide_meap(post)
    if rng is None:
        raise ValueError("SAP requires an rng")
    return decide_sap(post, rng)


def error_probability(model: DiscreteJointModel, rule: DecisionRule) -> float:
    """Exact P(decision != true hypothesis) under the model, no sampling.

    Deterministic rules: 1 - sum_y P(y) * post_y[decision(y)].
    SAP: the decision matches the truth with probability sum_x post_y[x]^2
    given y, hence 1 - sum_y P(y) * sum_x post_y[x]^2.
    """
    rule = DecisionRule(rule)
    correct = 0.0
    for j, y in enumerate(model.observation_values):
        p_y = model.y_marginal[j]
        if p_y <= 0.0:
            continue
        col = posterior(model, y)
        if rule is DecisionRule.SAP:
            correct += p_y * float((col.probs * col.probs).sum())
        else:
            chosen = decide(rule, col)
            correct += p_y * col.probs[model.x_index(chosen)]
    return float(1.0 - correct)
