"""Evidence-based trust models used to decide whether a neighbor is a sensor.

Every model consumes the same first-hand evidence: counts of positive and
negative probe experiences with a single peer. Four models are provided:

* ``ebay``: cumulative feedback rating, positive minus negative.
* ``beta``: posterior mean of a Beta(1, 1) prior updated with the counts.
* ``sl``: subjective logic opinion (prior weight 2) and its expectation.
* ``ct``: certain trust, a certainty-weighted blend of the observed
  success rate and an initial trust value.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Union

SL_PRIOR_WEIGHT = 2.0


class Outcome(str, Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"


class Model(str, Enum):
    EBAY = "ebay"
    BETA = "beta"
    SUBJECTIVE_LOGIC = "sl"
    CERTAIN_TRUST = "ct"

    @classmethod
    def parse(cls, name: str) -> "Model":
        aliases = {
            "ebay": cls.EBAY,
            "beta": cls.BETA,
            "sl": cls.SUBJECTIVE_LOGIC,
            "subjective_logic": cls.SUBJECTIVE_LOGIC,
            "ct": cls.CERTAIN_TRUST,
            "certain_trust": cls.CERTAIN_TRUST,
        }
        try:
            return aliases[name.strip().lower()]
        except KeyError:
            raise ValueError(f"unknown trust model {name!r}") from None


# Beta and subjective logic need six straight negatives before blacklisting:
# benign peers that drop offline mid-probe routinely collect three to four.
DEFAULT_THRESHOLDS = {
    Model.EBAY: -3.0,
    Model.BETA: 0.14,
    Model.SUBJECTIVE_LOGIC: 0.14,
    Model.CERTAIN_TRUST: 0.25,
}


@dataclass(frozen=True)
class EvidenceRecord:
    """Append-only counts of positive and negative experiences."""

    positive: int = 0
    negative: int = 0

    def __post_init__(self):
        if self.positive < 0 or self.negative < 0:
            raise ValueError("evidence counts must be non-negative")

    def total(self) -> int:
        return self.positive + self.negative


@dataclass(frozen=True)
class Opinion:
    belief: float
    disbelief: float
    uncertainty: float
    base_rate: float = 0.5

    def __post_init__(self):
        for name in ("belief", "disbelief", "uncertainty", "base_rate"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name}={value} outside [0, 1]")
        if abs(self.belief + self.disbelief + self.uncertainty - 1.0) > 1e-12:
            raise ValueError("belief + disbelief + uncertainty must equal 1")


@dataclass(frozen=True)
class TrustParams:
    model: Model = Model.EBAY
    threshold: float = DEFAULT_THRESHOLDS[Model.EBAY]
    min_experiences: int = 3
    base_rate: float = 0.5
    max_evidence: int = 10
    initial_trust: float = 0.5

    def __post_init__(self):
        if self.min_experiences < 1:
            raise ValueError("min_experiences must be >= 1")
        if self.max_evidence < 1:
            raise ValueError("max_evidence must be >= 1")
        if not 0.0 <= self.base_rate <= 1.0:
            raise ValueError("base_rate must lie in [0, 1]")
        if not 0.0 <= self.initial_trust <= 1.0:
            raise ValueError("initial_trust must lie in [0, 1]")

    @classmethod
    def for_model(cls, model: Union[Model, str], **overrides) -> "TrustParams":
        """Params for ``model`` with its default threshold unless overridden."""
        model = Model.parse(model) if isinstance(model, str) else model
        overrides.setdefault("threshold", DEFAULT_THRESHOLDS[model])
        return cls(model=model, **overrides)

    def with_model(self, model: Union[Model, str]) -> "TrustParams":
        model = Model.parse(model) if isinstance(model, str) else model
        return replace(self, model=model, threshold=DEFAULT_THRESHOLDS[model])


@dataclass(frozen=True)
class TrustVerdict:
    score: Union[int, float]
    untrusted: bool


def record_experience(ev: EvidenceRecord, outcome: Outcome) -> EvidenceRecord:
    if outcome is Outcome.POSITIVE:
        return EvidenceRecord(ev.positive + 1, ev.negative)
    return EvidenceRecord(ev.positive, ev.negative + 1)


def ebay_score(ev: EvidenceRecord) -> int:
    return ev.positive - ev.negative


def beta_expectation(ev: EvidenceRecord) -> float:
    return (ev.positive + 1) / (ev.positive + ev.negative + 2)


def sl_opinion(ev: EvidenceRecord, base_rate: float = 0.5) -> Opinion:
    """Map evidence counts to a subjective-logic opinion.

    With ``W = 2``: belief ``r/(r+s+W)``, disbelief ``s/(r+s+W)`` and
    uncertainty ``W/(r+s+W)``. Uncertainty is derived as the remainder so
    the three components always sum to one.
    """
    if not 0.0 <= base_rate <= 1.0:
        raise ValueError("base_rate must lie in [0, 1]")
    denom = ev.positive + ev.negative + SL_PRIOR_WEIGHT
    belief = ev.positive / denom
    disbelief = ev.negative / denom
    uncertainty = SL_PRIOR_WEIGHT / denom
    # guard the sum against rounding in the last ulp
    drift = belief + disbelief + uncertainty - 1.0
    if drift:
        uncertainty -= drift
    return Opinion(belief, disbelief, uncertainty, base_rate)


def sl_expectation(op: Opinion) -> float:
    return op.belief + op.base_rate * op.uncertainty


def certain_trust_expectation(ev: EvidenceRecord, max_evidence: int = 10, initial_trust: float = 0.5) -> float:
    if max_evidence < 1:
        raise ValueError("max_evidence must be >= 1")
    n = ev.total()
    average = ev.positive / n if n > 0 else initial_trust
    certainty = min(1.0, n / max_evidence)
    return certainty * average + (1.0 - certainty) * initial_trust


def model_score(ev: EvidenceRecord, params: TrustParams) -> Union[int, float]:
    model = params.model
    if model is Model.EBAY:
        return ebay_score(ev)
    if model is Model.BETA:
        return beta_expectation(ev)
    if model is Model.SUBJECTIVE_LOGIC:
        return sl_expectation(sl_opinion(ev, params.base_rate))
    return certain_trust_expectation(ev, params.max_evidence, params.initial_trust)


def is_untrusted(ev: EvidenceRecord, params: TrustParams) -> TrustVerdict:
    """Apply the model and the blacklisting threshold to ``ev``.

    Integer ebay ratings are untrusted at or below the threshold, real-valued
    scores strictly below it. Nothing is untrusted before
    ``min_experiences`` observations have been recorded.
    """
    score = model_score(ev, params)
    if ev.total() < params.min_experiences:
        return TrustVerdict(score, False)
    if params.model is Model.EBAY:
        return TrustVerdict(score, score <= params.threshold)
    return TrustVerdict(score, score < params.threshold)


def evidence_from_outcomes(outcomes: Iterable[Outcome]) -> EvidenceRecord:
    """Recount a whole outcome sequence in one pass."""
    positive = negative = 0
    for outcome in outcomes:
        if outcome is Outcome.POSITIVE:
            positive += 1
        else:
            negative += 1
    return EvidenceRecord(positive, negative)
