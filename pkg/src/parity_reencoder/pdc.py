"""Truncated down-conversion sources and multi-pair contamination of the re-encoder.

Each of the three sources emits ``sum_k chi^k |k pairs>``, where ``|k pairs>``
is the normalized k-fold product of its pair creation operator.  The Bell
sources use ``(a_H b_H + a_V b_V)/sqrt2``; the parity source uses
``A e_H 1_H + B e_V 1_V`` followed by a Hadamard on each mode.

Emission terms ``(k_ab, k_cd, k_e1)`` carry different photon numbers and are
therefore orthogonal, so each one is propagated and scored separately.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Dict, Iterator, Optional, Tuple

import numpy as np

from .circuit import CircuitConfig, OUTPUT_MODES, canonical_target, fusion_stage, resource_stage
from .density import pair_vector, projector
from .detection import GROUPS, DetectorPattern, correction_for, detection_outcomes
from .elements import apply_hwp22_5
from .encoding import LogicalQubit
from .photonic import H, V, PhotonicState, Slot, apply_creation, normalize, tensor_all

Emission = Tuple[int, int, int]


class DetectorModel(str, Enum):
    NUMBER_RESOLVING = "number_resolving"
    THRESHOLD = "threshold"


@dataclass(frozen=True)
class PdcParams:
    chi: float
    truncation_order: int = 3
    detector_model: DetectorModel = DetectorModel.NUMBER_RESOLVING

    def __post_init__(self):
        object.__setattr__(self, "detector_model", DetectorModel(self.detector_model))
        if abs(self.chi) ** 2 > 1e-2:
            raise ValueError(f"|chi|^2 = {abs(self.chi) ** 2:g} is outside the perturbative regime (<= 1e-2)")
        if self.truncation_order not in (3, 4):
            raise ValueError("truncation_order must be 3 or 4")


# ---------------------------------------------------------------------------
# source states

def k_pair_term(k: int, m1: str, m2: str, a: complex = 1 / math.sqrt(2), b: complex = 1 / math.sqrt(2)) -> PhotonicState:
    """Normalized ``(a m1_H m2_H + b m1_V m2_V)^k |vac>``."""
    s = PhotonicState.vacuum()
    for _ in range(k):
        hh = apply_creation(apply_creation(s, Slot(m1, H)), Slot(m2, H))
        vv = apply_creation(apply_creation(s, Slot(m1, V)), Slot(m2, V))
        s = a * hh + b * vv
    return normalize(s)


def pdc_state(chi: float, modes: Tuple[str, str], order: int) -> PhotonicState:
    """Truncated Bell-pair source, renormalized after truncation."""
    if order < 0:
        raise ValueError("order must be >= 0")
    m1, m2 = modes
    acc = PhotonicState.empty()
    for k in range(order + 1):
        acc = acc + chi ** k * k_pair_term(k, m1, m2)
    return normalize(acc)


def parity_source_term(k: int, q: LogicalQubit, m1: str = "e", m2: str = "1") -> PhotonicState:
    """k-pair emission of the non-maximally entangled source plus its Hadamards."""
    a = (q.alpha + q.beta) / math.sqrt(2)
    b = (q.alpha - q.beta) / math.sqrt(2)
    return apply_hwp22_5(apply_hwp22_5(k_pair_term(k, m1, m2, a, b), m1), m2)


# ---------------------------------------------------------------------------
# emission bookkeeping

def emission_terms(order: int) -> Iterator[Emission]:
    for ks in itertools.product(range(order + 1), repeat=3):
        if sum(ks) <= order:
            yield ks


def emission_weight(chi: float, ks: Emission) -> float:
    """Unnormalized probability of an emission term: |chi|^(2 * total pairs)."""
    return abs(chi) ** (2 * sum(ks))


def total_pair_distribution(chi: float, order: int) -> Dict[int, float]:
    """Probability of each total pair number across the three sources."""
    raw: Dict[int, float] = {}
    for ks in emission_terms(order):
        raw[sum(ks)] = raw.get(sum(ks), 0.0) + emission_weight(chi, ks)
    z = sum(raw.values())
    return {k: v / z for k, v in sorted(raw.items())}


def eight_to_six_ratio(chi: float) -> float:
    """P(4 pairs) / P(3 pairs), read off the order-4 emission bookkeeping."""
    d = total_pair_distribution(chi, 4)
    return d[4] / d[3]


# ---------------------------------------------------------------------------
# per-term scoring

@dataclass
class TermScore:
    emission: Emission
    weight: float
    p_fourfold: float = 0.0
    p_sixfold: float = 0.0
    sixfold_target_overlap: float = 0.0   # sum over sixfold events of <t|rho_corrected|t>

    @property
    def correct(self) -> bool:
        return self.emission == (1, 1, 1)


def _herald_pattern(p: DetectorPattern, model: DetectorModel) -> Optional[str]:
    """Polarization string if every group shows exactly one click, else None."""
    out = []
    for g in GROUPS:
        nh, nv = p.count(g, H), p.count(g, V)
        if model is DetectorModel.THRESHOLD:
            clicks = (nh > 0) + (nv > 0)
            if clicks != 1:
                return None
        elif nh + nv != 1:
            return None
        out.append(H if nh else V)
    return "".join(out)


def _output_counts(cfg) -> Tuple[int, int]:
    na = sum(n for s, n in cfg if s.mode == "a")
    nd = sum(n for s, n in cfg if s.mode == "d")
    return na, nd


def _output_ok(na: int, nd: int, model: DetectorModel) -> bool:
    if model is DetectorModel.THRESHOLD:
        return na >= 1 and nd >= 1
    return na == 1 and nd == 1


def score_term(ks: Emission, weight: float, cfg: CircuitConfig, model: DetectorModel,
               target: np.ndarray) -> TermScore:
    k_ab, k_cd, k_e1 = ks
    src = tensor_all([k_pair_term(k_ab, "a", "b"), k_pair_term(k_cd, "c", "d"), parity_source_term(k_e1, cfg.input)])
    s = fusion_stage(resource_stage(src), cfg.gate_mode)
    score = TermScore(ks, weight)
    for p, proj in detection_outcomes(s, GROUPS, GROUPS).items():
        herald = _herald_pattern(p, model)
        if herald is None:
            continue
        score.p_fourfold += proj.probability
        kept = []
        for b in proj.branches:
            sub = {c: amp for c, amp in b if _output_ok(*_output_counts(c), model)}
            if sub:
                kept.append(PhotonicState(sub))
        score.p_sixfold += sum(b.norm_squared() for b in kept)
        corr = correction_for(DetectorPattern.from_string(herald), cfg.gate_mode)
        for b in kept:
            try:
                v = corr.unitary() @ pair_vector(b, OUTPUT_MODES)
            except ValueError:
                continue  # more than one photon per output: no qubit delivered
            score.sixfold_target_overlap += float(np.real(np.conj(target) @ projector(v) @ target))
    return score


# ---------------------------------------------------------------------------
# report

@dataclass(frozen=True)
class ContaminationReport:
    chi: float
    truncation_order: int
    detector_model: str
    p_correct_sixfold: float
    p_contaminated_sixfold: float
    p_correct_fourfold: float
    p_contaminated_fourfold: float
    rejected_by_postselection: float
    contaminated_fraction_fourfold: float
    contaminated_fraction_sixfold: float
    sixfold_fidelity: float
    eight_to_six_ratio: float
    accepted_eight_to_six_ratio: Optional[float]
    pair_distribution: Dict[int, float] = field(default_factory=dict)
    parity_source_model: str = "multi-pair terms treated like the Bell sources"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pair_distribution"] = {str(k): v for k, v in self.pair_distribution.items()}
        return d


def _fraction(bad: float, good: float) -> float:
    return bad / (bad + good) if bad + good > 0 else 0.0


def contamination_analysis(p: PdcParams, cfg: CircuitConfig | None = None) -> ContaminationReport:
    cfg = cfg or CircuitConfig()
    if cfg.mismatch is not None and not cfg.mismatch.ideal:
        raise ValueError("contamination analysis assumes matched modes")
    target = canonical_target(cfg.input, cfg.gate_mode)
    terms = list(emission_terms(p.truncation_order))
    z = sum(emission_weight(p.chi, ks) for ks in terms)
    scores = [score_term(ks, emission_weight(p.chi, ks) / z, cfg, p.detector_model, target) for ks in terms]

    def total(attr, pred):
        return sum(s.weight * getattr(s, attr) for s in scores if pred(s))

    good4 = total("p_fourfold", lambda s: s.correct)
    bad4 = total("p_fourfold", lambda s: not s.correct)
    good6 = total("p_sixfold", lambda s: s.correct)
    bad6 = total("p_sixfold", lambda s: not s.correct)
    overlap = total("sixfold_target_overlap", lambda s: True)
    accepted_ratio = None
    if p.truncation_order >= 4:
        six = total("p_sixfold", lambda s: sum(s.emission) == 3)
        eight = total("p_sixfold", lambda s: sum(s.emission) == 4)
        accepted_ratio = eight / six if six else None
    return ContaminationReport(
        chi=p.chi,
        truncation_order=p.truncation_order,
        detector_model=p.detector_model.value,
        p_correct_sixfold=good6,
        p_contaminated_sixfold=bad6,
        p_correct_fourfold=good4,
        p_contaminated_fourfold=bad4,
        rejected_by_postselection=(good4 + bad4) - (good6 + bad6),
        contaminated_fraction_fourfold=_fraction(bad4, good4),
        contaminated_fraction_sixfold=_fraction(bad6, good6),
        sixfold_fidelity=overlap / (good6 + bad6) if good6 + bad6 > 0 else float("nan"),
        eight_to_six_ratio=eight_to_six_ratio(p.chi),
        accepted_eight_to_six_ratio=accepted_ratio,
        pair_distribution=total_pair_distribution(p.chi, p.truncation_order),
    )


__all__ = [
    "ContaminationReport", "DetectorModel", "PdcParams", "TermScore", "contamination_analysis",
    "eight_to_six_ratio", "emission_terms", "emission_weight", "k_pair_term", "parity_source_term",
    "pdc_state", "score_term", "total_pair_distribution",
]
