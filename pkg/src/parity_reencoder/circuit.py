"""The two-photon parity-state re-encoder.

Beam layout::

    Bell pair a-b, Bell pair c-d, encoded input e-1

    H(b), H(c) -> PBS1(c, b -> 4, 2') -> H(4), H(2')          type-I fusion
    [QWP(e)] -> PBS2(2', e -> 2, 3) -> H(2), H(3)             type-II fusion
    detectors on 1, 2, 3, 4 (H/V); output photons in a and d

PBS1 transmits the H photon of c into 4 and reflects the V photon of b into 4.
Both port orientations give the same ideal-case amplitudes; this one also
reproduces the mode-mismatch branch evolutions, where only the b photon is
mismatched.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from .density import OutputDensityMatrix, encoded_vector
from .detection import (
    GROUPS, ConditionalOutcome, DetectorPattern, FlipClass, GateMode, Projection,
    detection_outcomes, enumerate_success_patterns,
)
from .elements import apply_hwp22_5, apply_pbs, apply_qwp0
from .encoding import LogicalQubit, bell_phi_plus, parity_state
from .photonic import PhotonicState, Tag, tensor_all

PBS1 = ("c", "b", "4", "2'")
PBS2 = ("2'", "e", "2", "3")
OUTPUT_MODES = ("a", "d")
INPUT_MODES = ("e", "1")
RESOURCE_MODES = ("a", "d", "2'")

PLUS_L = LogicalQubit(1 / math.sqrt(2), 1 / math.sqrt(2))


@dataclass(frozen=True)
class MismatchParams:
    eta1: float = 1.0
    eta2: float = 1.0

    def __post_init__(self):
        for name in ("eta1", "eta2"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")

    @property
    def ideal(self) -> bool:
        return self.eta1 == 1.0 and self.eta2 == 1.0


@dataclass(frozen=True)
class CircuitConfig:
    gate_mode: GateMode = GateMode.IDENTITY
    input: LogicalQubit = PLUS_L
    mismatch: Optional[MismatchParams] = None
    apply_corrections: bool = True

    def __post_init__(self):
        object.__setattr__(self, "gate_mode", GateMode(self.gate_mode))


class ModeLog(list):
    """Records ``(stage, element, modes)`` for every element applied."""

    def touched(self) -> set:
        return {m for _, _, modes in self for m in modes}


def _log(log, stage, element, modes):
    if log is not None:
        log.append((stage, element, tuple(modes)))


# ---------------------------------------------------------------------------
# sources

def bell_pairs(mismatch: MismatchParams | None = None) -> PhotonicState:
    """Phi+_ab Phi+_cd, with the b photon partially mismatched (tag PRIME)."""
    eta1 = 1.0 if mismatch is None else mismatch.eta1
    ab = bell_phi_plus("a", "b")
    if eta1 < 1.0:
        ab = math.sqrt(eta1) * ab + math.sqrt(1 - eta1) * bell_phi_plus("a", "b", {"b": Tag.PRIME})
    return tensor_all([ab, bell_phi_plus("c", "d")])


def encoded_input(q: LogicalQubit, mismatch: MismatchParams | None = None) -> PhotonicState:
    """Parity-encoded input on e, 1, with the e photon mismatched by DOUBLE_PRIME."""
    eta2 = 1.0 if mismatch is None else mismatch.eta2
    s = parity_state(q, 2, list(INPUT_MODES))
    if eta2 < 1.0:
        s = math.sqrt(eta2) * s + math.sqrt(1 - eta2) * parity_state(q, 2, list(INPUT_MODES), {"e": Tag.DOUBLE_PRIME})
    return s


def build_input_state(cfg: CircuitConfig) -> PhotonicState:
    return tensor_all([bell_pairs(cfg.mismatch), encoded_input(cfg.input, cfg.mismatch)])


# ---------------------------------------------------------------------------
# stages

def resource_stage(s: PhotonicState, log: list | None = None, pbs=apply_pbs) -> PhotonicState:
    """Hadamards and PBS1 acting on the two Bell pairs."""
    for m in ("b", "c"):
        _log(log, "type1", "HWP22_5", [m])
        s = apply_hwp22_5(s, m)
    _log(log, "type1", "PBS", PBS1)
    s = pbs(s, *PBS1)
    for m in ("4", "2'"):
        _log(log, "type1", "HWP22_5", [m])
        s = apply_hwp22_5(s, m)
    return s


def fusion_stage(s: PhotonicState, gate_mode: GateMode | str = GateMode.IDENTITY,
                 log: list | None = None, qwp=apply_qwp0, pbs=apply_pbs) -> PhotonicState:
    """Optional QWP on e, then PBS2 and the diagonal-basis Hadamards on 2, 3."""
    if GateMode(gate_mode) is GateMode.Z90:
        _log(log, "type2", "QWP0", ["e"])
        s = qwp(s, "e")
    _log(log, "type2", "PBS", PBS2)
    s = pbs(s, *PBS2)
    for m in ("2", "3"):
        _log(log, "type2", "HWP22_5", [m])
        s = apply_hwp22_5(s, m)
    return s


def predetection_state(cfg: CircuitConfig, log: list | None = None, qwp=apply_qwp0, pbs=apply_pbs) -> PhotonicState:
    mm = cfg.mismatch
    if log is not None or mm is None or mm.ideal or qwp is not apply_qwp0 or pbs is not apply_pbs:
        s = build_input_state(cfg)
        return fusion_stage(resource_stage(s, log, pbs), cfg.gate_mode, log, qwp, pbs)
    # The optics are linear, so the four tag combinations can be evolved once and reweighted.
    parts = _tagged_components(complex(cfg.input.alpha), complex(cfg.input.beta), cfg.gate_mode)
    w1 = (math.sqrt(mm.eta1), math.sqrt(1 - mm.eta1))
    w2 = (math.sqrt(mm.eta2), math.sqrt(1 - mm.eta2))
    acc: Dict = {}
    for (i, j), part in parts.items():
        w = w1[i] * w2[j]
        if w:
            for cfg, amp in part:
                acc[cfg] = acc.get(cfg, 0j) + w * amp
    return PhotonicState(acc)


@functools.lru_cache(maxsize=64)
def _tagged_components(alpha: complex, beta: complex, gate_mode: GateMode) -> Dict:
    q = LogicalQubit(alpha, beta)
    ab = (bell_phi_plus("a", "b"), bell_phi_plus("a", "b", {"b": Tag.PRIME}))
    inputs = (parity_state(q, 2, list(INPUT_MODES)), parity_state(q, 2, list(INPUT_MODES), {"e": Tag.DOUBLE_PRIME}))
    cd = bell_phi_plus("c", "d")
    return {(i, j): fusion_stage(resource_stage(tensor_all([ab[i], cd, inputs[j]])), gate_mode)
            for i in range(2) for j in range(2)}


@dataclass(frozen=True)
class Type1Result:
    outcomes: Dict[str, Projection]
    failure_probability: float

    def probability(self, pol: str) -> float:
        return self.outcomes[pol].probability


def type1_fusion_stage(s: PhotonicState) -> Type1Result:
    """Condition the PBS1 output on exactly one photon at group 4."""
    outcomes = detection_outcomes(s, ["4"], ["4"])
    success = {}
    failure = 0.0
    for p, proj in outcomes.items():
        if p.is_success():
            success[p.to_string()] = proj
        else:
            failure += proj.probability
    for pol in ("H", "V"):
        success.setdefault(pol, Projection(0.0, ()))
    return Type1Result(success, failure)


# ---------------------------------------------------------------------------
# full run

def logical_z90_reference(q: LogicalQubit) -> LogicalQubit:
    """exp(-i pi sigma_z / 4) up to global phase: (alpha, i beta)."""
    return LogicalQubit(q.alpha, 1j * q.beta)


def canonical_target(q: LogicalQubit, gate_mode: GateMode | str = GateMode.IDENTITY) -> np.ndarray:
    if GateMode(gate_mode) is GateMode.Z90:
        q = logical_z90_reference(q)
    return encoded_vector(q.alpha, q.beta)


def target_state(q: LogicalQubit, gate_mode: GateMode | str = GateMode.IDENTITY) -> PhotonicState:
    if GateMode(gate_mode) is GateMode.Z90:
        q = logical_z90_reference(q)
    return parity_state(q, 2, list(OUTPUT_MODES))


@dataclass(eq=False)
class ReencoderResult:
    config: CircuitConfig
    outcomes: List[ConditionalOutcome]
    failure_probability: float
    corrected_output: OutputDensityMatrix
    target: np.ndarray = field(repr=False)

    @property
    def per_class_probability(self) -> Dict[FlipClass, float]:
        out = {c: 0.0 for c in FlipClass}
        for o in self.outcomes:
            out[o.flip_class] += o.probability
        return out

    @property
    def total_success_probability(self) -> float:
        return sum(o.probability for o in self.outcomes)

    def outcome(self, pattern: str) -> ConditionalOutcome:
        for o in self.outcomes:
            if o.pattern.to_string() == pattern:
                return o
        raise KeyError(pattern)

    def pattern_fidelity(self, o: ConditionalOutcome) -> float:
        if o.probability == 0:
            return float("nan")
        rho = o.corrected_rho if self.config.apply_corrections else o.rho
        return rho.fidelity(self.target)

    def to_dict(self) -> dict:
        cfg = self.config
        return {
            "gate_mode": cfg.gate_mode.value,
            "input": {"alpha": [cfg.input.alpha.real, cfg.input.alpha.imag],
                      "beta": [cfg.input.beta.real, cfg.input.beta.imag]},
            "mismatch": None if cfg.mismatch is None else {"eta1": cfg.mismatch.eta1, "eta2": cfg.mismatch.eta2},
            "apply_corrections": cfg.apply_corrections,
            "patterns": [
                {
                    "pattern": o.pattern.to_string(),
                    "probability": o.probability,
                    "flip_class": o.flip_class.value,
                    "correction": str(o.correction),
                    "fidelity": self.pattern_fidelity(o),
                }
                for o in self.outcomes
            ],
            "class_probability": {c.value: p for c, p in self.per_class_probability.items()},
            "total_success_probability": self.total_success_probability,
            "failure_probability": self.failure_probability,
            "output_fidelity": self.corrected_output.fidelity(self.target) if self.total_success_probability else None,
        }


def run(cfg: CircuitConfig, log: list | None = None, qwp=apply_qwp0, pbs=apply_pbs) -> ReencoderResult:
    """Simulate, detect and correct; ``qwp`` and ``pbs`` exist for fault injection."""
    s = predetection_state(cfg, log, qwp, pbs)
    outcomes = enumerate_success_patterns(s, GROUPS, cfg.gate_mode, OUTPUT_MODES)
    total = sum(o.probability for o in outcomes)
    acc = OutputDensityMatrix.zeros()
    for o in outcomes:
        acc = acc + (o.corrected_rho if cfg.apply_corrections else o.rho)
    return ReencoderResult(
        config=cfg,
        outcomes=outcomes,
        failure_probability=s.norm_squared() - total,
        corrected_output=acc,
        target=canonical_target(cfg.input, cfg.gate_mode),
    )


def conditional_state(cfg: CircuitConfig, pattern: str) -> PhotonicState:
    """Pure a, d state for a pattern; valid only without mismatch."""
    o = run(cfg).outcome(pattern)
    if len(o.projection.branches) != 1:
        raise ValueError("conditional state is mixed; use the density matrix")
    return o.projection.branches[0]


def pattern_probabilities(cfg: CircuitConfig) -> Dict[str, float]:
    return {o.pattern.to_string(): o.probability for o in run(cfg).outcomes}


__all__ = [
    "CircuitConfig", "DetectorPattern", "MismatchParams", "ModeLog", "ReencoderResult", "Type1Result",
    "bell_pairs", "build_input_state", "canonical_target", "conditional_state", "encoded_input",
    "fusion_stage", "logical_z90_reference", "predetection_state", "resource_stage", "run",
    "target_state", "type1_fusion_stage",
]
