"""Detector projections, success-pattern enumeration and feed-forward corrections.

Detectors resolve photon number but not distinguishability tags, so a
detection outcome leaves the undetected modes in an incoherent ensemble with
one pure branch per tag assignment of the detected photons.
"""
from __future__ import annotations

import functools
import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

import numpy as np

from .density import PAULI, OutputDensityMatrix
from .elements import apply_pauli
from .photonic import H, V, POLARIZATIONS, Config, PhotonicState

GROUPS = ("1", "2", "3", "4")
OUTPUT_MODES = ("a", "d")


class GateMode(str, Enum):
    IDENTITY = "identity"
    Z90 = "z90"


class FlipClass(str, Enum):
    NONE = "none"
    PHASE = "phase"
    BIT = "bit"
    BOTH = "both"

    @classmethod
    def of(cls, bit: bool, phase: bool) -> "FlipClass":
        return {(False, False): cls.NONE, (False, True): cls.PHASE,
                (True, False): cls.BIT, (True, True): cls.BOTH}[(bit, phase)]

    @property
    def bit(self) -> bool:
        return self in (FlipClass.BIT, FlipClass.BOTH)

    @property
    def phase(self) -> bool:
        return self in (FlipClass.PHASE, FlipClass.BOTH)


class NotSuccessPatternError(ValueError):
    pass


def detector_id(mode: str, pol: str) -> str:
    return f"D{mode}{pol}"


@dataclass(frozen=True)
class DetectorPattern:
    """Photon counts per detector; detectors absent from ``counts`` saw nothing."""

    counts: Tuple[Tuple[str, int], ...]
    groups: Tuple[str, ...] = GROUPS

    @classmethod
    def from_counts(cls, counts: Mapping[Tuple[str, str], int], groups: Sequence[str] = GROUPS) -> "DetectorPattern":
        items = tuple(sorted((detector_id(m, p), n) for (m, p), n in counts.items() if n > 0))
        return cls(items, tuple(groups))

    @classmethod
    def from_string(cls, text: str, groups: Sequence[str] = GROUPS) -> "DetectorPattern":
        """``"HVHH"``: one photon per group, polarization listed in group order."""
        if len(text) != len(groups) or any(c not in POLARIZATIONS for c in text):
            raise ValueError(f"bad pattern string {text!r} for groups {tuple(groups)}")
        return cls.from_counts({(g, c): 1 for g, c in zip(groups, text)}, groups)

    @functools.cached_property
    def fired(self) -> Dict[str, int]:
        return dict(self.counts)

    def count(self, mode: str, pol: str) -> int:
        return self.fired.get(detector_id(mode, pol), 0)

    def group_total(self, mode: str) -> int:
        return self.count(mode, H) + self.count(mode, V)

    def is_success(self) -> bool:
        return all(self.group_total(g) == 1 for g in self.groups)

    def to_string(self) -> str:
        if not self.is_success():
            raise NotSuccessPatternError(f"not a success pattern: {self.fired}")
        return "".join(H if self.count(g, H) else V for g in self.groups)

    def v_bits(self) -> Tuple[int, ...]:
        return tuple(int(c == V) for c in self.to_string())

    def __str__(self) -> str:
        return self.to_string() if self.is_success() else (",".join(f"{k}:{n}" for k, n in self.counts) or "no clicks")


def success_patterns(groups: Sequence[str] = GROUPS) -> List[DetectorPattern]:
    """All one-photon-per-group patterns in canonical order HH..H to VV..V."""
    return [DetectorPattern.from_string("".join(p), groups) for p in itertools.product(POLARIZATIONS, repeat=len(groups))]


# ---------------------------------------------------------------------------
# projection

@dataclass(frozen=True)
class Projection:
    """Outcome probability plus the unnormalized branches left on undetected modes.

    Each branch corresponds to one tag assignment of the detected photons; the
    squared norm of a branch is its joint probability.
    """

    probability: float
    branches: Tuple[PhotonicState, ...]

    def ensemble(self) -> List[Tuple[float, PhotonicState]]:
        """(conditional weight, normalized state) pairs."""
        if self.probability == 0:
            return []
        return [(b.norm_squared() / self.probability, b * (1 / b.norm())) for b in self.branches]

    def rho(self, modes: Sequence[str] = OUTPUT_MODES) -> OutputDensityMatrix:
        return OutputDensityMatrix.from_branches(self.branches, modes)


def _split(cfg: Config, detected: set) -> Tuple[Config, Config]:
    det = tuple((s, n) for s, n in cfg if s.mode in detected)
    rest = tuple((s, n) for s, n in cfg if s.mode not in detected)
    return det, rest


def _signature(det: Config) -> Dict[Tuple[str, str], int]:
    sig: Dict[Tuple[str, str], int] = defaultdict(int)
    for s, n in det:
        sig[(s.mode, s.pol)] += n
    return sig


def detection_outcomes(s: PhotonicState, detected_modes: Iterable[str],
                       groups: Sequence[str] | None = None) -> Dict[DetectorPattern, Projection]:
    """Every detector outcome on ``detected_modes`` with its projection."""
    detected = set(detected_modes)
    groups = tuple(groups) if groups is not None else tuple(sorted(detected))
    by_sig: Dict[Tuple, Dict[Config, Dict[Config, complex]]] = {}
    for cfg, amp in s:
        det = []
        rest = []
        for item in cfg:
            (det if item[0].mode in detected else rest).append(item)
        det = tuple(det)
        sig = tuple(sorted(_signature(det).items()))
        by_sig.setdefault(sig, {}).setdefault(det, {})[tuple(rest)] = amp
    out = {}
    for sig, branches in by_sig.items():
        pattern = DetectorPattern.from_counts(dict(sig), groups)
        states = tuple(PhotonicState(b) for _, b in sorted(branches.items(), key=lambda kv: kv[0]))
        out[pattern] = Projection(sum(b.norm_squared() for b in states), states)
    return out


def project_pattern(s: PhotonicState, p: DetectorPattern, detected_modes: Iterable[str]) -> Projection:
    detected = set(detected_modes)
    missing = detected - set(p.groups)
    if missing:
        raise ValueError(f"detected modes {sorted(missing)} not covered by the pattern's detector groups")
    target = p.fired
    branches: Dict[Config, Dict[Config, complex]] = defaultdict(dict)
    for cfg, amp in s:
        det, rest = _split(cfg, detected)
        sig = {detector_id(m, q): n for (m, q), n in _signature(det).items()}
        if sig == target:
            branches[det][rest] = amp
    states = tuple(PhotonicState(b) for _, b in sorted(branches.items(), key=lambda kv: kv[0]))
    return Projection(sum(b.norm_squared() for b in states), states)


# ---------------------------------------------------------------------------
# corrections

# Detector lists for the Z90 variant; the identity parity rule does not apply.
Z90_TABLE: Dict[str, FlipClass] = {}
for _cls, _pats in (
    (FlipClass.NONE, ("HHHH", "HVVH", "VVHV", "VHVV")),
    (FlipClass.PHASE, ("VHHV", "VVVV", "HVHH", "HHVH")),
    (FlipClass.BIT, ("HHHV", "HVVV", "VVHH", "VHVH")),
    (FlipClass.BOTH, ("VHHH", "VVVH", "HVHV", "HHVV")),
):
    for _p in _pats:
        Z90_TABLE[_p] = _cls


@dataclass(frozen=True)
class CorrectionOp:
    """Paulis applied in order; bit flips go on mode d."""

    ops: Tuple[Tuple[str, str], ...] = ()

    @classmethod
    def for_class(cls, flip: FlipClass, bit_mode: str = "d") -> "CorrectionOp":
        ops: List[Tuple[str, str]] = []
        if flip.bit:
            ops.append((bit_mode, "X"))
        if flip.phase:
            ops += [("a", "Z"), ("d", "Z")]
        return cls(tuple(ops))

    def apply(self, s: PhotonicState) -> PhotonicState:
        for mode, pauli in self.ops:
            s = apply_pauli(s, mode, pauli)
        return s

    def unitary(self, modes: Sequence[str] = OUTPUT_MODES) -> np.ndarray:
        return _unitary(self.ops, tuple(modes)).copy()

    def __str__(self) -> str:
        return " ".join(f"{p}_{m}" for m, p in self.ops) or "I"


@functools.lru_cache(maxsize=None)
def _unitary(ops, modes) -> np.ndarray:
    u = np.eye(4, dtype=complex)
    for mode, pauli in ops:
        local = [PAULI["I"], PAULI["I"]]
        local[list(modes).index(mode)] = PAULI[pauli]
        u = np.kron(*local) @ u
    return u


def flip_class_for(p: DetectorPattern, gate_mode: GateMode | str = GateMode.IDENTITY) -> FlipClass:
    if not p.is_success():
        raise NotSuccessPatternError(f"no correction for a failed pattern: {p}")
    gate_mode = GateMode(gate_mode)
    if gate_mode is GateMode.Z90:
        return Z90_TABLE[p.to_string()]
    v1, v2, v3, v4 = p.v_bits()
    return FlipClass.of(bool(v1 ^ v4), bool(v2 ^ v3))


def correction_for(p: DetectorPattern, gate_mode: GateMode | str = GateMode.IDENTITY) -> CorrectionOp:
    return CorrectionOp.for_class(flip_class_for(p, gate_mode))


@dataclass(frozen=True, eq=False)
class ConditionalOutcome:
    pattern: DetectorPattern
    probability: float
    projection: Projection
    correction: CorrectionOp
    flip_class: FlipClass
    rho: OutputDensityMatrix = field(repr=False)

    @property
    def corrected_rho(self) -> OutputDensityMatrix:
        return self.rho.conjugated(self.correction.unitary())

    def corrected_branches(self) -> List[PhotonicState]:
        return [self.correction.apply(b) for b in self.projection.branches]


def enumerate_success_patterns(s: PhotonicState, detection_groups: Sequence[str] = GROUPS,
                               gate_mode: GateMode | str = GateMode.IDENTITY,
                               output_modes: Sequence[str] = OUTPUT_MODES) -> List[ConditionalOutcome]:
    outcomes = detection_outcomes(s, detection_groups, detection_groups)
    result = []
    for p in success_patterns(detection_groups):
        proj = outcomes.get(p, Projection(0.0, ()))
        flip = flip_class_for(p, gate_mode)
        result.append(ConditionalOutcome(
            pattern=p,
            probability=proj.probability,
            projection=proj,
            correction=CorrectionOp.for_class(flip),
            flip_class=flip,
            rho=proj.rho(output_modes) if proj.branches else OutputDensityMatrix.zeros(),
        ))
    return result


def failure_breakdown(s: PhotonicState, detection_groups: Sequence[str] = GROUPS) -> Dict[Tuple[int, ...], float]:
    """Probability of every non-success event keyed by photon count per group."""
    out: Dict[Tuple[int, ...], float] = defaultdict(float)
    for p, proj in detection_outcomes(s, detection_groups, detection_groups).items():
        if not p.is_success():
            out[tuple(p.group_total(g) for g in detection_groups)] += proj.probability
    return dict(sorted(out.items()))
