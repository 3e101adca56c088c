"""Printed amplitude tables used as regression references."""
from __future__ import annotations

import math
from typing import Dict, List, Tuple

from .encoding import LogicalQubit
from .photonic import H, V, Config, PhotonicState, Slot, make_config

# PBS1 stage: detector-4 polarization -> (a, d, 2') polarizations, each with amplitude +1/4.
PBS1_EXPANSION: Dict[str, List[str]] = {
    H: ["HHH", "HVV", "VVH", "VHV"],
    V: ["VHH", "HVH", "HHV", "VVV"],
}
PBS1_AMPLITUDE = 0.25

# Full circuit: four groups of (pattern 1234, sign) sharing one output form on (a, d).
# Output form: list of (ad polarizations, coefficient name, sign); "alpha" or "beta".
FUSION_GROUPS: List[Tuple[List[Tuple[str, int]], List[Tuple[str, str, int]]]] = [
    ([("HHHH", 1), ("HVVH", 1), ("VHHV", 1), ("VVVV", 1)],
     [("HH", "alpha", 1), ("VV", "alpha", 1), ("HV", "beta", 1), ("VH", "beta", 1)]),
    ([("HVHH", 1), ("HHVH", 1), ("VVHV", -1), ("VHVV", -1)],
     [("HH", "alpha", 1), ("VV", "alpha", 1), ("HV", "beta", -1), ("VH", "beta", -1)]),
    ([("VHHH", 1), ("VVVH", 1), ("HHHV", 1), ("HVVV", 1)],
     [("HV", "alpha", 1), ("VH", "alpha", 1), ("HH", "beta", 1), ("VV", "beta", 1)]),
    ([("HVHV", 1), ("HHVV", 1), ("VVHH", -1), ("VHVH", -1)],
     [("HV", "alpha", 1), ("VH", "alpha", 1), ("HH", "beta", -1), ("VV", "beta", -1)]),
]
FUSION_AMPLITUDE = 1 / (8 * math.sqrt(2))


def pbs1_reference() -> Dict[Config, complex]:
    out = {}
    for p4, rows in PBS1_EXPANSION.items():
        for pa, pd, p2 in rows:
            cfg = make_config([Slot("4", p4), Slot("a", pa), Slot("d", pd), Slot("2'", p2)])
            out[cfg] = PBS1_AMPLITUDE
    return out


def fusion_reference(q: LogicalQubit) -> Dict[Config, complex]:
    """All 64 success amplitudes on modes 1-4, a, d."""
    coeff = {"alpha": q.alpha, "beta": q.beta}
    out = {}
    for patterns, form in FUSION_GROUPS:
        for pat, sg in patterns:
            for ad, name, s2 in form:
                slots = [Slot(m, p) for m, p in zip("1234", pat)] + [Slot("a", ad[0]), Slot("d", ad[1])]
                out[make_config(slots)] = sg * s2 * coeff[name] * FUSION_AMPLITUDE
    return out


def fusion_group_of(pattern: str) -> int:
    for i, (patterns, _) in enumerate(FUSION_GROUPS):
        if pattern in (p for p, _ in patterns):
            return i
    raise KeyError(pattern)


def z90_input_reference(q: LogicalQubit) -> PhotonicState:
    """Encoded (e, 1) pair after the quarter-wave plate on e."""
    r = 1 / math.sqrt(2)
    kets = [
        (q.alpha * r, [Slot("e", H), Slot("1", H)]),
        (1j * q.alpha * r, [Slot("e", V), Slot("1", V)]),
        (q.beta * r, [Slot("e", H), Slot("1", V)]),
        (1j * q.beta * r, [Slot("e", V), Slot("1", H)]),
    ]
    return PhotonicState.from_kets(kets)
