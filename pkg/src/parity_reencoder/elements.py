"""Linear optical elements acting on :class:`PhotonicState`.

All elements are tag-preserving substitutions of creation operators.  The PBS
carries no reflection phase and the quarter-wave plate is ``diag(1, i)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .photonic import H, V, PhotonicState, Slot, apply_slot_map

INV_SQRT2 = 1.0 / math.sqrt(2.0)


class ElementError(ValueError):
    pass


def apply_pbs(s: PhotonicState, in1: str, in2: str, out1: str, out2: str,
              reflection_phase: complex = 1.0) -> PhotonicState:
    """Polarizing beam splitter: H transmits (in1->out1, in2->out2), V reflects.

    ``reflection_phase`` exists for fault-injection tests only.
    """
    if in1 == in2 or out1 == out2:
        raise ElementError("PBS ports must be distinct")
    occupied = s.modes() - {in1, in2}
    clash = occupied & {out1, out2}
    if clash:
        raise ElementError(f"PBS output modes already occupied: {sorted(clash)}")
    route = {(in1, H): (out1, 1.0), (in2, H): (out2, 1.0),
             (in1, V): (out2, reflection_phase), (in2, V): (out1, reflection_phase)}

    def rule(slot: Slot):
        hit = route.get((slot.mode, slot.pol))
        if hit is None:
            return None
        mode, k = hit
        return [(Slot(mode, slot.pol, slot.tag), k)]

    return apply_slot_map(s, rule)


def _single_mode(s: PhotonicState, mode: str, h_image, v_image) -> PhotonicState:
    def rule(slot: Slot):
        if slot.mode != mode:
            return None
        image = h_image if slot.pol == H else v_image
        return [(Slot(mode, p, slot.tag), k) for p, k in image]

    return apply_slot_map(s, rule)


def apply_hwp22_5(s: PhotonicState, mode: str) -> PhotonicState:
    """Half-wave plate at 22.5 degrees: the Hadamard on polarization."""
    return _single_mode(s, mode, [(H, INV_SQRT2), (V, INV_SQRT2)], [(H, INV_SQRT2), (V, -INV_SQRT2)])


def apply_qwp0(s: PhotonicState, mode: str, v_phase: complex = 1j) -> PhotonicState:
    """Quarter-wave plate at 0 degrees, ``H -> H``, ``V -> i V``."""
    return _single_mode(s, mode, [(H, 1.0)], [(V, v_phase)])


def apply_pauli(s: PhotonicState, mode: str, which: str) -> PhotonicState:
    if which == "X":
        return _single_mode(s, mode, [(V, 1.0)], [(H, 1.0)])
    if which == "Z":
        return _single_mode(s, mode, [(H, 1.0)], [(V, -1.0)])
    if which == "I":
        return s
    raise ElementError(f"unknown Pauli {which!r}")


def apply_rotation_x(s: PhotonicState, mode: str, theta: float) -> PhotonicState:
    """X_theta = cos(theta/2) I - i sin(theta/2) sigma_x on one photon."""
    c, sn = math.cos(theta / 2), -1j * math.sin(theta / 2)
    return _single_mode(s, mode, [(H, c), (V, sn)], [(V, c), (H, sn)])


@dataclass(frozen=True)
class Element:
    kind: str
    modes: tuple

    def apply(self, s: PhotonicState) -> PhotonicState:
        if self.kind == "PBS":
            return apply_pbs(s, *self.modes)
        if self.kind == "HWP22_5":
            return apply_hwp22_5(s, self.modes[0])
        if self.kind == "QWP0":
            return apply_qwp0(s, self.modes[0])
        if self.kind in ("PauliX", "PauliZ"):
            return apply_pauli(s, self.modes[0], self.kind[-1])
        raise ElementError(f"unknown element {self.kind!r}")


def run_elements(s: PhotonicState, elements: Sequence[Element]) -> PhotonicState:
    for el in elements:
        s = el.apply(s)
    return s
