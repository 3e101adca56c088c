"""Mode-mismatch model: closed-form output state, success probability and fidelity.

Two overlaps parametrize the imperfection: ``eta1`` at PBS1 and ``eta2`` at
PBS2.  The closed forms below are checked against the tagged amplitude
simulation in :func:`simulate_rho`.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional

import numpy as np

from .circuit import CircuitConfig, MismatchParams, run
from .density import MINUS_MINUS, ONE2, PLUS_PLUS, ZERO2, OutputDensityMatrix, projector
from .detection import DetectorPattern, FlipClass, GateMode, Z90_TABLE, flip_class_for
from .encoding import LogicalQubit


class SignVariant(str, Enum):
    PLUS = "plus"     # no correction, or bit flip only
    MINUS = "minus"   # phase flip, with or without bit flip

    @property
    def sign(self) -> int:
        return 1 if self is SignVariant.PLUS else -1

    @classmethod
    def for_class(cls, flip: FlipClass) -> "SignVariant":
        return cls.MINUS if flip.phase else cls.PLUS


def _overlap_term(q: LogicalQubit, gate_mode: GateMode | str) -> float:
    """Re(alpha beta*) for the identity gate, Im(alpha beta*) for Z90."""
    z = q.alpha * q.beta.conjugate()
    return z.imag if GateMode(gate_mode) is GateMode.Z90 else z.real


def closed_form_rho(q: LogicalQubit, mm: MismatchParams, variant: SignVariant | str,
                    gate_mode: GateMode | str = GateMode.IDENTITY) -> OutputDensityMatrix:
    variant = SignVariant(variant)
    gate_mode = GateMode(gate_mode)
    e1, e2, sg = mm.eta1, mm.eta2, variant.sign
    r = _overlap_term(q, gate_mode)
    beta_t = 1j * q.beta if gate_mode is GateMode.Z90 else q.beta
    target = q.alpha * ZERO2 + beta_t * ONE2
    same, other = (PLUS_PLUS, MINUS_MINUS) if sg > 0 else (MINUS_MINUS, PLUS_PLUS)
    rho = (e1 * e2 / 64 * projector(target)
           + (1 - e1) / 128 * projector(same)
           + (1 - e1) / 128 * (1 - sg * 2 * r * e2) * projector(other)
           + e1 * (1 - e2) / 64 * (abs(q.alpha) ** 2 * projector(ZERO2) + abs(q.beta) ** 2 * projector(ONE2)))
    return OutputDensityMatrix(rho.astype(complex))


def _probability(r, e1, e2, sg):
    return (1 - sg * (1 - e1) * e2 * r) / 64


def _numerator(ab2, r, e1, e2, sg):
    return (1 + e1 - 4 * e1 * (1 - e2) * ab2 - sg * (1 - e1) * e2 * r * (1 - sg * 2 * r)) / 128


def closed_form_probability(q: LogicalQubit, mm: MismatchParams, variant: SignVariant | str,
                            gate_mode: GateMode | str = GateMode.IDENTITY) -> float:
    return _probability(_overlap_term(q, gate_mode), mm.eta1, mm.eta2, SignVariant(variant).sign)


def closed_form_fidelity(q: LogicalQubit, mm: MismatchParams, variant: SignVariant | str,
                         gate_mode: GateMode | str = GateMode.IDENTITY) -> float:
    sg = SignVariant(variant).sign
    r = _overlap_term(q, gate_mode)
    p = _probability(r, mm.eta1, mm.eta2, sg)
    assert p > 0, "success probability vanished"
    return _numerator(abs(q.alpha * q.beta) ** 2, r, mm.eta1, mm.eta2, sg) / p


@dataclass(frozen=True)
class QuadratureSpec:
    """Gauss-Legendre nodes in cos(theta) times a uniform grid in phi."""

    n_theta: int = 64
    n_phi: int = 128

    MIN_THETA = 8
    MIN_PHI = 8

    def __post_init__(self):
        if self.n_theta < self.MIN_THETA or self.n_phi < self.MIN_PHI:
            raise ValueError(f"quadrature too coarse: {self.n_theta} x {self.n_phi}")


def average_fidelity(mm: MismatchParams, gate_mode: GateMode | str = GateMode.IDENTITY,
                     quadrature: QuadratureSpec = QuadratureSpec(),
                     variant: SignVariant | str = SignVariant.PLUS) -> float:
    """Fidelity averaged over the Bloch sphere with the uniform measure."""
    sg = SignVariant(variant).sign
    x, w = np.polynomial.legendre.leggauss(quadrature.n_theta)
    theta = np.arccos(x)[:, None]
    phi = (2 * np.pi * np.arange(quadrature.n_phi) / quadrature.n_phi)[None, :]
    alpha = np.cos(theta / 2)
    beta = np.exp(1j * phi) * np.sin(theta / 2)
    z = alpha * np.conj(beta)
    r = z.imag if GateMode(gate_mode) is GateMode.Z90 else z.real
    ab2 = np.abs(alpha * beta) ** 2
    f = _numerator(ab2, r, mm.eta1, mm.eta2, sg) / _probability(r, mm.eta1, mm.eta2, sg)
    integral = float(w @ f.sum(axis=1)) * (2 * np.pi / quadrature.n_phi)
    return integral / (4 * np.pi)


def average_probability(mm: MismatchParams, variant: SignVariant | str,
                        gate_mode: GateMode | str = GateMode.IDENTITY,
                        quadrature: QuadratureSpec = QuadratureSpec()) -> float:
    sg = SignVariant(variant).sign
    x, w = np.polynomial.legendre.leggauss(quadrature.n_theta)
    theta = np.arccos(x)[:, None]
    phi = (2 * np.pi * np.arange(quadrature.n_phi) / quadrature.n_phi)[None, :]
    z = np.cos(theta / 2) * np.conj(np.exp(1j * phi) * np.sin(theta / 2))
    r = z.imag if GateMode(gate_mode) is GateMode.Z90 else z.real
    p = _probability(r, mm.eta1, mm.eta2, sg)
    return float(w @ p.sum(axis=1)) * (2 * np.pi / quadrature.n_phi) / (4 * np.pi)


# ---------------------------------------------------------------------------
# simulation side

_REPRESENTATIVE = {
    (GateMode.IDENTITY, SignVariant.PLUS): "HHHH",
    (GateMode.IDENTITY, SignVariant.MINUS): "HVHH",
    (GateMode.Z90, SignVariant.PLUS): "HHHH",
    (GateMode.Z90, SignVariant.MINUS): "HVHH",
}


def representative_pattern(variant: SignVariant | str, gate_mode: GateMode | str) -> str:
    return _REPRESENTATIVE[(GateMode(gate_mode), SignVariant(variant))]


def simulate_all_patterns(q: LogicalQubit, mm: MismatchParams,
                          gate_mode: GateMode | str = GateMode.IDENTITY) -> Dict[str, OutputDensityMatrix]:
    """Corrected output density matrix for each of the 16 patterns."""
    result = run(CircuitConfig(gate_mode=gate_mode, input=q, mismatch=mm))
    return {o.pattern.to_string(): o.corrected_rho for o in result.outcomes}


def simulate_rho(q: LogicalQubit, mm: MismatchParams, variant: SignVariant | str,
                 gate_mode: GateMode | str = GateMode.IDENTITY,
                 pattern: Optional[str] = None) -> OutputDensityMatrix:
    """Tagged simulation of one pattern, corrected by its lookup-table entry.

    ``pattern`` defaults to a representative of the variant's correction class;
    a pattern from the other class is rejected.
    """
    variant = SignVariant(variant)
    gate_mode = GateMode(gate_mode)
    pattern = pattern or representative_pattern(variant, gate_mode)
    flip = flip_class_for(DetectorPattern.from_string(pattern), gate_mode)
    if SignVariant.for_class(flip) is not variant:
        raise ValueError(f"pattern {pattern} belongs to the {SignVariant.for_class(flip).value} variant")
    return simulate_all_patterns(q, mm, gate_mode)[pattern]


__all__ = [
    "MismatchParams", "OutputDensityMatrix", "QuadratureSpec", "SignVariant", "Z90_TABLE",
    "average_fidelity", "average_probability", "closed_form_fidelity", "closed_form_probability",
    "closed_form_rho", "representative_pattern", "simulate_all_patterns", "simulate_rho",
]
