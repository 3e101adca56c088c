"""Two-photon polarization density matrices on the output modes a, d."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .photonic import H, V, PhotonicState, Slot, Tag, make_config

BASIS = ("HH", "HV", "VH", "VV")
_INDEX = {(p, q): i for i, (p, q) in enumerate(BASIS)}

SQRT1_2 = 1 / np.sqrt(2)
ZERO2 = np.array([1, 0, 0, 1]) * SQRT1_2      # |0>^(2)
ONE2 = np.array([0, 1, 1, 0]) * SQRT1_2       # |1>^(2)
PLUS = np.array([1, 1]) * SQRT1_2
MINUS = np.array([1, -1]) * SQRT1_2
PLUS_PLUS = np.kron(PLUS, PLUS)
MINUS_MINUS = np.kron(MINUS, MINUS)

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def projector(v: np.ndarray) -> np.ndarray:
    return np.outer(v, np.conj(v))


def encoded_vector(alpha: complex, beta: complex) -> np.ndarray:
    return alpha * ZERO2 + beta * ONE2


def pair_vector(s: PhotonicState, modes: Sequence[str] = ("a", "d")) -> np.ndarray:
    """Amplitude vector of ``s`` on the {HH, HV, VH, VV} basis of two modes.

    Every configuration must hold exactly one untagged photon in each mode and
    nothing else.
    """
    m1, m2 = modes
    vec = np.zeros(4, dtype=complex)
    for cfg, amp in s:
        pols = {}
        for slot, n in cfg:
            if slot.mode not in modes or n != 1 or slot.mode in pols or slot.tag != Tag.MATCHED:
                raise ValueError(f"configuration outside the two-photon space of {modes}: {cfg}")
            pols[slot.mode] = slot.pol
        if set(pols) != {m1, m2}:
            raise ValueError(f"configuration outside the two-photon space of {modes}: {cfg}")
        vec[_INDEX[(pols[m1], pols[m2])]] += amp
    return vec


def vector_to_state(vec: np.ndarray, modes: Sequence[str] = ("a", "d")) -> PhotonicState:
    m1, m2 = modes
    return PhotonicState({make_config([Slot(m1, p), Slot(m2, q)]): vec[i] for i, (p, q) in enumerate(BASIS)})


@dataclass(frozen=True, eq=False)
class OutputDensityMatrix:
    """Unnormalized 4x4 density matrix; its trace is the event probability."""

    matrix: np.ndarray

    @classmethod
    def from_branches(cls, branches: Iterable[PhotonicState], modes: Sequence[str] = ("a", "d")) -> "OutputDensityMatrix":
        rho = np.zeros((4, 4), dtype=complex)
        for b in branches:
            rho += projector(pair_vector(b, modes))
        return cls(rho)

    @classmethod
    def zeros(cls) -> "OutputDensityMatrix":
        return cls(np.zeros((4, 4), dtype=complex))

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def normalized(self) -> np.ndarray:
        return self.matrix / self.trace

    def fidelity(self, target: np.ndarray) -> float:
        """<t|rho|t> / tr(rho) for a unit target vector."""
        return float(np.real(np.conj(target) @ self.matrix @ target) / self.trace)

    def conjugated(self, unitary: np.ndarray) -> "OutputDensityMatrix":
        return OutputDensityMatrix(unitary @ self.matrix @ unitary.conj().T)

    def __add__(self, other: "OutputDensityMatrix") -> "OutputDensityMatrix":
        return OutputDensityMatrix(self.matrix + other.matrix)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return bool(np.abs(self.matrix - self.matrix.conj().T).max() <= tol)

    def is_psd(self, tol: float = 1e-10) -> bool:
        return bool(np.linalg.eigvalsh((self.matrix + self.matrix.conj().T) / 2).min() >= -tol)

    def to_list(self) -> list:
        return [[[z.real, z.imag] for z in row] for row in self.matrix]


__all__ = [
    "BASIS", "H", "V", "OutputDensityMatrix", "PAULI", "ZERO2", "ONE2", "PLUS_PLUS", "MINUS_MINUS",
    "encoded_vector", "pair_vector", "projector", "vector_to_state",
]
