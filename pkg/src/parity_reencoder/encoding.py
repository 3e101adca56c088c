"""Parity-encoded logical qubits on polarization modes.

``|0>^(n)`` is the equal superposition of even-parity H/V strings and
``|1>^(n)`` of odd-parity strings, with H standing for 0 and V for 1.
"""
from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .elements import apply_hwp22_5, apply_pauli, apply_rotation_x
from .photonic import H, V, PhotonicState, Slot, Tag, inner_product, make_config, normalize

NORM_TOL = 1e-12


class NotParityEncodedError(ValueError):
    pass


@dataclass(frozen=True)
class LogicalQubit:
    alpha: complex
    beta: complex

    def __post_init__(self):
        norm = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"logical qubit not normalized: |alpha|^2+|beta|^2 = {norm!r}")
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "beta", complex(self.beta))

    @classmethod
    def normalized(cls, alpha: complex, beta: complex) -> "LogicalQubit":
        n = math.sqrt(abs(alpha) ** 2 + abs(beta) ** 2)
        return cls(alpha / n, beta / n)

    @classmethod
    def from_bloch(cls, theta: float, phi: float) -> "LogicalQubit":
        return cls(math.cos(theta / 2), cmath.exp(1j * phi) * math.sin(theta / 2))

    @classmethod
    def random(cls, rng: np.random.Generator) -> "LogicalQubit":
        """Haar-random pure state."""
        z = rng.normal(size=2) + 1j * rng.normal(size=2)
        return cls.normalized(z[0], z[1])

    def to_bloch(self) -> "BlochAngles":
        # strip the global phase so alpha is real and non-negative
        phase = cmath.exp(-1j * cmath.phase(self.alpha)) if abs(self.alpha) > 0 else 1.0
        a = (self.alpha * phase).real
        b = self.beta * phase
        theta = 2 * math.atan2(abs(b), a)
        phi = cmath.phase(b) % (2 * math.pi) if abs(b) > 0 else 0.0
        return BlochAngles(theta, phi)

    def vector(self) -> np.ndarray:
        return np.array([self.alpha, self.beta])

    def bit_flipped(self) -> "LogicalQubit":
        return LogicalQubit(self.beta, self.alpha)


@dataclass(frozen=True)
class BlochAngles:
    theta: float
    phi: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta out of [0, pi]: {self.theta}")
        if not 0.0 <= self.phi < 2 * math.pi:
            raise ValueError(f"phi out of [0, 2pi): {self.phi}")

    def qubit(self) -> LogicalQubit:
        return LogicalQubit.from_bloch(self.theta, self.phi)


def logical_fidelity(q1: LogicalQubit, q2: LogicalQubit) -> float:
    return abs(np.vdot(q1.vector(), q2.vector())) ** 2


def parity_basis_state(bit: int, modes: Sequence[str], tags: Mapping[str, Tag] | None = None) -> PhotonicState:
    """``|0>^(n)`` (bit=0) or ``|1>^(n)`` (bit=1) on the given modes."""
    n = len(modes)
    if n < 1:
        raise ValueError("parity encoding needs at least one mode")
    if len(set(modes)) != n:
        raise ValueError(f"duplicate modes: {modes}")
    tags = tags or {}
    amp = 2.0 ** (-(n - 1) / 2)
    terms = {}
    for bits in itertools.product((0, 1), repeat=n):
        if sum(bits) % 2 == bit:
            slots = [Slot(m, V if b else H, tags.get(m, Tag.MATCHED)) for m, b in zip(modes, bits)]
            terms[make_config(slots)] = amp
    return PhotonicState(terms)


def parity_state(q: LogicalQubit, n: int, modes: Sequence[str],
                 tags: Mapping[str, Tag] | None = None) -> PhotonicState:
    """alpha |0>^(n) + beta |1>^(n)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if len(modes) != n:
        raise ValueError(f"expected {n} modes, got {len(modes)}")
    return q.alpha * parity_basis_state(0, modes, tags) + q.beta * parity_basis_state(1, modes, tags)


def bell_phi_plus(m1: str, m2: str, tags: Mapping[str, Tag] | None = None) -> PhotonicState:
    if m1 == m2:
        raise ValueError("Bell pair needs two distinct modes")
    return parity_basis_state(0, [m1, m2], tags)


def prepare_via_nonmaximal(q: LogicalQubit, m1: str, m2: str) -> PhotonicState:
    """A|HH> + B|VV> followed by a Hadamard on each photon."""
    a = (q.alpha + q.beta) / math.sqrt(2)
    b = (q.alpha - q.beta) / math.sqrt(2)
    s = PhotonicState.from_kets([(a, [Slot(m1, H), Slot(m2, H)]), (b, [Slot(m1, V), Slot(m2, V)])])
    return apply_hwp22_5(apply_hwp22_5(s, m1), m2)


def decode(s: PhotonicState, modes: Sequence[str], tol: float = 1e-10) -> LogicalQubit:
    """Read the logical amplitudes off a parity-encoded state."""
    tags = _tags_of(s, modes)
    a = inner_product(parity_basis_state(0, modes, tags), s)
    b = inner_product(parity_basis_state(1, modes, tags), s)
    weight = abs(a) ** 2 + abs(b) ** 2
    if weight == 0 or abs(weight - s.norm_squared()) > tol * max(1.0, s.norm_squared()):
        raise NotParityEncodedError(f"state is not a parity encoding on modes {list(modes)}")
    return LogicalQubit.normalized(a, b)


def _tags_of(s: PhotonicState, modes: Sequence[str]) -> dict:
    tags = {}
    for cfg, _ in s:
        for slot, _n in cfg:
            if slot.mode in modes:
                tags[slot.mode] = slot.tag
    return tags


@dataclass(frozen=True)
class CollapseResult:
    probability: float
    state: PhotonicState
    bit_flip_owed: bool


def collapse_component(s: PhotonicState, modes: Sequence[str], k: int, outcome: str) -> CollapseResult:
    """Measure component qubit ``k`` in H/V and return the raw collapsed state.

    Outcome V leaves the bit-flipped logical state on the other components; the
    correction is left to the caller and signalled through ``bit_flip_owed``.
    """
    n = len(modes)
    if n < 2:
        raise ValueError("collapse needs n >= 2")
    decode(s, modes)
    target = modes[k]
    kept = {}
    for cfg, amp in s:
        slots = dict(cfg)
        hit = [sl for sl in slots if sl.mode == target]
        if len(hit) == 1 and hit[0].pol == outcome and slots[hit[0]] == 1:
            del slots[hit[0]]
            kept[make_config(slots)] = amp
    branch = PhotonicState(kept)
    p = branch.norm_squared() / s.norm_squared()
    state = normalize(branch) if p > 0 else branch
    return CollapseResult(p, state, outcome == V)


def logical_gate(s: PhotonicState, modes: Sequence[str], gate: str, theta: float = 0.0) -> PhotonicState:
    """Apply a deterministic logical gate.

    ``"Xtheta"`` rotates one component qubit; ``"Z"`` applies sigma_z to every
    component.
    """
    if gate == "Xtheta":
        return apply_rotation_x(s, modes[0], theta)
    if gate == "Z":
        for m in modes:
            s = apply_pauli(s, m, "Z")
        return s
    raise ValueError(f"unknown logical gate {gate!r}")
