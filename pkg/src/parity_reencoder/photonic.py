"""Sparse bosonic states over labelled spatial modes.

A photon occupies a ``(mode, polarization, tag)`` slot.  The tag marks
non-polarization degrees of freedom: photons with different tags never
interfere and are perfectly distinguishable.  A :class:`PhotonicState` maps
occupation configurations to complex amplitudes on the orthonormal Fock basis,
so two distinct configurations are always orthogonal.
"""
from __future__ import annotations

import cmath
import math
from collections import Counter, defaultdict
from enum import IntEnum
from typing import Callable, Dict, Iterable, Iterator, List, Mapping, NamedTuple, Tuple

EPS_PRUNE = 1e-14

H = "H"
V = "V"
POLARIZATIONS = (H, V)


class Tag(IntEnum):
    MATCHED = 0
    PRIME = 1
    DOUBLE_PRIME = 2


_TAG_MARK = {Tag.MATCHED: "", Tag.PRIME: "'", Tag.DOUBLE_PRIME: "''"}


class Slot(NamedTuple):
    mode: str
    pol: str
    tag: Tag = Tag.MATCHED

    def label(self) -> str:
        return f"{self.pol}{_TAG_MARK[self.tag]}_{self.mode}"


# Canonically sorted ((slot, count), ...) with no zero counts.
Config = Tuple[Tuple[Slot, int], ...]

VACUUM: Config = ()


def make_config(slots: Iterable[Slot] | Mapping[Slot, int]) -> Config:
    """Build a canonical configuration from photon slots or a count map."""
    if isinstance(slots, Mapping):
        items = ((Slot(*s), n) for s, n in slots.items())
    else:
        items = Counter(Slot(*s) for s in slots).items()
    # Slot's tuple order is the canonical order: mode, then H < V, then tag.
    return tuple(sorted((s, n) for s, n in items if n > 0))


def _counts_to_config(counts: Mapping[Slot, int]) -> Config:
    return tuple(sorted(counts.items()))


def config_photons(cfg: Config) -> int:
    return sum(n for _, n in cfg)


def config_modes(cfg: Config) -> set:
    return {s.mode for s, _ in cfg}


def bosonic_factor(cfg: Config) -> float:
    """sqrt(prod n!) relating a creation-operator monomial to a normalized Fock ket."""
    f = 1
    for _, n in cfg:
        if n > 1:
            f *= math.factorial(n)
    return math.sqrt(f) if f > 1 else 1.0


class OverlappingModesError(ValueError):
    pass


class ZeroStateError(ValueError):
    pass


class PhotonicState:
    """Immutable sparse superposition of occupation configurations."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Config, complex] | None = None, prune: float | None = None):
        if prune is None:
            prune = EPS_PRUNE
        clean: Dict[Config, complex] = {}
        for cfg, amp in (terms or {}).items():
            amp = complex(amp)
            if abs(amp) > prune:
                clean[cfg] = amp
        self._terms = dict(sorted(clean.items()))

    # construction helpers -------------------------------------------------
    @classmethod
    def vacuum(cls) -> "PhotonicState":
        return cls({VACUUM: 1.0})

    @classmethod
    def empty(cls) -> "PhotonicState":
        return cls({})

    @classmethod
    def from_kets(cls, kets: Iterable[Tuple[complex, Iterable[Slot]]]) -> "PhotonicState":
        """Sum ``amp * |slots>``, where the slots are one photon each."""
        acc: Dict[Config, complex] = defaultdict(complex)
        for amp, slots in kets:
            acc[make_config(slots)] += amp
        return cls(acc)

    @classmethod
    def single(cls, mode: str, pol: str, tag: Tag = Tag.MATCHED) -> "PhotonicState":
        return cls({make_config([Slot(mode, pol, tag)]): 1.0})

    # mapping-like access ---------------------------------------------------
    @property
    def terms(self) -> Mapping[Config, complex]:
        return self._terms

    def __iter__(self) -> Iterator[Tuple[Config, complex]]:
        return iter(self._terms.items())

    def __len__(self) -> int:
        return len(self._terms)

    def amplitude(self, cfg: Config) -> complex:
        return self._terms.get(cfg, 0j)

    def modes(self) -> set:
        out = set()
        for cfg in self._terms:
            out |= config_modes(cfg)
        return out

    # arithmetic ------------------------------------------------------------
    def __add__(self, other: "PhotonicState") -> "PhotonicState":
        acc = defaultdict(complex, self._terms)
        for cfg, amp in other._terms.items():
            acc[cfg] += amp
        return PhotonicState(acc)

    def __sub__(self, other: "PhotonicState") -> "PhotonicState":
        return self + (-1) * other

    def __mul__(self, scalar: complex) -> "PhotonicState":
        return PhotonicState({c: a * scalar for c, a in self._terms.items()})

    __rmul__ = __mul__

    def norm_squared(self) -> float:
        return sum(abs(a) ** 2 for a in self._terms.values())

    def norm(self) -> float:
        return math.sqrt(self.norm_squared())

    def map_configs(self, fn: Callable[[Config], Config]) -> "PhotonicState":
        acc: Dict[Config, complex] = defaultdict(complex)
        for cfg, amp in self._terms.items():
            acc[fn(cfg)] += amp
        return PhotonicState(acc)

    def __repr__(self) -> str:
        return f"PhotonicState({len(self)} terms, norm^2={self.norm_squared():.6g})"

    def __str__(self) -> str:
        return dumps(self)


def inner_product(s1: PhotonicState, s2: PhotonicState) -> complex:
    """<s1|s2>, conjugate-linear in the first argument."""
    small = s1 if len(s1) <= len(s2) else s2
    total = 0j
    for cfg, _ in small:
        a1 = s1.amplitude(cfg)
        a2 = s2.amplitude(cfg)
        if a1 and a2:
            total += a1.conjugate() * a2
    return total


def tensor(s1: PhotonicState, s2: PhotonicState) -> PhotonicState:
    overlap = s1.modes() & s2.modes()
    if overlap:
        raise OverlappingModesError(f"modes shared by both factors: {sorted(overlap)}")
    acc: Dict[Config, complex] = {}
    for c1, a1 in s1:
        for c2, a2 in s2:
            acc[_counts_to_config(dict(c1) | dict(c2))] = a1 * a2
    return PhotonicState(acc)


def tensor_all(states: Iterable[PhotonicState]) -> PhotonicState:
    out = PhotonicState.vacuum()
    for s in states:
        out = tensor(out, s)
    return out


def normalize(s: PhotonicState) -> PhotonicState:
    n = s.norm()
    if n == 0.0:
        raise ZeroStateError("cannot normalize the zero state")
    return s * (1.0 / n)


def overlap_fidelity(s1: PhotonicState, s2: PhotonicState) -> float:
    """|<s1|s2>|^2 / (|s1|^2 |s2|^2); insensitive to global phase."""
    return abs(inner_product(s1, s2)) ** 2 / (s1.norm_squared() * s2.norm_squared())


def states_close(s1: PhotonicState, s2: PhotonicState, tol: float = 1e-12) -> bool:
    """Amplitude-wise comparison, global phase included."""
    keys = set(s1.terms) | set(s2.terms)
    return all(abs(s1.amplitude(k) - s2.amplitude(k)) <= tol for k in keys)


def apply_slot_map(s: PhotonicState, rule: Callable[[Slot], List[Tuple[Slot, complex]] | None]) -> PhotonicState:
    """Linear substitution of creation operators.

    ``rule(slot)`` returns the image of ``a^dagger_slot`` as a list of
    ``(slot, coefficient)`` pairs, or ``None`` to leave it untouched.  Amplitudes
    are converted to and from creation-operator monomials so multiply-occupied
    slots pick up the right sqrt(n!) factors.
    """
    acc: Dict[Config, complex] = defaultdict(complex)
    images: Dict[Slot, List[Tuple[Slot, complex]] | None] = {}
    for cfg, amp in s:
        fixed: Dict[Slot, int] = {}
        moving: List[List[Tuple[Slot, complex]]] = []
        for slot, n in cfg:
            if slot not in images:
                images[slot] = rule(slot)
            image = images[slot]
            if image is None:
                fixed[slot] = n
            else:
                moving.extend([image] * n)
        if not moving:
            acc[cfg] += amp
            continue
        partial: Dict[Tuple[Slot, ...], complex] = {(): amp / bosonic_factor(cfg)}
        for image in moving:
            nxt: Dict[Tuple[Slot, ...], complex] = defaultdict(complex)
            for mono, c in partial.items():
                for slot, k in image:
                    nxt[mono + (slot,)] += c * k
            partial = nxt
        merged: Dict[Config, complex] = defaultdict(complex)
        for mono, c in partial.items():
            counts = dict(fixed)
            for slot in mono:
                counts[slot] = counts.get(slot, 0) + 1
            merged[_counts_to_config(counts)] += c
        for out_cfg, c in merged.items():
            acc[out_cfg] += c * bosonic_factor(out_cfg)
    return PhotonicState(acc)


def ket_string(cfg: Config) -> str:
    if not cfg:
        return "|vac⟩"
    parts = []
    for slot, n in cfg:
        parts.append(slot.label() if n == 1 else f"{slot.label()}^{n}")
    return "|" + " ".join(parts) + "⟩"


def _fmt_complex(z: complex) -> str:
    re = 0.0 if abs(z.real) < 5e-16 else z.real
    im = 0.0 if abs(z.imag) < 5e-16 else z.imag
    return f"{re:.12g}{im:+.12g}i"


def dumps(s: PhotonicState) -> str:
    """Stable debug serialization, one ``amplitude |ket⟩`` line per term."""
    return "\n".join(f"{_fmt_complex(a)} {ket_string(c)}" for c, a in s)


def phase_aligned(s: PhotonicState, reference: PhotonicState) -> PhotonicState:
    """Rotate ``s`` by the global phase that best aligns it with ``reference``."""
    ov = inner_product(reference, s)
    if abs(ov) == 0.0:
        return s
    return s * cmath.exp(-1j * cmath.phase(ov))


def apply_creation(s: PhotonicState, slot: Slot, coeff: complex = 1.0) -> PhotonicState:
    """coeff * a^dagger_slot |s>, with the sqrt(n+1) bosonic factor."""
    slot = Slot(*slot)
    acc: Dict[Config, complex] = defaultdict(complex)
    for cfg, amp in s:
        counts = dict(cfg)
        n = counts.get(slot, 0)
        counts[slot] = n + 1
        acc[make_config(counts)] += amp * coeff * math.sqrt(n + 1)
    return PhotonicState(acc)
