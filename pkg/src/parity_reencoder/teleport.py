"""Alice/Bob teleportation of a parity-encoded qubit through the re-encoder.

Alice holds b, c and the encoded input (e, 1); Bob holds a and d.  Outcome
sampling uses the exact branch distributions of the amplitude simulator, so
the statistics stay valid with mode mismatch switched on.

Recovery after a failed type-II fusion keeps the mode-1 photon, fixes its bit
flip from the failure signature and re-encodes it onto a fresh (e, 1) pair.
The re-encoding step itself is idealized.
"""
from __future__ import annotations

import bisect
import functools
import json
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import binomtest

from .circuit import (
    INPUT_MODES, MismatchParams, ModeLog, bell_pairs, encoded_input, fusion_stage, resource_stage,
)
from .density import OutputDensityMatrix, encoded_vector
from .detection import CorrectionOp, DetectorPattern, GateMode, correction_for, detection_outcomes
from .encoding import LogicalQubit, logical_fidelity
from .photonic import PhotonicState, tensor

MAX_ATTEMPTS = 10_000


class Phase(str, Enum):
    AWAIT_TYPE1 = "await_type1"
    AWAIT_TYPE2 = "await_type2"
    RECOVERING = "recovering"
    DONE = "done"
    ABORTED = "aborted"


@dataclass(frozen=True)
class RetryPolicy:
    """Attempt budgets; ``None`` means unbounded."""

    max_type1: Optional[int] = 1
    max_type2: Optional[int] = 1
    recovery: bool = False

    def __post_init__(self):
        for name in ("max_type1", "max_type2"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ValueError(f"{name} must be >= 1 or None")

    @classmethod
    def single_shot(cls) -> "RetryPolicy":
        return cls(1, 1, False)

    @classmethod
    def type1_retry(cls) -> "RetryPolicy":
        return cls(None, 1, False)

    @classmethod
    def unlimited(cls) -> "RetryPolicy":
        return cls(None, None, True)


@dataclass(frozen=True)
class ClassicalMessage:
    stage: str                                  # "type1", "type2" or "mode1"
    pattern_fragment: Tuple[Tuple[str, int], ...]
    success: bool

    def pol(self, group: str) -> str:
        fired = dict(self.pattern_fragment)
        return "H" if fired.get(f"D{group}H", 0) else "V"


def bob_correction(messages: Sequence[ClassicalMessage]) -> CorrectionOp:
    """Bob's feed-forward, computed from the classical record alone."""
    last = {}
    for m in messages:
        if m.success:
            last[m.stage] = m
    pattern = last["mode1"].pol("1") + last["type2"].pol("2") + last["type2"].pol("3") + last["type1"].pol("4")
    return _correction(pattern)


@functools.lru_cache(maxsize=None)
def _correction(pattern: str) -> CorrectionOp:
    return correction_for(DetectorPattern.from_string(pattern), GateMode.IDENTITY)


@dataclass
class ProtocolState:
    phase: Phase = Phase.AWAIT_TYPE1
    attempts_type1: int = 0
    attempts_type2: int = 0
    bell_pairs_consumed: int = 0
    recoveries: int = 0
    pending_correction: Optional[CorrectionOp] = None
    messages: List[ClassicalMessage] = field(default_factory=list)
    events: List[str] = field(default_factory=list)
    recovery_fidelities: List[float] = field(default_factory=list)
    delivered_fidelity: Optional[float] = None


# ---------------------------------------------------------------------------
# exact branch distributions

class _Sampler:
    def __init__(self, labels, probs, total: float):
        self.labels = list(labels)
        self.cum = np.cumsum(np.asarray(probs, dtype=float) / total).tolist()

    def draw(self, rng: np.random.Generator):
        i = bisect.bisect_right(self.cum, rng.random())
        return self.labels[min(i, len(self.labels) - 1)]


def _fragment(p: DetectorPattern) -> Tuple[Tuple[str, int], ...]:
    return p.counts


@dataclass
class _Type2Branch:
    """Outcomes of PBS2 detection for one carried qubit and type-I result."""

    sampler: _Sampler
    success: Dict[DetectorPattern, bool]
    mode1: Dict[DetectorPattern, _Sampler] = field(default_factory=dict)
    rho: Dict[Tuple[DetectorPattern, DetectorPattern], OutputDensityMatrix] = field(default_factory=dict)
    fidelity: Dict[Tuple, float] = field(default_factory=dict)
    remainder: Dict[DetectorPattern, Tuple[PhotonicState, ...]] = field(default_factory=dict)
    recovered: Dict[DetectorPattern, LogicalQubit] = field(default_factory=dict)

    def recover(self, p: DetectorPattern) -> LogicalQubit:
        """Mode-1 qubit left by a failed fusion, with the owed bit flip undone."""
        if p not in self.recovered:
            q, _purity = mode1_qubit(self.remainder[p])
            self.recovered[p] = q.bit_flipped() if _failure_bit_flip(p) else q
        return self.recovered[p]


def _merged_outcomes(states: Sequence[PhotonicState], modes: Sequence[str]):
    """Tag-blind detection over an incoherent ensemble of (unnormalized) states."""
    merged: Dict[DetectorPattern, List] = {}
    for st in states:
        for p, proj in detection_outcomes(st, modes, modes).items():
            prob, brs = merged.get(p, (0.0, ()))
            merged[p] = (prob + proj.probability, brs + proj.branches)
    return merged


class ProtocolModel:
    """Cached exact distributions for each protocol stage."""

    def __init__(self, mismatch: MismatchParams | None = None):
        self.mismatch = mismatch
        self.stage_modes: Dict[str, set] = {}
        log = ModeLog()
        pairs = bell_pairs(mismatch)
        after = resource_stage(pairs, log)
        self.stage_modes["type1"] = log.touched() | pairs.modes()
        outcomes = detection_outcomes(after, ["4"], ["4"])
        self.type1_projections = {p: proj for p, proj in outcomes.items()}
        labels = sorted(outcomes, key=str)
        self.type1 = _Sampler(labels, [outcomes[p].probability for p in labels], sum(o.probability for o in outcomes.values()))
        self.type1_ok = {p: p.is_success() for p in labels}
        self._type2: Dict[Tuple, _Type2Branch] = {}

    @staticmethod
    def key(q: LogicalQubit) -> Tuple:
        a, b = complex(q.alpha), complex(q.beta)
        ref = a if abs(a) > 1e-12 else b
        phase = abs(ref) / ref
        a, b = a * phase, b * phase
        return (round(a.real, 12), round(a.imag, 12), round(b.real, 12), round(b.imag, 12))

    def type2(self, q: LogicalQubit, t1: DetectorPattern, qkey: Tuple | None = None) -> _Type2Branch:
        k = (qkey or self.key(q), t1)
        if k not in self._type2:
            self._type2[k] = self._build_type2(q, t1)
        return self._type2[k]

    def _build_type2(self, q: LogicalQubit, t1: DetectorPattern) -> _Type2Branch:
        log = ModeLog()
        resource = self.type1_projections[t1].branches
        src = encoded_input(q, self.mismatch)
        states = [fusion_stage(tensor(b, src), GateMode.IDENTITY, log) for b in resource]
        self.stage_modes["type2"] = log.touched() | set(INPUT_MODES)
        merged = _merged_outcomes(states, ["2", "3"])
        labels = sorted(merged, key=str)
        total = sum(merged[p][0] for p in labels)
        branch = _Type2Branch(_Sampler(labels, [merged[p][0] for p in labels], total),
                              {p: p.is_success() for p in labels})
        for p in labels:
            prob, brs = merged[p]
            if p.is_success():
                m1 = _merged_outcomes(brs, ["1"])
                l1 = sorted(m1, key=str)
                branch.mode1[p] = _Sampler(l1, [m1[x][0] for x in l1], prob)
                for x in l1:
                    branch.rho[(p, x)] = OutputDensityMatrix.from_branches(m1[x][1])
            else:
                branch.remainder[p] = brs
        return branch


def mode1_qubit(branches: Sequence[PhotonicState]) -> Tuple[LogicalQubit, float]:
    """Principal state of the mode-1 photon after tracing out everything else.

    Returns the qubit and the purity of the reduced state.
    """
    blocks: Dict[Tuple, np.ndarray] = {}
    for b in branches:
        for cfg, amp in b:
            rest = tuple((s, n) for s, n in cfg if s.mode != "1")
            ones = [s for s, n in cfg if s.mode == "1"]
            if len(ones) != 1:
                raise ValueError("mode 1 must hold exactly one photon")
            vec = blocks.setdefault((id(b), rest, ones[0].tag), np.zeros(2, dtype=complex))
            vec[0 if ones[0].pol == "H" else 1] += amp
    rho = sum(np.outer(v, v.conj()) for v in blocks.values())
    rho = rho / np.trace(rho).real
    w, vecs = np.linalg.eigh(rho)
    top = vecs[:, -1]
    return LogicalQubit.normalized(top[0], top[1]), float(np.real(np.trace(rho @ rho)))


def _failure_bit_flip(p: DetectorPattern) -> bool:
    # The V photon of e leaves PBS2 through mode 2, so a double count there means e was V.
    return p.group_total("2") == 2


# ---------------------------------------------------------------------------
# trials

def run_protocol_trial(q: LogicalQubit, policy: RetryPolicy, rng_seed: int, trial_index: int = 0,
                       model: ProtocolModel | None = None) -> Tuple[ProtocolState, Optional[float]]:
    model = model or ProtocolModel()
    rng = np.random.default_rng(np.random.SeedSequence([rng_seed, trial_index]))
    st = ProtocolState()
    carried = q
    qkey = origin = model.key(q)
    t1_pattern = None
    while st.attempts_type1 + st.attempts_type2 < MAX_ATTEMPTS:
        if st.phase is Phase.AWAIT_TYPE1:
            if policy.max_type1 is not None and st.attempts_type1 >= policy.max_type1:
                st.phase = Phase.ABORTED
                break
            st.attempts_type1 += 1
            st.bell_pairs_consumed += 2
            p = model.type1.draw(rng)
            ok = model.type1_ok[p]
            st.messages.append(ClassicalMessage("type1", _fragment(p), ok))
            st.events.append("type1:ok" if ok else "type1:fail")
            if ok:
                t1_pattern = p
                st.phase = Phase.AWAIT_TYPE2
        elif st.phase is Phase.AWAIT_TYPE2:
            if policy.max_type2 is not None and st.attempts_type2 >= policy.max_type2:
                st.phase = Phase.ABORTED
                break
            st.attempts_type2 += 1
            branch = model.type2(carried, t1_pattern, qkey)
            p2 = branch.sampler.draw(rng)
            ok = branch.success[p2]
            st.messages.append(ClassicalMessage("type2", _fragment(p2), ok))
            st.events.append("type2:ok" if ok else "type2:fail")
            if ok:
                p1 = branch.mode1[p2].draw(rng)
                st.messages.append(ClassicalMessage("mode1", _fragment(p1), True))
                st.pending_correction = bob_correction(st.messages)
                fk = (p2, p1, st.pending_correction, origin)
                if fk not in branch.fidelity:
                    rho = branch.rho[(p2, p1)].conjugated(st.pending_correction.unitary())
                    branch.fidelity[fk] = rho.fidelity(encoded_vector(q.alpha, q.beta))
                st.delivered_fidelity = branch.fidelity[fk]
                st.phase = Phase.DONE
                break
            if not policy.recovery:
                st.phase = Phase.ABORTED
                break
            st.phase = Phase.RECOVERING
            recovered = branch.recover(p2)
            st.recoveries += 1
            st.recovery_fidelities.append(logical_fidelity(recovered, q))
            st.events.append("recover")
            carried = recovered
            qkey = model.key(carried)
            st.phase = Phase.AWAIT_TYPE1
    else:
        st.phase = Phase.ABORTED
    return st, st.delivered_fidelity


# ---------------------------------------------------------------------------
# statistics

@dataclass(frozen=True)
class RunStats:
    trials: int
    successes: int
    eventual_success_rate: float
    single_shot_success_rate: float
    mean_bell_pairs: float
    mean_type1_attempts: float
    mean_type2_attempts: float
    recoveries: int
    min_delivered_fidelity: Optional[float]


def aggregate(trials: Sequence[ProtocolState]) -> RunStats:
    if not trials:
        raise ValueError("no trials to aggregate")
    n = len(trials)
    done = [t for t in trials if t.phase is Phase.DONE]
    first_try = sum(1 for t in done if t.attempts_type1 == 1 and t.attempts_type2 == 1)
    fids = [t.delivered_fidelity for t in done]
    return RunStats(
        trials=n,
        successes=len(done),
        eventual_success_rate=len(done) / n,
        single_shot_success_rate=first_try / n,
        mean_bell_pairs=sum(t.bell_pairs_consumed for t in trials) / n,
        mean_type1_attempts=sum(t.attempts_type1 for t in trials) / n,
        mean_type2_attempts=sum(t.attempts_type2 for t in trials) / n,
        recoveries=sum(t.recoveries for t in trials),
        min_delivered_fidelity=min(fids) if fids else None,
    )


def simulate(q: LogicalQubit, policy: RetryPolicy, trials: int, seed: int = 0,
             mismatch: MismatchParams | None = None) -> Tuple[RunStats, List[ProtocolState]]:
    model = ProtocolModel(mismatch)
    states = [run_protocol_trial(q, policy, seed, i, model)[0] for i in range(trials)]
    return aggregate(states), states


def wilson_interval(k: int, n: int) -> Tuple[float, float]:
    ci = binomtest(k, n).proportion_ci(confidence_level=0.95, method="wilson")
    return ci.low, ci.high


def report(stats: RunStats, policy: RetryPolicy, seed: int, mismatch: MismatchParams | None = None) -> dict:
    single = round(stats.single_shot_success_rate * stats.trials)
    return {
        "policy": asdict(policy),
        "trials": stats.trials,
        "seed": seed,
        "mismatch": None if mismatch is None else asdict(mismatch),
        "eventual_success_rate": stats.eventual_success_rate,
        "eventual_success_ci95": wilson_interval(stats.successes, stats.trials),
        "single_shot_success_rate": stats.single_shot_success_rate,
        "single_shot_success_ci95": wilson_interval(single, stats.trials),
        "mean_bell_pairs": stats.mean_bell_pairs,
        "mean_type1_attempts": stats.mean_type1_attempts,
        "mean_type2_attempts": stats.mean_type2_attempts,
        "recoveries": stats.recoveries,
        "recovery_model": "idealized re-encode of the surviving mode-1 photon",
        "min_delivered_fidelity": stats.min_delivered_fidelity,
    }


def dumps_report(rep: dict) -> str:
    return json.dumps(rep, indent=2, sort_keys=True)
