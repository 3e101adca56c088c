"""Oracle-equivalence checks run by ``parity-reencoder selftest``.

Element implementations can be swapped in to confirm that a deliberately
broken convention is caught.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List

import numpy as np

from .circuit import (
    CircuitConfig, MismatchParams, bell_pairs, build_input_state, fusion_stage, resource_stage, run,
)
from .detection import GROUPS, GateMode, flip_class_for, DetectorPattern
from .elements import apply_pbs, apply_qwp0
from .encoding import LogicalQubit, parity_state
from .mismatch import (
    QuadratureSpec, SignVariant, average_fidelity, closed_form_probability, closed_form_rho,
    simulate_all_patterns,
)
from .photonic import states_close
from .reference import fusion_reference, pbs1_reference, z90_input_reference

TOL = 1e-12
_PROBE = LogicalQubit.normalized(0.6, 0.8 * np.exp(0.7j))


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'}  {self.name}" + (f"  ({self.detail})" if self.detail else "")


def _one_per_group(cfg, groups) -> bool:
    return all(sum(n for s, n in cfg if s.mode == g) == 1 for g in groups)


def check_pbs1_expansion(pbs=apply_pbs) -> CheckResult:
    s = resource_stage(bell_pairs(), pbs=pbs)
    got = {c: a for c, a in s if _one_per_group(c, ["4"])}
    ref = pbs1_reference()
    err = max(abs(got.get(k, 0) - ref.get(k, 0)) for k in set(got) | set(ref))
    return CheckResult("post-PBS1 expansion", err <= TOL, f"max amplitude error {err:.2e}")


def check_fusion_expansion(q: LogicalQubit = _PROBE, pbs=apply_pbs) -> CheckResult:
    s = build_input_state(CircuitConfig(input=q))
    s = fusion_stage(resource_stage(s, pbs=pbs), GateMode.IDENTITY, pbs=pbs)
    got = {c: a for c, a in s if _one_per_group(c, GROUPS)}
    ref = fusion_reference(q)
    err = max(abs(got.get(k, 0) - ref.get(k, 0)) for k in set(got) | set(ref))
    return CheckResult("64-term success expansion", err <= TOL, f"max amplitude error {err:.2e}")


def check_z90_input(q: LogicalQubit = _PROBE, qwp=apply_qwp0) -> CheckResult:
    got = qwp(parity_state(q, 2, ["e", "1"]), "e")
    ok = states_close(got, z90_input_reference(q), TOL)
    return CheckResult("quarter-wave plate on the encoded input", ok)


def check_corrections(n_inputs: int = 5, seed: int = 7, qwp=apply_qwp0) -> CheckResult:
    """Every success pattern, both gate modes, corrected to the canonical target."""
    rng = np.random.default_rng(seed)
    worst = 1.0
    for _ in range(n_inputs):
        q = LogicalQubit.random(rng)
        for mode in GateMode:
            res = run(CircuitConfig(gate_mode=mode, input=q), qwp=qwp)
            worst = min(worst, min(res.pattern_fidelity(o) for o in res.outcomes))
    return CheckResult("16-pattern corrections", worst >= 1 - TOL, f"worst fidelity {worst:.15f}")


def check_ideal_probabilities() -> CheckResult:
    res = run(CircuitConfig())
    per = res.per_class_probability
    err = max(abs(p - 1 / 16) for p in per.values())
    err = max(err, abs(res.total_success_probability - 0.25))
    return CheckResult("class probabilities 1/16, total 1/4", err <= TOL, f"max error {err:.2e}")


def check_mismatch_grid(points: int = 3, n_inputs: int = 2, seed: int = 11) -> CheckResult:
    rng = np.random.default_rng(seed)
    grid = np.linspace(0, 1, points)
    rho_err = p_err = 0.0
    for _ in range(n_inputs):
        q = LogicalQubit.random(rng)
        for e1 in grid:
            for e2 in grid:
                mm = MismatchParams(float(e1), float(e2))
                for mode in GateMode:
                    for pat, rho in simulate_all_patterns(q, mm, mode).items():
                        v = SignVariant.for_class(flip_class_for(DetectorPattern.from_string(pat), mode))
                        rho_err = max(rho_err, float(np.abs(rho.matrix - closed_form_rho(q, mm, v, mode).matrix).max()))
                        p_err = max(p_err, abs(rho.trace - closed_form_probability(q, mm, v, mode)))
    return CheckResult("mismatch closed form vs simulation", rho_err <= 1e-10 and p_err <= 1e-12,
                       f"rho {rho_err:.2e}, probability {p_err:.2e}")


def check_average_fidelity() -> CheckResult:
    quad = QuadratureSpec()
    vals = {
        (1.0, 1.0): 1.0,
        (0.0, 0.0): 0.5,
        (1.0, 0.0): 2 / 3,
    }
    err = 0.0
    for (e1, e2), want in vals.items():
        mm = MismatchParams(e1, e2)
        for mode in GateMode:
            for var in SignVariant:
                err = max(err, abs(average_fidelity(mm, mode, quad, var) - want))
    return CheckResult("average fidelity at pinned points", err <= 1e-9, f"max error {err:.2e}")


def run_selftest(pbs=apply_pbs, qwp=apply_qwp0, quick: bool = False) -> List[CheckResult]:
    checks: List[Callable[[], CheckResult]] = [
        lambda: check_pbs1_expansion(pbs),
        lambda: check_fusion_expansion(pbs=pbs),
        lambda: check_z90_input(qwp=qwp),
        lambda: check_corrections(qwp=qwp),
        check_ideal_probabilities,
        (lambda: check_mismatch_grid(2, 1)) if quick else check_mismatch_grid,
        check_average_fidelity,
    ]
    return [c() for c in checks]


def faulty_qwp(s, mode):
    """Quarter-wave plate with the opposite phase convention."""
    return apply_qwp0(s, mode, v_phase=-1j)


def faulty_pbs(s, in1, in2, out1, out2):
    """Beam splitter that adds a phase i on reflection."""
    return apply_pbs(s, in1, in2, out1, out2, reflection_phase=1j)


FAULTS = {"qwp-conjugate": {"qwp": faulty_qwp}, "pbs-reflection-phase": {"pbs": faulty_pbs}}
