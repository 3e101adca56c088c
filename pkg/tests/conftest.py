import math

import numpy as np
import pytest

from parity_reencoder.encoding import LogicalQubit
from parity_reencoder.photonic import PhotonicState, Slot


def ket(*labels, amp=1.0):
    """``ket("H_a", "V_b")`` -> amp |H_a V_b>; a trailing prime marks a tag."""
    from parity_reencoder.photonic import Tag, make_config

    slots = []
    for lab in labels:
        pol, mode = lab.split("_", 1)
        tag = Tag.MATCHED
        if pol.endswith("''"):
            tag, pol = Tag.DOUBLE_PRIME, pol[:-2]
        elif pol.endswith("'"):
            tag, pol = Tag.PRIME, pol[:-1]
        slots.append(Slot(mode, pol, tag))
    return PhotonicState({make_config(slots): amp})


def random_qubits(n, seed):
    rng = np.random.default_rng(seed)
    return [LogicalQubit.random(rng) for _ in range(n)]


@pytest.fixture
def probe():
    return LogicalQubit.normalized(0.6, 0.8 * np.exp(0.7j))


SQ = 1 / math.sqrt(2)


_RUNS = {}


def teleport_run(policy_name, trials=100_000, seed=2024):
    """Seeded teleport batch, shared between test modules in one session."""
    from parity_reencoder.teleport import RetryPolicy, simulate

    key = (policy_name, trials, seed)
    if key not in _RUNS:
        policy = getattr(RetryPolicy, policy_name)()
        q = LogicalQubit.normalized(0.6, 0.8 * np.exp(0.7j))
        _RUNS[key] = simulate(q, policy, trials, seed)
    return _RUNS[key]


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
