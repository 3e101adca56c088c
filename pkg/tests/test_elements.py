
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import SQ, ket
from parity_reencoder.elements import (
    Element, ElementError, apply_hwp22_5, apply_pauli, apply_pbs, apply_qwp0, apply_rotation_x, run_elements,
)
from parity_reencoder.encoding import LogicalQubit, bell_phi_plus, parity_state
from parity_reencoder.photonic import (
    H, V, PhotonicState, Slot, Tag, apply_creation, make_config, states_close, tensor_all,
)
from parity_reencoder.reference import z90_input_reference


def close(a, b, tol=1e-14):
    return states_close(a, b, tol)


def test_pbs_transmits_h_and_reflects_v():
    assert close(apply_pbs(ket("H_b"), "b", "c", "4", "2'"), ket("H_4"))
    assert close(apply_pbs(ket("V_b"), "b", "c", "4", "2'"), ket("V_2'"))
    assert close(apply_pbs(ket("H_c"), "b", "c", "4", "2'"), ket("H_2'"))
    assert close(apply_pbs(ket("V_c"), "b", "c", "4", "2'"), ket("V_4"))


def test_pbs_is_tag_blind():
    assert close(apply_pbs(ket("V'_b"), "b", "c", "4", "2'"), ket("V'_2'"))


def test_pbs_two_h_photons_bunch_with_bosonic_amplitude():
    s = apply_creation(apply_creation(PhotonicState.vacuum(), Slot("b", H)), Slot("b", H))
    s = s * (1 / np.sqrt(2))   # normalized |2 H_b>
    out = apply_pbs(s, "b", "c", "4", "2'")
    assert out.amplitude(make_config({Slot("4", H): 2})) == pytest.approx(1.0)


def test_pbs_rejects_bad_ports():
    with pytest.raises(ElementError):
        apply_pbs(ket("H_b"), "b", "b", "4", "2'")
    with pytest.raises(ElementError):
        apply_pbs(tensor_all([ket("H_b"), ket("H_4")]), "b", "c", "4", "2'")


def test_hwp_is_hadamard():
    assert close(apply_hwp22_5(ket("H_m"), "m"), ket("H_m", amp=SQ) + ket("V_m", amp=SQ))
    assert close(apply_hwp22_5(ket("V_m"), "m"), ket("H_m", amp=SQ) + ket("V_m", amp=-SQ))


def test_hwp_twice_is_identity():
    s = parity_state(LogicalQubit.normalized(0.3, 0.7j), 3, ["a", "b", "c"])
    assert close(apply_hwp22_5(apply_hwp22_5(s, "b"), "b"), s, 1e-14)


def test_qwp_phase_convention():
    assert close(apply_qwp0(ket("H_e"), "e"), ket("H_e"))
    assert close(apply_qwp0(ket("V_e"), "e"), ket("V_e", amp=1j))


def test_qwp_on_encoded_pair_matches_printed_state(probe):
    got = apply_qwp0(parity_state(probe, 2, ["e", "1"]), "e")
    assert close(got, z90_input_reference(probe), 1e-15)


def test_pauli_examples():
    assert close(apply_pauli(ket("H_a"), "a", "X"), ket("V_a"))
    assert close(apply_pauli(ket("V_a"), "a", "Z"), ket("V_a", amp=-1))
    with pytest.raises(ElementError):
        apply_pauli(ket("V_a"), "a", "Y")


def test_zz_maps_phase_flipped_output_back(probe):
    flipped = LogicalQubit(probe.alpha, -probe.beta)
    s = apply_pauli(apply_pauli(parity_state(flipped, 2, ["a", "d"]), "a", "Z"), "d", "Z")
    assert close(s, parity_state(probe, 2, ["a", "d"]), 1e-15)


def test_element_dispatch():
    s = run_elements(ket("H_b"), [Element("HWP22_5", ("b",)), Element("PBS", ("b", "c", "4", "2'"))])
    assert close(s, ket("H_4", amp=SQ) + ket("V_2'", amp=SQ))


def _jones(s, mode):
    """2-vector of a single-photon state in one mode, for a matrix oracle."""
    return np.array([s.amplitude(make_config([Slot(mode, p)])) for p in (H, V)])


@pytest.mark.parametrize("fn, matrix", [
    (lambda s: apply_hwp22_5(s, "m"), np.array([[1, 1], [1, -1]]) * SQ),
    (lambda s: apply_qwp0(s, "m"), np.diag([1, 1j])),
    (lambda s: apply_pauli(s, "m", "X"), np.array([[0, 1], [1, 0]])),
    (lambda s: apply_pauli(s, "m", "Z"), np.diag([1, -1])),
    (lambda s: apply_rotation_x(s, "m", 0.9), np.cos(0.45) * np.eye(2) - 1j * np.sin(0.45) * np.array([[0, 1], [1, 0]])),
])
def test_single_mode_elements_match_jones_matrices(fn, matrix):
    for v in (np.array([1, 0]), np.array([0, 1]), np.array([0.6, 0.8j])):
        s = ket("H_m", amp=v[0]) + ket("V_m", amp=v[1])
        np.testing.assert_allclose(_jones(fn(s), "m"), matrix @ v, atol=1e-15)


ELEMENTS = [
    lambda s: apply_pbs(s, "b", "c", "4", "2'"),
    lambda s: apply_hwp22_5(s, "b"),
    lambda s: apply_qwp0(s, "b"),
    lambda s: apply_pauli(s, "b", "X"),
    lambda s: apply_pauli(s, "b", "Z"),
    lambda s: apply_rotation_x(s, "b", 1.3),
]


@settings(max_examples=40, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False), min_size=8, max_size=8),
       st.integers(0, len(ELEMENTS) - 1))
def test_every_element_preserves_norm(coeffs, which):
    # two photons over b and c with mixed tags, including double occupation
    basis = [
        [Slot("b", H), Slot("c", V)], [Slot("b", V), Slot("c", H)], [Slot("b", H), Slot("b", H)],
        [Slot("b", H), Slot("b", V)], [Slot("c", V), Slot("c", V)], [Slot("b", H, Tag.PRIME), Slot("c", H)],
        [Slot("b", V, Tag.PRIME), Slot("b", V)], [Slot("c", H), Slot("c", H, Tag.DOUBLE_PRIME)],
    ]
    s = PhotonicState({make_config(b): c for b, c in zip(basis, coeffs)})
    out = ELEMENTS[which](s)
    assert out.norm_squared() == pytest.approx(s.norm_squared(), abs=1e-12)


@pytest.mark.parametrize("which", range(len(ELEMENTS)))
def test_elements_commute_with_tag_relabeling(which):
    s = bell_phi_plus("a", "b") * 0.6 + bell_phi_plus("a", "b", {"b": Tag.PRIME}) * 0.8
    relabel = {Tag.MATCHED: Tag.DOUBLE_PRIME, Tag.PRIME: Tag.MATCHED, Tag.DOUBLE_PRIME: Tag.PRIME}

    def swap(state):
        return state.map_configs(lambda c: make_config({Slot(x.mode, x.pol, relabel[x.tag]): n for x, n in c}))

    assert close(ELEMENTS[which](swap(s)), swap(ELEMENTS[which](s)), 1e-14)


def test_pbs_conserves_photons_per_tag():
    s = tensor_all([bell_phi_plus("a", "b", {"b": Tag.PRIME}), bell_phi_plus("c", "d")])
    out = apply_pbs(apply_hwp22_5(s, "b"), "c", "b", "4", "2'")
    for cfg, _ in out:
        by_tag = {}
        for sl, n in cfg:
            by_tag[sl.tag] = by_tag.get(sl.tag, 0) + n
        assert by_tag == {Tag.MATCHED: 3, Tag.PRIME: 1}
