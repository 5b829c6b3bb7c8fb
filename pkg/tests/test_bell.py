import itertools

import numpy as np
import pytest

from bell import (
    BellDiagonal, BellLabel, BellString, F_CIRCUIT, apply_f, bx_relabel, bxor,
    bxor_string, f_circuit, f_table, measure_compare, shannon_entropy, sigma_x_relabel,
    twirl_relabel, werner_entropy
)
from enumerator import load_reference_table
from utils import DomainError, UsageError
from verification import DEFAULT_TABLE_PATH

# State-vector oracle: qubits ordered A1, B1, A2, B2, basis index |A B> = 2a + b per pair.
SQ = 1 / np.sqrt(2)
BELL_VECTORS = {
    BellLabel.PHI_PLUS: np.array([1, 0, 0, 1]) * SQ,
    BellLabel.PSI_PLUS: np.array([0, 1, 1, 0]) * SQ,
    BellLabel.PHI_MINUS: np.array([1, 0, 0, -1]) * SQ,
    BellLabel.PSI_MINUS: np.array([0, 1, -1, 0]) * SQ,
}
X = np.array([[0, 1], [1, 0]])
Z = np.diag([1, -1])


def _cnot(control, target, n=4):
    m = np.zeros((2 ** n, 2 ** n))
    for i in range(2 ** n):
        bits = [(i >> (n - 1 - q)) & 1 for q in range(n)]
        if bits[control]:
            bits[target] ^= 1
        j = sum(b << (n - 1 - q) for q, b in enumerate(bits))
        m[j, i] = 1
    return m


def _same_state(u, v):
    return abs(abs(np.vdot(u, v)) - 1) < 1e-12


@pytest.mark.parametrize("source,target", itertools.product(BellLabel, BellLabel))
def test_bxor_matches_bilateral_cnot(source, target):
    state = np.kron(BELL_VECTORS[source], BELL_VECTORS[target])
    evolved = _cnot(1, 3) @ _cnot(0, 2) @ state
    new_source, new_target = bxor(source, target)
    assert _same_state(evolved, np.kron(BELL_VECTORS[new_source], BELL_VECTORS[new_target]))


@pytest.mark.parametrize("label", list(BellLabel))
def test_sigma_x_matches_unilateral_flip(label):
    evolved = np.kron(X, np.eye(2)) @ BELL_VECTORS[label]
    assert _same_state(evolved, BELL_VECTORS[sigma_x_relabel(label)])


@pytest.mark.parametrize("label", list(BellLabel))
def test_bx_matches_bilateral_rotation(label):
    r = (np.eye(2) - 1j * X) * SQ
    evolved = np.kron(r, r) @ BELL_VECTORS[label]
    assert _same_state(evolved, BELL_VECTORS[bx_relabel(label)])


@pytest.mark.parametrize("label", list(BellLabel))
@pytest.mark.parametrize("axis,op", [('z', Z), ('x', X)])
def test_measure_compare_matches_correlator(label, axis, op):
    v = BELL_VECTORS[label]
    correlator = np.real(np.vdot(v, np.kron(op, op) @ v))
    assert measure_compare(label, axis) == int(round((1 - correlator) / 2))


def test_measure_compare_rejects_unknown_axis():
    with pytest.raises(UsageError):
        measure_compare(BellLabel.PHI_PLUS, 'y')


def test_label_bits():
    assert [label.bits for label in BellLabel] == ['00', '01', '10', '11']
    assert BellLabel.from_bits(1, 0) == BellLabel.PHI_MINUS
    assert BellLabel.PSI_MINUS.phase == 1 and BellLabel.PSI_MINUS.amplitude == 1
    assert BellLabel.PHI_MINUS.symbol == 'Φ−'


@pytest.mark.parametrize("relabel", [sigma_x_relabel, bx_relabel, twirl_relabel])
def test_relabelings_are_involutions(relabel):
    for label in BellLabel:
        assert relabel(relabel(label)) == label


def test_twirl_swaps_minus_states():
    assert twirl_relabel(BellLabel.PHI_MINUS) == BellLabel.PSI_MINUS
    assert twirl_relabel(BellLabel.PHI_PLUS) == BellLabel.PHI_PLUS
    assert twirl_relabel(BellLabel.PSI_PLUS) == BellLabel.PSI_PLUS


def test_bxor_is_involution():
    for source, target in itertools.product(BellLabel, BellLabel):
        assert bxor(*bxor(source, target)) == (source, target)


def test_bxor_keeps_source_amplitude_and_target_phase():
    for source, target in itertools.product(BellLabel, BellLabel):
        new_source, new_target = bxor(source, target)
        assert new_source.amplitude == source.amplitude
        assert new_target.phase == target.phase
        assert new_target.amplitude == source.amplitude ^ target.amplitude
        assert new_source.phase == source.phase ^ target.phase


def test_bell_string_index_is_binary_reading():
    s = BellString.from_bits('00100111')
    assert s.labels == (BellLabel.PHI_PLUS, BellLabel.PHI_MINUS, BellLabel.PSI_PLUS, BellLabel.PSI_MINUS)
    assert s.to_index() == 0b00100111
    assert BellString.from_index(0b00100111, 4) == s
    assert str(s) == '00100111'


def test_bell_string_rejects_bad_input():
    with pytest.raises(UsageError):
        BellString.from_bits('001')
    with pytest.raises(UsageError):
        BellString.from_bits('0a')
    with pytest.raises(UsageError):
        BellString.from_index(16, 2)


def test_bxor_string_only_touches_named_pairs():
    s = BellString.from_bits('01101100')
    out = bxor_string(s, 1, 3)
    assert out[0] == s[0] and out[2] == s[2]
    assert (out[1], out[3]) == bxor(s[1], s[3])
    with pytest.raises(UsageError):
        bxor_string(s, 2, 2)


def test_f_is_a_bijection():
    assert sorted(f_table()) == list(range(256))


def test_f_equals_gate_sequence():
    for index in range(256):
        s = BellString.from_index(index, 4)
        assert f_circuit(s, F_CIRCUIT) == apply_f(s)


def test_f_reproduces_reference_rows():
    reference = load_reference_table(DEFAULT_TABLE_PATH)
    assert len(reference) == 64
    for row in reference.itertuples(index=False):
        assert apply_f(BellString.from_bits(row.input)).to_bits() == row.f_image
        assert row.f_image[:4] == row.marginal


def test_apply_f_examples():
    assert f_table()[0] == 0
    assert apply_f(BellString.from_bits('01010101')).to_bits() == '00000100'


def test_apply_f_needs_four_pairs():
    with pytest.raises(UsageError):
        apply_f(BellString.from_bits('000000'))


def test_bell_diagonal_validation():
    with pytest.raises(DomainError):
        BellDiagonal(0.5, 0.6, 0.0, -0.1)
    with pytest.raises(DomainError):
        BellDiagonal(0.5, 0.5, 0.1, 0.0)
    with pytest.raises(DomainError):
        BellDiagonal.werner(1.2)
    with pytest.raises(UsageError):
        BellDiagonal.from_sequence([0.5, 0.5])


def test_werner_state():
    w = BellDiagonal.werner(0.7)
    assert w.fidelity == 0.7
    assert w.is_werner()
    assert w.p01 == pytest.approx(0.1)
    assert not BellDiagonal(0.7, 0.2, 0.1, 0.0).is_werner()


def test_shannon_entropy_values():
    assert shannon_entropy([1, 0, 0, 0]) == 0
    assert shannon_entropy([0.5, 0.5]) == pytest.approx(1.0)
    assert shannon_entropy([0.25] * 4) == pytest.approx(2.0)
    assert werner_entropy(0.9) == pytest.approx(0.627492, abs=1e-6)


def test_shannon_entropy_is_permutation_invariant(random_dists):
    for dist in random_dists:
        p = dist.probabilities
        h = shannon_entropy(p)
        assert shannon_entropy(p[::-1]) == pytest.approx(h)
        assert 0 <= h <= 2 + 1e-12


def test_shannon_entropy_rejects_non_distributions():
    with pytest.raises(DomainError):
        shannon_entropy([0.5, 0.6])
    with pytest.raises(DomainError):
        shannon_entropy([1.5, -0.5])
