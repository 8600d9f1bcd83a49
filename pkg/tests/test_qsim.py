import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ftlab.qsim import (
    EntangledError,
    FactoredState,
    GateOp,
    SimulationError,
    SparseState,
    WeylError,
    fidelity,
    gate_unitary,
    to_dense,
    uniform_state,
    weyl_unitary,
)


def test_add_const_shift():
    st7 = SparseState.basis(7, [2])
    st7.apply_gate(GateOp.add_const(0, 3))
    assert st7.amplitude([5]) == pytest.approx(1)


def test_fourier_uniform_row():
    st7 = SparseState.basis(7, [0])
    st7.apply_gate(GateOp.fourier(0, 1))
    assert st7.support_size == 7
    for b in range(7):
        assert st7.amplitude([b]) == pytest.approx(1 / math.sqrt(7))


def test_toffoli_mult_add():
    st7 = SparseState.basis(7, [2, 3, 1])
    st7.apply_gate(GateOp.toffoli(0, 1, 2))
    assert st7.amplitude([2, 3, 0]) == pytest.approx(1)  # 1 + 6 mod 7


def test_scalar_mul_zero_rejected():
    st7 = SparseState.basis(7, [1])
    with pytest.raises(SimulationError):
        st7.apply_gate(GateOp.scalar_mul(0, 7))


def test_target_out_of_range():
    st7 = SparseState.basis(7, [1])
    with pytest.raises(SimulationError):
        st7.apply_gate(GateOp.add_const(3, 1))


def test_weyl_identity_and_flips():
    s = SparseState.basis(2, [0])
    s.apply_weyl(WeylError(0, 0, 0))
    assert s.amplitude([0]) == pytest.approx(1)
    s.apply_weyl(WeylError(1, 0, 0))
    assert s.amplitude([1]) == pytest.approx(1)
    plus = SparseState.from_amplitudes(
        2, 1, {(0,): 1 / math.sqrt(2), (1,): 1 / math.sqrt(2)}
    )
    plus.apply_weyl(WeylError(0, 1, 0))
    assert plus.amplitude([0]) == pytest.approx(1 / math.sqrt(2))
    assert plus.amplitude([1]) == pytest.approx(-1 / math.sqrt(2))


def test_measure_deterministic():
    s = SparseState.basis(7, [0])
    dist, collapsed = s.measure_basic(0)
    assert dist == {0: pytest.approx(1.0)}
    assert fidelity(collapsed[0], s) == pytest.approx(1)


def test_measure_bell_type():
    bell = SparseState.from_amplitudes(
        2, 2, {(0, 0): 1 / math.sqrt(2), (1, 1): 1 / math.sqrt(2)}
    )
    dist, collapsed = bell.measure_basic(0)
    assert dist[0] == pytest.approx(0.5)
    assert dist[1] == pytest.approx(0.5)
    assert collapsed[0].amplitude([0, 0]) == pytest.approx(1)
    assert collapsed[1].amplitude([1, 1]) == pytest.approx(1)


def test_measure_uniform_fourier():
    s = uniform_state(7, 1)
    dist, _ = s.measure_basic(0)
    for b in range(7):
        assert dist[b] == pytest.approx(1 / 7, abs=1e-9)


def test_fidelity_basic():
    a = SparseState.basis(7, [1, 2])
    assert fidelity(a, a) == pytest.approx(1)
    b = SparseState.basis(7, [1, 3])
    assert fidelity(a, b) == pytest.approx(0)


def test_fidelity_shape_mismatch():
    with pytest.raises(SimulationError):
        fidelity(SparseState.basis(7, [0]), SparseState.basis(7, [0, 0]))


# -- dense oracle: every gate kind on all basis states, n <= 3 ----------------


@pytest.mark.parametrize(
    "p,gate",
    [
        (7, GateOp.add_const(1, 3)),
        (7, GateOp.controlled_sum(0, 2)),
        (7, GateOp.scalar_mul(1, 4)),
        (7, GateOp.toffoli(0, 1, 2)),
        (7, GateOp.phase(2, 5)),
        (7, GateOp.fourier(1, 2)),
        (5, GateOp.fourier(0, 3)),
        (2, GateOp.not2(1)),
        (2, GateOp.hadamard(0)),
        (2, GateOp.phase_i(2)),
        (2, GateOp.cnot(2, 0)),
        (2, GateOp.toffoli(0, 1, 2)),
    ],
)
def test_gate_matches_dense_oracle(p, gate):
    n = 3
    U = gate_unitary(gate, p, n)
    assert np.allclose(U.conj().T @ U, np.eye(p**n), atol=1e-12)
    for basis_index in range(p**n):
        digits = []
        x = basis_index
        for _ in range(n):
            digits.append(x % p)
            x //= p
        digits = digits[::-1]
        s = SparseState.basis(p, digits)
        s.apply_gate(gate, prune=0)
        dense_in = np.zeros(p**n, dtype=complex)
        dense_in[basis_index] = 1
        assert np.allclose(to_dense(s), U @ dense_in, atol=1e-12)


@pytest.mark.parametrize("p", [2, 5, 7])
def test_weyl_matches_dense_oracle(p):
    rng = np.random.default_rng(3)
    for _ in range(10):
        a, b = int(rng.integers(0, p)), int(rng.integers(0, p))
        e = WeylError(a, b, 1)
        U = weyl_unitary(e, p, 2)
        assert np.allclose(U.conj().T @ U, np.eye(p**2), atol=1e-12)
        amps = rng.normal(size=p**2) + 1j * rng.normal(size=p**2)
        amps /= np.linalg.norm(amps)
        labels = list(itertools.product(range(p), repeat=2))
        s = SparseState(p, 2, labels, amps)
        vec = to_dense(s)
        s.apply_weyl(e)
        assert np.allclose(to_dense(s), U @ vec, atol=1e-12)


@pytest.mark.parametrize("p", [2, 5, 7])
def test_fourier_inverse_roundtrip(p):
    rng = np.random.default_rng(p)
    amps = rng.normal(size=p) + 1j * rng.normal(size=p)
    amps /= np.linalg.norm(amps)
    s = SparseState(p, 1, [[v] for v in range(p)], amps)
    ref = s.copy()
    if p == 2:
        s.apply_gate(GateOp.hadamard(0), prune=0)
        s.apply_gate(GateOp.hadamard(0), prune=0)
    else:
        s.apply_gate(GateOp.fourier(0, 1), prune=0)
        s.apply_gate(GateOp.fourier(0, p - 1), prune=0)
    for v in range(p):
        assert s.amplitude([v]) == pytest.approx(ref.amplitude([v]), abs=1e-12)


@given(
    st.integers(0, 6),
    st.integers(0, 6),
    st.sampled_from(["add_const", "scalar_mul", "phase"]),
)
@settings(max_examples=40)
def test_norm_preserved(v, c, kind):
    s = uniform_state(7, 2)
    if kind == "add_const":
        s.apply_gate(GateOp.add_const(0, c))
    elif kind == "scalar_mul":
        s.apply_gate(GateOp.scalar_mul(0, c if c else 1))
    else:
        s.apply_gate(GateOp.phase(1, c))
    s.apply_weyl(WeylError(v, c, 0))
    assert s.norm() == pytest.approx(1, abs=1e-9)


def test_permutation_gates_preserve_support():
    s = uniform_state(7, 3)
    before = s.support_size
    for g in [
        GateOp.add_const(0, 2),
        GateOp.controlled_sum(0, 1),
        GateOp.scalar_mul(2, 3),
        GateOp.toffoli(0, 1, 2),
        GateOp.phase(1, 4),
    ]:
        s.apply_gate(g)
        assert s.support_size == before


def test_dump_json_roundtrip_deterministic():
    s = uniform_state(5, 2)
    s.apply_gate(GateOp.phase(0, 2))
    text = s.dump_json()
    loaded = SparseState.load_json(text)
    assert fidelity(s, loaded) == pytest.approx(1, abs=1e-12)
    assert loaded.dump_json() == text


# -- factored states -----------------------------------------------------------


def test_factored_matches_flat_on_merge():
    rng = np.random.default_rng(5)
    fs = FactoredState(7)
    fs.add_basis_qupits([1])
    fs.add_basis_qupits([2])
    fs.add_basis_qupits([0])
    flat = SparseState.basis(7, [1, 2, 0])
    gates = [
        GateOp.fourier(0, 1),
        GateOp.controlled_sum(0, 1),
        GateOp.toffoli(0, 1, 2),
        GateOp.phase(2, 3),
        GateOp.add_const(1, 5),
        GateOp.fourier(1, 2),
        GateOp.controlled_sum(2, 0),
    ]
    for g in gates:
        fs.apply_gate(g, prune=0)
        flat.apply_gate(g, prune=0)
    assert fidelity(fs.flatten(), flat) == pytest.approx(1, abs=1e-9)


def test_factored_constant_control_avoids_merge():
    fs = FactoredState(7)
    fs.add_basis_qupits([3])  # factor A: constant column
    fs.add_basis_qupits([0])
    fs.factors[1].apply_gate(GateOp.fourier(0, 1))  # factor B superposed
    fs.apply_gate(GateOp.controlled_sum(0, 1))
    # control was constant: factors must remain separate
    assert len(fs.factors) == 2
    flat = SparseState.basis(7, [3, 0])
    flat.apply_gate(GateOp.fourier(1, 1))
    flat.apply_gate(GateOp.controlled_sum(0, 1))
    assert fidelity(fs.flatten(), flat) == pytest.approx(1, abs=1e-9)


def test_factored_entangling_control_merges():
    fs = FactoredState(7)
    fs.add_basis_qupits([0])
    fs.add_basis_qupits([0])
    fs.apply_gate(GateOp.fourier(0, 1))
    fs.apply_gate(GateOp.controlled_sum(0, 1))  # genuinely entangling
    assert len(fs.factors) == 1
    flat = SparseState.basis(7, [0, 0])
    flat.apply_gate(GateOp.fourier(0, 1))
    flat.apply_gate(GateOp.controlled_sum(0, 1))
    assert fidelity(fs.flatten(), flat) == pytest.approx(1, abs=1e-9)


def test_discard_product_register():
    fs = FactoredState(7)
    fs.add_basis_qupits([0, 4])
    fs.apply_gate(GateOp.fourier(0, 1))
    fs.discard([1])
    assert fs.flatten([0]).support_size == 7


def test_discard_entangled_register_raises():
    fs = FactoredState(7)
    fs.add_basis_qupits([0, 0])
    fs.apply_gate(GateOp.fourier(0, 1))
    fs.apply_gate(GateOp.controlled_sum(0, 1))
    with pytest.raises(EntangledError):
        fs.discard([1])
    assert not fs.try_discard([1])


def test_discard_product_within_factor():
    # build |psi> x |phi> inside one factor, then split it
    a = uniform_state(7, 1)
    b = SparseState.basis(7, [3])
    joint = a.tensor(b)
    fs = FactoredState.from_state(joint)
    fs.discard([1])
    assert fidelity(fs.flatten([0]), a) == pytest.approx(1, abs=1e-9)


def test_flatten_subset_entangled_raises():
    fs = FactoredState(7)
    fs.add_basis_qupits([0, 0])
    fs.apply_gate(GateOp.fourier(0, 1))
    fs.apply_gate(GateOp.controlled_sum(0, 1))
    with pytest.raises(SimulationError):
        fs.flatten([0])


def test_factored_weyl_and_measure():
    fs = FactoredState(2)
    fs.add_basis_qupits([0])
    fs.add_basis_qupits([0])
    fs.apply_gate(GateOp.hadamard(1))
    fs.apply_weyl(WeylError(1, 0, 0))
    dist, _ = fs.measure_basic(0)
    assert dist == {1: pytest.approx(1.0)}
    dist2, _ = fs.measure_basic(1)
    assert dist2[0] == pytest.approx(0.5) and dist2[1] == pytest.approx(0.5)
