import itertools
import math

import numpy as np
import pytest

from ftlab.css import (
    CodeError,
    DeviationWitness,
    c_basis,
    code_space_mass,
    encode_basis,
    encode_logical_state,
    ideal_correct,
    is_recoverable,
    polynomial_code,
    recovery_fidelity,
    steane_code,
)
from ftlab.qsim import FactoredState, GateOp, SparseState, WeylError, fidelity

STEANE = steane_code()
POLY = polynomial_code(1, 7)


def test_steane_parameters():
    assert STEANE.block_size == 7 and STEANE.t == 1
    assert STEANE.logical_dimension == 2


def test_poly_parameters():
    assert POLY.block_size == 5 and POLY.t == 1
    assert POLY.logical_dimension == 7
    assert POLY.alphas == (1, 2, 3, 4, 5)
    # twists are the interpolation-at-zero weights, never zero
    assert all(t != 0 for t in POLY.fourier_twists)


def test_poly_rejects_small_field():
    with pytest.raises(CodeError):
        polynomial_code(1, 5)


def test_steane_encode_support():
    s0 = encode_basis(STEANE, 0)
    assert s0.support_size == 8
    # support is exactly the dual-Hamming codewords
    words = {tuple(int(x) for x in w) for w in STEANE.pair.c2.codewords()}
    assert {tuple(int(x) for x in row) for row in s0.labels} == words
    assert s0.norm() == pytest.approx(1)


def test_poly_encode_support_is_coset():
    for a in (0, 3):
        st = encode_basis(POLY, a)
        assert st.support_size == 49
        for row in st.labels:
            assert POLY.logical_value(row) == a
            assert POLY.pair.c1.contains(row)
        assert st.norm() == pytest.approx(1)


def test_s_basis_orthonormality():
    for code in (STEANE, POLY):
        states = [encode_basis(code, a) for a in range(code.p)]
        for i, si in enumerate(states):
            for j, sj in enumerate(states):
                expect = 1.0 if i == j else 0.0
                assert fidelity(si, sj) == pytest.approx(expect, abs=1e-9)


def test_c_basis_structure():
    # a = 0: uniform superposition of all |S_b>
    uniform = c_basis(POLY, [0, 0, 0, 0, 0])
    target = None
    for b in range(7):
        st = encode_basis(POLY, b)
        st.amps = st.amps / math.sqrt(7)
        target = st if target is None else SparseState(
            7, 5, np.vstack([target.labels, st.labels]),
            np.concatenate([target.amps, st.amps]),
        )
    assert fidelity(uniform, target) == pytest.approx(1, abs=1e-9)


def test_c_basis_membership_check():
    with pytest.raises(CodeError):
        c_basis(POLY, [1, 0, 0, 0, 0])


def test_c_basis_orthonormality():
    for code in (STEANE, POLY):
        # pick dual-of-C2 vectors with p distinct logical phase factors
        seen = {}
        duals = code.pair.c2.dual().codewords()
        for a_vec in duals:
            kappa = int(np.dot(a_vec, code.logical_one_rep) % code.p)
            if kappa not in seen:
                seen[kappa] = c_basis(code, a_vec)
        states = list(seen.values())
        assert len(states) == code.p
        for i, si in enumerate(states):
            for j, sj in enumerate(states):
                expect = 1.0 if i == j else 0.0
                assert fidelity(si, sj) == pytest.approx(expect, abs=1e-9)


def test_steane_bitwise_hadamard_gives_c0():
    st = encode_basis(STEANE, 0)
    for g in STEANE.basis_change_gates(range(7)):
        st.apply_gate(g)
    assert fidelity(st, c_basis(STEANE, [0] * 7)) == pytest.approx(1, abs=1e-9)


@pytest.mark.parametrize("a", range(7))
def test_poly_twisted_fourier_is_logical_fourier(a):
    st = encode_basis(POLY, a)
    for g in POLY.basis_change_gates(range(5)):
        st.apply_gate(st_prune(g), prune=0)
    w = np.exp(2j * np.pi / 7)
    expect_labels = []
    expect_amps = []
    for b in range(7):
        part = encode_basis(POLY, b)
        expect_labels.append(part.labels)
        expect_amps.append(part.amps * (w ** ((a * b) % 7)) / math.sqrt(7))
    target = SparseState(7, 5, np.vstack(expect_labels), np.concatenate(expect_amps))
    assert fidelity(st, target) == pytest.approx(1, abs=1e-9)


def st_prune(g):
    return g


def test_ideal_correct_fixed_point():
    for code in (STEANE, POLY):
        ref = encode_basis(code, 0)
        assert recovery_fidelity(ref.copy(), code, ref) == pytest.approx(1, abs=1e-9)


@pytest.mark.parametrize("code_name", ["steane", "poly"])
def test_ideal_correct_all_single_weyl_errors(code_name):
    code = STEANE if code_name == "steane" else POLY
    p, m = code.p, code.block_size
    for a in range(code.logical_dimension):
        ref = encode_basis(code, a)
        for pos in range(m):
            for ax in range(p):
                for bz in range(p):
                    if ax == 0 and bz == 0:
                        continue
                    st = ref.copy()
                    st.apply_weyl(WeylError(ax, bz, pos))
                    f = recovery_fidelity(st, code, ref)
                    assert f >= 1 - 1e-9, (a, pos, ax, bz, f)


def test_two_errors_in_block_can_defeat_t1():
    code = POLY
    ref = encode_basis(code, 2)
    broken = 0
    for (p1, p2) in itertools.combinations(range(5), 2):
        st = ref.copy()
        st.apply_weyl(WeylError(1, 0, p1))
        st.apply_weyl(WeylError(1, 0, p2))
        if recovery_fidelity(st, code, ref) < 1 - 1e-9:
            broken += 1
    assert broken > 0


def test_is_recoverable_api():
    ref = encode_basis(POLY, 1)
    st = ref.copy()
    st.apply_weyl(WeylError(2, 3, 4))
    assert is_recoverable(st, POLY, ref, k=1)
    with pytest.raises(CodeError):
        is_recoverable(st, POLY, ref, k=2)  # k beyond radius


def test_recoverable_one_error_per_block_two_blocks():
    logical = SparseState.basis(7, [2, 5])
    ref = encode_logical_state(POLY, logical)
    st = ref.copy()
    st.apply_weyl(WeylError(1, 0, 3))    # block 0
    st.apply_weyl(WeylError(0, 2, 5 + 1))  # block 1
    assert recovery_fidelity(st, POLY, ref) == pytest.approx(1, abs=1e-9)


def test_properness_random_states_land_in_code():
    rng = np.random.default_rng(17)
    for code in (STEANE, POLY):
        m, p = code.block_size, code.p
        for _ in range(25):
            size = int(rng.integers(2, 7))
            labels = rng.integers(0, p, size=(size, m))
            labels = np.unique(labels, axis=0)
            amps = rng.normal(size=len(labels)) + 1j * rng.normal(size=len(labels))
            amps /= np.linalg.norm(amps)
            st = SparseState(p, m, labels, amps)
            out = ideal_correct(st, code)
            assert out.norm() == pytest.approx(1, abs=1e-9)
            assert code_space_mass(out, code) == pytest.approx(1, abs=1e-9)


def test_degree_bound_corrector_variant():
    # decode against the degree-d subcode [5, 2, 4]
    sub_rows = [[1] * 5, list(POLY.alphas)]
    from ftlab.gfp import LinearCode

    sub = LinearCode.from_generator(sub_rows, 7)
    assert (sub.length, sub.dimension, sub.distance) == (5, 2, 4)
    # encoded states of the subcode: uniform over {a + c x} evaluations
    labels = [
        [(2 + c * al) % 7 for al in POLY.alphas] for c in range(7)
    ]
    st = SparseState(7, 5, labels, np.full(7, 1 / math.sqrt(7), dtype=complex))
    st.apply_weyl(WeylError(3, 0, 1))
    out = ideal_correct(st, POLY, degree_bound=1)
    fs = FactoredState.from_state(out)
    assert fs.try_discard(list(range(5, out.num_qupits)))
    ref = SparseState(7, 5, labels, np.full(7, 1 / math.sqrt(7), dtype=complex))
    assert fidelity(fs.flatten(list(range(5))), ref) == pytest.approx(1, abs=1e-9)


def test_degree_bound_rejected_for_steane():
    with pytest.raises(CodeError):
        ideal_correct(encode_basis(STEANE, 0), STEANE, degree_bound=1)


def test_sparse_witness_union():
    rng = np.random.default_rng(23)
    for _ in range(50):
        blocks, m = 3, 5
        def sample(k):
            pos = set()
            for b in range(blocks):
                take = rng.integers(0, k + 1)
                cols = rng.choice(m, size=take, replace=False)
                pos |= {(b, int(c)) for c in cols}
            return DeviationWitness(frozenset(pos), k)
        w1, w2 = sample(1), sample(2)
        u = w1.union(w2)
        assert u.bound == 3
        assert DeviationWitness.is_sparse(u.positions, 3)


def test_witness_bound_enforced():
    with pytest.raises(CodeError):
        DeviationWitness(frozenset({(0, 1), (0, 2)}), 1)
