"""CSS quantum codes over F_p built from nested classical code pairs.

Two shipped families:

* ``steane_code()`` — the p=2 [[7,1,3]] pair (C1 = Hamming [7,4,3],
  C2 = its dual), basis change = bitwise Hadamard.
* ``polynomial_code(d, p, alphas)`` — evaluation codes on m = 4d+1 distinct
  nonzero points with p > m+1: C1 = evaluations of polynomials of degree
  <= 2d (an [m, 2d+1, 2d+1] code, corrects exactly d errors), C2 the
  f(0) = 0 subcode.  The basis change is the bitwise Fourier with
  per-coordinate twists equal to the interpolation-at-zero weights c_l;
  with those twists the bitwise map is exactly the logical Fourier
  (|S_a> -> p^{-1/2} sum_b w^{ab} |S_b>), which is what makes the same
  C1 decoding work in both bases.

``ideal_correct`` is the mathematical two-basis corrector used as the
verification oracle everywhere: decode labels against C1 in the
computational basis, rotate with the basis-change gadget, decode again,
rotate back.  It is an isometry — the subtracted error patterns land in
appended garbage digits — so recoverability checks reduce to "garbage is
a tensor factor and the block fidelity is 1".
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .gfp import (
    ClassicalCodePair,
    FieldError,
    LinearCode,
    PrimeField,
    SyndromeTable,
    check_g_coefficient,
    lagrange_at_zero,
)
from .qsim import FactoredState, GateOp, SparseState, fidelity

HAMMING_G = [
    [1, 0, 0, 0, 0, 1, 1],
    [0, 1, 0, 0, 1, 0, 1],
    [0, 0, 1, 0, 1, 1, 0],
    [0, 0, 0, 1, 1, 1, 1],
]


class CodeError(ValueError):
    pass


@dataclass(frozen=True)
class CssCode:
    """A CSS code encoding one logical qupit per block of m physical qupits."""

    pair: ClassicalCodePair
    kind: str  # "linear_p2" or "polynomial"
    fourier_twists: tuple[int, ...]  # per-coordinate r_l of the basis change
    logical_read_weights: tuple[int, ...]  # a = sum_l w_l v_l on C1 labels
    logical_one_rep: tuple[int, ...]  # codeword representing logical 1
    rotated_code: LinearCode  # classical code decoded in the rotated basis
    alphas: tuple[int, ...] | None = None
    degree: int | None = None  # d: number of correctable errors (polynomial)
    tables: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def p(self) -> int:
        return self.pair.p

    @property
    def block_size(self) -> int:
        return self.pair.length

    @property
    def t(self) -> int:
        """Correctable errors per block."""
        return (self.pair.distance - 1) // 2

    @property
    def logical_dimension(self) -> int:
        return self.pair.logical_dimension()

    def table_for(self, code: LinearCode) -> SyndromeTable:
        key = code.generator.tobytes()
        if key not in self.tables:
            self.tables[key] = SyndromeTable.build(code)
        return self.tables[key]

    def logical_value(self, label) -> int:
        return int(
            sum(w * int(v) for w, v in zip(self.logical_read_weights, label)) % self.p
        )

    def coset_labels(self, a: int) -> np.ndarray:
        """All labels of the coset carrying logical value a."""
        rep = (a * np.array(self.logical_one_rep, dtype=np.int64)) % self.p
        return (self.pair.c2.codewords() + rep) % self.p

    def basis_change_gates(self, block, inverse: bool = False) -> list[GateOp]:
        """Bitwise basis-change gadget on the given block qupit indices."""
        gates = []
        for qupit, r in zip(block, self.fourier_twists):
            if self.p == 2:
                gates.append(GateOp.hadamard(qupit))
            else:
                gates.append(GateOp.fourier(qupit, (self.p - r) % self.p if inverse else r))
        return gates


def steane_code() -> CssCode:
    c1 = LinearCode.from_generator(HAMMING_G, 2)
    pair = ClassicalCodePair.build(HAMMING_G, c1.parity_check, 2)
    # logical value of a C1 label is its parity; logical 1 is the all-ones word
    return CssCode(
        pair=pair,
        kind="linear_p2",
        fourier_twists=(1,) * 7,
        logical_read_weights=(1,) * 7,
        logical_one_rep=(1,) * 7,
        rotated_code=pair.c2.dual(),
    )


def _evaluation_rows(alphas, degree, p):
    return [[pow(a, j, p) for a in alphas] for j in range(degree + 1)]


def polynomial_code(d: int = 1, p: int = 7, alphas=None) -> CssCode:
    """Evaluation-code CSS pair with m = 4d+1 points, correcting d errors."""
    m = 4 * d + 1
    if p <= m + 1:
        raise CodeError(f"need p > m+1 = {m + 1}, got {p}")
    candidates = [list(alphas)] if alphas is not None else []
    if alphas is None:
        candidates.append(list(range(1, m + 1)))
        candidates.extend(
            list(c) for c in itertools.combinations(range(1, p), m)
        )
    chosen = None
    for cand in candidates:
        if len(set(cand)) != m or 0 in [a % p for a in cand]:
            if alphas is not None:
                raise CodeError("evaluation points must be distinct and nonzero")
            continue
        if check_g_coefficient(cand, p, d) != 0:
            chosen = cand
            break
        if alphas is not None:
            raise CodeError(
                f"points {cand} rejected: x^{2 * d} coefficient of the root "
                "polynomial vanishes"
            )
    if chosen is None:
        raise CodeError("no admissible evaluation-point set found")
    g1 = _evaluation_rows(chosen, 2 * d, p)
    g2 = g1[1:]  # f(0) = 0 subspace: no constant row
    pair = ClassicalCodePair.build(g1, g2, p)
    if pair.distance != 2 * d + 1:
        raise CodeError("unexpected pair distance")
    twists = tuple(lagrange_at_zero(chosen, p))
    return CssCode(
        pair=pair,
        kind="polynomial",
        fourier_twists=twists,
        logical_read_weights=twists,
        logical_one_rep=(1,) * m,
        rotated_code=pair.c1,
        alphas=tuple(a % p for a in chosen),
        degree=d,
    )


# -- encoded states -----------------------------------------------------------


def encode_basis(code: CssCode, a: int) -> SparseState:
    """|S_a> = |C2|^{-1/2} sum over the coset carrying logical value a."""
    if not 0 <= a < code.logical_dimension:
        raise CodeError(f"invalid logical label {a}")
    labels = code.coset_labels(a)
    amps = np.full(len(labels), 1 / np.sqrt(len(labels)), dtype=np.complex128)
    return SparseState(code.p, code.block_size, labels, amps)


def encode_logical_state(code: CssCode, logical: SparseState) -> SparseState:
    """Blockwise encoding of an arbitrary logical register state."""
    blocks = [encode_basis(code, a) for a in range(code.p)]
    out = None
    for row, amp in zip(logical.labels, logical.amps):
        piece_labels = None
        for a in row:
            part = blocks[int(a)]
            if piece_labels is None:
                piece_labels = part.labels
                piece_amps = part.amps * amp
            else:
                s1, s2 = len(piece_labels), len(part.labels)
                piece_labels = np.hstack(
                    [np.repeat(piece_labels, s2, axis=0), np.tile(part.labels, (s1, 1))]
                )
                piece_amps = np.repeat(piece_amps, s2) * np.tile(part.amps, s1)
        if out is None:
            labels, amps = piece_labels, piece_amps
        else:
            labels = np.vstack([labels, piece_labels])
            amps = np.concatenate([amps, piece_amps])
    return SparseState(code.p, code.block_size * logical.num_qupits, labels, amps)


def c_basis(code: CssCode, a_vector) -> SparseState:
    """|C_a> = z^{-1/2} sum_b w^{a.b} |S_b> for a in the dual of C2."""
    p = code.p
    a_vec = np.asarray(list(a_vector), dtype=np.int64) % p
    if np.any((code.pair.c2.generator @ a_vec) % p != 0):
        raise CodeError("label vector is not orthogonal to C2")
    kappa = int(np.dot(a_vec, code.logical_one_rep) % p)
    w = np.exp(2j * np.pi / p)
    out = None
    for b in range(p):
        part = encode_basis(code, b)
        part.amps = part.amps * (w ** ((kappa * b) % p)) / np.sqrt(p)
        if out is None:
            labels, amps = part.labels, part.amps
        else:
            labels = np.vstack([labels, part.labels])
            amps = np.concatenate([amps, part.amps])
        out = True
    return SparseState(p, code.block_size, labels, amps)


# -- ideal correction oracle ---------------------------------------------------


def _decode_pass(state: SparseState, block, code_cls: LinearCode, table: SyndromeTable):
    """Label rewrite v -> v - leader(syndrome(v)) on one block; the syndrome
    digits are appended as garbage qupits (making the pass an isometry)."""
    p = state.p
    h = code_cls.parity_check
    sub = state.labels[:, block].astype(np.int64)
    syndromes = (sub @ h.T) % p
    # leader lookup, vectorized over distinct syndromes (packed int keys)
    keys = np.zeros(len(syndromes), dtype=np.int64)
    for c in range(syndromes.shape[1]):
        keys = keys * p + syndromes[:, c]
    uniq_keys, inverse = np.unique(keys, return_inverse=True)
    leaders = np.zeros((len(uniq_keys), code_cls.length), dtype=np.int64)
    for i, key in enumerate(uniq_keys):
        digits = []
        x = int(key)
        for _ in range(syndromes.shape[1]):
            digits.append(x % p)
            x //= p
        e, _ = table.lookup(tuple(digits[::-1]))
        leaders[i] = e
    corrected = (sub - leaders[inverse]) % p
    new_labels = state.labels.copy()
    new_labels[:, block] = corrected.astype(np.uint8)
    new_labels = np.hstack([new_labels, syndromes[inverse].astype(np.uint8)])
    return SparseState(p, new_labels.shape[1], new_labels, state.amps)


def ideal_correct(
    state: SparseState, code: CssCode, blocks=None, degree_bound: int | None = None
) -> SparseState:
    """Two-basis corrector as an isometry: returns the corrected state with
    garbage (syndrome digits) appended after the original qupits.

    `degree_bound` (polynomial codes) decodes shifts against the evaluation
    code of that degree instead of the code's own bound 2d.  Only the code's
    own degree carries the self-dual twist, so the degree-bound variant is
    the classical shift corrector (single pass, no basis change).
    """
    if blocks is None:
        if state.num_qupits % code.block_size:
            raise CodeError("state is not a whole number of blocks")
        blocks = [
            tuple(range(b * code.block_size, (b + 1) * code.block_size))
            for b in range(state.num_qupits // code.block_size)
        ]
    if degree_bound is not None:
        if code.kind != "polynomial":
            raise CodeError("degree_bound applies to polynomial codes only")
        base = LinearCode.from_generator(
            _evaluation_rows(code.alphas, degree_bound, code.p), code.p
        )
        table = code.table_for(base)
        out = state.copy()
        for block in blocks:
            out = _decode_pass(out, block, base, table)
        return out
    base = code.pair.c1
    rotated = code.rotated_code
    base_table = code.table_for(base)
    rot_table = code.table_for(rotated)
    out = state.copy()
    for block in blocks:
        out = _decode_pass(out, block, base, base_table)
        for g in code.basis_change_gates(block):
            out.apply_gate(g)
        out = _decode_pass(out, block, rotated, rot_table)
        for g in code.basis_change_gates(block, inverse=True):
            out.apply_gate(g)
    return out


def recovery_fidelity(
    state: SparseState, code: CssCode, reference: SparseState, blocks=None
) -> float:
    """Fidelity between ideal-corrected `state` and `reference` on the data
    qupits; 0.0 if the correction garbage stays entangled with the data."""
    n = state.num_qupits
    corrected = ideal_correct(state, code, blocks)
    fs = FactoredState.from_state(corrected)
    if not fs.try_discard(list(range(n, corrected.num_qupits))):
        return 0.0
    return fidelity(fs.flatten(list(range(n))), reference)


def is_recoverable(
    state: SparseState, code: CssCode, reference: SparseState, k: int | None = None
) -> bool:
    """Operational recoverability: ideal correction of every block yields the
    reference encoded state exactly (to 1e-9)."""
    if k is not None and k > code.t:
        raise CodeError(f"k={k} exceeds the correction radius t={code.t}")
    return recovery_fidelity(state, code, reference) >= 1 - 1e-9


def code_space_mass(state: SparseState, code: CssCode) -> float:
    """Total squared overlap of a one-block state (with trailing garbage
    qupits allowed) with the code space, i.e. Tr(P rho) for the reduced
    block state."""
    m = code.block_size
    basis = [encode_basis(code, a) for a in range(code.p)]
    coset_amp = {}
    for a, st in enumerate(basis):
        for row, amp in zip(st.labels, st.amps):
            coset_amp[tuple(int(x) for x in row)] = (a, complex(amp))
    garbage_groups: dict[tuple, np.ndarray] = {}
    for row, amp in zip(state.labels, state.amps):
        key = tuple(int(x) for x in row[m:])
        acc = garbage_groups.setdefault(key, np.zeros(code.p, dtype=np.complex128))
        hit = coset_amp.get(tuple(int(x) for x in row[:m]))
        if hit is not None:
            a, basis_amp = hit
            acc[a] += np.conj(basis_amp) * amp
    return float(sum(np.sum(np.abs(v) ** 2) for v in garbage_groups.values()))


# -- sparse sets and deviation witnesses ---------------------------------------


@dataclass(frozen=True)
class DeviationWitness:
    """A k-sparse set of (block, position) pairs."""

    positions: frozenset
    bound: int

    def __post_init__(self):
        if not self.is_sparse(self.positions, self.bound):
            raise CodeError("witness exceeds its sparsity bound")

    @staticmethod
    def is_sparse(positions, k: int) -> bool:
        per_block: dict[int, int] = {}
        for block, _ in positions:
            per_block[block] = per_block.get(block, 0) + 1
        return all(v <= k for v in per_block.values())

    def union(self, other: "DeviationWitness") -> "DeviationWitness":
        return DeviationWitness(
            self.positions | other.positions, self.bound + other.bound
        )
