"""Toffoli gate gadgets.

Polynomial family: three degree-2d factors exceed the interpolation range
m-1 = 4d, so the product cannot be taken coordinate-wise on the coded
blocks.  Instead each target coordinate gets a private fault-corrected
read of the two control blocks' logical values (cat-buffered weighted
reads plus a single-error syndrome adjustment), and the per-coordinate
product a*b is added transversally into the target block — adding the
constant polynomial a*b shifts the logical value by a*b.  The read lanes
are uncomputed exactly afterwards, so superposed logical inputs stay
coherent.  Ships for d = 1; larger d would need the interpolation-tree
reduction whose joint support is beyond desk scale.

p=2 family: the procedure skeleton — encoded cat states, the
(-1)^{a(bc+d)} phase transformation, x-rotations, m-fold parity
computation, majority-voted correction of the target block.  The
magic-ancilla preparation the construction consumes is stubbed behind
`AStatePrep` (non-fault-tolerant default), and the skeleton is verified at
subroutine level; its full encoded simulation is beyond sparse-support
budgets.
"""

from __future__ import annotations

import numpy as np

from ..css import CssCode, encode_basis
from ..qsim import GateOp, SparseState
from .base import Builder, Gadget, GadgetError
from .procedures import _sparse_check_rows, extract_parity


def _corrected_read_lane(b: Builder, data, check_rows, dest: int) -> None:
    """dest := logical value of the block, robust to one prior coordinate
    error: cat-buffered weighted read plus syndrome-located adjustment."""
    p = b.code.p
    weights = b.code.logical_read_weights
    extract_parity(b, [(q, int(w)) for q, w in zip(data, weights)], dest)
    h = np.asarray(check_rows, dtype=np.int64) % p
    sigmas = []
    for row in h:
        s = b.anc()
        extract_parity(b, [(q, int(c)) for q, c in zip(data, row)], s)
        sigmas.append(s)
    zs0 = b.zero_test(sigmas[0])
    zs1 = b.zero_test(sigmas[1])
    both_zero = b.anc()
    b.add_product(zs0, zs1, both_zero)
    for i in range(len(data)):
        r_i = b.anc()
        b.add_scaled_sum(sigmas[1], r_i, int(h[0, i]))
        b.sub_scaled_sum(sigmas[0], r_i, int(h[1, i]))
        z_i = b.zero_test(r_i)
        flag = b.anc()
        b.add(GateOp.controlled_sum(z_i, flag))
        b.add_product(z_i, both_zero, flag, coeff=p - 1)
        row = 0 if h[0, i] % p else 1
        eps = b.anc()
        b.add_scaled_sum(sigmas[row], eps, pow(int(h[row, i]), p - 2, p))
        scaled = b.anc()
        b.add_product(eps, flag, scaled)
        b.sub_scaled_sum(scaled, dest, int(weights[i]))


def toffoli_gadget_poly(code: CssCode) -> Gadget:
    if code.kind != "polynomial":
        raise GadgetError("this construction is for the polynomial family")
    if code.degree != 1:
        raise GadgetError(
            "toffoli ships for d=1; larger d needs the interpolation-tree "
            "reduction, which is beyond desk-scale simulation"
        )
    b = Builder(code, "toffoli_poly", "gate")
    blk_a = b.block()
    blk_b = b.block()
    blk_c = b.block()
    m, p = code.block_size, code.p
    check_rows = _sparse_check_rows(code.pair.c1.generator, p)
    reads_a = [b.anc() for _ in range(m)]
    reads_b = [b.anc() for _ in range(m)]
    mark = len(b.sequence)
    for j in range(m):
        _corrected_read_lane(b, blk_a, check_rows, reads_a[j])
        _corrected_read_lane(b, blk_b, check_rows, reads_b[j])
    recorded = list(b.sequence[mark:])
    for j in range(m):
        b.add(GateOp.toffoli(reads_a[j], reads_b[j], blk_c[j]))
    b.add_inverse_of(recorded)
    return b.build(meta={"logical": ("toffoli",)})


# -- p=2 Toffoli skeleton -------------------------------------------------------


class AStatePrep:
    """Interface for the magic-ancilla preparation the p=2 Toffoli consumes.

    Contract: a single internal fault may leave at most one deviated qubit
    per block of the prepared state.  The shipped default is the documented
    non-fault-tolerant stub below.
    """

    name = "abstract"

    def prepare(self, code: CssCode) -> SparseState:  # pragma: no cover
        raise NotImplementedError


class NonFaultTolerantAPrep(AStatePrep):
    """Direct construction of the ancilla sum_{x,y} |S_x S_y S_{xy}> / 2."""

    name = "non_fault_tolerant_stub"

    def prepare(self, code: CssCode) -> SparseState:
        if code.p != 2:
            raise GadgetError("the magic ancilla is a p=2 construction")
        pieces = []
        for x in (0, 1):
            for y in (0, 1):
                part = encode_basis(code, x)
                part = part.tensor(encode_basis(code, y))
                part = part.tensor(encode_basis(code, x & y))
                part.amps = part.amps / 2
                pieces.append(part)
        labels = np.vstack([s.labels for s in pieces])
        amps = np.concatenate([s.amps for s in pieces])
        return SparseState(2, 3 * code.block_size, labels, amps)


def encoded_cat_subroutine(code: CssCode, n_blocks: int) -> Gadget:
    """(|S_0>^n + |S_1>^n)/sqrt(2) from n pre-encoded |S_0> blocks: rotate
    the first block logically (bitwise Hadamard on the self-dual pair),
    then copy it transversally onto the others."""
    if code.p != 2:
        raise GadgetError("encoded cat states are a p=2 construction")
    b = Builder(code, f"encoded_cat_{n_blocks}", "subroutine")
    blocks = [b.block() for _ in range(n_blocks)]
    for q in blocks[0]:
        b.add(GateOp.hadamard(q))
    for other in blocks[1:]:
        for s, d in zip(blocks[0], other):
            b.add(GateOp.cnot(s, d))
    return b.build(meta={"logical": ("encoded_cat", n_blocks)})


def majority_vote_circuit(code: CssCode, x: int, y: int, z: int) -> Gadget:
    """maj(x,y,z) = xy + yz + zx into a fresh bit, controlling a correction
    of one data qubit — the parity-vote unit of the p=2 Toffoli."""
    if code.p != 2:
        raise GadgetError("the vote unit is built for p=2")
    b = Builder(code, "parity_vote", "subroutine")
    qx, qy, qz = b.anc(x), b.anc(y), b.anc(z)
    data = b.anc(0)
    maj = b.anc()
    b.add(GateOp.toffoli(qx, qy, maj))
    b.add(GateOp.toffoli(qy, qz, maj))
    b.add(GateOp.toffoli(qz, qx, maj))
    b.add(GateOp.cnot(maj, data))
    return b.build(blocks=(), output_blocks=((data,),), meta={"logical": ("vote",)})


def toffoli_gadget_p2(code: CssCode, n_cat_blocks: int | None = None,
                      a_prep: AStatePrep | None = None) -> Gadget:
    """The p=2 Toffoli skeleton around the stubbed magic ancilla: three
    encoded cat states, the (-1)^{a(bc+d)} phase transformation applied
    per cat block against per-block coordinate triples of the ancilla,
    x-rotations, per-cat bit extraction with m-fold parity repetition, and
    majority-voted corrections of the target block.

    `n_cat_blocks` (default m) can be reduced for desk-size verification.
    """
    if code.p != 2:
        raise GadgetError("p=2 construction")
    m = code.block_size
    n_cat = m if n_cat_blocks is None else n_cat_blocks
    prep = a_prep or NonFaultTolerantAPrep()
    b = Builder(code, "toffoli_p2_skeleton", "gate")
    anc_a = b.block()
    anc_b = b.block()
    anc_t = b.block()
    cats = []
    for _ in range(3):
        cat = [b.anc_block() for _ in range(n_cat)]
        for q in cat[0]:
            b.add(GateOp.hadamard(q))
        for other in cat[1:]:
            for s, d in zip(cat[0], other):
                b.add(GateOp.cnot(s, d))
        cats.append(cat)
    # phase transformation (-1)^{a(bc+d)}: per cat block i, compute
    # t = b_i c_i + d_i and apply a controlled logical Z from t to the block
    z_support = [l for l, w in enumerate(code.logical_read_weights) if w % 2]
    for cat in cats:
        for i, blk in enumerate(cat):
            idx = i % m
            t = b.anc()
            b.add(GateOp.toffoli(anc_a[idx], anc_b[idx], t))
            b.add(GateOp.cnot(anc_t[idx], t))
            for l in z_support:
                b.add(GateOp.hadamard(blk[l]))
                b.add(GateOp.cnot(t, blk[l]))
                b.add(GateOp.hadamard(blk[l]))
            b.add(GateOp.cnot(anc_t[idx], t))
            b.add(GateOp.toffoli(anc_a[idx], anc_b[idx], t))
    # rotate the cats; read each block's bit; compute the parity of the
    # bits in each cat independently m times
    votes = []
    for cat in cats:
        bits = []
        for blk in cat:
            for q in blk:
                b.add(GateOp.hadamard(q))
            bit = b.anc()
            for q in blk:
                b.add(GateOp.cnot(q, bit))
            bits.append(bit)
        copies = []
        for _ in range(m):
            acc = b.anc()
            for bit in bits:
                b.add(GateOp.cnot(bit, acc))
            copies.append(acc)
        votes.append(copies)
    # majority of the three parity lanes corrects each target qubit
    for l in range(m):
        x, y, z = votes[0][l], votes[1][l], votes[2][l]
        maj = b.anc()
        b.add(GateOp.toffoli(x, y, maj))
        b.add(GateOp.toffoli(y, z, maj))
        b.add(GateOp.toffoli(z, x, maj))
        b.add(GateOp.cnot(maj, anc_t[l]))
    return b.build(
        blocks=(anc_a, anc_b, anc_t),
        output_blocks=(anc_a, anc_b, anc_t),
        meta={"logical": ("toffoli_skeleton",), "a_prep": prep.name,
              "stub": "magic-ancilla preparation is not fault tolerant"},
    )
