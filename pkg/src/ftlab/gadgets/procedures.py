"""Fault-tolerant correction, initialization, and reading procedures.

The common primitive is a cat-buffered parity read: to compute a weighted
parity of data coordinates into a syndrome qupit without letting a single
ancilla fault kick a multi-coordinate phase back onto the data, a spread
cat register Sigma_c |c*k_1, ..., c*k_w> with sum(k_i) = 0 takes the
per-coordinate kicks — each data coordinate interacts with one private cat
qupit — and the collected sum is branch-independent.  The cat head is then
un-prepared, so the transient support cost is a single factor of p.

Decoding circuits are kept per-copy: the syndrome feeding the fix (or
replacement) of data coordinate j is extracted independently for each j,
so a corrupted syndrome lane touches exactly one output coordinate.
"""

from __future__ import annotations

import numpy as np

from ..css import CssCode
from ..gfp import PrimeField
from ..qsim import GateOp
from .base import Builder, Gadget, GadgetError


def _sparse_check_rows(code_matrix_null_of, p: int) -> np.ndarray:
    """Low-weight basis of the nullspace of the given generator: for each
    window of consecutive coordinates just wide enough to admit a null
    vector, take it.  Falls back to the plain nullspace basis."""
    field = PrimeField(p)
    g = field.reduce(code_matrix_null_of)
    k, m = g.shape
    width = k + 1
    rows = []
    for start in range(m - width + 1):
        cols = list(range(start, start + width))
        sub = g[:, cols]
        ns = field.nullspace(sub)
        if len(ns) != 1:
            continue
        row = np.zeros(m, dtype=np.int64)
        row[cols] = ns[0]
        rows.append(row)
        if len(rows) == m - k:
            break
    if len(rows) == m - k and field.rank(np.array(rows)) == m - k:
        return np.array(rows) % p
    return field.nullspace(g)


def extract_parity(b: Builder, terms, sigma: int) -> None:
    """sigma += sum_q coeff_q * v_q through a cat buffer."""
    p = b.code.p
    terms = [(q, h % p) for q, h in terms if h % p]
    w = len(terms)
    if w == 0:
        return
    n_tails = w
    if p == 2:
        if w % 2 == 1:
            n_tails += 1  # pad so the branch contributions cancel
        k_pattern = [1] * n_tails
    else:
        if (n_tails - 1) % p == 0:
            n_tails += 1
        k_pattern = [1] * (n_tails - 1) + [(-(n_tails - 1)) % p]
    head = b.anc()
    tails = [b.anc() for _ in range(n_tails)]
    b.add(GateOp.hadamard(head) if p == 2 else GateOp.fourier(head, 1))
    for tail, k in zip(tails, k_pattern):
        b.add_scaled_sum(head, tail, k)
    for (q, h), tail in zip(terms, tails):
        b.add_scaled_sum(q, tail, h)
    for tail in tails:
        b.add(GateOp.cnot(tail, sigma) if p == 2 else GateOp.controlled_sum(tail, sigma))
    for tail, k in zip(tails, k_pattern):
        b.sub_scaled_sum(head, tail, k)
    b.add(GateOp.hadamard(head) if p == 2 else GateOp.fourier(head, p - 1))


def _extract_syndrome(b: Builder, data, check_rows, buffered: bool) -> list[int]:
    """One syndrome qupit per check row; cat-buffered when the data block
    must be protected from collective phase kickback."""
    sigmas = []
    for row in check_rows:
        sigma = b.anc()
        terms = [(data[i], int(h)) for i, h in enumerate(row) if h % b.code.p]
        if buffered:
            extract_parity(b, terms, sigma)
        else:
            for q, h in terms:
                b.add_scaled_sum(q, sigma, h)
        sigmas.append(sigma)
    return sigmas


def _prepare_s0_block(b: Builder) -> tuple[int, ...]:
    """Non-fault-tolerant |S_0> preparation on a fresh block (used only as
    the replacement source in overflow branches; a fault here coincides
    with an overflow only at fault order two)."""
    code = b.code
    p, m = code.p, code.block_size
    block = b.anc_block()
    g2 = code.pair.c2.generator
    k2 = g2.shape[0]
    scratch = []
    for _ in range(k2):
        s = b.anc()
        b.add(GateOp.hadamard(s) if p == 2 else GateOp.fourier(s, 1))
        scratch.append(s)
    for k in range(k2):
        for l in range(m):
            b.add_scaled_sum(scratch[k], block[l], int(g2[k, l]))
    # uncompute the scratches from an information set of C2
    field = PrimeField(p)
    _, pivots = field.rref(g2)
    sub = g2[:, pivots]
    inv = _invert(sub, p)
    for k in range(k2):
        for j, col in enumerate(pivots):
            b.sub_scaled_sum(block[col], scratch[k], int(inv[k, j]))
    return block


def _invert(mat, p: int) -> np.ndarray:
    field = PrimeField(p)
    m = field.reduce(mat)
    k = m.shape[0]
    aug = np.hstack([m, np.eye(k, dtype=np.int64)])
    red, pivots = field.rref(aug)
    if pivots[:k] != list(range(k)):
        raise GadgetError("matrix not invertible")
    return red[:, k:]


def _decode_fix_poly(b: Builder, sigmas, data_j: int, position: int,
                     check_rows, s0_qupit: int | None) -> None:
    """Single-error locate/fix of one data coordinate from a private
    2-qupit syndrome, plus the overflow replacement path."""
    p = b.code.p
    h = np.asarray(check_rows, dtype=np.int64) % p
    if h.shape[0] != 2:
        raise GadgetError("t=1 locator expects a 2-row check matrix")
    m = h.shape[1]
    s0q, s1q = sigmas
    z_flags = []
    for i in range(m):
        r_i = b.anc()
        b.add_scaled_sum(s1q, r_i, int(h[0, i]))
        b.sub_scaled_sum(s0q, r_i, int(h[1, i]))
        z_flags.append(b.zero_test(r_i))
    zs0 = b.zero_test(s0q)
    zs1 = b.zero_test(s1q)
    both_zero = b.anc()
    b.add_product(zs0, zs1, both_zero)
    # fix flag for this position: F = z_j * (1 - both_zero)
    fix_flag = b.anc()
    b.add(GateOp.controlled_sum(z_flags[position], fix_flag))
    b.add_product(z_flags[position], both_zero, fix_flag, coeff=p - 1)
    # error value from a row with nonzero entry at this position
    row = 0 if h[0, position] % p else 1
    eps = b.anc()
    b.add_scaled_sum(sigmas[row], eps, pow(int(h[row, position]), p - 2, p))
    b.add_product(eps, fix_flag, data_j, coeff=p - 1)
    if s0_qupit is not None:
        # overflow = sigma != 0 and no position matched
        acc = b.anc(1)
        for z in z_flags:
            notz = b.anc(1)
            b.sub_scaled_sum(z, notz, 1)
            nxt = b.anc()
            b.add_product(acc, notz, nxt)
            acc = nxt
        not_bz = b.anc(1)
        b.sub_scaled_sum(both_zero, not_bz, 1)
        overflow = b.anc()
        b.add_product(acc, not_bz, overflow)
        # conditional swap with the replacement |S_0> coordinate
        diff = b.anc()
        b.add(GateOp.controlled_sum(s0_qupit, diff))
        b.sub_scaled_sum(data_j, diff, 1)
        b.add_product(overflow, diff, data_j)
        b.add_product(overflow, diff, s0_qupit, coeff=p - 1)


def _decode_fix_p2(b: Builder, sigmas, data_j: int, position: int, check_rows) -> None:
    """Perfect-code fix of one bit: flip iff the syndrome equals column j."""
    col = [int(r[position]) % 2 for r in check_rows]
    flips = [s for s, c in zip(sigmas, col) if c == 0]
    for s in flips:
        b.add(GateOp.not2(s))
    acc = sigmas[0]
    for s in sigmas[1:]:
        nxt = b.anc()
        b.add(GateOp.toffoli(acc, s, nxt))
        acc = nxt
    b.add(GateOp.cnot(acc, data_j))
    for s in flips:
        b.add(GateOp.not2(s))


def _correction_pass(b: Builder, data, check_rows, with_replacement: bool) -> None:
    code = b.code
    m = code.block_size
    s0_block = _prepare_s0_block(b) if with_replacement else None
    for j in range(m):
        sigmas = _extract_syndrome(b, data, check_rows, buffered=True)
        if code.p == 2:
            _decode_fix_p2(b, sigmas, data[j], j, check_rows)
        else:
            _decode_fix_poly(
                b, sigmas, data[j], j, check_rows,
                s0_block[j] if s0_block is not None else None,
            )


def correction_gadget(code: CssCode) -> Gadget:
    """Measurement-free two-basis correction of one block: per-coordinate
    syndrome copies, locate/fix, overflow replacement from |S_0> (polynomial
    family), repeated in the rotated basis."""
    b = Builder(code, f"correction_{code.kind}", "correction")
    data = b.block()
    base_rows = _sparse_check_rows(code.pair.c1.generator, code.p)
    rot_rows = _sparse_check_rows(code.rotated_code.generator, code.p)
    replace = code.kind == "polynomial"
    _correction_pass(b, data, base_rows, with_replacement=replace)
    b.extend(code.basis_change_gates(data))
    _correction_pass(b, data, rot_rows, with_replacement=replace)
    b.extend(code.basis_change_gates(data, inverse=True))
    return b.build(meta={"logical": ("identity",)})


def initialization_gadget(code: CssCode, value: int = 0) -> Gadget:
    """Duplicated classical string -> |S_value|: rotate a fresh block to the
    uniform state, collapse it onto C2 with a linear syndrome section
    (per-coordinate private syndrome copies), then add the input string
    transversally.  The input block is retained as garbage."""
    b = Builder(code, f"initialization_{code.kind}", "initialization")
    inp = b.block()
    out = b.anc_block()
    p, m = code.p, code.block_size
    for q in out:
        b.add(GateOp.hadamard(q) if p == 2 else GateOp.fourier(q, 1))
    h2 = _sparse_check_rows(code.pair.c2.generator, p)
    rank = h2.shape[0]
    sigmas = _extract_syndrome(b, out, h2, buffered=True)
    # linear section B with H2 B = I, supported on the pivot coordinates
    field = PrimeField(p)
    _, pivots = field.rref(h2)
    section = np.zeros((m, rank), dtype=np.int64)
    section[pivots, :] = _invert(h2[:, pivots], p)
    for j in range(m):
        if not np.any(section[j] % p):
            continue
        copies = []
        for s in sigmas:
            c = b.anc()
            b.add(GateOp.cnot(s, c) if p == 2 else GateOp.controlled_sum(s, c))
            copies.append(c)
        for r in range(rank):
            b.sub_scaled_sum(copies[r], out[j], int(section[j, r]))
    for i, o in zip(inp, out):
        b.add(GateOp.cnot(i, o) if p == 2 else GateOp.controlled_sum(i, o))
    return b.build(
        blocks=(inp,),
        output_blocks=(out,),
        meta={"logical": ("prepare", value)},
    )


def _read_fix_poly(b: Builder, copy_block, sigmas, check_rows) -> None:
    """Fix all coordinates of a private copy from its shared syndrome."""
    p = b.code.p
    h = np.asarray(check_rows, dtype=np.int64) % p
    m = h.shape[1]
    zs0 = b.zero_test(sigmas[0])
    zs1 = b.zero_test(sigmas[1])
    both_zero = b.anc()
    b.add_product(zs0, zs1, both_zero)
    for i in range(m):
        r_i = b.anc()
        b.add_scaled_sum(sigmas[1], r_i, int(h[0, i]))
        b.sub_scaled_sum(sigmas[0], r_i, int(h[1, i]))
        z_i = b.zero_test(r_i)
        fix = b.anc()
        b.add(GateOp.controlled_sum(z_i, fix))
        b.add_product(z_i, both_zero, fix, coeff=p - 1)
        row = 0 if h[0, i] % p else 1
        eps = b.anc()
        b.add_scaled_sum(sigmas[row], eps, pow(int(h[row, i]), p - 2, p))
        b.add_product(eps, fix, copy_block[i], coeff=p - 1)


def _read_fix_p2(b: Builder, copy_block, sigmas, check_rows) -> None:
    for i in range(len(copy_block)):
        _decode_fix_p2(b, sigmas, copy_block[i], i, check_rows)


def reading_gadget(code: CssCode) -> Gadget:
    """Compute the encoded logical value into m result qupits, each from its
    own corrected copy of the block; a fault during one computation affects
    only that result."""
    b = Builder(code, f"reading_{code.kind}", "reading")
    data = b.block()
    p, m = code.p, code.block_size
    check_rows = _sparse_check_rows(code.pair.c1.generator, p)
    results = []
    for _ in range(m):
        copy = b.anc_block()
        for src, dst in zip(data, copy):
            b.add(GateOp.cnot(src, dst) if p == 2 else GateOp.controlled_sum(src, dst))
        sigmas = _extract_syndrome(b, copy, check_rows, buffered=False)
        if p == 2:
            _read_fix_p2(b, copy, sigmas, check_rows)
        else:
            _read_fix_poly(b, copy, sigmas, check_rows)
        result = b.anc()
        for l, weight in enumerate(code.logical_read_weights):
            b.add_scaled_sum(copy[l], result, int(weight))
        results.append(result)
    return b.build(
        blocks=(data,),
        output_blocks=(tuple(results),),
        meta={"logical": ("read",)},
    )


def adversarial_fanout_gadget(code: CssCode) -> Gadget:
    """Deliberate counterexample: one source qupit fans into the whole
    block, so a single fault reaches every output coordinate."""
    b = Builder(code, "adversarial_fanout", "counterexample")
    data = b.block()
    src = b.anc()
    b.add(GateOp.hadamard(src) if code.p == 2 else GateOp.fourier(src, 1))
    for q in data:
        b.add(GateOp.cnot(src, q) if code.p == 2 else GateOp.controlled_sum(src, q))
    return b.build(declared_spread=code.block_size, meta={"logical": ("none",)})


def readout_majority(measured_blocks, code: CssCode):
    """Plurality symbol per block of m measured result qupits.

    Returns (symbols, ok): a block with no strict plurality gets symbol None
    and ok=False.
    """
    symbols = []
    ok = True
    for block in measured_blocks:
        counts: dict[int, int] = {}
        for v in block:
            counts[int(v)] = counts.get(int(v), 0) + 1
        ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        if len(ranked) > 1 and ranked[0][1] == ranked[1][1]:
            symbols.append(None)
            ok = False
        else:
            symbols.append(ranked[0][0])
    return symbols, ok
