"""Transversal (bitwise) gate gadgets for both code families.

Polynomial family: add_const, controlled_sum, scalar_mul act coordinate-wise
because sums and scalings of degree-bounded polynomials stay degree-bounded;
the phase and Fourier gadgets twist each coordinate by the
interpolation-at-zero weight c_l, which turns the coordinate-wise action
into exactly the logical phase/Fourier.

p=2 family: cnot, not, rot_x (Hadamard) act bitwise on the self-dual-pair
code; bitwise phase_i yields the *inverse* logical quarter-turn on this
code (coset-1 weights are 3 mod 4), so the logical S gadget applies it
three times per qubit.
"""

from __future__ import annotations

from ..css import CssCode
from ..qsim import GateOp
from .base import Builder, Gadget, GadgetError

POLY_KINDS = ("add_const", "controlled_sum", "scalar_mul", "phase", "fourier")
P2_KINDS = ("cnot", "not", "rot_x", "phase_s")


def transversal_gadget(code: CssCode, kind: str, param: int = 0) -> Gadget:
    p = code.p
    if code.kind == "polynomial":
        if kind not in POLY_KINDS:
            raise GadgetError(f"unsupported gate kind {kind!r} for polynomial codes")
        b = Builder(code, f"{kind}_bitwise", "gate")
        if kind == "controlled_sum":
            src = b.block()
            dst = b.block()
            for s, d in zip(src, dst):
                b.add(GateOp.controlled_sum(s, d))
            meta = {"logical": ("controlled_sum",)}
        else:
            blk = b.block()
            if kind == "add_const":
                for q in blk:
                    b.add(GateOp.add_const(q, param))
                meta = {"logical": ("add_const", param % p)}
            elif kind == "scalar_mul":
                if param % p == 0:
                    raise GadgetError("scalar_mul needs a nonzero constant")
                for q in blk:
                    b.add(GateOp.scalar_mul(q, param))
                meta = {"logical": ("scalar_mul", param % p)}
            elif kind == "phase":
                for q, twist in zip(blk, code.fourier_twists):
                    b.add(GateOp.phase(q, (param * twist) % p))
                meta = {"logical": ("phase", param % p)}
            else:  # fourier
                r = param if param % p else 1
                for q, twist in zip(blk, code.fourier_twists):
                    b.add(GateOp.fourier(q, (r * twist) % p))
                meta = {"logical": ("fourier", r % p)}
        return b.build(meta=meta)

    if kind not in P2_KINDS:
        raise GadgetError(f"unsupported gate kind {kind!r} for the p=2 family")
    b = Builder(code, f"{kind}_bitwise", "gate")
    if kind == "cnot":
        src = b.block()
        dst = b.block()
        for s, d in zip(src, dst):
            b.add(GateOp.cnot(s, d))
        meta = {"logical": ("controlled_sum",)}
    else:
        blk = b.block()
        if kind == "not":
            for q in blk:
                b.add(GateOp.not2(q))
            meta = {"logical": ("add_const", 1)}
        elif kind == "rot_x":
            for q in blk:
                b.add(GateOp.hadamard(q))
            meta = {"logical": ("fourier", 1)}
        else:  # phase_s: bitwise S gives logical S^dagger, so apply it thrice
            for _ in range(3):
                for q in blk:
                    b.add(GateOp.phase_i(q))
            meta = {"logical": ("phase_s",)}
    return b.build(meta=meta)


def gate_gadget_catalog(code: CssCode, params=(1, 3)) -> list[Gadget]:
    """Representative instances of every transversal kind for the code."""
    out = []
    if code.kind == "polynomial":
        for c in params:
            out.append(transversal_gadget(code, "add_const", c))
            out.append(transversal_gadget(code, "scalar_mul", c))
            out.append(transversal_gadget(code, "phase", c))
        out.append(transversal_gadget(code, "controlled_sum"))
        out.append(transversal_gadget(code, "fourier", 1))
        out.append(transversal_gadget(code, "fourier", 2))
    else:
        out.append(transversal_gadget(code, "not"))
        out.append(transversal_gadget(code, "cnot"))
        out.append(transversal_gadget(code, "rot_x"))
        out.append(transversal_gadget(code, "phase_s"))
    return out
