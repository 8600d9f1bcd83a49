"""Gadget representation and execution.

A gadget is a measurement-free DAG of elementary gates over one code's
universal set, organized in parallel layers, acting on declared data blocks
plus freshly allocated ancillas.  Garbage qupits are retained (never
measured mid-circuit) and excluded from the output blocks; verification
traces them out afterwards.

Size accounting: ``size`` counts space-time locations the way the noise
model samples them — one point per live qupit per layer plus one point per
gate — and feeds the threshold formulas unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..css import CssCode
from ..qsim import FactoredState, GateOp, SparseState

P2_SET = {"cnot_p2", "rot_x_p2", "not_p2", "phase_i_p2", "toffoli_pq"}
GENERAL_SET = {
    "add_const",
    "controlled_sum",
    "scalar_mul",
    "toffoli_pq",
    "phase",
    "fourier",
}


class GadgetError(ValueError):
    pass


@dataclass
class Gadget:
    name: str
    code: CssCode
    num_qupits: int
    blocks: tuple[tuple[int, ...], ...]          # declared data blocks (inputs)
    output_blocks: tuple[tuple[int, ...], ...]   # blocks carrying the result
    ancilla_values: dict[int, int]               # qupit -> initial basis value
    layers: tuple[tuple[GateOp, ...], ...]
    role: str
    declared_spread: int = 1
    meta: dict = field(default_factory=dict)

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def gate_count(self) -> int:
        return sum(len(layer) for layer in self.layers)

    @property
    def size(self) -> int:
        """Space-time locations: qupit-steps plus gate points."""
        return self.num_qupits * self.depth + self.gate_count

    def universal_set(self) -> set:
        return P2_SET if self.code.p == 2 else GENERAL_SET

    def check_properness_clause1(self) -> None:
        """Every gate must come from the code's own universal set."""
        allowed = self.universal_set()
        for layer in self.layers:
            for g in layer:
                if g.kind not in allowed:
                    raise GadgetError(
                        f"{self.name}: gate kind {g.kind} outside the universal set"
                    )

    def gates(self):
        for t, layer in enumerate(self.layers):
            for g in layer:
                yield t, g

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "code": self.code.kind,
            "p": self.code.p,
            "num_qupits": self.num_qupits,
            "blocks": [list(b) for b in self.blocks],
            "output_blocks": [list(b) for b in self.output_blocks],
            "a": self.size,
            "l": self.declared_spread,
            "depth": self.depth,
            "layers": [
                [
                    {"gate": g.kind, "targets": list(g.targets), "param": g.param}
                    for g in layer
                ]
                for layer in self.layers
            ],
        }


class Builder:
    """ASAP-scheduled gadget assembly: gates are packed into the earliest
    layer after the last use of any of their qupits."""

    def __init__(self, code: CssCode, name: str, role: str):
        self.code = code
        self.name = name
        self.role = role
        self.num_qupits = 0
        self.ancilla_values: dict[int, int] = {}
        self.sequence: list[GateOp] = []  # flat emission order
        self._ready: dict[int, int] = {}  # qupit -> first free layer
        self._layers: list[list[GateOp]] = []
        self.blocks: list[tuple[int, ...]] = []

    def block(self) -> tuple[int, ...]:
        """Declare one data block of m qupits."""
        ids = tuple(range(self.num_qupits, self.num_qupits + self.code.block_size))
        self.num_qupits += self.code.block_size
        self.blocks.append(ids)
        return ids

    def anc(self, value: int = 0) -> int:
        q = self.num_qupits
        self.num_qupits += 1
        self.ancilla_values[q] = value % self.code.p
        return q

    def anc_block(self, values=None) -> tuple[int, ...]:
        m = self.code.block_size
        vals = [0] * m if values is None else list(values)
        return tuple(self.anc(v) for v in vals)

    def add(self, gate: GateOp) -> None:
        t = max((self._ready.get(q, 0) for q in gate.targets), default=0)
        while len(self._layers) <= t:
            self._layers.append([])
        self._layers[t].append(gate)
        self.sequence.append(gate)
        for q in gate.targets:
            self._ready[q] = t + 1

    def add_inverse_of(self, gates) -> None:
        """Append the exact inverse of a recorded gate sequence (classical
        permutation and diagonal gates only)."""
        p = self.code.p
        for g in reversed(list(gates)):
            k = g.kind
            if k == "add_const":
                self.add(GateOp.add_const(g.targets[0], (-g.param) % p))
            elif k == "scalar_mul":
                self.add(GateOp.scalar_mul(g.targets[0], pow(g.param % p, p - 2, p)))
            elif k == "phase":
                self.add(GateOp.phase(g.targets[0], (-g.param) % p))
            elif k == "fourier":
                self.add(GateOp.fourier(g.targets[0], (-g.param) % p))
            elif k == "controlled_sum":
                t = g.targets[1]
                self.add(GateOp.scalar_mul(t, p - 1))
                self.add(g)
                self.add(GateOp.scalar_mul(t, p - 1))
            elif k == "toffoli_pq":
                t = g.targets[2]
                if p == 2:
                    self.add(g)
                else:
                    self.add(GateOp.scalar_mul(t, p - 1))
                    self.add(g)
                    self.add(GateOp.scalar_mul(t, p - 1))
            elif k in ("not_p2", "rot_x_p2", "cnot_p2"):
                self.add(g)
            elif k == "phase_i_p2":
                for _ in range(3):
                    self.add(GateOp.phase_i(g.targets[0]))
            else:  # pragma: no cover
                raise GadgetError(f"cannot invert {k}")

    def extend(self, gates) -> None:
        for g in gates:
            self.add(g)

    def barrier(self) -> None:
        """Force subsequent gates into a fresh layer."""
        t = len(self._layers)
        for q in self._ready:
            self._ready[q] = max(self._ready[q], t)

    # composite helpers over the universal set ------------------------------

    def add_scaled_sum(self, src: int, dst: int, coeff: int) -> None:
        """dst += coeff * src, via scalar sandwiches (plain ctrl-sum at p=2)."""
        p = self.code.p
        c = coeff % p
        if c == 0:
            return
        if p == 2 or c == 1:
            self.add(GateOp.cnot(src, dst) if p == 2 else GateOp.controlled_sum(src, dst))
            return
        inv = pow(c, p - 2, p)
        self.add(GateOp.scalar_mul(dst, inv))
        self.add(GateOp.controlled_sum(src, dst))
        self.add(GateOp.scalar_mul(dst, c))

    def sub_scaled_sum(self, src: int, dst: int, coeff: int) -> None:
        self.add_scaled_sum(src, dst, (-coeff) % self.code.p)

    def add_product(self, a: int, b: int, dst: int, coeff: int = 1) -> None:
        """dst += coeff * v_a * v_b."""
        p = self.code.p
        c = coeff % p
        if c == 0:
            return
        if c != 1:
            inv = pow(c, p - 2, p)
            self.add(GateOp.scalar_mul(dst, inv))
        self.add(GateOp.toffoli(a, b, dst))
        if c != 1:
            self.add(GateOp.scalar_mul(dst, c))

    def zero_test(self, src: int) -> int:
        """Fresh flag qupit set to 1 iff v_src == 0 (Fermat: 1 - v^(p-1));
        at p=2 this is a copy plus NOT."""
        p = self.code.p
        flag = self.anc()
        if p == 2:
            self.add(GateOp.cnot(src, flag))
            self.add(GateOp.not2(flag))
            return flag
        # v^(p-1) by a product chain (toffoli wires must be distinct, so the
        # v*v step multiplies src with a copy)
        copy = self.anc()
        self.add(GateOp.controlled_sum(src, copy))
        acc = self.anc()
        self.add(GateOp.toffoli(src, copy, acc))  # v^2
        for _ in range(p - 3):
            nxt = self.anc()
            self.add(GateOp.toffoli(acc, src, nxt))
            acc = nxt
        # flag = 1 - v^(p-1)
        self.sub_scaled_sum(acc, flag, 1)
        self.add(GateOp.add_const(flag, 1))
        return flag

    def build(self, blocks=None, output_blocks=None, declared_spread: int = 1,
              meta=None) -> Gadget:
        blocks = tuple(blocks if blocks is not None else self.blocks)
        g = Gadget(
            name=self.name,
            code=self.code,
            num_qupits=self.num_qupits,
            blocks=blocks,
            output_blocks=tuple(output_blocks if output_blocks is not None else blocks),
            ancilla_values=dict(self.ancilla_values),
            layers=tuple(tuple(layer) for layer in self._layers),
            role=self.role,
            declared_spread=declared_spread,
            meta=meta or {},
        )
        g.check_properness_clause1()
        return g


def run_gadget(
    gadget: Gadget,
    block_states: list[SparseState],
    prune: float = 1e-9,
    fault=None,
) -> FactoredState:
    """Execute the gadget on the given per-block input states.

    `fault`: optional (layer_index, WeylError) injected before that layer
    (layer_index == depth injects after the last layer).
    """
    if len(block_states) != len(gadget.blocks):
        raise GadgetError("wrong number of block input states")
    fs = FactoredState(gadget.code.p)
    fs.num_qupits = gadget.num_qupits
    placed = set()
    for ids, st in zip(gadget.blocks, block_states):
        fs.factors.append(st.copy())
        fs.index.append(tuple(ids))
        placed.update(ids)
    anc = [q for q in range(gadget.num_qupits) if q not in placed]
    for q in anc:
        fs.factors.append(
            SparseState.basis(gadget.code.p, [gadget.ancilla_values.get(q, 0)])
        )
        fs.index.append((q,))
    fault_layer = fault[0] if fault is not None else None
    for t, layer in enumerate(gadget.layers):
        if fault_layer == t:
            fs.apply_weyl(fault[1])
        for g in layer:
            fs.apply_gate(g, prune=prune)
    if fault_layer == gadget.depth:
        fs.apply_weyl(fault[1])
    return fs
