"""Exact sparse-amplitude simulation of qupit registers.

States are maps from computational basis labels (length-n strings over F_p)
to complex amplitudes, stored as a numpy label matrix plus an amplitude
vector so that gates are vectorized over the support.  Gate kinds are
restricted to the two universal sets the code families use (general-p:
add_const, controlled_sum, scalar_mul, toffoli_pq, phase, fourier; p=2:
not, cnot, rot_x, phase_i, plus toffoli_pq).  All of them except fourier
and rot_x are permutation/diagonal maps and preserve the support size;
fourier expands the support by at most p and then prunes amplitudes below
a threshold, since destructive interference of roots of unity is only
float-exact to ~1e-16.

:class:`FactoredState` keeps a pure state as a tensor product of sparse
factors and only merges factors when a gate genuinely entangles them.
Gates whose control operands are constant columns of their factor reduce
to local actions, which keeps multi-block gadget simulations at the
per-block support size instead of the product.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass

import numpy as np

from .gfp import check_modulus

PRUNE_DEFAULT = 1e-9
LABEL_ALPHABET = "0123456789abc"  # digits for p <= 13


class SimulationError(ValueError):
    pass


class EntangledError(SimulationError):
    """Raised when a register asked to be discarded is not a tensor factor."""


GENERAL_KINDS = {
    "add_const",
    "controlled_sum",
    "scalar_mul",
    "toffoli_pq",
    "phase",
    "fourier",
}
P2_KINDS = {"not_p2", "rot_x_p2", "phase_i_p2", "cnot_p2"}
ARITY = {
    "add_const": 1,
    "controlled_sum": 2,
    "scalar_mul": 1,
    "toffoli_pq": 3,
    "phase": 1,
    "fourier": 1,
    "not_p2": 1,
    "rot_x_p2": 1,
    "phase_i_p2": 1,
    "cnot_p2": 2,
}
# operand positions that the gate only reads
CONTROL_SLOTS = {
    "controlled_sum": (0,),
    "toffoli_pq": (0, 1),
    "cnot_p2": (0,),
}


@dataclass(frozen=True)
class GateOp:
    """One elementary gate application; `param` is c or r where applicable."""

    kind: str
    targets: tuple[int, ...]
    param: int = 0

    def __post_init__(self):
        if self.kind not in GENERAL_KINDS | P2_KINDS:
            raise SimulationError(f"unknown gate kind {self.kind!r}")
        if len(self.targets) != ARITY[self.kind]:
            raise SimulationError(
                f"{self.kind} takes {ARITY[self.kind]} targets, got {self.targets}"
            )
        if len(set(self.targets)) != len(self.targets):
            raise SimulationError("gate targets must be distinct")

    # convenience constructors, matching the universal-set actions
    @staticmethod
    def add_const(t: int, c: int) -> "GateOp":
        return GateOp("add_const", (t,), c)

    @staticmethod
    def controlled_sum(ctrl: int, t: int) -> "GateOp":
        return GateOp("controlled_sum", (ctrl, t))

    @staticmethod
    def scalar_mul(t: int, c: int) -> "GateOp":
        return GateOp("scalar_mul", (t,), c)

    @staticmethod
    def toffoli(a: int, b: int, t: int) -> "GateOp":
        return GateOp("toffoli_pq", (a, b, t))

    @staticmethod
    def phase(t: int, c: int) -> "GateOp":
        return GateOp("phase", (t,), c)

    @staticmethod
    def fourier(t: int, r: int = 1) -> "GateOp":
        return GateOp("fourier", (t,), r)

    @staticmethod
    def not2(t: int) -> "GateOp":
        return GateOp("not_p2", (t,))

    @staticmethod
    def hadamard(t: int) -> "GateOp":
        return GateOp("rot_x_p2", (t,))

    @staticmethod
    def phase_i(t: int) -> "GateOp":
        return GateOp("phase_i_p2", (t,))

    @staticmethod
    def cnot(ctrl: int, t: int) -> "GateOp":
        return GateOp("cnot_p2", (ctrl, t))

    def validate(self, p: int, n: int) -> None:
        if self.kind in P2_KINDS and p != 2:
            raise SimulationError(f"{self.kind} requires p=2")
        if any(not 0 <= t < n for t in self.targets):
            raise SimulationError(f"gate target out of range: {self}")
        if self.kind == "scalar_mul" and self.param % p == 0:
            raise SimulationError("scalar_mul by 0 is not unitary")
        if self.kind == "fourier" and self.param % p == 0:
            raise SimulationError("fourier with r=0 is not unitary")


@dataclass(frozen=True)
class WeylError:
    """Generalized Pauli X^a Z^b on one qupit: |v> -> w^{b v} |v+a>."""

    x_power: int
    z_power: int
    target: int

    def is_identity(self, p: int) -> bool:
        return self.x_power % p == 0 and self.z_power % p == 0


def phase_table(p: int) -> np.ndarray:
    return np.exp(2j * math.pi * np.arange(p) / p)


def pack_labels(labels: np.ndarray, p: int) -> np.ndarray:
    """Pack label rows into one or more int64 key columns (base-p digits)."""
    n = labels.shape[1]
    per = max(1, int(62 / math.log2(p)))
    chunks = []
    for lo in range(0, n, per):
        width = min(per, n - lo)
        powers = p ** np.arange(width - 1, -1, -1, dtype=np.int64)
        chunks.append(labels[:, lo : lo + width].astype(np.int64) @ powers)
    return np.stack(chunks, axis=1) if chunks else np.zeros((len(labels), 1), np.int64)


def _key_order(keys: np.ndarray) -> np.ndarray:
    if keys.shape[1] == 1:
        return np.argsort(keys[:, 0], kind="stable")
    return np.lexsort(keys.T[::-1])


def _dedup(labels: np.ndarray, amps: np.ndarray, p: int):
    """Merge duplicate labels, summing amplitudes."""
    keys = pack_labels(labels, p)
    order = _key_order(keys)
    labels = labels[order]
    amps = amps[order]
    keys = keys[order]
    if len(labels) > 1:
        diff = np.any(keys[1:] != keys[:-1], axis=1)
        boundaries = np.concatenate(([0], np.nonzero(diff)[0] + 1))
        summed = np.add.reduceat(amps, boundaries)
        labels = labels[boundaries]
        amps = summed
    return labels, amps


class SparseState:
    """Sparse pure state on `num_qupits` qupits over F_p."""

    __slots__ = ("p", "num_qupits", "labels", "amps", "_w")

    def __init__(self, p: int, num_qupits: int, labels, amps, copy: bool = True):
        check_modulus(p)
        self.p = p
        self.num_qupits = num_qupits
        self.labels = np.array(labels, dtype=np.uint8, copy=copy).reshape(
            -1, num_qupits
        )
        self.amps = np.array(amps, dtype=np.complex128, copy=copy).reshape(-1)
        if len(self.labels) != len(self.amps):
            raise SimulationError("labels and amplitudes disagree in length")
        self._w = phase_table(p)

    @staticmethod
    def basis(p: int, label) -> "SparseState":
        label = list(label)
        return SparseState(p, len(label), [label], [1.0 + 0j])

    @staticmethod
    def from_amplitudes(p: int, n: int, mapping: dict) -> "SparseState":
        labels = [list(k) for k in mapping]
        amps = [mapping[k] for k in mapping]
        return SparseState(p, n, labels, amps)

    def copy(self) -> "SparseState":
        return SparseState(self.p, self.num_qupits, self.labels, self.amps)

    @property
    def support_size(self) -> int:
        return len(self.amps)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amps) ** 2)))

    def renormalize(self) -> None:
        self.amps /= self.norm()

    def prune(self, threshold: float = PRUNE_DEFAULT) -> None:
        if threshold <= 0:
            return
        keep = np.abs(self.amps) >= threshold
        if not keep.all():
            self.labels = self.labels[keep]
            self.amps = self.amps[keep]
            self.renormalize()

    def amplitude(self, label) -> complex:
        row = np.asarray(list(label), dtype=np.uint8)
        hits = np.nonzero(np.all(self.labels == row, axis=1))[0]
        return complex(self.amps[hits[0]]) if hits.size else 0j

    def to_dict(self) -> dict:
        return {
            tuple(int(x) for x in row): complex(a)
            for row, a in zip(self.labels, self.amps)
        }

    # -- gate application ---------------------------------------------------

    def apply_gate(self, g: GateOp, prune: float = PRUNE_DEFAULT) -> None:
        g.validate(self.p, self.num_qupits)
        self._apply_resolved(g.kind, g.targets, g.param, prune)

    def _apply_resolved(self, kind, slots, param, prune=PRUNE_DEFAULT):
        """Apply a gate whose operand slots are column indices or, for
        read-only control slots, ("const", value)."""
        p = self.p

        def col(slot):
            if isinstance(slot, tuple):
                return np.uint8(slot[1] % p)
            return self.labels[:, slot]

        if kind == "add_const":
            t = slots[0]
            self.labels[:, t] = (self.labels[:, t] + param) % p
        elif kind == "not_p2":
            t = slots[0]
            self.labels[:, t] ^= 1
        elif kind in ("controlled_sum", "cnot_p2"):
            a, t = slots
            self.labels[:, t] = (self.labels[:, t] + col(a)) % p
        elif kind == "scalar_mul":
            t = slots[0]
            self.labels[:, t] = (self.labels[:, t].astype(np.int64) * param) % p
        elif kind == "toffoli_pq":
            a, b, t = slots
            prod = col(a).astype(np.int64) * col(b).astype(np.int64)
            self.labels[:, t] = (self.labels[:, t] + prod) % p
        elif kind == "phase":
            t = slots[0]
            self.amps *= self._w[(self.labels[:, t].astype(np.int64) * param) % p]
        elif kind == "phase_i_p2":
            t = slots[0]
            self.amps *= 1j ** self.labels[:, t].astype(np.int64)
        elif kind in ("fourier", "rot_x_p2"):
            t = slots[0]
            r = param if kind == "fourier" else 1
            s = len(self.amps)
            new_labels = np.repeat(self.labels, p, axis=0)
            digits = np.tile(np.arange(p, dtype=np.uint8), s)
            old = np.repeat(self.labels[:, t].astype(np.int64), p)
            new_labels[:, t] = digits
            phases = self._w[(r * old * digits) % p]
            new_amps = np.repeat(self.amps, p) * phases / math.sqrt(p)
            self.labels, self.amps = _dedup(new_labels, new_amps, p)
            self.prune(prune)
        else:  # pragma: no cover
            raise SimulationError(f"unhandled kind {kind}")

    def apply_weyl(self, e: WeylError) -> None:
        p = self.p
        if not 0 <= e.target < self.num_qupits:
            raise SimulationError("Weyl target out of range")
        v = self.labels[:, e.target].astype(np.int64)
        if e.z_power % p:
            self.amps *= self._w[(e.z_power * v) % p]
        if e.x_power % p:
            self.labels[:, e.target] = (v + e.x_power) % p

    # -- measurement and comparison ----------------------------------------

    def measure_basic(self, qupit: int):
        """Distribution over F_p outcomes and the collapsed state per outcome."""
        if not 0 <= qupit < self.num_qupits:
            raise SimulationError("measured qupit out of range")
        v = self.labels[:, qupit]
        dist: dict[int, float] = {}
        collapsed: dict[int, SparseState] = {}
        for outcome in range(self.p):
            mask = v == outcome
            prob = float(np.sum(np.abs(self.amps[mask]) ** 2))
            if prob > 0:
                dist[outcome] = prob
                st = SparseState(
                    self.p, self.num_qupits, self.labels[mask], self.amps[mask]
                )
                st.amps /= math.sqrt(prob)
                collapsed[outcome] = st
        return dist, collapsed

    def inner(self, other: "SparseState") -> complex:
        if (other.p, other.num_qupits) != (self.p, self.num_qupits):
            raise SimulationError("register shape mismatch")
        if not len(self.amps) or not len(other.amps):
            return 0j
        k1 = pack_labels(self.labels, self.p)
        k2 = pack_labels(other.labels, self.p)
        if k1.shape[1] == 1:
            o1, o2 = np.argsort(k1[:, 0]), np.argsort(k2[:, 0])
            key1, a1 = k1[o1, 0], self.amps[o1]
            key2, a2 = k2[o2, 0], other.amps[o2]
            pos = np.searchsorted(key1, key2)
            pos = np.clip(pos, 0, len(key1) - 1)
            hits = key1[pos] == key2
            return complex(np.sum(np.conj(a1[pos[hits]]) * a2[hits]))
        mine = {}
        for row_key, a in zip(map(tuple, k1), self.amps):
            mine[row_key] = mine.get(row_key, 0j) + a
        return complex(
            sum(np.conj(mine.get(tuple(rk), 0j)) * a for rk, a in zip(k2, other.amps))
        )

    def tensor(self, other: "SparseState") -> "SparseState":
        if other.p != self.p:
            raise SimulationError("modulus mismatch")
        s1, s2 = len(self.amps), len(other.amps)
        labels = np.hstack(
            [np.repeat(self.labels, s2, axis=0), np.tile(other.labels, (s1, 1))]
        )
        amps = np.repeat(self.amps, s2) * np.tile(other.amps, s1)
        return SparseState(self.p, self.num_qupits + other.num_qupits, labels, amps)

    # -- serialization -------------------------------------------------------

    def dump_json(self) -> str:
        entries = []
        for row, a in zip(self.labels, self.amps):
            text = "".join(LABEL_ALPHABET[int(x)] for x in row)
            entries.append((text, float(a.real), float(a.imag)))
        entries.sort(key=lambda e: e[0])
        return json.dumps(
            {"p": self.p, "n": self.num_qupits, "amplitudes": entries}, indent=2
        )

    @staticmethod
    def load_json(text: str) -> "SparseState":
        doc = json.loads(text)
        labels = [[LABEL_ALPHABET.index(ch) for ch in s] for s, _, _ in doc["amplitudes"]]
        amps = [complex(re, im) for _, re, im in doc["amplitudes"]]
        return SparseState(doc["p"], doc["n"], labels, amps)


def fidelity(s1: SparseState, s2: SparseState) -> float:
    """|<s1|s2>|^2 for pure sparse states."""
    return abs(s1.inner(s2)) ** 2


def uniform_state(p: int, n: int) -> SparseState:
    st = SparseState.basis(p, [0] * n)
    for q in range(n):
        st.apply_gate(GateOp.fourier(q, 1) if p != 2 else GateOp.hadamard(q))
    return st


# -- dense oracle (for <=3-qupit verification only) ---------------------------


def gate_unitary(g: GateOp, p: int, n: int) -> np.ndarray:
    """Dense p^n x p^n matrix of the gate, built independently of the sparse
    path (direct matrix elements)."""
    if p**n > 4096:
        raise SimulationError("dense oracle limited to small registers")
    w = phase_table(p)
    dim = p**n
    mat = np.zeros((dim, dim), dtype=np.complex128)

    def digits(i):
        out = []
        for _ in range(n):
            out.append(i % p)
            i //= p
        return out[::-1]

    def index(ds):
        i = 0
        for d in ds:
            i = i * p + int(d) % p
        return i

    for i in range(dim):
        v = digits(i)
        k, t = g.kind, g.targets
        if k == "add_const":
            u = list(v)
            u[t[0]] = (u[t[0]] + g.param) % p
            mat[index(u), i] = 1
        elif k == "not_p2":
            u = list(v)
            u[t[0]] ^= 1
            mat[index(u), i] = 1
        elif k in ("controlled_sum", "cnot_p2"):
            u = list(v)
            u[t[1]] = (u[t[1]] + u[t[0]]) % p
            mat[index(u), i] = 1
        elif k == "scalar_mul":
            u = list(v)
            u[t[0]] = (u[t[0]] * g.param) % p
            mat[index(u), i] = 1
        elif k == "toffoli_pq":
            u = list(v)
            u[t[2]] = (u[t[2]] + u[t[0]] * u[t[1]]) % p
            mat[index(u), i] = 1
        elif k == "phase":
            mat[i, i] = w[(g.param * v[t[0]]) % p]
        elif k == "phase_i_p2":
            mat[i, i] = 1j ** v[t[0]]
        elif k in ("fourier", "rot_x_p2"):
            r = g.param if k == "fourier" else 1
            for b in range(p):
                u = list(v)
                u[t[0]] = b
                mat[index(u), i] = w[(r * v[t[0]] * b) % p] / math.sqrt(p)
    return mat


def weyl_unitary(e: WeylError, p: int, n: int) -> np.ndarray:
    w = phase_table(p)
    dim = p**n
    mat = np.zeros((dim, dim), dtype=np.complex128)
    stride = p ** (n - 1 - e.target)
    for i in range(dim):
        v = (i // stride) % p
        u = i + ((v + e.x_power) % p - v) * stride
        mat[u, i] = w[(e.z_power * v) % p]
    return mat


def to_dense(state: SparseState) -> np.ndarray:
    dim = state.p**state.num_qupits
    if dim > 4096:
        raise SimulationError("dense conversion limited to small registers")
    vec = np.zeros(dim, dtype=np.complex128)
    for row, a in zip(state.labels, state.amps):
        idx = 0
        for d in row:
            idx = idx * state.p + int(d)
        vec[idx] += a
    return vec


# -- factored simulation -------------------------------------------------------


class FactoredState:
    """Pure state kept as a tensor product of sparse factors over disjoint
    qupit sets.  Factors merge lazily: a multi-qupit gate spanning factors
    first tries to resolve its read-only operands as constant columns; only
    a genuinely entangling gate triggers a tensor merge.
    """

    def __init__(self, p: int):
        check_modulus(p)
        self.p = p
        self.factors: list[SparseState] = []
        self.index: list[tuple[int, ...]] = []  # global qupits per factor
        self.num_qupits = 0

    @staticmethod
    def from_state(state: SparseState) -> "FactoredState":
        fs = FactoredState(state.p)
        fs.factors.append(state.copy())
        fs.index.append(tuple(range(state.num_qupits)))
        fs.num_qupits = state.num_qupits
        return fs

    def add_register(self, state: SparseState) -> tuple[int, ...]:
        """Append a fresh register; returns its global qupit indices."""
        base = self.num_qupits
        ids = tuple(range(base, base + state.num_qupits))
        self.factors.append(state.copy())
        self.index.append(ids)
        self.num_qupits += state.num_qupits
        return ids

    def add_basis_qupits(self, values) -> tuple[int, ...]:
        return self.add_register(SparseState.basis(self.p, list(values)))

    def _locate(self, qupit: int) -> tuple[int, int]:
        for fi, ids in enumerate(self.index):
            if qupit in ids:
                return fi, ids.index(qupit)
        raise SimulationError(f"qupit {qupit} not present")

    def _merge(self, fis: list[int]) -> int:
        fis = sorted(set(fis))
        keep = fis[0]
        for fi in reversed(fis[1:]):
            self.factors[keep] = self.factors[keep].tensor(self.factors[fi])
            self.index[keep] = self.index[keep] + self.index[fi]
            del self.factors[fi]
            del self.index[fi]
        return keep

    def apply_gate(self, g: GateOp, prune: float = PRUNE_DEFAULT) -> None:
        g.validate(self.p, self.num_qupits)
        locs = [self._locate(t) for t in g.targets]
        fis = [fi for fi, _ in locs]
        if len(set(fis)) > 1:
            # try constant-column resolution for read-only slots
            ctrl_slots = CONTROL_SLOTS.get(g.kind, ())
            write_slots = [s for s in range(len(g.targets)) if s not in ctrl_slots]
            wfis = {fis[s] for s in write_slots}
            resolved = {}
            if len(wfis) == 1:
                (wfi,) = wfis
                for s in ctrl_slots:
                    fi, col = locs[s]
                    if fi == wfi:
                        continue
                    column = self.factors[fi].labels[:, col]
                    if column.size and (column == column[0]).all():
                        resolved[s] = ("const", int(column[0]))
            if len(wfis) == 1 and all(
                fis[s] == wfi or s in resolved for s in ctrl_slots
            ):
                slots = [
                    resolved.get(s, None) if s in resolved else locs[s][1]
                    for s in range(len(g.targets))
                ]
                self.factors[wfi]._apply_resolved(g.kind, slots, g.param, prune)
                return
            keep = self._merge(fis)
            locs = [self._locate(t) for t in g.targets]
        fi = locs[0][0]
        slots = [c for _, c in locs]
        self.factors[fi]._apply_resolved(g.kind, slots, g.param, prune)

    def apply_weyl(self, e: WeylError) -> None:
        fi, col = self._locate(e.target)
        self.factors[fi].apply_weyl(WeylError(e.x_power, e.z_power, col))

    def measure_basic(self, qupit: int):
        fi, col = self._locate(qupit)
        return self.factors[fi].measure_basic(col)

    def norm(self) -> float:
        return float(np.prod([f.norm() for f in self.factors]))

    def support_size(self) -> int:
        return max((len(f.amps) for f in self.factors), default=0)

    def flatten(self, qupits=None) -> SparseState:
        """Single SparseState on `qupits` (default: all, in global order).
        Factors fully outside the requested set must be dropped separately."""
        if qupits is None:
            qupits = list(range(self.num_qupits))
        involved = sorted({self._locate(q)[0] for q in qupits})
        merged = self.factors[involved[0]].copy()
        ids = list(self.index[involved[0]])
        for fi in involved[1:]:
            merged = merged.tensor(self.factors[fi])
            ids += list(self.index[fi])
        extra = [q for q in ids if q not in qupits]
        if extra:
            raise SimulationError(
                f"requested qupits are entangled with {sorted(extra)}"
            )
        perm = [ids.index(q) for q in qupits]
        return SparseState(self.p, len(perm), merged.labels[:, perm], merged.amps)

    def discard(self, qupits, atol: float = 1e-9) -> None:
        """Remove the given qupits, verifying they form an exact tensor
        factor (raises EntangledError otherwise)."""
        todo = set(qupits)
        for fi in sorted(range(len(self.factors)), reverse=True):
            ids = self.index[fi]
            inside = todo.intersection(ids)
            if not inside:
                continue
            if len(inside) == len(ids):
                del self.factors[fi]
                del self.index[fi]
            else:
                cols_keep = [i for i, q in enumerate(ids) if q not in inside]
                cols_drop = [i for i, q in enumerate(ids) if q in inside]
                factor = self.factors[fi]
                kept = _split_product(factor, cols_keep, cols_drop, atol)
                self.factors[fi] = kept
                self.index[fi] = tuple(q for q in ids if q not in inside)
            todo -= inside
        if todo:
            raise SimulationError(f"qupits {sorted(todo)} not present")

    def try_discard(self, qupits, atol: float = 1e-9) -> bool:
        try:
            self.discard(qupits, atol)
            return True
        except EntangledError:
            return False


def _split_product(factor: SparseState, cols_keep, cols_drop, atol: float):
    """Split `factor` as (keep-part) x (drop-part); returns the keep-part.
    Exact check: every keep-group must carry the same normalized drop-part."""
    keep_labels = factor.labels[:, cols_keep]
    drop_labels = factor.labels[:, cols_drop]
    order = np.lexsort(
        np.vstack([drop_labels.T[::-1], keep_labels.T[::-1]])
    )
    kl, dl, am = keep_labels[order], drop_labels[order], factor.amps[order]
    diff = np.any(kl[1:] != kl[:-1], axis=1)
    starts = np.concatenate(([0], np.nonzero(diff)[0] + 1, [len(am)]))
    ref_drop = None
    ref_amps = None
    new_labels = []
    new_amps = []
    for gi in range(len(starts) - 1):
        lo, hi = starts[gi], starts[gi + 1]
        seg_drop, seg_amps = dl[lo:hi], am[lo:hi]
        if ref_drop is None:
            ref_drop, ref_amps = seg_drop, seg_amps
            ref_norm2 = np.sum(np.abs(ref_amps) ** 2)
        else:
            if seg_drop.shape != ref_drop.shape or not np.array_equal(
                seg_drop, ref_drop
            ):
                raise EntangledError("register is not a tensor factor")
        ratio = np.vdot(ref_amps, seg_amps) / ref_norm2
        if not np.allclose(seg_amps, ratio * ref_amps, atol=atol, rtol=0):
            raise EntangledError("register is not a tensor factor")
        new_labels.append(kl[lo])
        new_amps.append(ratio * math.sqrt(ref_norm2))
    return SparseState(factor.p, len(cols_keep), np.array(new_labels), new_amps)
