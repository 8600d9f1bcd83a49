"""Typed forward-cone spread analysis.

For every fault location the analyzer propagates X-type and Z-type error
components through the gadget's layers using per-gate-kind conjugation
rules (controls catch Z kickback from their targets, targets catch X from
their controls, Fourier-type gates swap the two), and reports the set of
output qupits the fault can reach.  The spread l is the maximum per-block
cone size over all locations.

This is a syntactic over-approximation: consistent-decode cancellations
inside correction-style procedures are invisible to it, so their cones
come out at block size even though the exhaustive fault sweeps certify an
effective spread of 1.  The transversal gate family analyzes to exactly 1.
"""

from __future__ import annotations

from dataclasses import dataclass

from .base import Gadget


@dataclass
class SpreadReport:
    gadget: str
    spread: int
    worst_location: tuple
    per_location: dict
    output_qupits: tuple

    def to_json_dict(self) -> dict:
        return {
            "gadget": self.gadget,
            "l": self.spread,
            "worst_location": list(self.worst_location),
            "locations_analyzed": len(self.per_location),
        }


def _propagate(flags: dict, gate) -> None:
    """flags: qupit -> [can_x, can_z]; update through one gate."""
    k = gate.kind
    t = gate.targets

    def get(q):
        return flags.setdefault(q, [False, False])

    if k in ("add_const", "scalar_mul", "not_p2"):
        return
    if k in ("phase", "phase_i_p2"):
        f = get(t[0])
        if f[0]:
            f[1] = True  # diagonal gates conjugate X into XZ on the qupit
        return
    if k in ("fourier", "rot_x_p2"):
        f = get(t[0])
        f[0], f[1] = f[1], f[0]
        return
    if k in ("controlled_sum", "cnot_p2"):
        a, b2 = t
        fa, fb = get(a), get(b2)
        if fa[0]:
            fb[0] = True  # shift on the control changes the target
        if fb[1]:
            fa[1] = True  # phase on the target kicks onto the control
        return
    if k == "toffoli_pq":
        a, b2, c = t
        fa, fb, fc = get(a), get(b2), get(c)
        if fa[0] or fb[0]:
            fc[0] = True
        if fc[1]:
            fa[1] = True
            fb[1] = True
        return
    raise AssertionError(k)  # pragma: no cover


def analyze_spread(gadget: Gadget, locations=None) -> SpreadReport:
    """Forward cones through the layer DAG.  `locations` defaults to every
    just-before-use wire point plus every gate point (faults on idle
    stretches propagate identically to the next use)."""
    outputs = tuple(q for block in gadget.output_blocks for q in block)
    out_set = set(outputs)
    if locations is None:
        locations = []
        seen = set()
        for ti, layer in enumerate(gadget.layers):
            for g in layer:
                for q in g.targets:
                    if (q, ti) not in seen:
                        seen.add((q, ti))
                        locations.append(("wire", q, ti))
                locations.append(("gate", g.targets, ti))
    per_location = {}
    worst = ("none", 0)
    best_spread = 0
    for loc in locations:
        kind, what, start = loc
        flags: dict = {}
        if kind == "wire":
            flags[what] = [True, True]
        else:
            for q in what:
                flags[q] = [True, True]
        for ti in range(start, gadget.depth):
            for g in gadget.layers[ti]:
                if any(q in flags and any(flags[q]) for q in g.targets):
                    _propagate(flags, g)
        cone = {q for q, f in flags.items() if any(f) and q in out_set}
        per_block = max(
            (len(cone.intersection(block)) for block in gadget.output_blocks),
            default=0,
        )
        per_location[loc] = per_block
        if per_block > best_spread:
            best_spread = per_block
            worst = loc
    return SpreadReport(
        gadget=gadget.name,
        spread=best_spread,
        worst_location=worst,
        per_location=per_location,
        output_qupits=outputs,
    )
