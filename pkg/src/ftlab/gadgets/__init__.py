"""Fault-tolerant procedure library: transversal gate gadgets, Toffoli
constructions, correction/initialization/reading procedures, the spread
analyzer, and the exhaustive single-fault sweep harness."""

from .base import Builder, Gadget, GadgetError, run_gadget
from .procedures import (
    adversarial_fanout_gadget,
    correction_gadget,
    extract_parity,
    initialization_gadget,
    reading_gadget,
    readout_majority,
)
from .spread import SpreadReport, analyze_spread
from .sweep import (
    SweepReport,
    fault_locations,
    match_weyl_deviation,
    nonidentity_weyls,
    single_fault_sweep,
)
from .toffoli import (
    AStatePrep,
    NonFaultTolerantAPrep,
    encoded_cat_subroutine,
    majority_vote_circuit,
    toffoli_gadget_p2,
    toffoli_gadget_poly,
)
from .transversal import gate_gadget_catalog, transversal_gadget

__all__ = [
    "AStatePrep",
    "Builder",
    "Gadget",
    "GadgetError",
    "NonFaultTolerantAPrep",
    "SpreadReport",
    "SweepReport",
    "adversarial_fanout_gadget",
    "analyze_spread",
    "correction_gadget",
    "encoded_cat_subroutine",
    "extract_parity",
    "fault_locations",
    "gate_gadget_catalog",
    "initialization_gadget",
    "majority_vote_circuit",
    "match_weyl_deviation",
    "nonidentity_weyls",
    "readout_majority",
    "reading_gadget",
    "run_gadget",
    "single_fault_sweep",
    "toffoli_gadget_p2",
    "toffoli_gadget_poly",
    "transversal_gadget",
]
