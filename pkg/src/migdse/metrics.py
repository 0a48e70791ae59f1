"""Size-related metrics recorded after every exploration step."""

from __future__ import annotations

from dataclasses import astuple, dataclass

from . import kernels
from .mig import Mig, depth, node_count, reachable

METRIC_NAMES = ("mig_nodes", "depth", "lut6", "transistors")

LUT_SIZE = 6
LUT_CUTS = 8

# Stand-in transistor cost model.
FULL_NODE_COST = 12
CONST_NODE_COST = 6
INVERTER_COST = 2


@dataclass(frozen=True)
class MetricVector:
    mig_nodes: int
    depth: int
    lut6: int
    transistors: int

    def get(self, name: str) -> int:
        if name not in METRIC_NAMES:
            raise KeyError(f"unknown metric {name!r}")
        return getattr(self, name)

    def as_tuple(self) -> tuple[int, int, int, int]:
        return astuple(self)

    def as_dict(self) -> dict[str, int]:
        return dict(zip(METRIC_NAMES, astuple(self)))


def check_metric(name: str) -> str:
    if name not in METRIC_NAMES:
        raise ValueError(f"unknown metric {name!r}; expected one of {', '.join(METRIC_NAMES)}")
    return name


def map_lut6(mig: Mig) -> int:
    """LUT count of an area-flow priority-cut cover (k=6, 8 cuts per node)."""
    if not mig.pos:
        return 0
    return kernels.lut_map(mig.flat_fanins(), mig.num_pis, mig.pos, LUT_SIZE, LUT_CUTS)


def transistor_estimate(mig: Mig) -> int:
    """Deterministic transistor count under the package's cost model.

    A node with three non-constant fanins costs 12, one with a constant fanin
    (an AND or OR) costs 6, and every complemented edge from a PI or node,
    including PO edges, adds an inverter of 2.
    """
    mask = reachable(mig) if mig.num_allocated else bytearray(mig.num_pis + 1)
    total = 0
    fan = mig._fanins
    for n in mig.nodes():
        if not mask[n]:
            continue
        cost = FULL_NODE_COST
        for s in fan[n]:
            if s >> 1 == 0:
                cost = CONST_NODE_COST
            elif s & 1:
                total += INVERTER_COST
        total += cost
    for s in mig.pos:
        if s & 1 and s >> 1:
            total += INVERTER_COST
    return total


def compute_metrics(mig: Mig) -> MetricVector:
    return MetricVector(node_count(mig), depth(mig), map_lut6(mig), transistor_estimate(mig))
