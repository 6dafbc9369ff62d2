"""Shared value types: positions, packets, and forwarding table rows.

Everything here is a plain immutable value.  Distances are meters, times
are seconds, speeds are meters per second.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

NodeId = int


@dataclass(frozen=True)
class NodePos:
    """A planar position in meters."""

    x: float
    y: float


def distance(a: NodePos, b: NodePos) -> float:
    """Euclidean distance between two positions, in meters."""
    return math.hypot(a.x - b.x, a.y - b.y)


@dataclass(frozen=True)
class HelloPacket:
    """Neighbor discovery beacon; dist_to_sink is the sender's own distance."""

    source_id: NodeId
    source_pos: NodePos
    dist_to_sink: float


@dataclass(frozen=True)
class AckPacket:
    """Reply to a HelloPacket carrying the responder's advertised state."""

    neighbor_id: NodeId
    neighbor_pos: NodePos
    dist_to_sink: float
    residual_energy: float


@dataclass(frozen=True)
class LinkDelayComponents:
    """One-way delay breakdown for a single link traversal.

    The total one-way delay is (mac_delay + queue_delay + tx_delay)
    multiplied by tx_count, the number of transmission attempts used.
    """

    mac_delay: float
    queue_delay: float
    tx_delay: float
    tx_count: int


@dataclass(frozen=True)
class DataPacket:
    """An application packet with its end-to-end deadline bookkeeping.

    t_set is the deadline granted at creation and never changes; t_l is
    the remaining budget, reduced by each traversed link's delay.  A
    duplicate copy shares the event_id of the original.
    """

    event_id: int
    source_id: NodeId
    sink_id: NodeId
    t_set: float
    t_l: float
    created_at: float
    hop_count: int = 0
    is_duplicate: bool = False


@dataclass(frozen=True)
class ForwardingEntry:
    """One neighbor row in a node's forwarding table.

    link_delay of 0.0 means the link has not been measured yet; such
    neighbors are never chosen as next hops.
    """

    neighbor_id: NodeId
    neighbor_pos: NodePos
    dist_to_sink: float
    link_delay: float = 0.0
    residual_energy: float = 0.0
