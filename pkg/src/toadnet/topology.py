"""Banyan fabrics of 2x2 routers and destination-tag routing.

Stages are numbered 1..k from the input side; routers inside a stage are
numbered 0..2**(k-1)-1. Router ``y`` owns the two links ``2y`` and ``2y+1``
on both its input and output boundary, and the link's low bit is the
router port.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, List, Tuple

from .errors import InvalidParameterError

MAX_STAGES = 24


def perfect_shuffle(address: int, k: int) -> int:
    """Left-rotate the k-bit representation of ``address`` by one."""
    mask = (1 << k) - 1
    return ((address << 1) & mask) | (address >> (k - 1))


# name -> f(stage, link, k); stage argument lets non-uniform wirings plug in
WIRINGS: Dict[str, Callable[[int, int, int], int]] = {
    "shuffle": lambda stage, link, k: perfect_shuffle(link, k),
}


@dataclass(frozen=True, order=True)
class NodeCoord:
    x: int  # stage, 1-based
    y: int  # router index, 0-based

    def __str__(self):
        return f"({self.x},{self.y})"


@dataclass(frozen=True)
class Hop:
    node: NodeCoord
    exit_port: int


@dataclass(frozen=True)
class NetworkTopology:
    k: int
    wiring_name: str = "shuffle"

    @property
    def num_ports(self) -> int:
        return 1 << self.k

    @property
    def routers_per_stage(self) -> int:
        return 1 << (self.k - 1)

    def wire(self, stage: int, link: int) -> int:
        """Map a link address at the input boundary of ``stage`` to a router input link."""
        return WIRINGS[self.wiring_name](stage, link, self.k)

    def stage_permutation(self, stage: int) -> List[int]:
        return [self.wire(stage, a) for a in range(self.num_ports)]

    def contains(self, node: NodeCoord) -> bool:
        return 1 <= node.x <= self.k and 0 <= node.y < self.routers_per_stage

    def check_node(self, node: NodeCoord) -> None:
        if not self.contains(node):
            raise InvalidParameterError(
                f"node {node} outside fabric with k={self.k} "
                f"(stages 1..{self.k}, routers 0..{self.routers_per_stage - 1})"
            )

    def check_port(self, port: int, name: str = "port") -> None:
        if not isinstance(port, int) or not 0 <= port < self.num_ports:
            raise InvalidParameterError(
                f"{name}={port!r} out of range [0, {self.num_ports})"
            )


@dataclass(frozen=True)
class Lightpath:
    src: int
    dst: int
    hops: Tuple[Hop, ...]

    @property
    def k(self) -> int:
        return len(self.hops)

    def node_at(self, stage: int) -> NodeCoord:
        return self.hops[stage - 1].node

    def stage_of(self, node: NodeCoord):
        """Stage at which the path visits ``node``, or None."""
        if 1 <= node.x <= len(self.hops) and self.hops[node.x - 1].node == node:
            return node.x
        return None

    def __contains__(self, node) -> bool:
        return self.stage_of(node) is not None


def build_banyan(k: int, wiring: str = "shuffle", max_stages: int = MAX_STAGES) -> NetworkTopology:
    if not isinstance(k, int) or isinstance(k, bool) or not 1 <= k <= max_stages:
        raise InvalidParameterError(f"k={k!r} must be an integer in [1, {max_stages}]")
    if wiring not in WIRINGS:
        raise InvalidParameterError(f"unknown wiring {wiring!r}; known: {sorted(WIRINGS)}")
    return NetworkTopology(k, wiring)


def route(topo: NetworkTopology, src: int, dst: int) -> Lightpath:
    """Destination-tag route: stage i exits on bit (k-i) of ``dst``, MSB first."""
    topo.check_port(src, "src")
    topo.check_port(dst, "dst")
    k = topo.k
    link = src
    hops = []
    for stage in range(1, k + 1):
        inlet = topo.wire(stage, link)
        y = inlet >> 1
        port = (dst >> (k - stage)) & 1
        hops.append(Hop(NodeCoord(stage, y), port))
        link = 2 * y + port
    return Lightpath(src, dst, tuple(hops))


def replay(topo: NetworkTopology, src: int, exit_ports) -> int:
    """Follow a sequence of exit ports from ``src`` and return the output link reached."""
    link = src
    for stage, port in enumerate(exit_ports, start=1):
        link = 2 * (topo.wire(stage, link) >> 1) + port
    return link
