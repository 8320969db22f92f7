"""Slotted packet simulation of a Banyan fabric with crosstalk fault injection.

Timing model: a packet traverses one stage per slot. Packets that want the
same router exit in the same slot are arbitrated: a packet leaving that
exit's buffer always goes first, otherwise the lower router input port
wins. A loser enters the exit's one-packet buffer and retries next slot; if
the buffer was already occupied at the start of the slot the loser is
dropped.

Power model: routers upstream of the earliest fault on a packet's path add
nothing; the fault router and every router after it add one crosstalk unit.
"""
from __future__ import annotations

import random
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .crosstalk import AccumulationMode, CrosstalkParams
from .errors import InvalidParameterError
from .topology import Lightpath, NetworkTopology, NodeCoord, route


@dataclass(frozen=True)
class Packet:
    id: int
    src: int
    dst: int
    p0: float = 1.0
    slot_injected: int = 0

    def __post_init__(self):
        if not self.p0 > 0:
            raise InvalidParameterError(f"packet {self.id}: p0={self.p0!r} mW must be > 0")
        if self.slot_injected < 0:
            raise InvalidParameterError(f"packet {self.id}: slot_injected must be >= 0")


@dataclass(frozen=True)
class FaultSpec:
    node: NodeCoord


@dataclass(frozen=True)
class TapMeasurement:
    packet_id: int
    p_in: float
    s_out: float
    lightpath: Lightpath
    slot_injected: int
    slot_delivered: int
    buffered: int = 0

    @property
    def latency(self) -> int:
        return self.slot_delivered - self.slot_injected


@dataclass(frozen=True)
class SimulationResult:
    taps: Tuple[TapMeasurement, ...]
    buffered_events: int
    dropped: Tuple[int, ...]
    slots_elapsed: int


def contaminated_stages(path: Lightpath, faults: Iterable[FaultSpec]) -> int:
    """Number of hops from the earliest on-path fault to the destination."""
    onset = None
    for fault in faults:
        stage = path.stage_of(fault.node)
        if stage is not None and (onset is None or stage < onset):
            onset = stage
    return 0 if onset is None else path.k - onset + 1


def propagate(
    topo: NetworkTopology,
    path: Lightpath,
    p0: float,
    params: CrosstalkParams,
    fault: Optional[FaultSpec] = None,
) -> float:
    """Power in mW at the destination of ``path`` after hop-by-hop contamination."""
    if not p0 > 0:
        raise InvalidParameterError(f"p0={p0!r} mW must be > 0")
    return _propagate_from(path, p0, params, [fault] if fault is not None else [])


def _propagate_from(path: Lightpath, p0: float, params: CrosstalkParams, faults) -> float:
    dirty = path.k - contaminated_stages(path, faults) + 1
    unit = params.n * params.x_tot
    power = p0
    for stage in range(dirty, path.k + 1):
        if params.mode is AccumulationMode.MULTIPLICATIVE:
            power *= 1 + unit
        else:
            power += unit * p0
    return power


def simulate_slots(
    topo: NetworkTopology,
    traffic: Sequence[Packet],
    params: CrosstalkParams,
    faults: Sequence[FaultSpec] = (),
    noise_r: float = 0.0,
    rng: Optional[random.Random] = None,
) -> SimulationResult:
    """Run ``traffic`` through ``topo`` slot by slot.

    ``noise_r`` adds uniform relative noise in [-r, r] to each tapped power
    reading, drawn from ``rng`` in delivery order.
    """
    if not traffic:
        raise InvalidParameterError("traffic must be non-empty")
    if noise_r < 0:
        raise InvalidParameterError("noise_r must be >= 0")
    if noise_r and rng is None:
        rng = random.Random(0)
    for fault in faults:
        topo.check_node(fault.node)

    k = topo.k
    seen_ids = set()
    seen_inputs = set()
    arrivals_by_slot: Dict[int, List[Packet]] = defaultdict(list)
    paths: Dict[int, Lightpath] = {}
    for pkt in traffic:
        topo.check_port(pkt.src, f"packet {pkt.id} src")
        topo.check_port(pkt.dst, f"packet {pkt.id} dst")
        if pkt.id in seen_ids:
            raise InvalidParameterError(f"duplicate packet id {pkt.id}")
        if (pkt.src, pkt.slot_injected) in seen_inputs:
            raise InvalidParameterError(
                f"packet {pkt.id}: input {pkt.src} already injects in slot {pkt.slot_injected}"
            )
        seen_ids.add(pkt.id)
        seen_inputs.add((pkt.src, pkt.slot_injected))
        arrivals_by_slot[pkt.slot_injected].append(pkt)
        paths[pkt.id] = route(topo, pkt.src, pkt.dst)

    packets = {pkt.id: pkt for pkt in traffic}
    # stage -> list of (packet id, link address at that stage's input boundary)
    waiting: Dict[int, List[Tuple[int, int]]] = defaultdict(list)
    # (stage, router, exit) -> packet id
    buffers: Dict[Tuple[int, int, int], int] = {}
    buffered_count: Dict[int, int] = defaultdict(int)
    taps: List[TapMeasurement] = []
    dropped: List[int] = []
    buffered_events = 0
    last_injection = max(arrivals_by_slot)

    slot = min(arrivals_by_slot)
    while True:
        for pkt in sorted(arrivals_by_slot.get(slot, ()), key=lambda p: p.src):
            waiting[1].append((pkt.id, pkt.src))
        if slot > last_injection and not buffers and not any(waiting.values()):
            break

        advancing: Dict[int, List[Tuple[int, int]]] = defaultdict(list)
        delivered: List[int] = []
        for stage in range(1, k + 1):
            contenders: Dict[Tuple[int, int], List[Tuple[int, int]]] = defaultdict(list)
            for pid, link in waiting.pop(stage, ()):
                inlet = topo.wire(stage, link)
                exit_port = (packets[pid].dst >> (k - stage)) & 1
                contenders[(inlet >> 1, exit_port)].append((inlet & 1, pid))
            keys = set(contenders)
            keys.update((y, e) for (s, y, e) in buffers if s == stage)
            for y, exit_port in sorted(keys):
                queue = sorted(contenders.get((y, exit_port), ()))
                held = buffers.pop((stage, y, exit_port), None)
                if held is not None:
                    winner, losers, room = held, [pid for _, pid in queue], False
                else:
                    winner, losers, room = queue[0][1], [pid for _, pid in queue[1:]], True
                out_link = 2 * y + exit_port
                if stage == k:
                    delivered.append(winner)
                else:
                    advancing[stage + 1].append((winner, out_link))
                for pid in losers:
                    if room:
                        buffers[(stage, y, exit_port)] = pid
                        buffered_count[pid] += 1
                        buffered_events += 1
                        room = False
                    else:
                        dropped.append(pid)
        waiting = advancing

        for pid in delivered:
            pkt = packets[pid]
            s_out = _propagate_from(paths[pid], pkt.p0, params, faults)
            if noise_r:
                s_out *= 1 + rng.uniform(-noise_r, noise_r)
            taps.append(
                TapMeasurement(pid, pkt.p0, s_out, paths[pid], pkt.slot_injected, slot + 1, buffered_count[pid])
            )
        slot += 1

    return SimulationResult(tuple(taps), buffered_events, tuple(dropped), slot - min(arrivals_by_slot))
