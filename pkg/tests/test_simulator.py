import random

import pytest
from hypothesis import given, settings, strategies as st

from toadnet import (
    AccumulationMode,
    CrosstalkParams,
    FaultSpec,
    InvalidParameterError,
    NodeCoord,
    Packet,
    build_banyan,
    normalized_crosstalk,
    propagate,
    route,
    series_crosstalk,
    simulate_slots,
)
from toadnet.simulator import contaminated_stages

P = CrosstalkParams(0.006, 0.004, 2)
P_LIN = CrosstalkParams(0.006, 0.004, 2, AccumulationMode.LINEAR)


def random_traffic(k, count, rnd, slots):
    ports = 1 << k
    traffic, used = [], set()
    while len(traffic) < count:
        src, slot = rnd.randrange(ports), rnd.randrange(slots)
        if (src, slot) in used:
            continue
        used.add((src, slot))
        traffic.append(Packet(len(traffic), src, rnd.randrange(ports), rnd.uniform(0.1, 5.0), slot))
    return traffic


class TestPropagate:
    topo = build_banyan(3)
    path = route(topo, 0, 5)

    def test_clean(self):
        assert propagate(self.topo, self.path, 1.3, P) == 1.3

    def test_worst_case(self):
        got = propagate(self.topo, self.path, 1.0, P, FaultSpec(NodeCoord(1, 0)))
        assert got == pytest.approx(1.061208, rel=1e-12)

    def test_fault_at_stage_two(self):
        got = propagate(self.topo, self.path, 1.0, P, FaultSpec(NodeCoord(2, 1)))
        assert got == pytest.approx(1.0404, rel=1e-12)
        assert got - 1.0 == pytest.approx(series_crosstalk(P, 2), rel=1e-12)

    def test_linear(self):
        got = propagate(self.topo, self.path, 2.0, P_LIN, FaultSpec(NodeCoord(1, 0)))
        assert got == pytest.approx(2.0 * 1.06, rel=1e-12)

    def test_off_path_fault_is_clean(self):
        assert propagate(self.topo, self.path, 1.0, P, FaultSpec(NodeCoord(2, 0))) == 1.0

    def test_bad_power(self):
        with pytest.raises(InvalidParameterError):
            propagate(self.topo, self.path, 0.0, P)


def test_earliest_fault_governs():
    path = route(build_banyan(4), 3, 12)
    faults = [FaultSpec(path.node_at(3)), FaultSpec(path.node_at(2)), FaultSpec(NodeCoord(1, 7))]
    on_path = path.node_at(1) == NodeCoord(1, 7)
    assert contaminated_stages(path, faults) == (4 if on_path else 3)


def test_single_packet():
    res = simulate_slots(build_banyan(3), [Packet(0, 2, 6, 1.0, 4)], P)
    (tap,) = res.taps
    assert tap.slot_delivered == 7
    assert tap.s_out == 1.0
    assert res.dropped == () and res.buffered_events == 0


def test_two_packet_contention():
    # inputs 0 and 4 meet at router (1,0); destinations 0 and 1 both exit port 0 there
    res = simulate_slots(build_banyan(3), [Packet(0, 0, 0), Packet(1, 4, 1)], P)
    delivered = {t.packet_id: t.slot_delivered for t in res.taps}
    assert delivered == {0: 3, 1: 4}
    assert res.buffered_events == 1
    assert res.dropped == ()


def test_double_contention_drop():
    # hand-stepped:
    # slot 1: packets 0 and 2 meet at (2,0) exit 0, packet 2 buffered
    # slot 2: packets 0 and 1 meet at (3,0) exit 0, packet 1 buffered
    # slot 3: packet 2 reaches (3,0) exit 0 while packet 1 holds the buffer
    traffic = [Packet(0, 0, 0), Packet(1, 1, 0), Packet(2, 2, 0)]
    res = simulate_slots(build_banyan(3), traffic, P)
    assert res.dropped == (2,)
    assert res.buffered_events == 2
    assert {t.packet_id: t.slot_delivered for t in res.taps} == {0: 3, 1: 4}


def test_validation():
    topo = build_banyan(3)
    with pytest.raises(InvalidParameterError):
        simulate_slots(topo, [], P)
    with pytest.raises(InvalidParameterError):
        simulate_slots(topo, [Packet(0, 9, 0)], P)
    with pytest.raises(InvalidParameterError):
        simulate_slots(topo, [Packet(0, 1, 0), Packet(0, 2, 0)], P)
    with pytest.raises(InvalidParameterError):
        simulate_slots(topo, [Packet(0, 1, 0), Packet(1, 1, 3)], P)
    with pytest.raises(InvalidParameterError):
        simulate_slots(topo, [Packet(0, 1, 0)], P, [FaultSpec(NodeCoord(4, 0))])
    with pytest.raises(InvalidParameterError):
        Packet(0, 1, 0, p0=0.0)


@pytest.mark.parametrize("k, seed", [(3, 1), (4, 2), (5, 3), (6, 4)])
def test_random_runs_laws(k, seed):
    rnd = random.Random(seed)
    topo = build_banyan(k)
    traffic = random_traffic(k, 2500, rnd, slots=2500 // (1 << k) * 2 + 1)
    faults = [FaultSpec(NodeCoord(rnd.randint(1, k), rnd.randrange(1 << (k - 1)))) for _ in range(2)]
    res = simulate_slots(topo, traffic, P, faults)
    tapped = [t.packet_id for t in res.taps]
    assert len(tapped) + len(res.dropped) == len(traffic)
    assert sorted(tapped + list(res.dropped)) == list(range(len(traffic)))
    assert sum(t.buffered for t in res.taps) <= res.buffered_events
    for tap in res.taps:
        assert tap.slot_delivered - tap.slot_injected == k + tap.buffered
        assert tap.lightpath == route(topo, tap.lightpath.src, tap.lightpath.dst)
        c = contaminated_stages(tap.lightpath, faults)
        x = normalized_crosstalk(tap.s_out, tap.p_in)
        assert x == pytest.approx(series_crosstalk(P, c), rel=1e-12, abs=1e-12)


def test_deterministic():
    rnd = random.Random(7)
    traffic = random_traffic(4, 300, rnd, slots=40)
    faults = [FaultSpec(NodeCoord(2, 3))]
    a = simulate_slots(build_banyan(4), traffic, P, faults, noise_r=0.01, rng=random.Random(5))
    b = simulate_slots(build_banyan(4), traffic, P, faults, noise_r=0.01, rng=random.Random(5))
    assert a == b


def test_noise_bounds():
    traffic = [Packet(i, i, 7 - i, 2.0) for i in range(8)]
    res = simulate_slots(build_banyan(3), traffic, P, noise_r=0.01, rng=random.Random(1))
    for tap in res.taps:
        assert 2.0 * 0.99 <= tap.s_out <= 2.0 * 1.01


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_conservation_property(k, seed):
    rnd = random.Random(seed)
    traffic = random_traffic(k, rnd.randint(1, min(40, 6 << k)), rnd, slots=6)
    res = simulate_slots(build_banyan(k), traffic, P)
    assert len(res.taps) + len(res.dropped) == len(traffic)
