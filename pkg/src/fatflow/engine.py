"""Deterministic flow-level event loop.

One engine instance owns one simulation run: it admits flows, asks the
configured scheduler for paths, re-solves the max-min fair rate allocation on
every arrival and departure, classifies elephants from polled byte counts,
and evaluates mice probes against per-link overload and queuing state.

All randomness comes from two private streams derived from the run seed, so
identical inputs replay to identical event logs.
"""

from __future__ import annotations

import heapq
import itertools
import random
from dataclasses import dataclass
from typing import Optional

from .schedulers import MECH_CONTROLLER, SchedulerKind, dispatch
from .topology import LinkKind, Path, Topology
from .traffic import MICE, Flow, crosses_bisection, probe_schedule


class EngineError(RuntimeError):
    pass


@dataclass(frozen=True)
class EngineParams:
    """Simulator knobs that are not part of the workload."""

    poll_interval: float = 1.0  # seconds between stats polls
    detection_threshold: float = 50_000.0  # bits/s over a poll interval
    base_hop_latency: float = 50e-6  # seconds per link traversal
    queuing_scale: float = 500e-6  # seconds, scales the rho/(1-rho) term
    rho_cap: float = 0.99  # keeps the queuing term finite at saturation


@dataclass(frozen=True)
class ProbeResult:
    flow_id: int
    emit_time: float
    delivered: bool
    rtt: Optional[float]  # seconds, None when lost


def waterfill(demands: dict[int, float], paths: dict[int, tuple[int, ...]],
              capacities: dict[int, float]) -> dict[int, float]:
    """Max-min fair rates by progressive filling.

    All flows rise together from zero; each round freezes every flow that
    hits its demand and every flow on the tightest link at that link's fair
    share. A final repair pass nudges rates down by at most a few ulps so
    per-link sums never exceed capacity even in float arithmetic.
    """
    rates = {fid: 0.0 for fid in demands}
    users: dict[int, set[int]] = {}
    link_members: dict[int, list[int]] = {}
    for fid in sorted(paths):
        for lid in paths[fid]:
            users.setdefault(lid, set()).add(fid)
            link_members.setdefault(lid, []).append(fid)
    frozen_sum = {lid: 0.0 for lid in users}
    unfrozen = {fid for fid, d in demands.items() if d > 0}
    for fid in demands:
        if fid not in unfrozen:
            rates[fid] = 0.0

    while unfrozen:
        level = None
        for lid in users:
            n = len(users[lid])
            if n == 0:
                continue
            share = (capacities[lid] - frozen_sum[lid]) / n
            if level is None or share < level:
                level = share
        min_demand = min(demands[fid] for fid in unfrozen)
        if level is None or min_demand < level:
            level = min_demand
        level = max(level, 0.0)

        to_freeze = {fid for fid in unfrozen if demands[fid] <= level}
        for lid, members in users.items():
            if members and (capacities[lid] - frozen_sum[lid]) / len(members) <= level:
                to_freeze |= members
        for fid in sorted(to_freeze):
            v = min(level, demands[fid])
            rates[fid] = v
            for lid in paths[fid]:
                frozen_sum[lid] += v
                users[lid].discard(fid)
            unfrozen.discard(fid)

    # repair float overshoot: reductions only ever shrink link sums, so one
    # pass in link order suffices
    for lid in sorted(link_members):
        members = link_members[lid]
        s = sum(rates[fid] for fid in members)
        if s > capacities[lid]:
            worst = max(members, key=lambda fid: (rates[fid], fid))
            rates[worst] = max(0.0, rates[worst] - (s - capacities[lid]))
    return rates


def link_loss_probability(offered: float, capacity: float) -> float:
    """Per-traversal drop probability: the overload fraction of offered load."""
    if offered <= capacity:
        return 0.0
    return 1.0 - capacity / offered


def traversal_delay(rho: float, params: EngineParams) -> float:
    """Per-link delay: propagation plus an M/M/1-flavored queuing term.

    rho is the link's offered-to-capacity ratio (the arrival/service ratio of
    the queue), capped so the term stays finite under overload.
    """
    rho = min(rho, params.rho_cap)
    return params.base_hop_latency + params.queuing_scale * rho / (1.0 - rho)


class Engine:
    """One seeded simulation run over a fixed topology and workload."""

    def __init__(self, topo: Topology, scheduler: SchedulerKind,
                 flows: list[Flow], horizon: float,
                 params: EngineParams = EngineParams(), seed: int = 0,
                 probe_interval: Optional[float] = None):
        if horizon <= 0:
            raise EngineError(f"horizon must be > 0, got {horizon!r}")
        self.topology = topo
        self.scheduler = scheduler
        self.horizon = horizon
        self.params = params
        self.probe_interval = probe_interval
        self.dispatch_rng = random.Random(f"{seed}/dispatch")
        self._probe_rng = random.Random(f"{seed}/probe")

        self.clock = 0.0
        self.active: dict[int, Flow] = {}
        self._classified: set[int] = set()
        self._bits_since_poll: dict[int, float] = {}
        self._crosses: dict[int, bool] = {}

        nlinks = len(topo.links)
        self._cap = [l.capacity for l in topo.links]
        self.allocated = [0.0] * nlinks
        self.offered = [0.0] * nlinks
        self.elephants = [0] * nlinks
        self.cumulative_elephants = [0] * nlinks
        self._alloc_integral = [0.0] * nlinks
        self._offered_integral = [0.0] * nlinks
        # what the controller knows: link state as of the last stats poll
        self.polled_residual = list(self._cap)
        self.polled_elephants = [0] * nlinks

        self.bisection_rate = 0.0
        self.bisection_series: list[tuple[float, float]] = [(0.0, 0.0)]
        self._bisection_integral = 0.0

        self.port_stat_reads = 0
        self.uplink_stat_reads = 0
        self.polls = 0
        self.controller_decisions = 0
        self.proactive_decisions = 0
        self.unrouted_flows: set[int] = set()

        self.probe_results: list[ProbeResult] = []
        self.util_snapshots: list[tuple[float, ...]] = []
        self.event_log: list[dict] = []

        self._seq = itertools.count()
        self._queue: list[tuple[float, int, str, object]] = []
        for f in flows:
            if f.start_time < horizon:
                self._push(f.start_time, "arrival", f)
        t = params.poll_interval
        while t <= horizon:
            self._push(t, "poll", None)
            t += params.poll_interval
        self._finished = False

    # -- scheduler-facing snapshot interface ---------------------------------
    # The controller plane sees what it last collected from the switches, so
    # path selection reads the poll-time snapshot, not live data-plane state.

    def residual(self, lid: int) -> float:
        return self.polled_residual[lid]

    def elephant_count(self, lid: int) -> int:
        return self.polled_elephants[lid]

    def agg_uplink_of(self, path: Path) -> Optional[int]:
        for l in path.hops:
            if l.kind == LinkKind.AGG_CORE and l.up:
                return l.id
        return None

    # -- event machinery ------------------------------------------------------

    def _push(self, t: float, kind: str, payload) -> None:
        heapq.heappush(self._queue, (t, next(self._seq), kind, payload))

    def pending_events(self) -> int:
        return len(self._queue)

    def step(self) -> dict:
        """Process exactly one event in (time, sequence) order."""
        if not self._queue:
            raise EngineError("event queue is empty")
        t, seq, kind, payload = heapq.heappop(self._queue)
        self._advance(t)
        if kind == "arrival":
            record = self._on_arrival(payload)
        elif kind == "departure":
            record = self._on_departure(payload)
        elif kind == "probe":
            record = self._on_probe(payload)
        elif kind == "poll":
            record = self._on_poll()
        else:  # pragma: no cover - queue is engine-private
            raise EngineError(f"unknown event kind {kind!r}")
        record.update(seq=seq, t=t, type=kind)
        self.event_log.append(record)
        return record

    def run(self) -> "Engine":
        while self._queue and self._queue[0][0] <= self.horizon:
            self.step()
        self._advance(self.horizon)
        self._finished = True
        return self

    def _advance(self, t: float) -> None:
        dt = t - self.clock
        if dt < 0:
            raise EngineError("clock must be nondecreasing")
        if dt > 0:
            for fid, f in self.active.items():
                if f.achieved_rate > 0:
                    self._bits_since_poll[fid] += f.achieved_rate * dt
            for lid in range(len(self._cap)):
                if self.allocated[lid] > 0:
                    self._alloc_integral[lid] += self.allocated[lid] * dt
                if self.offered[lid] > 0:
                    self._offered_integral[lid] += self.offered[lid] * dt
            self._bisection_integral += self.bisection_rate * dt
            self.clock = t

    # -- event handlers --------------------------------------------------------

    def _on_arrival(self, flow: Flow) -> dict:
        decision = dispatch(self, flow, self.scheduler)
        flow.path = decision.path
        if decision.mechanism == MECH_CONTROLLER:
            self.controller_decisions += 1
        else:
            self.proactive_decisions += 1
        self.active[flow.id] = flow
        self._bits_since_poll[flow.id] = 0.0
        self._crosses[flow.id] = crosses_bisection(self.topology, flow.src, flow.dst)

        if flow.duration is not None:
            end = flow.start_time + flow.duration
            if end < self.horizon:
                self._push(end, "departure", flow.id)
        if flow.kind == MICE and self.probe_interval is not None:
            for pt in probe_schedule(flow, self.horizon, self.probe_interval):
                self._push(pt, "probe", flow)
        self._reallocate()
        return {
            "flow": flow.id,
            "kind": flow.kind,
            "mechanism": decision.mechanism,
            "candidates": decision.candidates_considered,
            "path": repr(flow.path),
            "bisection_rate": self.bisection_rate,
        }

    def _on_departure(self, fid: int) -> dict:
        if fid not in self.active:
            raise EngineError(f"departure for unknown flow id {fid}")
        flow = self.active.pop(fid)
        self._bits_since_poll.pop(fid, None)
        if fid in self._classified and flow.path is not None:
            for lid in flow.path.link_ids:
                self.elephants[lid] -= 1
        flow.achieved_rate = 0.0
        self._reallocate()
        return {"flow": fid, "bisection_rate": self.bisection_rate}

    def _on_probe(self, flow: Flow) -> dict:
        result = self._evaluate_probe(flow)
        self.probe_results.append(result)
        return {"flow": flow.id, "delivered": result.delivered, "rtt": result.rtt}

    def _on_poll(self) -> dict:
        newly = []
        for fid in sorted(self.active):
            if fid in self._classified:
                continue
            observed = self._bits_since_poll[fid] / self.params.poll_interval
            if observed >= self.params.detection_threshold:
                self._classified.add(fid)
                newly.append(fid)
                path = self.active[fid].path
                if path is not None:
                    for lid in path.link_ids:
                        self.elephants[lid] += 1
                        self.cumulative_elephants[lid] += 1
        for fid in self._bits_since_poll:
            self._bits_since_poll[fid] = 0.0
        self.port_stat_reads += self.topology.total_switch_ports
        self.uplink_stat_reads += len(self.topology.agg_upstream_link_ids)
        self.polls += 1
        for lid in range(len(self._cap)):
            self.polled_residual[lid] = self._cap[lid] - self.allocated[lid]
            self.polled_elephants[lid] = self.elephants[lid]
        self.util_snapshots.append(tuple(
            self.allocated[lid] / self._cap[lid]
            for lid in self.topology.monitored_link_ids))
        return {"classified": newly, "port_reads": self.port_stat_reads}

    # -- rate allocation ---------------------------------------------------------

    def _reallocate(self) -> None:
        demands: dict[int, float] = {}
        paths: dict[int, tuple[int, ...]] = {}
        for fid in sorted(self.active):
            f = self.active[fid]
            if not f.is_elephant:
                f.achieved_rate = 0.0
                continue
            if f.path is None:
                self.unrouted_flows.add(fid)
                f.achieved_rate = 0.0
                continue
            demands[fid] = f.demand
            paths[fid] = f.path.link_ids
        caps = {lid: self._cap[lid]
                for links in paths.values() for lid in links}
        rates = waterfill(demands, paths, caps)

        members: dict[int, list[int]] = {}
        offered: dict[int, float] = {}
        for fid in sorted(paths):
            self.active[fid].achieved_rate = rates[fid]
            for lid in paths[fid]:
                members.setdefault(lid, []).append(fid)
                offered[lid] = offered.get(lid, 0.0) + demands[fid]
        nlinks = len(self._cap)
        self.allocated = [0.0] * nlinks
        self.offered = [0.0] * nlinks
        for lid, fids in members.items():
            self.allocated[lid] = sum(rates[fid] for fid in fids)
            self.offered[lid] = offered[lid]

        bis = 0.0
        for fid in sorted(paths):
            if self._crosses[fid]:
                bis += rates[fid]
        self.bisection_rate = bis
        self.bisection_series.append((self.clock, bis))

    # -- probes ---------------------------------------------------------------

    def _traversed_link_ids(self, path: Path) -> list[int]:
        forward = list(path.link_ids)
        back = [self.topology.reverse_ids[lid] for lid in forward]
        return forward + back

    def _evaluate_probe(self, flow: Flow) -> ProbeResult:
        if flow.path is None:
            return ProbeResult(flow.id, self.clock, False, None)
        survival = 1.0
        for lid in self._traversed_link_ids(flow.path):
            survival *= 1.0 - link_loss_probability(self.offered[lid], self._cap[lid])
        delivered = self._probe_rng.random() < survival
        if not delivered:
            return ProbeResult(flow.id, self.clock, False, None)
        rtt = 0.0
        for lid in self._traversed_link_ids(flow.path):
            rho = self.offered[lid] / self._cap[lid]
            rtt += traversal_delay(rho, self.params)
        return ProbeResult(flow.id, self.clock, True, rtt)

    # -- post-run views ----------------------------------------------------------

    def mean_offered_by_link(self) -> dict[int, float]:
        """Time-averaged offered load per link over the whole horizon."""
        return {lid: self._offered_integral[lid] / self.horizon
                for lid in range(len(self._cap))}

    def offered_by_link(self) -> dict[int, float]:
        return {lid: self.offered[lid] for lid in range(len(self._cap))}

    def allocated_by_link(self) -> dict[int, float]:
        return {lid: self.allocated[lid] for lid in range(len(self._cap))}

    def cumulative_bytes(self, lid: int) -> float:
        return self._alloc_integral[lid] / 8.0

    def state_fingerprint(self) -> tuple:
        """Hashable summary used by determinism tests."""
        return (
            self.clock,
            tuple(sorted(self.active)),
            tuple(self.allocated),
            tuple(self.offered),
            tuple(self.elephants),
            self.bisection_rate,
            self.port_stat_reads,
            len(self.event_log),
        )
