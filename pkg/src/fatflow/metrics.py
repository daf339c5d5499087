"""Evaluation metrics and the theoretical throughput/latency/balance bounds.

Everything is pure post-processing over immutable run outputs: per-link load
maps (offered demands or achieved rates, the caller picks which), utilization
snapshots, probe results, and the per-event throughput series.
"""

from __future__ import annotations

import math
from typing import Mapping, Optional, Sequence

import numpy as np

from .engine import ProbeResult
from .topology import Topology


def edge_upstream_loads(topo: Topology, link_loads: Mapping[int, float]) -> list[float]:
    """Total load each edge switch pushes upward, in edge order."""
    return [
        sum(link_loads.get(lid, 0.0) for lid in topo.edge_uplink_ids(e))
        for e in topo.edge_switches
    ]


def edge_load_distribution(topo: Topology, link_loads: Mapping[int, float]) -> list[float]:
    """Per-edge upstream load divided by the k/2 upstream paths of the edge."""
    paths = topo.k // 2
    return [load / paths for load in edge_upstream_loads(topo, link_loads)]


def aggregate_load(topo: Topology, link_loads: Mapping[int, float]) -> list[float]:
    """Per-aggregate sum of incoming edge loads over the k/2 paths, agg order."""
    paths = topo.k // 2
    return [
        sum(link_loads.get(lid, 0.0) for lid in topo.agg_inlink_ids(a)) / paths
        for a in topo.agg_switches
    ]


def throughput_bounds(topo: Topology, link_loads: Mapping[int, float]) -> tuple[float, float]:
    """(best-case, worst-case) throughput from the per-edge load split.

    Best case spreads every edge's load over its paths and sums; worst case
    is pinned by the least-loaded edge, idle edges included.
    """
    dist = edge_load_distribution(topo, link_loads)
    if not dist:
        return 0.0, 0.0
    return sum(dist), min(dist)


def latency_proxies(t_max: float, t_min: float) -> tuple[float, float]:
    """Reciprocal-throughput latency proxies; inf flags an unbounded proxy.

    These are coarse stand-ins reported alongside measured probe RTT, never
    in place of it.
    """
    l_max = 1.0 / t_max if t_max > 0 else math.inf
    l_min = 1.0 / t_min if t_min > 0 else math.inf
    return l_max, l_min


def load_balance_efficiency(topo: Topology, link_loads: Mapping[int, float]) -> float:
    """How close each pod's aggregate uplink loads sit to a perfect 1/P split.

    1.0 means every aggregate of every pod carries exactly its fair share of
    the pod's edge load; an idle pod counts as balanced. Pods are averaged
    and the result clamped to [0, 1].
    """
    half = topo.k // 2
    pods = sorted({a.pod for a in topo.agg_switches})
    per_pod = []
    for pod in pods:
        aggs = [a for a in topo.agg_switches if a.pod == pod]
        agg_loads = [
            sum(link_loads.get(lid, 0.0) for lid in topo.agg_inlink_ids(a))
            for a in aggs
        ]
        total = sum(agg_loads)
        if total <= 0:
            per_pod.append(1.0)
            continue
        dev = sum((load / total - 1.0 / half) ** 2 for load in agg_loads)
        per_pod.append(1.0 - dev / half)
    eff = sum(per_pod) / len(per_pod) if per_pod else 1.0
    return min(1.0, max(0.0, eff))


def bisection_series_from_events(event_log: Sequence[dict]) -> list[tuple[float, float]]:
    """Recover the cross-bisection throughput step series from an engine
    event log (arrival/departure records carry the post-event rate)."""
    series = [(0.0, 0.0)]
    for rec in event_log:
        if "bisection_rate" in rec:
            series.append((rec["t"], rec["bisection_rate"]))
    return series


def bisection_bandwidth(series: Sequence[tuple[float, float]],
                        horizon: float) -> tuple[list[tuple[float, float]], float]:
    """Time-weighted mean of the cross-bisection throughput step series.

    `series` holds (time, rate) points as emitted by the engine; the last
    value is held until the horizon.
    """
    if horizon <= 0:
        raise ValueError("horizon must be > 0")
    points = list(series)
    if any(t1 < t0 for (t0, _), (t1, _) in zip(points, points[1:])):
        raise ValueError("series times must be nondecreasing")
    if not points or points[0][0] > 0:
        points = [(0.0, 0.0)] + points
    area = 0.0
    for (t0, v), (t1, _) in zip(points, points[1:]):
        if t0 >= horizon:
            break
        area += v * (min(t1, horizon) - t0)
    last_t, last_v = points[-1]
    if last_t < horizon:
        area += last_v * (horizon - last_t)
    return list(points), area / horizon


def utilization_cdf(samples: Sequence[Sequence[float]]) -> list[tuple[float, float]]:
    """Empirical CDF of per-link time-averaged utilization.

    `samples` is a list of snapshots, one utilization value per monitored
    link each; links are averaged across snapshots, then sorted.
    """
    if not samples:
        raise ValueError("need at least one utilization snapshot")
    means = np.asarray(samples, dtype=float).mean(axis=0)
    order = np.sort(means)
    n = len(order)
    return [(float(u), (i + 1) / n) for i, u in enumerate(order)]


def cdf_value_at(cdf: Sequence[tuple[float, float]], fraction: float) -> float:
    """Utilization at a cumulative-fraction query, linearly interpolated."""
    if not cdf:
        raise ValueError("empty CDF")
    if not (0.0 <= fraction <= 1.0):
        raise ValueError(f"fraction must be in [0, 1], got {fraction!r}")
    fracs = [f for _, f in cdf]
    utils = [u for u, _ in cdf]
    return float(np.interp(fraction, fracs, utils))


def mice_loss_and_rtt(results: Sequence[ProbeResult]) -> tuple[float, Optional[float]]:
    """(loss fraction, mean absolute RTT deviation); deviation is None when
    nothing was delivered."""
    if not results:
        raise ValueError("no probe results")
    delivered = [r.rtt for r in results if r.delivered]
    loss = 1.0 - len(delivered) / len(results)
    if not delivered:
        return loss, None
    rtts = np.asarray(delivered)
    return loss, float(np.abs(rtts - rtts.mean()).mean())
