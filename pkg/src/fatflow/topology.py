"""k-ary fat-tree topology builder and equal-cost path enumeration.

Links are modeled as unidirectional pairs so upstream and downstream loads
can be tracked separately. Node numbering is deterministic (pods ascending,
indices ascending), which makes path enumeration and every tie-break
downstream of it reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional


class Tier(Enum):
    HOST = "host"
    EDGE = "edge"
    AGG = "agg"
    CORE = "core"


class LinkKind(Enum):
    HOST_EDGE = "host-edge"
    EDGE_AGG = "edge-agg"
    AGG_CORE = "agg-core"


class TopologyError(ValueError):
    pass


@dataclass(frozen=True)
class NodeId:
    """A switch or host, identified by (tier, pod, index).

    Core switches carry no pod (index is global); edge/aggregate switches and
    hosts are indexed within their pod. The single hub switch of a star
    topology also carries no pod.
    """

    tier: str  # one of Tier values; plain str keeps ordering/hashing cheap
    pod: Optional[int]
    index: int

    @property
    def sort_key(self) -> tuple[str, int, int]:
        return (self.tier, -1 if self.pod is None else self.pod, self.index)

    @property
    def label(self) -> str:
        if self.pod is None:
            return f"{self.tier}{self.index}"
        return f"{self.tier}{self.pod}_{self.index}"

    def __repr__(self) -> str:
        return self.label


@dataclass(frozen=True)
class Link:
    """One direction of a cable. `up` means toward the core."""

    id: int
    src: NodeId
    dst: NodeId
    capacity: float  # bits/second
    kind: LinkKind
    up: bool

    def __repr__(self) -> str:
        arrow = "^" if self.up else "v"
        return f"{self.src.label}->{self.dst.label}{arrow}"


@dataclass(frozen=True)
class Path:
    """A simple host-to-host walk, as an ordered tuple of directed links.

    `agg_index` / `core_index` identify the upstream aggregate / core switch
    the path climbs through (None where the path never reaches that tier).
    They define the canonical path order: ascending aggregate index, then
    core index.
    """

    hops: tuple[Link, ...]
    agg_index: Optional[int]
    core_index: Optional[int]

    @property
    def link_ids(self) -> tuple[int, ...]:
        return tuple(l.id for l in self.hops)

    @property
    def nodes(self) -> tuple[NodeId, ...]:
        return (self.hops[0].src,) + tuple(l.dst for l in self.hops)

    @property
    def sort_key(self) -> tuple[int, int, int]:
        return (
            len(self.hops),
            -1 if self.agg_index is None else self.agg_index,
            -1 if self.core_index is None else self.core_index,
        )

    def __repr__(self) -> str:
        return "->".join(n.label for n in self.nodes)


class Topology:
    """Immutable network graph with host/switch inventories and link indexes.

    `layout` is "fat-tree" or "star" (the non-blocking baseline: every host
    hangs off one hub switch).
    """

    def __init__(self, k: int, link_capacity: float, layout: str,
                 nodes: list[NodeId], links: list[Link]):
        self.k = k
        self.link_capacity = link_capacity
        self.layout = layout
        self.nodes = tuple(nodes)
        self.links = tuple(links)

        self.hosts = tuple(n for n in self.nodes if n.tier == Tier.HOST.value)
        self.edge_switches = tuple(n for n in self.nodes if n.tier == Tier.EDGE.value)
        self.agg_switches = tuple(n for n in self.nodes if n.tier == Tier.AGG.value)
        self.core_switches = tuple(n for n in self.nodes if n.tier == Tier.CORE.value)
        self.switches = self.edge_switches + self.agg_switches + self.core_switches

        self._link_by_pair = {(l.src, l.dst): l for l in self.links}
        self._host_set = set(self.hosts)
        # reverse_ids[i] = id of the opposite-direction link of link i
        self.reverse_ids = tuple(
            self._link_by_pair[(l.dst, l.src)].id for l in self.links
        )
        self.agg_upstream_link_ids = tuple(
            l.id for l in self.links if l.kind == LinkKind.AGG_CORE and l.up
        )
        self.switch_link_ids = tuple(
            l.id for l in self.links if l.kind != LinkKind.HOST_EDGE
        )
        # what the utilization CDF ranges over: switch-to-switch links on the
        # fat-tree; the star has none, so its access links stand in
        self.monitored_link_ids = self.switch_link_ids or tuple(
            l.id for l in self.links
        )

        degree: dict[NodeId, int] = {}
        for l in self.links:
            if l.src.tier != Tier.HOST.value:
                degree[l.src] = degree.get(l.src, 0) + 1
        self.ports_per_switch = degree
        self.total_switch_ports = sum(degree.values())

    # -- queries ------------------------------------------------------------

    def link(self, src: NodeId, dst: NodeId) -> Link:
        return self._link_by_pair[(src, dst)]

    def host_number(self, host: NodeId) -> int:
        """Global host index in [0, k^3/4), stable across builds."""
        per_pod = (self.k // 2) ** 2
        if host.pod is None:
            return host.index
        return host.pod * per_pod + host.index

    def host_edge_switch(self, host: NodeId) -> NodeId:
        if host not in self._host_set:
            raise TopologyError(f"unknown host {host!r}")
        if self.layout == "star":
            return self.edge_switches[0]
        return NodeId(Tier.EDGE.value, host.pod, host.index // (self.k // 2))

    def equal_cost_paths(self, src: NodeId, dst: NodeId) -> list[Path]:
        """All shortest paths from host `src` to host `dst`, canonically ordered."""
        if src == dst:
            raise TopologyError("src and dst must differ")
        for h in (src, dst):
            if h not in self._host_set:
                raise TopologyError(f"unknown host {h!r}")

        e_src = self.host_edge_switch(src)
        e_dst = self.host_edge_switch(dst)
        first = self.link(src, e_src)
        last = self.link(e_dst, dst)

        if e_src == e_dst:
            return [Path((first, last), None, None)]

        half = self.k // 2
        paths = []
        if src.pod == dst.pod:
            # one path per aggregate switch of the pod
            for j in range(half):
                agg = NodeId(Tier.AGG.value, src.pod, j)
                hops = (first, self.link(e_src, agg), self.link(agg, e_dst), last)
                paths.append(Path(hops, j, None))
        else:
            # one path per core switch; core c attaches to aggregate c // half
            for c in range(half * half):
                j = c // half
                agg_s = NodeId(Tier.AGG.value, src.pod, j)
                agg_d = NodeId(Tier.AGG.value, dst.pod, j)
                core = NodeId(Tier.CORE.value, None, c)
                hops = (
                    first,
                    self.link(e_src, agg_s),
                    self.link(agg_s, core),
                    self.link(core, agg_d),
                    self.link(agg_d, e_dst),
                    last,
                )
                paths.append(Path(hops, j, c))
        return paths

    def aggregate_upstream_links(self) -> tuple[Link, ...]:
        """The aggregate-to-core upstream links, ordered by link id."""
        return tuple(self.links[i] for i in self.agg_upstream_link_ids)

    def edge_uplink_ids(self, edge: NodeId) -> tuple[int, ...]:
        return tuple(
            l.id for l in self.links
            if l.kind == LinkKind.EDGE_AGG and l.up and l.src == edge
        )

    def agg_inlink_ids(self, agg: NodeId) -> tuple[int, ...]:
        return tuple(
            l.id for l in self.links
            if l.kind == LinkKind.EDGE_AGG and l.up and l.dst == agg
        )


def _check_k(k: int) -> None:
    if not isinstance(k, int) or k < 2 or k % 2 != 0:
        raise TopologyError(f"k must be an even integer >= 2, got {k!r}")


def build_fat_tree(k: int, link_capacity: float) -> Topology:
    """Build a k-ary fat-tree: (k/2)^2 cores, k pods of k/2 edge and k/2
    aggregate switches, k/2 hosts per edge switch, every link at
    `link_capacity` bits/second in each direction."""
    _check_k(k)
    if link_capacity <= 0:
        raise TopologyError(f"link_capacity must be > 0, got {link_capacity!r}")

    half = k // 2
    nodes: list[NodeId] = []
    links: list[Link] = []

    cores = [NodeId(Tier.CORE.value, None, c) for c in range(half * half)]
    nodes.extend(cores)

    def add_pair(a: NodeId, b: NodeId, kind: LinkKind) -> None:
        # a is the lower-tier endpoint; a->b is the upstream direction
        links.append(Link(len(links), a, b, link_capacity, kind, True))
        links.append(Link(len(links), b, a, link_capacity, kind, False))

    for pod in range(k):
        edges = [NodeId(Tier.EDGE.value, pod, i) for i in range(half)]
        aggs = [NodeId(Tier.AGG.value, pod, j) for j in range(half)]
        nodes.extend(edges)
        nodes.extend(aggs)
        for i, e in enumerate(edges):
            for h in range(half):
                host = NodeId(Tier.HOST.value, pod, i * half + h)
                nodes.append(host)
                add_pair(host, e, LinkKind.HOST_EDGE)
            for a in aggs:
                add_pair(e, a, LinkKind.EDGE_AGG)
        for j, a in enumerate(aggs):
            # aggregate j reaches cores [j*half, (j+1)*half)
            for m in range(half):
                add_pair(a, cores[j * half + m], LinkKind.AGG_CORE)

    return Topology(k, link_capacity, "fat-tree", nodes, links)


def build_nonblocking(k: int, link_capacity: float) -> Topology:
    """Star baseline for the same host population as build_fat_tree(k):
    every host connects to a single hub switch, so contention can only
    happen on the access links."""
    _check_k(k)
    if link_capacity <= 0:
        raise TopologyError(f"link_capacity must be > 0, got {link_capacity!r}")

    half = k // 2
    hub = NodeId(Tier.EDGE.value, None, 0)
    nodes: list[NodeId] = [hub]
    links: list[Link] = []
    for pod in range(k):
        for i in range(half * half):
            host = NodeId(Tier.HOST.value, pod, i)
            nodes.append(host)
            links.append(Link(len(links), host, hub, link_capacity,
                              LinkKind.HOST_EDGE, True))
            links.append(Link(len(links), hub, host, link_capacity,
                              LinkKind.HOST_EDGE, False))
    return Topology(k, link_capacity, "star", nodes, links)
