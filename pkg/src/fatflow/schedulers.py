"""Path-selection strategies and the proactive/controller dispatch.

Selectors are pure functions of snapshot inputs. `dispatch` is the one entry
point the engine calls per new flow; for the hybrid scheduler it flips a
seeded fair coin per flow between stateless ECMP hashing and the controller
selection, emulating an even two-bucket split at the edge.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .topology import Path, Topology
from .traffic import Flow

ECMP = "ecmp"
HYBRID = "hybrid"  # 50/50 ECMP + lexicographic controller (the canonical mode)
HYBRID_SCALAR = "hybrid-scalar"  # controller maximizes residual - alpha * elephants
HEDERA = "hedera"
NONBLOCKING = "nonblocking"

SCHEDULER_NAMES = (ECMP, HYBRID, HYBRID_SCALAR, HEDERA, NONBLOCKING)

MECH_PROACTIVE = "proactive-ecmp"
MECH_CONTROLLER = "controller"

_MASK64 = (1 << 64) - 1


class SchedulerError(ValueError):
    pass


@dataclass(frozen=True)
class SchedulerKind:
    """Which strategy to run, plus its knobs.

    alpha trades residual bandwidth (in Mb/s) against the elephant count on
    a path's core uplink in the scalarized controller. hedera_fraction is
    the demand cutoff (fraction of link capacity) below which the Hedera
    baseline leaves a flow to ECMP.
    """

    name: str
    alpha: float = 1.0
    hedera_fraction: float = 0.1

    def __post_init__(self) -> None:
        if self.name not in SCHEDULER_NAMES:
            raise SchedulerError(f"unknown scheduler {self.name!r}")
        if not (self.alpha >= 0.0 and self.alpha == self.alpha and
                self.alpha != float("inf")):
            raise SchedulerError(f"alpha must be finite and >= 0, got {self.alpha!r}")
        if not (0.0 < self.hedera_fraction <= 1.0):
            raise SchedulerError(
                f"hedera_fraction must be in (0, 1], got {self.hedera_fraction!r}")


@dataclass(frozen=True)
class SchedulerDecision:
    flow_id: int
    path: Path
    mechanism: str  # MECH_PROACTIVE or MECH_CONTROLLER
    candidates_considered: int


@dataclass(frozen=True)
class PathView:
    """Load snapshot of one candidate path at decision time."""

    path: Path
    min_residual: float  # bits/second, min over the path's links
    uplink_elephants: int  # elephants on the aggregate-to-core upstream hop
    hop_count: int


def _mix64(x: int) -> int:
    # 64-bit avalanche finalizer (murmur-style); fixed constants, no seed
    x &= _MASK64
    x ^= x >> 33
    x = (x * 0xFF51AFD7ED558CCD) & _MASK64
    x ^= x >> 33
    x = (x * 0xC4CEB9FE1A85EC53) & _MASK64
    x ^= x >> 33
    return x


def flow_hash(src_id: int, dst_id: int, flow_id: int) -> int:
    """Deterministic, seed-independent hash of a flow's addressing tuple."""
    h = _mix64(src_id + 1)
    h = _mix64(h ^ (dst_id + 1))
    h = _mix64(h ^ (flow_id + 1))
    return h


def select_ecmp(topo: Topology, flow: Flow, candidates: Sequence[Path]) -> Path:
    """Hash the flow onto one of the equal-cost candidates, oblivious to load."""
    if not candidates:
        raise SchedulerError("no candidate paths")
    h = flow_hash(topo.host_number(flow.src), topo.host_number(flow.dst), flow.id)
    return candidates[h % len(candidates)]


def select_lexicographic(views: Sequence[PathView]) -> Path:
    """Shortest, then fewest core-uplink elephants, then widest residual.

    Ties fall to the canonical path order, so the result does not depend on
    how the view list happens to be arranged.
    """
    if not views:
        raise SchedulerError("no candidate paths")
    pool = list(views)
    least_hops = min(v.hop_count for v in pool)
    pool = [v for v in pool if v.hop_count == least_hops]
    least_eleph = min(v.uplink_elephants for v in pool)
    pool = [v for v in pool if v.uplink_elephants == least_eleph]
    widest = max(v.min_residual for v in pool)
    pool = [v for v in pool if v.min_residual == widest]
    return min(pool, key=lambda v: v.path.sort_key).path


def select_scalarized(views: Sequence[PathView], alpha: float) -> Path:
    """Maximize residual (in Mb/s) minus alpha per core-uplink elephant."""
    if not views:
        raise SchedulerError("no candidate paths")
    if alpha != alpha or alpha == float("inf"):
        raise SchedulerError(f"alpha must be finite, got {alpha!r}")

    def score(v: PathView) -> float:
        return v.min_residual / 1e6 - alpha * v.uplink_elephants

    best = max(score(v) for v in views)
    pool = [v for v in views if score(v) == best]
    return min(pool, key=lambda v: v.path.sort_key).path


def select_hedera(topo: Topology, flow: Flow, views: Sequence[PathView],
                  threshold_fraction: float) -> tuple[Path, str]:
    """Hedera-style greedy placement.

    Small flows (demand under threshold_fraction of link capacity) stay on
    ECMP. Large flows take the first candidate, in canonical order, whose
    every link still fits the whole demand; when nothing fits, the widest
    path wins.
    """
    if not views:
        raise SchedulerError("no candidate paths")
    candidates = [v.path for v in views]
    if flow.demand < threshold_fraction * topo.link_capacity:
        return select_ecmp(topo, flow, candidates), MECH_PROACTIVE
    ordered = sorted(views, key=lambda v: v.path.sort_key)
    for v in ordered:
        if v.min_residual >= flow.demand:
            return v.path, MECH_CONTROLLER
    widest = max(v.min_residual for v in ordered)
    pool = [v for v in ordered if v.min_residual == widest]
    return pool[0].path, MECH_CONTROLLER


def select_non_blocking(topo: Topology, flow: Flow) -> Path:
    """The unique host-hub-host path of the star baseline."""
    if topo.layout != "star":
        raise SchedulerError(
            "non-blocking selection requires the star topology, "
            f"got layout {topo.layout!r}")
    paths = topo.equal_cost_paths(flow.src, flow.dst)
    return paths[0]


def path_views(state, candidates: Sequence[Path]) -> list[PathView]:
    """Snapshot the link-state fields each controller selector reads."""
    views = []
    for p in candidates:
        residual = min(state.residual(lid) for lid in p.link_ids)
        uplink = state.agg_uplink_of(p)
        eleph = state.elephant_count(uplink) if uplink is not None else 0
        views.append(PathView(p, residual, eleph, len(p.hops)))
    return views


def dispatch(state, flow: Flow, kind: SchedulerKind) -> SchedulerDecision:
    """Choose a path for a newly arrived, unassigned flow."""
    topo: Topology = state.topology
    if kind.name == NONBLOCKING:
        path = select_non_blocking(topo, flow)
        return SchedulerDecision(flow.id, path, MECH_PROACTIVE, 1)

    candidates = topo.equal_cost_paths(flow.src, flow.dst)
    n = len(candidates)
    if kind.name == ECMP:
        return SchedulerDecision(
            flow.id, select_ecmp(topo, flow, candidates), MECH_PROACTIVE, n)
    if kind.name == HEDERA:
        path, mech = select_hedera(topo, flow, path_views(state, candidates),
                                   kind.hedera_fraction)
        return SchedulerDecision(flow.id, path, mech, n)

    # hybrid variants: fair coin between the data plane and the controller
    if state.dispatch_rng.random() < 0.5:
        views = path_views(state, candidates)
        if kind.name == HYBRID:
            path = select_lexicographic(views)
        else:
            path = select_scalarized(views, kind.alpha)
        return SchedulerDecision(flow.id, path, MECH_CONTROLLER, n)
    return SchedulerDecision(
        flow.id, select_ecmp(topo, flow, candidates), MECH_PROACTIVE, n)
