"""Throughput bounds and load-balance efficiency from link-load snapshots.

Run: python demos/04_bounds_and_balance.py
"""

from fatflow import build_fat_tree
from fatflow.metrics import (aggregate_load, edge_load_distribution,
                             latency_proxies, load_balance_efficiency,
                             throughput_bounds)

topo = build_fat_tree(4, 10e6)
Mbps = 1e6


def show(name, loads):
    edges = edge_load_distribution(topo, loads)
    aggs = aggregate_load(topo, loads)
    t_max, t_min = throughput_bounds(topo, loads)
    l_max, l_min = latency_proxies(t_max, t_min)
    eff = load_balance_efficiency(topo, loads)
    print(f"{name}:")
    print(f"  per-edge load/paths : {[round(v / Mbps, 2) for v in edges]} Mb/s")
    print(f"  per-aggregate load  : {[round(v / Mbps, 2) for v in aggs]} Mb/s")
    print(f"  throughput bounds   : best {t_max / Mbps:.1f} Mb/s, "
          f"worst {t_min / Mbps:.1f} Mb/s")
    print(f"  latency proxies     : {l_max:.3g} / {l_min:.3g}  (1/throughput)")
    print(f"  balance efficiency  : {eff:.4f}\n")


# perfectly balanced: every edge spreads 8 Mb/s evenly over its two uplinks
balanced = {}
for e in topo.edge_switches:
    for lid in topo.edge_uplink_ids(e):
        balanced[lid] = 4e6
show("uniform load", balanced)

# everything from pod 0 squeezed through aggregate 0
lopsided = {lid: 8e6 for lid in topo.agg_inlink_ids(topo.agg_switches[0])}
show("one-aggregate pileup", lopsided)

show("idle network", {})
