"""Max-min fair sharing by progressive filling, on paper-sized instances.

Run: python demos/02_fair_share_allocation.py
"""

from fatflow import waterfill

Mbps = 1e6

# two flows forced through one 10 Mb/s link: an even split
rates = waterfill({0: 10 * Mbps, 1: 10 * Mbps}, {0: (0,), 1: (0,)}, {0: 10 * Mbps})
print("shared link:", {f: r / Mbps for f, r in rates.items()}, "Mb/s")

# a chain: A|B on link 0, B|C on link 1; everyone settles at 5
rates = waterfill(
    {0: 10 * Mbps, 1: 10 * Mbps, 2: 10 * Mbps},
    {0: (0,), 1: (0, 1), 2: (1,)},
    {0: 10 * Mbps, 1: 10 * Mbps},
)
print("chain:      ", {f: r / Mbps for f, r in rates.items()}, "Mb/s")

# a small flow is capped at its own demand; the leftovers go to the big one
rates = waterfill({0: 2 * Mbps, 1: 10 * Mbps}, {0: (0,), 1: (0,)}, {0: 10 * Mbps})
print("demand cap: ", {f: r / Mbps for f, r in rates.items()}, "Mb/s")

# asymmetric contention: flow 0 rides two congested links
rates = waterfill(
    {0: 10 * Mbps, 1: 10 * Mbps, 2: 10 * Mbps, 3: 10 * Mbps},
    {0: (0, 1), 1: (0,), 2: (1,), 3: (1,)},
    {0: 10 * Mbps, 1: 10 * Mbps},
)
print("asymmetric: ", {f: round(r / Mbps, 3) for f, r in rates.items()}, "Mb/s")
