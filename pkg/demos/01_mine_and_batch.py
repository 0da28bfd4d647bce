"""
Mining closed frequent itemsets and batching them
=================================================

The pattern stream that feeds the interactive learner: mine every closed
frequent itemset of a transaction dataset, then cut the result into the
seeded batches the session loop consumes.
"""

import numpy as np

from patlearn.core import Dataset, Kind, Transaction
from patlearn.miner import MiningConfig, mine_closed_itemsets, partition_batches

# a small market-basket style dataset: 200 baskets over 8 products
rng = np.random.default_rng(0)
transactions = []
for i in range(200):
    # products 0-3 tend to co-occur, as do 4-7
    block = rng.random() < 0.5
    base = range(0, 4) if block else range(4, 8)
    items = sorted(j for j in base if rng.random() < 0.7)
    if rng.random() < 0.15:
        items = sorted(set(items) | {int(rng.integers(0, 8))})
    transactions.append(Transaction(i, tuple(items or [int(rng.integers(0, 8))])))

dataset = Dataset(
    kind=Kind.SET,
    transactions=tuple(transactions),
    item_universe=tuple(range(8)),
)

# closed = no superset with the same support; this removes the redundancy of
# the full frequent-set lattice while keeping every support value
patterns = mine_closed_itemsets(dataset, min_support=10)
print(f"{len(patterns)} closed patterns at support >= 10")
print("top five by support:")
for p in patterns[:5]:
    print(f"  {p.payload}  support={p.support}")

# the session loop never sees the whole pattern set at once: it consumes
# shuffled batches of ~2% of the patterns per iteration
batches = partition_batches(patterns, MiningConfig(min_support=10, batch_fraction=0.1, shuffle_seed=7))
sizes = [len(b.patterns) for b in batches]
print(f"\n{len(batches)} batches of sizes {sizes}")
assert sum(sizes) == len(patterns)
