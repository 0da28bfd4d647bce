"""
A complete interactive session, simulated
=========================================

An oracle stands in for the user: it rates each requested pattern by the
majority class of its supporting transactions.  Ten iterations of ten ratings
teach the model the user's interestingness function; the held-out fold
measures how well, and the four selection strategies are compared.
"""

import numpy as np

from patlearn.core import Dataset, Kind, Transaction
from patlearn.miner import mine_closed_itemsets
from patlearn.select import SelectionStrategy, Variant
from patlearn.session import OracleSpec, SessionConfig, run_ablation, run_session


def separable_dataset(seed, n=500):
    """Items 0-4 mark class 1, items 5-9 mark class 2 (class-2 baskets also
    pick up some low items, so mixed patterns exist but stay class-pure)."""
    rng = np.random.default_rng(seed)
    transactions, labels = [], []
    for i in range(n):
        y = 1 if rng.random() < 0.5 else 2
        if y == 1:
            items = [j for j in range(0, 5) if rng.random() < 0.7] or [int(rng.integers(0, 5))]
        else:
            items = [j for j in range(5, 10) if rng.random() < 0.7] or [int(rng.integers(5, 10))]
            items += [j for j in range(0, 5) if rng.random() < 0.3]
        transactions.append(Transaction(i, tuple(sorted(set(items)))))
        labels.append(y)
    return Dataset(kind=Kind.SET, transactions=tuple(transactions),
                   class_labels=tuple(labels), item_universe=tuple(range(10)))


dataset = separable_dataset(7)
patterns = mine_closed_itemsets(dataset, 6)
print(f"{len(patterns)} closed patterns to learn over")

config = SessionConfig(
    class_count=2,
    oracle=OracleSpec(variant="majority"),
    batch_fraction=0.1,
    max_iterations=10,  # the 100-rating protocol: 10 iterations x 10 ratings
    lam=0.01,
    seed=0,
)
state, report = run_session(dataset, patterns, config)

print(f"\nstatus {report['status']} after {report['iterations']} iterations, "
      f"{report['feedback_count']} ratings")
print("weighted F-score per iteration:")
for entry in report["metric_curve"]:
    bar = "#" * int(40 * entry["weighted_f_score"])
    print(f"  it {entry['iteration']:2d}  {entry['weighted_f_score']:.3f}  {bar}")
print(f"final: F {report['final']['weighted_f_score']:.3f}, "
      f"accuracy {report['final']['accuracy']:.3f}")
print("top recommendations from the held-out fold:")
for rec in report["recommendations"][:5]:
    print(f"  p(interesting)={rec['probability']:.3f}  {rec['rendering']}")

# --- strategy ablation: exploitation only, exploration only, the hybrid, and
# the phased schedule, each over ten session seeds
print("\nselection-strategy ablation (median final F over 10 seeds):")
result = run_ablation(dataset, patterns, config, seeds=range(10))
for variant in (Variant.EGL_ONLY, Variant.KCENTER_ONLY, Variant.EGL_THEN_KCENTER, Variant.PHASED):
    finals = result[variant.value]["finals"]
    print(f"  {variant.value:8s} median {np.median(finals):.3f}  "
          f"(min {min(finals):.3f}, max {max(finals):.3f})")
