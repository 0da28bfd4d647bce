"""
Driving the feedback service over HTTP
======================================

The same loop a human rater would walk through in the browser console, driven
programmatically: register a dataset, create a session, pull the pending
feedback request, submit ratings, and read metrics and recommendations.
"""

import tempfile

import numpy as np
from fastapi.testclient import TestClient

from patlearn.service import create_app

rng = np.random.default_rng(5)
lines = []
for i in range(300):
    y = 1 if rng.random() < 0.5 else 2
    base = range(0, 5) if y == 1 else range(5, 10)
    items = [j for j in base if rng.random() < 0.7] or [int(rng.integers(0, 10))]
    if y == 2:
        items += [j for j in range(0, 5) if rng.random() < 0.3]
    lines.append(" ".join(str(j) for j in sorted(set(items))) + f" | {y}")

store = tempfile.mkdtemp(prefix="patlearn-store-")
client = TestClient(create_app(store))

# 1. register the dataset (the UI's file picker posts exactly this)
client.post("/datasets", json={"name": "baskets.dat", "kind": "set",
                               "content": "\n".join(lines)}).raise_for_status()

# 2. create a session: 3 rating levels, human-style display names
resp = client.post("/sessions", json={
    "dataset": "baskets.dat",
    "min_support": 6,
    "config": {
        "class_count": 3,
        "batch_fraction": 0.1,
        "interesting_class": 3,
        "rating_names": {1: "dislike", 2: "not sure", 3: "like"},
    },
})
session_id = resp.json()["session_id"]
print("session:", session_id)

# 3. three rating rounds
for round_no in range(3):
    request = client.get(f"/sessions/{session_id}/feedback").json()
    print(f"\nround {round_no + 1}: {len(request['items'])} patterns to rate "
          f"({request['rating_names']})")
    for item in request["items"][:3]:
        print("   ", item["rendering"])
    # rate low items "like", anything else "dislike"
    ratings = [
        {"pattern_id": item["pattern_id"],
         "rating": 3 if all(int(tok) < 5 for tok in item["rendering"].strip("{}").split(", ")) else 1}
        for item in request["items"]
    ]
    summary = client.post(f"/sessions/{session_id}/ratings", json={"ratings": ratings}).json()
    print(f"    -> iteration {summary['iteration']}, theta moved {summary['theta_delta']:.4f}, "
          f"status {summary['status']}")

# 4. metrics history and recommendations for the "like" class
history = client.get(f"/sessions/{session_id}/metrics").json()["history"]
print("\ntheta deltas so far:", [round(h["theta_delta"], 4) for h in history])

recs = client.get(f"/sessions/{session_id}/recommendations",
                  params={"top_n": 5}).json()
print(f"recommended for rating {recs['interesting_class']} ('like'):")
for item in recs["items"]:
    print(f"  p={item['probability']:.3f}  {item['rendering']}")
