"""Fingerprint similarity, retrieval and typicality on a toy database.

Builds a handful of hand-written material fingerprints, scores pairwise
similarity, retrieves nearest neighbors for a query, and ranks the database
by one attribute.
"""

import numpy as np

from matprint import (
    Fingerprint,
    MaterialRecord,
    SimilarityParams,
    default_schema,
    rank_by_attribute,
    retrieve,
    similarity,
    similarity_matrix,
    typicality,
)

schema = default_schema()

# A few caricature materials: values follow the attribute order of the schema.
profiles = {
    ("velvet", "fabric"): [0.2, -0.4, -0.6, -1, -1, -0.3, -0.8, -0.9, -0.9, -0.2, -0.7, 0.1, 0.5, -0.6, 0.7, 0.8],
    ("oak", "wood"): [-0.3, 0.1, 0.2, 0.6, -0.9, 0.0, -0.5, -0.9, 0.8, -0.4, 0.3, 0.9, -0.2, -0.4, 0.3, 0.4],
    ("chrome", "metal"): [-0.8, -0.95, -0.9, -1, -1, 0.6, 1.0, 0.3, 1.0, 0.9, -0.9, -0.9, -0.9, -0.9, 0.6, -0.8],
    ("gingham", "fabric"): [0.7, -0.3, 0.4, 0.1, 0.9, 0.4, -0.7, -0.8, -0.7, -0.3, 0.0, -0.2, 0.0, 0.5, -0.1, 0.5],
    ("brushed steel", "metal"): [-0.7, -0.6, -0.8, -0.6, -1, 0.3, 0.7, 0.1, 1.0, 0.6, -0.8, -0.9, -0.8, -0.9, 0.4, -0.7],
}

db = [
    MaterialRecord(material_id=name, category=cat, fingerprint=Fingerprint(name, values))
    for (name, cat), values in profiles.items()
]

print("pairwise similarity (alpha = 0.5):")
ids = [rec.material_id for rec in db]
sm = similarity_matrix(db)
header = " " * 14 + "  ".join(f"{i:>13}" for i in ids)
print(header)
for row_id, row in zip(ids, sm):
    print(f"{row_id:>14}" + "  ".join(f"{v:13.3f}" for v in row))

query = db[ids.index("chrome")].fingerprint
print("\nnearest neighbors of 'chrome':")
for mid, score in retrieve(db, query, k=3):
    print(f"  {mid:<14} score {score:.3f}")

print("\nshininess ranking (descending):")
print(" ", " > ".join(rank_by_attribute(db, attribute_id=7)))

print("\ntypicality (mean similarity to nearest 10%):")
for rec in db:
    print(f"  {rec.material_id:<14} {typicality(db, rec.material_id):.3f}")

print("\nalpha sweep for velvet vs gingham (correlation vs closeness weighting):")
f1 = db[0].fingerprint
f2 = db[3].fingerprint
for alpha in (0.0, 0.25, 0.5, 0.75, 1.0):
    print(f"  alpha={alpha:.2f}  d={similarity(f1, f2, SimilarityParams(alpha)):.3f}")
