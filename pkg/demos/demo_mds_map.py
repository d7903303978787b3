"""2-D similarity map of a material database via classical spectral embedding.

Clusters of materials with similar fingerprints land near each other; the
embedding is computed from the pairwise similarity matrix alone.  Writes a
PNG scatter when matplotlib is available, otherwise prints coordinates.
"""

import numpy as np

from matprint import (
    Fingerprint,
    MaterialRecord,
    classical_mds,
    similarity_matrix,
)

rng = np.random.default_rng(3)

# Three appearance archetypes with per-material variation.
archetypes = {
    "fabric": np.array([0.3, 0.2, 0.4, 0.0, 0.1, 0.1, -0.7, -0.6, -0.8, -0.2, 0.0, 0.1, 0.4, 0.3, 0.1, 0.7]),
    "metal": np.array([-0.7, -0.8, -0.8, -0.9, -0.9, 0.4, 0.9, 0.2, 0.9, 0.7, -0.8, -0.9, -0.8, -0.8, 0.5, -0.8]),
    "wood": np.array([-0.2, 0.3, 0.3, 0.5, -0.8, 0.0, -0.4, -0.8, 0.7, -0.3, 0.2, 0.9, -0.1, -0.3, 0.3, 0.4]),
}

db = []
for cat, center in archetypes.items():
    for i in range(8):
        values = np.clip(center + rng.normal(0, 0.12, size=16), -1, 1)
        mid = f"{cat}{i:02d}"
        db.append(MaterialRecord(material_id=mid, category=cat, fingerprint=Fingerprint(mid, values)))

sm = similarity_matrix(db)
coords = classical_mds(sm, dims=2)
print(f"embedded {len(db)} materials; coordinate ranges "
      f"x [{coords[:, 0].min():.2f}, {coords[:, 0].max():.2f}] "
      f"y [{coords[:, 1].min():.2f}, {coords[:, 1].max():.2f}]")

for rec, (x, y) in zip(db, coords):
    print(f"  {rec.material_id:<10} ({x:+.3f}, {y:+.3f})")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    colors = {"fabric": "tab:orange", "metal": "tab:blue", "wood": "tab:green"}
    fig, ax = plt.subplots(figsize=(6, 6))
    for rec, (x, y) in zip(db, coords):
        ax.scatter(x, y, color=colors[rec.category], s=40)
        ax.annotate(rec.material_id, (x, y), fontsize=7, alpha=0.7)
    ax.set_title("material similarity map (classical MDS)")
    ax.set_aspect("equal")
    fig.savefig("mds_map.png", dpi=150)
    print("\nwrote mds_map.png")
except ImportError:
    print("\nmatplotlib not installed; skipped the scatter plot")
