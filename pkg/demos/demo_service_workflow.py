"""End-to-end file and service workflow, exercising the CLI surfaces.

Simulates ratings, ingests them into an MFDB, trains a statistical model
from random features, then starts the REST service in-process and issues the
same requests an external client would.
"""

import csv
import json
import tempfile
import threading
import time
from pathlib import Path

import httpx
import numpy as np
import uvicorn

from matprint import load_mfdb, load_model, save_mfx, table_from_matrix
from matprint.cli import main
from matprint.service import build_state, create_app

rng = np.random.default_rng(99)
workdir = Path(tempfile.mkdtemp(prefix="matprint-demo-"))
print(f"working in {workdir}")

# 1. synthesize ratings and ingest them
ratings_csv = workdir / "ratings.csv"
truth = rng.uniform(0, 100, size=(20, 16))
with open(ratings_csv, "w", newline="") as fh:
    writer = csv.writer(fh)
    writer.writerow(["participant_id", "material_id", "attribute_id", "value"])
    for p in range(8):
        for m in range(20):
            for a in range(16):
                writer.writerow([
                    f"p{p}", f"mat{m:02d}", a + 1,
                    f"{truth[m, a] + rng.normal(0, 4):.3f}",
                ])

db_path = workdir / "db.mfdb"
assert main(["ingest-ratings", str(ratings_csv), "-o", str(db_path)]) == 0

# 2. random stand-in features + training
db = load_mfdb(db_path)
features = rng.normal(size=(20, 28)).astype(np.float32)
mfx_path = workdir / "feats.mfx"
save_mfx(table_from_matrix("S-v1", db.ids(), features), mfx_path)
model_path = workdir / "model.mfm"
assert main([
    "train", "--features", str(mfx_path), "--db", str(db_path),
    "--spec", "s", "--seed", "1", "--epochs", "200", "-o", str(model_path),
]) == 0

# 3. retrieval through the CLI
hits_path = workdir / "hits.json"
assert main(["retrieve", "--db", str(db_path), "--query", "mat03", "-k", "3",
             "-o", str(hits_path)]) == 0
print("\ncli retrieve for mat03:")
for hit in json.loads(hits_path.read_text())["results"]:
    print(f"  {hit['material_id']}  score {hit['score']:.3f}")

# 4. the same database behind the REST service
state = build_state(db, {"S-v1": load_model(model_path)})
server = uvicorn.Server(uvicorn.Config(create_app(state), host="127.0.0.1", port=0,
                                       log_level="error"))
thread = threading.Thread(target=server.run, daemon=True)
thread.start()
while not server.started:
    time.sleep(0.02)
host, port = server.servers[0].sockets[0].getsockname()[:2]
base = f"http://{host}:{port}"
print(f"\nservice listening on {base}")

with httpx.Client() as client:
    schema = client.get(f"{base}/v1/attributes").json()
    print(f"schema: {len(schema['attributes'])} attributes, "
          f"e.g. {schema['attributes'][6]['name']} "
          f"({schema['attributes'][6]['boundary_low']} .. {schema['attributes'][6]['boundary_high']})")

    hits = client.post(f"{base}/v1/retrieve", json={"material_id": "mat03", "k": 3}).json()
    print("service retrieve for mat03 (matches the CLI):")
    for hit in hits["results"]:
        print(f"  {hit['material_id']}  score {hit['score']:.3f}  typicality {hit['typicality']:.3f}")

    vec = rng.normal(size=28).tolist()
    pred = client.post(f"{base}/v1/predict", json={"vector": vec}).json()
    print("predicted fingerprint from a 28-dim vector:")
    print("  " + " ".join(f"{v:+.2f}" for v in pred["fingerprint"]["values"]))

    emb = client.get(f"{base}/v1/embedding").json()
    print(f"2-D embedding returned for {len(emb['materials'])} materials")

server.should_exit = True
thread.join(timeout=5)
print("\ndone")
