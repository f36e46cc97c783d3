"""Hosting the 12-AFC experiment and scripting a participant.

Builds a miniature dataset, starts the experiment service in-process,
and walks a scripted participant through a few trials exactly as the
browser UI would: create session, fetch trial descriptor, post choice.
Run `contour-bench serve --data ... --sessions ...` for a real server.
"""

import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from contour_bench.pipeline import PipelineConfig, build_dataset, discover_sources
from contour_bench.service import ExperimentStore, create_app
from contour_bench.synth import write_source_tree

root = Path(tempfile.mkdtemp(prefix="contour_bench_demo_"))
write_source_tree(root / "src", per_category=1)
sources = discover_sources(root / "src")[:4]
build_dataset(sources, PipelineConfig(canvas=128, pixels_per_degree=16.0),
              root / "data")

store = ExperimentStore(root / "data", root / "sessions")
client = TestClient(create_app(store))

session = client.post("/api/session", json={}).json()
print(f"session {session['session_id'][:8]}... group={session['group']} "
      f"trials={session['total_trials']}")

for _ in range(5):
    trial = client.get(f"/api/session/{session['session_id']}/trial").json()
    if trial["done"]:
        break
    print(f"trial {trial['trial_index']:3d}: condition={trial['condition']:9s} "
          f"level={trial['level']} stimulus={trial['stimulus_url']}")
    print(f"          {trial['stimulus_duration_ms']} ms stimulus, "
          f"{trial['mask_duration_ms']} ms 1/f mask, then the response wheel")
    ack = client.post(
        f"/api/session/{session['session_id']}/response",
        json={"trial_index": trial["trial_index"], "choice": "banana",
              "rt_ms": 731.0}).json()
    print(f"          answered 'banana' -> correct={ack['correct']}")

export = client.get("/api/export.csv?include_partial=true")
print("\nexport preview:")
for line in export.text.splitlines()[:4]:
    print(f"  {line}")
print(f"\nsession logs (JSONL, fsynced per response) in {root / 'sessions'}")
store.close()
