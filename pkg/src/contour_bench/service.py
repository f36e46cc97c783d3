"""HTTP backend for the hosted 12-AFC experiment.

Sessions follow the protocol's presentation order: fragmented stimuli
in ascending level (shuffled within level by a per-session seed), then
contours, then RGB. Every response is appended to a per-session JSONL
log and fsynced before the ack, so a crash loses nothing that was
acknowledged; restart replays the logs.
"""

from __future__ import annotations

import datetime as _dt
import io
import json
import os
import secrets
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .analysis import RESPONSE_COLUMNS
from .categories import CATEGORIES
from .pipeline import (
    FRAGMENTED_CONDITIONS,
    DatasetManifest,
    derive_seed,
    generate_noise_mask,
)
from .placement import LEVELS

STIMULUS_DURATION_MS = 200
MASK_DURATION_MS = 200
DEFAULT_FIXATION_MS = 500  # not specified by the protocol; configurable
PRACTICE_TRIALS = 24


class SessionError(Exception):
    def __init__(self, status_code: int, detail: str):
        super().__init__(detail)
        self.status_code = status_code
        self.detail = detail


@dataclass
class TrialSlot:
    stimulus_id: str
    condition: str
    level: int  # None for contour/rgb
    path: str
    true_category: str
    practice: bool = False


@dataclass
class Session:
    session_id: str
    group: str
    seed: int
    created_at: str
    sequence: list = field(default_factory=list)
    cursor: int = 0
    responses: list = field(default_factory=list)

    @property
    def status(self) -> str:
        return "complete" if self.cursor >= len(self.sequence) else "active"

    def to_public(self) -> dict:
        return {
            "session_id": self.session_id,
            "group": self.group,
            "cursor": self.cursor,
            "total_trials": len(self.sequence),
            "status": self.status,
            "created_at": self.created_at,
        }


class ExperimentStore:
    """Session state over a dataset manifest with JSONL persistence."""

    def __init__(self, dataset_dir, sessions_dir, practice_dir=None,
                 fixation_ms: int = DEFAULT_FIXATION_MS):
        self.dataset_dir = Path(dataset_dir)
        self.sessions_dir = Path(sessions_dir)
        self.sessions_dir.mkdir(parents=True, exist_ok=True)
        self.fixation_ms = fixation_ms
        self.manifest = None
        self.practice_manifest = None
        manifest_path = self.dataset_dir / "manifest.json"
        if manifest_path.exists():
            self.manifest = DatasetManifest.load(manifest_path)
        if practice_dir is not None:
            practice_path = Path(practice_dir) / "manifest.json"
            if practice_path.exists():
                self.practice_manifest = DatasetManifest.load(practice_path)
        self._sessions = {}
        self._locks = {}
        self._handles = {}
        self._global_lock = threading.Lock()
        self._replay()

    # -- persistence ------------------------------------------------------

    def _log_path(self, session_id: str) -> Path:
        return self.sessions_dir / f"{session_id}.jsonl"

    def _append(self, session_id: str, event: dict) -> None:
        handle = self._handles.get(session_id)
        if handle is None:
            handle = open(self._log_path(session_id), "a", encoding="utf-8")
            self._handles[session_id] = handle
        handle.write(json.dumps(event, separators=(",", ":")) + "\n")
        handle.flush()
        os.fsync(handle.fileno())

    def _replay(self) -> None:
        for log in sorted(self.sessions_dir.glob("*.jsonl")):
            events = []
            for line in log.read_text().splitlines():
                if line.strip():
                    events.append(json.loads(line))
            if not events or events[0].get("event") != "created":
                continue
            head = events[0]
            session = Session(
                session_id=head["session_id"], group=head["group"],
                seed=head["seed"], created_at=head["created_at"],
                sequence=self._build_sequence(head["group"], head["seed"]),
            )
            for event in events[1:]:
                if event.get("event") != "response":
                    continue
                if event["trial_index"] != session.cursor:
                    raise ValueError(
                        f"{log.name}: log has non-contiguous trial indices")
                session.responses.append(event)
                session.cursor += 1
            self._sessions[session.session_id] = session
            self._locks[session.session_id] = threading.Lock()

    def close(self) -> None:
        for handle in self._handles.values():
            handle.close()
        self._handles.clear()

    # -- sequencing -------------------------------------------------------

    def _build_sequence(self, group: str, seed: int) -> list:
        if self.manifest is None:
            raise SessionError(503, "dataset manifest not loaded")
        rng = np.random.default_rng(seed)
        records = self.manifest.records
        sequence = []
        if self.practice_manifest is not None:
            practice = [r for r in self.practice_manifest.records
                        if r.spec.condition == group]
            order = rng.permutation(len(practice))
            for i in order[:PRACTICE_TRIALS]:
                r = practice[i]
                sequence.append(TrialSlot(r.spec.source_id, r.spec.condition,
                                          r.spec.level, r.path, r.category,
                                          practice=True))
        for level in LEVELS:
            block = [r for r in records
                     if r.spec.condition == group and r.spec.level == level]
            block.sort(key=lambda r: r.path)
            for i in rng.permutation(len(block)):
                r = block[i]
                sequence.append(TrialSlot(r.spec.source_id, group, level,
                                          r.path, r.category))
        for condition in ("contour", "rgb"):
            block = [r for r in records if r.spec.condition == condition]
            block.sort(key=lambda r: r.path)
            for i in rng.permutation(len(block)):
                r = block[i]
                sequence.append(TrialSlot(r.spec.source_id, condition, None,
                                          r.path, r.category))
        return sequence

    # -- operations -------------------------------------------------------

    def create_session(self, group: str = None) -> Session:
        if self.manifest is None:
            raise SessionError(503, "dataset manifest not loaded")
        if group is not None and group not in FRAGMENTED_CONDITIONS:
            raise SessionError(422, f"group must be one of {FRAGMENTED_CONDITIONS}")
        with self._global_lock:
            if group is None:
                counts = {g: 0 for g in FRAGMENTED_CONDITIONS}
                for s in self._sessions.values():
                    counts[s.group] += 1
                group = min(FRAGMENTED_CONDITIONS, key=lambda g: counts[g])
            session_id = secrets.token_hex(16)
            seed = derive_seed("session", session_id)
            created_at = _dt.datetime.now(_dt.timezone.utc).isoformat()
            session = Session(
                session_id=session_id, group=group, seed=seed,
                created_at=created_at,
                sequence=self._build_sequence(group, seed),
            )
            self._sessions[session_id] = session
            self._locks[session_id] = threading.Lock()
            self._append(session_id, {
                "event": "created", "session_id": session_id, "group": group,
                "seed": seed, "created_at": created_at,
            })
        return session

    def _get(self, session_id: str) -> Session:
        session = self._sessions.get(session_id)
        if session is None:
            raise SessionError(404, "unknown session")
        return session

    def next_trial(self, session_id: str) -> dict:
        session = self._get(session_id)
        if session.cursor >= len(session.sequence):
            return {"done": True, "trial_index": session.cursor,
                    "total_trials": len(session.sequence)}
        slot = session.sequence[session.cursor]
        mask_seed = derive_seed(session.seed, session.cursor, "mask")
        size = self.manifest.canvas[0] if self.manifest else 256
        return {
            "done": False,
            "trial_index": session.cursor,
            "total_trials": len(session.sequence),
            "stimulus_url": f"/stimuli/{slot.path}",
            "mask_url": f"/masks/{size}/{mask_seed}.png",
            "stimulus_duration_ms": STIMULUS_DURATION_MS,
            "mask_duration_ms": MASK_DURATION_MS,
            "fixation_ms": self.fixation_ms,
            "labels": list(CATEGORIES),
            "condition": slot.condition,
            "level": slot.level,
            "practice": slot.practice,
        }

    def record_response(self, session_id: str, trial_index: int, choice: str,
                        rt_ms: float) -> dict:
        session = self._get(session_id)
        with self._locks[session_id]:
            if session.cursor >= len(session.sequence):
                raise SessionError(409, "session already complete")
            if trial_index != session.cursor:
                raise SessionError(
                    409, f"expected trial {session.cursor}, got {trial_index}")
            slot = session.sequence[trial_index]
            if not slot.practice and choice not in CATEGORIES:
                raise SessionError(422, f"choice {choice!r} not in the 12 labels")
            if slot.practice and not choice:
                raise SessionError(422, "empty practice choice")
            correct = bool(choice == slot.true_category)
            event = {
                "event": "response", "trial_index": trial_index,
                "stimulus_id": slot.stimulus_id, "condition": slot.condition,
                "level": slot.level, "true": slot.true_category,
                "choice": choice, "correct": correct,
                "rt_ms": float(rt_ms), "practice": slot.practice,
                "recorded_at": _dt.datetime.now(_dt.timezone.utc).isoformat(),
            }
            self._append(session_id, event)  # durable before the ack
            session.responses.append(event)
            session.cursor += 1
            return {"correct": correct, "cursor": session.cursor,
                    "done": session.cursor >= len(session.sequence)}

    def export_responses(self, include_partial: bool = False) -> pd.DataFrame:
        rows = []
        for session in sorted(self._sessions.values(), key=lambda s: s.created_at):
            if session.status != "complete" and not include_partial:
                continue
            for event in session.responses:
                if event.get("practice"):
                    continue
                rows.append({
                    "id": session.session_id,
                    "condition": event["condition"],
                    "level": event["level"],
                    "stimulus": event["stimulus_id"],
                    "true": event["true"],
                    "choice": event["choice"],
                    "correct": int(event["correct"]),
                    "rt_ms": event["rt_ms"],
                })
        return pd.DataFrame(rows, columns=RESPONSE_COLUMNS)


def create_app(store: ExperimentStore, ui_dir=None):
    """FastAPI application wired to one ExperimentStore.

    ui_dir optionally points at the built browser runner (a directory
    with index.html and dist/); it is then served at the root.
    """
    from fastapi import FastAPI, Request
    from fastapi.responses import FileResponse, JSONResponse, Response

    app = FastAPI(title="contour-bench experiment service")
    app.state.store = store

    @app.exception_handler(SessionError)
    async def _session_error(request: Request, exc: SessionError):
        return JSONResponse(status_code=exc.status_code,
                            content={"detail": exc.detail})

    @app.post("/api/session")
    async def create_session(payload: dict = None):
        group = (payload or {}).get("group")
        return store.create_session(group).to_public()

    @app.get("/api/session/{session_id}")
    async def get_session(session_id: str):
        return store._get(session_id).to_public()

    @app.get("/api/session/{session_id}/trial")
    async def get_trial(session_id: str):
        return store.next_trial(session_id)

    @app.post("/api/session/{session_id}/response")
    async def post_response(session_id: str, payload: dict):
        for key in ("trial_index", "choice", "rt_ms"):
            if key not in payload:
                raise SessionError(422, f"missing field {key!r}")
        return store.record_response(
            session_id, int(payload["trial_index"]), str(payload["choice"]),
            float(payload["rt_ms"]))

    @app.get("/api/export.csv")
    async def export_csv(include_partial: bool = False):
        table = store.export_responses(include_partial=include_partial)
        buffer = io.StringIO()
        table.to_csv(buffer, index=False)
        return Response(content=buffer.getvalue(), media_type="text/csv")

    @app.get("/stimuli/{path:path}")
    async def get_stimulus(path: str):
        full = (store.dataset_dir / path).resolve()
        if not str(full).startswith(str(store.dataset_dir.resolve())):
            raise SessionError(404, "bad path")
        if not full.is_file():
            raise SessionError(404, f"no stimulus {path}")
        return FileResponse(full)

    @app.get("/masks/{size}/{seed}.png")
    async def get_mask(size: int, seed: int):
        from .images import write_gray_png
        mask = generate_noise_mask(size, seed)
        buffer = io.BytesIO()
        write_gray_png(buffer, mask)
        return Response(content=buffer.getvalue(), media_type="image/png")

    if ui_dir is not None:
        ui_root = Path(ui_dir).resolve()

        @app.get("/")
        async def ui_index():
            return FileResponse(ui_root / "index.html")

        @app.get("/dist/{path:path}")
        async def ui_asset(path: str):
            full = (ui_root / "dist" / path).resolve()
            if not str(full).startswith(str(ui_root)) or not full.is_file():
                raise SessionError(404, f"no asset {path}")
            return FileResponse(full, media_type="text/javascript")

    return app
