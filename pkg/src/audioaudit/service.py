"""Human-review HTTP service: rankings, audio, verdicts, progress.

Verdicts are persisted to an append-only newline-delimited JSON log per audit,
fsynced before the write is acknowledged. The in-memory view is rebuilt by
replaying the log on startup, so a restart never loses acknowledged state.
Reads are pure over (rankings, verdict log).
"""
from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from . import __version__
from .errors import ConfigError
from .indicators import RankedList, read_ranked_list
from .manifest import load_manifest

DECISIONS = ("confirm", "reject", "skip")

SubjectKey = str  # canonical: plain id, or "a|b" for pairs


def subject_key(subject) -> SubjectKey:
    if isinstance(subject, (list, tuple)):
        a, b = sorted(subject)
        return f"{a}|{b}"
    return str(subject)


def subject_json(subject):
    if isinstance(subject, tuple):
        return list(subject)
    return subject


class VerdictIn(BaseModel):
    audit: str
    issue: Literal["OT", "ND", "LE"]
    subject: str | list[str]
    decision: Literal["confirm", "reject", "skip"]
    reviewer: str = "anonymous"
    idempotency_key: str | None = Field(default=None, max_length=256)


@dataclass
class VerdictLog:
    """Append-only NDJSON verdict log with replayable in-memory state."""

    path: Path
    _lock: threading.Lock = field(default_factory=threading.Lock)
    # (issue, subject) -> effective decision dict; skip only recorded if no
    # non-skip decision exists (later non-skips supersede earlier ones).
    effective: dict[tuple[str, SubjectKey], dict] = field(default_factory=dict)
    reviewed: dict[str, set] = field(default_factory=dict)
    seen_keys: set = field(default_factory=set)
    count: int = 0

    def replay(self) -> None:
        if not self.path.exists():
            return
        for line in self.path.read_text(encoding="utf-8").splitlines():
            if line.strip():
                self._apply(json.loads(line))

    def _apply(self, record: dict) -> None:
        self.count += 1
        key = record.get("idempotency_key")
        if key:
            self.seen_keys.add(key)
        issue = record["issue"]
        skey = subject_key(record["subject"])
        self.reviewed.setdefault(issue, set()).add(skey)
        # Latest non-skip decision wins; a skip never displaces one.
        if record["decision"] != "skip" or (issue, skey) not in self.effective:
            self.effective[(issue, skey)] = record

    def append(self, record: dict) -> dict:
        """Durably append one verdict; returns the stored record."""
        with self._lock:
            key = record.get("idempotency_key")
            if key and key in self.seen_keys:
                return {**record, "duplicate": True}
            record = {**record, "seq": self.count + 1, "timestamp": time.time()}
            line = json.dumps(record, sort_keys=True)
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            self._apply(record)
            return record

    def issue_progress(self, issue: str, n_entries: int) -> dict:
        reviewed = len(self.reviewed.get(issue, set()))
        confirmed = sum(
            1
            for (iss, _), rec in self.effective.items()
            if iss == issue and rec["decision"] == "confirm"
        )
        foe = None
        if confirmed > 0:
            # Running FoE: reviewed count over the random-reviewer expectation
            # of finding `confirmed` issues when `confirmed` is also the best
            # running estimate of the total issue count.
            baseline = confirmed * (n_entries + 1) / (confirmed + 1)
            foe = reviewed / baseline
        return {"reviewed": reviewed, "confirmed": confirmed, "foe_so_far": foe,
                "n_entries": n_entries}


@dataclass
class Audit:
    id: str
    root: Path
    dataset_root: Path
    rankings: dict[str, RankedList]
    labels: dict[str, int]
    class_names: list[str]
    audio_paths: dict[str, Path]
    log: VerdictLog
    subject_keys: dict[str, set] = field(default_factory=dict)

    def ranking_subject_keys(self, issue: str) -> set:
        if issue not in self.subject_keys:
            self.subject_keys[issue] = {
                subject_key(s) for s in self.rankings[issue].subjects()
            }
        return self.subject_keys[issue]


def _load_audit(audit_json: Path) -> Audit:
    meta = json.loads(audit_json.read_text(encoding="utf-8"))
    root = audit_json.parent
    manifest = load_manifest(meta["dataset_manifest"])
    dataset_root = Path(meta.get("dataset_root", Path(meta["dataset_manifest"]).parent))
    rankings: dict[str, RankedList] = {}
    for issue, entry in meta.get("rankings", {}).items():
        # ND review happens at pair granularity when a pair list exists.
        rel = entry.get("pairs_path", entry["path"]) if issue == "ND" else entry["path"]
        rankings[issue] = read_ranked_list(root / rel, issue)
    audio_paths = {}
    for rec in manifest.samples:
        resolved = (dataset_root / rec.path).resolve()
        if resolved.is_relative_to(dataset_root.resolve()):
            audio_paths[rec.id] = resolved
    log = VerdictLog(path=root / "verdicts.ndjson")
    log.replay()
    return Audit(
        id=str(meta.get("id", root.name)),
        root=root,
        dataset_root=dataset_root,
        rankings=rankings,
        labels={rec.id: rec.label for rec in manifest.samples},
        class_names=manifest.classes,
        audio_paths=audio_paths,
        log=log,
    )


def discover_audits(audit_dir: Path) -> dict[str, Audit]:
    audits = {}
    candidates = sorted(audit_dir.rglob("audit.json"))
    if not candidates:
        raise ConfigError(f"no audit.json found under {audit_dir}; run `audio-audit rank` first")
    for path in candidates:
        audit = _load_audit(path)
        audits[audit.id] = audit
    return audits


def _parse_range(header: str, size: int) -> tuple[int, int] | None:
    """Parse a single bytes range; returns (start, end) inclusive or None."""
    if not header.startswith("bytes="):
        return None
    spec = header[len("bytes="):].split(",")[0].strip()
    if "-" not in spec:
        return None
    start_s, _, end_s = spec.partition("-")
    try:
        if start_s == "":
            suffix = int(end_s)
            if suffix <= 0:
                return None
            return max(0, size - suffix), size - 1
        start = int(start_s)
        end = int(end_s) if end_s else size - 1
    except ValueError:
        return None
    if start >= size or start > end:
        return None
    return start, min(end, size - 1)


def create_app(audit_dir: Path, ui_dir: Path | None = None) -> FastAPI:
    app = FastAPI(title="audio-audit review service", version=__version__)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    audits = discover_audits(audit_dir)

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    def get_audit(audit_id: str) -> Audit:
        audit = audits.get(audit_id)
        if audit is None:
            raise HTTPException(status_code=404, detail=f"unknown audit '{audit_id}'")
        return audit

    @app.get("/audits")
    def list_audits():
        return [
            {
                "id": a.id,
                "issues": sorted(a.rankings.keys()),
                "n_samples": len(a.labels),
                "classes": a.class_names,
            }
            for a in audits.values()
        ]

    @app.get("/audits/{audit_id}/ranking/{issue}")
    def get_ranking(audit_id: str, issue: str, offset: int = 0, limit: int = 50):
        audit = get_audit(audit_id)
        if issue not in audit.rankings:
            raise HTTPException(status_code=404, detail=f"no '{issue}' ranking in this audit")
        if offset < 0 or limit < 1:
            raise HTTPException(status_code=400, detail="offset must be >= 0 and limit >= 1")
        ranked = audit.rankings[issue]
        page = ranked.entries[offset : offset + limit]
        entries = []
        for i, (subject, score) in enumerate(page):
            skey = subject_key(subject)
            verdict = audit.log.effective.get((issue, skey))
            sample_ids = list(subject) if isinstance(subject, tuple) else [subject]
            entry = {
                "rank": offset + i + 1,
                "subject": subject_json(subject),
                "score": score,
                "verdict": _public_verdict(verdict),
                "audio": [f"/audio/{sid}" for sid in sample_ids],
            }
            if issue == "LE":
                label = audit.labels.get(subject)
                entry["label"] = label
                entry["class_name"] = (
                    audit.class_names[label] if label is not None else None
                )
            entries.append(entry)
        next_offset = offset + limit if offset + limit < len(ranked) else None
        return {
            "audit": audit.id,
            "issue": issue,
            "total": len(ranked),
            "offset": offset,
            "entries": entries,
            "next_offset": next_offset,
        }

    @app.get("/audio/{sample_id:path}")
    def get_audio(sample_id: str, request: Request):
        for audit in audits.values():
            path = audit.audio_paths.get(sample_id)
            if path is not None and path.is_file():
                return _audio_response(path, request)
        raise HTTPException(status_code=404, detail=f"unknown sample '{sample_id}'")

    @app.post("/verdicts")
    def post_verdict(verdict: VerdictIn):
        audit = get_audit(verdict.audit)
        if verdict.issue not in audit.rankings:
            raise HTTPException(status_code=422, detail=f"no '{verdict.issue}' ranking")
        skey = subject_key(verdict.subject)
        if skey not in audit.ranking_subject_keys(verdict.issue):
            raise HTTPException(
                status_code=422, detail=f"subject {verdict.subject!r} not in the {verdict.issue} ranking"
            )
        record = audit.log.append(
            {
                "audit": verdict.audit,
                "issue": verdict.issue,
                "subject": skey,
                "decision": verdict.decision,
                "reviewer": verdict.reviewer,
                "idempotency_key": verdict.idempotency_key,
            }
        )
        return {"ok": True, "seq": record.get("seq"), "duplicate": record.get("duplicate", False)}

    @app.get("/audits/{audit_id}/progress")
    def get_progress(audit_id: str):
        audit = get_audit(audit_id)
        return {
            "audit": audit.id,
            "issues": {
                issue: audit.log.issue_progress(issue, len(ranked))
                for issue, ranked in audit.rankings.items()
            },
            "foe_note": "foe_so_far = reviewed / (confirmed * (N + 1) / (confirmed + 1)); "
            "the confirmed count is the running estimate of total issues",
        }

    if ui_dir is not None and ui_dir.is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def _public_verdict(record: dict | None) -> dict | None:
    if record is None:
        return None
    return {
        "decision": record["decision"],
        "reviewer": record.get("reviewer", ""),
        "timestamp": record.get("timestamp"),
        "seq": record.get("seq"),
    }


def _audio_response(path: Path, request: Request) -> Response:
    blob = path.read_bytes()
    range_header = request.headers.get("range")
    headers = {"Accept-Ranges": "bytes"}
    if range_header:
        parsed = _parse_range(range_header, len(blob))
        if parsed is None:
            return Response(
                status_code=416,
                headers={**headers, "Content-Range": f"bytes */{len(blob)}"},
            )
        start, end = parsed
        headers["Content-Range"] = f"bytes {start}-{end}/{len(blob)}"
        return Response(
            content=blob[start : end + 1],
            status_code=206,
            media_type="audio/wav",
            headers=headers,
        )
    return Response(content=blob, media_type="audio/wav", headers=headers)
