import json
import threading
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from audioaudit.cli import main
from audioaudit.corruption import load_ledger
from audioaudit.manifest import load_manifest
from audioaudit.service import create_app

from conftest import build_tone_dataset, spectral_embed
from test_cli import run_rank


@pytest.fixture(scope="module")
def audit_env(tmp_path_factory):
    """A ranked ND/LE/OT audit over a corrupted WAV dataset."""
    tmp_path = tmp_path_factory.mktemp("svc")
    data = tmp_path / "data"
    build_tone_dataset(data, num_classes=4, per_class=8)
    corrupted = tmp_path / "corrupted"
    assert main(["corrupt", "--dataset", str(data), "--issue", "ND",
                 "--alpha", "0.1", "--seed", "5", "--out", str(corrupted)]) == 0
    manifest = load_manifest(corrupted / "manifest.json")
    spectral_embed(corrupted, manifest,
                   corrupted / "emb.json", corrupted / "emb.aemb")
    audit_dir = tmp_path / "audit"
    assert main([
        "rank",
        "--manifest", str(corrupted / "manifest.json"),
        "--aemb-manifest", str(corrupted / "emb.json"),
        "--aemb-bin", str(corrupted / "emb.aemb"),
        "--issues", "OT,ND,LE", "--k", "5",
        "--alpha", "0.1", "--seed", "5",
        "--ledger", str(corrupted / "ledger.json"),
        "--out", str(audit_dir), "--audit-id", "demo",
    ]) == 0
    ledger = load_ledger(corrupted / "ledger.json")
    return {
        "audit_dir": audit_dir,
        "corrupted": corrupted,
        "manifest": manifest,
        "ledger": ledger,
    }


@pytest.fixture()
def client(audit_env, tmp_path):
    app = create_app(audit_env["audit_dir"])
    with TestClient(app) as c:
        yield c


@pytest.fixture(autouse=True)
def clean_verdict_log(audit_env):
    log = audit_env["audit_dir"] / "verdicts.ndjson"
    if log.exists():
        log.unlink()
    yield


class TestReadEndpoints:
    def test_list_audits(self, client):
        audits = client.get("/audits").json()
        assert len(audits) == 1
        assert audits[0]["id"] == "demo"
        assert audits[0]["issues"] == ["LE", "ND", "OT"]

    def test_pagination_has_next_token(self, client):
        page = client.get("/audits/demo/ranking/ND", params={"offset": 0, "limit": 2}).json()
        assert len(page["entries"]) == 2
        assert page["next_offset"] == 2
        assert page["entries"][0]["rank"] == 1

    def test_pagination_is_stable_and_complete(self, client):
        seen = []
        offset = 0
        while offset is not None:
            page = client.get("/audits/demo/ranking/ND",
                              params={"offset": offset, "limit": 7}).json()
            seen.extend(tuple(e["subject"]) for e in page["entries"])
            offset = page["next_offset"]
        assert len(seen) == page["total"]
        assert len(set(seen)) == len(seen)
        scores = []
        offset = 0
        page = client.get("/audits/demo/ranking/ND",
                          params={"offset": 0, "limit": 1000}).json()
        scores = [e["score"] for e in page["entries"]]
        assert scores == sorted(scores, reverse=True)

    def test_nd_entries_carry_both_pair_ids(self, client):
        page = client.get("/audits/demo/ranking/ND", params={"limit": 3}).json()
        for entry in page["entries"]:
            assert isinstance(entry["subject"], list) and len(entry["subject"]) == 2
            assert len(entry["audio"]) == 2

    def test_le_entries_carry_label_and_class(self, client):
        page = client.get("/audits/demo/ranking/LE", params={"limit": 3}).json()
        for entry in page["entries"]:
            assert isinstance(entry["label"], int)
            assert entry["class_name"].startswith("class")

    def test_unknown_audit_and_issue_404(self, client):
        assert client.get("/audits/nope/ranking/ND").status_code == 404
        assert client.get("/audits/demo/ranking/XX").status_code == 404

    def test_top_nd_pair_is_a_planted_duplicate(self, client, audit_env):
        page = client.get("/audits/demo/ranking/ND", params={"limit": 1}).json()
        top = set(page["entries"][0]["subject"])
        planted = {
            frozenset({e.sample_id, e.params["source_id"]})
            for e in audit_env["ledger"].entries
        }
        assert frozenset(top) in planted


class TestAudioEndpoint:
    def test_full_file_bytes(self, client, audit_env):
        rec = audit_env["manifest"].samples[0]
        expected = (audit_env["corrupted"] / rec.path).read_bytes()
        resp = client.get(f"/audio/{rec.id}")
        assert resp.status_code == 200
        assert resp.content == expected
        assert resp.headers["content-type"] == "audio/wav"

    def test_range_request_exact_bytes(self, client, audit_env):
        rec = audit_env["manifest"].samples[0]
        expected = (audit_env["corrupted"] / rec.path).read_bytes()
        resp = client.get(f"/audio/{rec.id}", headers={"Range": "bytes=0-99"})
        assert resp.status_code == 206
        assert len(resp.content) == 100
        assert resp.content == expected[:100]
        assert resp.headers["content-range"] == f"bytes 0-99/{len(expected)}"

    def test_range_suffix(self, client, audit_env):
        rec = audit_env["manifest"].samples[0]
        expected = (audit_env["corrupted"] / rec.path).read_bytes()
        resp = client.get(f"/audio/{rec.id}", headers={"Range": "bytes=-10"})
        assert resp.status_code == 206
        assert resp.content == expected[-10:]

    def test_unsatisfiable_range(self, client, audit_env):
        rec = audit_env["manifest"].samples[0]
        resp = client.get(f"/audio/{rec.id}", headers={"Range": "bytes=999999999-"})
        assert resp.status_code == 416

    def test_unknown_id_404(self, client):
        assert client.get("/audio/no-such-sample").status_code == 404

    def test_path_traversal_rejected(self, client, audit_env):
        secret = audit_env["audit_dir"].parent / "secret.txt"
        secret.write_text("confidential")
        resp = client.get("/audio/..%2Fsecret.txt")
        assert resp.status_code == 404
        resp = client.get("/audio/../secret.txt")
        assert resp.status_code in (404, 400)


class TestVerdicts:
    def post(self, client, subject, decision="confirm", issue="ND", **kw):
        body = {"audit": "demo", "issue": issue, "subject": subject,
                "decision": decision, "reviewer": "alice", **kw}
        return client.post("/verdicts", json=body)

    def top_subject(self, client, issue="ND"):
        page = client.get(f"/audits/demo/ranking/{issue}", params={"limit": 1}).json()
        return page["entries"][0]["subject"], page["total"]

    def test_confirm_then_page_reflects_decision(self, client):
        subject, _ = self.top_subject(client)
        resp = self.post(client, subject)
        assert resp.status_code == 200
        assert resp.json()["ok"] is True
        page = client.get("/audits/demo/ranking/ND", params={"limit": 1}).json()
        assert page["entries"][0]["verdict"]["decision"] == "confirm"
        assert page["entries"][0]["verdict"]["reviewer"] == "alice"

    def test_progress_closed_form_after_top_confirm(self, client):
        subject, total = self.top_subject(client)
        self.post(client, subject)
        progress = client.get("/audits/demo/progress").json()
        nd = progress["issues"]["ND"]
        assert nd["reviewed"] == 1
        assert nd["confirmed"] == 1
        assert nd["foe_so_far"] == pytest.approx(1.0 / (1 * (total + 1) / 2), abs=1e-12)

    def test_skip_counts_reviewed_not_confirmed(self, client):
        subject, _ = self.top_subject(client)
        self.post(client, subject, decision="skip")
        nd = client.get("/audits/demo/progress").json()["issues"]["ND"]
        assert nd["reviewed"] == 1
        assert nd["confirmed"] == 0
        assert nd["foe_so_far"] is None

    def test_later_decision_supersedes(self, client, audit_env):
        subject, _ = self.top_subject(client)
        self.post(client, subject, decision="reject")
        self.post(client, subject, decision="confirm")
        nd = client.get("/audits/demo/progress").json()["issues"]["ND"]
        assert nd["reviewed"] == 1
        assert nd["confirmed"] == 1
        log = (audit_env["audit_dir"] / "verdicts.ndjson").read_text().splitlines()
        assert len(log) == 2  # the log keeps every entry

    def test_skip_never_displaces_decision(self, client):
        subject, _ = self.top_subject(client)
        self.post(client, subject, decision="confirm")
        self.post(client, subject, decision="skip")
        nd = client.get("/audits/demo/progress").json()["issues"]["ND"]
        assert nd["confirmed"] == 1

    def test_unknown_subject_validation_error(self, client):
        resp = self.post(client, ["ghost-a", "ghost-b"])
        assert resp.status_code == 422

    def test_malformed_body_400(self, client):
        resp = client.post("/verdicts", json={"audit": "demo", "decision": "confirm"})
        assert resp.status_code == 400
        resp = client.post("/verdicts", json={"audit": "demo", "issue": "ND",
                                              "subject": "x", "decision": "maybe"})
        assert resp.status_code == 400

    def test_idempotency_key_dedupes(self, client, audit_env):
        subject, _ = self.top_subject(client)
        self.post(client, subject, idempotency_key="k1")
        resp = self.post(client, subject, idempotency_key="k1")
        assert resp.json()["duplicate"] is True
        log = (audit_env["audit_dir"] / "verdicts.ndjson").read_text().splitlines()
        assert len(log) == 1

    def test_restart_replays_identical_progress(self, client, audit_env):
        page = client.get("/audits/demo/ranking/LE", params={"limit": 5}).json()
        for i, entry in enumerate(page["entries"]):
            decision = ["confirm", "reject", "skip", "confirm", "skip"][i]
            self.post(client, entry["subject"], decision=decision, issue="LE")
        before = client.get("/audits/demo/progress").json()

        restarted = TestClient(create_app(audit_env["audit_dir"]))
        after = restarted.get("/audits/demo/progress").json()
        assert after == before

    def test_concurrent_posts_lose_nothing(self, client, audit_env):
        page = client.get("/audits/demo/ranking/ND", params={"limit": 1000}).json()
        subjects = [e["subject"] for e in page["entries"]][:24]
        errors = []

        def reviewer(name, chunk):
            for subj in chunk:
                r = client.post("/verdicts", json={
                    "audit": "demo", "issue": "ND", "subject": subj,
                    "decision": "confirm", "reviewer": name,
                })
                if r.status_code != 200:
                    errors.append(r.status_code)

        threads = [
            threading.Thread(target=reviewer, args=(f"rev{i}", subjects[i::8]))
            for i in range(8)
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert not errors
        log_lines = (audit_env["audit_dir"] / "verdicts.ndjson").read_text().splitlines()
        assert len(log_lines) == len(subjects)
        seqs = [json.loads(line)["seq"] for line in log_lines]
        assert sorted(seqs) == list(range(1, len(subjects) + 1))
        nd = client.get("/audits/demo/progress").json()["issues"]["ND"]
        assert nd["reviewed"] == len(subjects)
        assert nd["confirmed"] == len(subjects)
