"""Acceptance suite: one test per release criterion, at its stated tolerance.

Each test prints a [PASS]/[FAIL] line naming its criterion (run with -s to
see them all). The suite needs no encoder and no frontend: synthetic
embeddings stand in for encoder output.
"""
import hashlib
import json
import math
import threading
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest
from fastapi.testclient import TestClient

from audioaudit.audio import Waveform, rms
from audioaudit.cli import main
from audioaudit.corruption import additive_noise, contiguous_crop, inject
from audioaudit.embeddings import gen_synthetic_embeddings
from audioaudit.indicators import (
    RankedList,
    rank_label_errors,
    rank_near_duplicates,
    rank_off_topic,
)
from audioaudit.manifest import load_manifest
from audioaudit.metrics import auroc, average_precision, foe_curve
from audioaudit.service import create_app
from audioaudit.synthetic import planted_benchmark

from conftest import build_tone_dataset, random_embedding_set, spectral_embed
from reference import (
    auroc_pair_counting,
    average_precision_by_hand,
    le_scores,
    nd_sample_scores,
    ot_scores,
)
from test_cli import run_rank, tree_hash, write_planted_fixture


@contextmanager
def criterion(name):
    try:
        yield
    except Exception:
        print(f"\n[FAIL] {name}")
        raise
    else:
        print(f"\n[PASS] {name}")


def test_metric_oracle_equivalence():
    with criterion("metric-oracle equivalence (1e-12 on 1,000 instances, < 10 s)"):
        start = time.perf_counter()
        rng = np.random.default_rng(2024)
        for _ in range(1000):
            n = int(rng.integers(4, 201))
            if rng.random() < 0.5:
                scores = np.round(rng.standard_normal(n), 1)  # heavy ties
            else:
                scores = rng.standard_normal(n)
            flags = rng.random(n) < float(rng.uniform(0.1, 0.9))
            if not flags.any():
                flags[0] = True
            if flags.all():
                flags[-1] = False
            assert abs(auroc(scores, flags) - auroc_pair_counting(scores, flags)) <= 1e-12
            assert abs(
                average_precision(scores, flags)
                - average_precision_by_hand(list(scores), list(flags))
            ) <= 1e-12
        elapsed = time.perf_counter() - start
        assert elapsed < 10.0, f"metric oracle sweep took {elapsed:.1f}s"


def test_indicator_oracle_equivalence():
    with criterion("indicator-oracle equivalence (exact, fixtures N <= 50)"):
        fixtures = [
            random_embedding_set(5, 3, seed=0),
            random_embedding_set(12, 4, seed=1, duplicates=2),
            random_embedding_set(25, 8, seed=2, duplicates=3),
            random_embedding_set(50, 16, seed=3, duplicates=5),
            gen_synthetic_embeddings(5, 10, 12, 0.05, seed=4)[0],
        ]
        for emb in fixtures:
            n = len(emb)
            k = min(10, n - 1)
            got_ot = dict(rank_off_topic(emb, k).entries)
            want_ot = ot_scores(emb.vectors, k)
            got_nd = dict(rank_near_duplicates(emb)[1].entries)
            want_nd = nd_sample_scores(emb.vectors)
            labels = np.random.default_rng(n).integers(0, 3, size=n)
            labels[:2] = [0, 1]
            got_le = dict(rank_label_errors(emb, labels).entries)
            want_le = le_scores(emb.vectors, labels)
            for i, sid in enumerate(emb.sample_ids):
                assert abs(got_ot[sid] - want_ot[i]) <= 1e-12
                assert abs(got_nd[sid] - want_nd[i]) <= 1e-12
                assert abs(got_le[sid] - want_le[i]) <= 1e-12


def test_foe_closed_forms():
    with criterion("FoE closed forms (perfect 0.0594 +- 1e-4; random mean 1.0 +- 0.05)"):
        ids = [f"i{j:03d}" for j in range(100)]
        perfect = RankedList("OT", [(sid, float(100 - i)) for i, sid in enumerate(ids)])
        positives = set(ids[:5])
        (_, foe_perfect), = foe_curve(perfect, positives, (1.0,))
        assert abs(foe_perfect - 0.0594) <= 1e-4

        means = []
        for seed in range(500):
            rng = np.random.default_rng(seed)
            order = [ids[int(i)] for i in rng.permutation(100)]
            shuffled = RankedList("OT", [(sid, float(100 - i)) for i, sid in enumerate(order)])
            curve = foe_curve(shuffled, positives)
            means.append(np.mean([f for _, f in curve]))
        assert abs(float(np.mean(means)) - 1.0) <= 0.05


def test_end_to_end_synthetic_audit():
    with criterion("end-to-end synthetic audit (ND/LE >= 0.95, OT >= 0.90, 10 seeds, < 30 s)"):
        start = time.perf_counter()
        thresholds = {"ND": 0.95, "LE": 0.95, "OT": 0.90}
        worst = {}
        for issue, floor in thresholds.items():
            for seed in range(10):
                emb, labels, ledger = planted_benchmark(
                    10, 50, 64, 0.05, issue, alpha=0.05, seed=seed
                )
                if issue == "OT":
                    ranked = rank_off_topic(emb, 10)
                elif issue == "ND":
                    ranked = rank_near_duplicates(emb)[1]
                else:
                    ranked = rank_label_errors(emb, labels)
                positives = ledger.positive_ids()
                id_to_score = dict(ranked.entries)
                scores = np.array([id_to_score[s] for s in emb.sample_ids])
                flags = np.array([s in positives for s in emb.sample_ids])
                value = auroc(scores, flags)
                worst[issue] = min(worst.get(issue, 1.0), value)
                assert value >= floor, f"{issue} seed {seed}: AUROC {value:.4f} < {floor}"
        elapsed = time.perf_counter() - start
        print(f"  worst per issue: { {k: round(v, 4) for k, v in worst.items()} }", end=" ")
        assert elapsed < 30.0, f"end-to-end sweep took {elapsed:.1f}s"


def test_determinism_of_corrupt_and_rank(tmp_path):
    with criterion("determinism: corrupt and rank re-runs are byte-identical"):
        data = tmp_path / "data"
        build_tone_dataset(data, num_classes=3, per_class=8)
        out_a, out_b = tmp_path / "ca", tmp_path / "cb"
        for out in (out_a, out_b):
            assert main(["corrupt", "--dataset", str(data), "--issue", "ND",
                         "--alpha", "0.1", "--seed", "7", "--out", str(out)]) == 0
        assert tree_hash(out_a) == tree_hash(out_b)

        fixture = tmp_path / "fx"
        write_planted_fixture(fixture, "ND", seed=7)
        audit = tmp_path / "audit"
        assert run_rank(fixture, audit, "OT,ND,LE", seed=7) == 0
        first = tree_hash(audit)
        assert run_rank(fixture, audit, "OT,ND,LE", seed=7) == 0
        assert tree_hash(audit) == first


def test_corruption_physics(tmp_path):
    with criterion("corruption physics (SNR within 2%, crops exact, LE hashes untouched)"):
        sr = 16000
        t = np.arange(int(0.2 * sr)) / sr
        quiet = Waveform(sr, 0.05 * np.sin(2 * np.pi * 440 * t))
        for snr_db in (10.0, 15.0, 20.0, -10.0, -5.0, 0.0):
            out = additive_noise(quiet, snr_db, np.random.default_rng(int(snr_db) + 50))
            noise = out.samples - quiet.samples
            measured = rms(quiet.samples) / rms(noise)
            requested = 10 ** (snr_db / 20.0)
            assert abs(measured / requested - 1.0) <= 0.02, f"SNR {snr_db} dB off"

        src = Waveform(sr, 0.3 * np.sin(2 * np.pi * 300 * t))
        for fraction in (0.5, 0.62, 0.75, 0.9):
            cropped = contiguous_crop(src, fraction, start_fraction=0.3)
            assert len(cropped) == round(fraction * len(src))

        data = tmp_path / "data"
        manifest = build_tone_dataset(data, num_classes=3, per_class=6)
        out = tmp_path / "le"
        inject(data, manifest, "LE", 0.2, seed=3, out_dir=out)
        for rec in manifest.samples:
            a = hashlib.sha256((data / rec.path).read_bytes()).hexdigest()
            b = hashlib.sha256((out / rec.path).read_bytes()).hexdigest()
            assert a == b


def test_service_durability(tmp_path):
    with criterion("service durability (100-verdict replay; 8 concurrent clients)"):
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
            "--issues", "ND,LE", "--k", "5", "--alpha", "0.1", "--seed", "5",
            "--out", str(audit_dir), "--audit-id", "acc",
        ]) == 0

        client = TestClient(create_app(audit_dir))
        nd_page = client.get("/audits/acc/ranking/ND", params={"limit": 1000}).json()
        le_page = client.get("/audits/acc/ranking/LE", params={"limit": 1000}).json()
        decisions = ["confirm", "reject", "skip"]
        posted = 0
        for i in range(50):
            entry = nd_page["entries"][i % len(nd_page["entries"])]
            r = client.post("/verdicts", json={
                "audit": "acc", "issue": "ND", "subject": entry["subject"],
                "decision": decisions[i % 3], "reviewer": f"r{i % 4}",
            })
            assert r.status_code == 200
            posted += 1
        for i in range(50):
            entry = le_page["entries"][i % len(le_page["entries"])]
            r = client.post("/verdicts", json={
                "audit": "acc", "issue": "LE", "subject": entry["subject"],
                "decision": decisions[(i + 1) % 3], "reviewer": f"r{i % 4}",
            })
            assert r.status_code == 200
            posted += 1
        assert posted == 100
        before = client.get("/audits/acc/progress").json()

        # Kill and restart: a new process would replay the same log.
        restarted = TestClient(create_app(audit_dir))
        after = restarted.get("/audits/acc/progress").json()
        assert after == before

        log_path = audit_dir / "verdicts.ndjson"
        base_lines = len(log_path.read_text().splitlines())
        subjects = [e["subject"] for e in nd_page["entries"]][:32]
        errors = []

        def reviewer(name, chunk):
            for subj in chunk:
                r = restarted.post("/verdicts", json={
                    "audit": "acc", "issue": "ND", "subject": subj,
                    "decision": "confirm", "reviewer": name,
                })
                if r.status_code != 200:
                    errors.append(r.status_code)

        threads = [
            threading.Thread(target=reviewer, args=(f"c{i}", subjects[i::8]))
            for i in range(8)
        ]
        for th in threads:
            th.start()
        for th in threads:
            th.join()
        assert not errors
        lines = log_path.read_text().splitlines()
        assert len(lines) == base_lines + len(subjects)
        seqs = sorted(json.loads(line)["seq"] for line in lines)
        assert seqs == list(range(1, len(lines) + 1))
