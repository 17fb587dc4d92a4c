"""Command-line entry point: corrupt -> rank -> evaluate -> serve.

Embedding extraction is deliberately outside this process; `rank` only
consumes AEMB files, so the whole pipeline runs encoder-free. Exit codes:
0 ok, 2 configuration error, 3 data error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import shutil
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .corruption import CorruptionLedger, inject, load_ledger
from .embeddings import (
    aggregate_mean_pool,
    as_segment_embeddings,
    gen_synthetic_embeddings,
    load_segment_embeddings,
    write_segment_embeddings,
)
from .errors import AuditError, ConfigError, ConsistencyError, DataError, FormatError, ParameterError
from .indicators import (
    DEFAULT_OT_NEIGHBORS,
    pairwise_distances,
    rank_label_errors,
    rank_near_duplicates,
    rank_off_topic,
    read_ranked_list,
    write_ranked_list,
)
from .manifest import DatasetManifest, SampleRecord, load_manifest
from .metrics import evaluate_ranking, write_foe_csv

ISSUES = ("OT", "ND", "LE")

SEED_ENV_VAR = "AUDIO_AUDIT_SEED"


def config_hash(config: dict) -> str:
    return hashlib.sha256(json.dumps(config, sort_keys=True).encode("utf-8")).hexdigest()[:16]


def _provenance(config: dict, seed: int) -> dict:
    return {"config_hash": config_hash(config), "seed": seed, "version": __version__}


def _resolve_seed(args: argparse.Namespace) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV_VAR}={env!r} is not an integer") from exc
    raise ConfigError(f"no --seed given and {SEED_ENV_VAR} is unset")


def _alpha_dir(alpha: float) -> str:
    return f"{alpha:g}"


def _run_dir(out: Path, issue: str, alpha: float, seed: int) -> Path:
    return out / issue / _alpha_dir(alpha) / str(seed)


# --- subcommands ----------------------------------------------------------


def cmd_corrupt(args: argparse.Namespace) -> int:
    seed = _resolve_seed(args)
    dataset_dir = Path(args.dataset)
    manifest = load_manifest(dataset_dir / "manifest.json")
    if args.issue == "OT" and args.external_pool is None:
        print("warning: no --external-pool; external off-topic family falls back to pure noise",
              file=sys.stderr)
    corrupted, ledger = inject(
        dataset_dir,
        manifest,
        args.issue,
        args.alpha,
        seed,
        args.out,
        external_pool_dir=args.external_pool,
    )
    print(f"corrupted {len(ledger.entries)} of {len(manifest)} samples "
          f"({args.issue}, alpha={args.alpha}, seed={seed}) -> {args.out}")
    return 0


def cmd_rank(args: argparse.Namespace) -> int:
    seed = _resolve_seed(args)
    issues = [i.strip().upper() for i in args.issues.split(",") if i.strip()]
    for issue in issues:
        if issue not in ISSUES:
            raise ConfigError(f"unknown issue type '{issue}'")
    manifest = load_manifest(args.manifest)
    segs = load_segment_embeddings(args.aemb_manifest, args.aemb_bin, dataset_manifest=manifest)
    emb = aggregate_mean_pool(segs)
    labels = np.array([manifest.by_id(sid).label for sid in emb.sample_ids])

    config = {
        "command": "rank",
        "manifest": str(args.manifest),
        "issues": issues,
        "k": args.k,
        "alpha": args.alpha,
        "seed": seed,
    }
    provenance = _provenance(config, seed)
    ledger_issue = load_ledger(args.ledger).issue_type if args.ledger else None
    out = Path(args.out)
    dist = pairwise_distances(emb)
    audit = _load_audit_record(out)
    audit.update(
        {
            "id": args.audit_id or out.name,
            "version": __version__,
            "dataset_manifest": str(Path(args.manifest).resolve()),
            "dataset_root": str(Path(args.dataset_root).resolve()) if args.dataset_root
            else str(Path(args.manifest).resolve().parent),
        }
    )
    audit.setdefault("rankings", {})

    for issue in issues:
        run_dir = _run_dir(out, issue, args.alpha, seed)
        run_dir.mkdir(parents=True, exist_ok=True)
        if issue == "OT":
            ranked = rank_off_topic(emb, args.k, dist=dist)
        elif issue == "ND":
            pairs, ranked = rank_near_duplicates(emb, dist=dist)
            write_ranked_list(pairs, run_dir / "pairs.jsonl", run_dir / "pairs.csv",
                              header=provenance)
        else:
            ranked = rank_label_errors(emb, labels, dist=dist)
        write_ranked_list(ranked, run_dir / "ranking.jsonl", run_dir / "ranking.csv",
                          header=provenance)
        (run_dir / "provenance.json").write_text(
            json.dumps(provenance, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        # Ground truth only applies to the issue type it was injected for.
        if args.ledger and ledger_issue == issue:
            shutil.copyfile(args.ledger, run_dir / "ledger.json")
        entry = {"path": str(run_dir.relative_to(out) / "ranking.jsonl"),
                 "alpha": args.alpha, "seed": seed}
        if issue == "ND":
            entry["pairs_path"] = str(run_dir.relative_to(out) / "pairs.jsonl")
        audit["rankings"][issue] = entry
        print(f"ranked {issue}: {len(emb)} samples -> {run_dir}")

    (out / "audit.json").write_text(json.dumps(audit, indent=2, sort_keys=True) + "\n",
                                    encoding="utf-8")
    return 0


def _load_audit_record(out: Path) -> dict:
    path = out / "audit.json"
    if path.exists():
        return json.loads(path.read_text(encoding="utf-8"))
    return {}


def cmd_evaluate(args: argparse.Namespace) -> int:
    out = Path(args.audit)
    rankings = sorted(out.glob("*/*/*/ranking.jsonl"))
    if not rankings:
        raise ConfigError(f"no rankings found under {out} (expected <issue>/<alpha>/<seed>/ranking.jsonl)")
    rows = []
    skipped = []
    for ranking_path in rankings:
        run_dir = ranking_path.parent
        issue = run_dir.parent.parent.name
        ledger_path = Path(args.ledger) if args.ledger else run_dir / "ledger.json"
        if not ledger_path.exists():
            skipped.append(run_dir)
            continue
        ledger = load_ledger(ledger_path)
        if ledger.issue_type != issue:
            raise ConsistencyError(
                f"ledger {ledger_path} records {ledger.issue_type} corruption but "
                f"{run_dir} holds a {issue} ranking"
            )
        ranked = read_ranked_list(ranking_path, issue)
        provenance = ranked.metadata or {}
        report = evaluate_ranking(
            ranked,
            ledger.positive_ids(),
            alpha=ledger.alpha,
            seed=ledger.seed,
            provenance=provenance,
        )
        report.save(run_dir / "report.json")
        write_foe_csv(report.foe_curve, run_dir / "foe.csv", provenance=provenance)
        rows.append(report)
        print(f"{issue} alpha={ledger.alpha:g} seed={ledger.seed}: "
              f"AUROC={report.auroc:.3f} AP={report.ap:.3f} savings={report.mean_savings:.1%}")

    if not rows:
        raise DataError(
            f"no ledger for any ranking under {out}: natural-data audits have no ground "
            f"truth to score against; use the review service (`audio-audit serve`) to "
            f"triage instead"
        )
    for run_dir in skipped:
        print(f"note: {run_dir} has no ledger, skipped", file=sys.stderr)
    _write_summary(out, rows)
    return 0


def _write_summary(out: Path, reports) -> None:
    """Markdown table of mean/std AUROC and AP per (issue, alpha)."""
    groups: dict[tuple[str, float], list] = {}
    for rep in reports:
        groups.setdefault((rep.issue_type, rep.alpha), []).append(rep)
    lines = [
        "| Issue | alpha | AUROC | AP | Mean savings | Speed-up | Seeds |",
        "|---|---|---|---|---|---|---|",
    ]
    for (issue, alpha), reps in sorted(groups.items()):
        aurocs = np.array([r.auroc for r in reps])
        aps = np.array([r.ap for r in reps])
        savings = np.array([r.mean_savings for r in reps])
        speedups = np.array([r.speedup for r in reps])
        lines.append(
            f"| {issue} | {alpha:g} "
            f"| {aurocs.mean():.3f} ± {aurocs.std():.3f} "
            f"| {aps.mean():.3f} ± {aps.std():.3f} "
            f"| {savings.mean():.1%} | {speedups.mean():.1f}x | {len(reps)} |"
        )
    (out / "summary.md").write_text("\n".join(lines) + "\n", encoding="utf-8")


def cmd_gen_embeddings_synthetic(args: argparse.Namespace) -> int:
    seed = _resolve_seed(args)
    emb, labels = gen_synthetic_embeddings(
        args.classes, args.per_class, args.dim, args.spread, seed
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_segment_embeddings(as_segment_embeddings(emb), out / "embeddings.json",
                             out / "embeddings.aemb")
    manifest = DatasetManifest(
        name=f"synthetic-{args.classes}x{args.per_class}",
        classes=[f"class_{c:03d}" for c in range(args.classes)],
        samples=[
            SampleRecord(sid, f"audio/{sid}.wav", int(labels[i]), 0.0)
            for i, sid in enumerate(emb.sample_ids)
        ],
    )
    manifest.save(out / "manifest.json")
    print(f"wrote {len(emb)} synthetic embeddings (dim={args.dim}, seed={seed}) -> {out}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    host, _, port = args.bind.rpartition(":")
    if not host or not port.isdigit():
        raise ConfigError(f"--bind must be host:port, got '{args.bind}'")
    app = create_app(Path(args.audit_dir), ui_dir=Path(args.ui_dir) if args.ui_dir else None)
    uvicorn.run(app, host=host, port=int(port), log_level="info")
    return 0


# --- parser ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="audio-audit",
        description="Audit audio datasets for off-topic samples, near duplicates, and label errors.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("corrupt", help="inject synthetic corruption into a WAV dataset")
    p.add_argument("--dataset", required=True, help="dataset directory containing manifest.json")
    p.add_argument("--issue", required=True, choices=ISSUES)
    p.add_argument("--alpha", required=True, type=float, help="contamination rate in (0, 1)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True, help="output directory for the corrupted dataset")
    p.add_argument("--external-pool", default=None,
                   help="directory of WAVs used for the external off-topic family")
    p.set_defaults(func=cmd_corrupt)

    p = sub.add_parser("rank", help="rank samples from AEMB embeddings")
    p.add_argument("--manifest", required=True, help="dataset manifest JSON")
    p.add_argument("--aemb-manifest", required=True, help="AEMB JSON sidecar")
    p.add_argument("--aemb-bin", required=True, help="AEMB binary")
    p.add_argument("--issues", default="OT,ND,LE", help="comma-separated subset of OT,ND,LE")
    p.add_argument("--k", type=int, default=DEFAULT_OT_NEIGHBORS, help="neighbors for OT")
    p.add_argument("--alpha", type=float, default=0.0, help="provenance: contamination rate")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--ledger", default=None, help="ledger.json to copy alongside rankings")
    p.add_argument("--out", required=True, help="audit output directory")
    p.add_argument("--audit-id", default=None)
    p.add_argument("--dataset-root", default=None, help="directory audio paths resolve against")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("evaluate", help="score rankings against a corruption ledger")
    p.add_argument("--audit", required=True, help="audit directory written by rank")
    p.add_argument("--ledger", default=None, help="override ledger path for all rankings")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("gen-embeddings-synthetic",
                       help="write a synthetic AEMB + manifest fixture")
    p.add_argument("--classes", type=int, default=10)
    p.add_argument("--per-class", type=int, default=50)
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--spread", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_embeddings_synthetic)

    p = sub.add_parser("serve", help="start the review service")
    p.add_argument("--bind", default="127.0.0.1:8765")
    p.add_argument("--audit-dir", required=True)
    p.add_argument("--ui-dir", default=None, help="static UI assets to serve at /ui")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (FormatError, DataError, ConsistencyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except AuditError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
