"""Walkthrough: the full command-line pipeline, encoder-free.

Drives the same subcommands a user would run in a shell:

    gen-embeddings-synthetic -> (plant issues) -> rank -> evaluate

and prints the resulting Table-style summary. The `serve` step is shown but
not started (it blocks); run it yourself and open the review UI.
"""
import json
import tempfile
from pathlib import Path

from audioaudit.cli import main
from audioaudit.embeddings import as_segment_embeddings, write_segment_embeddings
from audioaudit.manifest import DatasetManifest, SampleRecord
from audioaudit.synthetic import planted_benchmark

work = Path(tempfile.mkdtemp(prefix="audioaudit_pipeline_"))
print(f"working under {work}")

# Plant label errors into a synthetic embedding space and write the AEMB
# files + manifest + ledger exactly as an encoder sidecar would.
fixture = work / "fixture"
fixture.mkdir()
emb, labels, ledger = planted_benchmark(10, 50, 64, 0.05, "LE", alpha=0.05, seed=9)
write_segment_embeddings(as_segment_embeddings(emb),
                         fixture / "emb.json", fixture / "emb.aemb")
DatasetManifest(
    name="demo-le",
    classes=[f"class{c}" for c in range(10)],
    samples=[SampleRecord(sid, f"audio/{sid}.wav", int(labels[i]), 5.0)
             for i, sid in enumerate(emb.sample_ids)],
).save(fixture / "manifest.json")
ledger.save(fixture / "ledger.json")

audit = work / "audit"
steps = [
    ["rank",
     "--manifest", str(fixture / "manifest.json"),
     "--aemb-manifest", str(fixture / "emb.json"),
     "--aemb-bin", str(fixture / "emb.aemb"),
     "--issues", "OT,ND,LE",
     "--alpha", "0.05", "--seed", "9",
     "--ledger", str(fixture / "ledger.json"),
     "--out", str(audit), "--audit-id", "demo"],
    ["evaluate", "--audit", str(audit)],
]
for argv in steps:
    print(f"\n$ audio-audit {' '.join(argv)}")
    code = main(argv)
    assert code == 0, f"exit code {code}"

print("\n--- summary.md ---")
print((audit / "summary.md").read_text())

report = json.loads((audit / "LE" / "0.05" / "9" / "report.json").read_text())
print(f"LE report: AUROC={report['auroc']:.3f} AP={report['ap']:.3f} "
      f"savings={report['mean_savings']:.1%} speedup={report['speedup']:.1f}x")

print(f"""
next step (blocks; run in a shell):

  audio-audit serve --bind 127.0.0.1:8765 --audit-dir {audit}

then browse rankings via GET /audits/demo/ranking/LE and post verdicts.
""")
