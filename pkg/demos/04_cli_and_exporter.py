"""Drive the whole pipeline through the command line, including embedding
files produced by the standalone exporter.

Phases: export embeddings (EMB1 files) -> sample triplets -> extract
features -> synthesize labels -> train -> evaluate -> interpret.  All
artifacts land in a scratch directory that is printed at the end.

Run: python demos/04_cli_and_exporter.py  (about two minutes)
"""

import json
import sys
import tempfile
from pathlib import Path

from robprof.cli import main as robprof_main
from robprof.synthdata import make_corpus_family, write_corpus_jsonl

try:
    from emb_exporter.cli import main as exporter_main
except ImportError:
    exporter_main = None

root = Path(tempfile.mkdtemp(prefix="robprof-demo-"))
data = root / "data"
data.mkdir()
corpora = make_corpus_family(6, 700, seed=3)
for corpus in corpora:
    write_corpus_jsonl(corpus, data / f"{corpus.id}.jsonl")
print(f"wrote {len(corpora)} corpora under {data}")

embedding_files = {}
if exporter_main is not None:
    for corpus in corpora:
        out = data / f"{corpus.id}.emb1"
        code = exporter_main([
            "export",
            "--input", str(data / f"{corpus.id}.jsonl"),
            "--output", str(out),
            "--encoder", "hash-trigram:512",
            "--batch-size", "256",
        ])
        assert code == 0
        embedding_files[corpus.id] = str(out)
    meta = json.loads((data / f"{corpora[0].id}.emb1.meta.json").read_text())
    print(f"exporter wrote EMB1 files (encoder {meta['version']}, dim {meta['dim']})")
    embeddings_config = {"source": "files", "files": embedding_files, "dim": 512}
else:
    print("emb-exporter not installed; falling back to the built-in embedder")
    embeddings_config = {"source": "fallback", "dim": 512}

config = {
    "output_dir": str(root / "out"),
    "seed": 9,
    "corpora": [
        {"id": c.id, "path": str(data / f"{c.id}.jsonl"), "format": "jsonl",
         "total_classes": c.total_classes}
        for c in corpora
    ],
    "sampling": {"n_triplets": 150, "k": 50},
    "embeddings": embeddings_config,
    "predictor": {"kind": "random_forest",
                  "params": {"n_trees": 150, "features_per_split": 13}},
    "split": {"mode": "interpolation", "repeats": 40, "train_fraction": 0.8},
    "synth": {"terms": {"fdr": 2.0, "n_unique_tokens": 1.5}, "noise": 0.02,
              "transform": "rank"},
}
cfg = root / "config.json"
cfg.write_text(json.dumps(config, indent=2))

for cmd in ("sample", "features", "synth-labels", "train", "evaluate", "interpret"):
    print(f"\n$ robprof {cmd} --config {cfg.name}")
    code = robprof_main([cmd, "--config", str(cfg)])
    if code != 0:
        sys.exit(code)

report = json.loads((root / "out" / "eval_report.json").read_text())
print(f"\ninterpolation over {report['n_repeats']} resamples:")
for metric in ("rmse", "mae", "r2", "evs"):
    stats = report["metrics"][metric]
    print(f"  {metric:>4}: {stats['mean']:.4f} +/- {stats['std']:.4f}")

pfi = json.loads((root / "out" / "pfi.json").read_text())
top = sorted(pfi["features"], key=lambda f: -f["mean"])[:3]
print("top features by permutation importance:",
      ", ".join(f"{f['name']} ({f['mean']:.3f})" for f in top))
print(f"\nall artifacts in {root}/out")
