"""Dataset manifest: the catalogue of samples under audit.

A manifest is a JSON document:

    {"name": ..., "classes": [...],
     "samples": [{"id": ..., "path": ..., "label": ..., "duration_s": ...}]}

Paths are relative to the dataset root directory.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConsistencyError, FormatError


@dataclass(frozen=True)
class SampleRecord:
    id: str
    path: str
    label: int
    duration_s: float


@dataclass(frozen=True)
class DatasetManifest:
    name: str
    classes: list[str]
    samples: list[SampleRecord] = field(default_factory=list)

    def __post_init__(self) -> None:
        ids = [s.id for s in self.samples]
        if len(set(ids)) != len(ids):
            raise ConsistencyError(f"manifest '{self.name}' has duplicate sample ids")
        paths = [s.path for s in self.samples]
        if len(set(paths)) != len(paths):
            raise ConsistencyError(f"manifest '{self.name}' has duplicate sample paths")
        n_classes = len(self.classes)
        for s in self.samples:
            if not 0 <= s.label < n_classes:
                raise ConsistencyError(
                    f"sample '{s.id}' has label {s.label}, expected [0, {n_classes})"
                )

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def ids(self) -> list[str]:
        return [s.id for s in self.samples]

    @property
    def labels(self) -> list[int]:
        return [s.label for s in self.samples]

    def by_id(self, sample_id: str) -> SampleRecord:
        try:
            return self._index[sample_id]
        except AttributeError:
            index = {s.id: s for s in self.samples}
            object.__setattr__(self, "_index", index)
            return index[sample_id]

    def __contains__(self, sample_id: str) -> bool:
        try:
            self.by_id(sample_id)
            return True
        except KeyError:
            return False

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "classes": list(self.classes),
            "samples": [
                {"id": s.id, "path": s.path, "label": s.label, "duration_s": s.duration_s}
                for s in self.samples
            ],
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n", encoding="utf-8"
        )


def load_manifest(path: str | Path) -> DatasetManifest:
    """Load and validate a dataset manifest JSON file."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read manifest {path}: {exc}") from exc
    try:
        samples = [
            SampleRecord(
                id=str(r["id"]),
                path=str(r["path"]),
                label=int(r["label"]),
                duration_s=float(r["duration_s"]),
            )
            for r in raw["samples"]
        ]
        return DatasetManifest(
            name=str(raw["name"]), classes=[str(c) for c in raw["classes"]], samples=samples
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"manifest {path} is missing or mistypes a field: {exc}") from exc
