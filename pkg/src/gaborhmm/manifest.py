"""Dataset manifests: JSON lines mapping images to subjects and roles."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import DataError

ROLES = ("train", "probe_pos", "probe_neg")


@dataclass(frozen=True)
class ManifestEntry:
    """One image: where it lives, whose face it shows, how it is used.

    class_id is the identity the entry claims; for train and probe_pos it
    equals the subject, for probe_neg it is some other enrolled identity.
    """

    path: str
    subject: str
    role: str
    class_id: str

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise DataError(f"role must be one of {ROLES}, got {self.role!r}")
        if not self.path or not self.subject or not self.class_id:
            raise DataError("path, subject and class must be non-empty")
        if self.role in ("train", "probe_pos") and self.class_id != self.subject:
            raise DataError(
                f"{self.role} entry for subject {self.subject!r} claims "
                f"class {self.class_id!r}"
            )
        if self.role == "probe_neg" and self.class_id == self.subject:
            raise DataError(
                f"probe_neg entry for subject {self.subject!r} must claim another class"
            )


@dataclass
class Manifest:
    entries: list[ManifestEntry]

    def by_role(self, role: str) -> list[ManifestEntry]:
        return [e for e in self.entries if e.role == role]

    def classes(self) -> list[str]:
        return sorted({e.subject for e in self.entries if e.role == "train"})

    def validate(self, base_dir: str | Path | None = None, check_paths: bool = True) -> None:
        train = self.by_role("train")
        if not train:
            raise DataError("manifest has no training entries")
        enrolled = {e.subject for e in train}
        for e in self.entries:
            if e.role != "train" and e.class_id not in enrolled:
                raise DataError(
                    f"probe {e.path} claims unenrolled class {e.class_id!r}"
                )
        if check_paths:
            base = Path(base_dir) if base_dir is not None else None
            for e in self.entries:
                p = Path(e.path)
                if base is not None and not p.is_absolute():
                    p = base / p
                if not p.is_file():
                    raise DataError(f"manifest references missing file {p}")

    def resolved_path(self, entry: ManifestEntry, base_dir: str | Path | None) -> Path:
        p = Path(entry.path)
        if base_dir is not None and not p.is_absolute():
            return Path(base_dir) / p
        return p


def _entry_from_obj(obj: dict, where: str) -> ManifestEntry:
    if not isinstance(obj, dict):
        raise DataError(f"{where}: each line must be a JSON object")
    keys = set(obj)
    required = {"path", "subject", "role", "class"}
    missing = required - keys
    if missing:
        raise DataError(f"{where}: missing keys {sorted(missing)}")
    extra = keys - required
    if extra:
        raise DataError(f"{where}: unknown keys {sorted(extra)}")
    return ManifestEntry(
        path=str(obj["path"]),
        subject=str(obj["subject"]),
        role=str(obj["role"]),
        class_id=str(obj["class"]),
    )


def load_manifest(path: str | Path) -> Manifest:
    """Read JSONL; every line is one entry. Errors carry line numbers."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read manifest {p}: {exc}") from exc
    entries: list[ManifestEntry] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"{p}:{lineno}: invalid JSON: {exc}") from exc
        entries.append(_entry_from_obj(obj, f"{p}:{lineno}"))
    if not entries:
        raise DataError(f"manifest {p} is empty")
    return Manifest(entries=entries)


def save_manifest(manifest: Manifest, path: str | Path) -> None:
    lines = []
    for e in manifest.entries:
        lines.append(json.dumps(
            {"path": e.path, "subject": e.subject, "role": e.role, "class": e.class_id},
            sort_keys=True,
        ))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def build_eval_manifest(
    images_by_subject: Mapping[str, Sequence[str]],
    n_train: int,
    n_neg: int = 0,
    seed: int = 0,
) -> Manifest:
    """Split each subject's images into train and positive probes, then
    assign seeded impostor claims.

    The first n_train images (in given order) of each subject train the
    system, the rest probe as genuine claims. For negatives, n_neg images
    of OTHER subjects are drawn per enrolled class from a seeded
    permutation, and each drawn image claims that class.
    """
    if n_train < 1:
        raise DataError(f"n_train must be >= 1, got {n_train}")
    if n_neg < 0:
        raise DataError(f"n_neg must be >= 0, got {n_neg}")
    subjects = sorted(images_by_subject)
    if not subjects:
        raise DataError("no subjects given")
    entries: list[ManifestEntry] = []
    for subject in subjects:
        paths = list(images_by_subject[subject])
        if len(paths) < n_train:
            raise DataError(
                f"subject {subject!r} has {len(paths)} images, needs {n_train} to train"
            )
        for path in paths[:n_train]:
            entries.append(ManifestEntry(path=path, subject=subject,
                                         role="train", class_id=subject))
        for path in paths[n_train:]:
            entries.append(ManifestEntry(path=path, subject=subject,
                                         role="probe_pos", class_id=subject))

    if n_neg > 0:
        rng = np.random.default_rng(seed)
        for subject in subjects:
            others = [
                (other, path)
                for other in subjects
                if other != subject
                for path in images_by_subject[other]
            ]
            if len(others) < n_neg:
                raise DataError(
                    f"cannot draw {n_neg} impostor images against {subject!r}, "
                    f"only {len(others)} available"
                )
            picks = rng.permutation(len(others))[:n_neg]
            for i in picks:
                other, path = others[int(i)]
                entries.append(ManifestEntry(path=path, subject=other,
                                             role="probe_neg", class_id=subject))

    return Manifest(entries=entries)
