"""Persisted artifacts: feature images, sequences, models, classifiers.

Feature images use a small binary container; everything else is JSON with
sorted keys so identical runs produce identical bytes. Models and
classifiers carry the config fingerprint they were built under, and loads
refuse a mismatched fingerprint up front.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .classifier import ClassifierState, ClassModel
from .errors import DataError
from .hmm import CyclicHMM

FEATURE_MAGIC = b"GFI1"
SCHEMA_VERSION = 1


def write_feature_image(path: str | Path, image: np.ndarray) -> None:
    """Binary container: magic, u32 width, u32 height, float64 row-major."""
    arr = np.ascontiguousarray(image, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"feature image must be 2-d and non-empty, got {arr.shape}")
    h, w = arr.shape
    header = FEATURE_MAGIC + struct.pack("<II", w, h)
    Path(path).write_bytes(header + arr.astype("<f8").tobytes())


def read_feature_image(path: str | Path) -> np.ndarray:
    p = Path(path)
    try:
        raw = p.read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read feature image {p}: {exc}") from exc
    if raw[:4] != FEATURE_MAGIC:
        raise DataError(f"{p} is not a feature image container")
    if len(raw) < 12:
        raise DataError(f"{p} is truncated before the header ends")
    w, h = struct.unpack("<II", raw[4:12])
    if w == 0 or h == 0:
        raise DataError(f"{p} declares zero dimension {w}x{h}")
    need = 12 + w * h * 8
    if len(raw) != need:
        raise DataError(f"{p} has {len(raw)} bytes, expected {need}")
    flat = np.frombuffer(raw[12:], dtype="<f8")
    return flat.reshape(h, w).astype(np.float64)


def save_sequence(path: str | Path, values) -> None:
    """One observation per line, full float precision."""
    arr = np.asarray(getattr(values, "values", values), dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"sequence must be 1-d, got shape {arr.shape}")
    lines = "\n".join(repr(float(v)) for v in arr)
    Path(path).write_text(lines + "\n", encoding="ascii")


def load_sequence(path: str | Path) -> np.ndarray:
    p = Path(path)
    try:
        text = p.read_text(encoding="ascii")
    except (OSError, UnicodeDecodeError) as exc:
        raise DataError(f"cannot read sequence {p}: {exc}") from exc
    values = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise DataError(f"{p}:{lineno}: not a number: {line!r}") from None
    if not values:
        raise DataError(f"{p} holds no observations")
    return np.array(values, dtype=np.float64)


def _dump_json(path: str | Path, payload: dict) -> None:
    Path(path).write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def _load_json(path: str | Path, what: str) -> dict:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {what} {p}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"{what} {p} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise DataError(f"{what} {p} must hold a JSON object")
    return data


def _check_envelope(data: dict, path: Path, what: str, kinds: tuple[str, ...],
                    expect_fingerprint: str | None) -> None:
    version = data.get("version")
    if version != SCHEMA_VERSION:
        raise DataError(f"{what} {path} has unsupported version {version!r}")
    if data.get("kind") not in kinds:
        raise DataError(f"{what} {path} has kind {data.get('kind')!r}, expected {kinds}")
    fp = data.get("config_fingerprint")
    if not isinstance(fp, str):
        raise DataError(f"{what} {path} lacks a config fingerprint")
    if expect_fingerprint is not None and fp != expect_fingerprint:
        raise DataError(
            f"{what} {path} was built under config {fp}, "
            f"current config is {expect_fingerprint}"
        )


def _hmm_payload(model: CyclicHMM) -> dict:
    return {
        "n_states": model.n_states,
        "trans": model.trans.tolist(),
        "emit_mean": model.emit_mean.tolist(),
        "emit_var": model.emit_var.tolist(),
        "init": model.init.tolist(),
    }


def _hmm_from_payload(data: dict, path: Path) -> CyclicHMM:
    try:
        model = CyclicHMM(
            trans=np.array(data["trans"], dtype=np.float64),
            emit_mean=np.array(data["emit_mean"], dtype=np.float64),
            emit_var=np.array(data["emit_var"], dtype=np.float64),
            init=np.array(data["init"], dtype=np.float64),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"model {path} is malformed: {exc}") from exc
    try:
        model.validate()
    except ValueError as exc:
        raise DataError(f"model {path} is invalid: {exc}") from exc
    if model.n_states != data.get("n_states"):
        raise DataError(f"model {path} declares n_states {data.get('n_states')}, "
                        f"arrays say {model.n_states}")
    return model


def save_model(path: str | Path, models: CyclicHMM | dict, fingerprint: str) -> None:
    """Persist one shared model or a per-class model map."""
    if isinstance(models, CyclicHMM):
        payload = {
            "version": SCHEMA_VERSION,
            "kind": "cyclic_hmm",
            "config_fingerprint": fingerprint,
            **_hmm_payload(models),
        }
    else:
        payload = {
            "version": SCHEMA_VERSION,
            "kind": "cyclic_hmm_per_class",
            "config_fingerprint": fingerprint,
            "models": {cid: _hmm_payload(m) for cid, m in sorted(models.items())},
        }
    _dump_json(path, payload)


def load_model(
    path: str | Path, expect_fingerprint: str | None = None
) -> CyclicHMM | dict[str, CyclicHMM]:
    p = Path(path)
    data = _load_json(p, "model")
    _check_envelope(data, p, "model", ("cyclic_hmm", "cyclic_hmm_per_class"),
                    expect_fingerprint)
    if data["kind"] == "cyclic_hmm":
        return _hmm_from_payload(data, p)
    models = data.get("models")
    if not isinstance(models, dict) or not models:
        raise DataError(f"model {p} holds no per-class models")
    return {cid: _hmm_from_payload(m, p) for cid, m in models.items()}


def save_classifier(path: str | Path, state: ClassifierState, fingerprint: str,
                    tau: float | None = None) -> None:
    payload = {
        "version": SCHEMA_VERSION,
        "kind": "nearest_mean",
        "config_fingerprint": fingerprint,
        "measure": state.measure,
        "tau": tau,
        "pooled_var": None if state.pooled_var is None else state.pooled_var.tolist(),
        "cov_chol": None if state.cov_chol is None else state.cov_chol.tolist(),
        "classes": [
            {
                "class_id": c.class_id,
                "mean_path": c.mean_path.tolist(),
                "n_train": c.n_train,
            }
            for c in state.classes
        ],
    }
    _dump_json(path, payload)


def load_classifier(
    path: str | Path, expect_fingerprint: str | None = None
) -> tuple[ClassifierState, float | None]:
    p = Path(path)
    data = _load_json(p, "classifier")
    _check_envelope(data, p, "classifier", ("nearest_mean",), expect_fingerprint)
    try:
        classes = [
            ClassModel(
                class_id=str(c["class_id"]),
                mean_path=np.array(c["mean_path"], dtype=np.float64),
                n_train=int(c["n_train"]),
            )
            for c in data["classes"]
        ]
        state = ClassifierState(
            classes=classes,
            measure=str(data["measure"]),
            pooled_var=None if data["pooled_var"] is None
            else np.array(data["pooled_var"], dtype=np.float64),
            cov_chol=None if data.get("cov_chol") is None
            else np.array(data["cov_chol"], dtype=np.float64),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"classifier {p} is malformed: {exc}") from exc
    if not state.classes:
        raise DataError(f"classifier {p} holds no classes")
    tau = data.get("tau")
    return state, None if tau is None else float(tau)


def write_report_json(path: str | Path, report_dict: dict) -> None:
    _dump_json(path, report_dict)
