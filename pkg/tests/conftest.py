"""Shared fixtures: synthetic subjects with stable, distinct textures."""

from __future__ import annotations

import numpy as np
import pytest


def save_pgm_raw(path, arr: np.ndarray) -> None:
    """Store pixel values as-is (clipped to 0..255), no preview scaling."""
    a = np.rint(np.clip(arr, 0.0, 255.0)).astype(np.uint8)
    header = f"P5\n{a.shape[1]} {a.shape[0]}\n255\n".encode("ascii")
    path.write_bytes(header + a.tobytes())


def synth_face(subject_seed: int, variant_seed: int, w: int = 46, h: int = 56) -> np.ndarray:
    """Band-patterned fake portrait: consistent per subject, jittered per shot."""
    sr = np.random.default_rng(20_000 + subject_seed)
    vr = np.random.default_rng(90_000 + subject_seed * 1000 + variant_seed)
    yy = np.linspace(0.0, 1.0, h)[:, None]
    xx = np.linspace(0.0, 1.0, w)[None, :]
    img = 90.0 + 50.0 * np.sin(2 * np.pi * sr.uniform(1, 4) * yy + sr.uniform(0, 6))
    img = img + 40.0 * np.cos(2 * np.pi * sr.uniform(1, 4) * xx + sr.uniform(0, 6))
    img = img + sr.uniform(10, 35) * np.sin(4 * np.pi * (xx + yy))
    img = img + vr.normal(0.0, 6.0, (h, w))
    return np.clip(img, 0.0, 255.0)


@pytest.fixture()
def face_dataset(tmp_path):
    """Write a small PGM corpus and return {subject: [paths]}."""

    def build(n_subjects: int = 2, n_images: int = 3, w: int = 46, h: int = 56):
        by_subject: dict[str, list[str]] = {}
        for s in range(n_subjects):
            paths = []
            for v in range(n_images):
                p = tmp_path / f"s{s}" / f"{v}.pgm"
                p.parent.mkdir(parents=True, exist_ok=True)
                save_pgm_raw(p, synth_face(s, v, w=w, h=h))
                paths.append(str(p))
            by_subject[f"subj{s:02d}"] = paths
        return by_subject

    return build
