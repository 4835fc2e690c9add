import json

import pytest

from gaborhmm.config import RunConfig, config_from_dict, load_config, save_config
from gaborhmm.errors import DataError
from gaborhmm.manifest import (Manifest, ManifestEntry, build_eval_manifest,
                               load_manifest, save_manifest)


def test_manifest_round_trip(tmp_path):
    entries = [
        ManifestEntry(path="a/1.pgm", subject="a", role="train", class_id="a"),
        ManifestEntry(path="a/2.pgm", subject="a", role="probe_pos", class_id="a"),
        ManifestEntry(path="b/1.pgm", subject="b", role="probe_neg", class_id="a"),
    ]
    m = Manifest(entries=entries)
    p = tmp_path / "m.jsonl"
    save_manifest(m, p)
    again = load_manifest(p)
    assert again.entries == entries
    assert again.classes() == ["a"]
    assert [e.path for e in again.by_role("probe_neg")] == ["b/1.pgm"]


def test_manifest_line_errors(tmp_path):
    p = tmp_path / "m.jsonl"
    p.write_text('{"path": "x", "subject": "s", "role": "train", "class": "s"}\nnot json\n')
    with pytest.raises(DataError, match=r":2"):
        load_manifest(p)
    p.write_text('{"path": "x", "subject": "s", "role": "train"}\n')
    with pytest.raises(DataError, match="missing keys"):
        load_manifest(p)
    p.write_text('{"path": "x", "subject": "s", "role": "train", "class": "s", "extra": 1}\n')
    with pytest.raises(DataError, match="unknown keys"):
        load_manifest(p)
    p.write_text('{"path": "x", "subject": "s", "role": "gallery", "class": "s"}\n')
    with pytest.raises(DataError, match="role"):
        load_manifest(p)
    p.write_text("\n\n")
    with pytest.raises(DataError, match="empty"):
        load_manifest(p)


def test_entry_claim_consistency():
    with pytest.raises(DataError):
        ManifestEntry(path="x", subject="s", role="train", class_id="t")
    with pytest.raises(DataError):
        ManifestEntry(path="x", subject="s", role="probe_neg", class_id="s")
    with pytest.raises(DataError):
        ManifestEntry(path="", subject="s", role="train", class_id="s")


def test_manifest_validate_rules(tmp_path):
    img = tmp_path / "img.pgm"
    img.write_bytes(b"P5\n1 1\n255\n\x00")
    m = Manifest(entries=[
        ManifestEntry(path=str(img), subject="a", role="train", class_id="a"),
        ManifestEntry(path=str(img), subject="b", role="probe_neg", class_id="a"),
    ])
    m.validate()
    no_train = Manifest(entries=[
        ManifestEntry(path=str(img), subject="a", role="probe_pos", class_id="a"),
    ])
    with pytest.raises(DataError, match="no training"):
        no_train.validate()
    unenrolled = Manifest(entries=[
        ManifestEntry(path=str(img), subject="a", role="train", class_id="a"),
        ManifestEntry(path=str(img), subject="b", role="probe_neg", class_id="c"),
    ])
    with pytest.raises(DataError, match="unenrolled"):
        unenrolled.validate()
    missing = Manifest(entries=[
        ManifestEntry(path=str(tmp_path / "gone.pgm"), subject="a",
                      role="train", class_id="a"),
    ])
    with pytest.raises(DataError, match="missing file"):
        missing.validate()
    missing.validate(check_paths=False)


def test_build_eval_manifest_split_and_determinism():
    images = {f"s{i}": [f"s{i}/{j}.pgm" for j in range(5)] for i in range(4)}
    m1 = build_eval_manifest(images, n_train=3, n_neg=2, seed=9)
    m2 = build_eval_manifest(images, n_train=3, n_neg=2, seed=9)
    assert m1.entries == m2.entries
    m3 = build_eval_manifest(images, n_train=3, n_neg=2, seed=10)
    assert m1.entries != m3.entries
    assert len(m1.by_role("train")) == 12
    assert len(m1.by_role("probe_pos")) == 8
    assert len(m1.by_role("probe_neg")) == 8
    for e in m1.by_role("probe_neg"):
        assert e.subject != e.class_id
    for e in m1.by_role("train"):
        assert e.path in images[e.subject][:3]


def test_build_eval_manifest_validation():
    images = {"a": ["a/0.pgm"], "b": ["b/0.pgm"]}
    with pytest.raises(DataError):
        build_eval_manifest(images, n_train=2)
    with pytest.raises(DataError):
        build_eval_manifest(images, n_train=1, n_neg=5)
    with pytest.raises(DataError):
        build_eval_manifest({}, n_train=1)


def test_config_defaults_and_fingerprint_stability():
    cfg = RunConfig()
    cfg.validate()
    fp1 = cfg.fingerprint()
    fp2 = RunConfig().fingerprint()
    assert fp1 == fp2
    assert len(fp1) == 16
    other = RunConfig()
    other.hmm.n_states = 8
    assert other.fingerprint() != fp1


def test_config_round_trip(tmp_path):
    cfg = RunConfig()
    cfg.sampling.scan = "zigzag"
    cfg.gabor.magnitude = "modulus"
    p = tmp_path / "cfg.json"
    save_config(cfg, p)
    loaded = load_config(p)
    assert loaded == cfg
    assert loaded.fingerprint() == cfg.fingerprint()


def test_config_rejects_unknown_and_invalid(tmp_path):
    with pytest.raises(DataError, match="unknown top-level"):
        config_from_dict({"gabors": {}})
    with pytest.raises(DataError, match="unknown keys in gabor"):
        config_from_dict({"gabor": {"sigma": 1.0, "waves": 2}})
    with pytest.raises(DataError, match="kernel_size"):
        config_from_dict({"gabor": {"kernel_size": 10}})
    with pytest.raises(DataError, match="scan"):
        config_from_dict({"sampling": {"scan": "spiral"}})
    with pytest.raises(DataError, match="overlap"):
        config_from_dict({"sampling": {"block_k": 8, "overlap_p": 8}})
    with pytest.raises(DataError, match="n_states"):
        config_from_dict({"hmm": {"n_states": 0}})
    with pytest.raises(DataError, match="measure"):
        config_from_dict({"classify": {"measure": "hamming"}})
    with pytest.raises(DataError, match="percentile"):
        config_from_dict({"eval": {"tau_percentile": 120.0}})
    with pytest.raises(DataError, match="must be an object"):
        config_from_dict({"gabor": 5})
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(DataError, match="not valid JSON"):
        load_config(p)
    p.write_text("[1, 2]")
    with pytest.raises(DataError, match="root must be an object"):
        load_config(p)


def test_partial_config_overrides(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps({"hmm": {"n_states": 5}, "image_w": 46, "image_h": 56}))
    cfg = load_config(p)
    assert cfg.hmm.n_states == 5
    assert cfg.image_w == 46
    assert cfg.gabor.n_scales == 5
    assert cfg.sampling.scan == "serpentine"
