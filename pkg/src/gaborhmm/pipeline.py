"""End-to-end wiring: images to features to sequences to decisions.

Sequences are computed once per unique image and shared between training
and evaluation. Two model layouts exist: one HMM trained on everything
(paths are then compared by a nearest-mean classifier) or one HMM per
class (probes score by log-likelihood, negated so smaller stays better).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import classifier as nmc
from .config import RunConfig
from .errors import DataError
from .evaluate import (ConfusionCounts, EvalReport, ProbeRecord, calibrate_tau,
                       compute_metrics, decide_negative, decide_positive)
from .features import ObservationSequence, extract_observations
from .gabor import GaborParams, fuse, make_bank
from .hmm import CyclicHMM, baum_welch, forward_log_likelihood, init_model, viterbi
from .images import load_image
from .manifest import Manifest
from .sampling import SamplingPlan, plan_sampling, scan_order


@lru_cache(maxsize=8)
def _cached_bank(params: GaborParams, size: int, dc_correct: bool) -> tuple[np.ndarray, ...]:
    return tuple(make_bank(params, size=size, dc_correct=dc_correct))


def feature_image(image: np.ndarray, cfg: RunConfig) -> np.ndarray:
    """Fused magnitude image under the configured kernel bank."""
    bank = _cached_bank(cfg.gabor.to_params(), cfg.gabor.kernel_size, cfg.gabor.dc_correct)
    return fuse(image, list(bank), magnitude=cfg.gabor.magnitude)


def sampling_plan(cfg: RunConfig) -> SamplingPlan:
    return plan_sampling(
        cfg.image_w,
        cfg.image_h,
        block_k=cfg.sampling.block_k,
        overlap_p=cfg.sampling.overlap_p,
        strip_h=cfg.sampling.strip_h,
    )


def image_observations(
    image: np.ndarray, cfg: RunConfig, source_id: str = ""
) -> ObservationSequence:
    gf = feature_image(image, cfg)
    plan = sampling_plan(cfg)
    order = scan_order(plan, mode=cfg.sampling.scan)
    return extract_observations(
        gf, plan, order=order, source_id=source_id,
        fallback_scale=cfg.sampling.fallback_scale,
    )


def observations_from_file(
    path: str | Path, cfg: RunConfig
) -> ObservationSequence:
    image = load_image(path, size=(cfg.image_w, cfg.image_h))
    return image_observations(image, cfg, source_id=str(path))


@dataclass
class TrainedSystem:
    """Everything evaluation needs, plus the fingerprint it was built under."""

    config: RunConfig
    fingerprint: str
    mode: str
    model: CyclicHMM | dict[str, CyclicHMM]
    classifier: nmc.ClassifierState | None
    tau: float

    def probe_scores(self, seq: ObservationSequence) -> tuple[str, np.ndarray, list[str]]:
        """Predicted class, score table, and the class id order."""
        if self.mode == "global":
            path = viterbi(self.model, seq.values)
            predicted, scores = nmc.classify(path, self.classifier)
            return predicted, scores, self.classifier.class_ids()
        ids = sorted(self.model)
        scores = np.array(
            [-forward_log_likelihood(self.model[cid], seq.values) for cid in ids]
        )
        return ids[int(scores.argmin())], scores, ids


def _sequences_for(
    manifest: Manifest, cfg: RunConfig, base_dir: str | Path | None
) -> dict[str, ObservationSequence]:
    """One decoded sequence per unique image file."""
    out: dict[str, ObservationSequence] = {}
    for entry in manifest.entries:
        if entry.path in out:
            continue
        resolved = manifest.resolved_path(entry, base_dir)
        out[entry.path] = observations_from_file(resolved, cfg)
    return out


def train_system(
    manifest: Manifest,
    cfg: RunConfig,
    base_dir: str | Path | None = None,
    sequences: dict[str, ObservationSequence] | None = None,
) -> TrainedSystem:
    """Fit the configured model layout on the manifest's training entries."""
    cfg.validate()
    manifest.validate(base_dir=base_dir, check_paths=sequences is None)
    if sequences is None:
        train_only = Manifest(entries=manifest.by_role("train"))
        sequences = _sequences_for(train_only, cfg, base_dir)
    train_entries = manifest.by_role("train")
    by_class: dict[str, list[ObservationSequence]] = {}
    for entry in train_entries:
        by_class.setdefault(entry.subject, []).append(sequences[entry.path])

    fingerprint = cfg.fingerprint()
    hc = cfg.hmm

    if hc.mode == "per_class":
        models: dict[str, CyclicHMM] = {}
        self_scores: list[float] = []
        for cid in sorted(by_class):
            seqs = [s.values for s in by_class[cid]]
            start = init_model(hc.n_states, seqs, var_floor_scale=hc.var_floor_scale)
            result = baum_welch(start, seqs, max_iters=hc.max_iters, tol=hc.tol,
                                var_floor_scale=hc.var_floor_scale)
            models[cid] = result.model
            self_scores.extend(-forward_log_likelihood(result.model, s) for s in seqs)
        tau = calibrate_tau(self_scores, percentile=cfg.eval.tau_percentile)
        return TrainedSystem(config=cfg, fingerprint=fingerprint, mode="per_class",
                             model=models, classifier=None, tau=tau)

    all_seqs = [sequences[e.path].values for e in train_entries]
    start = init_model(hc.n_states, all_seqs, var_floor_scale=hc.var_floor_scale)
    result = baum_welch(start, all_seqs, max_iters=hc.max_iters, tol=hc.tol,
                        var_floor_scale=hc.var_floor_scale)
    model = result.model

    paths_by_class = {
        cid: [viterbi(model, s.values) for s in group]
        for cid, group in by_class.items()
    }
    state = nmc.fit(
        paths_by_class,
        measure=cfg.classify.measure,
        var_floor=cfg.classify.var_floor,
        covariance=cfg.classify.covariance,
        ridge=cfg.classify.ridge,
    )
    ids = state.class_ids()
    self_scores = []
    for cid, paths in paths_by_class.items():
        col = ids.index(cid)
        for p in paths:
            self_scores.append(float(nmc.score_table(state, p)[col]))
    tau = calibrate_tau(self_scores, percentile=cfg.eval.tau_percentile)
    return TrainedSystem(config=cfg, fingerprint=fingerprint, mode="global",
                         model=model, classifier=state, tau=tau)


def evaluate_system(
    system: TrainedSystem,
    manifest: Manifest,
    base_dir: str | Path | None = None,
    sequences: dict[str, ObservationSequence] | None = None,
) -> EvalReport:
    """Run every probe through the trained system and tally the outcome."""
    cfg = system.config
    if sequences is None:
        probe_entries = [e for e in manifest.entries if e.role != "train"]
        sequences = _sequences_for(Manifest(entries=probe_entries), cfg, base_dir) \
            if probe_entries else {}

    tally = {"tp": 0, "fp": 0, "fn": 0, "tn": 0}
    probes: list[ProbeRecord] = []
    rank1_hits = 0
    rank1_total = 0

    for entry in manifest.entries:
        if entry.role == "train":
            continue
        seq = sequences[entry.path]
        predicted, scores, ids = system.probe_scores(seq)
        if entry.role == "probe_pos":
            rank1_total += 1
            if predicted == entry.class_id:
                rank1_hits += 1
            best = float(scores.min())
            outcome = decide_positive(predicted, entry.class_id, best, system.tau)
        else:
            best = float(scores.min())
            outcome = decide_negative(best, system.tau)
        tally[outcome] += 1
        probes.append(ProbeRecord(
            path=entry.path,
            subject=entry.subject,
            role=entry.role,
            claimed_class=entry.class_id,
            predicted_class=predicted,
            best_score=best,
            accepted=outcome in ("tp", "fp"),
            outcome=outcome,
        ))

    counts = ConfusionCounts(**tally)
    return EvalReport(
        counts=counts,
        metrics=compute_metrics(counts),
        tau=system.tau,
        rank1_accuracy=None if rank1_total == 0 else rank1_hits / rank1_total,
        n_classes=len(manifest.classes()),
        n_train=len(manifest.by_role("train")),
        n_probe_pos=rank1_total,
        n_probe_neg=len(manifest.by_role("probe_neg")),
        config_fingerprint=system.fingerprint,
        scan_mode=cfg.sampling.scan,
        probes=probes,
    )


def run_protocol(
    manifest: Manifest, cfg: RunConfig, base_dir: str | Path | None = None
) -> tuple[TrainedSystem, EvalReport]:
    """Train on the manifest's train rows, evaluate on its probe rows."""
    cfg.validate()
    manifest.validate(base_dir=base_dir)
    sequences = _sequences_for(manifest, cfg, base_dir)
    system = train_system(manifest, cfg, base_dir=base_dir, sequences=sequences)
    report = evaluate_system(system, manifest, base_dir=base_dir, sequences=sequences)
    return system, report
