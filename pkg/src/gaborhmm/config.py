"""Run configuration: one JSON document drives every stage.

A config fingerprint (sha256 prefix over the canonical JSON form) is
stamped into persisted models, classifiers and reports so artifacts built
under different settings cannot be silently mixed.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .classifier import COVARIANCE_MODES, MEASURES
from .errors import DataError
from .gabor import MAGNITUDE_MODES, GaborParams
from .sampling import SCAN_MODES

FINGERPRINT_LEN = 16


@dataclass
class GaborConfig:
    sigma: float = 2.0 * math.pi
    k_max: float = math.pi / 2.0
    f: float = math.sqrt(2.0)
    n_scales: int = 5
    n_orients: int = 8
    kernel_size: int = 33
    magnitude: str = "l1"
    dc_correct: bool = True

    def to_params(self) -> GaborParams:
        return GaborParams(
            sigma=self.sigma,
            k_max=self.k_max,
            f=self.f,
            n_scales=self.n_scales,
            n_orients=self.n_orients,
        )


@dataclass
class SamplingConfig:
    block_k: int = 16
    overlap_p: int = 12
    strip_h: int = 16
    scan: str = "serpentine"
    fallback_scale: float | None = None


@dataclass
class HmmConfig:
    n_states: int = 7
    max_iters: int = 50
    tol: float = 1e-4
    var_floor_scale: float = 1e-6
    mode: str = "global"


@dataclass
class ClassifyConfig:
    measure: str = "mahalanobis"
    covariance: str = "diagonal"
    var_floor: float = 1e-6
    ridge: float = 1e-6


@dataclass
class EvalConfig:
    tau_percentile: float = 100.0


@dataclass
class RunConfig:
    image_w: int = 92
    image_h: int = 112
    seed: int = 0
    gabor: GaborConfig = field(default_factory=GaborConfig)
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    hmm: HmmConfig = field(default_factory=HmmConfig)
    classify: ClassifyConfig = field(default_factory=ClassifyConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)

    def to_dict(self) -> dict:
        return asdict(self)

    def fingerprint(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("ascii")).hexdigest()[:FINGERPRINT_LEN]

    def validate(self) -> None:
        try:
            self.gabor.to_params()
        except ValueError as exc:
            raise DataError(f"gabor config: {exc}") from exc
        g = self.gabor
        if g.kernel_size < 1 or g.kernel_size % 2 == 0:
            raise DataError(f"gabor.kernel_size must be odd and positive, got {g.kernel_size}")
        if g.magnitude not in MAGNITUDE_MODES:
            raise DataError(f"gabor.magnitude must be one of {MAGNITUDE_MODES}")
        s = self.sampling
        if not 0 <= s.overlap_p < s.block_k:
            raise DataError(
                f"sampling overlap must satisfy 0 <= p < k, got p={s.overlap_p} k={s.block_k}"
            )
        if s.strip_h < s.block_k:
            raise DataError(f"sampling.strip_h {s.strip_h} below block side {s.block_k}")
        if s.scan not in SCAN_MODES:
            raise DataError(f"sampling.scan must be one of {SCAN_MODES}")
        if s.fallback_scale is not None and s.fallback_scale <= 0:
            raise DataError("sampling.fallback_scale must be positive when set")
        if self.image_w < s.block_k or self.image_h < s.strip_h:
            raise DataError(
                f"image {self.image_w}x{self.image_h} too small for the sampling layout"
            )
        h = self.hmm
        if h.n_states < 1:
            raise DataError(f"hmm.n_states must be >= 1, got {h.n_states}")
        if h.max_iters < 1:
            raise DataError(f"hmm.max_iters must be >= 1, got {h.max_iters}")
        if h.tol < 0 or h.var_floor_scale <= 0:
            raise DataError("hmm.tol must be >= 0 and hmm.var_floor_scale > 0")
        if h.mode not in ("global", "per_class"):
            raise DataError(f'hmm.mode must be "global" or "per_class", got {h.mode!r}')
        c = self.classify
        if c.measure not in MEASURES:
            raise DataError(f"classify.measure must be one of {MEASURES}")
        if c.covariance not in COVARIANCE_MODES:
            raise DataError(f"classify.covariance must be one of {COVARIANCE_MODES}")
        if c.var_floor <= 0 or c.ridge <= 0:
            raise DataError("classify.var_floor and classify.ridge must be positive")
        if not 0.0 <= self.eval.tau_percentile <= 100.0:
            raise DataError(
                f"eval.tau_percentile must lie in [0, 100], got {self.eval.tau_percentile}"
            )
        if self.seed < 0:
            raise DataError(f"seed must be nonnegative, got {self.seed}")


_SECTIONS = {
    "gabor": GaborConfig,
    "sampling": SamplingConfig,
    "hmm": HmmConfig,
    "classify": ClassifyConfig,
    "eval": EvalConfig,
}


def _build_section(cls, data: dict, where: str):
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise DataError(f"unknown keys in {where}: {sorted(unknown)}")
    try:
        return cls(**data)
    except TypeError as exc:
        raise DataError(f"bad {where} section: {exc}") from exc


def config_from_dict(data: dict) -> RunConfig:
    """Build a validated RunConfig; unknown keys are rejected."""
    if not isinstance(data, dict):
        raise DataError(f"config root must be an object, got {type(data).__name__}")
    top_known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - top_known
    if unknown:
        raise DataError(f"unknown top-level config keys: {sorted(unknown)}")
    kwargs = {}
    for key, value in data.items():
        if key in _SECTIONS:
            if not isinstance(value, dict):
                raise DataError(f"config section {key!r} must be an object")
            kwargs[key] = _build_section(_SECTIONS[key], value, key)
        else:
            kwargs[key] = value
    try:
        cfg = RunConfig(**kwargs)
    except TypeError as exc:
        raise DataError(f"bad config: {exc}") from exc
    cfg.validate()
    return cfg


def load_config(path: str | Path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read config {p}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"config {p} is not valid JSON: {exc}") from exc
    return config_from_dict(data)


def save_config(cfg: RunConfig, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(cfg.to_dict(), sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
