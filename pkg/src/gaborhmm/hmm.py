"""Cyclic hidden Markov model with scalar Gaussian emissions.

States sit on a ring: from state i the chain may stay at i or advance to
(i + 1) mod N, nothing else. Training is Baum-Welch in log space; decoding
is Viterbi with deterministic tie-breaking toward the lower state index.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import NumericError

_LOG_2PI = math.log(2.0 * math.pi)
_ABS_VAR_FLOOR = 1e-12


@dataclass
class CyclicHMM:
    """Model parameters: transitions, per-state Gaussian emissions, start."""

    trans: np.ndarray
    emit_mean: np.ndarray
    emit_var: np.ndarray
    init: np.ndarray

    def __post_init__(self) -> None:
        self.trans = np.asarray(self.trans, dtype=np.float64)
        self.emit_mean = np.asarray(self.emit_mean, dtype=np.float64)
        self.emit_var = np.asarray(self.emit_var, dtype=np.float64)
        self.init = np.asarray(self.init, dtype=np.float64)

    @property
    def n_states(self) -> int:
        return int(self.trans.shape[0])

    def validate(self) -> None:
        n = self.n_states
        if self.trans.shape != (n, n):
            raise ValueError(f"transition matrix must be square, got {self.trans.shape}")
        for name, arr in (("emit_mean", self.emit_mean),
                          ("emit_var", self.emit_var),
                          ("init", self.init)):
            if arr.shape != (n,):
                raise ValueError(f"{name} must have shape ({n},), got {arr.shape}")
        if not np.isfinite(self.trans).all() or (self.trans < 0).any():
            raise ValueError("transition probabilities must be finite and nonnegative")
        if np.abs(self.trans.sum(axis=1) - 1.0).max() > 1e-9:
            raise ValueError("transition rows must sum to 1 within 1e-9")
        if self.trans[~cyclic_mask(n)].any():
            raise ValueError("transitions outside the cycle mask must be exactly 0")
        if (self.emit_var <= 0).any() or not np.isfinite(self.emit_var).all():
            raise ValueError("emission variances must be positive and finite")
        if not np.isfinite(self.emit_mean).all():
            raise ValueError("emission means must be finite")
        if (self.init < 0).any() or abs(self.init.sum() - 1.0) > 1e-9:
            raise ValueError("initial distribution must be nonnegative and sum to 1")


@dataclass
class PathVector:
    """Viterbi decode: one state per observation."""

    states: np.ndarray
    log_prob: float = float("nan")

    def __post_init__(self) -> None:
        self.states = np.asarray(self.states, dtype=np.int64)
        if self.states.ndim != 1:
            raise ValueError(f"path must be 1-d, got shape {self.states.shape}")

    def __len__(self) -> int:
        return int(self.states.shape[0])


@dataclass
class TrainResult:
    """Baum-Welch outcome with the per-iteration total log-likelihood."""

    model: CyclicHMM
    log_likelihoods: np.ndarray
    iterations: int
    converged: bool


def cyclic_mask(n_states: int) -> np.ndarray:
    """Boolean matrix of allowed transitions: stay, or advance one step."""
    if n_states < 1:
        raise ValueError(f"n_states must be >= 1, got {n_states}")
    idx = np.arange(n_states)
    mask = np.zeros((n_states, n_states), dtype=bool)
    mask[idx, idx] = True
    mask[idx, (idx + 1) % n_states] = True
    return mask


def _as_sequence_arrays(sequences) -> list[np.ndarray]:
    arrays = []
    for seq in sequences:
        values = getattr(seq, "values", seq)
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("each sequence must be a non-empty 1-d array")
        if not np.isfinite(arr).all():
            raise NumericError("sequence contains non-finite observations")
        arrays.append(arr)
    if not arrays:
        raise ValueError("at least one sequence is required")
    return arrays


def _variance_floor(all_obs: np.ndarray, scale: float) -> float:
    spread = float(all_obs.var())
    return max(scale * spread, _ABS_VAR_FLOOR)


def init_model(
    n_states: int, sequences, var_floor_scale: float = 1e-6
) -> CyclicHMM:
    """Segment-based starting point for training.

    Each sequence is split into n_states contiguous chunks; chunk i across
    all sequences seeds the mean and variance of state i. Transitions start
    uniform over the two allowed moves, the chain starts in state 0.
    """
    arrays = _as_sequence_arrays(sequences)
    for arr in arrays:
        if arr.size < n_states:
            raise ValueError(
                f"sequence of length {arr.size} shorter than n_states {n_states}"
            )
    floor = _variance_floor(np.concatenate(arrays), var_floor_scale)

    chunks: list[list[np.ndarray]] = [[] for _ in range(n_states)]
    for arr in arrays:
        for i, chunk in enumerate(np.array_split(arr, n_states)):
            chunks[i].append(chunk)
    means = np.empty(n_states)
    variances = np.empty(n_states)
    for i in range(n_states):
        pooled = np.concatenate(chunks[i])
        means[i] = pooled.mean()
        variances[i] = max(float(pooled.var()), floor)

    mask = cyclic_mask(n_states)
    trans = mask / mask.sum(axis=1, keepdims=True)
    init = np.zeros(n_states)
    init[0] = 1.0
    return CyclicHMM(trans=trans, emit_mean=means, emit_var=variances, init=init)


def _log_emissions(hmm: CyclicHMM, obs: np.ndarray) -> np.ndarray:
    """log N(obs | state) for every (.., t, state) pair."""
    diff = obs[..., np.newaxis] - hmm.emit_mean
    return -0.5 * (_LOG_2PI + np.log(hmm.emit_var) + diff * diff / hmm.emit_var)


def _log_params(hmm: CyclicHMM) -> tuple[np.ndarray, np.ndarray]:
    with np.errstate(divide="ignore"):
        return np.log(hmm.trans), np.log(hmm.init)


def forward_log_likelihood(hmm: CyclicHMM, seq) -> float:
    """Total log probability of the sequence under the model."""
    arr = _as_sequence_arrays([seq])[0]
    log_a, log_pi = _log_params(hmm)
    log_b = _log_emissions(hmm, arr)
    alpha = log_pi + log_b[0]
    for t in range(1, arr.size):
        alpha = logsumexp(alpha[:, np.newaxis] + log_a, axis=0) + log_b[t]
    ll = float(logsumexp(alpha))
    if math.isnan(ll):
        raise NumericError("forward pass produced NaN log-likelihood")
    return ll


def viterbi(hmm: CyclicHMM, seq) -> PathVector:
    """Most likely state path; ties resolve to the lower state index."""
    arr = _as_sequence_arrays([seq])[0]
    log_a, log_pi = _log_params(hmm)
    log_b = _log_emissions(hmm, arr)
    n = hmm.n_states
    delta = log_pi + log_b[0]
    back = np.empty((arr.size, n), dtype=np.int64)
    for t in range(1, arr.size):
        cand = delta[:, np.newaxis] + log_a
        back[t] = cand.argmax(axis=0)
        delta = cand[back[t], np.arange(n)] + log_b[t]
    states = np.empty(arr.size, dtype=np.int64)
    states[-1] = int(delta.argmax())
    for t in range(arr.size - 1, 0, -1):
        states[t - 1] = back[t, states[t]]
    log_prob = float(delta[states[-1]])
    if math.isnan(log_prob):
        raise NumericError("viterbi produced NaN path score")
    return PathVector(states=states, log_prob=log_prob)


def _forward_backward_batch(
    hmm: CyclicHMM, batch: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Log alpha, log beta, per-sequence log-likelihood, log emissions.

    batch has shape (S, T): S sequences of one shared length.
    """
    s_count, t_len = batch.shape
    n = hmm.n_states
    log_a, log_pi = _log_params(hmm)
    log_b = _log_emissions(hmm, batch)  # (S, T, N)

    alpha = np.empty((s_count, t_len, n))
    alpha[:, 0] = log_pi + log_b[:, 0]
    for t in range(1, t_len):
        alpha[:, t] = (
            logsumexp(alpha[:, t - 1, :, np.newaxis] + log_a, axis=1) + log_b[:, t]
        )
    beta = np.zeros((s_count, t_len, n))
    for t in range(t_len - 2, -1, -1):
        beta[:, t] = logsumexp(
            log_a + (log_b[:, t + 1] + beta[:, t + 1])[:, np.newaxis, :], axis=2
        )
    ll = logsumexp(alpha[:, -1], axis=1)
    if not np.isfinite(ll).all():
        raise NumericError("forward pass produced non-finite log-likelihood")
    return alpha, beta, ll, log_b


def baum_welch(
    hmm: CyclicHMM,
    sequences,
    max_iters: int = 50,
    tol: float = 1e-4,
    var_floor_scale: float = 1e-6,
) -> TrainResult:
    """Expectation-maximization fit keeping the cycle structure.

    Masked transitions stay exactly zero and rows stay stochastic at every
    iteration. Emission variances never drop below var_floor_scale times
    the variance of all observations pooled. A state that loses all
    posterior mass is re-seeded to the global mean and variance with a
    RuntimeWarning, so runs remain deterministic.
    """
    arrays = _as_sequence_arrays(sequences)
    all_obs = np.concatenate(arrays)
    floor = _variance_floor(all_obs, var_floor_scale)
    global_mean = float(all_obs.mean())
    global_var = max(float(all_obs.var()), floor)
    n = hmm.n_states
    mask = cyclic_mask(n)

    by_len: dict[int, list[np.ndarray]] = {}
    for arr in arrays:
        by_len.setdefault(arr.size, []).append(arr)
    batches = [np.stack(group) for _, group in sorted(by_len.items())]

    model = CyclicHMM(
        trans=hmm.trans.copy(),
        emit_mean=hmm.emit_mean.copy(),
        emit_var=hmm.emit_var.copy(),
        init=hmm.init.copy(),
    )
    history: list[float] = []
    converged = False
    iterations = 0

    for _ in range(max_iters):
        trans_num = np.zeros((n, n))
        init_num = np.zeros(n)
        occ = np.zeros(n)
        occ_x = np.zeros(n)
        occ_xx = np.zeros(n)
        total_ll = 0.0

        log_a, _ = _log_params(model)
        for batch in batches:
            alpha, beta, ll, log_b = _forward_backward_batch(model, batch)
            total_ll += float(ll.sum())
            gamma = np.exp(alpha + beta - ll[:, np.newaxis, np.newaxis])
            init_num += gamma[:, 0].sum(axis=0)
            occ += gamma.sum(axis=(0, 1))
            occ_x += (gamma * batch[:, :, np.newaxis]).sum(axis=(0, 1))
            occ_xx += (gamma * (batch**2)[:, :, np.newaxis]).sum(axis=(0, 1))
            for t in range(batch.shape[1] - 1):
                log_xi = (
                    alpha[:, t, :, np.newaxis]
                    + log_a
                    + (log_b[:, t + 1] + beta[:, t + 1])[:, np.newaxis, :]
                    - ll[:, np.newaxis, np.newaxis]
                )
                trans_num += np.exp(log_xi).sum(axis=0)

        history.append(total_ll)
        iterations += 1
        if len(history) > 1 and abs(history[-1] - history[-2]) <= tol:
            converged = True
            break

        row = trans_num.sum(axis=1)
        new_trans = model.trans.copy()
        live_rows = row > 0
        new_trans[live_rows] = trans_num[live_rows] / row[live_rows, np.newaxis]
        new_trans[~mask] = 0.0

        new_mean = model.emit_mean.copy()
        new_var = model.emit_var.copy()
        dead = occ <= 0.0
        alive = ~dead
        new_mean[alive] = occ_x[alive] / occ[alive]
        new_var[alive] = occ_xx[alive] / occ[alive] - new_mean[alive] ** 2
        if dead.any():
            warnings.warn(
                f"re-seeding {int(dead.sum())} state(s) with no posterior mass",
                RuntimeWarning,
                stacklevel=2,
            )
            new_mean[dead] = global_mean
            new_var[dead] = global_var
        new_var = np.maximum(new_var, floor)

        new_init = init_num / init_num.sum()

        model = CyclicHMM(
            trans=new_trans, emit_mean=new_mean, emit_var=new_var, init=new_init
        )

    return TrainResult(
        model=model,
        log_likelihoods=np.asarray(history),
        iterations=iterations,
        converged=converged,
    )
