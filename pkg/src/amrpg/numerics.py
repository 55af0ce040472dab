"""Dense-array numerics shared by the whole package.

Matrices are plain 2-D float64 numpy arrays in C (row-major) order. This
module holds the row-structured norms that drive memory reduction, the Adam
optimizer, and the seeded sampling helpers used by rollout workers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

Array = np.ndarray

# Rows whose l2 norm is at or below this guard are treated as exact zero rows
# by the l2,1 subgradient, so dimensions that were driven to zero stay zero.
ZERO_ROW_GUARD = 1e-12


def _as_matrix(a) -> Array:
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {m.shape}")
    return m


def matrix_zero_norm(a) -> int:
    """Number of rows with at least one exactly nonzero entry."""
    m = _as_matrix(a)
    return int(np.count_nonzero(np.abs(m).max(axis=1) > 0.0))


def matrix_zero_norm_tol(a, tau: float) -> int:
    """Number of rows whose l2 norm exceeds ``tau``."""
    m = _as_matrix(a)
    return int(np.count_nonzero(np.linalg.norm(m, axis=1) > tau))


def l21_norm(a) -> float:
    """Sum of row-wise l2 norms. For a single-column matrix this is the l1 norm."""
    m = _as_matrix(a)
    return float(np.linalg.norm(m, axis=1).sum())


def l21_subgradient(a, guard: float = ZERO_ROW_GUARD) -> Array:
    """Row-normalized subgradient of :func:`l21_norm`.

    Rows with norm at most ``guard`` get the zero subgradient (the
    minimum-norm element of the subdifferential), so rows that were already
    pushed to zero receive no further updates. Every entry of the result has
    absolute value <= 1.
    """
    m = _as_matrix(a)
    norms = np.linalg.norm(m, axis=1, keepdims=True)
    scale = np.where(norms > guard, 1.0 / np.maximum(norms, guard), 0.0)
    return m * scale


@dataclass
class AdamState:
    """Adam moment estimates for a fixed list of parameter arrays.

    Moments are allocated lazily on the first :func:`adam_step` call and then
    keep the shapes of the parameters they track. ``step_count`` increments by
    exactly one per update.
    """

    learning_rate: float
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step_count: int = 0
    first_moment: list[Array] = field(default_factory=list)
    second_moment: list[Array] = field(default_factory=list)


def adam_step(state: AdamState, params: list[Array], grads: list[Array]) -> list[Array]:
    """One Adam update with bias correction. Parameters are updated in place.

    On the very first step each entry moves by at most ``learning_rate`` (up
    to the epsilon slack in the denominator).
    """
    if len(params) != len(grads):
        raise ValueError(f"{len(params)} params but {len(grads)} grads")
    for p, g in zip(params, grads):
        if p.shape != g.shape:
            raise ValueError(f"param shape {p.shape} does not match grad shape {g.shape}")
    if not state.first_moment:
        state.first_moment = [np.zeros_like(p) for p in params]
        state.second_moment = [np.zeros_like(p) for p in params]
    for m, p in zip(state.first_moment, params):
        if m.shape != p.shape:
            raise ValueError(f"moment shape {m.shape} does not match param shape {p.shape}")

    state.step_count += 1
    t = state.step_count
    b1, b2 = state.beta1, state.beta2
    for p, g, m, v in zip(params, grads, state.first_moment, state.second_moment):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * np.square(g)
        m_hat = m / (1.0 - b1**t)
        v_hat = v / (1.0 - b2**t)
        p -= state.learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon)
    return params


class Rng:
    """Counter-based Philox stream keyed by an integer seed.

    The same seed yields the same sample sequence on every platform (for a
    fixed numpy version); no system entropy is ever consulted. Rollout
    workers get independent streams via ``derive(worker_index)``, which keys
    a fresh stream with ``seed + worker_index``.
    """

    def __init__(self, seed: int):
        self.seed = int(seed)
        self.generator = np.random.Generator(np.random.Philox(self.seed))

    def derive(self, offset: int) -> "Rng":
        return Rng(self.seed + int(offset))

    def random(self) -> float:
        return float(self.generator.random())

    def normal(self) -> float:
        return float(self.generator.standard_normal())

    def uniform(self, low: float, high: float, size=None):
        out = self.generator.uniform(low, high, size=size)
        return float(out) if size is None else out

    def integers(self, low: int, high: int) -> int:
        return int(self.generator.integers(low, high))

    def __repr__(self) -> str:  # pragma: no cover
        return f"Rng(seed={self.seed})"


def sample_gaussian(rng: Rng, mean: float, std: float) -> float:
    """Draw mean + std * z with z standard normal."""
    if std <= 0.0:
        raise ValueError(f"std must be positive, got {std}")
    return float(mean + std * rng.normal())


def log_prob_gaussian(x: float, mean: float, std: float) -> float:
    """Exact univariate Gaussian log-density."""
    if std <= 0.0:
        raise ValueError(f"std must be positive, got {std}")
    z = (x - mean) / std
    return -0.5 * z * z - math.log(std) - 0.5 * math.log(2.0 * math.pi)


def _check_simplex(probs) -> Array:
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 1:
        raise ValueError(f"probs must be a vector, got shape {p.shape}")
    if np.any(p < 0.0):
        raise ValueError("probs entries must be non-negative")
    total = float(p.sum())
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"probs must sum to 1 within 1e-9, got {total}")
    return p


def sample_categorical(rng: Rng, probs) -> int:
    """Draw index i with probability probs[i] via one uniform variate."""
    p = _check_simplex(probs)
    u = rng.random()
    idx = int(np.searchsorted(np.cumsum(p), u, side="right"))
    return min(idx, len(p) - 1)


def log_prob_categorical(probs, index: int) -> float:
    p = _check_simplex(probs)
    if not 0 <= index < len(p):
        raise ValueError(f"index {index} out of range for {len(p)} categories")
    with np.errstate(divide="ignore"):
        return float(np.log(p[index]))
