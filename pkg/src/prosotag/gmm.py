"""Per-leaf diagonal-covariance Gaussian mixtures.

Each tree leaf gets its own mixture, fit by EM on that leaf's embeddings.
Initialization runs a few seeded restarts of greedy k-means++ followed by
ten k-means sweeps each, keeping the restart with the lowest inertia; EM
then runs in log space (log-sum-exp responsibilities) until the relative
gain in total log-likelihood falls below ``rel_tol`` or ``max_iters`` is
hit. Everything downstream of the seed is deterministic.

A component whose responsibility mass collapses below 1e-8 of the sample
count is re-seeded at the sample the mixture currently explains worst, with
the leaf's global variance and a fresh 1/m weight share, so the mixture
always keeps exactly m live components.

Tagging reduces to ``assign_component``: the argmax of per-component log
density plus log weight, ties to the smallest index.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import (
    ConfigError,
    DimensionMismatchError,
    InsufficientDataError,
    ValidationError,
)

__all__ = [
    "GmmComponent",
    "LeafGmm",
    "fit_gmm",
    "posterior_log_scores",
    "assign_component",
]

COLLAPSE_FRACTION = 1e-8
KMEANS_SWEEPS = 10
KMEANS_RESTARTS = 4


@dataclass(frozen=True)
class GmmComponent:
    """One mixture component: weight, mean vector, per-dimension variances."""

    weight: float
    mean: np.ndarray
    variance: np.ndarray

    def __post_init__(self) -> None:
        if not 0.0 < self.weight <= 1.0:
            raise ValidationError(f"component weight must be in (0, 1], got {self.weight}")
        if self.mean.shape != self.variance.shape or self.mean.ndim != 1:
            raise ValidationError(
                f"mean shape {self.mean.shape} and variance shape "
                f"{self.variance.shape} must be equal 1-d shapes"
            )
        if not np.all(np.isfinite(self.mean)) or not np.all(np.isfinite(self.variance)):
            raise ValidationError("component parameters must be finite")
        if np.any(self.variance <= 0.0):
            raise ValidationError("component variances must be positive")


def _frozen(array: np.ndarray) -> np.ndarray:
    out = np.array(array, dtype=np.float64)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class LeafGmm:
    """Fitted mixture for one leaf.

    Parameters are stored as stacked arrays: ``weights`` (m,), ``means`` and
    ``variances`` (m, d). ``n_samples`` records how many embeddings the fit
    saw, which reporting tools read back from saved models.
    """

    leaf: str
    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    n_samples: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "weights", _frozen(self.weights))
        object.__setattr__(self, "means", _frozen(self.means))
        object.__setattr__(self, "variances", _frozen(self.variances))
        if not self.leaf or not self.leaf.isalpha() or not self.leaf.islower():
            raise ValidationError(f"leaf letter must be lowercase alphabetic, got {self.leaf!r}")
        if self.weights.ndim != 1 or self.means.ndim != 2:
            raise ValidationError("weights must be 1-d and means 2-d")
        m = self.weights.shape[0]
        if m < 1 or self.means.shape[0] != m or self.variances.shape != self.means.shape:
            raise ValidationError(
                f"inconsistent mixture shapes: weights {self.weights.shape}, "
                f"means {self.means.shape}, variances {self.variances.shape}"
            )
        if self.means.shape[1] < 1:
            raise ValidationError("mixture dimension must be at least 1")
        for name, arr in (("weights", self.weights), ("means", self.means), ("variances", self.variances)):
            if not np.all(np.isfinite(arr)):
                raise ValidationError(f"mixture {name} must be finite")
        if np.any(self.weights <= 0.0):
            raise ValidationError("mixture weights must be positive")
        if abs(float(self.weights.sum()) - 1.0) > 1e-9:
            raise ValidationError(f"mixture weights sum to {self.weights.sum()!r}, expected 1")
        if np.any(self.variances <= 0.0):
            raise ValidationError("mixture variances must be positive")
        if self.n_samples < 1:
            raise ValidationError(f"n_samples must be at least 1, got {self.n_samples}")

    @property
    def m(self) -> int:
        return self.weights.shape[0]

    @property
    def d(self) -> int:
        return self.means.shape[1]

    @property
    def components(self) -> tuple[GmmComponent, ...]:
        return tuple(
            GmmComponent(weight=float(w), mean=mu, variance=var)
            for w, mu, var in zip(self.weights, self.means, self.variances)
        )


def _log_densities(x: np.ndarray, means: np.ndarray, variances: np.ndarray) -> np.ndarray:
    """Diagonal Gaussian log densities, (n, m) for (n, d) data."""
    # broadcast rather than matmul so repeated fits reduce in an identical order
    diff = x[:, None, :] - means[None, :, :]
    quad = (diff * diff / variances[None, :, :]).sum(axis=2)
    log_norm = np.log(2.0 * np.pi * variances).sum(axis=1)
    return -0.5 * (log_norm[None, :] + quad)


def _kmeans_plus_plus(x: np.ndarray, m: int, rng: np.random.Generator) -> np.ndarray:
    """Greedy k-means++: several D^2-sampled candidates per center, keeping
    the one that lowers the potential most."""
    n = x.shape[0]
    trials = 2 + int(np.log(m))
    centers = np.empty((m, x.shape[1]))
    centers[0] = x[rng.integers(n)]
    closest = ((x - centers[0]) ** 2).sum(axis=1)
    for k in range(1, m):
        total = closest.sum()
        if total > 0.0:
            candidates = rng.choice(n, size=trials, p=closest / total)
        else:
            candidates = rng.integers(n, size=trials)
        best: tuple[float, int, np.ndarray] | None = None
        for idx in candidates:
            trimmed = np.minimum(closest, ((x - x[idx]) ** 2).sum(axis=1))
            potential = float(trimmed.sum())
            if best is None or potential < best[0]:
                best = (potential, int(idx), trimmed)
        centers[k] = x[best[1]]
        closest = best[2]
    return centers


def _kmeans_assign(x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    diff = x[:, None, :] - centers[None, :, :]
    return np.argmin((diff * diff).sum(axis=2), axis=1)


def _run_kmeans(
    x: np.ndarray, m: int, rng: np.random.Generator
) -> tuple[np.ndarray, float]:
    centers = _kmeans_plus_plus(x, m, rng)
    for _ in range(KMEANS_SWEEPS):
        labels = _kmeans_assign(x, centers)
        for k in range(m):
            member = labels == k
            if member.any():
                centers[k] = x[member].mean(axis=0)
            # an emptied cluster keeps its previous center
    diff = x[:, None, :] - centers[None, :, :]
    inertia = float((diff * diff).sum(axis=2).min(axis=1).sum())
    return centers, inertia


def _initial_parameters(
    x: np.ndarray, m: int, seed: int, floor: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    centers, best_inertia = _run_kmeans(x, m, rng)
    for _ in range(KMEANS_RESTARTS - 1):
        other, inertia = _run_kmeans(x, m, rng)
        # strict < keeps the earliest restart on ties, for determinism
        if inertia < best_inertia:
            centers, best_inertia = other, inertia
    labels = _kmeans_assign(x, centers)
    global_var = np.maximum(x.var(axis=0), floor)
    variances = np.empty_like(centers)
    for k in range(m):
        member = labels == k
        if member.any():
            variances[k] = np.maximum(x[member].var(axis=0), floor)
        else:
            variances[k] = global_var
    weights = np.full(m, 1.0 / m)
    return weights, centers, variances


def fit_gmm(
    samples: Sequence[np.ndarray] | np.ndarray,
    m: int,
    seed: int,
    *,
    leaf: str = "a",
    max_iters: int = 200,
    rel_tol: float = 1e-6,
    floor: float = 1e-6,
) -> tuple[LeafGmm, list[float]]:
    """Fit an m-component diagonal GMM by EM; deterministic given the seed.

    Returns the fitted mixture and the total log-likelihood trace. The first
    trace entry evaluates the k-means initialization and the last evaluates
    the returned parameters, so the trace is non-decreasing end to end.
    """
    if m < 1:
        raise ConfigError(f"component count must be at least 1, got {m}")
    if max_iters < 1:
        raise ConfigError(f"max_iters must be at least 1, got {max_iters}")
    if rel_tol < 0.0:
        raise ConfigError(f"rel_tol must be non-negative, got {rel_tol}")
    if floor <= 0.0:
        raise ConfigError(f"variance floor must be positive, got {floor}")
    if seed < 0:
        raise ConfigError(f"seed must be non-negative, got {seed}")
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] == 0:
        raise ValidationError(f"samples must form a 2-d array with at least one feature, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValidationError("samples must be finite")
    n = x.shape[0]
    if n < m:
        raise InsufficientDataError(f"cannot fit {m} components to {n} samples")

    weights, means, variances = _initial_parameters(x, m, seed, floor)
    global_var = np.maximum(x.var(axis=0), floor)
    trace: list[float] = []
    for _ in range(max_iters):
        joint = _log_densities(x, means, variances) + np.log(weights)[None, :]
        per_sample = logsumexp(joint, axis=1)
        trace.append(float(per_sample.sum()))
        if len(trace) >= 2:
            prev = trace[-2]
            if trace[-1] - prev < rel_tol * max(abs(prev), 1e-12):
                break
        resp = np.exp(joint - per_sample[:, None])
        mass = resp.sum(axis=0)
        collapsed = mass < COLLAPSE_FRACTION * n
        live = ~collapsed
        weights = np.where(live, mass / n, 1.0 / m)
        weights = weights / weights.sum()
        safe_mass = np.where(live, mass, 1.0)
        means = np.where(
            live[:, None], resp.T @ x / safe_mass[:, None], means
        )
        second = resp.T @ (x * x) / safe_mass[:, None]
        variances = np.where(
            live[:, None],
            np.maximum(second - means * means, floor),
            variances,
        )
        if collapsed.any():
            # worst-explained samples first; distinct seeds if several collapse at once
            worst = np.argsort(per_sample, kind="stable")
            for rank, k in enumerate(np.flatnonzero(collapsed)):
                means[k] = x[worst[rank % n]]
                variances[k] = global_var
    else:
        joint = _log_densities(x, means, variances) + np.log(weights)[None, :]
        trace.append(float(logsumexp(joint, axis=1).sum()))

    gmm = LeafGmm(
        leaf=leaf, weights=weights, means=means, variances=variances, n_samples=n
    )
    return gmm, trace


def posterior_log_scores(e: np.ndarray, gmm: LeafGmm) -> np.ndarray:
    """Unnormalized log posteriors: log density plus log weight, per component."""
    e = np.asarray(e, dtype=np.float64)
    if e.ndim != 1 or e.shape[0] != gmm.d:
        raise DimensionMismatchError(
            f"embedding shape {e.shape} does not match mixture dimension {gmm.d}"
        )
    return _log_densities(e[None, :], gmm.means, gmm.variances)[0] + np.log(gmm.weights)


def assign_component(e: np.ndarray, gmm: LeafGmm) -> int:
    """Index of the maximum-posterior component; ties go to the smallest index."""
    return int(np.argmax(posterior_log_scores(e, gmm)))
