"""Angular nets on the sphere and the nearest-direction approximation bound.

An angular delta-net is a family of unit vectors such that every
direction is within angle delta of the family or its negation.  Snapping
each weight column of a network to its nearest net direction (preserving
the norm) costs at most ``k M sqrt(2 d (1 - cos delta))`` in expected
absolute output error.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import CoverageNotReached, DimensionMismatch, DomainError, \
    ParameterOutOfRange
from .lines import canonicalize_vector, load_vectors_csv, save_vectors_csv


@dataclass(frozen=True, eq=False)
class AngularNet:
    """Unit vectors on a hemisphere with implicit sign closure.

    Coverage means: every unit vector is within angle ``delta`` of some
    net vector or its negation.  The property is certified empirically by
    ``coverage_gap`` rather than proved.
    """

    dim: int
    delta: float
    vectors: np.ndarray

    @property
    def size(self) -> int:
        return self.vectors.shape[1]

    def save(self, path) -> None:
        save_vectors_csv(path, self.vectors)


def load_angular_net(path, delta: float) -> AngularNet:
    vectors = load_vectors_csv(path)
    return AngularNet(dim=vectors.shape[0], delta=float(delta), vectors=vectors)


def net_size_bound(n: int, delta: float) -> float:
    """Size of an angular delta-net guaranteed to exist in n dimensions:
    ``(1/2) (1 + sqrt(2)/sqrt(1 - cos delta))^n``."""
    if n < 1:
        raise ParameterOutOfRange("need n >= 1")
    if not 0.0 < delta <= np.pi / 2:
        raise DomainError("delta must lie in (0, pi/2]")
    return 0.5 * (1.0 + math.sqrt(2.0) / math.sqrt(1.0 - math.cos(delta))) ** n


def sparse_net_size(d: int, s: int, delta: float, k: int | None = None) -> float:
    """Net size bound for s-sparse weight vectors in d dimensions.

    Counts one net per support: ``(1/2) C(d, s)`` supports in general, or
    ``k/2`` when the sparsity patterns of the ``k`` neurons are known.
    """
    if not 1 <= s <= d:
        raise DomainError("need 1 <= s <= d")
    per_support = (1.0 + math.sqrt(2.0) / math.sqrt(1.0 - math.cos(delta))) ** s
    if not 0.0 < delta <= np.pi / 2:
        raise DomainError("delta must lie in (0, pi/2]")
    if k is None:
        return 0.5 * math.comb(d, s) * per_support
    if k < 1:
        raise ParameterOutOfRange("need k >= 1")
    return 0.5 * k * per_support


def _angles_to_net(vectors: np.ndarray, probes: np.ndarray) -> np.ndarray:
    """Per probe, the smallest angle to the net or its negation."""
    cosines = np.clip(np.abs(vectors.T @ probes), 0.0, 1.0)
    return np.arccos(cosines.max(axis=0))


def greedy_angular_net(
    d: int,
    delta: float,
    seed=0,
    max_probes: int = 10_000,
    probe_budget: int = 2_000_000,
    max_dim: int = 6,
    margin: float = 0.9,
) -> AngularNet:
    """Construct an angular delta-net greedily from random probes.

    Uniform hemisphere probes are added whenever they sit farther than
    ``margin * delta`` (modulo sign) from the current net; construction
    stops once ``max_probes`` consecutive probes were already covered.
    The margin leaves headroom so the probabilistic stopping rule
    certifies coverage at the nominal ``delta``: a streak of S covered
    probes only bounds the uncovered mass by about 3/S, and an uncovered
    pocket of that mass can reach ~sqrt(6/S) radians past the
    construction radius.  Intended for small dimensions (coverage checks
    blow up beyond ``max_dim``).
    """
    if d < 1:
        raise ParameterOutOfRange("need d >= 1")
    if d > max_dim:
        raise ParameterOutOfRange(
            "greedy construction is desk-scale only (d <= %d)" % max_dim
        )
    if not 0.0 < delta <= np.pi / 2:
        raise DomainError("delta must lie in (0, pi/2]")
    if not 0.0 < margin <= 1.0:
        raise ParameterOutOfRange("margin must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    threshold = math.cos(margin * delta)
    vectors: list[np.ndarray] = []
    stacked = None
    covered_streak = 0
    for _ in range(probe_budget):
        probe = rng.standard_normal(d)
        if np.linalg.norm(probe) == 0.0:  # pragma: no cover - probability zero
            continue
        unit, _ = canonicalize_vector(probe)
        if stacked is None or float(np.max(np.abs(stacked.T @ unit))) < threshold:
            vectors.append(unit)
            stacked = np.column_stack(vectors)
            covered_streak = 0
        else:
            covered_streak += 1
            if covered_streak >= max_probes:
                return AngularNet(dim=d, delta=float(delta), vectors=stacked)
    raise CoverageNotReached(
        "no %d consecutive covered probes within a budget of %d"
        % (max_probes, probe_budget)
    )


def coverage_gap(net: AngularNet, n_probes: int = 100_000, seed=0) -> float:
    """Largest angle from a fresh uniform probe to the net (modulo sign)."""
    rng = np.random.default_rng(seed)
    probes = rng.standard_normal((net.dim, n_probes))
    probes /= np.linalg.norm(probes, axis=0, keepdims=True)
    return float(_angles_to_net(net.vectors, probes).max())


def nearest_net_approx(w_star, net: AngularNet):
    """Snap every column to its nearest net direction, preserving norms.

    Returns ``(w_tilde, max_angle)``.  Each column is replaced by the
    closest vector of the net or its negation, rescaled to the original
    norm, so ``|w - w_tilde|^2 = 2 |w|^2 (1 - cos angle)`` per column.
    Zero columns stay zero.
    """
    W = np.asarray(w_star, dtype=float)
    if W.ndim != 2 or W.shape[0] != net.dim:
        raise DimensionMismatch("weights must be d x k with d matching the net")
    if net.size < 1:
        raise ParameterOutOfRange("the net is empty")
    W_tilde = np.zeros_like(W)
    max_angle = 0.0
    for i in range(W.shape[1]):
        col = W[:, i]
        norm = float(np.linalg.norm(col))
        if norm == 0.0:
            continue
        scores = net.vectors.T @ (col / norm)
        j = int(np.argmax(np.abs(scores)))
        direction = net.vectors[:, j] * (1.0 if scores[j] >= 0 else -1.0)
        W_tilde[:, i] = norm * direction
        max_angle = max(max_angle, float(np.arccos(np.clip(abs(scores[j]), 0.0, 1.0))))
    return W_tilde, max_angle


def minimax_risk_bound(k: int, M: float, d: int, delta: float) -> float:
    """``k M sqrt(2 d (1 - cos delta))`` on expected absolute output error."""
    if k < 1 or d < 1 or M <= 0:
        raise ParameterOutOfRange("need k, d >= 1 and M > 0")
    return k * M * math.sqrt(2.0 * d * (1.0 - math.cos(delta)))


class ReluGap(NamedTuple):
    gap: float
    bound: float
    within_bound: bool


def relu_gap(w1, w2, x) -> ReluGap:
    """``|relu(w1'x) - relu(w2'x)|`` and its Lipschitz bound ``|w1-w2||x|``."""
    w1 = np.asarray(w1, dtype=float)
    w2 = np.asarray(w2, dtype=float)
    x = np.asarray(x, dtype=float)
    gap = abs(max(float(w1 @ x), 0.0) - max(float(w2 @ x), 0.0))
    bound = float(np.linalg.norm(w1 - w2) * np.linalg.norm(x))
    return ReluGap(gap=gap, bound=bound, within_bound=gap <= bound + 1e-12)
