"""Closed-form population risks and their Monte Carlo oracles.

All risks are for two-layer relu networks ``h(x; W) = sum_i relu(w_i' x)``
with standard Gaussian inputs and squared-error loss against the output
of a second network.  The closed forms decompose into a term driven by
the column sums and a quadratic form in per-line masses through the
entrywise kernel of the line Gram matrices.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._seeds import as_seed_sequence
from .errors import (
    ConfigMismatch,
    DimensionMismatch,
    InfeasibleWeights,
    ParameterOutOfRange,
    ZeroVector,
)
from .kernel import kernel_bundle, psi_apply
from .lines import (
    FEASIBILITY_TOL,
    NeuronLineMap,
    PNNWeights,
    ZERO_TOL,
    decompose_weights,
)

_MC_CHUNK_PAIRS = 1 << 16


@dataclass(frozen=True)
class RiskBreakdown:
    """Population risk split into its column-sum and mass-kernel parts."""

    linear_term: float
    kernel_term: float

    @property
    def total(self) -> float:
        return self.linear_term + self.kernel_term


def _as_matrix(weights) -> np.ndarray:
    if isinstance(weights, PNNWeights):
        return weights.matrix
    matrix = np.asarray(weights, dtype=float)
    if matrix.ndim != 2:
        raise DimensionMismatch("expected a d x k weight matrix")
    return matrix


def network_output(x, weight_matrix):
    """``sum_i relu(w_i' x)`` for a single input or a batch of rows."""
    W = _as_matrix(weight_matrix)
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != W.shape[0]:
        raise DimensionMismatch(
            "input dimension %d does not match weights d=%d"
            % (x.shape[-1], W.shape[0])
        )
    out = np.maximum(x @ W, 0.0).sum(axis=-1)
    return float(out) if x.ndim == 1 else out


def monte_carlo_risk(weights, weights_star, n_samples: int = 2_000_000,
                     seed=0, threads: int = 1):
    """Monte Carlo estimate of ``E[(h(x;W) - h(x;W*))^2]``.

    Uses antithetic pairs ``(x, -x)`` to cut variance; ``n_samples`` is
    rounded up to an even number of samples.  Returns ``(estimate,
    standard_error)`` where the standard error is that of the mean of
    the per-pair averages.  Deterministic given the seed: work is split
    into fixed-size chunks with seeds derived per chunk, and the
    reduction runs in chunk order regardless of ``threads``.
    """
    A = _as_matrix(weights)
    B = _as_matrix(weights_star)
    if A.shape[0] != B.shape[0]:
        raise DimensionMismatch("weight matrices disagree on input dimension")
    if n_samples < 1:
        raise ParameterOutOfRange("need n_samples >= 1")
    d = A.shape[0]
    pairs = (int(n_samples) + 1) // 2
    n_chunks = (pairs + _MC_CHUNK_PAIRS - 1) // _MC_CHUNK_PAIRS
    seeds = as_seed_sequence(seed).spawn(n_chunks)

    def run_chunk(index: int):
        count = min(_MC_CHUNK_PAIRS, pairs - index * _MC_CHUNK_PAIRS)
        rng = np.random.default_rng(seeds[index])
        X = rng.standard_normal((count, d))
        ZA = X @ A
        ZB = X @ B
        forward = np.maximum(ZA, 0.0).sum(axis=1) - np.maximum(ZB, 0.0).sum(axis=1)
        backward = np.maximum(-ZA, 0.0).sum(axis=1) - np.maximum(-ZB, 0.0).sum(axis=1)
        pair_mean = 0.5 * (forward * forward + backward * backward)
        return float(pair_mean.sum()), float((pair_mean * pair_mean).sum())

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run_chunk, range(n_chunks)))
    else:
        results = [run_chunk(i) for i in range(n_chunks)]

    total = sum(r[0] for r in results)
    total_sq = sum(r[1] for r in results)
    mean = total / pairs
    if pairs > 1:
        var = max((total_sq - pairs * mean * mean) / (pairs - 1), 0.0)
    else:
        var = 0.0
    return mean, float(np.sqrt(var / pairs))


def scalar_risk(w, w_star) -> RiskBreakdown:
    """Single-input closed form: quarter squares of the sum gap and the
    absolute-sum gap."""
    w = np.asarray(w, dtype=float).ravel()
    w_star = np.asarray(w_star, dtype=float).ravel()
    linear = 0.25 * float(w.sum() - w_star.sum()) ** 2
    kernel = 0.25 * float(np.abs(w).sum() - np.abs(w_star).sum()) ** 2
    return RiskBreakdown(linear_term=linear, kernel_term=kernel)


def _axis_masses(matrix: np.ndarray, neuron_map: NeuronLineMap) -> np.ndarray:
    d = matrix.shape[0]
    q = np.zeros(d)
    for i, axis in enumerate(neuron_map.assignment):
        col = matrix[:, i]
        off_axis = np.linalg.norm(np.delete(col, axis))
        norm = float(np.linalg.norm(col))
        if off_axis > FEASIBILITY_TOL * max(1.0, norm):
            raise InfeasibleWeights(
                "column %d is not on axis %d (off-axis norm %.3g)"
                % (i, axis, off_axis)
            )
        q[axis] += abs(col[axis])
    return q


def degree_one_risk(W, W_star, neuron_map: NeuronLineMap) -> RiskBreakdown:
    """Closed form when every neuron is wired to a single input.

    The mass quadratic form uses the matrix with unit diagonal and 2/pi
    everywhere else, which is exactly the kernel matrix of the standard
    axes.
    """
    A = _as_matrix(W)
    B = _as_matrix(W_star)
    if A.shape != B.shape:
        raise DimensionMismatch("weight matrices must share a shape")
    d = A.shape[0]
    if neuron_map.num_lines != d:
        raise DimensionMismatch(
            "map covers %d axes but inputs have d=%d" % (neuron_map.num_lines, d)
        )
    q = _axis_masses(A, neuron_map)
    q_star = _axis_masses(B, neuron_map)
    diff = A.sum(axis=1) - B.sum(axis=1)
    C = np.full((d, d), 2.0 / np.pi)
    np.fill_diagonal(C, 1.0)
    dq = q - q_star
    return RiskBreakdown(
        linear_term=0.25 * float(diff @ diff),
        kernel_term=0.25 * float(dq @ C @ dq),
    )


def matched_risk(weights: PNNWeights, weights_star: PNNWeights) -> RiskBreakdown:
    """Closed form when both networks share one line configuration."""
    if not weights.same_config(weights_star):
        raise ConfigMismatch("matched risk needs identical (lines, map) on both sides")
    q, _ = decompose_weights(weights)
    q_star, _ = decompose_weights(weights_star)
    diff = weights.column_sum() - weights_star.column_sum()
    dq = q - q_star
    kernel_matrix = psi_apply(weights.line_set.gram)
    return RiskBreakdown(
        linear_term=0.25 * float(diff @ diff),
        kernel_term=0.25 * float(dq @ kernel_matrix @ dq),
    )


def mismatched_risk(weights: PNNWeights, weights_star: PNNWeights) -> RiskBreakdown:
    """Closed form when the two networks use different line sets."""
    if weights.dim != weights_star.dim:
        raise DimensionMismatch("networks live in different input dimensions")
    q, _ = decompose_weights(weights)
    q_star, _ = decompose_weights(weights_star)
    bundle = kernel_bundle(weights.line_set, weights_star.line_set)
    diff = weights.column_sum() - weights_star.column_sum()
    kernel = (
        0.25 * float(q @ bundle.psi_lines @ q)
        + 0.25 * float(q_star @ bundle.psi_star @ q_star)
        - 0.5 * float(q @ bundle.psi_cross @ q_star)
    )
    return RiskBreakdown(linear_term=0.25 * float(diff @ diff), kernel_term=kernel)


def truncated_covariance(w1, w2, zero_tol: float = ZERO_TOL) -> np.ndarray:
    """``E[1{w1'x > 0, w2'x > 0} x x']`` for standard Gaussian ``x``.

    Depends only on the directions of the two vectors.  The aligned
    (theta -> 0) and opposite (theta -> pi) limits are exact: the formula
    below carries no divided differences, every term is scaled by sin or
    sin^2 of the angle.
    """
    w1 = np.asarray(w1, dtype=float)
    w2 = np.asarray(w2, dtype=float)
    if w1.shape != w2.shape or w1.ndim != 1:
        raise DimensionMismatch("need two vectors of one shared dimension")
    n1 = float(np.linalg.norm(w1))
    n2 = float(np.linalg.norm(w2))
    if n1 <= zero_tol or n2 <= zero_tol:
        raise ZeroVector("truncated covariance needs non-zero vectors")
    u1 = w1 / n1
    u2 = w2 / n2
    c = float(np.clip(u1 @ u2, -1.0, 1.0))
    perp = u2 - c * u1
    s = float(np.linalg.norm(perp))
    theta = float(np.arctan2(s, c))
    cov = ((np.pi - theta) / (2.0 * np.pi)) * np.eye(w1.shape[0])
    if s > 0.0:
        unit_perp = perp / s
        cov += (
            c * s * (np.outer(u1, u1) - np.outer(unit_perp, unit_perp))
            + s * s * (np.outer(u1, unit_perp) + np.outer(unit_perp, u1))
        ) / (2.0 * np.pi)
    return cov


def _pairwise_correlations(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Matrix of ``E[relu(a_i'x) relu(b_j'x)]`` over columns of A and B."""
    na = np.linalg.norm(A, axis=0)
    nb = np.linalg.norm(B, axis=0)
    Ah = np.divide(A, np.where(na > 0, na, 1.0)[None, :])
    Bh = np.divide(B, np.where(nb > 0, nb, 1.0)[None, :])
    G = np.clip(Ah.T @ Bh, -1.0, 1.0)
    theta = np.arccos(G)
    scale = np.outer(na, nb)
    return scale * (np.sin(theta) + (np.pi - theta) * G) / (2.0 * np.pi)


def pairwise_population_risk(weights, weights_star) -> float:
    """``E[(h(x;W) - h(x;W*))^2]`` for arbitrary weight matrices.

    General closed form assembled column pair by column pair; useful as a
    second route that needs no line bookkeeping.  Zero columns contribute
    nothing.
    """
    A = _as_matrix(weights)
    B = _as_matrix(weights_star)
    if A.shape[0] != B.shape[0]:
        raise DimensionMismatch("weight matrices disagree on input dimension")
    value = (
        _pairwise_correlations(A, A).sum()
        + _pairwise_correlations(B, B).sum()
        - 2.0 * _pairwise_correlations(A, B).sum()
    )
    return float(value)
