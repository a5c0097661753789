"""Region classification, optimality certificates, and analytic gradients.

Weight space splits into orthant-like regions indexed by the orientation
signs of the neurons on each line.  Which regions can hold bad local
optima is decided by sign patterns alone; this module classifies regions,
certifies global optima, evaluates exact gradients of the population
risk, and prices the stationary points inside bad regions.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import (
    ConfigMismatch,
    DimensionMismatch,
    ParameterOutOfRange,
    SingularKernel,
    SingularProjector,
    ZeroColumn,
)
from .kernel import (
    KernelBundle,
    PINV_CUTOFF,
    min_eigenvalue,
    psi_apply,
    symmetric_pseudo_inverse,
)
from .lines import LineSet, PNNWeights, RegionSignature, ZERO_TOL, decompose_weights
from .risk import truncated_covariance

ONLY_GLOBAL = "OnlyGlobal"
ONLY_BAD_LOCAL = "OnlyBadLocal"
NO_OPTIMA = "NoOptima"
MAY_HAVE_BAD_LOCAL = "MayHaveBadLocal"
GOOD_REGION = "GoodRegion"

PD_TOL = 1e-10


@dataclass(frozen=True)
class RegionClassification:
    """A region label plus, when relevant, the offending line indices."""

    label: str
    witness: tuple | None = None


def _sign_pattern(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float).ravel()
    return np.where(arr >= 0, 1, -1).astype(int)


def scalar_region_classify(signs, w_star) -> RegionClassification:
    """Classify a single-input region by its sign vector.

    With mixed target signs, mixed regions hold only global optima while
    the two constant-sign regions hold only bad local optima.  With a
    constant-sign target, the matching constant region holds the global
    optima and every other region holds no optimizer at all.
    """
    s = _sign_pattern(signs)
    if s.size < 1:
        raise ParameterOutOfRange("need at least one neuron")
    s_star = _sign_pattern(w_star)
    s_constant = bool(np.all(s == s[0]))
    star_constant = bool(np.all(s_star == s_star[0]))
    if not star_constant:
        if s_constant:
            return RegionClassification(label=ONLY_BAD_LOCAL, witness=(0,))
        return RegionClassification(label=ONLY_GLOBAL)
    if s_constant and s[0] == s_star[0]:
        return RegionClassification(label=ONLY_GLOBAL)
    return RegionClassification(label=NO_OPTIMA)


def scalar_hessian(signs):
    """Hessian of the single-input risk on the region with these signs.

    Returns ``(H, rank)`` with ``H = (ones + s s') / 2``; the rank is 1 on
    the two constant-sign regions and 2 everywhere else.
    """
    s = _sign_pattern(signs).astype(float)
    H = 0.5 * np.ones((s.size, s.size)) + 0.5 * np.outer(s, s)
    return H, int(np.linalg.matrix_rank(H))


@dataclass(frozen=True)
class GlobalOptimumCheck:
    """Residuals of the two global-optimality equations.

    When the line kernel matrix is positive definite the two residuals
    vanish exactly at global optima and nowhere else; otherwise the check
    is only sufficient, which ``kernel_pd`` records.
    """

    is_global: bool
    sum_residual: float
    mass_residual: float
    kernel_pd: bool
    kernel_min_eigenvalue: float


def global_optimum_check(
    weights: PNNWeights,
    weights_star: PNNWeights,
    tol: float = 1e-9,
    pd_tol: float = PD_TOL,
) -> GlobalOptimumCheck:
    """Test ``sum_i w_i = sum_i w*_i`` and equal per-line masses."""
    if not weights.same_config(weights_star):
        raise ConfigMismatch("both networks must share the line configuration")
    q, _ = decompose_weights(weights)
    q_star, _ = decompose_weights(weights_star)
    sum_residual = float(np.linalg.norm(weights.column_sum() - weights_star.column_sum()))
    mass_residual = float(np.linalg.norm(q - q_star))
    lam = min_eigenvalue(psi_apply(weights.line_set.gram))
    return GlobalOptimumCheck(
        is_global=(sum_residual <= tol and mass_residual <= tol),
        sum_residual=sum_residual,
        mass_residual=mass_residual,
        kernel_pd=lam > pd_tol,
        kernel_min_eigenvalue=lam,
    )


def region_condition(signature: RegionSignature, d: int) -> bool:
    """True iff at least ``d`` lines carry both orientations."""
    return signature.mixed_line_count >= d


def classify_region(signature: RegionSignature, d: int) -> RegionClassification:
    """Good region (no bad local optima) or not, with the non-mixed lines."""
    if region_condition(signature, d):
        return RegionClassification(label=GOOD_REGION)
    witness = tuple(l for l, m in enumerate(signature.mixed) if not m)
    return RegionClassification(label=MAY_HAVE_BAD_LOCAL, witness=witness)


def good_region_probability(r: int, d: int, neurons_per_line: int) -> float:
    """Probability that uniformly random signs give a good region.

    With ``t`` neurons per line each line is single-orientation with
    probability ``2^(1-t)``; the region is good when at most ``r - d``
    lines are single-orientation, a binomial tail.
    """
    if r < 1 or d < 1 or neurons_per_line < 1:
        raise ParameterOutOfRange("need r, d, neurons_per_line >= 1")
    p = 2.0 ** (1 - neurons_per_line)
    tail = 0.0
    for i in range(min(d, r + 1)):
        tail += comb(r, i) * (1.0 - p) ** i * p ** (r - i)
    return 1.0 - tail


def analytic_gradient(weights: PNNWeights, weights_star: PNNWeights):
    """Exact gradient of the population risk at ``weights``.

    Assembled from truncated covariance blocks:
    ``g_j = 2 sum_i Cov(w_j, w_i) w_i - 2 sum_i Cov(w_j, w*_i) w*_i``.
    Returns ``(gradient, projected)`` where ``projected[j]`` is the
    directional derivative along neuron ``j``'s line.  Requires every
    column of ``weights`` to be non-zero (the risk is not differentiable
    at zero columns).
    """
    if weights.dim != weights_star.dim:
        raise DimensionMismatch("networks live in different input dimensions")
    W = weights.matrix
    W_star = weights_star.matrix
    norms = np.linalg.norm(W, axis=0)
    if np.any(norms <= ZERO_TOL):
        raise ZeroColumn("gradient undefined at zero weight columns")
    d, k = W.shape
    grad = np.zeros((d, k))
    for j in range(k):
        acc = np.zeros(d)
        for i in range(k):
            acc += truncated_covariance(W[:, j], W[:, i]) @ W[:, i]
        for i in range(W_star.shape[1]):
            col = W_star[:, i]
            if np.linalg.norm(col) <= ZERO_TOL:
                continue
            acc -= truncated_covariance(W[:, j], col) @ col
        grad[:, j] = 2.0 * acc
    units = weights.line_set.unit_vectors[:, list(weights.neuron_map.assignment)]
    projected = np.einsum("dk,dk->k", grad, units)
    return grad, projected


def stationarity_check(
    weights: PNNWeights, weights_star: PNNWeights, tol: float
) -> bool:
    """True iff every projected gradient component is within ``tol`` of 0."""
    _, projected = analytic_gradient(weights, weights_star)
    return bool(np.max(np.abs(projected)) <= tol)


def _line_sign_matrix(line_signs, r: int) -> np.ndarray:
    s = _sign_pattern(line_signs)
    if s.size != r:
        raise DimensionMismatch("need one orientation sign per line")
    return np.diag(s.astype(float))


def bad_region_stationary(
    line_set: LineSet,
    bundle: KernelBundle,
    q_star,
    line_signs,
    w0=None,
    cutoff: float = PINV_CUTOFF,
):
    """Stationary point data in an all-single-orientation region.

    Each line ``l`` carries only neurons of orientation ``line_signs[l]``.
    Returns ``(z, q)`` where ``z`` is the column-sum gap at the stationary
    point and ``q`` the stationary per-line masses, both in closed form.
    """
    r = line_set.num_lines
    U = line_set.unit_vectors
    S = _line_sign_matrix(line_signs, r)
    q_star = np.asarray(q_star, dtype=float).ravel()
    w0 = np.zeros(line_set.dim) if w0 is None else np.asarray(w0, dtype=float)
    D11 = bundle.psi_lines
    D12 = bundle.psi_cross
    projector = U @ S @ S.T @ U.T
    proj_vals = np.linalg.eigvalsh((projector + projector.T) / 2.0)
    if proj_vals[0] <= cutoff * max(proj_vals[-1], 1.0):
        raise SingularProjector("line matrix does not span the ambient space")
    core = symmetric_pseudo_inverse(S @ U.T @ U @ S + D11, cutoff=cutoff)
    rhs = D11 @ core @ (S @ U.T @ w0) + (D11 @ core - np.eye(r)) @ (D12 @ q_star)
    z = -np.linalg.solve(projector, U @ S @ rhs)
    q = core @ (S @ U.T @ w0 + D12 @ q_star)
    return z, q


def bad_region_z(
    line_set: LineSet,
    bundle: KernelBundle,
    q_star,
    line_signs,
    w0=None,
    cutoff: float = PINV_CUTOFF,
) -> np.ndarray:
    """Column-sum gap at the stationary point of a bad region."""
    z, _ = bad_region_stationary(line_set, bundle, q_star, line_signs, w0, cutoff)
    return z


def bad_region_loss(
    bundle: KernelBundle, line_set: LineSet, q_star, cutoff: float = PINV_CUTOFF
) -> float:
    """Population risk at the bad-region stationary point (zero target sum).

    Equals a quarter of the quadratic form of ``q*`` under the Schur-style
    complement whose inverted block is the line kernel matrix augmented by
    the plain line Gram matrix.
    """
    q_star = np.asarray(q_star, dtype=float).ravel()
    U = line_set.unit_vectors
    D11 = bundle.psi_lines
    vals = np.linalg.eigvalsh((D11 + D11.T) / 2.0)
    if vals[0] <= cutoff * max(vals[-1], 1.0):
        raise SingularKernel("line kernel matrix is numerically singular")
    augmented = D11 + U.T @ U
    inner = np.linalg.solve(augmented, bundle.psi_cross @ q_star)
    value = q_star @ bundle.psi_star @ q_star - (bundle.psi_cross @ q_star) @ inner
    return 0.25 * float(value)
