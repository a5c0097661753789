"""Generalized Schur complements of kernel matrices and approximation bounds.

The spectral norm of the Schur complement of the model-line block inside
the joint kernel matrix bounds how well a network on the model lines can
approximate a network on the target lines.  This module computes the
complement, updates it under line additions, compares against the
nearest-line baseline, and evaluates the high-dimensional limits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DuplicateLine,
    NegativeMass,
    ParameterOutOfRange,
    PorcupineError,
    PreconditionViolated,
    SingularKernel,
    SingularStructure,
)
from .kernel import (
    KernelBundle,
    PINV_CUTOFF,
    kernel_bundle,
    min_eigenvalue,
    psi,
    spectral_norm,
    symmetric_pseudo_inverse,
)
from .lines import COLLINEARITY_TOL, LineSet, canonicalize_vector


@dataclass(frozen=True, eq=False)
class SchurReport:
    """Schur complement of the model-line kernel block, with its spectrum."""

    schur: np.ndarray
    spectral_norm: float
    min_eigenvalue: float

    def loss_at_good_local(self, q_star) -> float:
        """Risk attained at good-region optima for target masses ``q_star``."""
        q = np.asarray(q_star, dtype=float).ravel()
        return 0.25 * float(q @ self.schur @ q)


def _report_from_matrix(schur: np.ndarray) -> SchurReport:
    schur = (schur + schur.T) / 2.0
    schur.flags.writeable = False
    return SchurReport(
        schur=schur,
        spectral_norm=spectral_norm(schur),
        min_eigenvalue=min_eigenvalue(schur),
    )


def schur_complement(bundle: KernelBundle, cutoff: float = PINV_CUTOFF) -> SchurReport:
    """``psi_star - psi_cross' pinv(psi_lines) psi_cross`` with spectrum."""
    inv = symmetric_pseudo_inverse(bundle.psi_lines, cutoff=cutoff)
    schur = bundle.psi_star - bundle.psi_cross.T @ inv @ bundle.psi_cross
    return _report_from_matrix(schur)


def good_local_loss(report: SchurReport, q_star):
    """Exact good-region loss and its spectral-norm upper bound."""
    q = np.asarray(q_star, dtype=float).ravel()
    if np.any(q < 0):
        raise NegativeMass("per-line masses must be non-negative")
    exact = report.loss_at_good_local(q)
    upper = 0.25 * float(q @ q) * report.spectral_norm
    return exact, upper


def add_line_update(report: SchurReport, bundle: KernelBundle, new_line):
    """Rank-one downdate of the Schur complement after adding one line.

    ``new_line`` must span a line distinct from every current model line,
    and the model-line kernel block must be invertible.  Returns
    ``(new_report, alpha, v)`` with ``new_schur = schur - alpha * v v'``
    and ``alpha >= 0``, so the spectral norm never increases.
    """
    unit, _ = canonicalize_vector(np.asarray(new_line, dtype=float))
    z1 = np.clip(bundle.lines.unit_vectors.T @ unit, -1.0, 1.0)
    z2 = np.clip(bundle.star.unit_vectors.T @ unit, -1.0, 1.0)
    if np.max(np.abs(z1)) >= 1.0 - COLLINEARITY_TOL:
        raise DuplicateLine("the added line coincides with an existing model line")
    D11 = bundle.psi_lines
    vals = np.linalg.eigvalsh((D11 + D11.T) / 2.0)
    if vals[0] <= PINV_CUTOFF * max(vals[-1], 1.0):
        raise SingularKernel("model-line kernel block is numerically singular")
    zeta1 = psi(z1)
    zeta2 = psi(z2)
    solved = np.linalg.solve(D11, zeta1)
    denom = 1.0 - float(zeta1 @ solved)
    if denom <= 1e-12:
        raise SingularKernel("extended kernel block would be singular")
    alpha = 1.0 / denom
    v = zeta2 - bundle.psi_cross.T @ solved
    new_schur = report.schur - alpha * np.outer(v, v)
    return _report_from_matrix(new_schur), float(alpha), v


@dataclass(frozen=True, eq=False)
class NearestSubset:
    """Nearest-line baseline: chosen subset plus bookkeeping.

    ``indices[i]`` is the model line matched to target line ``i``;
    ``conflicts`` lists target indices whose closest line was already
    taken, so the greedy pass fell back to the nearest free one.
    """

    line_set: LineSet
    indices: tuple
    conflicts: tuple


def nearest_line_subset(lines: LineSet, targets: LineSet) -> NearestSubset:
    """For each target line pick the closest model line (orientation-free).

    Distance between lines compares both orientations, i.e. the chosen
    model line maximizes ``|cos|`` against the target.  Duplicate winners
    are resolved greedily in target order, excluding lines already taken.
    """
    if lines.num_lines < targets.num_lines:
        raise ParameterOutOfRange(
            "need at least as many model lines (%d) as targets (%d)"
            % (lines.num_lines, targets.num_lines)
        )
    affinity = np.abs(lines.unit_vectors.T @ targets.unit_vectors)
    taken: list[int] = []
    conflicts: list[int] = []
    for i in range(targets.num_lines):
        order = np.argsort(-affinity[:, i])
        best = int(order[0])
        if best in taken:
            conflicts.append(i)
            best = next(int(j) for j in order if int(j) not in taken)
        taken.append(best)
    return NearestSubset(
        line_set=lines.subset(taken), indices=tuple(taken), conflicts=tuple(conflicts)
    )


@dataclass(frozen=True, eq=False)
class AsymptoticReference:
    """High-dimensional reference for the model-line kernel matrix.

    ``matrix`` is the rank-one-plus-identity limit the kernel matrix of
    uniformly random lines concentrates around; ``eigenvalues`` lists
    (value, multiplicity) pairs; ``limit`` is the limiting spectral norm
    of the Schur complement when both line counts grow with dimension.
    """

    matrix: np.ndarray
    limit: float
    eigenvalues: tuple


def asymptotic_reference(d: int, r: int, r_star: int) -> AsymptoticReference:
    """Reference matrix, its spectrum, and the limiting Schur norm."""
    if d < 1 or r < 1 or r_star < 1:
        raise ParameterOutOfRange("need d, r, r_star >= 1")
    alpha = 1.0 - 2.0 / np.pi
    beta = 2.0 / np.pi + 1.0 / (np.pi * d)
    matrix = beta * np.ones((r, r)) + alpha * np.eye(r)
    matrix.flags.writeable = False
    gamma = r / d
    top = 2.0 / np.pi * r + 1.0 - 2.0 / np.pi + gamma / np.pi
    eigenvalues = ((alpha, r - 1), (top, 1)) if r > 1 else ((top, 1),)
    limit = (1.0 + r_star / r) * alpha
    return AsymptoticReference(matrix=matrix, limit=limit, eigenvalues=eigenvalues)


def perturbation_bound(lines: LineSet, targets: LineSet, delta: float) -> float:
    """Schur-norm bound when the model lines perturb the target lines.

    Requires equal counts, ``min_eig(psi_star) >= delta``, and the
    perturbation smallness condition ``2 sqrt(r) |Z|_F + |Z|_F^2 <=
    delta/2`` with ``Z`` the difference of the unit-vector matrices.
    The returned value is verified against the actual Schur norm.
    """
    if lines.num_lines != targets.num_lines:
        raise ParameterOutOfRange("perturbation bound needs equal line counts")
    r = lines.num_lines
    bundle = kernel_bundle(lines, targets)
    lam = min_eigenvalue(bundle.psi_star)
    if lam < delta:
        raise PreconditionViolated(
            "min eigenvalue %.6g of the target kernel is below delta=%.6g"
            % (lam, delta)
        )
    z_frob = float(np.linalg.norm(lines.unit_vectors - targets.unit_vectors))
    if 2.0 * math.sqrt(r) * z_frob + z_frob**2 > delta / 2.0:
        raise PreconditionViolated(
            "perturbation size check failed: 2 sqrt(r) |Z| + |Z|^2 = %.6g > delta/2"
            % (2.0 * math.sqrt(r) * z_frob + z_frob**2)
        )
    bound = (1.0 + 2.0 * r / delta) * z_frob**2 + 4.0 * math.sqrt(r) * z_frob
    actual = schur_complement(bundle).spectral_norm
    if actual > bound + 1e-9:
        raise PorcupineError(
            "perturbation bound %.6g violated by Schur norm %.6g" % (bound, actual)
        )
    return bound


def normalized_loss_bound(r: int, r_star: int) -> float:
    """Limiting bound on achieved risk over the risk of the zero network."""
    if r < 1 or r_star < 1:
        raise ParameterOutOfRange("need r, r_star >= 1")
    return (1.0 + r_star / r) * (1.0 - 2.0 / np.pi)


@dataclass(frozen=True)
class BadLocalBound:
    """Asymptotic bad-region loss bound, as the coefficient of |q*|^2.

    ``in_stated_regime`` records whether the target line count exceeds
    d + 1 (with d inferred from r / gamma), which the asymptotic argument
    assumes.
    """

    coefficient: float
    aspect_ratio: float
    in_stated_regime: bool


def bad_local_asymptotic_bound(
    gamma: float, r: int, r_star: int, mu: float
) -> BadLocalBound:
    """``(1/4) (1 - 2/pi + (1 + sqrt(gamma) + mu)^2 r*/r)``.

    Holds with probability ``1 - 2 exp(-mu^2 d)`` for uniformly random
    lines in the proportional regime ``r = gamma d``.
    """
    if gamma <= 1.0:
        raise ParameterOutOfRange("need gamma > 1")
    if mu <= 1.0:
        raise ParameterOutOfRange("need mu > 1")
    if r < 1 or r_star < 1:
        raise ParameterOutOfRange("need r, r_star >= 1")
    coefficient = 0.25 * (
        1.0 - 2.0 / np.pi + (1.0 + math.sqrt(gamma) + mu) ** 2 * r_star / r
    )
    d = r / gamma
    return BadLocalBound(
        coefficient=coefficient,
        aspect_ratio=gamma,
        in_stated_regime=r_star > d + 1,
    )


def structured_inverse(alpha: float, beta: float, n: int):
    """Inverse of ``alpha*I + beta*ones(n)`` in the same two-parameter form.

    Returns ``(alpha2, beta2)`` with ``alpha2 = 1/alpha`` and
    ``beta2 = -beta / (alpha^2 + alpha*beta*n)``.
    """
    if n < 1:
        raise ParameterOutOfRange("need n >= 1")
    if alpha == 0.0 or alpha + beta * n == 0.0:
        raise SingularStructure("alpha and alpha + beta*n must be non-zero")
    return 1.0 / alpha, -beta / (alpha * alpha + alpha * beta * n)
