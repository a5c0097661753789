"""The relu cross-correlation kernel and its matrix machinery.

``psi`` maps the cosine of the angle between two lines to the coefficient
that the quadratic (mass) part of the population risk puts on that pair.
Applied entrywise to a line-set Gram matrix it stays positive
semidefinite, which is what makes the closed-form risks well behaved.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, DomainError, NotSymmetric, ParameterOutOfRange
from .lines import LineSet, build_line_set, cross_gram

CLAMP_EPS = 1e-9
PINV_CUTOFF = 1e-10


def psi(x):
    """Kernel value ``x + (2/pi) * (sqrt(1-x^2) - x*arccos(x))``.

    Accepts scalars or arrays with entries in [-1, 1]; inputs within
    CLAMP_EPS of the interval are clamped, anything farther out raises
    DomainError (to distinguish roundoff from bugs).  The function is
    even, 1-Lipschitz, and takes values in [2/pi, 1].
    """
    arr = np.asarray(x, dtype=float)
    if np.any(np.abs(arr) > 1.0 + CLAMP_EPS):
        raise DomainError("kernel argument outside [-1, 1] beyond tolerance")
    c = np.clip(arr, -1.0, 1.0)
    out = c + (2.0 / np.pi) * (np.sqrt(1.0 - c * c) - c * np.arccos(c))
    if np.isscalar(x) or arr.ndim == 0:
        return float(out)
    return out


def psi_apply(matrix) -> np.ndarray:
    """Entrywise ``psi`` on a matrix; symmetry of the input is preserved."""
    matrix = np.asarray(matrix, dtype=float)
    return psi(matrix)


def equiangular_2d(r: int) -> LineSet:
    """``r`` planar lines with equal angles pi/r between neighbours."""
    if r < 2:
        raise ParameterOutOfRange("need r >= 2 equiangular lines, got %d" % r)
    angles = np.arange(r) * np.pi / r
    return build_line_set(np.column_stack([np.cos(angles), np.sin(angles)]))


def _require_symmetric(matrix, tol: float) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionMismatch("expected a square matrix")
    if matrix.size and np.max(np.abs(matrix - matrix.T)) > tol:
        raise NotSymmetric("asymmetry %.3g exceeds %.3g"
                           % (float(np.max(np.abs(matrix - matrix.T))), tol))
    return (matrix + matrix.T) / 2.0


def min_eigenvalue(matrix, asym_tol: float = 1e-9) -> float:
    """Smallest eigenvalue via a full symmetric eigendecomposition."""
    sym = _require_symmetric(matrix, asym_tol)
    return float(np.linalg.eigvalsh(sym)[0])


def spectral_norm(matrix, asym_tol: float = 1e-9) -> float:
    """Operator norm of a symmetric matrix (largest |eigenvalue|)."""
    sym = _require_symmetric(matrix, asym_tol)
    vals = np.linalg.eigvalsh(sym)
    return float(max(abs(vals[0]), abs(vals[-1])))


def symmetric_pseudo_inverse(matrix, cutoff: float = PINV_CUTOFF,
                             asym_tol: float = 1e-9) -> np.ndarray:
    """Pseudo-inverse of a symmetric matrix.

    Eigenvalues with magnitude below ``cutoff`` times the largest
    magnitude are treated as zero; the same convention is used everywhere
    a pseudo-inverse appears in this package.
    """
    sym = _require_symmetric(matrix, asym_tol)
    vals, vecs = np.linalg.eigh(sym)
    scale = float(np.max(np.abs(vals))) if vals.size else 0.0
    keep = np.abs(vals) > cutoff * scale
    inv = np.zeros_like(vals)
    inv[keep] = 1.0 / vals[keep]
    return (vecs * inv[None, :]) @ vecs.T


@dataclass(frozen=True, eq=False)
class KernelBundle:
    """Kernel blocks for a pair of line sets (model lines vs. target lines).

    ``joint`` stacks the blocks as ``[[psi_lines, psi_cross],
    [psi_cross.T, psi_star]]``; it is symmetric with unit diagonal and
    positive semidefinite because it is the entrywise kernel of the Gram
    matrix of the union of the two line families.  The source line sets
    are kept so downstream updates can reach the geometry.
    """

    psi_lines: np.ndarray
    psi_cross: np.ndarray
    psi_star: np.ndarray
    joint: np.ndarray
    lines: LineSet
    star: LineSet

    @property
    def num_lines(self) -> int:
        return self.psi_lines.shape[0]

    @property
    def num_star_lines(self) -> int:
        return self.psi_star.shape[0]


def kernel_bundle(lines: LineSet, star: LineSet) -> KernelBundle:
    """Assemble the kernel blocks for model lines against target lines."""
    if lines.dim != star.dim:
        raise DimensionMismatch(
            "line sets live in d=%d and d=%d" % (lines.dim, star.dim)
        )
    psi_lines = psi_apply(lines.gram)
    psi_star = psi_apply(star.gram)
    psi_cross = psi_apply(cross_gram(lines, star))
    joint = np.block([[psi_lines, psi_cross], [psi_cross.T, psi_star]])
    for arr in (psi_lines, psi_cross, psi_star, joint):
        arr.flags.writeable = False
    return KernelBundle(
        psi_lines=psi_lines,
        psi_cross=psi_cross,
        psi_star=psi_star,
        joint=joint,
        lines=lines,
        star=star,
    )
