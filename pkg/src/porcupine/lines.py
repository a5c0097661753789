"""Line sets, neuron-to-line maps, and weight decompositions.

A porcupine network constrains each hidden neuron's incoming weight vector
to a fixed line through the origin.  This module owns the geometry: every
line is represented by a canonically oriented unit vector, a line set
carries the pairwise angle and Gram matrices, and a weight matrix
decomposes into per-line mass and per-neuron orientation signs.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    DuplicateLine,
    InfeasibleWeights,
    ParameterOutOfRange,
    TooManyCollisions,
    ZeroVector,
)

ZERO_TOL = 1e-12
COLLINEARITY_TOL = 1e-9
FEASIBILITY_TOL = 1e-9

# 17 significant digits round-trip any IEEE double exactly.
_FLOAT_FMT = "%.17g"


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.flags.writeable = False
    return out


def canonicalize_vector(v, zero_tol: float = ZERO_TOL):
    """Normalize ``v`` and orient it canonically.

    The canonical representative of the line through ``v`` is the unit
    vector whose entry at the largest index carrying a non-negligible
    component is positive.  Returns ``(unit, flag)`` where ``flag`` is +1
    if ``v`` already points in the canonical direction and -1 otherwise,
    so that ``unit = flag * v / ||v||``.

    Raises ZeroVector when ``||v|| <= zero_tol``.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise DimensionMismatch("expected a 1-D vector, got shape %s" % (v.shape,))
    norm = float(np.linalg.norm(v))
    if norm <= zero_tol:
        raise ZeroVector("cannot orient a vector of norm %.3g" % norm)
    unit = v / norm
    significant = np.nonzero(np.abs(unit) > zero_tol)[0]
    pivot = significant[-1]
    flag = 1 if unit[pivot] > 0 else -1
    return flag * unit, flag


@dataclass(frozen=True, eq=False)
class LineSet:
    """A finite set of origin lines in ``dim`` dimensions.

    ``unit_vectors`` stores one canonical unit vector per line as columns
    of a ``dim x r`` matrix.  ``gram`` is the matrix of pairwise cosines
    (clamped to [-1, 1], unit diagonal) and ``angle_matrix`` its entrywise
    arccos, so every angle lies in [0, pi].
    """

    dim: int
    unit_vectors: np.ndarray
    angle_matrix: np.ndarray
    gram: np.ndarray

    @property
    def num_lines(self) -> int:
        return self.unit_vectors.shape[1]

    def line(self, index: int) -> np.ndarray:
        return self.unit_vectors[:, index]

    def subset(self, indices) -> "LineSet":
        """Line set restricted to ``indices`` (order preserved)."""
        idx = list(indices)
        return LineSet(
            dim=self.dim,
            unit_vectors=_freeze(self.unit_vectors[:, idx]),
            angle_matrix=_freeze(self.angle_matrix[np.ix_(idx, idx)]),
            gram=_freeze(self.gram[np.ix_(idx, idx)]),
        )

    def same_geometry(self, other: "LineSet") -> bool:
        return (
            self.dim == other.dim
            and self.unit_vectors.shape == other.unit_vectors.shape
            and np.array_equal(self.unit_vectors, other.unit_vectors)
        )

    def save(self, path) -> None:
        save_line_set(self, path)


def _assemble_line_set(units: np.ndarray) -> LineSet:
    gram = units.T @ units
    gram = np.clip((gram + gram.T) / 2.0, -1.0, 1.0)
    np.fill_diagonal(gram, 1.0)
    return LineSet(
        dim=units.shape[0],
        unit_vectors=_freeze(units),
        angle_matrix=_freeze(np.arccos(gram)),
        gram=_freeze(gram),
    )


def build_line_set(raw_vectors, collinearity_tol: float = COLLINEARITY_TOL) -> LineSet:
    """Build a LineSet from non-zero spanning vectors, one per line.

    Vectors are normalized and canonically oriented; pairs that are
    collinear within ``collinearity_tol`` raise DuplicateLine.
    """
    vectors = [np.asarray(v, dtype=float) for v in raw_vectors]
    if not vectors:
        raise ParameterOutOfRange("a line set needs at least one vector")
    dim = vectors[0].shape[0]
    for v in vectors:
        if v.ndim != 1 or v.shape[0] != dim:
            raise DimensionMismatch("all vectors must share one dimension")
    units = np.column_stack([canonicalize_vector(v)[0] for v in vectors])
    cosines = np.abs(units.T @ units)
    r = units.shape[1]
    for i in range(r):
        for j in range(i + 1, r):
            if cosines[i, j] >= 1.0 - collinearity_tol:
                raise DuplicateLine(
                    "vectors %d and %d span the same line (|cos| = %.12g)"
                    % (i, j, cosines[i, j])
                )
    return _assemble_line_set(units)


def cross_gram(a: LineSet, b: LineSet) -> np.ndarray:
    """Pairwise cosines between the lines of ``a`` (rows) and ``b`` (columns)."""
    if a.dim != b.dim:
        raise DimensionMismatch("line sets live in d=%d and d=%d" % (a.dim, b.dim))
    return np.clip(a.unit_vectors.T @ b.unit_vectors, -1.0, 1.0)


def random_line_set(
    d: int,
    r: int,
    seed,
    collinearity_tol: float = COLLINEARITY_TOL,
    max_draws: int | None = None,
) -> LineSet:
    """Draw ``r`` i.i.d. uniformly random lines in ``d`` dimensions.

    Directions are normalized standard Gaussian vectors, canonically
    oriented.  Near-collinear collisions are rejected and redrawn, which
    preserves uniformity; TooManyCollisions is raised if the draw budget
    is exhausted (only plausible for tiny ``d`` and huge ``r``).
    """
    if d < 1 or r < 1:
        raise ParameterOutOfRange("need d >= 1 and r >= 1, got d=%d r=%d" % (d, r))
    rng = np.random.default_rng(seed)
    budget = max_draws if max_draws is not None else max(1000, 200 * r)
    units = np.empty((d, r))
    count = 0
    for _ in range(budget):
        g = rng.standard_normal(d)
        try:
            u, _ = canonicalize_vector(g)
        except ZeroVector:  # pragma: no cover - probability zero
            continue
        if count and np.max(np.abs(units[:, :count].T @ u)) >= 1.0 - collinearity_tol:
            continue
        units[:, count] = u
        count += 1
        if count == r:
            return _assemble_line_set(units)
    raise TooManyCollisions(
        "could not draw %d collision-free lines in d=%d within %d attempts"
        % (r, d, budget)
    )


@dataclass(frozen=True)
class NeuronLineMap:
    """Surjective assignment of neurons {0..k-1} to lines {0..r-1}."""

    num_neurons: int
    assignment: tuple

    def __post_init__(self):
        if self.num_neurons < 1:
            raise ParameterOutOfRange("need at least one neuron")
        assignment = tuple(int(a) for a in self.assignment)
        object.__setattr__(self, "assignment", assignment)
        if len(assignment) != self.num_neurons:
            raise DimensionMismatch(
                "assignment length %d != num_neurons %d"
                % (len(assignment), self.num_neurons)
            )
        if min(assignment) < 0:
            raise ParameterOutOfRange("line indices must be non-negative")
        r = max(assignment) + 1
        if set(assignment) != set(range(r)):
            raise ParameterOutOfRange(
                "assignment must be surjective onto {0..%d}" % (r - 1)
            )

    @property
    def num_lines(self) -> int:
        return max(self.assignment) + 1

    def line_of(self, neuron: int) -> int:
        return self.assignment[neuron]

    def neurons_on_line(self, line: int) -> tuple:
        return tuple(i for i, a in enumerate(self.assignment) if a == line)


@dataclass(frozen=True)
class RegionSignature:
    """Per-line orientation signs of the neurons living on each line.

    ``signs[l]`` lists the +-1 orientation flags of the neurons assigned
    to line ``l`` (in neuron order); zero-weight neurons are recorded as
    +1 with ``nonzero`` False and are excluded from the all-same-sign
    summaries.
    """

    signs: tuple
    nonzero: tuple

    def __post_init__(self):
        if len(self.signs) != len(self.nonzero):
            raise DimensionMismatch("signs and nonzero flags disagree in length")
        for s, z in zip(self.signs, self.nonzero):
            if len(s) != len(z):
                raise DimensionMismatch("per-line sign/flag lengths disagree")

    @property
    def num_lines(self) -> int:
        return len(self.signs)

    def _active(self, line: int):
        return [s for s, z in zip(self.signs[line], self.nonzero[line]) if z]

    @property
    def mixed(self) -> tuple:
        """Per line: True iff both orientations occur among non-zero neurons."""
        return tuple(
            (+1 in self._active(l)) and (-1 in self._active(l))
            for l in range(self.num_lines)
        )

    @property
    def all_plus(self) -> tuple:
        return tuple(
            bool(self._active(l)) and all(s == 1 for s in self._active(l))
            for l in range(self.num_lines)
        )

    @property
    def all_minus(self) -> tuple:
        return tuple(
            bool(self._active(l)) and all(s == -1 for s in self._active(l))
            for l in range(self.num_lines)
        )

    @property
    def mixed_line_count(self) -> int:
        return sum(self.mixed)


@dataclass(frozen=True, eq=False)
class PNNWeights:
    """A ``d x k`` weight matrix tied to a line configuration.

    Every non-zero column must lie on its assigned line within
    FEASIBILITY_TOL (relative to max(1, column norm)); zero columns are
    legal, they arise transiently during optimization.
    """

    matrix: np.ndarray
    line_set: LineSet
    neuron_map: NeuronLineMap

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=float)
        if matrix.ndim != 2:
            raise DimensionMismatch("weights must be a d x k matrix")
        d, k = matrix.shape
        if d != self.line_set.dim:
            raise DimensionMismatch(
                "weights have d=%d but lines have d=%d" % (d, self.line_set.dim)
            )
        if k != self.neuron_map.num_neurons:
            raise DimensionMismatch(
                "weights have k=%d but map has k=%d"
                % (k, self.neuron_map.num_neurons)
            )
        if self.neuron_map.num_lines != self.line_set.num_lines:
            raise DimensionMismatch(
                "map covers %d lines but the line set has %d"
                % (self.neuron_map.num_lines, self.line_set.num_lines)
            )
        object.__setattr__(self, "matrix", _freeze(matrix))
        self._check_feasible()

    def _check_feasible(self):
        U = self.line_set.unit_vectors
        for i, line in enumerate(self.neuron_map.assignment):
            col = self.matrix[:, i]
            norm = float(np.linalg.norm(col))
            if norm <= ZERO_TOL:
                continue
            residual = col - (U[:, line] @ col) * U[:, line]
            if np.linalg.norm(residual) > FEASIBILITY_TOL * max(1.0, norm):
                raise InfeasibleWeights(
                    "column %d deviates from line %d by %.3g"
                    % (i, line, float(np.linalg.norm(residual)))
                )

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def num_neurons(self) -> int:
        return self.matrix.shape[1]

    def column_sum(self) -> np.ndarray:
        return self.matrix.sum(axis=1)

    def same_config(self, other: "PNNWeights") -> bool:
        return (
            self.line_set.same_geometry(other.line_set)
            and self.neuron_map == other.neuron_map
        )


def signature_from_matrix(matrix, neuron_map: NeuronLineMap) -> RegionSignature:
    """Orientation signature of arbitrary columns grouped by their lines."""
    matrix = np.asarray(matrix, dtype=float)
    signs = []
    nonzero = []
    for line in range(neuron_map.num_lines):
        line_signs = []
        line_nonzero = []
        for i in neuron_map.neurons_on_line(line):
            col = matrix[:, i]
            if np.linalg.norm(col) <= ZERO_TOL:
                line_signs.append(1)
                line_nonzero.append(False)
            else:
                line_signs.append(canonicalize_vector(col)[1])
                line_nonzero.append(True)
        signs.append(tuple(line_signs))
        nonzero.append(tuple(line_nonzero))
    return RegionSignature(signs=tuple(signs), nonzero=tuple(nonzero))


def decompose_weights(weights: PNNWeights):
    """Split a feasible weight matrix into per-line mass and signs.

    Returns ``(q, signature)`` where ``q[l]`` is the sum of column norms
    over the neurons assigned to line ``l``.  Zero columns contribute no
    mass and a +1 placeholder sign.
    """
    norms = np.linalg.norm(weights.matrix, axis=0)
    q = np.zeros(weights.line_set.num_lines)
    for i, line in enumerate(weights.neuron_map.assignment):
        q[line] += norms[i]
    return q, signature_from_matrix(weights.matrix, weights.neuron_map)


def weights_from_masses(
    line_set: LineSet, neuron_map: NeuronLineMap, signed_masses
) -> PNNWeights:
    """Assemble weights with column ``i`` equal to ``signed_masses[i]``
    times the canonical unit vector of its line."""
    signed_masses = np.asarray(signed_masses, dtype=float)
    if signed_masses.shape != (neuron_map.num_neurons,):
        raise DimensionMismatch("need one signed mass per neuron")
    cols = line_set.unit_vectors[:, list(neuron_map.assignment)]
    return PNNWeights(
        matrix=cols * signed_masses[None, :],
        line_set=line_set,
        neuron_map=neuron_map,
    )


def weights_from_columns(
    matrix, collinearity_tol: float = COLLINEARITY_TOL
) -> PNNWeights:
    """View an arbitrary matrix of non-zero columns as a porcupine network.

    Collinear columns (within ``collinearity_tol``) share a line; every
    other column gets its own line.  Raises ZeroVector on zero columns.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2:
        raise DimensionMismatch("expected a d x k matrix")
    reps = []  # canonical unit vector per discovered line
    assignment = []
    for i in range(matrix.shape[1]):
        unit, _ = canonicalize_vector(matrix[:, i])
        for j, rep in enumerate(reps):
            if abs(float(rep @ unit)) >= 1.0 - collinearity_tol:
                assignment.append(j)
                break
        else:
            assignment.append(len(reps))
            reps.append(unit)
    line_set = _assemble_line_set(np.column_stack(reps))
    neuron_map = NeuronLineMap(num_neurons=matrix.shape[1], assignment=tuple(assignment))
    return PNNWeights(matrix=matrix, line_set=line_set, neuron_map=neuron_map)


def save_vectors_csv(path, vectors: np.ndarray) -> None:
    """Write a ``d x m`` matrix of column vectors to CSV.

    The first record carries the two integers ``dim,count``; each further
    record is one vector with 17-significant-digit decimal floats, which
    round-trip IEEE doubles exactly.
    """
    vectors = np.asarray(vectors, dtype=float)
    d, m = vectors.shape
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write("%d,%d\r\n" % (d, m))
        for j in range(m):
            fh.write(",".join(_FLOAT_FMT % x for x in vectors[:, j]) + "\r\n")


def load_vectors_csv(path) -> np.ndarray:
    """Inverse of save_vectors_csv; returns the ``d x m`` matrix."""
    with open(path, "r", encoding="ascii") as fh:
        rows = [line.strip() for line in fh if line.strip()]
    d, m = (int(x) for x in rows[0].split(","))
    if len(rows) != m + 1:
        raise DimensionMismatch("expected %d vector rows, found %d" % (m, len(rows) - 1))
    vectors = np.empty((d, m))
    for j, row in enumerate(rows[1:]):
        values = [float(x) for x in row.split(",")]
        if len(values) != d:
            raise DimensionMismatch("row %d has %d entries, expected %d" % (j, len(values), d))
        vectors[:, j] = values
    return vectors


def save_line_set(line_set: LineSet, path) -> None:
    save_vectors_csv(path, line_set.unit_vectors)


def load_line_set(path, collinearity_tol: float = COLLINEARITY_TOL) -> LineSet:
    """Load a LineSet written by save_line_set, re-validating invariants.

    The stored unit vectors are taken verbatim (no renormalization), so a
    save/load cycle is bit-exact; unit norm, canonical orientation, and
    pairwise distinctness are checked.
    """
    units = load_vectors_csv(path)
    norms = np.linalg.norm(units, axis=0)
    if np.any(np.abs(norms - 1.0) > 1e-12):
        raise ParameterOutOfRange("stored line vectors are not unit norm")
    for j in range(units.shape[1]):
        if canonicalize_vector(units[:, j])[1] != 1:
            raise ParameterOutOfRange("stored line %d is not canonically oriented" % j)
    line_set = _assemble_line_set(units)
    r = line_set.num_lines
    for i in range(r):
        for j in range(i + 1, r):
            if abs(line_set.gram[i, j]) >= 1.0 - collinearity_tol:
                raise DuplicateLine("stored lines %d and %d coincide" % (i, j))
    return line_set
