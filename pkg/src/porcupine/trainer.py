"""Synthetic data generation and (projected) SGD training experiments.

Training minimizes the empirical squared error of a two-layer relu
network on data generated by a ground-truth network.  With projection
enabled, each neuron's gradient is projected onto its assigned line
before the update, so columns never leave their lines and the run stays a
porcupine network throughout.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ._seeds import as_seed_sequence
from .errors import ConfigError, Diverged, ParameterOutOfRange
from .landscape import region_condition, stationarity_check
from .lines import (
    LineSet,
    NeuronLineMap,
    PNNWeights,
    RegionSignature,
    ZERO_TOL,
    build_line_set,
    random_line_set,
    signature_from_matrix,
)
from .risk import network_output

GLOBAL = "Global"
BAD_LOCAL = "BadLocal"
NOT_CONVERGED = "NotConverged"

LINE_DEVIATION_TOL = 1e-6


@dataclass(frozen=True)
class TrainConfig:
    """Mini-batch SGD hyperparameters.

    ``decay_every_steps`` counts optimizer steps (mini-batches), not
    epochs; 0 disables decay.  Early stopping fires when the mean epoch
    loss over the trailing ``early_stop_window`` epochs drops below
    ``early_stop_threshold`` (None disables it).
    """

    batch_size: int = 100
    epochs: int = 100
    learning_rate: float = 0.01
    momentum: float = 0.0
    decay_rate: float = 1.0
    decay_every_steps: int = 0
    early_stop_window: int = 10
    early_stop_threshold: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.batch_size < 1 or self.epochs < 1:
            raise ConfigError("batch_size and epochs must be positive")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if not 0.0 <= self.momentum < 1.0:
            raise ConfigError("momentum must lie in [0, 1)")
        if self.decay_rate <= 0:
            raise ConfigError("decay_rate must be positive")
        if self.decay_every_steps < 0:
            raise ConfigError("decay_every_steps must be >= 0")
        if self.early_stop_window < 1:
            raise ConfigError("early_stop_window must be positive")
        if self.early_stop_threshold is not None and self.early_stop_threshold <= 0:
            raise ConfigError("early_stop_threshold must be positive when set")


def desk_matched_config(seed: int = 0) -> TrainConfig:
    """Desk-scale defaults for matched runs (shrunk from the full protocol)."""
    return TrainConfig(
        batch_size=100,
        epochs=200,
        learning_rate=0.01,
        momentum=0.9,
        decay_rate=0.95,
        decay_every_steps=390,
        early_stop_window=10,
        early_stop_threshold=1e-5,
        seed=seed,
    )


def full_scale_matched_config(seed: int = 0) -> TrainConfig:
    """Full-scale matched protocol (1000 epochs; hours, not minutes)."""
    return TrainConfig(
        batch_size=100,
        epochs=1000,
        learning_rate=0.01,
        momentum=0.9,
        decay_rate=0.95,
        decay_every_steps=390,
        early_stop_window=10,
        early_stop_threshold=1e-5,
        seed=seed,
    )


def desk_mismatched_config(seed: int = 0) -> TrainConfig:
    """Desk-scale defaults for mismatched runs."""
    return TrainConfig(
        batch_size=100,
        epochs=100,
        learning_rate=1e-3,
        momentum=0.0,
        decay_rate=0.95,
        decay_every_steps=390,
        early_stop_window=10,
        early_stop_threshold=None,
        seed=seed,
    )


def full_scale_mismatched_config(seed: int = 0) -> TrainConfig:
    """Full-scale mismatched protocol (pair with 10000-sample datasets)."""
    return TrainConfig(
        batch_size=100,
        epochs=100,
        learning_rate=1e-3,
        momentum=0.0,
        decay_rate=0.95,
        decay_every_steps=390,
        early_stop_window=10,
        early_stop_threshold=None,
        seed=seed,
    )


@dataclass(frozen=True, eq=False)
class TrainResult:
    final_train_loss: float
    final_test_loss_normalized: float
    epochs_run: int
    final_signature: RegionSignature
    line_feasibility_ok: bool
    max_line_deviation: float
    trajectory: tuple
    final_matrix: np.ndarray
    line_set: LineSet
    neuron_map: NeuronLineMap

    def final_weights(self) -> PNNWeights:
        """Final matrix as a porcupine network (requires feasibility)."""
        return PNNWeights(
            matrix=self.final_matrix,
            line_set=self.line_set,
            neuron_map=self.neuron_map,
        )


def generate_dataset(w_star, n: int, seed):
    """``n`` pairs ``(x, h(x; W*))`` with standard Gaussian inputs."""
    if n < 1:
        raise ParameterOutOfRange("need n >= 1")
    W = w_star.matrix if isinstance(w_star, PNNWeights) else np.asarray(w_star, float)
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, W.shape[0]))
    return X, network_output(X, W)


def init_random_pnn(d: int, r: int, seed):
    """Random porcupine initialization with two neurons per line.

    Draws ``r`` uniform lines; on each line one neuron gets a Uniform(0,1)
    scale and the other a Uniform(-1,0) scale, so every line starts with
    both orientations present.
    """
    seq = as_seed_sequence(seed).spawn(2)
    line_set = random_line_set(d, r, seq[0])
    rng = np.random.default_rng(seq[1])
    assignment = tuple(np.repeat(np.arange(r), 2))
    neuron_map = NeuronLineMap(num_neurons=2 * r, assignment=assignment)
    scales = np.empty(2 * r)
    scales[0::2] = rng.uniform(0.0, 1.0, size=r)
    scales[1::2] = rng.uniform(-1.0, 0.0, size=r)
    matrix = line_set.unit_vectors[:, list(assignment)] * scales[None, :]
    weights = PNNWeights(matrix=matrix, line_set=line_set, neuron_map=neuron_map)
    return line_set, neuron_map, weights


def _line_deviation(matrix: np.ndarray, units: np.ndarray) -> float:
    residual = matrix - units * np.einsum("dk,dk->k", units, matrix)[None, :]
    return float(np.max(np.linalg.norm(residual, axis=0)))


def sgd_train(
    data,
    init_weights: PNNWeights,
    config: TrainConfig,
    projection: bool = True,
    test_data=None,
) -> TrainResult:
    """Mini-batch SGD with momentum on the empirical squared error.

    The relu subgradient at exactly zero is taken to be zero.  With
    ``projection`` on, each neuron's gradient is replaced by its component
    along the neuron's line before the update.  Returns the last state
    (no best-iterate selection), with per-epoch mean losses recorded.
    """
    X, y = data
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = X.shape[0]
    if n == 0:
        raise ConfigError("training data is empty")
    if config.batch_size > n:
        raise ConfigError("batch_size %d exceeds n=%d" % (config.batch_size, n))
    W = init_weights.matrix.copy()
    velocity = np.zeros_like(W)
    assignment = list(init_weights.neuron_map.assignment)
    units = init_weights.line_set.unit_vectors[:, assignment]
    lr = config.learning_rate
    rng = np.random.default_rng(config.seed)
    step = 0
    trajectory: list[float] = []
    max_deviation = 0.0
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        loss_sum = 0.0
        batches = 0
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            Xb = X[idx]
            preact = Xb @ W
            residual = np.maximum(preact, 0.0).sum(axis=1) - y[idx]
            loss_sum += float(residual @ residual) / len(idx)
            batches += 1
            grad = (2.0 / len(idx)) * (Xb.T @ ((preact > 0.0) * residual[:, None]))
            if projection:
                grad = units * np.einsum("dk,dk->k", units, grad)[None, :]
            velocity = config.momentum * velocity + grad
            W = W - lr * velocity
            step += 1
            if config.decay_every_steps and step % config.decay_every_steps == 0:
                lr *= config.decay_rate
        epoch_loss = loss_sum / batches
        if not np.isfinite(epoch_loss):
            raise Diverged("training loss became non-finite at epoch %d" % epoch)
        trajectory.append(epoch_loss)
        max_deviation = max(max_deviation, _line_deviation(W, units))
        if (
            config.early_stop_threshold is not None
            and len(trajectory) >= config.early_stop_window
            and float(np.mean(trajectory[-config.early_stop_window :]))
            < config.early_stop_threshold
        ):
            break

    if test_data is not None:
        X_test, y_test = test_data
        predictions = network_output(np.asarray(X_test, float), W)
        denom = float(np.asarray(y_test, float) @ np.asarray(y_test, float))
        errors = predictions - np.asarray(y_test, float)
        normalized = float(errors @ errors) / denom if denom > 0 else float("nan")
    else:
        normalized = float("nan")

    return TrainResult(
        final_train_loss=trajectory[-1],
        final_test_loss_normalized=normalized,
        epochs_run=len(trajectory),
        final_signature=signature_from_matrix(W, init_weights.neuron_map),
        line_feasibility_ok=max_deviation <= LINE_DEVIATION_TOL,
        max_line_deviation=max_deviation,
        trajectory=tuple(trajectory),
        final_matrix=W,
        line_set=init_weights.line_set,
        neuron_map=init_weights.neuron_map,
    )


@dataclass(frozen=True)
class OutcomeReport:
    outcome: str
    region_condition_ok: bool
    stationary: bool | None
    violated_lines: int


def classify_outcome(
    result: TrainResult,
    w_star: PNNWeights,
    tol: float = 1e-5,
    stationarity_tol: float = 1e-2,
) -> OutcomeReport:
    """Label a matched run as Global, BadLocal, or NotConverged.

    Global when the final training loss is within ``tol`` of zero;
    BadLocal when the analytic projected gradient vanishes (within
    ``stationarity_tol``) at a loss above ``tol``; NotConverged otherwise.
    The report also flags whether the final signature satisfies the
    mixed-orientation condition and counts the single-orientation lines.
    """
    signature = result.final_signature
    condition = region_condition(signature, result.line_set.dim)
    violated = sum(
        1 for plus, minus in zip(signature.all_plus, signature.all_minus) if plus or minus
    )
    if result.final_train_loss <= tol:
        return OutcomeReport(
            outcome=GLOBAL,
            region_condition_ok=condition,
            stationary=None,
            violated_lines=violated,
        )
    stationary = None
    if result.line_feasibility_ok and np.all(
        np.linalg.norm(result.final_matrix, axis=0) > ZERO_TOL
    ):
        stationary = stationarity_check(
            result.final_weights(), w_star, tol=stationarity_tol
        )
    if stationary:
        return OutcomeReport(
            outcome=BAD_LOCAL,
            region_condition_ok=condition,
            stationary=True,
            violated_lines=violated,
        )
    return OutcomeReport(
        outcome=NOT_CONVERGED,
        region_condition_ok=condition,
        stationary=stationary,
        violated_lines=violated,
    )


def axes_line_set(d: int) -> LineSet:
    """The standard coordinate axes as a line set."""
    return build_line_set(np.eye(d))


def degree_one_map(d: int, k: int) -> NeuronLineMap:
    """Assign ``k`` neurons evenly to ``d`` axes (k divisible by d)."""
    if k % d != 0:
        raise ConfigError("k=%d is not divisible by d=%d" % (k, d))
    per = k // d
    return NeuronLineMap(num_neurons=k, assignment=tuple(np.repeat(np.arange(d), per)))


@dataclass(frozen=True)
class MatchedTrial:
    trial: int
    seed: int
    outcome: str
    final_train_loss: float
    normalized_test_mse: float
    gap_frobenius_sq: float
    epochs_run: int
    region_condition_ok: bool
    violated_lines: int


@dataclass(frozen=True)
class MatchedSummary:
    d: int
    k: int
    fraction_global: float
    trials: tuple


def experiment_matched_degree_one(
    d: int,
    k: int,
    trials: int,
    config: TrainConfig,
    n_train: int = 2000,
    n_test: int = 1000,
) -> MatchedSummary:
    """Matched runs on a degree-one network: learn the architecture that
    generated the data, report how often training reaches a global optimum
    and the per-trial gap between learned and true weights."""
    line_set = axes_line_set(d)
    neuron_map = degree_one_map(d, k)
    rows = []
    global_count = 0
    for trial in range(trials):
        seq = np.random.SeedSequence((config.seed, trial))
        s_data, s_truth, s_init, s_train = seq.spawn(4)
        rng = np.random.default_rng(s_truth)
        truth = PNNWeights(
            matrix=line_set.unit_vectors[:, list(neuron_map.assignment)]
            * rng.standard_normal(k)[None, :],
            line_set=line_set,
            neuron_map=neuron_map,
        )
        X, y = generate_dataset(truth, n_train + n_test, s_data)
        rng_init = np.random.default_rng(s_init)
        init = PNNWeights(
            matrix=line_set.unit_vectors[:, list(neuron_map.assignment)]
            * rng_init.standard_normal(k)[None, :],
            line_set=line_set,
            neuron_map=neuron_map,
        )
        trial_config = replace(
            config, seed=int(np.random.default_rng(s_train).integers(2**31))
        )
        result = sgd_train(
            (X[:n_train], y[:n_train]),
            init,
            trial_config,
            projection=True,
            test_data=(X[n_train:], y[n_train:]),
        )
        report = classify_outcome(result, truth)
        if report.outcome == GLOBAL:
            global_count += 1
        gap = float(np.linalg.norm(result.final_matrix - truth.matrix) ** 2)
        rows.append(
            MatchedTrial(
                trial=trial,
                seed=trial_config.seed,
                outcome=report.outcome,
                final_train_loss=result.final_train_loss,
                normalized_test_mse=result.final_test_loss_normalized,
                gap_frobenius_sq=gap,
                epochs_run=result.epochs_run,
                region_condition_ok=report.region_condition_ok,
                violated_lines=report.violated_lines,
            )
        )
    return MatchedSummary(
        d=d, k=k, fraction_global=global_count / trials, trials=tuple(rows)
    )


@dataclass(frozen=True)
class MismatchedRun:
    k: int
    trial: int
    init: int
    seed: int
    epochs_run: int
    final_train_loss: float
    normalized_test_mse: float
    feasibility_ok: bool
    region_condition_ok: bool
    violated_lines: int


@dataclass(frozen=True)
class MismatchedSummary:
    d: int
    k_star: int
    runs: tuple

    def per_k(self, reducer=np.median) -> dict:
        values: dict[int, list[float]] = {}
        for run in self.runs:
            values.setdefault(run.k, []).append(run.normalized_test_mse)
        return {k: float(reducer(v)) for k, v in sorted(values.items())}


def experiment_mismatched_random(
    d: int,
    k_star: int,
    k_list,
    trials: int,
    config: TrainConfig,
    inits_per_trial: int = 10,
    n_train: int = 4000,
    n_test: int = 4000,
) -> MismatchedSummary:
    """Approximate an unconstrained network with random porcupine networks.

    Per trial, data comes from an unconstrained two-layer network with
    ``k_star`` neurons (columns i.i.d. Gaussian with variance 1/d); for
    every ``k`` in ``k_list`` and every initialization, a fresh random
    porcupine network with ``k/2`` lines and two neurons per line is
    trained with projected SGD, and the held-out normalized squared error
    is recorded.
    """
    for k in k_list:
        if k % 2 != 0:
            raise ConfigError("k values must be even (two neurons per line)")
    runs = []
    for trial in range(trials):
        seq = np.random.SeedSequence((config.seed, trial)).spawn(3)
        rng = np.random.default_rng(seq[0])
        truth_matrix = rng.standard_normal((d, k_star)) / np.sqrt(d)
        X, y = generate_dataset(truth_matrix, n_train + n_test, seq[1])
        train = (X[:n_train], y[:n_train])
        test = (X[n_train:], y[n_train:])
        for k in k_list:
            for init_index in range(inits_per_trial):
                init_seq = np.random.SeedSequence(
                    (config.seed, trial, int(k), init_index)
                )
                init_seed, train_seed = init_seq.spawn(2)
                _, _, init = init_random_pnn(d, k // 2, init_seed)
                run_seed = int(np.random.default_rng(train_seed).integers(2**31))
                run_config = replace(config, seed=run_seed)
                result = sgd_train(
                    train, init, run_config, projection=True, test_data=test
                )
                signature = result.final_signature
                violated = sum(
                    1
                    for plus, minus in zip(signature.all_plus, signature.all_minus)
                    if plus or minus
                )
                runs.append(
                    MismatchedRun(
                        k=int(k),
                        trial=trial,
                        init=init_index,
                        seed=run_seed,
                        epochs_run=result.epochs_run,
                        final_train_loss=result.final_train_loss,
                        normalized_test_mse=result.final_test_loss_normalized,
                        feasibility_ok=result.line_feasibility_ok,
                        region_condition_ok=region_condition(signature, d),
                        violated_lines=violated,
                    )
                )
    return MismatchedSummary(d=d, k_star=k_star, runs=tuple(runs))
