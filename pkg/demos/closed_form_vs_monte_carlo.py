"""Every closed-form risk in the package against its Monte Carlo oracle.

Three independent routes to the same number: the line-mass closed form,
the column-pairwise closed form, and plain sampling.
"""
import numpy as np

import porcupine as p


def random_network(d, r, k, seed):
    seq = np.random.SeedSequence(seed).spawn(3)
    lines = p.random_line_set(d, r, seq[0])
    rng = np.random.default_rng(seq[1])
    assignment = tuple(np.concatenate([np.arange(r), rng.integers(0, r, k - r)]))
    masses = np.random.default_rng(seq[2]).standard_normal(k)
    return p.weights_from_masses(lines, p.NeuronLineMap(k, assignment), masses)


def main():
    print("== matched: shared lines, different masses ==")
    w = random_network(5, 3, 6, seed=1)
    w_star = p.weights_from_masses(
        w.line_set, w.neuron_map, np.random.default_rng(2).standard_normal(6)
    )
    breakdown = p.matched_risk(w, w_star)
    estimate, stderr = p.monte_carlo_risk(w, w_star, n_samples=2_000_000, seed=3)
    print("closed form : %.6f  (column-sum term %.6f + mass term %.6f)"
          % (breakdown.total, breakdown.linear_term, breakdown.kernel_term))
    print("pairwise    : %.6f" % p.pairwise_population_risk(w.matrix, w_star.matrix))
    print("monte carlo : %.6f +- %.6f" % (estimate, stderr))

    print("\n== mismatched: independent line sets ==")
    w = random_network(6, 5, 8, seed=4)
    w_star = random_network(6, 3, 5, seed=5)
    breakdown = p.mismatched_risk(w, w_star)
    estimate, stderr = p.monte_carlo_risk(w, w_star, n_samples=2_000_000, seed=6)
    print("closed form : %.6f" % breakdown.total)
    print("pairwise    : %.6f" % p.pairwise_population_risk(w.matrix, w_star.matrix))
    print("monte carlo : %.6f +- %.6f" % (estimate, stderr))

    print("\n== the expected-covariance building block ==")
    w1, w2 = np.array([1.0, 2.0, -0.5]), np.array([-0.3, 1.0, 0.8])
    predicted = p.truncated_covariance(w1, w2)
    X = np.random.default_rng(7).standard_normal((2_000_000, 3))
    mask = (X @ w1 > 0) & (X @ w2 > 0)
    empirical = X[mask].T @ X[mask] / len(X)
    print("max entrywise gap vs 2e6-sample average: %.2e"
          % np.abs(predicted - empirical).max())


if __name__ == "__main__":
    main()
