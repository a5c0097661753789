"""Angular nets: covering directions well enough to copy any network.

A net of unit vectors covers the sphere modulo sign at angle delta;
snapping every weight column to its nearest net direction costs at most
k M sqrt(2 d (1 - cos delta)) in expected absolute output error.
"""
import numpy as np

import porcupine as p


def main():
    d, delta = 3, 0.3
    print("== greedy net construction (d=%d, delta=%.1f) ==" % (d, delta))
    net = p.greedy_angular_net(d, delta, seed=21)
    gap = p.coverage_gap(net, n_probes=100_000, seed=22)
    print("  net size %d (existence bound %.0f)"
          % (net.size, p.net_size_bound(d, delta)))
    print("  empirical coverage gap over 1e5 probes: %.3f <= %.1f" % (gap, delta))

    print("\n== sparse-weight counting bounds ==")
    print("  2-sparse in d=6:        %.1f" % p.sparse_net_size(6, 2, delta))
    print("  known patterns, k=10:   %.1f" % p.sparse_net_size(6, 2, delta, k=10))

    print("\n== snapping a random network onto the net ==")
    rng = np.random.default_rng(23)
    k = 6
    directions = rng.standard_normal((d, k))
    directions /= np.linalg.norm(directions, axis=0, keepdims=True)
    W = directions * rng.uniform(0.3, 1.0, k)[None, :]
    approx, max_angle = p.nearest_net_approx(W, net)
    X = rng.standard_normal((400_000, d))
    mean_gap = float(np.mean(np.abs(p.network_output(X, W) - p.network_output(X, approx))))
    bound = p.minimax_risk_bound(k, 1.0, d, delta)
    print("  largest snap angle: %.3f" % max_angle)
    print("  E|f - f_snapped| = %.4f, guaranteed <= %.4f" % (mean_gap, bound))

    print("\n== the relu output is Lipschitz in its weights ==")
    out = p.relu_gap(np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]),
                     np.array([2.0, -1.0, 0.5]))
    print("  gap %.3f <= bound %.3f: %s" % (out.gap, out.bound, out.within_bound))


if __name__ == "__main__":
    main()
