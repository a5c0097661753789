"""Tour of the single-input loss landscape.

Two neurons on one line already show everything: a flat valley of global
optima when both target weights share a sign, and two sign regions with
genuinely bad local optima when they do not.
"""
import numpy as np

import porcupine as p


def show_target(w_star):
    print("\ntarget weights: %s" % (w_star,))
    print("  region  label            infimum of the risk on the region")
    for signs in [(1, 1), (1, -1), (-1, 1), (-1, -1)]:
        label = p.scalar_region_classify(signs, w_star).label
        # closed-form region minimum via the (sum, abs-sum) parametrization
        A, B = float(np.sum(w_star)), float(np.sum(np.abs(w_star)))
        if signs == (1, 1):
            v = max((A + B) / 2, 0.0)
            value = 0.25 * ((v - A) ** 2 + (v - B) ** 2)
        elif signs == (-1, -1):
            v = max((B - A) / 2, 0.0)
            value = 0.25 * ((-v - A) ** 2 + (v - B) ** 2)
        else:
            value = 0.0 if abs(A) <= B else 0.25 * ((abs(A) - B) ** 2) / 2
        pattern = "".join("+" if s > 0 else "-" for s in signs)
        print("  %-6s  %-16s %.4f" % (pattern, label, value))


def main():
    print("== classification of the four sign regions ==")
    show_target([6.0, 4.0])
    show_target([6.0, -4.0])

    print("\n== curvature ==")
    for signs in [(1, 1), (1, -1)]:
        H, rank = p.scalar_hessian(signs)
        print("signs %s: Hessian rank %d, min eigenvalue %.3f"
              % (signs, rank, p.min_eigenvalue(H)))

    print("\n== the bad local optimum is exactly where theory puts it ==")
    line = p.build_line_set([[1.0]])
    neuron_map = p.NeuronLineMap(2, (0, 0))
    w = p.weights_from_masses(line, neuron_map, [3.0, 3.0])
    w_star = p.weights_from_masses(line, neuron_map, [6.0, -4.0])
    print("projected gradient at (3, 3):",
          p.analytic_gradient(w, w_star)[1])
    print("risk there: %.1f (the all-plus region cannot do better)"
          % p.scalar_risk([3.0, 3.0], [6.0, -4.0]).total)


if __name__ == "__main__":
    main()
