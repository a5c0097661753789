"""How many random lines does it take to approximate a random network?

The spectral norm of the Schur complement of the model-line kernel block
bounds the achievable risk against a network on unknown target lines.
More lines help monotonically; the nearest-line baseline wastes most of
them; and when lines and dimension grow together the norm has an
explicit limit.
"""
import numpy as np

import porcupine as p


def mean_norm(d, r, r_star, trials=20, nearest=False, tag=0):
    norms = []
    for trial in range(trials):
        seq = np.random.SeedSequence((tag, r, trial)).spawn(2)
        lines = p.random_line_set(d, r, seq[0])
        star = p.random_line_set(d, r_star, seq[1])
        if nearest:
            lines = p.nearest_line_subset(lines, star).line_set
        norms.append(p.schur_complement(p.kernel_bundle(lines, star)).spectral_norm)
    return float(np.mean(norms))


def main():
    d, r_star = 15, 20
    print("== more random lines, smaller approximation error (d=%d, %d targets) ==" % (d, r_star))
    print("    r   all lines   nearest-%d baseline" % r_star)
    for r in (25, 50, 100, 200):
        full = mean_norm(d, r, r_star, tag=1)
        near = mean_norm(d, r, r_star, nearest=True, tag=1)
        print("  %4d   %.4f      %.4f" % (r, full, near))
    print("the nearest-line subset throws away the collective cancellation")

    print("\n== one line at a time: the norm never goes up ==")
    seq = np.random.SeedSequence(2).spawn(3)
    lines = p.random_line_set(10, 5, seq[0])
    star = p.random_line_set(10, 5, seq[1])
    rng = np.random.default_rng(seq[2])
    norms = []
    for _ in range(30):
        bundle = p.kernel_bundle(lines, star)
        report = p.schur_complement(bundle)
        norms.append(report.spectral_norm)
        new_line, _ = p.canonicalize_vector(rng.standard_normal(10))
        lines = p.build_line_set(np.column_stack([lines.unit_vectors, new_line]).T)
    print("norms along the chain:", " ".join("%.3f" % n for n in norms[::5]))

    print("\n== proportional regime: the limit is exact ==")
    for d in (64, 128, 256):
        measured = mean_norm(d, d, d, trials=10, tag=3)
        limit = p.asymptotic_reference(d, d, d).limit
        print("  d = r = r* = %3d: mean %.4f vs limit %.4f" % (d, measured, limit))
    print("normalized-risk bound at r = r*: %.4f" % p.normalized_loss_bound(1, 1))


if __name__ == "__main__":
    main()
