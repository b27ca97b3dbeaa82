"""Exact enumeration at small N: the inequality that seeds the duality.

For every disorder sample and every admissible (beta, m) the finite-size
free energies obey

    V_N(m) >= F_N(beta) - (beta^2/2) m        (strictly, almost surely)

with no limit taken.  This script draws samples, shows the gap is
positive case by case, then lets N grow and watches the disorder average
of F_N drift toward the infinite-volume value.
"""

import math

import numpy as np

from glassdual.core import MixtureSpec
from glassdual.oracle import (
    disorder_average,
    exact_free_energy,
    finite_n_inequality_check,
    sample_disorder,
)

SK = MixtureSpec(((2, math.sqrt(0.5)),), "ising")


def main():
    rng = np.random.default_rng(19)
    print("pointwise inequality gap = V_N - F_N + (beta^2/2) m:")
    for case in range(6):
        model = "rem" if case % 2 == 0 else "ising"
        spec = None if model == "rem" else SK
        n = int(rng.integers(6, 11))
        sample = sample_disorder(model, spec=spec, N=n, seed=int(rng.integers(0, 2**31)))
        beta = float(rng.uniform(0.2, 2.0))
        m = float(rng.uniform(0.2, 2.0))
        gap = finite_n_inequality_check(sample, beta, m)
        print(f"  {model:6s} N={n:2d}  beta={beta:.2f} m={m:.2f}  gap = {gap:+.6f}")

    print("\ndisorder average of F_N for the two-spin model at beta = 0.8")
    print("(replica-symmetric limit value is beta^2/4 = 0.16):")
    for n in (8, 12, 16):
        job = lambda seed, n=n: exact_free_energy(
            sample_disorder("ising", spec=SK, N=n, seed=seed), 0.8
        )
        mean, se = disorder_average(job, replicas=1024, base_seed=4242)
        print(f"  N={n:2d}  mean = {mean:.5f} +/- {se:.5f}   |mean - 0.16| = {abs(mean - 0.16):.5f}")
    print("\nthe bias shrinks with N; the remaining gap is the finite-size")
    print("correction, not sampling noise.")


if __name__ == "__main__":
    main()
