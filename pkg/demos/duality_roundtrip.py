"""Round trip a free energy through its Legendre-dual squared free energy.

V(m) = sup_beta [F(beta) - (beta^2/2) m] and back:
F(beta) = inf_m [V(m) + (beta^2/2) m].  The engine only ever sees a black
box beta -> F(beta), so running it against the REM (where both sides are
known in closed form) measures pure optimizer error, and running it
against the spline-backed Parisi handle measures the whole pipeline.
"""

import math

from glassdual.core import MixtureSpec
from glassdual.duality import ising_handle, legendre_sup_V, rem_handle, roundtrip_gap
from glassdual.ising import ParisiNumerics

NUM = ParisiNumerics(quad_nodes=16, x_points=256, multistart=2, seed=3, tol=1e-9)
SK = MixtureSpec(((2, math.sqrt(0.5)),), "ising")


def main():
    rem = rem_handle()
    print("REM, exact closed forms on both sides:")
    for b in (0.5, 1.1774100225154747, 2.0):
        rep = roundtrip_gap(rem, b)
        print(
            f"  beta = {b:6.4f}  F = {rep.optimizers['free_energy']:+.8f}"
            f"  recovered {rep.optimizers['recovered']:+.8f}  gap {rep.max_gap:.1e}"
        )
    v = legendre_sup_V(rem, 0.5)
    print(f"  V(0.5) = {v.value:.8f}  (closed form log2/0.5 - log2 = {math.log(2):.8f})")

    print("\ntwo-spin Parisi handle (16-point spline, demo knobs):")
    handle = ising_handle(SK, k=1, num=NUM, beta_max=3.0, grid_points=16)
    for b in (0.8, 1.5):
        rep = roundtrip_gap(handle, b)
        print(
            f"  beta = {b:4.2f}  F = {rep.optimizers['free_energy']:+.6f}"
            f"  recovered {rep.optimizers['recovered']:+.6f}  gap {rep.max_gap:.1e}"
        )
    print("\nthe stationary point of the inf is m* = F'(beta)/beta; at beta = 0.8")
    print("the model is replica symmetric and m* = 1/2 exactly.")


if __name__ == "__main__":
    main()
