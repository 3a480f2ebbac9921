"""Walk through the antithetic path coupling on the exactly-solvable model.

The model is the 2-D system dx1 = dw1, dx2 = x1 dw2.  At each coarse step
the fine path takes two half-steps with the half-increments (d1, d2) and
its antithetic twin takes them swapped, (d2, d1).  Three things to see:

* the first components of coarse, fine and antithetic paths coincide;
* the average of the twins' second components equals the coarse path's;
* the twins themselves split apart at rate sqrt(dt) - their gap is exactly
  a sum of half-increment cross products with E[gap^2] = T dt / 2.
"""

import numpy as np

from amlmc import builtin, simulate_triple_path

model = builtin("clark_cameron")
n_paths = 20_000

print(f"{'level':>5} {'dt':>10} {'max|xf1-xc1|':>14} "
      f"{'max|avg2-xc2|':>14} {'rms twin gap':>13} {'sqrt(T dt/2)':>13}")
for level in range(1, 7):
    path = simulate_triple_path(model, level, np.arange(n_paths), seed=2024)
    dt = 1.0 / 2 ** (level - 1)
    first_gap = np.abs(path.xf[:, 0] - path.xc[:, 0]).max()
    avg_gap = np.abs(0.5 * (path.xf[:, 1] + path.xa[:, 1])
                     - path.xc[:, 1]).max()
    twin_rms = np.sqrt(np.mean((path.xf[:, 1] - path.xa[:, 1]) ** 2))
    print(f"{level:>5} {dt:>10.5f} {first_gap:>14.2e} {avg_gap:>14.2e} "
          f"{twin_rms:>13.5f} {np.sqrt(dt / 2):>13.5f}")

print("\nThe identity gaps are pure roundoff; the twin gap tracks the")
print("half-order theory line while the averaged twins stay glued to the")
print("coarse path - that cancellation is what the estimator exploits.")
