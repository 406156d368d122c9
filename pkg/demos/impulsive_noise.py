"""Model choice under impulsive corruption.

When a few measurements are replaced outright by +-1 spikes, the usual
quadratic fidelity breaks down no matter how its penalty is tuned, while the
l1-fidelity model recovers the signal exactly over a window of nu values.
This script sweeps both families on one corrupted instance and prints the
recovery table. Run it directly:

    python3 demos/impulsive_noise.py
"""

import numpy as np

from adl1 import (
    ModelSpec,
    NoiseSpec,
    SolverOptions,
    dadm_solve,
    make_instance,
    relerr,
)

n, m, k = 1000, 300, 60

# 5% of the measurements are overwritten by unit impulses after the vector
# is scaled to unit infinity-norm; there is no white noise at all.
inst = make_instance("dct", n, m, k, NoiseSpec(impulse_fraction=0.05),
                     seed=11, field="complex")
corrupted = int(np.count_nonzero(inst.p_impulse))
print("instance: n=%d m=%d k=%d with %d corrupted measurements" % (n, m, k, corrupted))

opts = SolverOptions(tol=1e-8, max_iter=3000, stop="res")

print()
print("l1-fidelity sweep  min ||x||_1 + (1/nu) ||Ax - b||_1")
print("%8s %12s %8s" % ("nu", "RelErr", "iters"))
for nu in (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7):
    rec = dadm_solve(ModelSpec.l1l1(nu), inst.A, inst.b, opts)
    print("%8.2f %11.4f%% %8d" % (nu, relerr(rec.x, inst.x_true), rec.iterations))

print()
print("quadratic-penalty sweep  min ||x||_1 + 1/(2 mu) ||Ax - b||^2")
print("%8s %12s %8s" % ("mu", "RelErr", "iters"))
for mu in (0.01, 0.05, 0.1, 0.3, 0.5, 1.0):
    rec = dadm_solve(ModelSpec.qp(mu), inst.A, inst.b, opts)
    print("%8.2f %11.4f%% %8d" % (mu, relerr(rec.x, inst.x_true), rec.iterations))

print()
print("Inside its recovery window the l1-fidelity model drives the error to")
print("zero: the corrupted entries are absorbed by the residual's own")
print("sparsity. Below the window the model collapses into plain equality")
print("fitting of the corrupted data, which is also why no quadratic penalty")
print("ever gets close.")
