"""The marginal of the density ignores the bias entirely.

We start from a density that is far from equilibrium along x1, run the
nonlocal equation with a potential that couples x1 and x2, and compare the
x1-marginal with the 1-D heat flow of the initial marginal.
"""

import numpy as np

from nonlocal_fp import parse_config, run

cfg = parse_config("""
dim = 2
grid = 64 64
beta = 1.0
potential = coupled a=1.0 c=0.5
dt = 5e-4
t_final = 1.0
initial = cosine-perturbed a=0.9
series_every = 200
""")

history = run(cfg)
for t, err, norm in zip(history.times, history.column("marginal_heat_err"), history.column("h_sigma_norm")):
    print(f"t = {t:5.2f}   |marginal - heat flow|_inf = {err:.2e}   |psi|_H1.5 = {norm:.4f}")

# Each step adds a divergence whose x1-marginal is zero node by node, so the
# marginal sees only the exact heat factor and the error stays at rounding.
print("max error:", np.max(history.column("marginal_heat_err")))
