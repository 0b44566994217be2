"""Walk across the state family and watch the correlation class change.

For a fixed angle the mixing weight p is swept from 0 to 1. At each point the
exact criteria are evaluated: the partial-transpose eigenvalue, the steering
radius and the CHSH quantity M. The class changes where each one crosses its
threshold. A coarse character map of the whole (p, θ) plane follows.
"""

import math

import numpy as np

from qcorr import label_details, make_state, theoretical_label
from qcorr.states import is_excluded, nonlocal_bound

theta = 0.6
print(f"theta = {theta}: nonlocal above p = {nonlocal_bound(theta):.4f}")
print(f"{'p':>5} {'min eig PT':>11} {'R(A->B)':>8} {'M':>7}  class")
for p in np.linspace(0.05, 0.95, 10):
    d = label_details(make_state(p, theta), lazy=False)
    print(f"{p:5.2f} {d.ppt_min_eig:11.4f} {d.radius_a_to_b:8.4f} {d.horodecki_m:7.4f}  {d.label.roman}")

# θ runs down, p runs across; '.' marks the excluded windows around the product-state angles
symbols = "1234"
print("\nclass map (rows: theta in [0, pi/2], columns: p in [0, 1])")
for theta in np.linspace(0, math.pi / 2, 16):
    row = "".join(
        "." if is_excluded(theta) else symbols[theoretical_label(p, theta)] for p in np.linspace(0.01, 0.99, 60)
    )
    print(f"{theta:5.2f} {row}")
