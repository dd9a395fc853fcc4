"""What a gauge generator changes and what it leaves alone.

Run with ``python demos/gauge_freedom.py``.
"""

import numpy as np

from photonwave import GridSpec, gauge_generator, gauge_transform, potential_state
from photonwave.currents import conserved_set, pi_vector, probability_current

grid = GridSpec((16, 16, 16))
psi = potential_state(grid, seed=3, cutoff=3.0)
amp = float(np.linalg.norm(psi.fourier()))

for kind in ("general", "scalar"):
    g = gauge_transform(psi, gauge_generator(grid, 11, 3.0, amplitude=amp, kind=kind))
    rho0, rho1 = probability_current(psi).rho, probability_current(g).rho
    e0, e1 = conserved_set(psi).energy, conserved_set(g).energy
    print(f"{kind:8s} generator: off-diagonal change {np.max(np.abs(g.values - psi.values)):.2e}, "
          f"pi change {np.max(np.abs(pi_vector(g) - pi_vector(psi))):.1e}, "
          f"rho change {np.max(np.abs(rho1 - rho0)):.1e}, energy {e0:+.6f} -> {e1:+.6f}")
