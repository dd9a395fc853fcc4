"""A circularly polarized plane wave: stress tensor, conserved four-vector, phase rotation.

Run with ``python demos/plane_wave_tour.py``.
"""

import numpy as np

from photonwave import EvolutionPlan, GridSpec, evolve, plane_wave_state
from photonwave.currents import conserved_set, killing_X, riesz_tensor
from photonwave.errors import NullTotalCurrent

grid = GridSpec((8, 8, 8))
psi = plane_wave_state(grid, k=[0, 0, 1], chirality=1, polarization=[1, 1j, 0])

tau = riesz_tensor(psi).upper[0, 0, 0]
print("tau^{mu nu} at the origin:\n", np.round(tau, 12))

cs = conserved_set(psi)
print("pi =", np.round(cs.pi, 9), " |pi|^2 =", f"{cs.pi_square:.2e}", " volume =", f"{grid.volume:.6f}")
try:
    killing_X(cs)
except NullTotalCurrent as exc:
    print("a lone plane wave has a null pi:", exc)

# one period of a |k| = 1 wave with c = 1
later = evolve(psi, EvolutionPlan(2 * np.pi / 64, 64))[-1]
print("after one period, max |change| of the diagonal blocks:",
      f"{np.max(np.abs(later.diag().values - psi.diag().values)):.1e}")
