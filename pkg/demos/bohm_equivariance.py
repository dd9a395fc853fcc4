"""Guiding trajectories keep a rho-distributed ensemble rho-distributed.

Samples 10^4 starts from rho(0) on a line, transports them for T = 2 and
compares the endpoints with rho(T).  Halving every velocity breaks the match.
Run with ``python demos/bohm_equivariance.py``.
"""

import numpy as np

from photonwave import GridSpec, random_field
from photonwave.bohm import FieldSeries, equivariance_stat, integrate, sample_rho
from photonwave.dynamics import EvolutionPlan, evolve

grid = GridSpec((128, 1, 1))
psi = random_field(1, grid, 3.0, branch=1)
T, dt = 2.0, 0.02

series = FieldSeries.from_evolution(psi, dt, int(T / dt))
starts = sample_rho(psi, 10_000, seed=9)
psiT = evolve(psi, EvolutionPlan(T, 1))[-1]

ens = integrate(series, starts, dt)
print("KS p-value at T:          ", f"{equivariance_stat(ens.endpoints, psiT).min_pvalue:.3f}")
print("fastest particle / c:     ", f"{ens.max_speed() / psi.physics.c:.3f}")
slow = integrate(series.scaled(0.5), starts, dt)
print("KS p-value, half velocity:", f"{equivariance_stat(slow.endpoints, psiT).min_pvalue:.1e}")
print("mean displacement:        ", f"{np.mean(np.abs(ens.endpoints[:, 0] - starts[:, 0])):.3f}")
