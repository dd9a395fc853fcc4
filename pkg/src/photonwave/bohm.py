"""Guiding trajectories driven by the photon probability current.

The velocity field is ``v = c j^k / j^0``.  The current components are
interpolated (trilinearly in space, linearly in time) before the ratio is
taken.  Both interpolations are convex combinations, so ``j^0 >= |j|`` and
hence ``|v| <= c`` survive interpolation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy import stats

from .currents import killing_X, pi_vector, probability_current
from .dynamics import EvolutionPlan, evolve
from .errors import NodeRegionError, ValidationError
from .field import GridSpec, PhotonField
from .spectral import fft

log = logging.getLogger(__name__)

NODE_EPS = 1e-10
INTERPOLATIONS = ("trilinear", "spectral")
MAX_HALVINGS = 8

FLAG_OK = "ok"
FLAG_HALVED = "halved"
FLAG_INCOMPLETE = "incomplete"


def trilinear(grid: GridSpec, values, points):
    """Periodic trilinear interpolation of grid data ``values`` (grid + tail) at ``points`` (M, 3)."""
    points = np.asarray(points, float)
    idx0, idx1, w = [], [], []
    for ax in range(3):
        n, h = grid.n[ax], grid.spacing[ax]
        s = points[:, ax] / h
        f = np.floor(s)
        i0 = f.astype(np.int64) % n
        idx0.append(i0)
        idx1.append((i0 + 1) % n)
        w.append(s - f)
    out = 0.0
    for cx in (0, 1):
        ix = idx1[0] if cx else idx0[0]
        wx = w[0] if cx else 1 - w[0]
        for cy in (0, 1):
            iy = idx1[1] if cy else idx0[1]
            wy = w[1] if cy else 1 - w[1]
            for cz in (0, 1):
                iz = idx1[2] if cz else idx0[2]
                wz = w[2] if cz else 1 - w[2]
                wt = wx * wy * wz
                v = values[ix, iy, iz]
                out = out + (wt.reshape(wt.shape + (1,) * (v.ndim - 1))) * v
    return out


def spectral_interp(grid: GridSpec, values_hat, points):
    """Band-limited (Fourier series) interpolation of real grid data at ``points``.

    Exact for data whose spectrum fits the grid.  Costs O(M * grid size).
    """
    points = np.asarray(points, float)
    k = [2 * np.pi * np.fft.fftfreq(n, h) for n, h in zip(grid.n, grid.spacing)]
    e = [np.exp(1j * points[:, ax, None] * k[ax][None, :]) for ax in range(3)]
    t = np.einsum("abc...,mc->mab...", values_hat, e[2])
    t = np.einsum("mab...,mb->ma...", t, e[1])
    return np.einsum("ma...,ma->m...", t, e[0]).real


class FieldSeries:
    """Probability-current snapshots j^mu(t_i) on a fixed time lattice.

    X is fixed from the first snapshot (pi is conserved).  Spatial
    interpolation is trilinear (convex, so subluminality is preserved
    exactly) or spectral (smooth, needed for high-order convergence).
    """

    def __init__(self, snapshots, X=None, interpolation: str = "trilinear"):
        if interpolation not in INTERPOLATIONS:
            raise ValidationError(f"interpolation must be one of {INTERPOLATIONS}")
        self.interpolation = interpolation
        snapshots = list(snapshots)
        if not snapshots:
            raise ValidationError("empty snapshot series")
        self.grid = snapshots[0].grid
        self.physics = snapshots[0].physics
        self.times = np.array([s.time for s in snapshots])
        if np.any(np.diff(self.times) <= 0):
            raise ValidationError("snapshot times must increase strictly")
        self.X = killing_X(pi_vector(snapshots[0])) if X is None else np.asarray(X, float)
        self.j = np.stack([probability_current(s, self.X).j.upper for s in snapshots])
        if interpolation == "spectral":
            self._j_hat = np.stack([fft(j) for j in self.j])
        self.rho_max = float(np.max(self.j[..., 0]))
        self.node_threshold = NODE_EPS * self.rho_max
        self.velocity_scale = 1.0

    @classmethod
    def from_evolution(cls, psi: PhotonField, dt: float, steps: int, X=None,
                       interpolation: str = "trilinear"):
        """Exact snapshots at spacing dt/2 so every RK4 stage time is a snapshot time."""
        snaps = evolve(psi, EvolutionPlan(dt / 2, 2 * steps, "full"), stride=1)
        return cls(snaps, X, interpolation)

    def _at(self, i, points):
        if self.interpolation == "trilinear":
            return trilinear(self.grid, self.j[i], points)
        return spectral_interp(self.grid, self._j_hat[i], points)

    @property
    def t_start(self):
        return float(self.times[0])

    @property
    def t_end(self):
        return float(self.times[-1])

    def current_at(self, t, points):
        """Interpolated j^mu at (t, points); shape (M, 4)."""
        if t < self.times[0] - 1e-12 or t > self.times[-1] + 1e-12:
            raise ValidationError(f"time {t} outside snapshot range [{self.times[0]}, {self.times[-1]}]")
        i = int(np.searchsorted(self.times, t, side="right") - 1)
        i = min(max(i, 0), len(self.times) - 1)
        if i == len(self.times) - 1 or abs(t - self.times[i]) <= 1e-12 * max(1.0, abs(t)):
            return self._at(i, points)
        if abs(t - self.times[i + 1]) <= 1e-12 * max(1.0, abs(t)):
            return self._at(i + 1, points)
        ja, jb = self._at(i, points), self._at(i + 1, points)
        s = (t - self.times[i]) / (self.times[i + 1] - self.times[i])
        return (1 - s) * ja + s * jb

    def velocity(self, t, points):
        """(v, node_mask) for a batch of points; v is 0 where the mask is set."""
        j = self.current_at(t, np.atleast_2d(points))
        node = j[:, 0] <= self.node_threshold
        den = np.where(node, 1.0, j[:, 0])
        v = self.velocity_scale * self.physics.c * j[:, 1:] / den[:, None]
        v[node] = 0.0
        return v, node

    def scaled(self, factor: float) -> "FieldSeries":
        """Copy whose velocities are multiplied by ``factor`` (negative controls)."""
        out = object.__new__(FieldSeries)
        out.__dict__.update(self.__dict__)
        out.velocity_scale = self.velocity_scale * factor
        return out


def velocity_at(series: FieldSeries, t: float, x) -> NDArray[np.float64]:
    """Guiding velocity at one point; raises NodeRegionError below the density threshold."""
    v, node = series.velocity(t, np.asarray(x, float).reshape(1, 3))
    if node[0]:
        raise NodeRegionError(f"density below node threshold at t={t}, x={list(x)}")
    return v[0]


@dataclass(frozen=True)
class Trajectory:
    times: NDArray[np.float64]
    positions: NDArray[np.float64]
    velocities: NDArray[np.float64]
    flag: str


@dataclass(frozen=True)
class Ensemble:
    times: NDArray[np.float64]
    positions: NDArray[np.float64]  # (N, T, 3)
    velocities: NDArray[np.float64]  # (N, T, 3)
    flags: tuple
    seed: int | None = None

    def __len__(self):
        return self.positions.shape[0]

    @property
    def trajectories(self):
        return [Trajectory(self.times, self.positions[i], self.velocities[i], self.flags[i])
                for i in range(len(self))]

    @property
    def endpoints(self):
        return self.positions[:, -1]

    def max_speed(self):
        return float(np.max(np.linalg.norm(self.velocities, axis=-1), initial=0.0))


def _wrap(grid, x):
    return np.mod(x, np.asarray(grid.length))


def _rk4(series, t, x, h):
    k1, n1 = series.velocity(t, x)
    k2, n2 = series.velocity(t + h / 2, _wrap(series.grid, x + h / 2 * k1))
    k3, n3 = series.velocity(t + h / 2, _wrap(series.grid, x + h / 2 * k2))
    k4, n4 = series.velocity(t + h, _wrap(series.grid, x + h * k3))
    x_new = _wrap(series.grid, x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4))
    return x_new, n1 | n2 | n3 | n4


def _advance_one(series, t, x, dt):
    """Advance a single point by dt, halving on node hits; returns (x, ok, halvings)."""
    for level in range(1, MAX_HALVINGS + 1):
        nsub = 2**level
        h = dt / nsub
        y = x.copy()
        ok = True
        for s in range(nsub):
            y, node = _rk4(series, t + s * h, y, h)
            if node.any():
                ok = False
                break
        if ok:
            return y, True, level
    return x, False, MAX_HALVINGS


def integrate(series: FieldSeries, starts, dt: float, t0: float | None = None,
              t1: float | None = None, seed: int | None = None) -> Ensemble:
    """RK4 transport of ``starts`` (N, 3) from t0 to t1 with step dt.

    Node encounters trigger step halving (up to 8 times) for that trajectory
    only; trajectories that still hit a node stop and are flagged incomplete.
    """
    starts = np.atleast_2d(np.asarray(starts, float))
    t0 = series.t_start if t0 is None else float(t0)
    t1 = series.t_end if t1 is None else float(t1)
    if t1 < t0 or not dt > 0:
        raise ValidationError("need t1 >= t0 and dt > 0")
    nsteps = int(round((t1 - t0) / dt))
    if abs(nsteps * dt - (t1 - t0)) > 1e-9 * max(1.0, abs(t1)):
        raise ValidationError("(t1 - t0) must be an integer multiple of dt")
    N = len(starts)
    times = t0 + dt * np.arange(nsteps + 1)
    pos = np.empty((N, nsteps + 1, 3))
    vel = np.zeros((N, nsteps + 1, 3))
    x = _wrap(series.grid, starts.copy())
    pos[:, 0] = x
    alive = np.ones(N, bool)
    halved = np.zeros(N, bool)
    v, node = series.velocity(t0, x)
    vel[:, 0] = v
    for n in range(nsteps):
        t = times[n]
        idx = np.nonzero(alive)[0]
        x_new, node = _rk4(series, t, x[idx], dt)
        x[idx] = x_new
        for i in idx[node]:
            log.info("trajectory %d hit a node region at t=%.6g; halving step", i, t)
            xi, ok, _ = _advance_one(series, t, pos[i, n], dt)
            if ok:
                x[i] = xi
                halved[i] = True
            else:
                log.warning("trajectory %d flagged incomplete at t=%.6g", i, t)
                alive[i] = False
                x[i] = pos[i, n]
        pos[:, n + 1] = x
        v, _ = series.velocity(times[n + 1], x)
        v[~alive] = 0.0
        vel[:, n + 1] = v
    flags = tuple(FLAG_INCOMPLETE if not a else (FLAG_HALVED if hv else FLAG_OK)
                  for a, hv in zip(alive, halved))
    return Ensemble(times, pos, vel, flags, seed)


# --- sampling and equivariance -----------------------------------------------


def rho_grid(psi: PhotonField, X=None):
    return probability_current(psi, X).rho


def sample_rho(psi: PhotonField, n: int, seed: int, X=None, rho=None):
    """Exact samples from the piecewise-trilinear interpolant of rho.

    Cells are drawn with probability proportional to their largest corner
    value (the envelope), points uniformly inside, and accepted with
    probability rho(x) / envelope.
    """
    grid = psi.grid
    rho = rho_grid(psi, X) if rho is None else rho
    rho = np.clip(rho, 0.0, None)
    corners = np.stack([np.roll(rho, (-dx, -dy, -dz), axis=(0, 1, 2))
                        for dx in (0, 1) for dy in (0, 1) for dz in (0, 1)])
    env = corners.max(axis=0).ravel()
    if env.sum() <= 0:
        raise ValidationError("density vanishes identically")
    p = env / env.sum()
    rng = np.random.default_rng(seed)
    h = np.asarray(grid.spacing)
    out = []
    have = 0
    while have < n:
        m = max(1024, 2 * (n - have))
        cells = rng.choice(env.size, size=m, p=p)
        ijk = np.column_stack(np.unravel_index(cells, grid.n))
        pts = (ijk + rng.random((m, 3))) * h
        u = rng.random(m)
        val = trilinear(grid, rho, pts)
        acc = pts[u * env[cells] < val]
        out.append(acc)
        have += len(acc)
    return np.concatenate(out)[:n]


def marginal_cdf(grid: GridSpec, rho, axis: int):
    """CDF of the axis marginal of the trilinear interpolant of ``rho``."""
    n, h, L = grid.n[axis], grid.spacing[axis], grid.length[axis]
    other = tuple(a for a in range(3) if a != axis)
    m = np.clip(rho, 0, None).sum(axis=other)
    if n == 1:
        return lambda x: np.clip(np.asarray(x) / L, 0.0, 1.0)
    m_next = np.roll(m, -1)
    cell_mass = h * 0.5 * (m + m_next)
    cum = np.concatenate([[0.0], np.cumsum(cell_mass)])
    total = cum[-1]

    def cdf(x):
        x = np.mod(np.asarray(x, float), L)
        s = x / h
        i = np.minimum(np.floor(s).astype(int), n - 1)
        u = s - i
        part = h * (m[i] * u + 0.5 * (m_next[i] - m[i]) * u**2)
        return (cum[i] + part) / total

    return cdf


@dataclass(frozen=True)
class EquivarianceReport:
    ks_statistic: tuple
    ks_pvalue: tuple
    axes: tuple

    @property
    def min_pvalue(self):
        return min(self.ks_pvalue) if self.ks_pvalue else 1.0


def equivariance_stat(positions, psi: PhotonField, X=None, axes=None) -> EquivarianceReport:
    """Per-axis Kolmogorov-Smirnov comparison of positions against the marginals of rho(t).

    Degenerate axes (one grid point) are skipped unless requested.
    """
    positions = np.asarray(positions, float)
    rho = rho_grid(psi, X)
    if axes is None:
        axes = tuple(a for a in range(3) if psi.grid.n[a] > 1)
    stat, pval = [], []
    for a in axes:
        res = stats.kstest(positions[:, a], marginal_cdf(psi.grid, rho, a))
        stat.append(float(res.statistic))
        pval.append(float(res.pvalue))
    return EquivarianceReport(tuple(stat), tuple(pval), tuple(axes))
