"""Exact per-mode time evolution.

In Fourier space the evolution is ``i hbar d/dt psi^ = H(k) psi^`` with

* full:     ``H psi^ = hbar c (alpha.k) psi^ + m c^2 gamma0 Pi(psi^)``
* diagonal: ``H phi^ = hbar c (alpha.k) phi^`` (left multiplication)

Both satisfy ``H^2 = (hbar c |k|)^2``, so the propagator has the closed form
``cos(theta) - i sin(theta) H / E`` with ``E = hbar c |k|`` and
``theta = E dt / hbar``; at k = 0 this reduces to ``1 - i H dt / hbar``.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from . import spectral
from .clifford import GAMMA, project_diag
from .field import GridSpec, PhotonField, PhysicsConfig, transversality
from .errors import PreconditionError, ValidationError

log = logging.getLogger(__name__)

WHICH = ("full", "diagonal")


def worker_count() -> int:
    """Worker threads for mode loops; PHOTONWAVE_THREADS caps the default."""
    default = min(4, os.cpu_count() or 1)
    raw = os.environ.get("PHOTONWAVE_THREADS")
    if raw is None:
        return default
    try:
        return max(1, int(raw))
    except ValueError:
        log.warning("ignoring non-integer PHOTONWAVE_THREADS=%r", raw)
        return default


def _check_which(which):
    if which not in WHICH:
        raise ValidationError(f"which must be one of {WHICH}, got {which!r}")


def gamma0_pi(x):
    """gamma0 Pi(x): moves P+ into the chi+ slot and P- into the chi- slot."""
    out = np.zeros_like(x)
    out[..., 2:4, 0:2] = x[..., 0:2, 0:2]
    out[..., 0:2, 2:4] = x[..., 2:4, 2:4]
    return out


def apply_hamiltonian(x_hat, kvec, physics: PhysicsConfig, which="full"):
    """H(k) applied mode by mode to Fourier data of shape (..., 4, 4)."""
    out = physics.hbar * physics.c * (spectral.alpha_dot(kvec) @ x_hat)
    if which == "full":
        out = out + physics.m_flash * physics.c**2 * gamma0_pi(x_hat)
    return out


def time_derivative(psi: PhotonField, which="full"):
    """d psi/dt in position space, with the time derivative read off from H."""
    _check_which(which)
    hat = psi.fourier()
    dh = (-1j / psi.physics.hbar) * apply_hamiltonian(hat, psi.grid.wave_vectors, psi.physics, which)
    return spectral.ifft(dh)


@dataclass(frozen=True)
class ModeOperator:
    k: NDArray[np.float64]
    matrix: NDArray[np.complex128]
    which: str
    physics: PhysicsConfig

    @property
    def energy(self) -> float:
        return self.physics.hbar * self.physics.c * float(np.linalg.norm(self.k))


def mode_hamiltonian(k, which="full", physics: PhysicsConfig | None = None) -> ModeOperator:
    """16x16 matrix of H(k) on row-major flattened 4x4 data."""
    _check_which(which)
    physics = physics or PhysicsConfig()
    k = np.asarray(k, dtype=float)
    basis = np.eye(16, dtype=complex).reshape(16, 4, 4)
    cols = apply_hamiltonian(basis, np.broadcast_to(k, (16, 3)), physics, which)
    return ModeOperator(k, cols.reshape(16, 16).T.copy(), which, physics)


def propagator(h: ModeOperator, dt: float) -> NDArray[np.complex128]:
    """exp(-i H dt / hbar) in closed form."""
    if not np.isfinite(dt):
        raise ValidationError("dt must be finite")
    hbar = h.physics.hbar
    E = h.energy
    theta = E * dt / hbar
    # sin(theta)/E written through sinc so that k = 0 gives dt/hbar exactly
    b = (dt / hbar) * np.sinc(theta / np.pi)
    return np.cos(theta) * np.eye(16) - 1j * b * h.matrix


def expm_scaling_squaring(A, order: int = 18) -> NDArray[np.complex128]:
    """General matrix exponential by Taylor series with scaling and squaring."""
    A = np.asarray(A, dtype=complex)
    nrm = np.linalg.norm(A, 1)
    s = max(0, int(np.ceil(np.log2(nrm / 0.25))) if nrm > 0 else 0)
    X = A / 2**s
    term = np.eye(A.shape[0], dtype=complex)
    out = term.copy()
    for j in range(1, order + 1):
        term = term @ X / j
        out = out + term
    for _ in range(s):
        out = out @ out
    return out


@dataclass(frozen=True)
class EvolutionPlan:
    dt: float
    steps: int
    which: str = "full"
    grid: GridSpec | None = None

    def __post_init__(self):
        _check_which(self.which)
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ValidationError(f"dt must be positive, got {self.dt}")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValidationError(f"steps must be a positive integer, got {self.steps}")

    @property
    def total_time(self):
        return self.dt * self.steps


class Stepper:
    """Holds per-mode propagator coefficients and advances Fourier data in place."""

    def __init__(self, grid: GridSpec, physics: PhysicsConfig, dt: float, which="full", workers=None):
        _check_which(which)
        self.kvec = np.ascontiguousarray(grid.wave_vectors)
        self.physics = physics
        self.which = which
        theta = physics.c * np.linalg.norm(self.kvec, axis=-1) * dt
        self.cos = np.cos(theta)[..., None, None]
        self.coef = ((dt / physics.hbar) * np.sinc(theta / np.pi))[..., None, None]
        n0 = grid.n[0]
        w = max(1, min(workers or worker_count(), n0))
        edges = np.linspace(0, n0, w + 1).astype(int)
        self.chunks = [slice(a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a]
        self._pool = ThreadPoolExecutor(len(self.chunks)) if len(self.chunks) > 1 else None

    def _step_chunk(self, hat, sl):
        x = hat[sl]
        hx = apply_hamiltonian(x, self.kvec[sl], self.physics, self.which)
        hat[sl] = self.cos[sl] * x - 1j * self.coef[sl] * hx

    def step(self, hat):
        if self._pool is None:
            self._step_chunk(hat, slice(None))
        else:
            list(self._pool.map(lambda sl: self._step_chunk(hat, sl), self.chunks))
        return hat

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()


def evolve(psi: PhotonField, plan: EvolutionPlan, stride: int | None = None, callback=None):
    """Advance ``psi`` by ``plan.steps`` exact steps.

    Returns the snapshots at steps ``0, stride, 2*stride, ...`` plus the final
    step.  For ``which="diagonal"`` only ``Pi psi`` is evolved, so the
    returned fields have zero off-diagonal blocks.  If ``callback`` is given
    it receives each snapshot and nothing is accumulated.
    """
    if plan.grid is not None and plan.grid != psi.grid:
        raise ValidationError("field grid does not match the evolution plan grid")
    stride = plan.steps if stride is None else int(stride)
    if stride < 1:
        raise ValidationError("stride must be >= 1")
    hat = np.array(psi.fourier())
    if plan.which == "diagonal":
        hat = project_diag(hat)
    stepper = Stepper(psi.grid, psi.physics, plan.dt, plan.which)
    out = []

    def emit(n):
        snap = PhotonField.from_fourier(psi.grid, hat, psi.physics, psi.time + n * plan.dt)
        if callback is None:
            out.append(snap)
        else:
            callback(snap)

    try:
        emit(0)
        for n in range(1, plan.steps + 1):
            stepper.step(hat)
            if n % stride == 0 or n == plan.steps:
                emit(n)
    finally:
        stepper.close()
    return out


# --- residuals ---------------------------------------------------------------


def mode_equation_residual(omega, k, V, physics: PhysicsConfig | None = None):
    """(-hbar w/c) g0 V + hbar k_j g^j V + m c Pi V for psi = V exp(i(k.x - w t))."""
    physics = physics or PhysicsConfig()
    hb, c, m = physics.hbar, physics.c, physics.m_flash
    V = np.asarray(V, dtype=complex)
    k = np.asarray(k, dtype=float)
    out = (-hb * omega / c) * (GAMMA[0] @ V)
    for j in range(3):
        out = out + hb * k[..., j, None, None] * (GAMMA[j + 1] @ V)
    return out + m * c * project_diag(V)


@dataclass(frozen=True)
class ResidualReport:
    linf: float
    l2: float


def equation_residual(psi: PhotonField, branch: int = 1) -> ResidualReport:
    """Mode-equation residual with every mode taken on one frequency branch.

    Each mode is tested as ``V exp(i(k.x - w t))`` with ``w = branch * c|k|``,
    the frequency that H assigns to single-branch data.  Residuals are
    normalized by ``(hbar|k| + m c) |psi^(k)|``.
    """
    if branch not in (1, -1):
        raise ValidationError("branch must be +1 or -1")
    ph = psi.physics
    hat = psi.fourier()
    kv = psi.grid.wave_vectors
    kn = np.linalg.norm(kv, axis=-1)
    omega = (branch * ph.c * kn)[..., None, None]
    r = mode_equation_residual(omega, kv, hat, ph)
    rn = np.linalg.norm(r, axis=(-2, -1))
    scale = (ph.hbar * kn + ph.m_flash * ph.c) * np.linalg.norm(hat, axis=(-2, -1))
    smax = float(np.max(scale, initial=0.0))
    if smax == 0.0:
        return ResidualReport(0.0, 0.0)
    return ResidualReport(float(np.max(rn) / smax), float(np.sqrt(np.sum(rn**2) / np.sum(scale**2))))


# --- Maxwell oracle ----------------------------------------------------------


@dataclass(frozen=True)
class MaxwellState:
    grid: GridSpec
    e: NDArray[np.float64]
    b: NDArray[np.float64]
    time: float = 0.0


def maxwell_oracle_evolve(state: MaxwellState, dt: float, steps: int, c: float = 1.0, stride: int = 1):
    """Vacuum Maxwell evolution, exact per Fourier mode.

    ``de/dt = c curl b`` and ``db/dt = -c curl e``.  Each mode rotates in the
    transverse (e^, b^) plane:
    ``e(t) = cos(cKt) e0 + sin(cKt) (i k x b0)/K`` and
    ``b(t) = cos(cKt) b0 - sin(cKt) (i k x e0)/K``.
    """
    kv = state.grid.wave_vectors
    eh = spectral.fft(np.asarray(state.e, dtype=complex))
    bh = spectral.fft(np.asarray(state.b, dtype=complex))
    for name, vh in (("e", eh), ("b", bh)):
        r = transversality(kv, vh)
        if r > 1e-8:
            raise PreconditionError(f"initial {name} is not divergence-free (residual {r:.3e})")
    K = np.linalg.norm(kv, axis=-1)
    cs = np.cos(c * K * dt)[..., None]
    sn = np.where(K > 0, np.sin(c * K * dt) / np.where(K > 0, K, 1.0), 0.0)[..., None]
    real = not (np.iscomplexobj(state.e) or np.iscomplexobj(state.b))

    def snap(n):
        e = spectral.ifft(eh)
        b = spectral.ifft(bh)
        if real:
            e, b = e.real, b.real
        return MaxwellState(state.grid, e, b, state.time + n * dt)

    out = [snap(0)]
    for n in range(1, steps + 1):
        ce = 1j * np.cross(kv, eh)
        cb = 1j * np.cross(kv, bh)
        eh, bh = cs * eh + sn * cb, cs * bh - sn * ce
        if n % stride == 0 or n == steps:
            out.append(snap(n))
    return out


def klein_gordon_residual(psi: PhotonField, which="full") -> float:
    """max |H(H psi^)/(hbar c)^2 - |k|^2 psi^| relative to max |k|^2 |psi^|.

    Second time derivatives taken from H; zero means every component solves
    the massless wave equation.
    """
    _check_which(which)
    ph = psi.physics
    hat = psi.fourier()
    kv = psi.grid.wave_vectors
    h2 = apply_hamiltonian(apply_hamiltonian(hat, kv, ph, which), kv, ph, which) / (ph.hbar * ph.c) ** 2
    k2 = np.sum(kv**2, axis=-1)[..., None, None]
    scale = float(np.max(np.abs(k2 * hat), initial=0.0))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(h2 - k2 * hat)) / scale)


def dispersion_residual(grid: GridSpec, physics: PhysicsConfig, which="full"):
    """Worst ||H(k)^2 - (hbar c|k|)^2 1||/(hbar c|k|)^2 over k != 0, and max ||H(0)^2||.

    Built from the 16x16 mode matrices of every lattice vector.
    """
    _check_which(which)
    kv = grid.wave_vectors.reshape(-1, 3)
    basis = np.eye(16, dtype=complex).reshape(16, 4, 4)
    worst, nil = 0.0, 0.0
    for k in kv:
        cols = apply_hamiltonian(basis, np.broadcast_to(k, (16, 3)), physics, which)
        H = cols.reshape(16, 16).T
        E2 = (physics.hbar * physics.c) ** 2 * float(k @ k)
        r = np.linalg.norm(H @ H - E2 * np.eye(16), 2)
        if E2 > 0:
            worst = max(worst, r / E2)
        else:
            nil = max(nil, r)
    return float(worst), float(nil)
