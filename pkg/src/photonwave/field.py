"""Photon wave function on a periodic grid.

The wave function is a 4x4 complex matrix per grid point, laid out in 2x2
blocks as::

    [[ psi+ , chi- ],
     [ chi+ , psi- ]]

with trace-free diagonal blocks ``psi+ = i s.(e+ + i b+)`` and
``psi- = -i s.(e- - i b-)``, and off-diagonal blocks ``chi+ = phi+ s0 - s.a+``,
``chi- = phi- s0 + s.a-`` built from the potentials.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
from numpy.typing import NDArray

from . import spectral
from .clifford import SIGMA, gamma_slash, project_diag
from .errors import ConstraintError, PreconditionError, ValidationError

TOL_TRACE = 1e-10


@dataclass(frozen=True)
class PhysicsConfig:
    hbar: float = 1.0
    c: float = 1.0
    m_flash: float = 1.0

    def __post_init__(self):
        for name in ("hbar", "c", "m_flash"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and np.isfinite(v) and v > 0):
                raise ValidationError(f"{name} must be a positive finite number, got {v!r}")
            object.__setattr__(self, name, float(v))

    def to_dict(self):
        return {"hbar": self.hbar, "c": self.c, "m_flash": self.m_flash}


@dataclass(frozen=True)
class GridSpec:
    """Periodic box with ``n`` points per axis; an axis with n = 1 is degenerate."""

    n: tuple[int, int, int]
    length: tuple[float, float, float] = (2 * np.pi, 2 * np.pi, 2 * np.pi)

    def __post_init__(self):
        n = tuple(int(v) for v in self.n)
        length = tuple(float(v) for v in self.length)
        if len(n) != 3 or len(length) != 3:
            raise ValidationError("grid needs three sizes and three lengths")
        if any(v < 1 for v in n):
            raise ValidationError(f"grid sizes must be >= 1, got {n}")
        if any(not np.isfinite(v) or v <= 0 for v in length):
            raise ValidationError(f"box lengths must be positive, got {length}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "length", length)

    @property
    def shape(self):
        return self.n

    @property
    def spacing(self):
        return tuple(L / n for L, n in zip(self.length, self.n))

    @property
    def cell_volume(self):
        return float(np.prod(self.spacing))

    @property
    def volume(self):
        return float(np.prod(self.length))

    @property
    def size(self):
        return int(np.prod(self.n))

    @cached_property
    def wave_vectors(self) -> NDArray[np.float64]:
        ks = [2 * np.pi * np.fft.fftfreq(n, d=h) for n, h in zip(self.n, self.spacing)]
        out = np.stack(np.meshgrid(*ks, indexing="ij"), axis=-1)
        out.setflags(write=False)
        return out

    @cached_property
    def coordinates(self) -> NDArray[np.float64]:
        xs = [np.arange(n) * h for n, h in zip(self.n, self.spacing)]
        out = np.stack(np.meshgrid(*xs, indexing="ij"), axis=-1)
        out.setflags(write=False)
        return out

    def to_dict(self):
        return {"n": list(self.n), "length": list(self.length)}


@dataclass(frozen=True)
class PhotonField:
    grid: GridSpec
    values: NDArray[np.complex128]
    time: float = 0.0
    physics: PhysicsConfig = field(default_factory=PhysicsConfig)

    def __post_init__(self):
        v = np.array(self.values, dtype=np.complex128)
        if v.shape != self.grid.n + (4, 4):
            raise ValidationError(f"field values must have shape {self.grid.n + (4, 4)}, got {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "time", float(self.time))

    @classmethod
    def zeros(cls, grid, physics=None, time=0.0):
        return cls(grid, np.zeros(grid.n + (4, 4), complex), time, physics or PhysicsConfig())

    @classmethod
    def from_fourier(cls, grid, values_hat, physics=None, time=0.0):
        return cls(grid, spectral.ifft(values_hat), time, physics or PhysicsConfig())

    def fourier(self):
        return spectral.fft(self.values)

    def with_values(self, values, time=None):
        return replace(self, values=values, time=self.time if time is None else time)

    def diag(self) -> "PhotonField":
        """Pi psi as a field (off-diagonal blocks zeroed)."""
        return self.with_values(project_diag(self.values))

    # blocks
    @property
    def psi_plus(self):
        return self.values[..., 0:2, 0:2]

    @property
    def psi_minus(self):
        return self.values[..., 2:4, 2:4]

    @property
    def chi_plus(self):
        return self.values[..., 2:4, 0:2]

    @property
    def chi_minus(self):
        return self.values[..., 0:2, 2:4]

    # linear structure
    def _check_compatible(self, other):
        if not isinstance(other, PhotonField):
            return NotImplemented
        if other.grid != self.grid:
            raise ValidationError("fields live on different grids")
        return None

    def __add__(self, other):
        bad = self._check_compatible(other)
        if bad is NotImplemented:
            return bad
        return self.with_values(self.values + other.values)

    def __sub__(self, other):
        bad = self._check_compatible(other)
        if bad is NotImplemented:
            return bad
        return self.with_values(self.values - other.values)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return self.with_values(scalar * self.values)

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values)


@dataclass(frozen=True)
class ComponentFields:
    e_plus: NDArray[np.float64]
    b_plus: NDArray[np.float64]
    e_minus: NDArray[np.float64]
    b_minus: NDArray[np.float64]
    phi_plus: NDArray[np.complex128]
    phi_minus: NDArray[np.complex128]
    a_plus: NDArray[np.complex128]
    a_minus: NDArray[np.complex128]

    @classmethod
    def zeros(cls, shape):
        shape = tuple(shape)
        r3 = lambda: np.zeros(shape + (3,))  # noqa: E731
        c3 = lambda: np.zeros(shape + (3,), complex)  # noqa: E731
        return cls(r3(), r3(), r3(), r3(), np.zeros(shape, complex), np.zeros(shape, complex), c3(), c3())

    @property
    def f_plus(self):
        return self.e_plus + 1j * self.b_plus

    @property
    def f_minus(self):
        return self.e_minus + 1j * self.b_minus


def _sdot(v):
    # s.v for v of shape (..., 3)
    return np.einsum("...k,kab->...ab", v, SIGMA[1:])


def _vec(block):
    # v with block = s.v + (scalar) s0: v_k = tr(s_k block)/2
    return 0.5 * np.einsum("kab,...ba->...k", SIGMA[1:], block)


def assemble(c: ComponentFields, grid: GridSpec, physics=None, time=0.0) -> PhotonField:
    shape = grid.n
    for name in ("e_plus", "b_plus", "e_minus", "b_minus", "a_plus", "a_minus"):
        if np.shape(getattr(c, name)) != shape + (3,):
            raise ValidationError(f"{name} must have shape {shape + (3,)}")
    for name in ("phi_plus", "phi_minus"):
        if np.shape(getattr(c, name)) != shape:
            raise ValidationError(f"{name} must have shape {shape}")
    for name in ("e_plus", "b_plus", "e_minus", "b_minus"):
        if np.iscomplexobj(getattr(c, name)) and np.any(np.imag(getattr(c, name))):
            raise ValidationError(f"{name} must be real")
    v = np.zeros(shape + (4, 4), complex)
    v[..., 0:2, 0:2] = 1j * _sdot(np.real(c.e_plus) + 1j * np.real(c.b_plus))
    v[..., 2:4, 2:4] = -1j * _sdot(np.real(c.e_minus) - 1j * np.real(c.b_minus))
    eye = SIGMA[0]
    v[..., 2:4, 0:2] = np.asarray(c.phi_plus)[..., None, None] * eye - _sdot(np.asarray(c.a_plus))
    v[..., 0:2, 2:4] = np.asarray(c.phi_minus)[..., None, None] * eye + _sdot(np.asarray(c.a_minus))
    return PhotonField(grid, v, time, physics or PhysicsConfig())


def trace_residual(values):
    """max |tr| over both diagonal blocks."""
    tp = np.trace(values[..., 0:2, 0:2], axis1=-2, axis2=-1)
    tm = np.trace(values[..., 2:4, 2:4], axis1=-2, axis2=-1)
    return float(max(np.max(np.abs(tp), initial=0.0), np.max(np.abs(tm), initial=0.0)))


def disassemble(psi: PhotonField, tol_trace: float = TOL_TRACE) -> ComponentFields:
    """Frame components of ``psi``; raises ConstraintError on non-trace-free diagonal blocks."""
    scale = float(np.max(np.abs(psi.values), initial=0.0))
    res = trace_residual(psi.values)
    if res > tol_trace * scale:
        raise ConstraintError(f"diagonal blocks are not trace-free: max |tr| = {res:.3e}", residual=res)
    f_plus = _vec(-1j * psi.psi_plus)
    g = _vec(1j * psi.psi_minus)  # e- - i b-
    cp, cm = psi.chi_plus, psi.chi_minus
    return ComponentFields(
        e_plus=f_plus.real.copy(),
        b_plus=f_plus.imag.copy(),
        e_minus=g.real.copy(),
        b_minus=-g.imag,
        phi_plus=0.5 * np.trace(cp, axis1=-2, axis2=-1),
        phi_minus=0.5 * np.trace(cm, axis1=-2, axis2=-1),
        a_plus=-_vec(cp),
        a_minus=_vec(cm),
    )


@dataclass(frozen=True)
class ValidationReport:
    trace_linf: float
    transversality_linf: float

    def ok(self, tol=1e-10):
        return self.trace_linf <= tol and self.transversality_linf <= tol


def block_vectors_hat(values_hat):
    """Fourier amplitudes (f+^, g^) of the diagonal blocks, g = conj(f-) as a field."""
    return _vec(-1j * values_hat[..., 0:2, 0:2]), _vec(1j * values_hat[..., 2:4, 2:4])


def transversality(kvec, vhat, floor_rel=1e-3):
    """max_k |k.v^| / max(|k||v^|, floor_rel * peak) over modes with k != 0.

    The floor keeps modes that carry only round-off from dominating the ratio.
    """
    kn = np.linalg.norm(kvec, axis=-1)
    size = kn * np.linalg.norm(vhat, axis=-1)
    peak = float(np.max(size, initial=0.0))
    if peak == 0.0:
        return 0.0
    num = np.abs(np.einsum("...k,...k->...", kvec, vhat))
    ratio = num / np.maximum(size, floor_rel * peak)
    return float(np.max(np.where(kn > 0, ratio, 0.0)))


def validate(psi: PhotonField) -> ValidationReport:
    fp, g = block_vectors_hat(psi.fourier())
    k = psi.grid.wave_vectors
    return ValidationReport(
        trace_linf=trace_residual(psi.values),
        transversality_linf=max(transversality(k, fp), transversality(k, g)),
    )


# --- gauge -------------------------------------------------------------------


def gauge_check(upsilon: PhotonField, branch: int = 1):
    """max_k |gamma(K) Y^(k)| / max |Y^| with K = (s|k|, k)."""
    yh = upsilon.fourier()
    kv = upsilon.grid.wave_vectors
    K = np.concatenate([branch * np.linalg.norm(kv, axis=-1)[..., None], kv], axis=-1)
    res = gamma_slash(K) @ yh
    kn = np.linalg.norm(kv, axis=-1)[..., None, None]
    scale = float(np.max(np.abs(yh) * np.maximum(kn, 1.0), initial=0.0))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(res)) / scale)


def gauge_transform(psi: PhotonField, upsilon: PhotonField, branch: int = 1, tol: float = 1e-8) -> PhotonField:
    """psi + (1 - Pi) Y for a generator Y solving the massless mode equation on ``branch``."""
    if upsilon.grid != psi.grid:
        raise ValidationError("gauge generator lives on a different grid")
    r = gauge_check(upsilon, branch)
    if r > tol:
        raise PreconditionError(f"gauge generator fails the massless mode equation: residual {r:.3e}")
    off = upsilon.values - project_diag(upsilon.values)
    return psi.with_values(psi.values + off)


def gauge_generator(grid: GridSpec, seed: int, cutoff: float, branch: int = 1, physics=None,
                    amplitude: float = 1.0, kind: str = "general") -> PhotonField:
    """Random Y with Y^(k) = gamma(K) Z(k); gamma(K)^2 = 0 for null K so the mode equation holds.

    ``kind="general"`` draws an arbitrary 4x4 Z per mode.  ``kind="scalar"``
    draws Z = lambda(k) * 1, which shifts (phi, a) by the four-gradient of a
    scalar: the electromagnetic gauge freedom.  Energy and momentum are
    invariant only under this subclass.
    """
    if kind not in ("general", "scalar"):
        raise ValidationError("kind must be 'general' or 'scalar'")
    rng = np.random.default_rng(seed)
    mask = spectral.low_pass_mask(grid, cutoff)
    kv = grid.wave_vectors
    if kind == "general":
        z = rng.normal(size=grid.n + (4, 4)) + 1j * rng.normal(size=grid.n + (4, 4))
    else:
        lam = rng.normal(size=grid.n) + 1j * rng.normal(size=grid.n)
        z = lam[..., None, None] * np.eye(4)
    z = z * mask[..., None, None]
    K = np.concatenate([branch * np.linalg.norm(kv, axis=-1)[..., None], kv], axis=-1)
    yh = gamma_slash(K) @ z
    norm = np.sqrt(np.sum(np.abs(yh) ** 2))
    if norm > 0:
        yh *= amplitude / norm
    return PhotonField.from_fourier(grid, yh, physics)


# --- constructors ------------------------------------------------------------


def _diag_from_vectors(fp_hat, g_hat):
    out = np.zeros(fp_hat.shape[:-1] + (4, 4), complex)
    out[..., 0:2, 0:2] = 1j * _sdot(fp_hat)
    out[..., 2:4, 2:4] = -1j * _sdot(g_hat)
    return out


def _with_offdiag(diag_hat, kv, branches, physics):
    out = np.zeros_like(diag_hat)
    for s in branches:
        d = spectral.branch_projector(kv, s) @ diag_hat
        out += d + spectral.offdiag_particular(d, kv, s, physics.hbar, physics.c, physics.m_flash)
    return out


def plane_wave_state(grid: GridSpec, k, chirality: int, polarization, with_potentials: bool = True,
                     branch: int | None = None, physics: PhysicsConfig | None = None) -> PhotonField:
    """Single-mode field ``V exp(i k.x)``.

    ``polarization`` is the amplitude of ``f+`` for chirality +1 and of
    ``g = conj(f-)`` (so that ``psi- = -i s.g``) for chirality -1.  It is
    projected orthogonal to k.  If ``branch`` is None the polarization must
    already have definite helicity, which fixes the frequency sign;
    otherwise it is projected onto the requested branch.
    """
    physics = physics or PhysicsConfig()
    kvec = np.asarray(k, dtype=float)
    if kvec.shape != (3,):
        raise ValidationError("k must be a 3-vector")
    idx = spectral.lattice_index(grid, kvec)
    if idx is None:
        raise ValidationError(f"k = {kvec.tolist()} is not on the grid's Fourier lattice")
    if not np.any(kvec):
        raise ValidationError("k = 0 carries no wave")
    if chirality not in (1, -1):
        raise ValidationError("chirality must be +1 or -1")
    pol = np.asarray(polarization, dtype=complex)
    khat = kvec / np.linalg.norm(kvec)
    pol = pol - khat * np.dot(khat, pol)
    if np.linalg.norm(pol) < 1e-14:
        raise ValidationError("polarization vanishes after removing its longitudinal part")
    zero = np.zeros(3, complex)
    mode = _diag_from_vectors(pol, zero) if chirality == 1 else _diag_from_vectors(zero, pol)
    kv = np.asarray(grid.wave_vectors[idx])
    parts = {s: spectral.branch_projector(kv, s) @ mode for s in (1, -1)}
    if branch is None:
        norms = {s: np.linalg.norm(p) for s, p in parts.items()}
        total = np.linalg.norm(mode)
        found = [s for s in (1, -1) if norms[-s] <= 1e-12 * total]
        if not found:
            raise ValidationError("polarization mixes both helicities; pass branch=+1 or -1")
        branch = found[0]
    elif branch not in (1, -1):
        raise ValidationError("branch must be +1, -1 or None")
    mode = parts[branch]
    if np.linalg.norm(mode) < 1e-14:
        raise ValidationError("polarization has no component on the requested branch")
    hat = np.zeros(grid.n + (4, 4), complex)
    hat[idx] = mode
    if with_potentials:
        hat[idx] += spectral.offdiag_particular(mode, kv, branch, physics.hbar, physics.c, physics.m_flash)
    return PhotonField.from_fourier(grid, hat, physics)


def random_field(seed: int, grid: GridSpec, spectrum_cutoff: float, branch: int | None = 1,
                 physics: PhysicsConfig | None = None, amplitude: float = 1.0,
                 symmetric: bool = False, with_potentials: bool = True) -> PhotonField:
    """Random transversal field with modes 0 < |k| <= spectrum_cutoff.

    ``branch`` selects positive (+1) or negative (-1) frequency content, or a
    mix of both (None).  With ``symmetric`` the per-branch block norms at k
    and -k are equalized, which makes the spatial part of pi vanish.
    ``amplitude`` is the root-mean-square Frobenius norm of the diagonal
    blocks.
    """
    physics = physics or PhysicsConfig()
    if branch not in (1, -1, None):
        raise ValidationError("branch must be +1, -1 or None")
    rng = np.random.default_rng(seed)
    kv = grid.wave_vectors
    mask = spectral.low_pass_mask(grid, spectrum_cutoff)
    khat, _ = spectral.unit(kv)

    def draw():
        v = (rng.normal(size=grid.n + (3,)) + 1j * rng.normal(size=grid.n + (3,))) * mask[..., None]
        return v - khat * np.einsum("...k,...k->...", khat, v)[..., None]

    diag = _diag_from_vectors(draw(), draw())
    branches = (1, -1) if branch is None else (branch,)
    parts = {s: spectral.branch_projector(kv, s) @ diag for s in branches}
    if symmetric:
        for s in branches:
            p = parts[s]
            for rows, cols in ((slice(0, 2), slice(0, 2)), (slice(2, 4), slice(2, 4))):
                blk = p[..., rows, cols]
                nk = np.linalg.norm(blk, axis=(-2, -1))
                nmk = np.roll(np.flip(nk, axis=(0, 1, 2)), 1, axis=(0, 1, 2))
                target = np.sqrt(0.5 * (nk**2 + nmk**2))
                scale = np.where(nk > 0, target / np.where(nk > 0, nk, 1.0), 0.0)
                p[..., rows, cols] = blk * scale[..., None, None]
    diag = sum(parts.values())
    norm = np.sqrt(np.sum(np.abs(diag) ** 2))
    if norm > 0:
        diag *= amplitude / norm
    hat = _with_offdiag(diag, kv, branches, physics) if with_potentials else diag
    return PhotonField.from_fourier(grid, hat, physics)


def potential_state(grid: GridSpec, seed: int, cutoff: float, physics: PhysicsConfig | None = None,
                    amplitude: float = 1.0) -> PhotonField:
    """Field built from real potentials in Lorenz gauge.

    Random real ``a(0)``, ``phi(0)`` and ``da/dt`` are drawn; the longitudinal
    part of ``da/dt`` is fixed by Gauss's law. Then
    ``e = (hbar/mc)(-grad phi - (1/c) da/dt)`` and ``b = (hbar/mc) curl a``
    for both chiralities.  Both branches are present.
    """
    physics = physics or PhysicsConfig()
    rng = np.random.default_rng(seed)
    kv = grid.wave_vectors
    mask = spectral.low_pass_mask(grid, cutoff)
    khat, _ = spectral.unit(kv)
    pref = physics.hbar / (physics.m_flash * physics.c)
    c = physics.c

    def real_hat(shape_tail):
        x = rng.normal(size=grid.n + shape_tail)
        h = spectral.fft(x)
        return h * mask.reshape(mask.shape + (1,) * len(shape_tail))

    comps = {}
    for tag in ("plus", "minus"):
        a = real_hat((3,))
        phi = real_hat(())
        adot = real_hat((3,))
        adot = adot - khat * np.einsum("...k,...k->...", khat, adot)[..., None]
        adot = adot - 1j * c * phi[..., None] * kv
        e = pref * (-1j * kv * phi[..., None] - adot / c)
        b = pref * 1j * np.cross(kv, a)
        # Lorenz gauge: (1/c) dphi/dt = -div a
        comps[tag] = dict(
            e=spectral.ifft(e).real, b=spectral.ifft(b).real,
            phi=spectral.ifft(phi).real.astype(complex), a=spectral.ifft(a).real.astype(complex),
        )
    p, m = comps["plus"], comps["minus"]
    cf = ComponentFields(p["e"], p["b"], m["e"], m["b"], p["phi"], m["phi"], p["a"], m["a"])
    psi = assemble(cf, grid, physics)
    scale = np.sqrt(np.mean(np.sum(np.abs(project_diag(psi.values)) ** 2, axis=(-2, -1))))
    return psi * (amplitude / scale) if scale > 0 else psi
