"""Stress tensors, conserved currents and the photon probability current.

Tensor fields are stored with covariant indices in ``StressField.lower``
(shape ``grid + (4, 4)``); ``.upper`` and ``.mixed`` give the other index
placements.  Four-vector fields (currents) are stored contravariantly.

Time derivatives are taken from the full mode Hamiltonian, so every density
here is evaluated on the exact solution through the given snapshot.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from . import spectral
from .clifford import ETA, GAMMA, GAMMA5, GAMMA_LOWER, SIGMA, SIGMA_PRIME, dirac_adjoint, project_diag
from .dynamics import apply_hamiltonian
from .errors import NullTotalCurrent, ValidationError
from .field import PhotonField, disassemble



@dataclass(frozen=True)
class StressField:
    label: str
    lower: NDArray[np.float64]

    @property
    def upper(self):
        return np.einsum("ma,...ab,bn->...mn", ETA, self.lower, ETA)

    @property
    def mixed(self):
        """T^mu_nu."""
        return np.einsum("ma,...an->...mn", ETA, self.lower)


@dataclass(frozen=True)
class CurrentField:
    label: str
    upper: NDArray[np.float64]


@dataclass(frozen=True)
class ConservedSet:
    energy: float
    momentum: NDArray[np.float64]
    pi: NDArray[np.float64]
    norm: float

    @property
    def pi_square(self):
        return float(self.pi[0] ** 2 - np.sum(self.pi[1:] ** 2))


def integrate(psi: PhotonField, density):
    """Riemann sum over the periodic box (leading three axes)."""
    return np.sum(density, axis=(0, 1, 2)) * psi.grid.cell_volume


def spacetime_derivatives(psi: PhotonField):
    """d_mu psi for mu = 0..3 with d_0 = (1/c) d_t; shape (4,) + grid + (4, 4)."""
    hat = psi.fourier()
    kv = psi.grid.wave_vectors
    ph = psi.physics
    out = np.empty((4,) + hat.shape, complex)
    out[0] = spectral.ifft((-1j / (ph.hbar * ph.c)) * apply_hamiltonian(hat, kv, ph, "full"))
    for j in range(3):
        out[j + 1] = spectral.ifft(1j * kv[..., j, None, None] * hat)
    return out


def _tr(a, b):
    # tr(a b) over trailing 4x4 axes, broadcasting
    return np.einsum("...ab,...ba->...", a, b)


# --- Riesz tensor ------------------------------------------------------------


def riesz_tensor(psi: PhotonField) -> StressField:
    """tau_{mu nu} = 1/4 tr(bar(phi) g_mu phi g_nu) with phi = Pi psi."""
    phi = project_diag(psi.values)
    phibar = dirac_adjoint(phi)
    A = np.einsum("...ab,mbc->...mac", phibar, GAMMA_LOWER)
    B = np.einsum("...ab,nbc->...nac", phi, GAMMA_LOWER)
    tau = 0.25 * np.einsum("...mac,...nca->...mn", A, B)
    return StressField("tau", np.ascontiguousarray(tau.real))


def riesz_components(f_plus, f_minus):
    """tau^{mu nu} written through f+ and f- (contravariant)."""
    sq = 0.5 * (np.sum(np.abs(f_plus) ** 2, -1) + np.sum(np.abs(f_minus) ** 2, -1))
    out = np.empty(np.shape(sq) + (4, 4))
    out[..., 0, 0] = sq
    p = (np.cross(np.conj(f_plus), f_plus) + np.cross(np.conj(f_minus), f_minus)) / 2j
    out[..., 0, 1:] = p.real
    out[..., 1:, 0] = p.real
    outer = np.einsum("...j,...k->...jk", np.conj(f_plus), f_plus) + np.einsum(
        "...j,...k->...jk", np.conj(f_minus), f_minus)
    out[..., 1:, 1:] = -outer.real + sq[..., None, None] * np.eye(3)
    return out


def riesz_chiral_parts(psi: PhotonField):
    """(tau+^{mu nu}, tau-^{mu nu}) from the 2x2 blocks.

    tau+ = 1/4 tr(psi+^dag s'^mu psi+ s^nu), tau- = 1/4 tr(psi-^dag s^mu psi- s'^nu),
    where raising the index flips the spatial sign: s^mu = (s0, -s_k) and
    s'^mu = (s0, s_k).
    """
    pp, pm = psi.psi_plus, psi.psi_minus
    ppd = np.conj(np.swapaxes(pp, -1, -2))
    pmd = np.conj(np.swapaxes(pm, -1, -2))
    tp = 0.25 * np.einsum("...ab,mbc,...cd,nda->...mn", ppd, SIGMA, pp, SIGMA_PRIME)
    tm = 0.25 * np.einsum("...ab,mbc,...cd,nda->...mn", pmd, SIGMA_PRIME, pm, SIGMA)
    return tp.real, tm.real


def maxwell_tensor(f_lower):
    """T_M^{mu nu} = f^{mu l} f_l^nu + 1/4 eta^{mu nu} f_{ab} f^{ab}, so T^00 = (e^2 + b^2)/2."""
    fu = np.einsum("ma,...ab,bn->...mn", ETA, f_lower, ETA)
    f_mixed = np.einsum("lb,...bn->...ln", ETA, fu)  # f_l^nu
    inv = np.einsum("...ab,...ab->...", f_lower, fu)
    return np.einsum("...ml,...ln->...mn", fu, f_mixed) + 0.25 * ETA * inv[..., None, None]


# --- Noether stresses and Lagrangians ------------------------------------------


def _mass_scalar(psi: PhotonField):
    v = psi.values
    return _tr(dirac_adjoint(v), project_diag(v)).real


def _bilinear(left, D, gammas):
    """tr(left gammas[nu] D[mu]) as an array (..., mu, nu)."""
    lg = np.einsum("...ab,nbc->...nac", left, gammas)
    return np.einsum("...nac,m...ca->...mn", lg, D)


def noether_stresses(psi: PhotonField, D=None):
    """Canonical stresses T, T' and their symmetrizations Theta, Theta' (covariant)."""
    ph = psi.physics
    hc = ph.hbar * ph.c
    D = spacetime_derivatives(psi) if D is None else D
    v = psi.values
    N = _bilinear(dirac_adjoint(project_diag(v)), D, GAMMA_LOWER)
    M = _bilinear(dirac_adjoint(v), D, GAMMA_LOWER)
    mass = (ph.m_flash * ph.c**2 / (8 * np.pi)) * _mass_scalar(psi)[..., None, None] * ETA
    # (hc / 8 pi i)(X - conj X) = (hc / 4 pi) Im X, etc.
    T = (hc / (4 * np.pi)) * N.imag + mass
    Tp = (hc / (8 * np.pi)) * M.imag
    theta = (hc / (8 * np.pi)) * (N + np.swapaxes(N, -1, -2)).imag + mass
    thetap = (hc / (16 * np.pi)) * (M + np.swapaxes(M, -1, -2)).imag
    return {
        "T": StressField("T", T),
        "T_prime": StressField("T_prime", Tp),
        "theta": StressField("theta", theta),
        "theta_prime": StressField("theta_prime", thetap),
    }


def lagrangian_densities(psi: PhotonField, D=None):
    """Pointwise L' (vanishes on solutions) and the gauge-invariant L."""
    ph = psi.physics
    hc = ph.hbar * ph.c
    D = spacetime_derivatives(psi) if D is None else D
    v = psi.values
    vb = dirac_adjoint(v)
    pb = dirac_adjoint(project_diag(v))
    q = sum(_tr(vb @ GAMMA[m], D[m]) for m in range(4))
    qpi = sum(_tr(pb @ GAMMA[m], D[m]) for m in range(4))
    mass = ph.m_flash * ph.c**2 * _mass_scalar(psi)
    L_prime = (hc * q.imag + mass) / (8 * np.pi)
    L_gi = (2 * hc * qpi.imag + mass) / (8 * np.pi)
    return {"L_prime": L_prime, "L_gaugeinv": L_gi}


def energy_field_form(psi: PhotonField, with_divergence: bool = False):
    """Theta'^0_0 through the frame components, valid for real potentials.

    8 pi Theta'^0_0 = 4 m c^2 (e+.e- + b+.b-)
                      + 2 hbar c div(phi- e+ - a- x b+ + phi+ e- - a+ x b-)

    The divergence integrates to zero on the torus and is dropped unless
    ``with_divergence`` is set.  Pointwise agreement with the trace form
    requires the products to be alias-free on the grid.
    """
    c = disassemble(psi)
    ph = psi.physics
    dens = 4 * ph.m_flash * ph.c**2 * np.sum(c.e_plus * c.e_minus + c.b_plus * c.b_minus, axis=-1)
    if with_divergence:
        w = (c.phi_minus.real[..., None] * c.e_plus - np.cross(c.a_minus.real, c.b_plus)
             + c.phi_plus.real[..., None] * c.e_minus - np.cross(c.a_plus.real, c.b_minus))
        dens = dens + 2 * ph.hbar * ph.c * _spatial_divergence(psi.grid, w)
    return dens / (8 * np.pi)


# --- helicity current --------------------------------------------------------


def helicity_current(psi: PhotonField, a: float, b: float) -> CurrentField:
    """j_Z^mu = (1/16 pi) tr(bar(psi) g^mu psi G), G = a + i b gamma5."""
    v = psi.values
    G = a * np.eye(4) + 1j * b * GAMMA5
    vb = dirac_adjoint(v)
    j = np.stack([_tr(vb @ GAMMA[m], v @ G) for m in range(4)], axis=-1)
    return CurrentField("helicity_jZ", j.real / (16 * np.pi))


def helicity_density_blocks(psi: PhotonField, a: float, b: float):
    """Time component of j_Z written through the 2x2 blocks (cross terms of chi and psi).

    16 pi j_Z^0 = a tr(chi-^+ psi+ + psi+^+ chi- + chi+^+ psi- + psi-^+ chi+)
                + i b tr(chi-^+ psi+ - psi+^+ chi- + psi-^+ chi+ - chi+^+ psi-)
    """
    pp, pm, cp, cm = psi.psi_plus, psi.psi_minus, psi.chi_plus, psi.chi_minus

    def d(x):
        return np.conj(np.swapaxes(x, -1, -2))

    s1 = np.einsum("...aa->...", d(cm) @ pp + d(pp) @ cm + d(cp) @ pm + d(pm) @ cp)
    s2 = np.einsum("...aa->...", d(cm) @ pp - d(pp) @ cm + d(pm) @ cp - d(cp) @ pm)
    return ((a * s1 + 1j * b * s2) / (16 * np.pi)).real


def xi_divergence_density(psi: PhotonField, prefactor: float = 1 / (4 * np.pi)):
    """prefactor * (hbar/mc) div(a- x a+), computed spectrally."""
    c = disassemble(psi)
    ph = psi.physics
    w = np.cross(c.a_minus, c.a_plus)
    wh = spectral.fft(w)
    div = spectral.ifft(1j * np.einsum("...k,...k->...", psi.grid.wave_vectors, wh))
    return prefactor * ph.hbar / (ph.m_flash * ph.c) * div


def helicity_divergence(psi: PhotonField, a: float, b: float, D=None):
    """d_mu j_Z^mu by the product rule, with d_0 from the Hamiltonian."""
    D = spacetime_derivatives(psi) if D is None else D
    v = psi.values
    G = a * np.eye(4) + 1j * b * GAMMA5
    vb = dirac_adjoint(v)
    total = 0
    for m in range(4):
        total = total + _tr(dirac_adjoint(D[m]) @ GAMMA[m], v @ G) + _tr(vb @ GAMMA[m], D[m] @ G)
    return total.real / (16 * np.pi)


# --- conserved quantities ----------------------------------------------------


def inner_product(phi1: PhotonField, phi2: PhotonField):
    """<phi1|phi2> = sum tr(phi1^dag phi2) dV over the slice."""
    if phi1.grid != phi2.grid:
        raise ValidationError("inner product of fields on different grids")
    dens = np.einsum("...ab,...ab->...", np.conj(phi1.values), phi2.values)
    return complex(integrate(phi1, dens))


def conserved_set(psi: PhotonField, D=None) -> ConservedSet:
    st = noether_stresses(psi, D)
    thp = st["theta_prime"].lower
    tau = riesz_tensor(psi).upper
    phi = psi.diag()
    return ConservedSet(
        energy=float(integrate(psi, thp[..., 0, 0])),
        momentum=np.asarray(integrate(psi, thp[..., 0, 1:]), dtype=float),
        pi=np.asarray(integrate(psi, tau[..., 0, :]), dtype=float),
        norm=inner_product(phi, phi).real,
    )


def conserved_scales(psi: PhotonField, D=None) -> ConservedSet:
    """Integrals of the absolute densities; natural denominators for drift of each quantity."""
    st = noether_stresses(psi, D)
    thp = np.abs(st["theta_prime"].lower)
    tau = np.abs(riesz_tensor(psi).upper)
    phi = psi.diag()
    mom = float(integrate(psi, np.linalg.norm(thp[..., 0, 1:], axis=-1)))
    return ConservedSet(
        energy=float(integrate(psi, thp[..., 0, 0])),
        momentum=np.full(3, mom),
        pi=np.full(4, float(integrate(psi, tau[..., 0, 0]))),
        norm=inner_product(phi, phi).real,
    )


def relative_drift(values, scale):
    """max |v - v[0]| / max(max |v|, scale)."""
    v = np.asarray(values, float)
    den = max(float(np.max(np.abs(v), initial=0.0)), float(scale))
    return 0.0 if den == 0.0 else float(np.max(np.abs(v - v[0])) / den)


def pi_vector(psi: PhotonField):
    """pi^mu = sum tau^{0 mu} dV without the Noether stresses."""
    return np.asarray(integrate(psi, riesz_tensor(psi).upper[..., 0, :]), dtype=float)


def killing_X(pi, eps: float = 1e-8):
    """X = pi/|pi|^2; raises NullTotalCurrent unless |pi|^2 > eps (pi^0)^2."""
    if isinstance(pi, ConservedSet):
        pi = pi.pi
    pi = np.asarray(pi, dtype=float)
    sq = pi[0] ** 2 - np.sum(pi[1:] ** 2)
    if not pi[0] > 0 or sq <= eps * pi[0] ** 2:
        raise NullTotalCurrent(
            f"pi = {pi.tolist()} is null or not future timelike (|pi|^2 = {sq:.3e}); "
            "the current j = tau pi/|pi|^2 is undefined")
    return pi / sq


@dataclass(frozen=True)
class ProbabilityCurrent:
    """j^mu = tau^mu_nu X^nu; rho = j^0 (integrates to 1) and flux = c j^k."""

    j: CurrentField
    rho: NDArray[np.float64]
    flux: NDArray[np.float64]
    X: NDArray[np.float64]


def probability_current(psi: PhotonField, X=None, tau: StressField | None = None) -> ProbabilityCurrent:
    tau = riesz_tensor(psi) if tau is None else tau
    if X is None:
        X = killing_X(integrate(psi, tau.upper[..., 0, :]))
    j = np.einsum("...mn,n->...m", tau.mixed, np.asarray(X, float))
    return ProbabilityCurrent(CurrentField("probability_j", j), j[..., 0].copy(),
                              psi.physics.c * j[..., 1:], np.asarray(X, float))


def frame_currents(psi: PhotonField, tau: StressField | None = None):
    """R_(mu)^nu = tau^nu_mu: four conserved currents, one per frame vector."""
    tau = riesz_tensor(psi) if tau is None else tau
    m = tau.mixed
    return [CurrentField(f"R_{mu}", np.ascontiguousarray(m[..., :, mu])) for mu in range(4)]


def born_density(psi: PhotonField):
    """tr(phi^dag phi)/<phi|phi> with phi = Pi psi."""
    phi = psi.diag()
    dens = np.einsum("...ab,...ab->...", np.conj(phi.values), phi.values).real
    return dens / inner_product(phi, phi).real


def rho_frame_formula(psi: PhotonField):
    """(pi^0 tau^00 - pi.tau^0k)/|pi|^2, the density in terms of tau and pi."""
    tau = riesz_tensor(psi).upper
    pi = integrate(psi, tau[..., 0, :])
    sq = pi[0] ** 2 - np.sum(pi[1:] ** 2)
    return (pi[0] * tau[..., 0, 0] - np.einsum("k,...k->...", pi[1:], tau[..., 0, 1:])) / sq


@dataclass(frozen=True)
class ContinuityReport:
    linf: float
    l2: float
    times: NDArray[np.float64]


def _spatial_divergence(grid, flux):
    fh = spectral.fft(flux)
    return spectral.ifft(1j * np.einsum("...k,...k->...", grid.wave_vectors, fh)).real


def continuity_residual(series, dt: float | None = None, X=None, current=None) -> ContinuityReport:
    """Centered-difference d_t rho + spectral div(flux), normalized by max |d_t rho| scale.

    ``current`` maps a snapshot to ``(density, flux)``; the default is the
    probability current with a fixed X (computed from the first snapshot).
    """
    series = list(series)
    if len(series) < 3:
        raise ValidationError("continuity residual needs at least 3 snapshots")
    if dt is None:
        dt = series[1].time - series[0].time
    if current is None:
        if X is None:
            X = killing_X(pi_vector(series[0]))

        def current(s):
            pc = probability_current(s, X)
            return pc.rho, pc.flux

    vals = [current(s) for s in series]
    worst, acc, scale = 0.0, 0.0, 0.0
    count = 0
    for i in range(1, len(series) - 1):
        drho = (vals[i + 1][0] - vals[i - 1][0]) / (2 * dt)
        div = _spatial_divergence(series[i].grid, vals[i][1])
        r = drho + div
        worst = max(worst, float(np.max(np.abs(r))))
        acc += float(np.sum(r**2))
        count += r.size
        scale = max(scale, float(np.max(np.abs(div))))
    if scale == 0.0:
        return ContinuityReport(0.0 if worst == 0.0 else np.inf, 0.0 if worst == 0.0 else np.inf,
                                np.array([s.time for s in series]))
    return ContinuityReport(worst / scale, np.sqrt(acc / count) / scale, np.array([s.time for s in series]))


@dataclass(frozen=True)
class DominantEnergyReport:
    worst_margin: float
    worst_causal_margin: float
    samples: int

    def ok(self, tol=1e-12):
        return self.worst_margin >= -tol and self.worst_causal_margin >= -tol


def random_causal_vectors(n, rng, null_fraction=0.25):
    """Future-pointing causal vectors; a fraction of them null."""
    d = rng.normal(size=(n, 3))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    speed = rng.uniform(0, 1, size=n)
    speed[: int(null_fraction * n)] = 1.0
    t = rng.uniform(0.5, 2.0, size=n)
    return np.column_stack([t, (t * speed)[:, None] * d])


def dominant_energy_check(tau: StressField, n_samples: int = 100, seed: int = 0, X=None,
                          scale=None) -> DominantEnergyReport:
    """Worst-case X.tau.X and causal margin of (tau X) over sampled future-causal X.

    Margins are divided by ``scale`` (default max tau^00).  The causal margin
    for Y = tau^mu_nu X^nu is ``Y^0 - |Y|``; zero for the zero tensor.
    """
    Xs = np.atleast_2d(X) if X is not None else random_causal_vectors(n_samples, np.random.default_rng(seed))
    up = tau.upper
    mixed = tau.mixed
    if scale is None:
        scale = float(np.max(np.abs(up[..., 0, 0]), initial=0.0))
    if scale == 0.0:
        scale = 1.0
    worst, worst_c = np.inf, np.inf
    for x in Xs:
        xl = ETA @ x
        q = np.einsum("...mn,m,n->...", up, xl, xl)
        Y = np.einsum("...mn,n->...m", mixed, x)
        cm = Y[..., 0] - np.linalg.norm(Y[..., 1:], axis=-1)
        worst = min(worst, float(np.min(q)) / scale)
        worst_c = min(worst_c, float(np.min(cm)) / scale)
    return DominantEnergyReport(worst, worst_c, len(Xs))


def mode_tau(V):
    """tau^{mu nu} of a single 4x4 amplitude V (only its diagonal blocks matter)."""
    phi = project_diag(V)
    phibar = dirac_adjoint(phi)
    t = np.array([[0.25 * np.trace(phibar @ GAMMA_LOWER[m] @ phi @ GAMMA_LOWER[n]) for n in range(4)]
                  for m in range(4)]).real
    return ETA @ t @ ETA
