"""Fourier-lattice helpers and per-mode algebra shared by constructors and dynamics.

Fourier coefficients use ``norm="forward"``, so a plane wave ``V exp(i k.x)``
has coefficient exactly ``V`` at its lattice mode.
"""

from __future__ import annotations

import numpy as np

from .clifford import SIGMA, ALPHA, I4

AXES = (0, 1, 2)


def fft(values):
    return np.fft.fftn(values, axes=AXES, norm="forward")


def ifft(values_hat):
    return np.fft.ifftn(values_hat, axes=AXES, norm="forward")


def alpha_dot(kvec):
    """alpha.k = blockdiag(s.k, -s.k) for kvec of shape (..., 3)."""
    return np.einsum("...j,jab->...ab", kvec, ALPHA)


def unit(kvec):
    """k / |k| with zero where k = 0; also returns |k|."""
    kn = np.linalg.norm(kvec, axis=-1)
    safe = np.where(kn > 0, kn, 1.0)
    return kvec / safe[..., None], kn


def branch_projector(kvec, branch):
    """(1 + s alpha.khat)/2, a 4x4 projector per mode; the identity's half at k = 0."""
    khat, _ = unit(kvec)
    return 0.5 * (I4 + branch * alpha_dot(khat))


def branch_split(diag_hat, kvec):
    """Split block-diagonal mode data into its +/- frequency branches (left projection)."""
    return {s: branch_projector(kvec, s) @ diag_hat for s in (1, -1)}


def offdiag_particular(diag_hat, kvec, branch, hbar, c, m):
    """Minimal-norm off-diagonal blocks solving the mode equation on one branch.

    With K = (s|k|, k) the diagonal-block equations are
    ``s(K) C+ = (mc/hbar) P+`` and ``s'(K) C- = (mc/hbar) P-``.  Both
    matrices are rank one and null, and their pseudo-inverses are
    ``s(K)/(4|k|^2)`` and ``s'(K)/(4|k|^2)``.  Modes with k = 0 get zero.
    """
    _, kn = unit(kvec)
    k0 = branch * kn
    sk = np.einsum("...j,jab->...ab", kvec.astype(complex), SIGMA[1:])
    eye = np.broadcast_to(SIGMA[0], sk.shape)
    sK = k0[..., None, None] * eye + sk
    sKp = k0[..., None, None] * eye - sk
    denom = np.where(kn > 0, 4.0 * kn**2, np.inf)[..., None, None]
    coef = m * c / hbar
    out = np.zeros_like(diag_hat, dtype=complex)
    p_plus = diag_hat[..., 0:2, 0:2]
    p_minus = diag_hat[..., 2:4, 2:4]
    out[..., 2:4, 0:2] = coef * (sK @ p_plus) / denom
    out[..., 0:2, 2:4] = coef * (sKp @ p_minus) / denom
    return out


def lattice_index(grid, kvec, tol=1e-9):
    """Integer lattice index of a physical wave vector, or None if off-lattice."""
    idx = []
    for k, n, L in zip(kvec, grid.n, grid.length):
        m = k * L / (2 * np.pi)
        mi = int(round(m))
        if abs(m - mi) > tol or not (-(n // 2) <= mi <= (n - 1) // 2):
            return None
        idx.append(mi % n)
    return tuple(idx)


def low_pass_mask(grid, cutoff):
    """Modes with 0 < |k| <= cutoff, excluding Nyquist indices on even axes."""
    kn = np.linalg.norm(grid.wave_vectors, axis=-1)
    mask = (kn > 0) & (kn <= cutoff)
    for ax, n in enumerate(grid.n):
        if n % 2 == 0 and n > 1:
            sl = [slice(None)] * 3
            sl[ax] = n // 2
            mask[tuple(sl)] = False
    return mask
