"""Complexified spacetime algebra as 4x4 complex matrices (Weyl representation).

Everything here is a pure function on numpy arrays. Functions that act on a
single algebra element also broadcast over leading axes, so a grid of
bispinors with shape ``(..., 4, 4)`` can be passed directly.

Conventions
-----------
* metric ``eta = diag(1, -1, -1, -1)``
* ``gamma^0 = [[0, 1], [1, 0]]``, ``gamma^k = [[0, -s_k], [s_k, 0]]``
* ``gamma5 = i g0 g1 g2 g3 = diag(1, -1)``
* Levi-Civita with ``eps_{0123} = -1`` (so ``eps^{0123} = +1``)
* a two-form is stored by its covariant components ``f_{mu nu}``; the
  electric/magnetic parts in a frame are ``f^{0k} = -e^k`` and
  ``(*f)^{0k} = -b^k``
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import ValidationError

CArray = NDArray[np.complex128]


def _frozen(a):
    a = np.array(a)
    a.setflags(write=False)
    return a


ETA = _frozen(np.diag([1.0, -1.0, -1.0, -1.0]))

# sigma_0 .. sigma_3
SIGMA = _frozen(
    np.array(
        [
            [[1, 0], [0, 1]],
            [[0, 1], [1, 0]],
            [[0, -1j], [1j, 0]],
            [[1, 0], [0, -1]],
        ],
        dtype=complex,
    )
)
# sigma'_mu = (sigma_0, -sigma_k)
SIGMA_PRIME = _frozen(np.concatenate([SIGMA[:1], -SIGMA[1:]]))

I2 = _frozen(np.eye(2, dtype=complex))
I4 = _frozen(np.eye(4, dtype=complex))
Z2 = np.zeros((2, 2), dtype=complex)


def _weyl_gammas():
    out = np.zeros((4, 4, 4), dtype=complex)
    out[0] = np.block([[Z2, I2], [I2, Z2]])
    for k in range(1, 4):
        out[k] = np.block([[Z2, -SIGMA[k]], [SIGMA[k], Z2]])
    return out


GAMMA = _frozen(_weyl_gammas())
GAMMA_LOWER = _frozen(np.einsum("mn,nab->mab", ETA, GAMMA))
GAMMA5 = _frozen(1j * GAMMA[0] @ GAMMA[1] @ GAMMA[2] @ GAMMA[3])
PI_PLUS = _frozen(0.5 * (I4 + GAMMA5))
PI_MINUS = _frozen(0.5 * (I4 - GAMMA5))
# alpha^k = gamma^0 gamma^k = blockdiag(s_k, -s_k)
ALPHA = _frozen(np.array([GAMMA[0] @ GAMMA[k] for k in range(1, 4)]))


def _levi_civita():
    eps = np.zeros((4, 4, 4, 4))
    for perm in itertools.permutations(range(4)):
        sign = np.linalg.det(np.eye(4)[list(perm)])
        eps[perm] = round(sign)
    return eps


# eps^{0123} = +1 (contravariant); the covariant one carries the opposite sign
EPS_UPPER = _frozen(_levi_civita())
EPS_LOWER = _frozen(-EPS_UPPER)


def gamma(mu: int) -> CArray:
    """Weyl-representation gamma^mu (read-only)."""
    if not isinstance(mu, (int, np.integer)) or not 0 <= mu <= 3:
        raise ValidationError(f"gamma index must be 0..3, got {mu!r}")
    return GAMMA[int(mu)]


def gamma5() -> CArray:
    return GAMMA5


def projections(sign: int) -> CArray:
    """Chiral projector (1 + sign*gamma5)/2."""
    if sign not in (1, -1):
        raise ValidationError(f"sign must be +1 or -1, got {sign!r}")
    return PI_PLUS if sign == 1 else PI_MINUS


def project_diag(psi: CArray) -> CArray:
    """Pi psi = Pi+ psi Pi+ + Pi- psi Pi-: keeps the two diagonal 2x2 blocks."""
    psi = np.asarray(psi)
    return PI_PLUS @ psi @ PI_PLUS + PI_MINUS @ psi @ PI_MINUS


def scalar_part(a: CArray):
    return np.trace(np.asarray(a), axis1=-2, axis2=-1) / 4


def dirac_adjoint(a: CArray) -> CArray:
    """bar(a) = gamma^0 a^dagger gamma^0."""
    a = np.asarray(a)
    return GAMMA[0] @ np.conj(np.swapaxes(a, -1, -2)) @ GAMMA[0]


def minkowski(x, y):
    """eta(x, y) with x, y of shape (..., 4); no complex conjugation."""
    x = np.asarray(x)
    y = np.asarray(y)
    return x[..., 0] * y[..., 0] - np.sum(x[..., 1:] * y[..., 1:], axis=-1)


def gamma_slash(x) -> CArray:
    """gamma(x) = gamma_mu x^mu for x of shape (..., 4)."""
    x = np.asarray(x)
    if x.shape[-1] != 4:
        raise ValidationError(f"four-vector needs a trailing axis of length 4, got {x.shape}")
    return np.einsum("...m,mab->...ab", x.astype(complex), GAMMA_LOWER)


def sigma_map(x) -> CArray:
    """sigma(x) = x^0 s_0 + x^k s_k."""
    x = np.asarray(x)
    return np.einsum("...m,mab->...ab", x.astype(complex), SIGMA)


def sigma_prime_map(x) -> CArray:
    """sigma'(x) = x^0 s_0 - x^k s_k."""
    x = np.asarray(x)
    return np.einsum("...m,mab->...ab", x.astype(complex), SIGMA_PRIME)


# --- two-forms -------------------------------------------------------------


def _check_two_form(f):
    f = np.asarray(f)
    if f.shape[-2:] != (4, 4):
        raise ValidationError(f"two-form needs trailing shape (4, 4), got {f.shape}")
    scale = max(float(np.max(np.abs(f), initial=0.0)), 1.0)
    if np.max(np.abs(f + np.swapaxes(f, -1, -2)), initial=0.0) > 1e-12 * scale:
        raise ValidationError("two-form components are not antisymmetric")
    return f


def raise_indices(f):
    """f^{mu nu} from f_{mu nu} (eta is diagonal, so this is an elementwise sign)."""
    return np.einsum("ma,...ab,bn->...mn", ETA, np.asarray(f), ETA)


def hodge_star(f):
    """(*f)_{mu nu} = 1/2 eps_{a b mu nu} f^{a b}."""
    f = _check_two_form(f)
    return 0.5 * np.einsum("abmn,...ab->...mn", EPS_LOWER, raise_indices(f))


def hodge_dual(f):
    """The duality map d(f) = i * (*f); an involution on two-forms."""
    return 1j * hodge_star(f)


def sd_asd_split(f):
    """Return (f + i*f, f - i*f); their mean is f."""
    d = hodge_dual(f)
    return f + d, f - d


def two_form_from_eb(e, b):
    """Covariant components f_{mu nu} with f_{0k} = e_k and f_{jk} = -eps_{jkl} b_l."""
    e = np.asarray(e)
    b = np.asarray(b)
    dtype = np.result_type(e, b, float)
    f = np.zeros(e.shape[:-1] + (4, 4), dtype=dtype)
    f[..., 0, 1:] = e
    f[..., 1:, 0] = -e
    f[..., 1, 2] = -b[..., 2]
    f[..., 2, 3] = -b[..., 0]
    f[..., 3, 1] = -b[..., 1]
    f[..., 2, 1] = b[..., 2]
    f[..., 3, 2] = b[..., 0]
    f[..., 1, 3] = b[..., 1]
    return f


def eb_from_two_form(f):
    """Inverse of :func:`two_form_from_eb`: returns (e, b) in the rest frame."""
    f = _check_two_form(f)
    e = np.array(f[..., 0, 1:])
    b = -np.stack([f[..., 2, 3], f[..., 3, 1], f[..., 1, 2]], axis=-1)
    return e, b


def Sigma_map(f) -> CArray:
    """Rank-two spinor of a two-form: (i/2) f^{mu nu} s_mu s'_nu summed over all mu, nu.

    Only the self-dual part contributes.  For f built from (e, b) this equals
    ``i sigma.(e + i b)``.
    """
    fu = raise_indices(_check_two_form(f))
    return 0.5j * np.einsum("...mn,mab,nbc->...ac", fu, SIGMA, SIGMA_PRIME)


def Sigma_prime_map(f) -> CArray:
    """(i/2) f^{mu nu} s'_mu s_nu; only the anti-self-dual part contributes."""
    fu = raise_indices(_check_two_form(f))
    return 0.5j * np.einsum("...mn,mab,nbc->...ac", fu, SIGMA_PRIME, SIGMA)


# --- Lorentz group ---------------------------------------------------------


@dataclass(frozen=True)
class LorentzPair:
    """A spinor representative L together with the vector transformation Lambda."""

    spin: CArray
    vector: NDArray[np.float64]

    def __post_init__(self):
        spin = _frozen(np.asarray(self.spin, dtype=complex))
        vector = _frozen(np.asarray(self.vector, dtype=float))
        if spin.shape != (4, 4) or vector.shape != (4, 4):
            raise ValidationError("LorentzPair needs 4x4 spin and vector matrices")
        object.__setattr__(self, "spin", spin)
        object.__setattr__(self, "vector", vector)

    def __matmul__(self, other: "LorentzPair") -> "LorentzPair":
        return LorentzPair(self.spin @ other.spin, self.vector @ other.vector)

    def inverse(self) -> "LorentzPair":
        return LorentzPair(np.linalg.inv(self.spin), np.linalg.inv(self.vector))

    @property
    def time_reversals(self) -> int:
        """Parity of the number of time reversals (sign of Lambda^0_0)."""
        return 0 if self.vector[0, 0] > 0 else 1


def _hermitian_coords(h):
    # real coordinates of a 2x2 Hermitian matrix
    return np.array([h[0, 0].real, h[0, 1].real, h[0, 1].imag, h[1, 1].real])


_SIGMA_COORDS = np.stack([_hermitian_coords(SIGMA[m]) for m in range(4)], axis=1)


def spin_rep(A) -> LorentzPair:
    """L_A = blockdiag(A, A^{-dagger}) and the Lambda with A s(x) A^+ = s(Lambda x)."""
    A = np.asarray(A, dtype=complex)
    if A.shape != (2, 2):
        raise ValidationError(f"spin matrix must be 2x2, got {A.shape}")
    if abs(np.linalg.det(A) - 1) >= 1e-10:
        raise ValidationError(f"spin matrix must have unit determinant, det = {np.linalg.det(A)}")
    a_inv_dag = np.conj(np.linalg.inv(A)).T
    spin = np.block([[A, Z2], [Z2, a_inv_dag]])
    lam = np.empty((4, 4))
    for mu in range(4):
        image = A @ SIGMA[mu] @ np.conj(A).T
        lam[:, mu] = np.linalg.solve(_SIGMA_COORDS, _hermitian_coords(image))
    return LorentzPair(spin, lam)


def parity_rep() -> LorentzPair:
    return LorentzPair(GAMMA[0], np.diag([1.0, -1.0, -1.0, -1.0]))


def time_rep() -> LorentzPair:
    spin = np.block([[Z2, -1j * I2], [1j * I2, Z2]])
    return LorentzPair(spin, np.diag([-1.0, 1.0, 1.0, 1.0]))


def identity_pair() -> LorentzPair:
    return LorentzPair(I4, np.eye(4))


def apply_lorentz(psi, L: LorentzPair) -> CArray:
    """L psi L^{-1}, broadcasting over leading axes of psi."""
    cond = np.linalg.cond(L.spin)
    if not np.isfinite(cond) or cond > 1e14:
        raise np.linalg.LinAlgError("Lorentz spin matrix is singular")
    return L.spin @ np.asarray(psi) @ np.linalg.inv(L.spin)


def random_sl2c(rng: np.random.Generator, scale: float = 1.0) -> CArray:
    """exp of a random traceless 2x2 matrix (rotation and boost parameters ~ scale)."""
    c = rng.normal(size=3) + 1j * rng.normal(size=3)
    X = 0.5 * scale * np.einsum("k,kab->ab", c, SIGMA[1:])
    # exact exponential of a traceless 2x2: X^2 = d I with d = -det X
    d = np.sqrt(-np.linalg.det(X) + 0j)
    sinc = 1.0 if abs(d) < 1e-300 else np.sinh(d) / d
    return np.cosh(d) * I2 + sinc * X


def random_lorentz_pair(rng: np.random.Generator, scale: float = 1.0,
                        improper: bool = True) -> LorentzPair:
    """A random group element; with ``improper`` P and T factors are mixed in."""
    out = spin_rep(random_sl2c(rng, scale))
    if improper:
        if rng.random() < 0.5:
            out = out @ parity_rep()
        if rng.random() < 0.5:
            out = out @ time_rep()
        out = out @ spin_rep(random_sl2c(rng, scale))
    return out


# --- basis expansion -------------------------------------------------------


def basis16() -> list[tuple[tuple[int, ...], CArray]]:
    """The 16 ordered products gamma^{i1}...gamma^{ik}, i1 < ... < ik."""
    out = []
    for k in range(5):
        for idx in itertools.combinations(range(4), k):
            m = I4.copy()
            for i in idx:
                m = m @ GAMMA[i]
            out.append((idx, m))
    return out


def dirac_adjoint_by_reversion(a) -> CArray:
    """Dirac adjoint via the basis expansion: conjugate coefficients, reverse products.

    Each basis element gamma^{i1}...gamma^{ik} maps to gamma^{ik}...gamma^{i1}.
    This is an independent route to :func:`dirac_adjoint`.
    """
    a = np.asarray(a, dtype=complex)
    basis = basis16()
    M = np.stack([m.reshape(-1) for _, m in basis], axis=1)
    coeff = np.linalg.solve(M, a.reshape(-1))
    out = np.zeros((4, 4), dtype=complex)
    for c, (idx, _) in zip(coeff, basis):
        m = I4.copy()
        for i in reversed(idx):
            m = m @ GAMMA[i]
        out += np.conj(c) * m
    return out
