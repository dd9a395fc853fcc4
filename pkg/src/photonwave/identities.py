"""Seeded numerical checks of the algebraic identities the package relies on.

Each check returns the worst residual over its samples; :func:`run_suite`
compares them against fixed tolerances.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .clifford import (
    ETA, GAMMA, GAMMA5, I4, Sigma_map, Sigma_prime_map, apply_lorentz, hodge_dual,
    minkowski, project_diag, random_lorentz_pair, random_sl2c, sigma_map, spin_rep,
)

N_SAMPLES = 100


@dataclass(frozen=True)
class IdentityResult:
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual) and self.residual <= self.tolerance)

    def to_dict(self):
        d = asdict(self)
        d["passed"] = self.passed
        return d


def _random_matrices(rng, n):
    return rng.normal(size=(n, 4, 4)) + 1j * rng.normal(size=(n, 4, 4))


def _random_two_forms(rng, n):
    a = rng.normal(size=(n, 4, 4)) + 1j * rng.normal(size=(n, 4, 4))
    return a - np.swapaxes(a, -1, -2)


def gamma_anticommutator(gammas=GAMMA) -> float:
    worst = 0.0
    for m in range(4):
        for n in range(4):
            ac = gammas[m] @ gammas[n] + gammas[n] @ gammas[m]
            worst = max(worst, float(np.max(np.abs(ac - 2 * ETA[m, n] * I4))))
    return worst


def gamma5_relations() -> float:
    worst = float(np.max(np.abs(GAMMA5 @ GAMMA5 - I4)))
    for m in range(4):
        worst = max(worst, float(np.max(np.abs(GAMMA5 @ GAMMA[m] + GAMMA[m] @ GAMMA5))))
    return worst


def gauge_projector_identity(rng) -> float:
    """gamma^mu (psi - Pi psi) = Pi(gamma^mu psi)."""
    psi = _random_matrices(rng, N_SAMPLES)
    off = psi - project_diag(psi)
    worst = 0.0
    for m in range(4):
        r = GAMMA[m] @ off - project_diag(GAMMA[m] @ psi)
        worst = max(worst, float(np.max(np.abs(r) / np.max(np.abs(psi), axis=(-2, -1), keepdims=True))))
    return worst


def projector_lorentz_commutation(rng) -> float:
    """Pi(L psi L^-1) = L Pi(psi) L^-1, relative to |L psi L^-1|."""
    worst = 0.0
    for psi in _random_matrices(rng, N_SAMPLES):
        L = random_lorentz_pair(rng)
        a = project_diag(apply_lorentz(psi, L))
        b = apply_lorentz(project_diag(psi), L)
        worst = max(worst, float(np.max(np.abs(a - b)) / np.max(np.abs(apply_lorentz(psi, L)))))
    return worst


def covering_map(rng) -> float:
    """A s(x) A^+ = s(Lambda x) with Lambda in O(1,3), for random A in SL(2,C)."""
    worst = 0.0
    for _ in range(N_SAMPLES):
        A = random_sl2c(rng)
        L = spin_rep(A)
        x = rng.normal(size=4)
        lhs = A @ sigma_map(x) @ np.conj(A).T
        rhs = sigma_map(L.vector @ x)
        scale = max(1.0, float(np.max(np.abs(lhs))))
        worst = max(worst, float(np.max(np.abs(lhs - rhs))) / scale)
        iso = L.vector.T @ ETA @ L.vector - ETA
        worst = max(worst, float(np.max(np.abs(iso))) / max(1.0, float(np.max(np.abs(L.vector))) ** 2))
    return worst


def gamma_transformation(rng) -> float:
    """L^-1 gamma^mu L = Lambda^mu_nu gamma^nu, including parity and time reversal."""
    worst = 0.0
    for _ in range(N_SAMPLES):
        L = random_lorentz_pair(rng)
        Li = np.linalg.inv(L.spin)
        lhs = np.einsum("ab,mbc,cd->mad", Li, GAMMA, L.spin)
        rhs = np.einsum("mn,nab->mab", L.vector, GAMMA)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))) / max(1.0, float(np.max(np.abs(rhs)))))
    return worst


def adjoint_invariance(rng) -> float:
    """L^+ g0 L = (-1)^T g0: Dirac-adjoint invariance up to the time-reversal sign."""
    worst = 0.0
    for _ in range(N_SAMPLES):
        L = random_lorentz_pair(rng)
        sign = -1.0 if L.time_reversals else 1.0
        r = np.conj(L.spin).T @ GAMMA[0] @ L.spin - sign * GAMMA[0]
        worst = max(worst, float(np.max(np.abs(r))) / max(1.0, float(np.max(np.abs(L.spin))) ** 2))
    return worst


def duality_identities(rng) -> float:
    """d is an involution; Sigma kills anti-self-dual and Sigma' kills self-dual forms."""
    f = _random_two_forms(rng, N_SAMPLES)
    d = hodge_dual(f)
    worst = float(np.max(np.abs(hodge_dual(d) - f)))
    worst = max(worst, float(np.max(np.abs(Sigma_map(f - d)))))
    worst = max(worst, float(np.max(np.abs(Sigma_prime_map(f + d)))))
    return worst


def minkowski_signature() -> float:
    e = np.eye(4)
    return float(max(abs(minkowski(e[m], e[n]) - ETA[m, n]) for m in range(4) for n in range(4)))


TOLERANCES = {
    "gamma_anticommutator": 0.0,
    "gamma5_relations": 0.0,
    "minkowski_signature": 0.0,
    "gauge_projector_identity": 1e-12,
    "projector_lorentz_commutation": 1e-12,
    "covering_map": 1e-10,
    "gamma_transformation": 1e-10,
    "adjoint_invariance": 1e-10,
    "duality_identities": 1e-12,
}


def run_suite(seed: int = 0, sabotage: bool = False) -> list[IdentityResult]:
    """All identities with a fixed seed.  ``sabotage`` perturbs gamma^1 (negative control)."""
    rng = np.random.default_rng(seed)
    gammas = GAMMA
    if sabotage:
        gammas = np.array(GAMMA)
        gammas[1] = gammas[1] * (1 + 1e-3)
    values = {
        "gamma_anticommutator": gamma_anticommutator(gammas),
        "gamma5_relations": gamma5_relations(),
        "minkowski_signature": minkowski_signature(),
        "gauge_projector_identity": gauge_projector_identity(rng),
        "projector_lorentz_commutation": projector_lorentz_commutation(rng),
        "covering_map": covering_map(rng),
        "gamma_transformation": gamma_transformation(rng),
        "adjoint_invariance": adjoint_invariance(rng),
        "duality_identities": duality_identities(rng),
    }
    return [IdentityResult(k, float(v), TOLERANCES[k]) for k, v in values.items()]
