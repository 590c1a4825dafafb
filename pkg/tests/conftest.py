"""Shared fixtures and independent numerical oracles.

The oracles here deliberately avoid the library's propagation and
symplectic-spectrum code paths: time evolution is checked against a
fixed-step RK4 integration of the linear equations of motion, and
symplectic eigenvalues against a generic dense eigensolver applied to
i*Omega*V.
"""

import numpy as np
import pytest
import scipy.linalg

import chainbath as cb


def rk4_propagator(mass_weighted_stiffness, t_final, steps, checkpoints=()):
    """Fixed-step RK4 for dS/dt = F S, F = [[0, I], [-K, 0]].

    Returns {t: S(t)} at the requested checkpoint times (which must lie
    on the step grid) plus t_final.
    """
    kmw = np.asarray(mass_weighted_stiffness, dtype=float)
    n = kmw.shape[0]
    S = np.eye(2 * n)
    dt = t_final / steps
    wanted = {round(t / dt) for t in checkpoints}
    out = {}

    def rhs(M):
        res = np.empty_like(M)
        res[:n] = M[n:]
        res[n:] = -kmw @ M[:n]
        return res

    for step in range(1, steps + 1):
        k1 = rhs(S)
        k2 = rhs(S + 0.5 * dt * k1)
        k3 = rhs(S + 0.5 * dt * k2)
        k4 = rhs(S + dt * k3)
        S = S + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if step in wanted:
            out[step * dt] = S.copy()
    out[t_final] = S
    return out


def interleaved_symplectic_form(n_modes=2):
    j = np.array([[0.0, 1.0], [-1.0, 0.0]])
    return scipy.linalg.block_diag(*([j] * n_modes))


def symplectic_spectrum_oracle(V, omega):
    """All symplectic eigenvalues via |eig(i Omega V)| (each appears twice)."""
    ev = np.linalg.eigvals(1j * omega @ V)
    return np.sort(np.abs(ev))[::2]


def random_symplectic(rng, n_coords, scale=0.3):
    """exp(Omega H) with H random symmetric; positions-then-momenta."""
    h = rng.standard_normal((2 * n_coords, 2 * n_coords)) * scale
    h = 0.5 * (h + h.T)
    return scipy.linalg.expm(cb.symplectic_form(n_coords) @ h)


def random_physical_covariance(rng, n_coords, pure=False, scale=0.3):
    s = random_symplectic(rng, n_coords, scale)
    nu = np.full(n_coords, 0.5) if pure else 0.5 + rng.exponential(0.4, n_coords)
    d = np.concatenate([nu, nu])
    v = (s * d) @ s.T
    return 0.5 * (v + v.T)


def random_model_params(rng):
    """Valid ModelParams with 2N <= 60 and a random attachment."""
    n_half = int(rng.integers(2, 31))
    kind = rng.integers(0, 3)
    if kind == 0:
        attachment = cb.EdgePair()
    elif kind == 1:
        attachment = cb.SymmetricPair(s=int(rng.integers(1, n_half + 1)))
    else:
        attachment = cb.SingleEdge()
    return cb.ModelParams(
        M=float(rng.uniform(0.5, 2.0)),
        m=float(rng.uniform(0.2, 2.0)),
        omega0=1.0,
        epsilon=float(rng.uniform(-0.5, 0.5)),
        kappa=float(rng.uniform(0.3, 2.0)),
        gamma=float(rng.uniform(0.0, 0.5)),
        omegaB=float(rng.uniform(0.4, 2.0)),
        N=n_half,
        attachment=attachment,
    )


@pytest.fixture
def fig2_params():
    """Canonical Ohmic edge configuration at desk scale."""
    return cb.ModelParams(N=150)


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)
