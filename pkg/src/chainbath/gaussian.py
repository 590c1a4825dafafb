"""Normal-mode diagonalization, Gaussian initial states and exact covariance evolution.

Covariance matrices are stored in dimensionless coordinates, obtained
by mass-weighting each position/momentum pair: X' = X*sqrt(m_j*omega0),
P' = P/sqrt(m_j*omega0) with hbar = omega0 = 1.  In these coordinates
the vacuum of a unit-frequency mode has variance 1/2 and the propagator
of a quadratic Hamiltonian is an orthogonal-conjugated trigonometric
block matrix.  Ordering is all positions, then all momenta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .entanglement import TwoModeCovariance
from .errors import NumericalError, ValidationError
from .model import QuadraticModel

_SINC_GUARD = 1e-6

_diagonalization_count = 0


def diagonalization_count() -> int:
    """Number of dense eigendecompositions performed since import."""
    return _diagonalization_count


@dataclass(frozen=True)
class NormalModes:
    """Eigenfrequencies and orthogonal mode matrix of a quadratic model.

    modes has the mass-weighted eigenvectors as columns, ordered by
    ascending frequency.  Instances are immutable and safe to share
    read-only across parallel workers.
    """

    frequencies: np.ndarray
    modes: np.ndarray
    mass_sqrt: np.ndarray
    labels: tuple

    def __post_init__(self):
        for name in ("frequencies", "modes", "mass_sqrt"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n_coordinates(self) -> int:
        return self.frequencies.size

    def system_indices(self) -> list:
        return [i for i, lab in enumerate(self.labels) if lab[0] == "system"]

    def chain_indices(self) -> list:
        return [i for i, lab in enumerate(self.labels) if lab[0] == "chain"]


def diagonalize(model: QuadraticModel) -> NormalModes:
    """Mass-weighted eigendecomposition of a positive-definite model."""
    global _diagonalization_count
    mw = model.mass_weighted_stiffness()
    evals, vecs = scipy.linalg.eigh(mw)
    _diagonalization_count += 1
    if evals[0] <= 0.0:
        raise NumericalError(
            f"stiffness matrix is not positive definite (min eigenvalue {evals[0]:.3e})"
        )
    return NormalModes(
        frequencies=np.sqrt(evals),
        modes=vecs,
        mass_sqrt=np.sqrt(model.masses),
        labels=model.labels,
    )


# ---------------------------------------------------------------------------
# covariance matrices and initial states


@dataclass(frozen=True)
class CovarianceMatrix:
    """Symmetric second-moment matrix of a zero-mean Gaussian state.

    data is 2n x 2n in dimensionless (mass-weighted) coordinates,
    ordered all positions then all momenta, with labels naming the n
    coordinates.
    """

    data: np.ndarray
    labels: tuple

    ordering = "positions-then-momenta"

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        n = len(self.labels)
        if data.shape != (2 * n, 2 * n):
            raise ValidationError("CovarianceMatrix: data must be 2n x 2n")
        data.flags.writeable = False
        object.__setattr__(self, "data", data)

    @property
    def n_coordinates(self) -> int:
        return len(self.labels)

    def position_block(self) -> np.ndarray:
        n = self.n_coordinates
        return self.data[:n, :n]

    def momentum_block(self) -> np.ndarray:
        n = self.n_coordinates
        return self.data[n:, n:]

    def cross_block(self) -> np.ndarray:
        n = self.n_coordinates
        return self.data[:n, n:]


@dataclass(frozen=True)
class InitialStateSpec:
    """Squeezing of the oscillators and temperature of the chain.

    r is the (real) squeezing parameter, identical for both oscillators:
    position variance exp(-2r)/2, momentum variance exp(+2r)/2.  T is
    the chain temperature in units of hbar*omega0/k_B.
    """

    r: float = 0.0
    T: float = 0.0

    def __post_init__(self):
        if self.T < 0:
            raise ValidationError("InitialStateSpec.T must be >= 0")


def thermal_coth(omega, temperature: float):
    """coth(omega/(2T)) with the T=0 limit equal to 1 exactly."""
    omega = np.asarray(omega, dtype=float)
    if temperature == 0.0:
        return np.ones_like(omega)
    return 1.0 / np.tanh(omega / (2.0 * temperature))


def thermal_mode_variances(frequencies, temperature: float):
    """Per-mode (position, momentum) variances of a thermal state."""
    c = thermal_coth(frequencies, temperature)
    return c / (2.0 * frequencies), 0.5 * frequencies * c


def initial_covariance(
    model_uncoupled: QuadraticModel,
    state: InitialStateSpec,
    bath_modes: NormalModes,
) -> CovarianceMatrix:
    """Product state: squeezed-vacuum oscillators, thermal chain.

    The chain block is the thermal covariance of the bare chain,
    diagonal in its normal modes and rotated back to site coordinates.
    """
    labels = model_uncoupled.labels
    n = len(labels)
    sys_idx = model_uncoupled.system_indices()
    chain_idx = model_uncoupled.chain_indices()
    chain_labels = tuple(labels[i] for i in chain_idx)
    if chain_labels != bath_modes.labels:
        raise ValidationError("bath_modes do not match the chain coordinates of the model")

    vq = np.zeros((n, n))
    vp = np.zeros((n, n))
    gx = 0.5 * math.exp(-2.0 * state.r)
    gp = 0.5 * math.exp(2.0 * state.r)
    for i in sys_idx:
        vq[i, i] = gx
        vp[i, i] = gp

    wq, wp = thermal_mode_variances(bath_modes.frequencies, state.T)
    Ob = bath_modes.modes
    rows = np.asarray(chain_idx)
    vq[np.ix_(rows, rows)] = (Ob * wq) @ Ob.T
    vp[np.ix_(rows, rows)] = (Ob * wp) @ Ob.T

    data = np.zeros((2 * n, 2 * n))
    data[:n, :n] = 0.5 * (vq + vq.T)
    data[n:, n:] = 0.5 * (vp + vp.T)
    return CovarianceMatrix(data=data, labels=labels)


# ---------------------------------------------------------------------------
# exact propagation


def _trig_factors(modes: NormalModes, t: float):
    w = modes.frequencies
    wt = w * t
    c = np.cos(wt)
    s = np.sin(wt)
    sw = np.where(np.abs(wt) < _SINC_GUARD, t, s / w)
    return c, sw, -w * s


def propagator(modes: NormalModes, t: float) -> np.ndarray:
    """Symplectic propagator S(t) in dimensionless coordinates."""
    O = modes.modes
    if t == 0.0:
        return np.eye(2 * modes.n_coordinates)
    c, sw, d = _trig_factors(modes, t)
    C = (O * c) @ O.T
    S = (O * sw) @ O.T
    D = (O * d) @ O.T
    n = modes.n_coordinates
    out = np.empty((2 * n, 2 * n))
    out[:n, :n] = C
    out[:n, n:] = S
    out[n:, :n] = D
    out[n:, n:] = C
    return out


def propagate(modes: NormalModes, V0: CovarianceMatrix, t: float) -> CovarianceMatrix:
    """V(t) = S(t) V0 S(t)^T with the exact trigonometric propagator."""
    if t < 0:
        raise ValidationError("propagate: t must be >= 0")
    if V0.labels != modes.labels:
        raise ValidationError("propagate: covariance and modes have different coordinates")
    S = propagator(modes, t)
    data = S @ V0.data @ S.T
    return CovarianceMatrix(data=0.5 * (data + data.T), labels=V0.labels)


def reduced_propagator_rows(modes: NormalModes, t: float) -> np.ndarray:
    """System rows of S(t), interleaved (X1, P1, X2, P2), shape 4 x 2n.

    V_sys(t) = R V0 R^T reproduces the system block of the full
    propagation at O(n^2) cost.
    """
    sys_idx = modes.system_indices()
    if len(sys_idx) != 2:
        raise ValidationError("reduced_propagator_rows requires two system oscillators")
    O = modes.modes
    c, sw, d = _trig_factors(modes, t)
    n = modes.n_coordinates
    rows = np.empty((4, 2 * n))
    for k, i in enumerate(sys_idx):
        o = O[i, :]
        oc = (o * c) @ O.T
        rows[2 * k, :n] = oc
        rows[2 * k, n:] = (o * sw) @ O.T
        rows[2 * k + 1, :n] = (o * d) @ O.T
        rows[2 * k + 1, n:] = oc
    return rows


def reduced_system_covariance(V: CovarianceMatrix) -> TwoModeCovariance:
    """Extract the 4x4 oscillator block, reordered to (X1, P1, X2, P2)."""
    sys_idx = [i for i, lab in enumerate(V.labels) if lab[0] == "system"]
    if len(sys_idx) != 2:
        raise ValidationError("reduced_system_covariance requires two system oscillators")
    n = V.n_coordinates
    order = [sys_idx[0], sys_idx[0] + n, sys_idx[1], sys_idx[1] + n]
    return TwoModeCovariance(V.data[np.ix_(order, order)].copy())


def mean_energy(model: QuadraticModel, V: CovarianceMatrix) -> float:
    """<H> = (1/2) tr(H_form V) for a zero-mean state."""
    if V.labels != model.labels:
        raise ValidationError("mean_energy: covariance and model have different coordinates")
    mw = model.mass_weighted_stiffness()
    return 0.5 * (float(np.sum(mw * V.position_block())) + float(np.trace(V.momentum_block())))


def symplectic_form(n: int) -> np.ndarray:
    """2n x 2n symplectic form [[0, I], [-I, 0]] for positions-then-momenta."""
    out = np.zeros((2 * n, 2 * n))
    out[:n, n:] = np.eye(n)
    out[n:, :n] = -np.eye(n)
    return out
