"""Symplectic spectra, logarithmic negativity and phase classification.

Two-mode covariance matrices are 4x4 in the interleaved ordering
(X1, P1, X2, P2).  Entanglement between the two modes is measured by
the logarithmic negativity E_N = max(0, -ln(2 nu_minus~)) where
nu_minus~ is the smallest symplectic eigenvalue of the partially
transposed covariance matrix (momentum sign flip on mode 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import NonPhysicalStateError, ValidationError
from .model import DerivedQuantities

_PT = np.diag([1.0, 1.0, 1.0, -1.0])

_DISC_TOL = 1e-10


class PhaseLabel(str, Enum):
    SD = "SD"      # sudden death: eN_max < 0
    SDR = "SDR"    # sudden death and revival: eN_min < 0 < eN_max
    NSD = "NSD"    # no sudden death: eN_min > 0


@dataclass(frozen=True)
class TwoModeCovariance:
    """4x4 symmetric covariance matrix in (X1, P1, X2, P2) ordering."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.shape != (4, 4):
            raise ValidationError("TwoModeCovariance: data must be 4x4")
        data.flags.writeable = False
        object.__setattr__(self, "data", data)

    @property
    def A(self) -> np.ndarray:
        return self.data[:2, :2]

    @property
    def B(self) -> np.ndarray:
        return self.data[2:, 2:]

    @property
    def C(self) -> np.ndarray:
        return self.data[:2, 2:]


def _as_matrix(V) -> np.ndarray:
    if isinstance(V, TwoModeCovariance):
        return V.data
    M = np.asarray(V, dtype=float)
    if M.shape != (4, 4):
        raise ValidationError("expected a 4x4 covariance matrix")
    return M


def partial_transpose(V) -> TwoModeCovariance:
    """Momentum sign flip on mode 2; an involution."""
    M = _as_matrix(V)
    return TwoModeCovariance(_PT @ M @ _PT)


def symplectic_eigenvalues(V) -> tuple:
    """(nu_minus, nu_plus) of a 4x4 covariance matrix.

    nu_pm^2 = (Delta pm sqrt(Delta^2 - 4 det V))/2 with
    Delta = det A + det B + 2 det C; the smaller root is evaluated as
    det V / nu_plus^2 to avoid cancellation.
    """
    M = _as_matrix(V)
    if np.max(np.abs(M - M.T)) > 1e-8 * max(1.0, np.max(np.abs(M))):
        raise ValidationError("symplectic_eigenvalues: matrix is not symmetric")
    det_a = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    det_b = M[2, 2] * M[3, 3] - M[2, 3] * M[3, 2]
    det_c = M[0, 2] * M[1, 3] - M[0, 3] * M[1, 2]
    det_v = float(np.linalg.det(M))
    delta = det_a + det_b + 2.0 * det_c
    disc = delta * delta - 4.0 * det_v
    if disc < -_DISC_TOL:
        raise NonPhysicalStateError(
            f"non-physical covariance matrix: Delta^2 - 4 det V = {disc:.3e} < 0"
        )
    root = math.sqrt(max(disc, 0.0))
    nu_plus_sq = 0.5 * (delta + root)
    if det_v > 0.0 and nu_plus_sq > 0.0:
        nu_minus_sq = det_v / nu_plus_sq
    else:
        nu_minus_sq = 0.5 * (delta - root)
    if nu_minus_sq < -_DISC_TOL:
        raise NonPhysicalStateError(
            f"non-physical covariance matrix: nu_minus^2 = {nu_minus_sq:.3e} < 0"
        )
    return math.sqrt(max(nu_minus_sq, 0.0)), math.sqrt(max(nu_plus_sq, 0.0))


def log_negativity(V) -> tuple:
    """(E_N, eN): clamped logarithmic negativity and its unclamped value.

    eN = -ln(2 nu~_minus) can be negative; its sign drives the
    SD/SDR/NSD classification, while E_N = max(0, eN).
    """
    nu_minus, _ = symplectic_eigenvalues(partial_transpose(V))
    if nu_minus <= 0.0:
        raise NonPhysicalStateError("degenerate covariance matrix: nu~_minus = 0")
    e_n = -math.log(2.0 * nu_minus)
    return max(0.0, e_n), e_n


def pt_nu_minus_series(V: np.ndarray) -> np.ndarray:
    """Vectorized nu~_minus for an array of 4x4 covariance matrices (..., 4, 4)."""
    V = np.asarray(V, dtype=float)
    det_a = V[..., 0, 0] * V[..., 1, 1] - V[..., 0, 1] ** 2
    det_b = V[..., 2, 2] * V[..., 3, 3] - V[..., 2, 3] ** 2
    det_c = V[..., 0, 2] * V[..., 1, 3] - V[..., 0, 3] * V[..., 1, 2]
    det_v = np.linalg.det(V)
    if np.any(det_v <= 0.0):
        raise NonPhysicalStateError("non-physical covariance matrix: det V <= 0")
    delta = det_a + det_b - 2.0 * det_c  # partial transpose flips det C
    disc = delta * delta - 4.0 * det_v
    if np.any(disc < -_DISC_TOL):
        raise NonPhysicalStateError("non-physical covariance matrix in series")
    nu_plus_sq = 0.5 * (delta + np.sqrt(np.maximum(disc, 0.0)))
    return np.sqrt(det_v / nu_plus_sq)


def log_negativity_series(V: np.ndarray) -> np.ndarray:
    """Vectorized unclamped eN = -ln(2 nu~_minus) over (..., 4, 4)."""
    return -np.log(2.0 * pt_nu_minus_series(V))


# ---------------------------------------------------------------------------
# long-time window analysis


@dataclass(frozen=True)
class EntanglementTrace:
    """Sampled eN(t) over an analysis window, with its extrema."""

    times: np.ndarray
    eN: np.ndarray
    eN_min: float
    eN_max: float

    @classmethod
    def from_samples(cls, times, eN) -> "EntanglementTrace":
        times = np.asarray(times, dtype=float)
        eN = np.asarray(eN, dtype=float)
        return cls(times=times, eN=eN, eN_min=float(eN.min()), eN_max=float(eN.max()))

    def mean_clamped(self) -> float:
        """Window mean of E_N = max(0, eN); the contour-plot statistic."""
        return float(np.mean(np.maximum(self.eN, 0.0)))


def analyze_window(modes, V0, window, samples: int, derived: DerivedQuantities) -> EntanglementTrace:
    """Sample eN(t) on a uniform grid inside [t_a, t_b].

    The window must end before the revival time and the sampling
    density must resolve the 2*Omega_gamma oscillation with at least
    40 points per period pi/Omega_gamma.
    """
    from . import gaussian  # deferred: gaussian imports this module

    t_a, t_b = float(window[0]), float(window[1])
    if not 0.0 <= t_a < t_b:
        raise ValidationError("analyze_window: need 0 <= t_a < t_b")
    if t_b >= derived.t_rev:
        raise ValidationError(
            f"analyze_window: window end {t_b} must be below the revival time {derived.t_rev:.6g}"
        )
    period = math.pi / derived.Omega_gamma
    required = 40.0 * (t_b - t_a) / period
    if samples < required - 1e-9:
        raise ValidationError(
            f"analyze_window: {samples} samples below the minimum {math.ceil(required)}"
        )
    times = np.linspace(t_a, t_b, samples)
    stack = np.empty((samples, 4, 4))
    for i, t in enumerate(times):
        rows = gaussian.reduced_propagator_rows(modes, t)
        stack[i] = rows @ V0.data @ rows.T
    return EntanglementTrace.from_samples(times, log_negativity_series(stack))


def classify_phase(trace: EntanglementTrace, tol: float = 1e-8) -> PhaseLabel:
    """SD if eN_max < -tol, NSD if eN_min > tol, SDR otherwise."""
    if trace.times.size == 0:
        raise ValidationError("classify_phase: empty trace")
    if trace.eN_max < -tol:
        return PhaseLabel.SD
    if trace.eN_min > tol:
        return PhaseLabel.NSD
    return PhaseLabel.SDR


def squeezing_witness(
    dx2_plus: float, dp2_plus: float, r: float, derived: DerivedQuantities
) -> tuple:
    """Two-mode-squeezing entanglement witness on the stationary COM widths.

    Returns (ineq_I, ineq_II), both strict:
      (I)  dx2_plus < exp(+2|r - r_S|) / (2 eta)
      (II) dp2_plus < exp(-2|r - r_S|) * eta / 2
    Either one signals entanglement of the long-time state.
    """
    if dx2_plus <= 0 or dp2_plus <= 0:
        raise ValidationError("squeezing_witness: variances must be positive")
    gap = 2.0 * abs(r - derived.r_S)
    ineq_i = dx2_plus < math.exp(gap) / (2.0 * derived.eta)
    ineq_ii = dp2_plus < 0.5 * derived.eta * math.exp(-gap)
    return ineq_i, ineq_ii
