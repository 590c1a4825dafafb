"""Discrete spectral densities of the chain, their zeros, Ohmic fits and detuning.

The bath seen by a collective oscillator coordinate is characterized by
J(omega) = (pi/2m) sum_i (gbar_i^2 / wbar_i) delta(omega - wbar_i),
where gbar_i projects the coupling onto normal mode i of the effective
chain Hamiltonian (the bare chain plus the quadratic self-shift that
the interaction adds at the attachment sites).

Branches: "single" for edge attachments (centre of mass couples to
site N), "plus"/"minus" for the centre-of-mass / relative half-chains
of a symmetric attachment.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ValidationError
from .gaussian import NormalModes, diagonalize
from .model import (
    EdgePair,
    ModelParams,
    QuadraticModel,
    SingleEdge,
    SymmetricPair,
    build_bath,
    build_coupled,
    pm_transform,
    separation,
)

BRANCHES = ("single", "plus", "minus")


@dataclass(frozen=True)
class SpectralDensity:
    """Discrete line set {(wbar_i, w_i)} with kernel-smoothed sampling."""

    frequencies: np.ndarray
    weights: np.ndarray
    branch: str
    kernel_bandwidth: Optional[float] = None

    def __post_init__(self):
        freqs = np.asarray(self.frequencies, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if freqs.shape != weights.shape or freqs.ndim != 1:
            raise ValidationError("SpectralDensity: frequencies/weights mismatch")
        if np.any(freqs <= 0) or np.any(np.diff(freqs) < 0):
            raise ValidationError("SpectralDensity: frequencies must be positive ascending")
        if np.any(weights < -1e-15):
            raise ValidationError("SpectralDensity: weights must be >= 0")
        freqs.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "weights", np.maximum(weights, 0.0))

    @property
    def lines(self) -> list:
        return list(zip(self.frequencies.tolist(), self.weights.tolist()))

    def mean_spacing(self) -> float:
        f = self.frequencies
        return float((f[-1] - f[0]) / (f.size - 1))

    def line_bandwidths(self) -> np.ndarray:
        """Per-line smoothing width: the uniform kernel_bandwidth if set,
        otherwise 3x the local mode spacing (resolves structure near the
        band edge, where the mode density diverges)."""
        if self.kernel_bandwidth is not None:
            return np.full(self.frequencies.size, float(self.kernel_bandwidth))
        return 3.0 * np.gradient(self.frequencies)

    def smoothed(self, omega, bandwidth: Optional[float] = None) -> np.ndarray:
        """Gaussian-kernel smoothed J sampled at the given frequencies."""
        if bandwidth is not None:
            bw = np.full(self.frequencies.size, float(bandwidth))
        else:
            bw = self.line_bandwidths()
        omega = np.atleast_1d(np.asarray(omega, dtype=float))
        norm = 1.0 / (bw * math.sqrt(2.0 * math.pi))
        diff = (omega[:, None] - self.frequencies[None, :]) / bw[None, :]
        return np.exp(-0.5 * diff * diff) @ (norm * self.weights)


@dataclass(frozen=True)
class ZeroSet:
    """Closed-form zeros omega_E,k = omega_cut * sin(phi_k) of one branch."""

    branch: str
    ks: np.ndarray
    phis: np.ndarray
    zeros: np.ndarray


def _effective_chain(params: ModelParams, branch: str) -> QuadraticModel:
    """Chain-only model whose modes define the branch spectral density."""
    att = params.attachment
    if branch == "single":
        if not isinstance(att, (EdgePair, SingleEdge)):
            raise ValidationError("branch 'single' requires EdgePair or SingleEdge")
        bath = build_bath(params)
        K = bath.stiffness.copy()
        j = bath.index_of(("chain", params.N))
        # each attached oscillator adds gamma/2 * x_N^2
        K[j, j] += params.gamma * (2.0 if isinstance(att, EdgePair) else 1.0)
        return QuadraticModel(bath.masses.copy(), K, bath.labels, coupled=False)
    if branch in ("plus", "minus"):
        if not isinstance(att, SymmetricPair):
            raise ValidationError(f"branch '{branch}' requires a SymmetricPair attachment")
        split = pm_transform(build_coupled(params, coupled=True))
        half = split.plus if branch == "plus" else split.minus
        return QuadraticModel(
            half.masses[1:].copy(),
            half.stiffness[1:, 1:].copy(),
            half.labels[1:],
            coupled=False,
        )
    raise ValidationError(f"unknown branch {branch!r}; expected one of {BRANCHES}")


def effective_bath_modes(params: ModelParams, branch: str) -> NormalModes:
    """Normal modes of the effective chain for the given branch."""
    return diagonalize(_effective_chain(params, branch))


def coupling_vector(params: ModelParams, branch: str, modes: NormalModes) -> np.ndarray:
    """Site-space coupling of the collective oscillator coordinate."""
    c = np.zeros(modes.n_coordinates)
    if branch == "single":
        site = params.N
        g = params.gamma * (math.sqrt(2.0) if isinstance(params.attachment, EdgePair) else 1.0)
    else:
        site = params.attachment.s
        g = params.gamma
    c[modes.labels.index(("chain", site))] = g
    return c


def spectral_density(params: ModelParams, branch: str) -> SpectralDensity:
    """Discrete spectral density of the chain for one branch."""
    modes = effective_bath_modes(params, branch)
    c = coupling_vector(params, branch, modes)
    gbar = c @ modes.modes
    weights = (math.pi / (2.0 * params.m)) * gbar**2 / modes.frequencies
    return SpectralDensity(frequencies=modes.frequencies, weights=weights, branch=branch)


def closed_form_zeros(d: float, omega_cut: float) -> tuple:
    """Zeros of the plus/minus spectral densities for separation d (units of a).

    plus branch:  phi_k = (pi/(2d)) (2k - 1), k = 1..floor(d/2 + 1/4)
    minus branch: phi_k = pi k / d,           k = 1..floor(d/2 - 1/4)
    and omega_E,k = omega_cut * sin(phi_k).
    """
    d = float(d)
    if d <= 1.0:
        raise ValidationError("closed_form_zeros: separation must exceed one spacing")
    if omega_cut <= 0:
        raise ValidationError("closed_form_zeros: omega_cut must be > 0")
    k_plus = int(math.floor(d / 2.0 + 0.25))
    k_minus = int(math.floor(d / 2.0 - 0.25))
    ks_p = np.arange(1, k_plus + 1)
    ks_m = np.arange(1, k_minus + 1)
    phi_p = (math.pi / (2.0 * d)) * (2 * ks_p - 1)
    phi_m = math.pi * ks_m / d
    return (
        ZeroSet("plus", ks_p, phi_p, omega_cut * np.sin(phi_p)),
        ZeroSet("minus", ks_m, phi_m, omega_cut * np.sin(phi_m)),
    )


_ZERO_FLOOR = 0.25  # fraction of the median smoothed level


def locate_zeros_numeric(J: SpectralDensity, resolution: int = 4096) -> np.ndarray:
    """Frequencies where the smoothed density dips below a floor threshold.

    Scans the kernel-smoothed J on a uniform grid over the line support
    and returns interior local minima whose value is below 0.25 times
    the median smoothed level, refined by parabolic interpolation.
    Discrete line sets never vanish exactly; the kernel floor at a true
    zero shrinks as the chain grows.
    """
    if resolution < 16:
        raise ValidationError("locate_zeros_numeric: resolution too small")
    lo = float(J.frequencies[0])
    hi = float(J.frequencies[-1])
    bandwidths = J.line_bandwidths()
    guard = 3.0 * J.mean_spacing()
    grid = np.linspace(lo, hi, resolution)
    step = grid[1] - grid[0]
    if step > float(np.median(bandwidths)) / 3.0:
        warnings.warn(
            "grid step exceeds a third of the typical smoothing bandwidth; "
            "increase the resolution or the chain size",
            stacklevel=2,
        )
    sm = J.smoothed(grid)
    floor = _ZERO_FLOOR * float(np.median(sm))
    interior = (sm[1:-1] < sm[:-2]) & (sm[1:-1] < sm[2:]) & (sm[1:-1] < floor)
    idx = np.nonzero(interior)[0] + 1
    # keep clear of the band edges where the kernel tail dominates
    idx = idx[(grid[idx] > lo + guard) & (grid[idx] < hi - guard)]
    zeros = []
    for i in idx:
        y0, y1, y2 = sm[i - 1], sm[i], sm[i + 1]
        denom = y0 - 2.0 * y1 + y2
        shift = 0.5 * (y0 - y2) / denom if denom > 0 else 0.0
        zeros.append(grid[i] + shift * step)
    return np.asarray(zeros)


def ohmic_fit(J: SpectralDensity, window, n_bins: Optional[int] = None) -> tuple:
    """Least-squares slope of binned J against c*omega through the origin.

    Lines inside [window[0], window[1]] are accumulated into equal-width
    bins (value: weight sum over width, abscissa: mean line frequency);
    returns (slope, rms residual relative to the fit).
    """
    lo, hi = float(window[0]), float(window[1])
    if not lo < hi:
        raise ValidationError("ohmic_fit: empty window")
    mask = (J.frequencies >= lo) & (J.frequencies <= hi)
    n_in = int(np.count_nonzero(mask))
    if n_in < 20:
        raise ValidationError(f"ohmic_fit: only {n_in} modes in window, need >= 20")
    freqs = J.frequencies[mask]
    weights = J.weights[mask]
    if n_bins is None:
        n_bins = max(6, n_in // 12)
    edges = np.linspace(lo, hi, n_bins + 1)
    which = np.clip(np.searchsorted(edges, freqs, side="right") - 1, 0, n_bins - 1)
    width = edges[1] - edges[0]
    density = np.bincount(which, weights=weights, minlength=n_bins) / width
    counts = np.bincount(which, minlength=n_bins)
    occupied = counts > 0
    centers = np.bincount(which, weights=freqs, minlength=n_bins)[occupied] / counts[occupied]
    density = density[occupied]
    slope = float(np.dot(centers, density) / np.dot(centers, centers))
    fit = slope * centers
    residual = float(np.sqrt(np.mean((density - fit) ** 2) / np.mean(fit**2)))
    return slope, residual


def tune_epsilon(params: ModelParams, branch: str, k: int = 1) -> float:
    """Detuning that puts Omega_gamma on the k-th zero of the branch density.

    Solves sqrt(((1+eps)*omega0)^2 + gamma/M) = omega_E,k, i.e.
    eps = sqrt(omega_E^2 - gamma/M)/omega0 - 1.
    """
    if branch not in ("plus", "minus"):
        raise ValidationError("tune_epsilon: branch must be 'plus' or 'minus'")
    d = separation(params)
    if d is None:
        raise ValidationError("tune_epsilon requires a SymmetricPair attachment")
    omega_cut = math.sqrt(4.0 * params.kappa / params.m)
    plus, minus = closed_form_zeros(d / params.a, omega_cut)
    zero_set = plus if branch == "plus" else minus
    if not 1 <= k <= zero_set.ks.size:
        raise ValidationError(
            f"tune_epsilon: zero index {k} out of range 1..{zero_set.ks.size}"
        )
    omega_e = float(zero_set.zeros[k - 1])
    shifted = omega_e**2 - params.gamma / params.M
    if shifted <= 0:
        raise ValidationError(
            f"tune_epsilon: no real solution, omega_E^2 = {omega_e**2:.6g} <= gamma/M"
        )
    return math.sqrt(shifted) / params.omega0 - 1.0
