"""Quadratic models of two oscillators coupled to a pinned harmonic chain.

The chain has 2N particles at sites -N..-1, 1..N (no site 0) with
nearest-neighbour bonds of stiffness kappa, including a central bond
between sites -1 and 1, and harmonic pinning omegaB at the two edge
sites.  Each oscillator attaches to one chain site with strength gamma.

Natural units hbar = k_B = 1 throughout; the defaults additionally set
M = omega0 = a = 1, so times are in units of 1/omega0 and temperatures
in units of hbar*omega0/k_B.  Stiffness matrices are defined through
H = sum_i p_i^2/(2 m_i) + (1/2) q^T K q and are assembled exactly
symmetric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

from .errors import ValidationError

SQRT2 = math.sqrt(2.0)


# ---------------------------------------------------------------------------
# attachment geometries


@dataclass(frozen=True)
class EdgePair:
    """Both oscillators attached to the last chain site +N."""


@dataclass(frozen=True)
class SymmetricPair:
    """Oscillator 1 attached to site -s, oscillator 2 to site +s."""

    s: int


@dataclass(frozen=True)
class SingleEdge:
    """A single oscillator attached to site +N (Rubin reference case)."""


Attachment = Union[EdgePair, SymmetricPair, SingleEdge]

_ATTACHMENT_TAGS = {
    EdgePair: "edge_pair",
    SymmetricPair: "symmetric_pair",
    SingleEdge: "single_edge",
}


def attachment_to_dict(attachment: Attachment) -> dict:
    d = {"type": _ATTACHMENT_TAGS[type(attachment)]}
    if isinstance(attachment, SymmetricPair):
        d["s"] = attachment.s
    return d


def attachment_from_dict(data: dict) -> Attachment:
    if not isinstance(data, dict) or "type" not in data:
        raise ValidationError("attachment: expected an object with a 'type' field")
    tag = data["type"]
    if tag == "edge_pair":
        return EdgePair()
    if tag == "single_edge":
        return SingleEdge()
    if tag == "symmetric_pair":
        if "s" not in data:
            raise ValidationError("attachment: symmetric_pair requires field 's'")
        return SymmetricPair(s=int(data["s"]))
    raise ValidationError(f"attachment: unknown type {tag!r}")


# ---------------------------------------------------------------------------
# model parameters


@dataclass(frozen=True)
class ModelParams:
    """Physical constants, chain size and attachment geometry.

    Defaults are the canonical Ohmic configuration: m = M/2,
    kappa = M*omega0^2, omegaB = sqrt(2)*omega0, gamma = 0.1*M*omega0^2,
    for which the edge pinning matches the bond stiffness
    (m*omegaB^2 = kappa) and omega_cut = 2*sqrt(2)*omega0.
    """

    M: float = 1.0
    m: float = 0.5
    omega0: float = 1.0
    epsilon: float = 0.0
    kappa: float = 1.0
    gamma: float = 0.1
    omegaB: float = SQRT2
    N: int = 1250
    a: float = 1.0
    attachment: Attachment = field(default_factory=EdgePair)

    def __post_init__(self):
        for name in ("M", "m", "omega0", "kappa", "omegaB", "a"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"ModelParams.{name} must be > 0")
        if self.gamma < 0:
            raise ValidationError("ModelParams.gamma must be >= 0")
        if not isinstance(self.N, int) or self.N < 2:
            raise ValidationError("ModelParams.N must be an integer >= 2")
        if self.epsilon <= -1:
            raise ValidationError("ModelParams.epsilon must be > -1 (Omega > 0)")
        att = self.attachment
        if isinstance(att, SymmetricPair):
            if not isinstance(att.s, int) or not 1 <= att.s <= self.N:
                raise ValidationError("SymmetricPair.s must satisfy 1 <= s <= N")
        elif not isinstance(att, (EdgePair, SingleEdge)):
            raise ValidationError("ModelParams.attachment must be an Attachment")

    @property
    def Omega(self) -> float:
        return (1.0 + self.epsilon) * self.omega0

    @property
    def n_system(self) -> int:
        return 1 if isinstance(self.attachment, SingleEdge) else 2

    def attachment_sites(self) -> tuple:
        """Chain site index attached to each oscillator, in oscillator order."""
        att = self.attachment
        if isinstance(att, EdgePair):
            return (self.N, self.N)
        if isinstance(att, SymmetricPair):
            return (-att.s, att.s)
        return (self.N,)

    def to_dict(self) -> dict:
        return {
            "M": self.M,
            "m": self.m,
            "omega0": self.omega0,
            "epsilon": self.epsilon,
            "kappa": self.kappa,
            "gamma": self.gamma,
            "omegaB": self.omegaB,
            "N": self.N,
            "a": self.a,
            "attachment": attachment_to_dict(self.attachment),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ModelParams":
        if not isinstance(data, dict):
            raise ValidationError("model: expected a JSON object")
        known = {
            "M", "m", "omega0", "epsilon", "kappa", "gamma", "omegaB", "N", "a",
            "attachment",
        }
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"model: unknown field(s) {sorted(unknown)}")
        kwargs = {}
        for name in known - {"attachment", "N"}:
            if name in data:
                kwargs[name] = float(data[name])
        if "N" in data:
            kwargs["N"] = int(data["N"])
        if "attachment" in data:
            kwargs["attachment"] = attachment_from_dict(data["attachment"])
        return cls(**kwargs)

    def with_updates(self, **kwargs) -> "ModelParams":
        return replace(self, **kwargs)


# ---------------------------------------------------------------------------
# quadratic models


def chain_sites(N: int) -> list:
    return list(range(-N, 0)) + list(range(1, N + 1))


@dataclass(frozen=True)
class QuadraticModel:
    """Mass vector, symmetric stiffness matrix and coordinate labels.

    Labels are ("system", 1), ("system", 2) or ("chain", i) with i the
    signed chain site.  Arrays are frozen after construction; instances
    are safe to share read-only across parallel workers.
    """

    masses: np.ndarray
    stiffness: np.ndarray
    labels: tuple
    coupled: bool
    attachment: Optional[Attachment] = None

    def __post_init__(self):
        masses = np.asarray(self.masses, dtype=float)
        stiffness = np.asarray(self.stiffness, dtype=float)
        n = masses.size
        if stiffness.shape != (n, n) or len(self.labels) != n:
            raise ValidationError("QuadraticModel: inconsistent dimensions")
        masses.flags.writeable = False
        stiffness.flags.writeable = False
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "stiffness", stiffness)

    @property
    def n_coordinates(self) -> int:
        return self.masses.size

    def system_indices(self) -> list:
        return [i for i, lab in enumerate(self.labels) if lab[0] == "system"]

    def chain_indices(self) -> list:
        return [i for i, lab in enumerate(self.labels) if lab[0] == "chain"]

    def index_of(self, label) -> int:
        return self.labels.index(label)

    def mass_weighted_stiffness(self) -> np.ndarray:
        ms = np.sqrt(self.masses)
        return self.stiffness / np.outer(ms, ms)


def _chain_stiffness(params: ModelParams) -> np.ndarray:
    """Stiffness of the bare chain: bonds over consecutive sites plus edge pinning."""
    n = 2 * params.N
    K = np.zeros((n, n))
    kap = params.kappa
    for i in range(n - 1):
        K[i, i] += kap
        K[i + 1, i + 1] += kap
        K[i, i + 1] -= kap
        K[i + 1, i] -= kap
    pin = params.m * params.omegaB**2
    K[0, 0] += pin
    K[n - 1, n - 1] += pin
    return K


def build_bath(params: ModelParams) -> QuadraticModel:
    """Chain-only model: 2N sites, 2N-1 bonds (central bond included), pinned edges."""
    labels = tuple(("chain", i) for i in chain_sites(params.N))
    masses = np.full(2 * params.N, params.m)
    return QuadraticModel(masses, _chain_stiffness(params), labels, coupled=False)


def build_coupled(params: ModelParams, coupled: bool = True) -> QuadraticModel:
    """Oscillators plus chain; interaction terms included unless coupled=False."""
    n_sys = params.n_system
    n = n_sys + 2 * params.N
    labels = tuple(("system", k + 1) for k in range(n_sys)) + tuple(
        ("chain", i) for i in chain_sites(params.N)
    )
    masses = np.concatenate([np.full(n_sys, params.M), np.full(2 * params.N, params.m)])
    K = np.zeros((n, n))
    K[n_sys:, n_sys:] = _chain_stiffness(params)
    MOmega2 = params.M * params.Omega**2
    for k in range(n_sys):
        K[k, k] += MOmega2
    if coupled:
        sites = params.attachment_sites()
        site_index = {lab: i for i, lab in enumerate(labels)}
        for k, site in enumerate(sites):
            j = site_index[("chain", site)]
            K[k, k] += params.gamma
            K[j, j] += params.gamma
            K[k, j] -= params.gamma
            K[j, k] -= params.gamma
    return QuadraticModel(masses, K, labels, coupled=coupled, attachment=params.attachment)


# ---------------------------------------------------------------------------
# derived scalar quantities


@dataclass(frozen=True)
class DerivedQuantities:
    """Scalar quantities derived from the model constants.

    omega_cut   band edge of the chain dispersion, sqrt(4*kappa/m)
    Omega       oscillator frequency (1+epsilon)*omega0
    eta         frequency-shift factor sqrt(1 + gamma/(M*Omega^2))
    Omega_gamma shifted oscillator frequency eta*Omega
    r_S         squeezing that matches the shifted ground state, ln(eta)/2
    c_s         sound velocity omega_cut*a/2
    L           chain length 2*N*a
    t_rev       revival time L/c_s, the window bound for bath-like behaviour
    alpha       oscillator length sqrt(hbar/(M*omega0))
    d           oscillator separation (2s-1)*a for SymmetricPair, else None
    """

    omega_cut: float
    Omega: float
    eta: float
    Omega_gamma: float
    r_S: float
    c_s: float
    L: float
    t_rev: float
    alpha: float
    d: Optional[float] = None

    def to_dict(self) -> dict:
        out = {
            "omega_cut": self.omega_cut,
            "Omega": self.Omega,
            "eta": self.eta,
            "Omega_gamma": self.Omega_gamma,
            "r_S": self.r_S,
            "c_s": self.c_s,
            "L": self.L,
            "t_rev": self.t_rev,
            "alpha": self.alpha,
        }
        if self.d is not None:
            out["d"] = self.d
        return out


def separation(params: ModelParams) -> Optional[float]:
    """Physical distance between the two attachment sites.

    For SymmetricPair(s) the sites -s and +s are separated by 2s-1
    interparticle spacings (s-1 on each half plus the central bond), so
    d = (2s-1)*a.  This is the separation entering the closed-form
    spectral zeros.
    """
    if isinstance(params.attachment, SymmetricPair):
        return (2 * params.attachment.s - 1) * params.a
    return None


def derived_quantities(params: ModelParams) -> DerivedQuantities:
    omega_cut = math.sqrt(4.0 * params.kappa / params.m)
    Omega = params.Omega
    eta = math.sqrt(1.0 + params.gamma / (params.M * Omega**2))
    c_s = omega_cut * params.a / 2.0
    L = 2 * params.N * params.a
    return DerivedQuantities(
        omega_cut=omega_cut,
        Omega=Omega,
        eta=eta,
        Omega_gamma=eta * Omega,
        r_S=0.5 * math.log(eta),
        c_s=c_s,
        L=L,
        t_rev=L / c_s,
        alpha=1.0 / math.sqrt(params.M * params.omega0),
        d=separation(params),
    )


# ---------------------------------------------------------------------------
# centre-of-mass / relative split for symmetric attachments


@dataclass(frozen=True)
class PMSplit:
    """Result of the +/- coordinate transformation.

    transform is orthogonal and maps the original coordinate vector to
    the concatenation (plus coordinates, minus coordinates); the direct
    sum of the branch stiffness matrices equals
    transform @ K @ transform.T.
    """

    plus: QuadraticModel
    minus: QuadraticModel
    transform: np.ndarray


def pm_transform(model: QuadraticModel) -> PMSplit:
    """Split a SymmetricPair model into independent plus/minus branches.

    Branch coordinates are (X_pm, x_1^pm .. x_N^pm) with
    X_pm = (X_1 +- X_2)/sqrt(2) and x_i^pm = (x_i +- x_-i)/sqrt(2).
    The central bond becomes a pinning 2*kappa on x_1^- and leaves
    x_1^+ free; each branch couples to its own site s with magnitude
    gamma (opposite sign in the minus branch).
    """
    if not isinstance(model.attachment, SymmetricPair):
        raise ValidationError("pm_transform requires a SymmetricPair model")
    if len(model.system_indices()) != 2:
        raise ValidationError("pm_transform requires two system oscillators")
    chain = model.chain_indices()
    N = len(chain) // 2
    n = model.n_coordinates
    index = {lab: i for i, lab in enumerate(model.labels)}

    R = np.zeros((n, n))
    inv = 1.0 / SQRT2
    half = N + 1  # branch size
    R[0, index[("system", 1)]] = inv
    R[0, index[("system", 2)]] = inv
    R[half, index[("system", 1)]] = inv
    R[half, index[("system", 2)]] = -inv
    for i in range(1, N + 1):
        R[i, index[("chain", i)]] = inv
        R[i, index[("chain", -i)]] = inv
        R[half + i, index[("chain", i)]] = inv
        R[half + i, index[("chain", -i)]] = -inv

    K_new = R @ model.stiffness @ R.T
    K_new = 0.5 * (K_new + K_new.T)
    masses_new = model.masses[model.system_indices()[0]] * np.ones(half)
    masses_new[1:] = model.masses[chain[0]]
    labels = (("system", 1),) + tuple(("chain", i) for i in range(1, N + 1))

    plus = QuadraticModel(
        masses_new.copy(), K_new[:half, :half].copy(), labels, coupled=model.coupled
    )
    minus = QuadraticModel(
        masses_new.copy(), K_new[half:, half:].copy(), labels, coupled=model.coupled
    )
    return PMSplit(plus=plus, minus=minus, transform=R)
