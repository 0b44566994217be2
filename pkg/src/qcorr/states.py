"""The two-parameter family ρ(p, θ) and its closed-form correlation classes."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np
from scipy.optimize import minimize

EXCLUSION_HALF_WIDTH = 0.1
_QUARTER_TURNS = (0.0, math.pi / 2, math.pi, 3 * math.pi / 2, 2 * math.pi)


class CorrelationLabel(IntEnum):
    """Correlation class. Integer values double as class indices for the models."""

    SEPARABLE = 0
    ENTANGLED = 1
    ONE_WAY_STEERABLE = 2
    BELL_NONLOCAL = 3

    @property
    def roman(self) -> str:
        return ("I", "II", "III", "IV")[self.value]


class DegenerateThetaError(ValueError):
    pass


@dataclass(frozen=True)
class StateParams:
    p: float
    theta: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")


def make_state(p: float, theta: float) -> np.ndarray:
    """ρ(p, θ) = p|ψθ⟩⟨ψθ| + (1 - p) I/2 ⊗ ρ_B(θ), with |ψθ⟩ = cosθ|00⟩ + sinθ|11⟩."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    c, s = math.cos(theta), math.sin(theta)
    psi = np.array([c, 0.0, 0.0, s], dtype=complex)
    rho_b = np.diag([c * c, s * s]).astype(complex)
    return p * np.outer(psi, psi.conj()) + (1 - p) * np.kron(np.eye(2) / 2, rho_b)


def distance_to_degenerate(theta: float) -> float:
    """Distance from θ (mod 2π) to the nearest of 0, π/2, π, 3π/2."""
    t = theta % (2 * math.pi)
    return min(abs(t - q) for q in _QUARTER_TURNS)


def is_excluded(theta: float, half_width: float = EXCLUSION_HALF_WIDTH) -> bool:
    return distance_to_degenerate(theta) < half_width


def separable_bound() -> float:
    return 1.0 / 3.0


def steering_bound() -> float:
    return 1.0 / math.sqrt(2.0)


def nonlocal_bound(theta: float) -> float:
    return 1.0 / math.sqrt(1.0 + math.sin(2 * theta) ** 2)


def theoretical_label(
    p: float, theta: float, half_width: float = EXCLUSION_HALF_WIDTH
) -> CorrelationLabel:
    """Closed-form class of ρ(p, θ). Boundary points go to the lower class."""
    if is_excluded(theta, half_width):
        raise DegenerateThetaError(
            f"theta={theta} lies within {half_width} rad of a degenerate angle"
        )
    if p > nonlocal_bound(theta):
        return CorrelationLabel.BELL_NONLOCAL
    if p > steering_bound():
        return CorrelationLabel.ONE_WAY_STEERABLE
    if p <= separable_bound():
        return CorrelationLabel.SEPARABLE
    return CorrelationLabel.ENTANGLED


@dataclass(frozen=True)
class FitResult:
    p: float
    theta: float
    residual: float
    outside_family: bool
    theta_ill_determined: bool

    @property
    def params(self) -> StateParams:
        return StateParams(self.p, self.theta)


def _family_entries(p, theta):
    """Nonzero entries of ρ(p, θ): four diagonal terms and the |00⟩⟨11| coherence."""
    c2 = np.cos(theta) ** 2
    s2 = np.sin(theta) ** 2
    q = (1 - p) / 2
    diag = np.stack([p * c2 + q * c2, q * s2, q * c2, p * s2 + q * s2])
    coh = p * np.cos(theta) * np.sin(theta)
    return diag, coh


def _frobenius_sq(p, theta, rho):
    diag, coh = _family_entries(p, theta)
    d = np.real(np.diag(rho))
    out = sum((diag[k] - d[k]) ** 2 for k in range(4))
    # imaginary parts of the diagonal are zero for a Hermitian input
    out = out + np.abs(coh - rho[0, 3]) ** 2 + np.abs(coh - rho[3, 0]) ** 2
    mask = np.ones((4, 4), dtype=bool)
    np.fill_diagonal(mask, False)
    mask[0, 3] = mask[3, 0] = False
    return out + np.sum(np.abs(rho[mask]) ** 2)


def fit_parameters(
    rho,
    grid: int = 400,
    outside_tol: float = 0.2,
    p_floor: float = 1e-3,
) -> FitResult:
    """Least-squares (Frobenius) fit of (p, θ) to a two-qubit state.

    A ``grid x grid`` scan over p ∈ [0, 1], θ ∈ (0, π/2) is refined locally.
    The sign of the |00⟩⟨11| coherence then decides between θ and π - θ, so
    the returned θ lies in (0, π); θ + π describes the same state.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError("fit_parameters needs a 4x4 density matrix")
    flip = rho[0, 3].real < 0
    target = rho.copy()
    if flip:
        # θ -> π - θ flips the coherence sign only
        target[0, 3] = -target[0, 3]
        target[3, 0] = -target[3, 0]

    ps = np.linspace(0.0, 1.0, grid)
    thetas = (np.arange(grid) + 0.5) * (math.pi / 2) / grid
    P, T = np.meshgrid(ps, thetas, indexing="ij")
    d2 = _frobenius_sq(P, T, target)
    i, j = np.unravel_index(np.argmin(d2), d2.shape)

    def obj(x):
        return float(_frobenius_sq(x[0], x[1], target))

    res = minimize(
        obj,
        [ps[i], thetas[j]],
        method="L-BFGS-B",
        bounds=[(0.0, 1.0), (1e-9, math.pi / 2 - 1e-9)],
        options={"ftol": 1e-15, "gtol": 1e-12},
    )
    p_fit, theta_fit = float(res.x[0]), float(res.x[1])
    if obj(res.x) > d2[i, j]:
        p_fit, theta_fit = float(ps[i]), float(thetas[j])
    residual = math.sqrt(max(obj([p_fit, theta_fit]), 0.0))
    if flip:
        theta_fit = math.pi - theta_fit
    return FitResult(
        p=p_fit,
        theta=theta_fit,
        residual=residual,
        outside_family=residual > outside_tol,
        theta_ill_determined=p_fit < p_floor,
    )
