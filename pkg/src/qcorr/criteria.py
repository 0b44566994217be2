"""Exact correlation criteria for two-qubit states.

Entanglement via the partial-transpose spectrum, Bell nonlocality via the
Horodecki CHSH bound, and EPR steering via the two-setting steering radius:
the smallest achievable largest Bloch length over local-hidden-state
decompositions of the x/z assemblage.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .linalg import (
    I2,
    PAULIS,
    SIGMA_X,
    SIGMA_Z,
    DimensionError,
    min_eigenvalue,
    partial_transpose,
)
from .states import CorrelationLabel

PPT_TOL = 1e-9
NONLOCAL_TOL = 1e-12
STEERING_TOL = 1e-9
RADIUS_ANSWER_TOL = 1e-3
TRACE_FLOOR = 1e-12

SETTINGS = ("x", "z")
_SETTING_OPS = {"x": SIGMA_X, "z": SIGMA_Z}


class SteeringWarning(UserWarning):
    pass


def _two_qubit(rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise DimensionError(f"expected a two-qubit (4x4) state, got {rho.shape}")
    return rho


def ppt_min_eigenvalue(rho, dim_a: int = 2, dim_b: int = 2) -> float:
    """Smallest eigenvalue of ρ^{T_A}; negative means entangled (exact for 2x2, 2x3)."""
    return min_eigenvalue(partial_transpose(rho, dim_a, dim_b, "A"))


_PAULI_PAIRS = np.array([[np.kron(si, sj) for sj in PAULIS] for si in PAULIS])


def correlation_matrix(rho) -> np.ndarray:
    """T_ij = Tr[ρ σ_i ⊗ σ_j] for i, j in (x, y, z)."""
    rho = _two_qubit(rho)
    # Tr[ρ P] = sum_ab ρ_ab P_ba
    return np.einsum("ab,ijba->ij", rho, _PAULI_PAIRS).real


def horodecki_M(rho) -> float:
    """Sum of the two largest eigenvalues of TᵀT. The maximal CHSH value is 2√M."""
    t = correlation_matrix(rho)
    ev = np.linalg.eigvalsh(t.T @ t)
    return float(ev[-1] + ev[-2])


def max_chsh(rho) -> float:
    return 2.0 * math.sqrt(max(horodecki_M(rho), 0.0))


def chsh_fixed_settings(rho) -> float:
    """CHSH value for a0=σz, a0'=σx, b0=(σz-σx)/√2, b0'=(σz+σx)/√2."""
    rho = _two_qubit(rho)
    a0, a1 = SIGMA_Z, SIGMA_X
    b0 = (SIGMA_Z - SIGMA_X) / math.sqrt(2)
    b1 = (SIGMA_Z + SIGMA_X) / math.sqrt(2)

    def corr(a, b):
        return np.trace(rho @ np.kron(a, b)).real

    return float(corr(a0, b0) + corr(a0, b1) + corr(a1, b1) - corr(a1, b0))


@dataclass
class Assemblage:
    """Unnormalized conditional states on the steered side.

    ``members[n, k]`` is the operator prepared when the steering party measures
    setting ``SETTINGS[n]`` and obtains outcome ``k``.
    """

    members: np.ndarray
    steering_party: str

    def member(self, setting: str, outcome: int) -> np.ndarray:
        return self.members[SETTINGS.index(setting), outcome]

    def marginal(self, setting: str = "x") -> np.ndarray:
        n = SETTINGS.index(setting)
        return self.members[n, 0] + self.members[n, 1]

    def as_vectors(self) -> np.ndarray:
        """Members as real 4-vectors (trace, Bloch-vector part), shape (2, 2, 4)."""
        out = np.empty((2, 2, 4))
        for n in range(2):
            for k in range(2):
                m = self.members[n, k]
                out[n, k, 0] = np.trace(m).real
                out[n, k, 1:] = [np.trace(m @ s).real for s in PAULIS]
        return out


def _other(side: str) -> str:
    if side not in ("A", "B"):
        raise ValueError(f"side must be 'A' or 'B', got {side!r}")
    return "B" if side == "A" else "A"


def conditional_assemblage(rho, steering_party: str = "A") -> Assemblage:
    """σ_{κ|n} = Tr_S[ρ (Π_{κ|n} on the steering side S)] for n in {x, z}."""
    rho = _two_qubit(rho)
    t = rho.reshape(2, 2, 2, 2)
    members = np.empty((2, 2, 2, 2), dtype=complex)
    for n, name in enumerate(SETTINGS):
        for k in (0, 1):
            proj = 0.5 * (I2 + (-1) ** k * _SETTING_OPS[name])
            if steering_party == "A":
                members[n, k] = np.einsum("ij,jaib->ab", proj, t)
            elif steering_party == "B":
                members[n, k] = np.einsum("ij,ajbi->ab", proj, t)
            else:
                raise ValueError(f"steering_party must be 'A' or 'B', got {steering_party!r}")
    return Assemblage(members=members, steering_party=steering_party)


@dataclass
class LhsDecomposition:
    """Hidden-state operators τ_ij, i the answer to x and j the answer to z.

    Stored as real 4-vectors (trace, Bloch part) in ``vectors[i, j]``. Each τ
    carries weight Tr τ ≥ 0; its normalized Bloch vector may leave the unit ball,
    which is exactly what a radius above one certifies.
    """

    vectors: np.ndarray

    def operator(self, i: int, j: int) -> np.ndarray:
        t, x, y, z = self.vectors[i, j]
        return 0.5 * (t * I2 + x * PAULIS[0] + y * PAULIS[1] + z * PAULIS[2])

    def weights(self) -> np.ndarray:
        return self.vectors[..., 0].copy()

    def bloch_lengths(self) -> np.ndarray:
        t = self.vectors[..., 0]
        n = np.linalg.norm(self.vectors[..., 1:], axis=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(t > TRACE_FLOOR, n / np.where(t > 0, t, 1.0), np.inf)
        return np.where((t <= TRACE_FLOOR) & (n <= TRACE_FLOOR), 0.0, out)

    def constraint_residual(self, assemblage: Assemblage) -> float:
        """Largest deviation of the four marginal sums from the assemblage."""
        a = assemblage.as_vectors()
        v = self.vectors
        errs = [
            v[0, 0] + v[0, 1] - a[0, 0],
            v[1, 0] + v[1, 1] - a[0, 1],
            v[0, 0] + v[1, 0] - a[1, 0],
            v[0, 1] + v[1, 1] - a[1, 1],
        ]
        return float(max(np.max(np.abs(e)) for e in errs))


@dataclass
class SteeringResult:
    radius_a_to_b: float
    radius_b_to_a: float
    optimizer_residual: float
    decompositions: dict = field(default_factory=dict, repr=False)


# τ00 = x; τ01 = σ0|x - x; τ10 = σ0|z - x; τ11 = σ1|x - σ0|z + x
_SIGNS = np.array([1.0, -1.0, -1.0, 1.0])
_NORM_SMOOTHING = 1e-18


def _member_offsets(a: np.ndarray) -> np.ndarray:
    return np.array([np.zeros(4), a[0, 0], a[1, 0], a[0, 1] - a[1, 0]])


def _max_bloch_length(offsets: np.ndarray, x: np.ndarray) -> float:
    m = offsets + _SIGNS[:, None] * x
    t = m[:, 0]
    n = np.sqrt(np.sum(m[:, 1:] ** 2, axis=1))
    best = 0.0
    for tk, nk in zip(t, n):
        if tk > TRACE_FLOOR:
            best = max(best, nk / tk)
        elif nk > TRACE_FLOOR or tk < -TRACE_FLOOR:
            return math.inf
    return best


def _optimize_radius(assemblage: Assemblage, restarts: int = 4, seed: int = 0):
    """Minimize the largest hidden-state Bloch length over LHS decompositions.

    Solved in epigraph form, min r s.t. r Tr τ ≥ |v_τ| for all four τ (which
    also forces Tr τ ≥ 0), with SLSQP from a product-of-marginals start plus
    seeded perturbations that keep every weight positive. For fixed r the
    constraints are second-order cones, and the objective is quasi-convex, so
    restarts only guard against SLSQP stalling.
    """
    a = assemblage.as_vectors()
    offsets = _member_offsets(a)
    p0x, p0z = a[0, 0, 0], a[1, 0, 0]
    total = a[0, 0, 0] + a[0, 1, 0]
    start = np.array([p0x * p0z / total if total > TRACE_FLOOR else 0.0, 0.0, 0.0, 0.0])
    scale = max(min(p0x, p0z, a[0, 1, 0], a[1, 1, 0]), 1e-3) * 0.25

    def cons(z):
        m = offsets + _SIGNS[:, None] * z[:4]
        norms = np.sqrt(np.sum(m[:, 1:] ** 2, axis=1) + _NORM_SMOOTHING)
        return z[4] * m[:, 0] - norms

    def cons_jac(z):
        m = offsets + _SIGNS[:, None] * z[:4]
        norms = np.sqrt(np.sum(m[:, 1:] ** 2, axis=1) + _NORM_SMOOTHING)
        jac = np.empty((4, 5))
        jac[:, 0] = z[4] * _SIGNS
        jac[:, 1:4] = -m[:, 1:] * _SIGNS[:, None] / norms[:, None]
        jac[:, 4] = m[:, 0]
        return jac

    grad = np.array([0.0, 0.0, 0.0, 0.0, 1.0])
    rng = np.random.default_rng(seed)
    best_val, best_x, best_gap = _max_bloch_length(offsets, start), start, math.inf
    for k in range(restarts):
        x0 = start
        if k:
            step = rng.normal(scale=scale, size=4)
            # halve the perturbation until every hidden weight stays positive
            for _ in range(30):
                if math.isfinite(_max_bloch_length(offsets, start + step)):
                    x0 = start + step
                    break
                step = step / 2
        r0 = _max_bloch_length(offsets, x0)
        z0 = np.append(x0, r0 if math.isfinite(r0) else 10.0)
        res = minimize(
            lambda z: z[4],
            z0,
            jac=lambda z: grad,
            method="SLSQP",
            bounds=[(None, None)] * 4 + [(0.0, None)],
            constraints=[{"type": "ineq", "fun": cons, "jac": cons_jac}],
            options={"ftol": 1e-12, "maxiter": 300},
        )
        x = res.x[:4]
        val = _max_bloch_length(offsets, x)
        if val < best_val:
            best_val, best_x = val, x
            best_gap = abs(val - abs(res.x[4])) if math.isfinite(val) else math.inf
    if not math.isfinite(best_val):
        # fall back to the feasible starting point
        best_x = start
        best_val = _max_bloch_length(offsets, start)
        best_gap = math.inf
    members = offsets + _SIGNS[:, None] * best_x
    decomposition = LhsDecomposition(vectors=members.reshape(2, 2, 4))
    weight_violation = max(0.0, -float(members[:, 0].min()))
    residual = max(best_gap, weight_violation, decomposition.constraint_residual(assemblage))
    return float(best_val), decomposition, float(residual)


def steering_radius(rho, direction: str = "A->B", restarts: int = 4) -> float:
    """Two-setting (x, z) steering radius; above one means steerable in ``direction``."""
    party = _parse_direction(direction)
    radius, _, _ = _optimize_radius(conditional_assemblage(rho, party), restarts)
    return radius


def lhs_decomposition(rho, direction: str = "A->B", restarts: int = 4):
    party = _parse_direction(direction)
    assemblage = conditional_assemblage(rho, party)
    radius, decomposition, residual = _optimize_radius(assemblage, restarts)
    return radius, decomposition, residual


def steering_radii(rho, restarts: int = 4) -> SteeringResult:
    out = {}
    residual = 0.0
    for party in ("A", "B"):
        radius, dec, res = _optimize_radius(conditional_assemblage(rho, party), restarts)
        out[party] = (radius, dec)
        residual = max(residual, res)
    return SteeringResult(
        radius_a_to_b=out["A"][0],
        radius_b_to_a=out["B"][0],
        optimizer_residual=residual,
        decompositions={"A->B": out["A"][1], "B->A": out["B"][1]},
    )


def _parse_direction(direction: str) -> str:
    d = direction.replace(" ", "").upper()
    if d in ("A->B", "A", "AB"):
        return "A"
    if d in ("B->A", "B", "BA"):
        return "B"
    raise ValueError(f"unknown steering direction {direction!r}")


@dataclass(frozen=True)
class LabelDetails:
    label: CorrelationLabel
    ppt_min_eig: float
    horodecki_m: float
    radius_a_to_b: float | None
    radius_b_to_a: float | None
    steering_direction: str | None
    two_way_steerable: bool


def label_details(rho, lazy: bool = True) -> LabelDetails:
    """Four-class label with the criterion values behind it.

    Precedence: M > 1 gives IV; exactly one steering radius above one gives
    III; a negative partial-transpose eigenvalue gives II; otherwise I. With
    ``lazy`` the radii are skipped when they cannot change the label (M > 1,
    or a PPT state, which cannot be steerable).
    """
    rho = _two_qubit(rho)
    m = horodecki_M(rho)
    ppt = ppt_min_eigenvalue(rho)
    r_ab = r_ba = None
    direction = None
    two_way = False
    nonlocal_ = m > 1.0 + NONLOCAL_TOL
    entangled = ppt < -PPT_TOL
    if not lazy or (not nonlocal_ and entangled):
        res = steering_radii(rho)
        r_ab, r_ba = res.radius_a_to_b, res.radius_b_to_a
        if res.optimizer_residual > RADIUS_ANSWER_TOL:
            warnings.warn(
                f"steering optimizer residual {res.optimizer_residual:.3g}", SteeringWarning
            )
    if nonlocal_:
        label = CorrelationLabel.BELL_NONLOCAL
    else:
        steer_ab = r_ab is not None and r_ab > 1.0 + STEERING_TOL
        steer_ba = r_ba is not None and r_ba > 1.0 + STEERING_TOL
        if steer_ab != steer_ba:
            label = CorrelationLabel.ONE_WAY_STEERABLE
            direction = "A->B" if steer_ab else "B->A"
        elif entangled:
            label = CorrelationLabel.ENTANGLED
            if steer_ab and steer_ba:
                two_way = True
                warnings.warn(
                    "state is steerable both ways without a CHSH violation; labeled II",
                    SteeringWarning,
                )
        else:
            label = CorrelationLabel.SEPARABLE
    return LabelDetails(label, ppt, m, r_ab, r_ba, direction, two_way)


def label_state(rho) -> CorrelationLabel:
    return label_details(rho).label
