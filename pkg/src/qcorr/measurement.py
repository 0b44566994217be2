"""Polarization projectors, photon-count simulation, features and tomography.

Single-qubit labels: ``H``, ``V``, ``D``, ``R`` for tomography, and the
feature settings ``A0``, ``A0p``, ``B0``, ``B0p`` (``p`` for prime). Appending
``_perp`` selects the orthogonal ket. A two-photon projector is named
``"<a>.<b>"``, e.g. ``"H.D"`` or ``"A0_perp.B0p"``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .linalg import PAULIS, I2, ket, nearest_density_matrix, projector

_S2 = 1 / math.sqrt(2)

_KETS = {
    "H": ket(1, 0),
    "V": ket(0, 1),
    "D": ket(_S2, _S2),
    "R": ket(_S2, -1j * _S2),
    "A0": ket(1, 0),
    "A0p": ket(math.cos(-math.pi / 4), math.sin(-math.pi / 4)),
    "B0": ket(math.cos(-math.pi / 8), math.sin(-math.pi / 8)),
    "B0p": ket(math.cos(math.pi / 8), math.sin(math.pi / 8)),
}

TOMOGRAPHY_NAMES = tuple(
    f"{n[0]}.{n[1]}"
    for n in (
        "HH", "HV", "HR", "HD", "VD", "VR", "VH", "VV",
        "RV", "RH", "RR", "RD", "DD", "DR", "DH", "DV",
    )
)

# order of the feature-measurement block; the estimator index maps below rely on it
FEATURE_NAMES = (
    "A0.B0p",
    "A0_perp.B0p",
    "A0.B0p_perp",
    "A0_perp.B0p_perp",
    "A0p.B0",
    "A0p_perp.B0",
    "A0p.B0_perp",
    "A0p_perp.B0_perp",
)


class UnknownLabelError(KeyError):
    pass


class InsufficientCountsError(ValueError):
    pass


def single_ket(label: str) -> np.ndarray:
    base, perp = label, False
    if label.endswith("_perp"):
        base, perp = label[: -len("_perp")], True
    if base not in _KETS:
        raise UnknownLabelError(label)
    v = _KETS[base]
    if perp:
        # orthogonal complement of a qubit ket (a, b) is (-b*, a*)
        v = np.array([-np.conj(v[1]), np.conj(v[0])])
    return v


def build_projector(label_a: str, label_b: str) -> np.ndarray:
    """Rank-1 projector onto ``|label_a⟩ ⊗ |label_b⟩``."""
    return projector(np.kron(single_ket(label_a), single_ket(label_b)))


def projector_from_name(name: str) -> np.ndarray:
    try:
        a, b = name.split(".")
    except ValueError:
        raise UnknownLabelError(name) from None
    return build_projector(a, b)


@dataclass(frozen=True)
class ProjectorSet:
    names: tuple
    projectors: tuple

    @classmethod
    def from_names(cls, names) -> "ProjectorSet":
        names = tuple(names)
        return cls(names, tuple(projector_from_name(n) for n in names))

    def __len__(self):
        return len(self.names)


def tomography_set() -> ProjectorSet:
    return ProjectorSet.from_names(TOMOGRAPHY_NAMES)


def feature_set() -> ProjectorSet:
    return ProjectorSet.from_names(FEATURE_NAMES)


@dataclass
class CountRecord:
    names: list
    counts: np.ndarray
    n0: int

    def __post_init__(self):
        self.names = list(self.names)
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.shape != (len(self.names),):
            raise ValueError("counts and names differ in length")
        if np.any(self.counts < 0):
            raise ValueError("counts must be nonnegative")

    def __getitem__(self, name: str) -> int:
        return int(self.counts[self.names.index(name)])

    def to_json(self) -> str:
        return json.dumps(
            {"names": self.names, "counts": [int(c) for c in self.counts], "n0": int(self.n0)}
        )

    @classmethod
    def from_json(cls, text: str) -> "CountRecord":
        obj = json.loads(text)
        return cls(obj["names"], obj["counts"], obj["n0"])


def outcome_probabilities(rho, pset: ProjectorSet) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    return np.array([max(np.trace(rho @ proj).real, 0.0) for proj in pset.projectors])


def simulate_counts(
    rho,
    pset: ProjectorSet,
    n0: int = 60000,
    seed: int | None = 0,
    noise: str = "poisson",
) -> CountRecord:
    """Photon counts with mean ``n0 * Tr(ρΠ)`` per projector.

    ``noise='poisson'`` draws independent Poisson counts from
    ``numpy.random.default_rng(seed)``; ``noise='none'`` rounds the means.
    """
    if n0 <= 0:
        raise ValueError("n0 must be positive")
    means = n0 * outcome_probabilities(rho, pset)
    if noise == "poisson":
        counts = np.random.default_rng(seed).poisson(means)
    elif noise == "none":
        counts = np.floor(means + 0.5).astype(np.int64)
    else:
        raise ValueError(f"unknown noise model {noise!r}")
    return CountRecord(list(pset.names), counts, n0)


@dataclass(frozen=True)
class FeatureVector:
    f1: float
    f2: float

    def as_array(self) -> np.ndarray:
        return np.array([self.f1, self.f2])


def _ratio(plus, minus) -> float:
    total = plus + minus
    if total <= 0:
        raise InsufficientCountsError("all four counts of an estimator are zero")
    return (plus - minus) / total


def features_from_counts(record: CountRecord) -> FeatureVector:
    """Count-ratio estimates of ⟨a0 b0'⟩ and ⟨a0' b0⟩."""
    n = {name: record[name] for name in FEATURE_NAMES}
    f1 = _ratio(
        n["A0.B0p"] + n["A0_perp.B0p_perp"],
        n["A0_perp.B0p"] + n["A0.B0p_perp"],
    )
    f2 = _ratio(
        n["A0p.B0"] + n["A0p_perp.B0_perp"],
        n["A0p_perp.B0"] + n["A0p.B0_perp"],
    )
    return FeatureVector(f1, f2)


def _signed_observable(label: str) -> np.ndarray:
    return 2 * projector(single_ket(label)) - I2


def features_exact(rho) -> FeatureVector:
    """Noiseless features: traces against the ±1 observables of the feature kets."""
    rho = np.asarray(rho, dtype=complex)
    o1 = np.kron(_signed_observable("A0"), _signed_observable("B0p"))
    o2 = np.kron(_signed_observable("A0p"), _signed_observable("B0"))
    return FeatureVector(np.trace(rho @ o1).real, np.trace(rho @ o2).real)


def _pauli_products():
    basis = (I2,) + PAULIS
    return [np.kron(a, b) for a in basis for b in basis]


_PAULI_PRODUCTS = _pauli_products()


def _design_matrix(pset: ProjectorSet) -> np.ndarray:
    # ρ = Σ_k r_k P_k / 4 over the 16 Pauli products, so Tr(ρ Π_i) = Σ_k r_k Tr(Π_i P_k) / 4
    return np.array(
        [[np.trace(proj @ pk).real / 4 for pk in _PAULI_PRODUCTS] for proj in pset.projectors]
    )


_TOMO_DESIGN = _design_matrix(tomography_set())
TOMOGRAPHY_CONDITION = float(np.linalg.cond(_TOMO_DESIGN))
if not np.isfinite(TOMOGRAPHY_CONDITION) or TOMOGRAPHY_CONDITION > 1e8:
    raise RuntimeError("tomography projectors do not span the two-qubit operator space")


def linear_inversion(record: CountRecord, n0: int | None = None) -> np.ndarray:
    """Hermitian (possibly unphysical) solution of Tr(ρΠ_i) = N_i / n0."""
    n0 = record.n0 if n0 is None else n0
    if list(record.names) == list(TOMOGRAPHY_NAMES):
        design = _TOMO_DESIGN
    else:
        design = _design_matrix(ProjectorSet.from_names(record.names))
    probs = record.counts / n0
    coeffs, *_ = np.linalg.lstsq(design, probs, rcond=None)
    return sum(c * pk for c, pk in zip(coeffs, _PAULI_PRODUCTS)) / 4


def tomography_reconstruct(record: CountRecord, n0: int | None = None) -> np.ndarray:
    """Linear-inversion tomography followed by projection onto density matrices."""
    return nearest_density_matrix(linear_inversion(record, n0))
