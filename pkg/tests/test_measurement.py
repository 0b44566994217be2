import math

import numpy as np
import pytest

from oracles import family_state
from qcorr.linalg import fidelity, is_density_matrix
from qcorr.measurement import (
    FEATURE_NAMES,
    TOMOGRAPHY_CONDITION,
    TOMOGRAPHY_NAMES,
    CountRecord,
    InsufficientCountsError,
    UnknownLabelError,
    build_projector,
    feature_set,
    features_exact,
    features_from_counts,
    linear_inversion,
    outcome_probabilities,
    simulate_counts,
    tomography_reconstruct,
    tomography_set,
)
from qcorr.states import make_state

BELL = make_state(1.0, math.pi / 4)
PHI_PLUS = np.array([1, 0, 0, 1]) / math.sqrt(2)
HUGE_N0 = 10**13  # rounding error 0.5/n0 is far below the 1e-9 checks


def random_family(n, seed):
    rng = np.random.default_rng(seed)
    return [(rng.uniform(0, 1), rng.uniform(0, 2 * math.pi)) for _ in range(n)]


class TestProjectors:
    def test_completeness(self):
        total = sum(build_projector(a, b) for a in "HV" for b in "HV")
        np.testing.assert_allclose(total, np.eye(4), atol=1e-15)

    def test_dd_on_bell(self):
        # <DD|Φ+> = (1/2)(1 + 1)/√2 = 1/√2
        assert np.trace(build_projector("D", "D") @ np.outer(PHI_PLUS, PHI_PLUS)).real == pytest.approx(0.5)

    def test_feature_projector_kets(self):
        v = np.kron([1, 0], [math.cos(math.pi / 8), math.sin(math.pi / 8)])
        np.testing.assert_allclose(build_projector("A0", "B0p"), np.outer(v, v), atol=1e-15)

    def test_all_rank_one_idempotent(self):
        for pset in (tomography_set(), feature_set()):
            for proj in pset.projectors:
                np.testing.assert_allclose(proj @ proj, proj, atol=1e-12)
                np.testing.assert_allclose(proj, proj.conj().T, atol=1e-15)
                assert np.linalg.matrix_rank(proj, tol=1e-10) == 1

    def test_perp_outcomes_complete(self):
        for a in ("A0", "A0p", "B0", "B0p", "D", "R"):
            total = build_projector(a, "H") + build_projector(a + "_perp", "H")
            np.testing.assert_allclose(total, np.kron(np.eye(2), np.diag([1, 0])), atol=1e-15)

    def test_unknown_label(self):
        with pytest.raises(UnknownLabelError):
            build_projector("Q", "H")
        with pytest.raises(UnknownLabelError):
            tomography_set().from_names(["HH"])

    def test_tomography_set_spans(self):
        assert len(TOMOGRAPHY_NAMES) == 16
        assert np.isfinite(TOMOGRAPHY_CONDITION) and TOMOGRAPHY_CONDITION < 1e3


class TestCounts:
    def test_deterministic_bell(self):
        rec = simulate_counts(BELL, tomography_set(), 60000, noise="none")
        assert rec["H.H"] == 30000
        assert rec["H.V"] == 0

    def test_zero_probability_gives_zero(self):
        rec = simulate_counts(BELL, tomography_set(), 60000, seed=5)
        assert rec["H.V"] == 0 and rec["V.H"] == 0

    def test_poisson_mean(self):
        pset = feature_set()
        rho = make_state(0.6, 1.0)
        n0, reps = 60000, 10_000
        sums = np.zeros(len(pset))
        for s in range(reps):
            sums += simulate_counts(rho, pset, n0, seed=s).counts
        lam = n0 * outcome_probabilities(rho, pset)
        sigma = np.sqrt(lam / reps)
        assert np.all(np.abs(sums / reps - lam) < 3 * sigma + 1e-12)

    def test_seeded_reproducibility(self):
        a = simulate_counts(BELL, tomography_set(), 1000, seed=7)
        b = simulate_counts(BELL, tomography_set(), 1000, seed=7)
        np.testing.assert_array_equal(a.counts, b.counts)

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            simulate_counts(BELL, tomography_set(), 0)
        with pytest.raises(ValueError):
            simulate_counts(BELL, tomography_set(), 10, noise="gaussian")
        with pytest.raises(ValueError):
            CountRecord(["H.H"], [-1], 10)
        with pytest.raises(ValueError):
            CountRecord(["H.H", "H.V"], [1], 10)

    def test_json_round_trip(self):
        rec = simulate_counts(BELL, feature_set(), 1234, seed=3)
        back = CountRecord.from_json(rec.to_json())
        assert back.names == rec.names and back.n0 == rec.n0
        np.testing.assert_array_equal(back.counts, rec.counts)


class TestFeatures:
    def test_bell_counts(self):
        f = features_from_counts(simulate_counts(BELL, feature_set(), HUGE_N0, noise="none"))
        assert f.f1 == pytest.approx(1 / math.sqrt(2), abs=1e-9)
        assert f.f2 == pytest.approx(1 / math.sqrt(2), abs=1e-9)

    def test_equal_counts(self):
        f = features_from_counts(CountRecord(FEATURE_NAMES, [10] * 8, 100))
        assert (f.f1, f.f2) == (0.0, 0.0)

    def test_insufficient_counts(self):
        with pytest.raises(InsufficientCountsError):
            features_from_counts(CountRecord(FEATURE_NAMES, [0, 0, 0, 0, 5, 5, 5, 5], 100))

    @pytest.mark.parametrize("p,theta", random_family(12, 0))
    def test_exact_closed_form(self, p, theta):
        f = features_exact(family_state(p, theta))
        assert f.f1 == pytest.approx(p / math.sqrt(2), abs=1e-14)
        assert f.f2 == pytest.approx(p * math.sin(2 * theta) / math.sqrt(2), abs=1e-14)

    def test_exact_zero_visibility(self):
        f = features_exact(make_state(0.0, 0.4))
        assert f.f1 == pytest.approx(0.0, abs=1e-15) and f.f2 == pytest.approx(0.0, abs=1e-15)

    def test_counts_match_exact_on_100_states(self):
        for p, theta in random_family(100, 1):
            rho = make_state(p, theta)
            f = features_from_counts(simulate_counts(rho, feature_set(), HUGE_N0, noise="none"))
            np.testing.assert_allclose(f.as_array(), features_exact(rho).as_array(), atol=1e-9)

    def test_poisson_error_bound(self):
        rho = make_state(0.6, 1.0)
        exact = features_exact(rho).as_array()
        errs = [
            np.max(np.abs(features_from_counts(simulate_counts(rho, feature_set(), 60000, seed=s)).as_array() - exact))
            for s in range(300)
        ]
        assert np.mean(np.array(errs) < 0.02) >= 0.99

    def test_scale_invariance(self):
        rec = simulate_counts(make_state(0.7, 0.5), feature_set(), 5000, seed=9)
        scaled = CountRecord(rec.names, rec.counts * 7, rec.n0 * 7)
        assert features_from_counts(rec) == features_from_counts(scaled)


class TestTomography:
    @pytest.mark.parametrize("p,theta", random_family(10, 2))
    def test_noiseless_reconstruction(self, p, theta):
        rho = make_state(p, theta)
        est = tomography_reconstruct(simulate_counts(rho, tomography_set(), HUGE_N0, noise="none"))
        assert fidelity(rho, est) > 1 - 1e-9

    def test_linear_inversion_is_exact_on_probabilities(self):
        rho = make_state(0.4, 0.9)
        rec = simulate_counts(rho, tomography_set(), HUGE_N0, noise="none")
        np.testing.assert_allclose(linear_inversion(rec), rho, atol=1e-11)

    def test_adversarial_counts(self):
        # counts from an unphysical estimate: all weight on HH and VV but none on the diagonal bases
        counts = np.zeros(16, dtype=int)
        counts[TOMOGRAPHY_NAMES.index("H.H")] = 1000
        counts[TOMOGRAPHY_NAMES.index("V.V")] = 1000
        raw = linear_inversion(CountRecord(TOMOGRAPHY_NAMES, counts, 1000))
        assert np.linalg.eigvalsh(raw)[0] < -1e-3
        est = tomography_reconstruct(CountRecord(TOMOGRAPHY_NAMES, counts, 1000))
        assert is_density_matrix(est)

    def test_poisson_fidelity(self):
        for i, (p, theta) in enumerate(random_family(20, 3)):
            rho = make_state(p, theta)
            est = tomography_reconstruct(simulate_counts(rho, tomography_set(), 60000, seed=i))
            assert is_density_matrix(est)
            assert fidelity(rho, est) > 0.98
