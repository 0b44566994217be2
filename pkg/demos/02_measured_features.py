"""From photon counts to features and to a reconstructed state.

The two features the classifiers use come from four projective settings.
Full tomography needs sixteen. Both are simulated here with Poisson counts
at a realistic count level. The printout compares them with their exact
values and reports the reconstruction fidelity.
"""

from qcorr import features_exact, features_from_counts, fidelity, make_state, simulate_counts, tomography_reconstruct
from qcorr.measurement import feature_set, tomography_set

N0 = 60000
for i, (p, theta) in enumerate([(0.2, 0.5), (0.6, 0.7), (0.75, 0.8), (0.95, 0.4)]):
    rho = make_state(p, theta)
    exact = features_exact(rho)
    measured = features_from_counts(simulate_counts(rho, feature_set(), N0, seed=i))
    est = tomography_reconstruct(simulate_counts(rho, tomography_set(), N0, seed=100 + i))
    print(
        f"p={p:.2f} theta={theta:.2f}  features exact ({exact.f1:.4f}, {exact.f2:.4f})"
        f"  measured ({measured.f1:.4f}, {measured.f2:.4f})  tomography fidelity {fidelity(rho, est):.5f}"
    )

# Fewer counts mean noisier features; the spread shrinks like 1/sqrt(n0)
rho = make_state(0.6, 0.7)
for n0 in (300, 3000, 30000, 300000):
    f1 = [features_from_counts(simulate_counts(rho, feature_set(), n0, seed=s)).f1 for s in range(200)]
    mean = sum(f1) / len(f1)
    sd = (sum((x - mean) ** 2 for x in f1) / (len(f1) - 1)) ** 0.5
    print(f"n0={n0:>6}: f1 standard deviation {sd:.5f}")
