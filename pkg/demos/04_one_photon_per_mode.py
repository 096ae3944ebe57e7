"""Random linear optics never puts more than one photon per mode on average.

k single photons enter modes 0..k-1 of a Haar-random interferometer. The mean
occupation of output mode m is the sum of |S[m, j]|^2 over occupied inputs j,
a partial row norm of a unitary, hence at most 1.
"""
import numpy as np

from lopbounds import expected_photon_number, sample_lop_state, verify_theorem1

psi = sample_lop_state(5, 3, seed=3)
print("mean occupations, 5 modes / 3 photons:",
      np.round([expected_photon_number(psi, m) for m in range(5)], 6))

report = verify_theorem1(trials_per_config=200)
print(f"\n{report.trials} random states")
for row in report.to_json_dict()["per_config_max"]:
    print(f"  n={row['n_modes']} k={row['k_photons']}: max <n_m> = {row['max_expectation']:.15f}")
print("largest deviation from the closed form:", report.max_identity_error)
print("passed:", report.passed)
