"""Conditional sign flip: a 3/4 ceiling, and an entangled state from one gate.

Three modes start as |110>. Surrounding an ideal CS with linear optics gives an
equal superposition of the three two-photon single-occupancy states. The
logical mode (1,1,1)/sqrt(3) then holds 4/3 photons on average, so a heralded
CS cannot work with probability above 3/4.
"""
import numpy as np

from lopbounds import (CS_LOGICAL_MODE, as_rational, bound_from_expectation, build_entangled_cs_state,
                       expected_photon_number, joint_count_distribution, run_cs_three_mode_protocol)

trace = run_cs_three_mode_protocol()
for label, state in trace.steps:
    terms = ", ".join(f"{occ}: {amp.real:+.4f}" for occ, amp in state.items(cutoff=1e-12))
    print(f"{label:>20}  {terms}")

e = expected_photon_number(trace.final_state, CS_LOGICAL_MODE)
print("\nlogical mode coefficients:", np.round(CS_LOGICAL_MODE.coeffs, 6))
print("<n_logical> =", e, "->", as_rational(e))
print("bound on P(CS succeeds):", bound_from_expectation(as_rational(e)))

# one CS between layers of beam splitters entangles two photons across four modes
ent = build_entangled_cs_state()
print("\nentangled state:", {o: round(a.real, 6) for o, a in ent.final_state.items(cutoff=1e-12)})
print("construction:", ent.construction)
dist = joint_count_distribution(ent.final_state, [0, 1])
print("counts on modes 0,1:", {k: round(float(v), 12) for k, v in sorted(dist.items()) if v > 1e-12})
