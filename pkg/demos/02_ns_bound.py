"""Why a heralded sign flip on |2> cannot succeed more than half the time.

An ideal NS gate placed between two beam splitters turns |11> into |20>.
Every step except the NS gate is linear optics, so a heralded NS with success
probability p yields a state with mean photon number 2 in one mode with
probability p. A postselected LOP state has at most one photon per mode on
average, which caps p at 1/2.
"""
from lopbounds import (ns_spec, SearchConfig, bound_from_expectation, as_rational, expected_photon_number,
                       optimize_gate, run_ns_two_photon_protocol)

trace = run_ns_two_photon_protocol()
for label, state in trace.steps:
    terms = ", ".join(f"{occ}: {amp.real:+.4f}" for occ, amp in state.items(cutoff=1e-12))
    print(f"{label:>22}  {terms}")

e = expected_photon_number(trace.final_state, 0)
print("\n<n_0> after the protocol:", e)
print("bound on P(NS succeeds):", bound_from_expectation(as_rational(e)))

# a short search with two ancilla modes and one ancilla photon gets to 1/4
res = optimize_gate(ns_spec(), SearchConfig(restarts=3, seed=1))
print(f"\nbest heralded NS found: p = {res.best_success_probability:.10f}"
      f" (deviation {res.best_deviation:.1e}, herald {res.best_circuit.heralded_counts})")

# running the protocol with that circuit reproduces |20>, now with probability p
with_circuit = run_ns_two_photon_protocol(res.best_circuit)
print("protocol success probability with the found circuit:", with_circuit.claimed_success_probability)
