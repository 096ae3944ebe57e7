"""Two photons on a 50/50 beam splitter, with and without postselection."""
import numpy as np

from lopbounds import (BeamSplitterParams, PostselectionPattern, apply_mode_unitary, basis_state,
                       beam_splitter, marginal_count_distribution, postselect)

bs = beam_splitter(BeamSplitterParams(0, 1, np.pi / 4), 2)
out = apply_mode_unitary(basis_state((1, 1)), bs)

# the |11> amplitude cancels: both photons leave together
for occ, amp in out.items(cutoff=1e-12):
    print(f"  {occ}: {amp.real:+.6f}")
print("P(one photon per output) =", abs(out.amplitude((1, 1))) ** 2)

# seeing no photon in mode 1 leaves |2> in mode 0, half of the time
res = postselect(out, PostselectionPattern((1,), (0,)))
print("P(0 photons in mode 1) =", res.probability)
print("conditional state:", dict(res.conditional_state.items(cutoff=1e-12)))
dist = marginal_count_distribution(out, 0)
print("mode 0 count distribution:", {c: round(float(v), 12) for c, v in sorted(dist.items())})
