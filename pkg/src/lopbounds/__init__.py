"""Fock-space simulation of postselected linear optics and the NS/CS success-probability bounds."""

__version__ = "0.1.0"

from .fock import (LogicalMode, OccupationVector, SectorBasis, StateVector, basis_state,
                   enumerate_basis, fidelity_up_to_phase, inner_product, single_photon_state)
from .optics import (BeamSplitterParams, ModeUnitary, apply_mode_unitary, beam_splitter, compose,
                     embed, haar_unitary, lift_oracle, permanent, phase_shifter, sector_matrix,
                     transition_amplitude)
from .postselect import (PostselectionOutcome, PostselectionPattern, joint_count_distribution,
                         marginal_count_distribution, postselect)
from .gates import (GateCheckResult, GateSpec, PostselectedCircuit, apply_ideal_gate,
                    check_postselected_gate, cs_spec, ns_spec)
from .bounds import (CS_LOGICAL_MODE, ProtocolTrace, Theorem1Report, as_rational, bound_from_expectation,
                     build_entangled_cs_state, expected_photon_number, run_cs_three_mode_protocol, run_ns_two_photon_protocol,
                     sample_lop_state, verify_theorem1)
from .search import (BoundViolationError, SearchConfig, SearchResult, objective, optimize_gate,
                     parameterize_unitary)
