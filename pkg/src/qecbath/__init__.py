"""Quantum error correction benchmarks for qubit registers in thermal baths.

A dense-matrix simulator that evolves multi-qubit density matrices under
a microscopic system-bath master equation and measures how stabilizer
codes (the [[5,1,3]] perfect code, the [[7,1,3]] CSS code, and the
[[8,2,2]] toric code) preserve state fidelity across coupling strengths,
bath temperatures, noise topologies and repeated correction cycles.
"""

from .linalg import (DensityMatrix, PositivityError, fidelity, kron, embed,
                     partial_trace, herm_eig, psd_sqrt)
from .bath import BathSpec, bose_occupation, discretize_spectrum, lindblad_rates, rate_coefficients
from .dynamics import (BathAttachment, SystemModel, Trajectory, integrate,
                       me_rhs, memory_rhs, system_hamiltonian)
from .codes import (QecCode, SyndromeTable, build_five_qubit, build_steane,
                    build_toric_822, derive_syndrome_table, encode, recover, decode,
                    get_code)
from .protocols import (ProtocolSpec, ExperimentResult, CriticalTimeResult,
                        werner_state, run_protocol, critical_time, sweep)

__version__ = "0.1.0"
