"""Two-particle RDM reconstruction from fermionic classical-shadow data.

The package simulates orbital-rotation (matchgate) classical shadows of
small molecular ground states, and reconstructs the two-particle reduced
density matrix by solving a semidefinite program with DQG
N-representability conditions plus shadow-derived inequality constraints.
"""

from shadowrdm.integrals import MolecularIntegrals, parse_fcidump, energy_from_rdms
from shadowrdm.rdms import SpinBlockedRdms

__version__ = "0.1.0"

__all__ = [
    "MolecularIntegrals",
    "SpinBlockedRdms",
    "parse_fcidump",
    "energy_from_rdms",
    "__version__",
]
