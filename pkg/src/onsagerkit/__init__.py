"""Exact re-derivation of the zero-field 2D Ising free energy by computation and guessing."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConvergenceError,
    DomainError,
    InconsistencyError,
    InternalError,
    OnsagerKitError,
    ResourceError,
    UsageError,
    VerificationError,
)
from .exactmath import TruncSeries, UniPoly  # noqa: E402
from .isingcore import GridSpec, brute_partition, partition_to_Z, weight_exponents  # noqa: E402
from .transfer import numeric_free_energy, z_series  # noqa: E402
from .isingpoly import assemble_F, ising_polynomial, ising_polynomials  # noqa: E402
from .duality import ChangeOfVariable, change_to_z, fbar_series, solve_z_ansatz  # noqa: E402
from .guess import (  # noqa: E402
    guess_rational,
    onsager_free_energy,
    onsager_g_reference,
    verify_closed_form,
)
from .relation import (  # noqa: E402
    find_integer_relation,
    lll_reduce,
    magnetization_ode_oracle,
    magnetization_reference,
    simultaneous_relation,
)

__all__ = [
    "ConvergenceError", "DomainError", "InconsistencyError", "InternalError",
    "OnsagerKitError", "ResourceError", "UsageError", "VerificationError",
    "TruncSeries", "UniPoly", "GridSpec", "brute_partition", "partition_to_Z",
    "weight_exponents", "numeric_free_energy", "z_series", "assemble_F",
    "ising_polynomial", "ising_polynomials", "ChangeOfVariable", "change_to_z",
    "fbar_series", "solve_z_ansatz", "guess_rational", "onsager_free_energy",
    "onsager_g_reference", "verify_closed_form", "find_integer_relation",
    "lll_reduce", "magnetization_ode_oracle", "magnetization_reference",
    "simultaneous_relation",
]
