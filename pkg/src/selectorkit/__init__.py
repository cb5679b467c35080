"""Action selectors, spectra, capacities, Reeb orbits and billiards on (R^2n, omega0)."""

__version__ = "0.1.0"

from .exceptions import (AmbiguousBranch, CertificationError, ConvergenceError, FlowEscapeError,  # noqa: E402
                         InputError, SelectorKitError, StepSizeError)
from .hamiltonians import RadialHamiltonian, ZeroHamiltonian, compose_sharp, hofer_norm  # noqa: E402
from .profiles import ProfileFunction  # noqa: E402
from .selector import ActionSelector, select  # noqa: E402
from .spectrum import OrbitFinder, radial_spectrum_oracle, spectrum  # noqa: E402

__all__ = [
    "__version__", "AmbiguousBranch", "CertificationError", "ConvergenceError", "FlowEscapeError", "InputError",
    "SelectorKitError", "StepSizeError", "RadialHamiltonian", "ZeroHamiltonian", "compose_sharp", "hofer_norm",
    "ProfileFunction", "ActionSelector", "select", "OrbitFinder", "radial_spectrum_oracle", "spectrum",
]
