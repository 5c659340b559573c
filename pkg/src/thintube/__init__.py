"""Spectra of thin tubular neighbourhoods and their reduced surface operators."""
__version__ = "0.1.0"

from .assembly import (OperatorPair, Resolution, assemble_effective_dirichlet,  # noqa: E402
                       assemble_effective_dn, assemble_surface, assemble_tube)
from .config import Config, load_config  # noqa: E402
from .eigensolve import Spectrum, smallest_eigenpairs  # noqa: E402
from .geometry import make_geometry  # noqa: E402

__all__ = [
    "Config", "OperatorPair", "Resolution", "Spectrum", "assemble_effective_dirichlet",
    "assemble_effective_dn", "assemble_surface", "assemble_tube", "load_config",
    "make_geometry", "smallest_eigenpairs", "__version__",
]
