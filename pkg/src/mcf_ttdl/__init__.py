"""Multicore-fiber true time delay lines and their microwave photonic filters.

Delay engines (``hetero_delay``, ``fbg_multicavity``) produce
:class:`~mcf_ttdl.taps.TapSet` objects, ``rf_filter`` turns them into
frequency responses, ``mode_solver`` maps index profiles to core
dispersion and ``design`` inverts all of these.
"""

from .mcf_model import (CoreDispersion, HeteroMCFSpec, MCFGeometry, TrenchProfile,
                        core_positions, validate_geometry)
from .taps import TapSet

__version__ = "0.1.0"

__all__ = ["CoreDispersion", "HeteroMCFSpec", "MCFGeometry", "TapSet", "TrenchProfile",
           "core_positions", "validate_geometry"]
