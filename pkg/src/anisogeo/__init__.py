"""anisogeo: nonlinear connections, distinguished connections and curvature on
vector/covector bundles, plus a Clifford algebra and sigma-matrix kernel."""

from .connections import FAMILIES, DConnection, DConnectionBlocks, metricity_residuals
from .curvature import bianchi_residuals, evaluate_point
from .expr import parse, to_string
from .geometry import NConnection, adapted_frame, frame_duality_residual
from .spaces import (
    SpaceSpec,
    build_space,
    cartan_space,
    finsler_space,
    general_space,
    hamilton_space,
    lagrange_space,
    riemann_space,
)

__version__ = "0.1.0"

__all__ = [
    "FAMILIES", "DConnection", "DConnectionBlocks", "metricity_residuals", "bianchi_residuals",
    "evaluate_point", "parse", "to_string", "NConnection", "adapted_frame", "frame_duality_residual",
    "SpaceSpec", "build_space", "cartan_space", "finsler_space", "general_space", "hamilton_space",
    "lagrange_space", "riemann_space", "__version__",
]
