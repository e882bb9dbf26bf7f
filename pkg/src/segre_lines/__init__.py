"""Signed counts of real lines: Euler, Segre and Welschinger indices of jet curves."""

from .errors import (
    Degenerate,
    DegenerateOnWall,
    IncompleteEnumeration,
    InvalidInput,
    NonGenericCurve,
    NumericFailure,
    SegreLinesError,
)
from .exactalg import BinaryForm, RatMatrix
from .generators import PlaneConfig, cremona_generate, one_example, wallcross_path
from .jet import Hypersurface, JetCurve, det_AC, euler_index, extract_jet
from .lines import RealLine, find_real_lines, restrict_to_line, signed_count
from .secants import SolverConfig, nodes_exact_n3, secants_numeric
from .segre import chord_diagram, segre_index
from .welsch import welschinger_weight

__version__ = "0.1.0"

__all__ = [
    "BinaryForm",
    "Degenerate",
    "DegenerateOnWall",
    "Hypersurface",
    "IncompleteEnumeration",
    "InvalidInput",
    "JetCurve",
    "NonGenericCurve",
    "NumericFailure",
    "PlaneConfig",
    "RatMatrix",
    "RealLine",
    "SegreLinesError",
    "SolverConfig",
    "chord_diagram",
    "cremona_generate",
    "det_AC",
    "euler_index",
    "extract_jet",
    "find_real_lines",
    "nodes_exact_n3",
    "one_example",
    "restrict_to_line",
    "secants_numeric",
    "segre_index",
    "signed_count",
    "wallcross_path",
    "welschinger_weight",
]
