"""Compressed sensing with summary codebooks.

Measurements are sums of a sparse signal over the labels that agree with a
bit pattern on a subset of positions. The package provides the codebooks,
the implicit measurement operator, three decoders (SSII, Mix-and-Match and
Basis Pursuit), recovery-guarantee formulas and a Monte-Carlo harness.
"""

from .basis_pursuit import solve_bp
from .bounds import BoundParams, BoundReport, report
from .codebook import BitSubset, Codebook, Label, Summary, complete_codebook, random_codebook
from .errors import CapacityError, ContradictionError, InfeasibleError, InvalidArgument, IterationLimitError
from .measurements import MeasurementVector, encode, group_equal, materialize_dense, subtract
from .mixmatch import StackedCodebook, decode_mm, encode_stacked, identify_support, identify_values
from .signal import EXACT, SparseSignal, ValueMode, generate, is_distinguishable
from .ssii import DecodeLimits, DecodeResult, decode_ssii

__all__ = [
    "BitSubset", "BoundParams", "BoundReport", "CapacityError", "Codebook", "ContradictionError",
    "DecodeLimits", "DecodeResult", "EXACT", "InfeasibleError", "InvalidArgument",
    "IterationLimitError", "Label", "MeasurementVector", "SparseSignal", "StackedCodebook",
    "Summary", "ValueMode", "complete_codebook", "decode_mm", "decode_ssii", "encode",
    "encode_stacked", "generate", "group_equal", "identify_support", "identify_values",
    "is_distinguishable", "materialize_dense", "random_codebook", "report", "solve_bp", "subtract",
]
__version__ = "0.1.0"
