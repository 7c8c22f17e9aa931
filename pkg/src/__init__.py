"""
LimitLab - finite groupoid operator algebras and band operators on Z

Finite groupoids and their convolution algebras, regular representations,
symbols over invariant boundaries, fibrewise invertibility, limit operators
and Fredholm indices of band operators.
"""

from .band_z import (
    BandOperatorZ,
    LaurentOperator,
    LaurentSymbol,
    bilateral_shift,
    limit_operator,
    two_sided_operator,
)
from .config import DEFAULT_SETTINGS, Settings, load_settings
from .convolution_algebra import (
    AlgebraElement,
    convolve,
    i_norm,
    involution,
    reduced_norm,
    regular_representation,
)
from .errors import LimitLabError
from .fibre_symbol import (
    BoundaryDecomposition,
    exel_invertibility,
    main_theorem_check,
    symbol,
)
from .fredholm_analysis import fredholm_report, toeplitz_index, winding_number
from .groupoid_core import FiniteGroupoid, RawGroupoid, mean_defect, validate_groupoid

__version__ = "0.3.0"
