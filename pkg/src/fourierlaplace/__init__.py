"""Formal Fourier-Laplace transform of meromorphic connections on the projective line."""
from .catalog import build_case, case_names, generic_case, verify_case
from .driver import TransformReport, double_transform_check, fourier_transform, irregular_independence_check
from .errors import ConsistencyFailure, FLError, ParseError, UnsupportedGermShape
from .germ import ConnectionGerm, GlobalConnection, formal_decompose, slopes, swan
from .scalar import Scalar

__version__ = "0.1.0"
