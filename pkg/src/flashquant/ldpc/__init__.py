"""LDPC codes: degree distributions, PEG/ACE construction, encoding, decoding."""

from .code import LdpcCode, load_alist, save_alist, tanner_girth
from .construct import assign_column_degrees, construct_peg_ace, default_ace_depth
from .decoder import BpDecoder, DecodeResult, decode_layered_bp
from .degrees import (
    DegreeDistribution,
    adjust_for_quantization,
    load_degree_distribution,
    load_preset,
    PRESET_NAMES,
    save_degree_distribution,
)

__all__ = [
    "LdpcCode",
    "load_alist",
    "save_alist",
    "tanner_girth",
    "assign_column_degrees",
    "construct_peg_ace",
    "default_ace_depth",
    "BpDecoder",
    "DecodeResult",
    "decode_layered_bp",
    "DegreeDistribution",
    "adjust_for_quantization",
    "load_degree_distribution",
    "load_preset",
    "PRESET_NAMES",
    "save_degree_distribution",
]
