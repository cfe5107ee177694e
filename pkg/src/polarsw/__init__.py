"""Polar-code distributed source coding.

Syndrome compression of a single binary source, asymmetric Slepian-Wolf
coding with decoder side information, and the nonasymmetric scheme built on
systematic polar encoding, plus a Monte-Carlo harness for all three.
"""

__version__ = "0.1.0"

from ._backend import NAME as backend
from .crc import CrcConfig, crc_append, crc_check, crc_compute
from .decode import DecodeResult, LlrVector, init_llrs, sc_decode, scl_decode
from .polar_core import (CodeSpec, SpecParseError, SpecValidationError,
                         bit_reversal_permutation, compute_syndrome, construct_code,
                         load_spec, polar_transform, save_spec)
from .sim import (BerRecord, TrialConfig, binary_entropy, entropy_inverse,
                  find_threshold, gen_source_pair, run_point, run_sweep)
from .systematic import SystematicSpec, systematic_encode, systematic_encode_fast
from .sw import (EncodedX, EncodedY, RateSplit, SourcePairEstimate, asym_decode,
                 asym_encode, compress_single, decompress_single, nonasym_decode,
                 nonasym_encode_x, nonasym_encode_y, rate_of)
