"""Single-source, asymmetric and nonasymmetric Slepian-Wolf codecs.

Every decoder funnels through one step: decode an error pattern ``e`` from
uninformative-but-biased LLRs (all-zero reference, BSC(p)) in the coset of a
syndrome. For a single source that pattern is the source itself; with side
information y it is ``x ^ frame(y)``; in the nonasymmetric scheme it is
``x ^ y``, recovered from ``s_x ^ s_y``. Sharing the step makes the three
codecs agree bit for bit wherever their inputs coincide.

Payloads have ``N' = N - l_crc`` bits. With ``l_crc = 16`` each block is
completed to N bits with a linear CRC, which then also holds for ``e``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .crc import WIDTH as CRC_WIDTH, XMODEM, crc_append
from .decode import DecodeResult, init_llrs, scl_decode
from .polar_core import CodeSpec, compute_syndrome
from .systematic import SystematicSpec, systematic_encode_fast

LIST_SIZE = 32


@dataclass(frozen=True)
class RateSplit:
    K1: int
    K2: int

    def __post_init__(self):
        if self.K1 < 0 or self.K2 < 0:
            raise ValueError("K1 and K2 must be nonnegative")

    @classmethod
    def from_k1(cls, K1: int, spec: CodeSpec) -> "RateSplit":
        return cls(K1, spec.K - K1)

    def validate(self, spec: CodeSpec) -> None:
        if self.K1 + self.K2 != spec.K:
            raise ValueError(f"split {self.K1}+{self.K2} does not add up to K={spec.K}")


@dataclass(frozen=True)
class EncodedX:
    xa1: np.ndarray
    s_x: np.ndarray


@dataclass(frozen=True)
class EncodedY:
    ya2: np.ndarray
    s_y: np.ndarray


@dataclass(frozen=True)
class SourcePairEstimate:
    x_hat: np.ndarray
    y_hat: np.ndarray
    crc_pass: bool


def rate_of(split: RateSplit, spec: CodeSpec) -> tuple[float, float]:
    split.validate(spec)
    N, K = spec.N, spec.K
    return (split.K1 + N - K) / N, (split.K2 + N - K) / N


def _base(spec):
    return spec.base if isinstance(spec, SystematicSpec) else spec


def frame(payload, spec: CodeSpec) -> np.ndarray:
    """Payload completed to N bits (CRC appended when the code carries one)."""
    bits = np.asarray(payload)
    if bits.ndim != 1 or bits.size != spec.payload_length:
        raise ValueError(f"payload must have N' = {spec.payload_length} bits")
    bits = bits.astype(np.uint8) & 1
    if spec.l_crc == 0:
        return bits
    if spec.l_crc != CRC_WIDTH:
        raise ValueError(f"unsupported CRC length {spec.l_crc}")
    return crc_append(bits, spec.N, XMODEM)


def _syndrome_arg(s, spec):
    s = np.asarray(s)
    if s.ndim != 1 or s.size != spec.N - spec.K:
        raise ValueError(f"syndrome must have N-K = {spec.N - spec.K} bits")
    return s.astype(np.uint8) & 1


def decode_error_pattern(s_e, p: float, spec: CodeSpec,
                         list_size: int = LIST_SIZE) -> DecodeResult:
    """Most plausible Ber(p) pattern in the coset ``s_e``."""
    llr = init_llrs(np.zeros(spec.N, dtype=np.uint8), p, spec.l_crc)
    crc = XMODEM if spec.l_crc == CRC_WIDTH else None
    return scl_decode(llr, spec, _syndrome_arg(s_e, spec), list_size, crc)


# --- single source / asymmetric ---------------------------------------------

def compress_single(x_payload, spec: CodeSpec) -> np.ndarray:
    return compute_syndrome(frame(x_payload, spec), spec)


asym_encode = compress_single


def decompress_single_frame(s, p: float, spec: CodeSpec, list_size: int = LIST_SIZE):
    res = decode_error_pattern(s, p, spec, list_size)
    return res.x_hat, res.crc_pass


def decompress_single(s, p: float, spec: CodeSpec, list_size: int = LIST_SIZE):
    """Returns ``(x_payload_hat, crc_pass)``; the source is modelled as Ber(p)."""
    x, ok = decompress_single_frame(s, p, spec, list_size)
    return x[:spec.payload_length], ok


def asym_decode_frame(s, y_payload, p: float, spec: CodeSpec,
                      list_size: int = LIST_SIZE):
    """Full N-bit estimate of x's frame given side information y."""
    s = _syndrome_arg(s, spec)
    # y's CRC is never sent; any CRC-consistent completion works since the
    # tail carries no channel information
    v = frame(y_payload, spec)
    res = decode_error_pattern(s ^ compute_syndrome(v, spec), p, spec, list_size)
    return v ^ res.x_hat, res.crc_pass


def asym_decode(s, y_payload, p: float, spec: CodeSpec, list_size: int = LIST_SIZE):
    """Returns ``(x_payload_hat, crc_pass)``."""
    x, ok = asym_decode_frame(s, y_payload, p, spec, list_size)
    return x[:spec.payload_length], ok


# --- nonasymmetric ----------------------------------------------------------

def nonasym_encode_x(x_payload, split: RateSplit, sspec: SystematicSpec) -> EncodedX:
    spec = sspec.base
    split.validate(spec)
    fx = frame(x_payload, spec)
    return EncodedX(xa1=fx[sspec.b_set[:split.K1]], s_x=compute_syndrome(fx, spec))


def nonasym_encode_y(y_payload, split: RateSplit, sspec: SystematicSpec) -> EncodedY:
    spec = sspec.base
    split.validate(spec)
    fy = frame(y_payload, spec)
    return EncodedY(ya2=fy[sspec.b_set[split.K1:]], s_y=compute_syndrome(fy, spec))


def nonasym_decode_frames(ex: EncodedX, ey: EncodedY, split: RateSplit, p: float,
                          sspec: SystematicSpec, list_size: int = LIST_SIZE):
    """Returns ``(x_frame_hat, y_frame_hat, e_hat, crc_pass)``."""
    spec = sspec.base
    split.validate(spec)
    s_x = _syndrome_arg(ex.s_x, spec)
    s_y = _syndrome_arg(ey.s_y, spec)
    xa1 = np.asarray(ex.xa1, dtype=np.uint8)
    ya2 = np.asarray(ey.ya2, dtype=np.uint8)
    if xa1.shape != (split.K1,) or ya2.shape != (split.K2,):
        raise ValueError("systematic parts do not match the split")
    res = decode_error_pattern(s_x ^ s_y, p, spec, list_size)
    e_B = res.x_hat[sspec.b_set]
    x_B = np.concatenate([xa1, ya2 ^ e_B[split.K1:]])
    y_B = np.concatenate([xa1 ^ e_B[:split.K1], ya2])
    _, x = systematic_encode_fast(x_B, s_x, sspec)
    _, y = systematic_encode_fast(y_B, s_y, sspec)
    return x, y, res.x_hat, res.crc_pass


def nonasym_decode(ex: EncodedX, ey: EncodedY, split: RateSplit, p: float,
                   sspec: SystematicSpec, list_size: int = LIST_SIZE) -> SourcePairEstimate:
    x, y, _, ok = nonasym_decode_frames(ex, ey, split, p, sspec, list_size)
    n = sspec.base.payload_length
    return SourcePairEstimate(x_hat=x[:n], y_hat=y[:n], crc_pass=ok)


# --- compressed stream format -------------------------------------------------
#
#   magic "PSW1" | mode u8 | spec digest (8 bytes) | K1 u32 BE | blocks u32 BE
#   then per block: systematic part (if any) followed by the syndrome,
#   bit-packed MSB first, zero-padded to a byte boundary.

MAGIC = b"PSW1"
MODES = {"single": 0, "asym": 1, "nonasym-x": 2, "nonasym-y": 3}
_HEADER = struct.Struct(">4sB8sII")


class FrameError(ValueError):
    """A compressed stream is malformed or does not match the code spec."""


def systematic_length(mode: str, K1: int, spec: CodeSpec) -> int:
    if mode == "nonasym-x":
        return K1
    if mode == "nonasym-y":
        return spec.K - K1
    return 0


def block_bytes(mode: str, K1: int, spec: CodeSpec) -> int:
    return (systematic_length(mode, K1, spec) + spec.N - spec.K + 7) // 8


def pack_stream(mode: str, spec: CodeSpec, K1: int, blocks) -> bytes:
    """``blocks`` is a list of (systematic_bits, syndrome) pairs."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    m = systematic_length(mode, K1, spec)
    out = [_HEADER.pack(MAGIC, MODES[mode], spec.digest(), K1, len(blocks))]
    for sys_bits, syn in blocks:
        bits = np.concatenate([np.asarray(sys_bits, dtype=np.uint8).reshape(-1),
                               np.asarray(syn, dtype=np.uint8)])
        if bits.size != m + spec.N - spec.K:
            raise ValueError("block does not match the stream layout")
        out.append(np.packbits(bits).tobytes())
    return b"".join(out)


def unpack_stream(data: bytes, spec: CodeSpec, mode: str | None = None):
    """Inverse of :func:`pack_stream`; returns ``(mode, K1, blocks)``."""
    if len(data) < _HEADER.size:
        raise FrameError("stream shorter than its header")
    magic, code, digest, K1, count = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FrameError("bad magic bytes")
    names = {v: k for k, v in MODES.items()}
    if code not in names:
        raise FrameError(f"unknown mode byte {code}")
    found = names[code]
    if mode is not None and found != mode:
        raise FrameError(f"stream holds mode {found!r}, expected {mode!r}")
    if digest != spec.digest():
        raise FrameError("stream was produced with a different code spec")
    if K1 > spec.K:
        raise FrameError(f"K1={K1} exceeds K={spec.K}")
    m = systematic_length(found, K1, spec)
    nb = block_bytes(found, K1, spec)
    body = data[_HEADER.size:]
    if len(body) != nb * count:
        raise FrameError(f"stream body has {len(body)} bytes, expected {nb * count}")
    raw = np.frombuffer(body, dtype=np.uint8).reshape(count, nb)
    bits = np.unpackbits(raw, axis=1, count=m + spec.N - spec.K)
    return found, K1, [(row[:m], row[m:]) for row in bits]
