"""Linear 16-bit CRC over bit vectors (CCITT polynomial, XMODEM conventions).

With a zero initial register and zero final xor the CRC is a linear map over
GF(2), so ``crc(a ^ b) == crc(a) ^ crc(b)`` for equal-length inputs. Any
non-zero ``initial_register`` or ``final_xor`` makes it affine; such configs
are accepted for checksumming but rejected where linearity matters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

WIDTH = 16


@dataclass(frozen=True)
class CrcConfig:
    polynomial: int = 0x1021
    width: int = WIDTH
    initial_register: int = 0x0000
    final_xor: int = 0x0000

    def __post_init__(self):
        if self.width != WIDTH:
            raise ValueError("only 16-bit CRCs are supported")
        for name in ("polynomial", "initial_register", "final_xor"):
            v = getattr(self, name)
            if not 0 <= v < 1 << WIDTH:
                raise ValueError(f"{name} must fit in {WIDTH} bits")

    @property
    def is_linear(self) -> bool:
        return self.initial_register == 0 and self.final_xor == 0


XMODEM = CrcConfig()


def _table(poly):
    t = np.zeros(256, dtype=np.uint16)
    for byte in range(256):
        reg = byte << 8
        for _ in range(8):
            reg = ((reg << 1) ^ poly) if reg & 0x8000 else reg << 1
            reg &= 0xFFFF
        t[byte] = reg
    return t.tolist()


_TABLES: dict[int, list[int]] = {}


def _bits(payload):
    arr = np.asarray(payload)
    if arr.ndim != 1:
        raise ValueError("payload must be one-dimensional")
    return arr.astype(np.uint8, copy=False) & 1


def crc_register(payload, cfg: CrcConfig = XMODEM) -> int:
    """CRC of a bit vector (MSB-first) as an integer."""
    bits = _bits(payload)
    if bits.size == 0:
        raise ValueError("payload must be nonempty")
    table = _TABLES.get(cfg.polynomial)
    if table is None:
        table = _TABLES[cfg.polynomial] = _table(cfg.polynomial)
    poly = cfg.polynomial
    reg = cfg.initial_register
    lead = bits.size % 8
    for b in bits[:lead].tolist():
        fb = ((reg >> 15) & 1) ^ b
        reg = (reg << 1) & 0xFFFF
        if fb:
            reg ^= poly
    for byte in np.packbits(bits[lead:]).tolist():
        reg = ((reg << 8) & 0xFFFF) ^ table[((reg >> 8) ^ byte) & 0xFF]
    return reg ^ cfg.final_xor


def crc_compute(payload, cfg: CrcConfig = XMODEM) -> np.ndarray:
    """16 CRC bits of ``payload``, MSB first."""
    reg = crc_register(payload, cfg)
    return ((reg >> np.arange(WIDTH - 1, -1, -1)) & 1).astype(np.uint8)


def crc_append(payload, N: int, cfg: CrcConfig = XMODEM) -> np.ndarray:
    """Complete an ``N - 16`` bit payload to ``N`` bits with its CRC."""
    bits = _bits(payload)
    if bits.size != N - WIDTH:
        raise ValueError(f"payload has {bits.size} bits, expected N - {WIDTH} = {N - WIDTH}")
    return np.concatenate([bits, crc_compute(bits, cfg)])


def crc_check(frame, cfg: CrcConfig = XMODEM) -> bool:
    bits = _bits(frame)
    if bits.size <= WIDTH:
        raise ValueError(f"frame must be longer than {WIDTH} bits")
    return crc_register(bits[:-WIDTH], cfg) == int(
        np.packbits(bits[-WIDTH:]).view(">u2")[0])
