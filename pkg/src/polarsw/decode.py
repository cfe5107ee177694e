"""SC and SCL coset decoding.

The decoders find the most plausible member of the coset selected by a
syndrome: frozen positions are forced to the syndrome bits, information
positions are decided from their synthetic-channel LLRs. Path metrics use the
log-domain penalty form, where a path pays ``|L|`` whenever it decides
against the sign of ``L``. Ties between paths go to the lexicographically
smaller ``u`` prefix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .crc import WIDTH as CRC_WIDTH, CrcConfig, crc_check
from .polar_core import CodeSpec, _bitrev_cached

LLR_CLAMP = 40.0


@dataclass(frozen=True)
class LlrVector:
    """Channel LLRs ``log P(0)/P(1)``, clamped to +-LLR_CLAMP."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("LLRs must be a nonempty 1-d vector")
        if np.isnan(v).any():
            raise ValueError("LLRs must not be NaN")
        np.clip(v, -LLR_CLAMP, LLR_CLAMP, out=v)
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size


@dataclass(frozen=True)
class DecodeResult:
    u_hat: np.ndarray
    x_hat: np.ndarray
    crc_pass: bool
    selected_metric: float


def init_llrs(y, p: float, l_crc: int = 0) -> LlrVector:
    """LLRs of x given side information y over BSC(p); the CRC tail is uninformative."""
    if not 0 < p < 0.5:
        raise ValueError(f"p must lie in (0, 0.5), got {p}")
    y = np.asarray(y)
    if y.ndim != 1 or y.size == 0:
        raise ValueError("y must be a nonempty 1-d bit vector")
    if not 0 <= l_crc < y.size:
        raise ValueError(f"l_crc must lie in [0, {y.size})")
    mag = math.log((1 - p) / p)
    llr = np.where(y.astype(np.uint8) & 1, -mag, mag)
    if l_crc:
        llr[-l_crc:] = 0.0
    return LlrVector(llr)


def _prepare(llrs, spec: CodeSpec, syndrome):
    if not isinstance(llrs, LlrVector):
        llrs = LlrVector(llrs)
    if len(llrs) != spec.N:
        raise ValueError(f"LLR vector has length {len(llrs)}, expected N={spec.N}")
    s = np.asarray(syndrome)
    if s.ndim != 1 or s.size != spec.N - spec.K:
        raise ValueError(f"syndrome must have N-K={spec.N - spec.K} bits")
    perm = _bitrev_cached(spec.n)
    frozen = 1 - spec.info_mask
    fvals = np.zeros(spec.N, dtype=np.uint8)
    fvals[spec.frozen_set] = s.astype(np.uint8) & 1
    return llrs.values[perm], frozen, fvals, perm


def sc_decode(llrs, spec: CodeSpec, syndrome) -> DecodeResult:
    ch, frozen, fvals, perm = _prepare(llrs, spec, syndrome)
    u, xr, metric = kernels.sc(ch, frozen, fvals)
    return DecodeResult(u_hat=u, x_hat=xr[perm], crc_pass=True,
                        selected_metric=float(metric))


def scl_decode(llrs, spec: CodeSpec, syndrome, list_size: int,
               crc_cfg: CrcConfig | None = None) -> DecodeResult:
    """List decoding; with ``crc_cfg`` the best path passing the CRC is chosen.

    When no path passes, the best-metric path is returned with
    ``crc_pass=False``. Without a CRC, ``crc_pass`` is always True.
    """
    if list_size < 1:
        raise ValueError("list_size must be >= 1")
    if crc_cfg is not None and spec.l_crc != CRC_WIDTH:
        raise ValueError(f"CRC selection needs a spec with l_crc={CRC_WIDTH}")
    ch, frozen, fvals, perm = _prepare(llrs, spec, syndrome)
    u, xr, pm = kernels.scl(ch, frozen, fvals, int(list_size))
    # paths come in lexicographic order, so a stable sort breaks metric ties
    ranked = np.argsort(pm, kind="stable")
    pick, ok = ranked[0], True
    if crc_cfg is not None:
        ok = False
        for r in ranked:
            if crc_check(xr[r][perm], crc_cfg):
                pick, ok = r, True
                break
    return DecodeResult(u_hat=u[pick].copy(), x_hat=xr[pick][perm], crc_pass=ok,
                        selected_metric=float(pm[pick]))
