"""Polar transform, bit reversal, BSC code construction, syndromes, spec files.

Index conventions are 0-based throughout. The transform is ``G_N = B_N F^{(x)n}``
with ``F = [[1, 0], [1, 1]]`` and ``B_N`` the bit-reversal permutation, so
``x = u G_N`` and ``G_N`` is its own inverse. Synthetic channel ``i`` is the
channel seen by ``u_i`` under successive cancellation; reading the bits of
``i`` from the most significant end, a 0 is a check-node ("minus") step and a
1 a variable-node ("plus") step.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from pathlib import Path

import numpy as np

from ._backend import kernels

SPEC_VERSION = "polarsw-spec v1"
DEFAULT_FIDELITY = 256
# coarse pre-merge granularity, as a multiple of the fidelity
PREBIN_FACTOR = 4


class SpecParseError(ValueError):
    """A spec file could not be parsed."""


class SpecValidationError(ValueError):
    """A spec violates the CodeSpec invariants."""


def _as_bits(bits, name="bits"):
    arr = np.asarray(bits)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if arr.dtype != np.uint8:
        if arr.size and (arr.min() < 0 or arr.max() > 1):
            raise ValueError(f"{name} must contain only 0/1")
        arr = arr.astype(np.uint8)
    return arr


def _log2_exact(N):
    n = int(N).bit_length() - 1
    if N < 1 or (1 << n) != N:
        raise ValueError(f"length {N} is not a power of two")
    return n


@dataclass(frozen=True)
class CodeSpec:
    """A constructed polar code.

    ``info_set`` holds the K information indices (the set A); the remaining
    N - K frozen indices carry the syndrome.
    """

    n: int
    K: int
    info_set: tuple[int, ...]
    design_p: float
    l_crc: int = 0

    def __post_init__(self):
        object.__setattr__(self, "info_set", tuple(int(i) for i in self.info_set))
        N = 1 << self.n if self.n >= 0 else 0
        if self.n < 1:
            raise SpecValidationError(f"n must be >= 1, got {self.n}")
        if not 0 < self.K < N:
            raise SpecValidationError(f"K must satisfy 0 < K < N={N}, got {self.K}")
        if len(self.info_set) != self.K:
            raise SpecValidationError(
                f"info_set has {len(self.info_set)} entries, expected K={self.K}")
        prev = -1
        for i in self.info_set:
            if i <= prev or i >= N:
                raise SpecValidationError("info_set must be strictly increasing within [0, N)")
            prev = i
        if not 0 < self.design_p < 0.5:
            raise SpecValidationError(f"design_p must lie in (0, 0.5), got {self.design_p}")
        if not 0 <= self.l_crc < N:
            raise SpecValidationError(f"l_crc must satisfy 0 <= l_crc < N, got {self.l_crc}")

    @property
    def N(self) -> int:
        return 1 << self.n

    @property
    def payload_length(self) -> int:
        """N' = N - l_crc, the number of source bits per block."""
        return self.N - self.l_crc

    @cached_property
    def info_mask(self) -> np.ndarray:
        mask = np.zeros(self.N, dtype=np.uint8)
        mask[list(self.info_set)] = 1
        mask.flags.writeable = False
        return mask

    @cached_property
    def frozen_set(self) -> np.ndarray:
        idx = np.flatnonzero(self.info_mask == 0)
        idx.flags.writeable = False
        return idx

    @cached_property
    def info_array(self) -> np.ndarray:
        idx = np.asarray(self.info_set, dtype=np.intp)
        idx.flags.writeable = False
        return idx

    def digest(self) -> bytes:
        """8-byte identifier of the code, used in compressed frame headers."""
        return hashlib.sha256(dumps_spec(self).encode()).digest()[:8]


def bit_reversal_permutation(n: int) -> np.ndarray:
    """Permutation of ``range(2**n)`` mapping i to its n-bit reversal."""
    if n < 0:
        raise ValueError("n must be >= 0")
    perm = np.zeros(1 << n, dtype=np.intp)
    idx = np.arange(1 << n)
    for b in range(n):
        perm |= ((idx >> b) & 1) << (n - 1 - b)
    return perm


@lru_cache(maxsize=32)
def _bitrev_cached(n):
    perm = bit_reversal_permutation(n)
    perm.flags.writeable = False
    return perm


def polar_transform(u) -> np.ndarray:
    """Return ``u G_N`` over GF(2). The map is an involution."""
    u = _as_bits(u, "u")
    n = _log2_exact(u.size)
    return kernels.butterfly(u)[_bitrev_cached(n)]


def compute_syndrome(x, spec: CodeSpec) -> np.ndarray:
    """Syndrome ``(x G_N)`` restricted to the frozen indices, ascending."""
    x = _as_bits(x, "x")
    if x.size != spec.N:
        raise ValueError(f"x has length {x.size}, expected N={spec.N}")
    return polar_transform(x)[spec.frozen_set]


# --- construction -----------------------------------------------------------
#
# A binary-input symmetric channel is a list of output-symbol pairs: one symbol
# has likelihoods (a, b) for inputs (0, 1) with a >= b, its conjugate (b, a).
# Pairs are stored as (b, d) with d = a - b. Both are formed from sums of
# nonnegative products, so b stays accurate for very good channels and d for
# nearly useless ones, where b -> 1/2 and a - b would cancel.

def _grouped(b, d, bins):
    """Merge symbols into at most ``bins`` groups uniform in h2(b / (a + b)).

    Merged symbols are adjacent in likelihood ratio, so each merge degrades
    the channel. Equal ratios always share a group; noiseless symbols (b = 0)
    form their own. Groups come out sorted by decreasing ratio.
    """
    s = 2 * b + d
    keep = s > 0
    b, d, s = b[keep], d[keep], s[keep]
    t = b / s
    with np.errstate(divide="ignore", invalid="ignore"):
        h = np.where(t > 0, -t * np.log2(t) - (1 - t) * np.log2(1 - t), 0.0)
    key = np.minimum((h * bins).astype(np.intp), bins - 1)
    key = np.where(t > 0, key + 1, 0)
    b = np.bincount(key, weights=b, minlength=bins + 1)
    d = np.bincount(key, weights=d, minlength=bins + 1)
    used = (2 * b + d) > 0
    return b[used], d[used]


@lru_cache(maxsize=8)
def _triangle(m):
    i, j = np.triu_indices(m)
    w = np.where(i == j, 1.0, 2.0)
    return i, j, w


# Symbol pairs (i, j) and (j, i) give the same output symbol up to
# conjugation, so only the upper triangle is formed, off-diagonal doubled.

def _minus(b, d, bins):
    i, j, w = _triangle(b.size)
    bi, bj, di, dj = b[i], b[j], d[i], d[j]
    # (a1 a2 + b1 b2, a1 b2 + b1 a2): b' = a1 b2 + b1 a2, d' = d1 d2
    nb = w * ((bi + di) * bj + bi * (bj + dj))
    return _grouped(nb, w * di * dj, bins)


def _plus(b, d, bins):
    i, j, w = _triangle(b.size)
    bi, bj, di, dj = b[i], b[j], d[i], d[j]
    # (a1 a2, b1 b2) and (a1 b2, b1 a2), the latter reoriented
    b1 = bi * bj
    d1 = bi * dj + di * bj + di * dj
    x, y = (bi + di) * bj, bi * (bj + dj)
    b2 = np.minimum(x, y)
    d2 = np.abs(di * bj - bi * dj)
    return _grouped(np.concatenate([w * b1, w * b2]),
                    np.concatenate([w * d1, w * d2]), bins)


def _pair_info(b, d):
    a = b + d
    s = a + b
    with np.errstate(divide="ignore", invalid="ignore"):
        ta = np.where(a > 0, a * np.log2(2 * a / s), 0.0)
        tb = np.where(b > 0, b * np.log2(2 * b / s), 0.0)
    return ta + tb


def _degrade(b, d, mu):
    """Merge adjacent symbols until at most ``mu`` remain.

    Each round merges the adjacent pairs whose capacity loss is a strict local
    minimum, cheapest first, which keeps merges disjoint. Merging is always a
    degradation, so the resulting error probability is an upper bound.
    """
    while b.size > mu:
        dI = _pair_info(b[:-1], d[:-1]) + _pair_info(b[1:], d[1:]) \
            - _pair_info(b[:-1] + b[1:], d[:-1] + d[1:])
        dI = np.maximum(dI, 0.0)
        m = dI.size
        left = np.empty(m, dtype=bool)
        left[0] = True
        left[1:] = dI[1:] < dI[:-1]
        right = np.empty(m, dtype=bool)
        right[-1] = True
        right[:-1] = dI[:-1] <= dI[1:]
        cand = np.flatnonzero(left & right)
        excess = b.size - mu
        if cand.size > excess:
            pick = np.lexsort((cand, dI[cand]))[:excess]
            cand = np.sort(cand[pick])
        starts = np.ones(b.size, dtype=bool)
        starts[cand + 1] = False
        seg = np.flatnonzero(starts)
        b = np.add.reduceat(b, seg)
        d = np.add.reduceat(d, seg)
    return b, d


@lru_cache(maxsize=16)
def _bounds(n: int, p: float, fidelity: int):
    """Per-channel (error bound, 1 - 2 * error bound), each accurate on its own end."""
    level = [(np.array([p]), np.array([1.0 - 2.0 * p]))]
    bins = PREBIN_FACTOR * fidelity
    for _ in range(n):
        nxt = []
        for b, d in level:
            nxt.append(_degrade(*_minus(b, d, bins), fidelity))
            nxt.append(_degrade(*_plus(b, d, bins), fidelity))
        level = nxt
    mass = np.array([(2 * b + d).sum() for b, d in level])
    pe = np.array([b.sum() for b, _ in level]) / mass
    margin = np.array([d.sum() for _, d in level]) / mass
    pe.flags.writeable = False
    margin.flags.writeable = False
    return pe, margin


def _check_construction_args(n, design_p, fidelity):
    if n < 0:
        raise ValueError("n must be >= 0")
    if not 0 < design_p < 0.5:
        raise ValueError(f"design_p must lie in (0, 0.5), got {design_p}")
    if fidelity < 2:
        raise ValueError("fidelity must be >= 2")


def synthetic_error_bounds(n: int, design_p: float,
                           fidelity: int = DEFAULT_FIDELITY) -> np.ndarray:
    """Upper bounds on the SC bit-error probability of all 2**n synthetic channels."""
    _check_construction_args(n, design_p, fidelity)
    return _bounds(int(n), float(design_p), int(fidelity))[0]


def reliability_order(n: int, design_p: float,
                      fidelity: int = DEFAULT_FIDELITY) -> np.ndarray:
    """Channel indices from most to least reliable.

    Channels with bound below 1/4 are ranked by the bound, the rest by
    ``1 - 2 Pe`` computed directly, which stays resolvable as Pe -> 1/2.
    Equal values rank the higher index as more reliable.
    """
    _check_construction_args(n, design_p, fidelity)
    return rank_channels(*_bounds(int(n), float(design_p), int(fidelity)))


def rank_channels(pe, margin) -> np.ndarray:
    """Order channels by error bound ``pe`` (with ``margin = 1 - 2 pe``)."""
    pe = np.asarray(pe, dtype=float)
    margin = np.asarray(margin, dtype=float)
    bad = pe >= 0.25
    key = np.where(bad, -margin, pe)
    idx = np.arange(pe.size)
    return np.lexsort((-idx, key, bad))


def construct_code(n: int, K: int, design_p: float,
                   fidelity: int = DEFAULT_FIDELITY, l_crc: int = 0) -> CodeSpec:
    """Pick the K most reliable synthetic channels of BSC(design_p)."""
    N = 1 << n
    if not 0 < K < N:
        raise ValueError(f"K must satisfy 0 < K < N={N}, got {K}")
    order = reliability_order(n, design_p, fidelity)
    info = np.sort(order[:K])
    return CodeSpec(n=n, K=K, info_set=tuple(info.tolist()),
                    design_p=float(design_p), l_crc=l_crc)


# --- spec files -------------------------------------------------------------

def dumps_spec(spec: CodeSpec) -> str:
    lines = [
        SPEC_VERSION,
        f"n = {spec.n}",
        f"N = {spec.N}",
        f"K = {spec.K}",
        f"design_p = {spec.design_p!r}",
        f"l_crc = {spec.l_crc}",
    ]
    if spec.l_crc == 16:
        lines.append("crc = xmodem16")
    lines.append("info_set = " + " ".join(str(i) for i in spec.info_set))
    return "\n".join(lines) + "\n"


def loads_spec(text: str) -> CodeSpec:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != SPEC_VERSION:
        raise SpecParseError(f"missing or unknown version line (expected {SPEC_VERSION!r})")
    fields = {}
    for ln in lines[1:]:
        key, sep, value = ln.partition("=")
        if not sep:
            raise SpecParseError(f"malformed line {ln!r}")
        key = key.strip()
        if key in fields:
            raise SpecParseError(f"duplicate field {key!r}")
        fields[key] = value.strip()

    def need(key, conv):
        if key not in fields:
            raise SpecParseError(f"missing field {key!r}")
        try:
            return conv(fields[key])
        except ValueError:
            raise SpecParseError(f"field {key!r}: cannot parse {fields[key]!r}") from None

    n = need("n", int)
    N = need("N", int)
    K = need("K", int)
    design_p = need("design_p", float)
    l_crc = need("l_crc", int)
    info = need("info_set", lambda v: tuple(int(t) for t in v.split()))
    if not math.isfinite(design_p):
        raise SpecParseError("field 'design_p': not finite")
    crc = fields.get("crc")
    if l_crc == 16 and crc != "xmodem16":
        raise SpecParseError("field 'crc': l_crc = 16 requires crc = xmodem16")
    if l_crc not in (0, 16):
        raise SpecValidationError(f"unsupported l_crc {l_crc} (only 0 and 16)")
    unknown = set(fields) - {"n", "N", "K", "design_p", "l_crc", "crc", "info_set"}
    if unknown:
        raise SpecParseError(f"unknown field(s): {', '.join(sorted(unknown))}")
    if n < 1 or N != 1 << n:
        raise SpecValidationError(f"N = {N} is not 2**n for n = {n}")
    return CodeSpec(n=n, K=K, info_set=info, design_p=design_p, l_crc=l_crc)


def save_spec(spec: CodeSpec, destination) -> None:
    Path(destination).write_text(dumps_spec(spec), encoding="utf-8")


def load_spec(source) -> CodeSpec:
    return loads_spec(Path(source).read_text(encoding="utf-8"))
