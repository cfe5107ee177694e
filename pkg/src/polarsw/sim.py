"""Monte-Carlo BER measurement for the three codecs.

Each block draws its sources from its own generator, seeded by
``SeedSequence([seed, block_index])``, so a point's tallies do not depend
on how blocks are spread over workers. Uniforms are drawn independently of
p, so points of one sweep share their randomness (common random numbers).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .polar_core import CodeSpec, compute_syndrome
from .systematic import SystematicSpec
from .sw import (LIST_SIZE, RateSplit, asym_decode_frame, compress_single,
                 decompress_single_frame, nonasym_decode_frames,
                 nonasym_encode_x, nonasym_encode_y)

MODES = ("single", "asym", "nonasym")
RNG_ALGORITHM = "numpy PCG64 via SeedSequence([seed, block_index])"
CHUNK = 16


def binary_entropy(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def entropy_inverse(h: float, tol: float = 1e-12) -> float:
    """The p in [0, 0.5] with H(p) = h, by bisection."""
    if not 0.0 <= h <= 1.0:
        raise ValueError(f"h must lie in [0, 1], got {h}")
    if h == 1.0:
        # H is flat at 1/2; bisection would stop where H(p) rounds to 1
        return 0.5
    lo, hi = 0.0, 0.5
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if binary_entropy(mid) < h:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(block)]))


def gen_source_pair(n_payload: int, p: float, rng):
    """x uniform, y = x ^ z with z ~ Ber(p) i.i.d."""
    if not 0 < p < 0.5:
        raise ValueError(f"p must lie in (0, 0.5), got {p}")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    x = rng.integers(0, 2, n_payload, dtype=np.uint8)
    z = (rng.random(n_payload) < p).astype(np.uint8)
    return x, x ^ z


@dataclass(frozen=True)
class TrialConfig:
    mode: str
    spec: CodeSpec
    p_list: tuple[float, ...]
    split: RateSplit | None = None
    max_blocks: int = 10_000
    target_errors: int = 100
    seed: int = 0
    list_size: int = LIST_SIZE
    jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "p_list", tuple(float(p) for p in self.p_list))
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.max_blocks < 1:
            raise ValueError("max_blocks must be >= 1")
        if self.target_errors < 1:
            raise ValueError("target_errors must be >= 1")
        if any(not 0 < p < 0.5 for p in self.p_list):
            raise ValueError("p values must lie in (0, 0.5)")
        if self.mode == "nonasym":
            if self.split is None:
                raise ValueError("nonasym mode needs a split")
            self.split.validate(self.spec)


@dataclass(frozen=True)
class BerRecord:
    p: float
    h_cond: float
    blocks: int
    bit_errors_x: int
    bit_errors_y: int
    block_errors: int
    crc_fail_count: int
    payload_bits: int = field(repr=False)
    mode: str = field(default="asym", repr=False)

    @property
    def ber_avg(self) -> float:
        """Averaged over both sources in SW modes, over x alone in single mode."""
        if self.blocks == 0:
            return 0.0
        bits = self.payload_bits * self.blocks * (1 if self.mode == "single" else 2)
        return (self.bit_errors_x + self.bit_errors_y) / bits

    @property
    def ber_x(self) -> float:
        return self.bit_errors_x / (self.payload_bits * self.blocks) if self.blocks else 0.0

    @property
    def ber_y(self) -> float:
        return self.bit_errors_y / (self.payload_bits * self.blocks) if self.blocks else 0.0


class CosetViolation(AssertionError):
    """A decoder returned a word outside the transmitted coset."""


def _require(cond):
    if not cond:
        raise CosetViolation("decoded frame is not in the transmitted coset")


def run_block(mode: str, spec: CodeSpec, split, p: float, seed: int, block: int,
              list_size: int = LIST_SIZE):
    """One trial; returns ``(bit_errors_x, bit_errors_y, crc_pass)``."""
    n = spec.payload_length
    x, y = gen_source_pair(n, p, block_rng(seed, block))
    if mode == "single":
        # the single source is the correlation noise itself, Ber(p)
        src = x ^ y
        s = compress_single(src, spec)
        fhat, ok = decompress_single_frame(s, p, spec, list_size)
        _require(np.array_equal(compute_syndrome(fhat, spec), s))
        return int(np.count_nonzero(fhat[:n] ^ src)), 0, ok
    if mode == "asym":
        s = compress_single(x, spec)
        fhat, ok = asym_decode_frame(s, y, p, spec, list_size)
        _require(np.array_equal(compute_syndrome(fhat, spec), s))
        return int(np.count_nonzero(fhat[:n] ^ x)), 0, ok
    sspec = SystematicSpec(spec)
    ex = nonasym_encode_x(x, split, sspec)
    ey = nonasym_encode_y(y, split, sspec)
    xf, yf, _, ok = nonasym_decode_frames(ex, ey, split, p, sspec, list_size)
    _require(np.array_equal(compute_syndrome(xf, spec), ex.s_x))
    _require(np.array_equal(compute_syndrome(yf, spec), ey.s_y))
    return (int(np.count_nonzero(xf[:n] ^ x)), int(np.count_nonzero(yf[:n] ^ y)), ok)


def _run_chunk(args):
    mode, spec, split, p, seed, start, stop, list_size = args
    return [run_block(mode, spec, split, p, seed, b, list_size) for b in range(start, stop)]


def _chunks(cfg, p):
    for start in range(0, cfg.max_blocks, CHUNK):
        yield (cfg.mode, cfg.spec, cfg.split, p, cfg.seed, start,
               min(start + CHUNK, cfg.max_blocks), cfg.list_size)


def _tally(cfg, p, results_iter):
    bx = by = blk = fails = used = 0
    for chunk in results_iter:
        for ex, ey, ok in chunk:
            used += 1
            bx += ex
            by += ey
            blk += (ex + ey) > 0
            fails += not ok
            if bx + by >= cfg.target_errors:
                break
        else:
            continue
        break
    return BerRecord(p=p, h_cond=binary_entropy(p), blocks=used, bit_errors_x=bx,
                     bit_errors_y=by, block_errors=blk, crc_fail_count=fails,
                     payload_bits=cfg.spec.payload_length, mode=cfg.mode)


def _ordered(pool, cfg, p):
    """Chunk results in block order, keeping a bounded number in flight."""
    pending = []
    it = _chunks(cfg, p)
    window = 2 * max(1, cfg.jobs)
    try:
        for args in it:
            pending.append(pool.submit(_run_chunk, args))
            if len(pending) >= window:
                yield pending.pop(0).result()
        while pending:
            yield pending.pop(0).result()
    finally:
        for f in pending:
            f.cancel()


def run_point(cfg: TrialConfig, p: float, pool=None) -> BerRecord:
    """Run blocks until ``target_errors`` bit errors or ``max_blocks``.

    The stopping block is the first at which the running error count reaches
    the target, independent of scheduling.
    """
    if not 0 < p < 0.5:
        raise ValueError(f"p must lie in (0, 0.5), got {p}")
    if pool is None and cfg.jobs <= 1:
        return _tally(cfg, p, map(_run_chunk, _chunks(cfg, p)))
    if pool is None:
        with ProcessPoolExecutor(cfg.jobs) as own:
            return _tally(cfg, p, _ordered(own, cfg, p))
    return _tally(cfg, p, _ordered(pool, cfg, p))


def run_sweep(cfg: TrialConfig) -> list[BerRecord]:
    if list(cfg.p_list) != sorted(cfg.p_list):
        raise ValueError("p_list must be ascending")
    if cfg.jobs <= 1:
        return [run_point(cfg, p) for p in cfg.p_list]
    with ProcessPoolExecutor(cfg.jobs) as pool:
        return [run_point(cfg, p, pool) for p in cfg.p_list]


def default_jobs() -> int:
    return os.cpu_count() or 1


class ThresholdBelowGrid(ValueError):
    pass


class ThresholdAboveGrid(ValueError):
    """Every grid point passes; ``lower_bound`` is the last entropy tried."""

    def __init__(self, lower_bound: float):
        super().__init__(f"threshold above grid (>= {lower_bound:.6f})")
        self.lower_bound = lower_bound


def threshold_from_records(records, target_ber: float, metric: str = "auto") -> float:
    """Entropy at which the measured BER crosses ``target_ber``.

    The crossing lies between the last passing grid point and the first
    failing one; log10(BER) is interpolated linearly in H, or BER itself when
    the passing point saw no errors. ``metric`` selects the BER column:
    "avg", "x", or "auto": per-source x BER for single and asymmetric
    records, where only x is estimated, and the two-source average for
    nonasymmetric ones. A grid with no crossing raises ThresholdBelowGrid or
    ThresholdAboveGrid.
    """
    if not records:
        raise ValueError("no records")

    def ber(r):
        m = metric
        if m == "auto":
            m = "avg" if r.mode == "nonasym" else "x"
        return r.ber_avg if m == "avg" else r.ber_x

    bers = [ber(r) for r in records]
    fail = next((i for i, b in enumerate(bers) if b > target_ber), None)
    if fail is None:
        raise ThresholdAboveGrid(records[-1].h_cond)
    if fail == 0:
        raise ThresholdBelowGrid("threshold below grid")
    h0, h1 = records[fail - 1].h_cond, records[fail].h_cond
    b0, b1 = bers[fail - 1], bers[fail]
    if b0 > 0:
        t = (math.log10(target_ber) - math.log10(b0)) / (math.log10(b1) - math.log10(b0))
    else:
        t = target_ber / b1
    return h0 + t * (h1 - h0)


def find_threshold(cfg: TrialConfig, target_ber: float, records=None,
                   metric: str = "auto") -> float:
    if records is None:
        records = run_sweep(cfg)
    return threshold_from_records(records, target_ber, metric)
