"""Pure-numpy kernels, used when the compiled extension is unavailable.

Every routine here mirrors ``_ckernels.pyx`` operation for operation, so both
backends produce bit-identical outputs (including path metrics).

Conventions shared with the compiled backend
--------------------------------------------
All kernels work in *tree order*: the codeword ``xr = u F^{(x)n}`` without the
bit-reversal permutation. Decoded bits are indexed in natural order
``u_0 .. u_{N-1}``. LLR layout per path is a heap of length ``N``: the node
array at depth ``d`` (length ``N >> d``) lives at ``[N >> d, 2 * (N >> d))``.
"""

import numpy as np


def _log2(N):
    n = N.bit_length() - 1
    if N < 1 or (1 << n) != N:
        raise ValueError(f"length {N} is not a power of two")
    return n


def _ctz(i):
    return (i & -i).bit_length() - 1


def butterfly(u):
    """Return ``u F^{(x)n}`` over GF(2) (no bit reversal)."""
    x = np.array(u, dtype=np.uint8, copy=True)
    N = x.size
    _log2(N)
    h = 1
    while h < N:
        v = x.reshape(-1, 2, h)
        v[:, 0, :] ^= v[:, 1, :]
        h *= 2
    return x


def _f(a, b):
    m = np.minimum(np.abs(a), np.abs(b))
    return np.where((a < 0) != (b < 0), -m, m)


def _g(a, b, bits):
    return np.where(bits != 0, b - a, b + a)


def sc(llr, frozen, fvals):
    """Successive cancellation in tree order.

    Returns ``(u, xr, metric)``.
    """
    llr = np.ascontiguousarray(llr, dtype=np.float64)
    N = llr.size
    n = _log2(N)
    alpha = np.zeros(N)
    bits = np.zeros(N, dtype=np.uint8)
    u = np.zeros(N, dtype=np.uint8)
    metric = 0.0
    xr = np.zeros(N, dtype=np.uint8)
    if n == 0:
        lam = llr[0]
        bit = int(fvals[0]) if frozen[0] else int(lam < 0)
        if (bit == 0 and lam < 0) or (bit == 1 and lam > 0):
            metric = metric + abs(lam)
        u[0] = bit
        xr[0] = bit
        return u, xr, metric
    for i in range(N):
        dstart = 1 if i == 0 else n - _ctz(i)
        for d in range(dstart, n + 1):
            h = N >> d
            src = llr if d == 1 else alpha[2 * h:4 * h]
            a = src[:h]
            b = src[h:2 * h]
            if (i >> (n - d)) & 1:
                alpha[h:2 * h] = _g(a, b, bits[h:2 * h])
            else:
                alpha[h:2 * h] = _f(a, b)
        lam = float(alpha[1])
        bit = int(fvals[i]) if frozen[i] else int(lam < 0)
        if (bit == 0 and lam < 0) or (bit == 1 and lam > 0):
            metric = metric + abs(lam)
        u[i] = bit
        cur = np.array([bit], dtype=np.uint8)
        d = n
        while d > 0:
            h = N >> d
            if (i >> (n - d)) & 1:
                cur = np.concatenate((bits[h:2 * h] ^ cur, cur))
                d -= 1
            else:
                bits[h:2 * h] = cur
                break
        if d == 0:
            xr = cur
    return u, xr, metric


def scl(llr, frozen, fvals, L):
    """Successive cancellation list decoding in tree order.

    Paths are kept physically sorted by the lexicographic order of their
    decided prefixes, which makes ``2 * rank + bit`` a valid lexicographic key
    for the candidates at each information position. Candidates are ranked
    by (metric, step penalty, lexicographic key).

    Returns ``(u, xr, metrics)`` for the surviving paths in lexicographic
    order of ``u``.
    """
    llr = np.ascontiguousarray(llr, dtype=np.float64)
    N = llr.size
    n = _log2(N)
    if L < 1:
        raise ValueError("list size must be >= 1")
    alpha = np.zeros((1, N))
    bits = np.zeros((1, N), dtype=np.uint8)
    u = np.zeros((1, N), dtype=np.uint8)
    pm = np.zeros(1)
    xr = np.zeros((1, N), dtype=np.uint8)
    for i in range(N):
        if n == 0:
            lam = llr[:1].copy()
        else:
            dstart = 1 if i == 0 else n - _ctz(i)
            for d in range(dstart, n + 1):
                h = N >> d
                src = llr[None, :] if d == 1 else alpha[:, 2 * h:4 * h]
                a = src[:, :h]
                b = src[:, h:2 * h]
                if (i >> (n - d)) & 1:
                    alpha[:, h:2 * h] = _g(a, b, bits[:, h:2 * h])
                else:
                    alpha[:, h:2 * h] = _f(a, b)
            lam = alpha[:, 1].copy()
        cnt = pm.size
        if frozen[i]:
            bit = int(fvals[i])
            if bit:
                pm = pm + np.where(lam > 0, np.abs(lam), 0.0)
            else:
                pm = pm + np.where(lam < 0, np.abs(lam), 0.0)
            bitv = np.full(cnt, bit, dtype=np.uint8)
        else:
            pen = np.empty(2 * cnt)
            pen[0::2] = np.where(lam < 0, np.abs(lam), 0.0)
            pen[1::2] = np.where(lam > 0, np.abs(lam), 0.0)
            cm = np.repeat(pm, 2) + pen
            if 2 * cnt <= L:
                keep = np.arange(2 * cnt)
            else:
                # step penalty separates siblings whose sums round equal
                keep = np.sort(np.lexsort((np.arange(2 * cnt), pen, cm))[:L])
            rows = keep // 2
            bitv = (keep % 2).astype(np.uint8)
            alpha = alpha[rows]
            bits = bits[rows]
            u = u[rows]
            pm = cm[keep]
        u[:, i] = bitv
        cur = bitv[:, None]
        d = n
        while d > 0:
            h = N >> d
            if (i >> (n - d)) & 1:
                cur = np.concatenate((bits[:, h:2 * h] ^ cur, cur), axis=1)
                d -= 1
            else:
                bits[:, h:2 * h] = cur
                break
        if d == 0:
            xr = cur
    return u, np.ascontiguousarray(xr, dtype=np.uint8), pm


def _sys(x, info, u):
    m = x.size
    if m == 1:
        if info[0]:
            u[0] = x[0]
        else:
            x[0] = u[0]
        return
    h = m >> 1
    _sys(x[h:], info[h:], u[h:])
    x[:h] ^= x[h:]
    _sys(x[:h], info[:h], u[:h])
    x[:h] ^= x[h:]


def sys_solve(xr_known, info, uvals):
    """Solve ``xr = u F`` given ``xr`` on the info positions and ``u`` off them.

    Right-first traversal of the SC tree: back-substitution on the triangular
    transform, exact for any information set.
    """
    x = np.array(xr_known, dtype=np.uint8, copy=True)
    u = np.array(uvals, dtype=np.uint8, copy=True)
    info = np.asarray(info, dtype=np.uint8)
    _log2(x.size)
    _sys(x, info, u)
    return u, x
