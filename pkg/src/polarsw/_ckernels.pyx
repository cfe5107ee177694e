# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: butterfly transform, SC and SCL coset decoding, systematic
back-substitution. Semantics match ``_pykernels`` bit for bit.

The list decoder shares per-depth LLR and partial-sum arrays between paths
through reference-counted slots. Every write to a depth overwrites the whole
array, so copy-on-write never copies data, it only reassigns a slot. Decided
bits are recorded in a (bit, parent) trellis and recovered by traceback.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs
from libc.string cimport memcpy

cnp.import_array()

ctypedef cnp.uint8_t u8
ctypedef cnp.intp_t idx_t


cdef int _log2(Py_ssize_t N) except -1:
    cdef int n = 0
    while (<Py_ssize_t>1 << n) < N:
        n += 1
    if N < 1 or (<Py_ssize_t>1 << n) != N:
        raise ValueError(f"length {N} is not a power of two")
    return n


cdef inline int _ctz(Py_ssize_t i) noexcept nogil:
    cdef int t = 0
    while not (i & 1):
        i >>= 1
        t += 1
    return t


cdef inline double _f(double a, double b) noexcept nogil:
    cdef double aa = fabs(a)
    cdef double bb = fabs(b)
    cdef double m = aa if aa < bb else bb
    if (a < 0) != (b < 0):
        return -m
    return m


cdef inline void _update(const double* src, double* dst, const u8* bits,
                         Py_ssize_t h, bint right) noexcept nogil:
    cdef Py_ssize_t j
    cdef double a, b, aa, bb, m
    if right:
        for j in range(h):
            # multiplying by +-1 is exact: same value as the branchy b -/+ a
            dst[j] = src[j + h] + (1.0 - 2.0 * bits[j]) * src[j]
    else:
        for j in range(h):
            a = src[j]
            b = src[j + h]
            aa = fabs(a)
            bb = fabs(b)
            m = aa if aa < bb else bb
            dst[j] = -m if ((a < 0) != (b < 0)) else m


def butterfly(u):
    """Return ``u F^{(x)n}`` over GF(2) (no bit reversal)."""
    out = np.array(u, dtype=np.uint8, copy=True)
    cdef u8[::1] x = out
    cdef Py_ssize_t N = x.shape[0]
    _log2(N)
    cdef Py_ssize_t h = 1, start, j
    with nogil:
        while h < N:
            start = 0
            while start < N:
                for j in range(start, start + h):
                    x[j] ^= x[j + h]
                start += 2 * h
            h *= 2
    return out


def sc(llr, frozen, fvals):
    """Successive cancellation in tree order. Returns ``(u, xr, metric)``."""
    cdef const double[::1] ch = np.ascontiguousarray(llr, dtype=np.float64)
    cdef const u8[::1] fz = np.ascontiguousarray(frozen, dtype=np.uint8)
    cdef const u8[::1] fv = np.ascontiguousarray(fvals, dtype=np.uint8)
    cdef Py_ssize_t N = ch.shape[0]
    cdef int n = _log2(N)
    u_arr = np.zeros(N, dtype=np.uint8)
    xr_arr = np.zeros(N, dtype=np.uint8)
    alpha_arr = np.zeros(max(N, 2))
    bits_arr = np.zeros(max(N, 2), dtype=np.uint8)
    sa_arr = np.zeros(N, dtype=np.uint8)
    sb_arr = np.zeros(N, dtype=np.uint8)
    cdef u8[::1] u = u_arr
    cdef u8[::1] xr = xr_arr
    cdef double[::1] alpha = alpha_arr
    cdef u8[::1] bits = bits_arr
    cdef u8[::1] sa = sa_arr
    cdef u8[::1] sb = sb_arr
    cdef u8* cur
    cdef u8* oth
    cdef u8* tmp
    cdef double metric = 0.0, lam
    cdef Py_ssize_t i, j, h
    cdef int d, dstart, bit
    with nogil:
        for i in range(N):
            if n == 0:
                lam = ch[0]
            else:
                dstart = 1 if i == 0 else n - _ctz(i)
                for d in range(dstart, n + 1):
                    h = N >> d
                    if d == 1:
                        _update(&ch[0], &alpha[h], &bits[h], h, (i >> (n - d)) & 1)
                    else:
                        _update(&alpha[2 * h], &alpha[h], &bits[h], h, (i >> (n - d)) & 1)
                lam = alpha[1]
            if fz[i]:
                bit = fv[i]
            else:
                bit = 1 if lam < 0 else 0
            if (bit == 0 and lam < 0) or (bit == 1 and lam > 0):
                metric = metric + fabs(lam)
            u[i] = bit
            cur = &sa[0]
            oth = &sb[0]
            cur[0] = bit
            d = n
            while d > 0:
                h = N >> d
                if (i >> (n - d)) & 1:
                    for j in range(h):
                        oth[j] = bits[h + j] ^ cur[j]
                        oth[j + h] = cur[j]
                    tmp = cur
                    cur = oth
                    oth = tmp
                    d -= 1
                else:
                    memcpy(&bits[h], cur, h)
                    break
            if d == 0:
                memcpy(&xr[0], cur, N)
    return u_arr, xr_arr, metric


cdef class _ListDecoder:
    # raw pointers into numpy buffers kept alive by ``_keep``
    cdef Py_ssize_t N, W      # W: row stride, max(N, 2)
    cdef int n, L
    cdef double* alpha        # [L, W]
    cdef u8* bits             # [L, N]
    cdef idx_t* ptr_a         # [L, n + 1]
    cdef idx_t* ptr_b
    cdef idx_t* ref_a         # [n + 1, L]
    cdef idx_t* ref_b
    cdef idx_t* free_a        # [n + 1, L]
    cdef idx_t* free_b
    cdef idx_t* nfree_a       # [n + 1]
    cdef idx_t* nfree_b
    cdef idx_t* free_pid      # [L]
    cdef Py_ssize_t nfree_pid
    cdef u8* sa
    cdef u8* sb
    cdef list _keep

    def __cinit__(self, Py_ssize_t N, int n, int L):
        self.N = N
        self.n = n
        self.L = L
        cdef Py_ssize_t W = max(N, 2)
        self.W = W
        cdef double[:, ::1] alpha = np.zeros((L, W))
        cdef u8[:, ::1] bits = np.zeros((L, W), dtype=np.uint8)
        cdef idx_t[:, ::1] ptr_a = np.zeros((L, n + 1), dtype=np.intp)
        cdef idx_t[:, ::1] ptr_b = np.zeros((L, n + 1), dtype=np.intp)
        cdef idx_t[:, ::1] ref_a = np.zeros((n + 1, L), dtype=np.intp)
        cdef idx_t[:, ::1] ref_b = np.zeros((n + 1, L), dtype=np.intp)
        cdef idx_t[:, ::1] free_a = np.zeros((n + 1, L), dtype=np.intp)
        cdef idx_t[:, ::1] free_b = np.zeros((n + 1, L), dtype=np.intp)
        cdef idx_t[::1] nfree_a = np.zeros(n + 1, dtype=np.intp)
        cdef idx_t[::1] nfree_b = np.zeros(n + 1, dtype=np.intp)
        cdef idx_t[::1] free_pid = np.zeros(L, dtype=np.intp)
        cdef u8[::1] sa = np.zeros(W, dtype=np.uint8)
        cdef u8[::1] sb = np.zeros(W, dtype=np.uint8)
        self._keep = [alpha, bits, ptr_a, ptr_b, ref_a, ref_b, free_a, free_b,
                      nfree_a, nfree_b, free_pid, sa, sb]
        self.alpha = &alpha[0, 0]
        self.bits = &bits[0, 0]
        self.ptr_a = &ptr_a[0, 0]
        self.ptr_b = &ptr_b[0, 0]
        self.ref_a = &ref_a[0, 0]
        self.ref_b = &ref_b[0, 0]
        self.free_a = &free_a[0, 0]
        self.free_b = &free_b[0, 0]
        self.nfree_a = &nfree_a[0]
        self.nfree_b = &nfree_b[0]
        self.free_pid = &free_pid[0]
        self.sa = &sa[0]
        self.sb = &sb[0]
        cdef int d, s
        # path 0 owns slot 0 at every depth
        for d in range(1, n + 1):
            ref_a[d, 0] = 1
            ref_b[d, 0] = 1
            for s in range(L - 1):
                free_a[d, s] = L - 1 - s
                free_b[d, s] = L - 1 - s
            nfree_a[d] = L - 1
            nfree_b[d] = L - 1
        for s in range(L - 1):
            free_pid[s] = L - 1 - s
        self.nfree_pid = L - 1

    cdef inline idx_t cow_a(self, idx_t pid, int d) noexcept nogil:
        cdef idx_t* p = &self.ptr_a[pid * (self.n + 1) + d]
        cdef idx_t* ref = &self.ref_a[d * self.L]
        cdef idx_t s = p[0]
        if ref[s] == 1:
            return s
        ref[s] -= 1
        self.nfree_a[d] -= 1
        s = self.free_a[d * self.L + self.nfree_a[d]]
        ref[s] = 1
        p[0] = s
        return s

    cdef inline idx_t cow_b(self, idx_t pid, int d) noexcept nogil:
        cdef idx_t* p = &self.ptr_b[pid * (self.n + 1) + d]
        cdef idx_t* ref = &self.ref_b[d * self.L]
        cdef idx_t s = p[0]
        if ref[s] == 1:
            return s
        ref[s] -= 1
        self.nfree_b[d] -= 1
        s = self.free_b[d * self.L + self.nfree_b[d]]
        ref[s] = 1
        p[0] = s
        return s

    cdef void kill(self, idx_t pid) noexcept nogil:
        cdef int d
        cdef idx_t s
        cdef idx_t* pa = &self.ptr_a[pid * (self.n + 1)]
        cdef idx_t* pb = &self.ptr_b[pid * (self.n + 1)]
        for d in range(1, self.n + 1):
            s = pa[d]
            self.ref_a[d * self.L + s] -= 1
            if self.ref_a[d * self.L + s] == 0:
                self.free_a[d * self.L + self.nfree_a[d]] = s
                self.nfree_a[d] += 1
            s = pb[d]
            self.ref_b[d * self.L + s] -= 1
            if self.ref_b[d * self.L + s] == 0:
                self.free_b[d * self.L + self.nfree_b[d]] = s
                self.nfree_b[d] += 1
        self.free_pid[self.nfree_pid] = pid
        self.nfree_pid += 1

    cdef idx_t clone(self, idx_t pid) noexcept nogil:
        cdef int d
        self.nfree_pid -= 1
        cdef idx_t q = self.free_pid[self.nfree_pid]
        cdef idx_t* pa = &self.ptr_a[pid * (self.n + 1)]
        cdef idx_t* pb = &self.ptr_b[pid * (self.n + 1)]
        cdef idx_t* qa = &self.ptr_a[q * (self.n + 1)]
        cdef idx_t* qb = &self.ptr_b[q * (self.n + 1)]
        for d in range(1, self.n + 1):
            qa[d] = pa[d]
            self.ref_a[d * self.L + pa[d]] += 1
            qb[d] = pb[d]
            self.ref_b[d * self.L + pb[d]] += 1
        return q

    cdef double leaf_llr(self, idx_t pid, Py_ssize_t i, const double* ch) noexcept nogil:
        cdef int n = self.n
        cdef Py_ssize_t N = self.N
        cdef Py_ssize_t W = self.W
        cdef int d, dstart
        cdef Py_ssize_t h
        cdef idx_t s
        cdef const double* src
        cdef idx_t* pa = &self.ptr_a[pid * (n + 1)]
        cdef idx_t* pb = &self.ptr_b[pid * (n + 1)]
        if n == 0:
            return ch[0]
        dstart = 1 if i == 0 else n - _ctz(i)
        for d in range(dstart, n + 1):
            h = N >> d
            s = self.cow_a(pid, d)
            if d == 1:
                src = ch
            else:
                src = self.alpha + pa[d - 1] * W + 2 * h
            _update(src, self.alpha + s * W + h, self.bits + pb[d] * W + h,
                    h, (i >> (n - d)) & 1)
        return self.alpha[pa[n] * W + 1]

    cdef void combine(self, idx_t pid, Py_ssize_t i, int bit, u8* root) noexcept nogil:
        cdef int n = self.n
        cdef Py_ssize_t N = self.N
        cdef Py_ssize_t W = self.W
        cdef int d = n
        cdef Py_ssize_t h, j
        cdef idx_t s
        cdef u8* cur = self.sa
        cdef u8* oth = self.sb
        cdef u8* tmp
        cdef u8* left
        cdef idx_t* pb = &self.ptr_b[pid * (n + 1)]
        cur[0] = bit
        while d > 0:
            h = N >> d
            if (i >> (n - d)) & 1:
                left = self.bits + pb[d] * W + h
                for j in range(h):
                    oth[j] = left[j] ^ cur[j]
                    oth[j + h] = cur[j]
                tmp = cur
                cur = oth
                oth = tmp
                d -= 1
            else:
                s = self.cow_b(pid, d)
                memcpy(self.bits + s * W + h, cur, h)
                return
        memcpy(root, cur, N)


cdef inline bint _less(const double* cm, const double* pen, idx_t a, idx_t b) noexcept nogil:
    if cm[a] != cm[b]:
        return cm[a] < cm[b]
    # step penalty separates siblings whose sums round equal
    if pen[a] != pen[b]:
        return pen[a] < pen[b]
    return a < b


cdef void _select(idx_t* idx, Py_ssize_t count, Py_ssize_t k, const double* cm,
                  const double* pen) noexcept nogil:
    """Partition ``idx`` so its first ``k`` entries are the k smallest keys."""
    cdef Py_ssize_t lo = 0, hi = count - 1, i, j
    cdef idx_t pivot, t
    cdef Py_ssize_t target = k - 1
    while lo < hi:
        pivot = idx[(lo + hi) >> 1]
        i = lo
        j = hi
        while i <= j:
            while _less(cm, pen, idx[i], pivot):
                i += 1
            while _less(cm, pen, pivot, idx[j]):
                j -= 1
            if i <= j:
                t = idx[i]
                idx[i] = idx[j]
                idx[j] = t
                i += 1
                j -= 1
        if target <= j:
            hi = j
        elif target >= i:
            lo = i
        else:
            break


def scl(llr, frozen, fvals, int L):
    """Successive cancellation list decoding in tree order.

    Returns ``(u, xr, metrics)`` for the surviving paths in lexicographic
    order of ``u``.
    """
    if L < 1:
        raise ValueError("list size must be >= 1")
    cdef const double[::1] ch = np.ascontiguousarray(llr, dtype=np.float64)
    cdef const u8[::1] fz = np.ascontiguousarray(frozen, dtype=np.uint8)
    cdef const u8[::1] fv = np.ascontiguousarray(fvals, dtype=np.uint8)
    cdef Py_ssize_t N = ch.shape[0]
    cdef int n = _log2(N)
    cdef _ListDecoder dec = _ListDecoder(N, n, L)

    pm_arr = np.zeros(L)
    cdef double[::1] pm = pm_arr
    cdef idx_t[::1] order = np.zeros(L, dtype=np.intp)
    cdef idx_t[::1] neworder = np.zeros(L, dtype=np.intp)
    cdef u8[::1] newbit = np.zeros(L, dtype=np.uint8)
    cdef double[::1] newpm = np.zeros(L)
    cdef double[::1] lam = np.zeros(L)
    cdef double[::1] cm = np.zeros(2 * L)
    cdef double[::1] pen = np.zeros(2 * L)
    cdef idx_t[::1] cidx = np.zeros(2 * L, dtype=np.intp)
    cdef u8[::1] keep = np.zeros(2 * L, dtype=np.uint8)
    cdef u8[:, ::1] tbit = np.zeros((N, L), dtype=np.uint8)
    cdef idx_t[:, ::1] tpar = np.zeros((N, L), dtype=np.intp)
    xr_arr = np.zeros((L, N), dtype=np.uint8)
    cdef u8[:, ::1] xr = xr_arr

    cdef Py_ssize_t cnt = 1, newcnt, r, i, c, nc
    cdef idx_t pid, q
    cdef int bit
    cdef double l, base
    order[0] = 0

    with nogil:
        for i in range(N):
            for r in range(cnt):
                lam[r] = dec.leaf_llr(order[r], i, &ch[0])
            if fz[i]:
                bit = fv[i]
                for r in range(cnt):
                    pid = order[r]
                    l = lam[r]
                    if (bit == 0 and l < 0) or (bit == 1 and l > 0):
                        pm[pid] = pm[pid] + fabs(l)
                    else:
                        pm[pid] = pm[pid] + 0.0
                    tbit[i, pid] = bit
                    tpar[i, pid] = pid
                    dec.combine(pid, i, bit, &xr[r, 0])
                continue

            nc = 2 * cnt
            for r in range(cnt):
                base = pm[order[r]]
                l = lam[r]
                pen[2 * r] = fabs(l) if l < 0 else 0.0
                pen[2 * r + 1] = fabs(l) if l > 0 else 0.0
                cm[2 * r] = base + pen[2 * r]
                cm[2 * r + 1] = base + pen[2 * r + 1]
            if nc <= L:
                for c in range(nc):
                    keep[c] = 1
            else:
                for c in range(nc):
                    cidx[c] = c
                    keep[c] = 0
                _select(&cidx[0], nc, L, &cm[0], &pen[0])
                for c in range(L):
                    keep[cidx[c]] = 1
            for r in range(cnt):
                if not keep[2 * r] and not keep[2 * r + 1]:
                    dec.kill(order[r])
            newcnt = 0
            for r in range(cnt):
                pid = order[r]
                if keep[2 * r] and keep[2 * r + 1]:
                    q = dec.clone(pid)
                    neworder[newcnt] = pid
                    newbit[newcnt] = 0
                    newpm[newcnt] = cm[2 * r]
                    neworder[newcnt + 1] = q
                    newbit[newcnt + 1] = 1
                    newpm[newcnt + 1] = cm[2 * r + 1]
                    tpar[i, pid] = pid
                    tpar[i, q] = pid
                    newcnt += 2
                elif keep[2 * r] or keep[2 * r + 1]:
                    neworder[newcnt] = pid
                    newbit[newcnt] = 0 if keep[2 * r] else 1
                    newpm[newcnt] = cm[2 * r + newbit[newcnt]]
                    tpar[i, pid] = pid
                    newcnt += 1
            cnt = newcnt
            for r in range(cnt):
                pid = neworder[r]
                order[r] = pid
                pm[pid] = newpm[r]
                tbit[i, pid] = newbit[r]
                dec.combine(pid, i, newbit[r], &xr[r, 0])

    u_arr = np.zeros((cnt, N), dtype=np.uint8)
    cdef u8[:, ::1] u = u_arr
    metrics = np.zeros(cnt)
    for r in range(cnt):
        pid = order[r]
        metrics[r] = pm[pid]
        for i in range(N - 1, -1, -1):
            u[r, i] = tbit[i, pid]
            pid = tpar[i, pid]
    return u_arr, xr_arr[:cnt].copy(), metrics


cdef void _sys(u8* x, const u8* info, u8* u, Py_ssize_t m) noexcept nogil:
    cdef Py_ssize_t h, j
    if m == 1:
        if info[0]:
            u[0] = x[0]
        else:
            x[0] = u[0]
        return
    h = m >> 1
    _sys(x + h, info + h, u + h, h)
    for j in range(h):
        x[j] ^= x[j + h]
    _sys(x, info, u, h)
    for j in range(h):
        x[j] ^= x[j + h]


def sys_solve(xr_known, info, uvals):
    """Solve ``xr = u F`` given ``xr`` on the info positions and ``u`` off them."""
    x_arr = np.array(xr_known, dtype=np.uint8, copy=True)
    u_arr = np.array(uvals, dtype=np.uint8, copy=True)
    cdef const u8[::1] inf = np.ascontiguousarray(info, dtype=np.uint8)
    cdef u8[::1] x = x_arr
    cdef u8[::1] u = u_arr
    _log2(x.shape[0])
    with nogil:
        _sys(&x[0], &inf[0], &u[0], x.shape[0])
    return u_arr, x_arr
