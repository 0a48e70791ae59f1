# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; semantics mirror ``_kernels_py`` exactly."""

from array import array

from libc.stdlib cimport malloc, free
from libc.string cimport memset

DEF KMAX = 8
DEF CMAX = 16


cdef inline void _mark(const long long[:] fan, long long first, long long total,
                       const long long[:] pos, unsigned char* mark) noexcept nogil:
    cdef long long i, n, m, j, base
    for i in range(pos.shape[0]):
        n = pos[i] >> 1
        if n >= first:
            mark[n] = 1
    n = total - 1
    while n >= first:
        if mark[n]:
            base = 3 * (n - first)
            for j in range(base, base + 3):
                m = fan[j] >> 1
                if m >= first:
                    mark[m] = 1
        n -= 1


def reachable(fan, long long num_pis, pos):
    cdef const long long[:] f = array("q", fan)
    cdef const long long[:] p = array("q", pos) if len(pos) else array("q", [0])
    cdef long long first = num_pis + 1
    cdef long long total = first + f.shape[0] // 3
    out = bytearray(total)
    cdef unsigned char[:] view = out
    if len(pos) and total > first:
        _mark(f, first, total, p, &view[0])
    return out


cdef inline int _union(const int* a, int na, const int* b, int nb, int* out, int k) noexcept nogil:
    cdef int i = 0, j = 0, n = 0
    while i < na or j < nb:
        if n >= k:
            return -1
        if j >= nb or (i < na and a[i] < b[j]):
            out[n] = a[i]
            i += 1
        elif i >= na or b[j] < a[i]:
            out[n] = b[j]
            j += 1
        else:
            out[n] = a[i]
            i += 1
            j += 1
        n += 1
    return n


cdef inline int _less(double fa, int sa, const int* la, double fb, int sb, const int* lb) noexcept nogil:
    cdef int i
    if fa != fb:
        return fa < fb
    if sa != sb:
        return sa < sb
    for i in range(sa):
        if la[i] != lb[i]:
            return la[i] < lb[i]
    return 0


cdef inline int _same(int sa, const int* la, int sb, const int* lb) noexcept nogil:
    cdef int i
    if sa != sb:
        return 0
    for i in range(sa):
        if la[i] != lb[i]:
            return 0
    return 1


def lut_map(fan, long long num_pis, pos, int k=6, int max_cuts=8):
    if k < 1 or k > KMAX or max_cuts < 1 or max_cuts > CMAX:
        raise ValueError("lut_map parameters out of compiled range")
    cdef const long long[:] f = array("q", fan)
    cdef const long long[:] p = array("q", pos) if len(pos) else array("q", [0])
    cdef long long first = num_pis + 1
    cdef long long total = first + f.shape[0] // 3
    if total == first or not len(pos):
        return 0
    cdef long long n, m, j, base, leaf
    cdef int a, b, c, i, q, nf, na, nb, size, pos_i, worst
    cdef int opt = max_cuts + 1
    cdef int cap = opt * opt * opt
    cdef unsigned char* mark = <unsigned char*> malloc(total)
    cdef unsigned char* req = <unsigned char*> malloc(total)
    cdef long long* refs = <long long*> malloc(total * sizeof(long long))
    cdef double* flow = <double*> malloc(total * sizeof(double))
    cdef int* ncut = <int*> malloc(total * sizeof(int))
    cdef int* csize = <int*> malloc(total * max_cuts * sizeof(int))
    cdef int* cleaf = <int*> malloc(total * max_cuts * KMAX * sizeof(int))
    cdef int* bufa = <int*> malloc(cap * KMAX * sizeof(int))
    cdef int* bufb = <int*> malloc(cap * KMAX * sizeof(int))
    cdef int* sza = <int*> malloc(cap * sizeof(int))
    cdef int* szb = <int*> malloc(cap * sizeof(int))
    cdef int* optl = <int*> malloc(opt * KMAX * sizeof(int))
    cdef int* opts = <int*> malloc(opt * sizeof(int))
    cdef double keptf[CMAX]
    cdef int kepts[CMAX]
    cdef int keptl[CMAX * KMAX]
    cdef int tmp[KMAX]
    cdef int nkept, nopt, npart, nnext
    cdef double acc
    cdef long long fins[3]
    cdef int* swap
    cdef long long count = 0
    try:
        memset(mark, 0, total)
        memset(req, 0, total)
        memset(refs, 0, total * sizeof(long long))
        with nogil:
            _mark(f, first, total, p, mark)
            for n in range(first, total):
                if mark[n]:
                    base = 3 * (n - first)
                    for j in range(base, base + 3):
                        refs[f[j] >> 1] += 1
            for j in range(p.shape[0]):
                refs[p[j] >> 1] += 1

            for n in range(first, total):
                ncut[n] = 0
                if not mark[n]:
                    continue
                base = 3 * (n - first)
                nf = 0
                for j in range(base, base + 3):
                    m = f[j] >> 1
                    if m != 0:
                        fins[nf] = m
                        nf += 1
                npart = 1
                sza[0] = 0
                for a in range(nf):
                    m = fins[a]
                    optl[0] = <int> m
                    opts[0] = 1
                    nopt = 1
                    if m >= first:
                        for b in range(ncut[m]):
                            opts[nopt] = csize[m * max_cuts + b]
                            for i in range(opts[nopt]):
                                optl[nopt * KMAX + i] = cleaf[(m * max_cuts + b) * KMAX + i]
                            nopt += 1
                    nnext = 0
                    for b in range(npart):
                        for c in range(nopt):
                            size = _union(&bufa[b * KMAX], sza[b], &optl[c * KMAX], opts[c],
                                          &bufb[nnext * KMAX], k)
                            if size >= 0:
                                szb[nnext] = size
                                nnext += 1
                    swap = bufa
                    bufa = bufb
                    bufb = swap
                    swap = sza
                    sza = szb
                    szb = swap
                    npart = nnext
                nkept = 0
                for b in range(npart):
                    acc = 1.0
                    for i in range(sza[b]):
                        leaf = bufa[b * KMAX + i]
                        if leaf >= first:
                            acc += flow[leaf] / (refs[leaf] if refs[leaf] > 0 else 1)
                    size = sza[b]
                    q = 0
                    for c in range(nkept):
                        if _same(kepts[c], &keptl[c * KMAX], size, &bufa[b * KMAX]):
                            q = 1
                            break
                    if q:
                        continue
                    if nkept == max_cuts and not _less(acc, size, &bufa[b * KMAX],
                                                       keptf[nkept - 1], kepts[nkept - 1],
                                                       &keptl[(nkept - 1) * KMAX]):
                        continue
                    pos_i = nkept if nkept < max_cuts else max_cuts - 1
                    while pos_i > 0 and _less(acc, size, &bufa[b * KMAX], keptf[pos_i - 1],
                                              kepts[pos_i - 1], &keptl[(pos_i - 1) * KMAX]):
                        if pos_i < max_cuts:
                            keptf[pos_i] = keptf[pos_i - 1]
                            kepts[pos_i] = kepts[pos_i - 1]
                            for i in range(KMAX):
                                keptl[pos_i * KMAX + i] = keptl[(pos_i - 1) * KMAX + i]
                        pos_i -= 1
                    keptf[pos_i] = acc
                    kepts[pos_i] = size
                    for i in range(size):
                        keptl[pos_i * KMAX + i] = bufa[b * KMAX + i]
                    if nkept < max_cuts:
                        nkept += 1
                ncut[n] = nkept
                flow[n] = keptf[0]
                for c in range(nkept):
                    csize[n * max_cuts + c] = kepts[c]
                    for i in range(kepts[c]):
                        cleaf[(n * max_cuts + c) * KMAX + i] = keptl[c * KMAX + i]

            for j in range(p.shape[0]):
                n = p[j] >> 1
                if n >= first:
                    req[n] = 1
            n = total - 1
            while n >= first:
                if req[n]:
                    count += 1
                    for i in range(csize[n * max_cuts]):
                        leaf = cleaf[(n * max_cuts) * KMAX + i]
                        if leaf >= first:
                            req[leaf] = 1
                n -= 1
    finally:
        free(mark); free(req); free(refs); free(flow); free(ncut); free(csize)
        free(cleaf); free(bufa); free(bufb); free(sza); free(szb); free(optl); free(opts)
    return count
