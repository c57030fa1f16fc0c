# cython: language_level=3
"""Compiled hot kernels: token-window convolution and Chu-Liu/Edmonds decoding.

Same contracts as depparse.kernels.pure; plain loops instead of numpy
vectorization. NEG mirrors pure.NEG.
"""

import numpy as np

cimport cython
cimport numpy as cnp

cnp.import_array()

cdef double NEG = -1e12

ctypedef fused real:
    float
    double


def conv1d_forward(x, w, b):
    x = np.ascontiguousarray(x)
    w = np.ascontiguousarray(w, dtype=x.dtype)
    b = np.ascontiguousarray(b, dtype=x.dtype)
    out = np.empty((x.shape[0], w.shape[0]), dtype=x.dtype)
    if x.dtype == np.float32:
        _conv_fwd[float](x, w, b, out)
    else:
        _conv_fwd[double](x, w, b, out)
    return out


@cython.boundscheck(False)
@cython.wraparound(False)
cdef void _conv_fwd(real[:, ::1] x, real[:, :, ::1] w, real[::1] b, real[:, ::1] out):
    cdef Py_ssize_t n = x.shape[0], d = x.shape[1]
    cdef Py_ssize_t c = w.shape[0], k = w.shape[1]
    cdef Py_ssize_t i, a, j, t
    cdef real acc
    for i in range(n):
        for a in range(c):
            acc = b[a]
            for j in range(k):
                if i + j >= n:
                    break  # zero-padded tail
                for t in range(d):
                    acc = acc + w[a, j, t] * x[i + j, t]
            out[i, a] = acc


def conv1d_backward(x, w, g):
    x = np.ascontiguousarray(x)
    w = np.ascontiguousarray(w, dtype=x.dtype)
    g = np.ascontiguousarray(g, dtype=x.dtype)
    gx = np.zeros_like(x)
    gw = np.zeros_like(w)
    gb = np.zeros(w.shape[0], dtype=x.dtype)
    if x.dtype == np.float32:
        _conv_bwd[float](x, w, g, gx, gw, gb)
    else:
        _conv_bwd[double](x, w, g, gx, gw, gb)
    return gx, gw, gb


@cython.boundscheck(False)
@cython.wraparound(False)
cdef void _conv_bwd(real[:, ::1] x, real[:, :, ::1] w, real[:, ::1] g,
                    real[:, ::1] gx, real[:, :, ::1] gw, real[::1] gb):
    cdef Py_ssize_t n = x.shape[0], d = x.shape[1]
    cdef Py_ssize_t c = w.shape[0], k = w.shape[1]
    cdef Py_ssize_t i, a, j, t
    cdef real go
    for i in range(n):
        for a in range(c):
            go = g[i, a]
            gb[a] = gb[a] + go
            for j in range(k):
                if i + j >= n:
                    break
                for t in range(d):
                    gw[a, j, t] = gw[a, j, t] + go * x[i + j, t]
                    gx[i + j, t] = gx[i + j, t] + go * w[a, j, t]


def chu_liu_edmonds(scores):
    s = np.array(scores, dtype=np.float64, order="C")
    return _cle(s)


@cython.boundscheck(False)
@cython.wraparound(False)
def _cle(s_arr):
    cdef double[:, ::1] s = s_arr
    cdef Py_ssize_t m = s.shape[0]
    cdef Py_ssize_t i, j, v, h
    cdef double best, gain, cyc_score
    cdef Py_ssize_t arg, plen, start, cyc_start, ncyc, nrest, mc
    cdef cnp.int64_t[::1] heads, path, cyc, rest, enter_v, exit_v, sub, expanded
    cdef cnp.int8_t[::1] color, in_cycle
    cdef double[:, ::1] s2

    for i in range(m):
        s[i, i] = NEG
        s[i, 0] = NEG

    heads_arr = np.full(m, -1, dtype=np.int64)
    heads = heads_arr
    if m == 1:
        return heads_arr
    for j in range(1, m):
        arg = 0
        best = s[0, j]
        for i in range(1, m):
            if i != j and s[i, j] > best:
                best = s[i, j]
                arg = i
        heads[j] = arg

    # Cycle detection with path coloring.
    color = np.zeros(m, dtype=np.int8)
    path = np.empty(m, dtype=np.int64)
    color[0] = 2
    cycle = None
    for start in range(1, m):
        if color[start]:
            continue
        plen = 0
        v = start
        while color[v] == 0:
            color[v] = 1
            path[plen] = v
            plen += 1
            v = heads[v]
        if color[v] == 1:
            cyc_start = 0
            while path[cyc_start] != v:
                cyc_start += 1
            cycle = [path[i] for i in range(cyc_start, plen)]
            break
        for i in range(plen):
            color[path[i]] = 2
    if cycle is None:
        return heads_arr

    cyc_arr = np.array(sorted(cycle), dtype=np.int64)
    cyc = cyc_arr
    ncyc = cyc.shape[0]
    in_cycle = np.zeros(m, dtype=np.int8)
    for i in range(ncyc):
        in_cycle[cyc[i]] = 1
    rest_arr = np.empty(m - ncyc, dtype=np.int64)
    rest = rest_arr
    nrest = 0
    for i in range(m):
        if not in_cycle[i]:
            rest[nrest] = i
            nrest += 1

    cyc_score = 0.0
    for i in range(ncyc):
        cyc_score += s[heads[cyc[i]], cyc[i]]

    # Contract the cycle into one extra node appended after `rest`.
    mc = nrest + 1
    s2_arr = np.full((mc, mc), NEG)
    s2 = s2_arr
    enter_v = np.zeros(nrest, dtype=np.int64)
    exit_v = np.zeros(nrest, dtype=np.int64)
    for i in range(nrest):
        for j in range(nrest):
            s2[i, j] = s[rest[i], rest[j]]
        best = NEG
        arg = 0
        for v in range(ncyc):
            gain = s[rest[i], cyc[v]] - s[heads[cyc[v]], cyc[v]]
            if gain > best:
                best = gain
                arg = v
        enter_v[i] = arg
        s2[i, nrest] = best + cyc_score
    for j in range(nrest):
        best = NEG
        arg = 0
        for v in range(ncyc):
            if s[cyc[v], rest[j]] > best:
                best = s[cyc[v], rest[j]]
                arg = v
        exit_v[j] = arg
        s2[nrest, j] = best

    sub = _cle(s2_arr)

    expanded_arr = np.full(m, -1, dtype=np.int64)
    expanded = expanded_arr
    for i in range(ncyc):
        expanded[cyc[i]] = heads[cyc[i]]
    for j in range(nrest):
        if rest[j] == 0:
            continue
        h = sub[j]
        if h == nrest:
            expanded[rest[j]] = cyc[exit_v[j]]
        else:
            expanded[rest[j]] = rest[h]
    h = sub[nrest]
    expanded[cyc[enter_v[h]]] = rest[h]
    return expanded_arr
