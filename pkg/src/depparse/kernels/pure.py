"""Pure-numpy implementations of the hot kernels.

Reference semantics for the compiled backend; also the fallback when the
extension is unavailable. Floating-point summation order differs between
the two backends, so results agree to rounding, not bitwise.
"""

import numpy as np

# Sentinel for forbidden arcs. A large finite value instead of -inf so that
# score arithmetic inside contractions never produces nan.
NEG = -1e12


def conv1d_forward(x, w, b):
    """Windowed convolution over the token axis.

    x: (n, d) token rows, w: (c, k, d) filters, b: (c,) bias.
    Window i covers rows i..i+k-1; tail windows are zero-padded, so the
    output is (n, c).
    """
    x = np.ascontiguousarray(x)
    w = np.ascontiguousarray(w, dtype=x.dtype)
    b = np.ascontiguousarray(b, dtype=x.dtype)
    n, d = x.shape
    c, k, _ = w.shape
    xp = np.zeros((n + k - 1, d), dtype=x.dtype)
    xp[:n] = x
    windows = np.lib.stride_tricks.sliding_window_view(xp, (k, d))[:, 0]
    return np.tensordot(windows, w, axes=((1, 2), (1, 2))) + b


def conv1d_backward(x, w, g):
    """Gradients of conv1d_forward w.r.t. (x, w, b) given output grad g (n, c)."""
    x = np.ascontiguousarray(x)
    w = np.ascontiguousarray(w, dtype=x.dtype)
    g = np.ascontiguousarray(g, dtype=x.dtype)
    n, d = x.shape
    c, k, _ = w.shape
    xp = np.zeros((n + k - 1, d), dtype=x.dtype)
    xp[:n] = x
    windows = np.lib.stride_tricks.sliding_window_view(xp, (k, d))[:, 0]
    gw = np.tensordot(g, windows, axes=(0, 0))  # (c, k, d)
    gb = g.sum(axis=0)
    wg = np.tensordot(g, w, axes=(1, 0))  # (n, k, d)
    gxp = np.zeros((n + k - 1, d), dtype=x.dtype)
    for j in range(k):
        gxp[j : j + n] += wg[:, j, :]
    return gxp[:n], gw, gb


def _find_cycle(heads):
    """Return one cycle (list of nodes) in the head assignment, or None."""
    m = len(heads)
    color = np.zeros(m, dtype=np.int8)  # 0 new, 1 on path, 2 done
    color[0] = 2
    for start in range(1, m):
        if color[start]:
            continue
        path = []
        v = start
        while color[v] == 0:
            color[v] = 1
            path.append(v)
            v = heads[v]
        if color[v] == 1:
            return path[path.index(v) :]
        for u in path:
            color[u] = 2
    return None


def chu_liu_edmonds(scores):
    """Maximum arborescence rooted at node 0 of a dense score matrix.

    scores[h, d] is the score of attaching d under h. The diagonal and the
    root's incoming column are ignored. Returns an int array of heads with
    heads[0] = -1.
    """
    s = np.array(scores, dtype=np.float64)
    m = s.shape[0]
    np.fill_diagonal(s, NEG)
    s[:, 0] = NEG
    heads = np.full(m, -1, dtype=np.int64)
    if m == 1:
        return heads
    heads[1:] = np.argmax(s[:, 1:], axis=0)
    cycle = _find_cycle(heads)
    if cycle is None:
        return heads

    cyc = np.array(sorted(cycle), dtype=np.int64)
    in_cycle = np.zeros(m, dtype=bool)
    in_cycle[cyc] = True
    rest = np.where(~in_cycle)[0]  # always contains node 0
    nrest = len(rest)
    cyc_score = s[heads[cyc], cyc].sum()

    # Contract the cycle into one extra node appended after `rest`.
    mc = nrest + 1
    s2 = np.full((mc, mc), NEG)
    s2[:nrest, :nrest] = s[np.ix_(rest, rest)]
    gain = s[np.ix_(rest, cyc)] - s[heads[cyc], cyc][None, :]
    enter_v = np.argmax(gain, axis=1)  # best cycle entry point per external head
    s2[:nrest, nrest] = gain[np.arange(nrest), enter_v] + cyc_score
    out_sc = s[np.ix_(cyc, rest)]
    exit_v = np.argmax(out_sc, axis=0)  # best cycle exit point per external dep
    s2[nrest, :nrest] = out_sc[exit_v, np.arange(nrest)]

    sub = chu_liu_edmonds(s2)

    expanded = np.full(m, -1, dtype=np.int64)
    expanded[cyc] = heads[cyc]  # keep cycle arcs, minus the one broken below
    for j, node in enumerate(rest):
        if node == 0:
            continue
        h = sub[j]
        expanded[node] = cyc[exit_v[j]] if h == nrest else rest[h]
    hc = sub[nrest]  # head of the contracted node, an index into rest
    expanded[cyc[enter_v[hc]]] = rest[hc]
    return expanded
