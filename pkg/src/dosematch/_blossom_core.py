"""Array-based maximum-weight matching core (primal-dual blossom algorithm).

This is the O(N^3) Galil / van Rantwijk formulation of Edmonds' blossom
algorithm, restructured around flat numpy arrays so the whole solve compiles
under numba. Vertices are 0..n-1; blossom slots n..2n-1. Edges are referenced
by *endpoint indices*: endpoint ``2k`` is ``eu[k]``, endpoint ``2k+1`` is
``ev[k]``, and ``p ^ 1`` flips to the opposite end of edge ``p >> 1``.

The maximum-cardinality flag turns the solver into the engine for minimum
weight *perfect* matching (negate costs, require all vertices matched).

The same function body is used with and without numba; the pure-Python path
is a correctness fallback only.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


__all__ = ["max_weight_matching_arrays", "HAVE_NUMBA"]

# Labels: 0 = free, 1 = S (outer), 2 = T (inner), 5 = S with breadcrumb bit.
_S = 1
_T = 2


def _solve(n, eu, ev, ew, maxcardinality):
    m = eu.shape[0]
    mate = np.full(n, -1, np.int64)  # endpoint index of partner, or -1
    if n == 0 or m == 0:
        return mate, 0, 0

    maxweight = 0.0
    for k in range(m):
        if ew[k] > maxweight:
            maxweight = ew[k]

    endpoint = np.empty(2 * m, np.int64)
    for k in range(m):
        endpoint[2 * k] = eu[k]
        endpoint[2 * k + 1] = ev[k]

    # CSR adjacency of endpoint indices p with endpoint[p ^ 1] == v.
    deg = np.zeros(n, np.int64)
    for k in range(m):
        deg[eu[k]] += 1
        deg[ev[k]] += 1
    nb_off = np.zeros(n + 1, np.int64)
    for v in range(n):
        nb_off[v + 1] = nb_off[v] + deg[v]
    nb = np.empty(2 * m, np.int64)
    fill = nb_off[:n].copy()
    for k in range(m):
        u = eu[k]
        v = ev[k]
        nb[fill[u]] = 2 * k + 1
        fill[u] += 1
        nb[fill[v]] = 2 * k
        fill[v] += 1

    label = np.zeros(2 * n, np.int64)
    labelend = np.full(2 * n, -1, np.int64)  # endpoint p: edge through which labeled
    inblossom = np.arange(n)
    blossomparent = np.full(2 * n, -1, np.int64)
    blossombase = np.full(2 * n, -1, np.int64)
    for v in range(n):
        blossombase[v] = v
    bestedge = np.full(2 * n, -1, np.int64)  # endpoint-encoded least-slack edge
    dualvar = np.zeros(2 * n, np.float64)
    for v in range(n):
        dualvar[v] = maxweight
    allowedge = np.zeros(m, np.bool_)

    cap_child = n + 2
    childs = np.full((n, cap_child), -1, np.int64)  # row index b - n
    endps = np.full((n, cap_child), -1, np.int64)  # endpoint-encoded cycle edges
    nchild = np.zeros(n, np.int64)
    bbe = np.full((n, n if n > 0 else 1), -1, np.int64)  # per-blossom best edges (edge ids)
    nbbe = np.full(n, -1, np.int64)  # -1 means "no list"

    unused = np.empty(n, np.int64)
    for i in range(n):
        unused[i] = n + i

    qcap = n * n + 8 * n + 64
    queue = np.empty(qcap, np.int64)

    # Mutable counters shared with the closures (closures cannot rebind scalars):
    # st[0] = queue length, st[1] = unused-blossom stack height.
    st = np.zeros(2, np.int64)
    st[1] = n

    # Scratch buffers. collect_leaves runs to completion before control returns
    # to the caller, so one traversal stack is safe; output buffers are only
    # consumed in loops that never trigger another collection into the same
    # buffer mid-iteration.
    lvstack = np.empty(2 * n + 2, np.int64)
    lvbuf = np.empty(n + 1, np.int64)
    path = np.empty(2 * n, np.int64)
    tchild = np.empty(cap_child, np.int64)
    teps = np.empty(cap_child, np.int64)
    bet = np.full(2 * n, -1, np.int64)
    btouched = np.empty(2 * n, np.int64)
    astk_b = np.empty(2 * n + 4, np.int64)
    astk_v = np.empty(2 * n + 4, np.int64)
    rot = np.empty(cap_child, np.int64)
    rot2 = np.empty(cap_child, np.int64)
    estk = np.empty(n + 2, np.int64)

    def slack(k):
        return dualvar[eu[k]] + dualvar[ev[k]] - 2.0 * ew[k]

    def collect_leaves(b, out):
        cnt = 0
        sp = 1
        lvstack[0] = b
        while sp > 0:
            sp -= 1
            t = lvstack[sp]
            if t < n:
                out[cnt] = t
                cnt += 1
            else:
                row = t - n
                for i in range(nchild[row]):
                    lvstack[sp] = childs[row, i]
                    sp += 1
        return cnt

    def assign_label(w, t, p):
        # Label w's blossom; a T label immediately S-labels the base's mate.
        while True:
            b = inblossom[w]
            label[w] = t
            label[b] = t
            labelend[w] = p
            labelend[b] = p
            bestedge[w] = -1
            bestedge[b] = -1
            if t == _S:
                cnt = collect_leaves(b, lvbuf)
                for i in range(cnt):
                    queue[st[0]] = lvbuf[i]
                    st[0] += 1
                return
            base = blossombase[b]
            p = mate[base]
            w = endpoint[p]
            t = _S

    def scan_blossom(v, w):
        # Trace back from v and w to find a common ancestor (new blossom base)
        # or conclude the paths reach different roots (augmenting path found).
        pcnt = 0
        base = -1
        while v != -1:
            b = inblossom[v]
            if label[b] & 4:
                base = blossombase[b]
                break
            path[pcnt] = b
            pcnt += 1
            label[b] = 5
            if labelend[b] == -1:
                v = -1
            else:
                v = endpoint[labelend[b] ^ 1]
                b = inblossom[v]
                v = endpoint[labelend[b] ^ 1]
            if w != -1:
                tmp = v
                v = w
                w = tmp
        for i in range(pcnt):
            label[path[i]] = _S
        return base

    def add_blossom(base, p):
        # Shrink the odd cycle through edge p with the given base vertex.
        v = endpoint[p ^ 1]
        w = endpoint[p]
        bb = inblossom[base]
        bv = inblossom[v]
        bw = inblossom[w]
        st[1] -= 1
        b = unused[st[1]]
        row = b - n
        blossombase[b] = base
        blossomparent[b] = -1
        blossomparent[bb] = b

        ccnt = 0
        ecnt = 1
        teps[0] = p
        while bv != bb:
            blossomparent[bv] = b
            tchild[ccnt] = bv
            ccnt += 1
            teps[ecnt] = labelend[bv]
            ecnt += 1
            v = endpoint[labelend[bv] ^ 1]
            bv = inblossom[v]
        tchild[ccnt] = bb
        ccnt += 1
        for i in range(ccnt):
            childs[row, i] = tchild[ccnt - 1 - i]
        for i in range(ecnt):
            endps[row, i] = teps[ecnt - 1 - i]
        nch = ccnt
        nep = ecnt
        while bw != bb:
            blossomparent[bw] = b
            childs[row, nch] = bw
            nch += 1
            endps[row, nep] = labelend[bw] ^ 1
            nep += 1
            w = endpoint[labelend[bw] ^ 1]
            bw = inblossom[w]
        nchild[row] = nch

        label[b] = _S
        labelend[b] = labelend[bb]
        dualvar[b] = 0.0

        cnt = collect_leaves(b, lvbuf)
        for i in range(cnt):
            v2 = lvbuf[i]
            if label[inblossom[v2]] == _T:
                queue[st[0]] = v2
                st[0] += 1
            inblossom[v2] = b

        # Merge children's least-slack edge lists into the new blossom's.
        ncnt = 0
        for ci in range(nch):
            bv2 = childs[row, ci]
            if bv2 >= n and nbbe[bv2 - n] != -1:
                r2 = bv2 - n
                for ii in range(nbbe[r2]):
                    k = bbe[r2, ii]
                    j3 = ev[k]
                    if inblossom[j3] == b:
                        j3 = eu[k]
                    bj = inblossom[j3]
                    if bj != b and label[bj] == _S:
                        if bet[bj] == -1:
                            btouched[ncnt] = bj
                            ncnt += 1
                            bet[bj] = k
                        elif slack(k) < slack(bet[bj]):
                            bet[bj] = k
                nbbe[r2] = -1
            else:
                if bv2 < n:
                    lc = 1
                    lvbuf[0] = bv2
                else:
                    lc = collect_leaves(bv2, lvbuf)
                for li in range(lc):
                    v3 = lvbuf[li]
                    for pi in range(nb_off[v3], nb_off[v3 + 1]):
                        k = nb[pi] >> 1
                        j3 = ev[k]
                        if inblossom[j3] == b:
                            j3 = eu[k]
                        bj = inblossom[j3]
                        if bj != b and label[bj] == _S:
                            if bet[bj] == -1:
                                btouched[ncnt] = bj
                                ncnt += 1
                                bet[bj] = k
                            elif slack(k) < slack(bet[bj]):
                                bet[bj] = k
            bestedge[bv2] = -1
        nbbe[row] = ncnt
        bek = -1
        for ii in range(ncnt):
            bj = btouched[ii]
            k = bet[bj]
            bbe[row, ii] = k
            bet[bj] = -1
            if bek == -1 or slack(k) < slack(bek):
                bek = k
        if bek == -1:
            bestedge[b] = -1
        else:
            bestedge[b] = 2 * bek + 1

    def augment_blossom(b0, v0):
        # Rearrange matched edges inside blossom b0 so that v0 becomes its base.
        asp = 1
        astk_b[0] = b0
        astk_v[0] = v0
        while asp > 0:
            asp -= 1
            b = astk_b[asp]
            v = astk_v[asp]
            row = b - n
            t = v
            while blossomparent[t] != b:
                t = blossomparent[t]
            if t >= n:
                astk_b[asp] = t
                astk_v[asp] = v
                asp += 1
            nch = nchild[row]
            i = 0
            for ii in range(nch):
                if childs[row, ii] == t:
                    i = ii
                    break
            if i & 1:
                j = i - nch
                jstep = 1
            else:
                j = i
                jstep = -1
            while j != 0:
                j += jstep
                tt = childs[row, j % nch]
                if jstep == 1:
                    e = endps[row, j % nch]
                    wv = endpoint[e ^ 1]
                    xv = endpoint[e]
                else:
                    e = endps[row, (j - 1) % nch]
                    xv = endpoint[e ^ 1]
                    wv = endpoint[e]
                if tt >= n:
                    astk_b[asp] = tt
                    astk_v[asp] = wv
                    asp += 1
                j += jstep
                tt = childs[row, j % nch]
                if tt >= n:
                    astk_b[asp] = tt
                    astk_v[asp] = xv
                    asp += 1
                mate[endpoint[e]] = e ^ 1
                mate[endpoint[e ^ 1]] = e
            for ii in range(nch):
                rot[ii] = childs[row, (i + ii) % nch]
                rot2[ii] = endps[row, (i + ii) % nch]
            for ii in range(nch):
                childs[row, ii] = rot[ii]
                endps[row, ii] = rot2[ii]
            blossombase[b] = v

    def expand_blossom(b0, endstage):
        esp = 1
        estk[0] = b0
        while esp > 0:
            esp -= 1
            b = estk[esp]
            row = b - n
            for i in range(nchild[row]):
                s = childs[row, i]
                blossomparent[s] = -1
                if s < n:
                    inblossom[s] = s
                elif endstage and dualvar[s] == 0.0:
                    estk[esp] = s
                    esp += 1
                else:
                    cnt = collect_leaves(s, lvbuf)
                    for jj in range(cnt):
                        inblossom[lvbuf[jj]] = s
            if (not endstage) and label[b] == _T:
                # Mid-stage expansion of a zero-dual T-blossom: relabel the
                # even-length side of the cycle T/S alternating, clear labels
                # on the other side so they can be relabelled through their
                # least-slack edges.
                entry = inblossom[endpoint[labelend[b]]]
                nch = nchild[row]
                j = 0
                for ii in range(nch):
                    if childs[row, ii] == entry:
                        j = ii
                        break
                if j & 1:
                    j -= nch
                    jstep = 1
                else:
                    jstep = -1
                qcur = labelend[b]
                while j != 0:
                    if jstep == 1:
                        e = endps[row, j % nch]
                        qv = endpoint[e]
                    else:
                        e = endps[row, (j - 1) % nch]
                        qv = endpoint[e ^ 1]
                    wv = endpoint[qcur]
                    label[wv] = 0
                    label[qv] = 0
                    assign_label(wv, _T, qcur)
                    allowedge[e >> 1] = True
                    j += jstep
                    if jstep == 1:
                        e2 = endps[row, j % nch]
                        qcur = e2
                    else:
                        e2 = endps[row, (j - 1) % nch]
                        qcur = e2 ^ 1
                    allowedge[e2 >> 1] = True
                    j += jstep
                bw2 = childs[row, j % nch]
                wv = endpoint[qcur]
                label[wv] = _T
                label[bw2] = _T
                labelend[wv] = qcur
                labelend[bw2] = qcur
                bestedge[bw2] = -1
                j += jstep
                while childs[row, j % nch] != entry:
                    bv2 = childs[row, j % nch]
                    if label[bv2] == _S:
                        j += jstep
                        continue
                    vfound = -1
                    if bv2 >= n:
                        cnt = collect_leaves(bv2, lvbuf)
                        for ii in range(cnt):
                            if label[lvbuf[ii]] != 0:
                                vfound = lvbuf[ii]
                                break
                    else:
                        if label[bv2] != 0:
                            vfound = bv2
                    if vfound != -1:
                        label[vfound] = 0
                        label[endpoint[mate[blossombase[bv2]]]] = 0
                        assign_label(vfound, _T, labelend[vfound])
                    j += jstep
            # Free the blossom slot.
            label[b] = 0
            labelend[b] = -1
            blossombase[b] = -1
            blossomparent[b] = -1
            bestedge[b] = -1
            nbbe[row] = -1
            dualvar[b] = 0.0
            unused[st[1]] = b
            st[1] += 1

    def augment_matching(p):
        # Augment along the alternating trees from both endpoints of edge p.
        for side in range(2):
            if side == 0:
                s = endpoint[p ^ 1]
                pj = p
            else:
                s = endpoint[p]
                pj = p ^ 1
            while True:
                bs = inblossom[s]
                if bs >= n:
                    augment_blossom(bs, s)
                mate[s] = pj
                if labelend[bs] == -1:
                    break
                t = endpoint[labelend[bs] ^ 1]
                bt = inblossom[t]
                q2 = labelend[bt]
                s2 = endpoint[q2 ^ 1]
                jv = endpoint[q2]
                if bt >= n:
                    augment_blossom(bt, jv)
                mate[jv] = q2 ^ 1
                s = s2
                pj = q2

    naug = 0
    nbloss = 0
    while True:
        for i in range(2 * n):
            label[i] = 0
            labelend[i] = -1
            bestedge[i] = -1
        for i in range(n):
            nbbe[i] = -1
        for k in range(m):
            allowedge[k] = False
        st[0] = 0
        for v in range(n):
            if mate[v] == -1 and label[inblossom[v]] == 0:
                assign_label(v, _S, -1)
        augmented = False
        while True:
            while st[0] > 0 and not augmented:
                st[0] -= 1
                v = queue[st[0]]
                for pi in range(nb_off[v], nb_off[v + 1]):
                    pp = nb[pi]
                    k = pp >> 1
                    w = endpoint[pp]
                    if inblossom[v] == inblossom[w]:
                        continue
                    kslack = 0.0
                    if not allowedge[k]:
                        kslack = slack(k)
                        if kslack <= 0.0:
                            allowedge[k] = True
                    if allowedge[k]:
                        bw = inblossom[w]
                        if label[bw] == 0:
                            assign_label(w, _T, pp)
                        elif label[bw] == _S:
                            base = scan_blossom(v, w)
                            if base >= 0:
                                add_blossom(base, pp)
                                nbloss += 1
                            else:
                                augment_matching(pp)
                                naug += 1
                                augmented = True
                                break
                        elif label[w] == 0:
                            label[w] = _T
                            labelend[w] = pp
                    elif label[inblossom[w]] == _S:
                        bv = inblossom[v]
                        if bestedge[bv] == -1 or kslack < slack(bestedge[bv] >> 1):
                            bestedge[bv] = pp
                    elif label[w] == 0:
                        if bestedge[w] == -1 or kslack < slack(bestedge[w] >> 1):
                            bestedge[w] = pp
            if augmented:
                break

            # Dual update: choose the smallest delta that creates progress.
            deltatype = -1
            delta = 0.0
            deltaedge = -1
            deltablossom = -1
            if not maxcardinality:
                deltatype = 1
                delta = dualvar[0]
                for v in range(1, n):
                    if dualvar[v] < delta:
                        delta = dualvar[v]
            for v in range(n):
                if label[inblossom[v]] == 0 and bestedge[v] != -1:
                    d = slack(bestedge[v] >> 1)
                    if deltatype == -1 or d < delta:
                        delta = d
                        deltatype = 2
                        deltaedge = bestedge[v]
            for b in range(2 * n):
                if blossomparent[b] == -1 and label[b] == _S and bestedge[b] != -1:
                    d = slack(bestedge[b] >> 1) * 0.5
                    if deltatype == -1 or d < delta:
                        delta = d
                        deltatype = 3
                        deltaedge = bestedge[b]
            for b in range(n, 2 * n):
                if blossombase[b] >= 0 and blossomparent[b] == -1 and label[b] == _T:
                    if deltatype == -1 or dualvar[b] < delta:
                        delta = dualvar[b]
                        deltatype = 4
                        deltablossom = b
            if deltatype == -1:
                # Max-cardinality mode with no progress possible: clamp and stop.
                deltatype = 1
                dmin = dualvar[0]
                for v in range(1, n):
                    if dualvar[v] < dmin:
                        dmin = dualvar[v]
                delta = dmin if dmin > 0.0 else 0.0

            for v in range(n):
                lb = label[inblossom[v]]
                if lb == _S:
                    dualvar[v] -= delta
                elif lb == _T:
                    dualvar[v] += delta
            for b in range(n, 2 * n):
                if blossombase[b] >= 0 and blossomparent[b] == -1:
                    if label[b] == _S:
                        dualvar[b] += delta
                    elif label[b] == _T:
                        dualvar[b] -= delta

            if deltatype == 1:
                break
            elif deltatype == 2 or deltatype == 3:
                allowedge[deltaedge >> 1] = True
                queue[st[0]] = endpoint[deltaedge ^ 1]
                st[0] += 1
            else:
                expand_blossom(deltablossom, False)

        if not augmented:
            break
        for b in range(n, 2 * n):
            if (
                blossombase[b] >= 0
                and blossomparent[b] == -1
                and label[b] == _S
                and dualvar[b] == 0.0
            ):
                expand_blossom(b, True)

    return mate, naug, nbloss


_solve_py = _solve
_solve_jit = njit(cache=True)(_solve) if HAVE_NUMBA else _solve


def max_weight_matching_arrays(
    eu: np.ndarray,
    ev: np.ndarray,
    ew: np.ndarray,
    n: int,
    max_cardinality: bool = False,
    use_jit: bool = True,
) -> tuple[np.ndarray, int, int]:
    """Maximum-weight matching; returns (partner vertex array, stats).

    partner[v] is the vertex matched to v, or -1. With ``max_cardinality``
    the matching has maximum cardinality first, maximum weight second.
    """
    eu = np.ascontiguousarray(eu, dtype=np.int64)
    ev = np.ascontiguousarray(ev, dtype=np.int64)
    ew = np.ascontiguousarray(ew, dtype=np.float64)
    solver = _solve_jit if (use_jit and HAVE_NUMBA) else _solve_py
    mate_ep, naug, nbloss = solver(n, eu, ev, ew, max_cardinality)
    partner = np.full(n, -1, np.int64)
    for v in range(n):
        p = mate_ep[v]
        if p >= 0:
            partner[v] = ev[p >> 1] if (p & 1) else eu[p >> 1]
    return partner, int(naug), int(nbloss)
