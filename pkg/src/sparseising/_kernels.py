"""Compiled inner loops for all solvers.

Every engine consumes the shared xoshiro256++ stream in the same documented
order, which is what makes the arithmetic and bit-level solvers (and both
annealing variants) produce identical trajectories from equal seeds:

1. initial configuration: one draw per spin, low bit 1 -> +1;
2. per sweep: one Fisher-Yates shuffle of the visit order (identity-seeded,
   draws for i = n-1 .. 1, no draw when the sub-range has a single slot);
3. per spin update (majority-vote engines): a partial Fisher-Yates over the
   persistent slot buffer (front-sampling the extracted slots, or
   back-sampling the excluded ones when those are fewer, so a full extraction
   consumes no draws), then one tie-break draw only when the internal signal
   is exactly zero;
4. per spin proposal (annealing engines): one uniform double only when the
   proposed flip is uphill.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .rng import next_double, next_u64, randbelow, seed_state

U64 = np.uint64
_ONE = U64(1)
_M1 = U64(0x5555555555555555)
_M2 = U64(0x3333333333333333)
_M4 = U64(0x0F0F0F0F0F0F0F0F)
_H01 = U64(0x0101010101010101)


@njit(cache=True, nogil=True)
def popcount64(x):
    x = x - ((x >> U64(1)) & _M1)
    x = (x & _M2) + ((x >> U64(2)) & _M2)
    x = (x + (x >> U64(4))) & _M4
    return (x * _H01) >> U64(56)


@njit(cache=True, nogil=True)
def _draw_spins(state, sigma):
    for i in range(sigma.shape[0]):
        if next_u64(state) & _ONE == _ONE:
            sigma[i] = 1
        else:
            sigma[i] = -1


@njit(cache=True, nogil=True)
def _fisher_yates(state, perm):
    n = perm.shape[0]
    for i in range(n):
        perm[i] = i
    for i in range(n - 1, 0, -1):
        j = randbelow(state, i + 1)
        tmp = perm[i]
        perm[i] = perm[j]
        perm[j] = tmp


@njit(cache=True, nogil=True)
def _partial_shuffle(state, buf, m):
    """Move a uniform m-subset of buf's entries into buf[:m].

    buf is a persistent permutation of all slot indices.  When m is at most
    half, sample the front directly; otherwise sample the excluded complement
    into the back, which costs L - m draws and leaves buf[:m] uniform.
    """
    L = buf.shape[0]
    k = L - m
    if m <= k:
        for a in range(m):
            j = a + randbelow(state, L - a)
            tmp = buf[a]
            buf[a] = buf[j]
            buf[j] = tmp
    else:
        for a in range(L - 1, L - 1 - k, -1):
            j = randbelow(state, a + 1)
            tmp = buf[a]
            buf[a] = buf[j]
            buf[j] = tmp


@njit(cache=True, nogil=True)
def _extraction_count(p, L):
    m = np.int64(np.floor((1.0 - p) * L))
    if m < 1:
        m = np.int64(1)
    return m


@njit(cache=True, nogil=True)
def emvl_run_kernel(J, h, ps, seed, collect_trace):
    """Majority-vote solver on the integer datapath.

    ps holds the per-sweep sparsity; decisions use the extracted subset while
    energy and the local-field cache track the full couplings exactly.
    """
    n = J.shape[0]
    t_fin = ps.shape[0]
    state = np.empty(4, np.uint64)
    seed_state(state, seed)
    sigma = np.empty(n, np.int8)
    _draw_spins(state, sigma)

    field = np.empty(n, np.int64)
    for i in range(n):
        acc = h[i]
        for j in range(n):
            acc += J[i, j] * sigma[j]
        field[i] = acc
    dot = np.int64(0)
    for i in range(n):
        dot += sigma[i] * (field[i] + h[i])
    energy = -(dot // 2)

    best_e = energy
    best_sigma = sigma.copy()
    max_de = np.int64(-(2**62))
    trace_len = t_fin if collect_trace else 0
    trace_e = np.empty(trace_len, np.int64)
    trace_b = np.empty(trace_len, np.int64)

    scratch = np.empty(n, np.int64)
    for q in range(n):
        scratch[q] = q
    perm = np.empty(n, np.int64)

    for t in range(t_fin):
        m = _extraction_count(ps[t], n)
        _fisher_yates(state, perm)
        for a in range(n):
            i = perm[a]
            _partial_shuffle(state, scratch, m)
            sig = np.int64(0)
            for b in range(m):
                k = scratch[b]
                if k == i:
                    sig += h[i]
                else:
                    sig += J[i, k] * sigma[k]
            if sig > 0:
                new = np.int8(1)
            elif sig < 0:
                new = np.int8(-1)
            elif next_u64(state) & _ONE == _ONE:
                new = np.int8(1)
            else:
                new = np.int8(-1)
            if new != sigma[i]:
                de = 2 * np.int64(sigma[i]) * field[i]
                sigma[i] = new
                energy += de
                if de > max_de:
                    max_de = de
                step = 2 * np.int64(new)
                for j2 in range(n):
                    field[j2] += step * J[i, j2]
                if energy < best_e:
                    best_e = energy
                    for j2 in range(n):
                        best_sigma[j2] = sigma[j2]
            elif max_de < 0:
                max_de = np.int64(0)
        if collect_trace:
            trace_e[t] = energy
            trace_b[t] = best_e
    return sigma, best_sigma, energy, best_e, max_de, trace_e, trace_b


@njit(cache=True, nogil=True)
def emvl_batch_kernel(J, h, ps, seeds):
    trials = seeds.shape[0]
    finals = np.empty(trials, np.int64)
    bests = np.empty(trials, np.int64)
    for k in range(trials):
        _s, _b, e, be, _m, _te, _tb = emvl_run_kernel(J, h, ps, seeds[k], False)
        finals[k] = e
        bests[k] = be
    return finals, bests


@njit(cache=True, nogil=True)
def sa_run_kernel(J, h, temps, seed, optimized, use_table, dmax, collect_trace):
    """Metropolis single-flip sweeps.

    optimized=False recomputes the local field per proposal by row scan;
    optimized=True keeps an incrementally updated field cache and, when
    use_table is set (unit couplings), a per-sweep table of uphill acceptance
    probabilities.  Both variants draw from the stream identically, so
    trajectories match exactly.
    """
    n = J.shape[0]
    t_fin = temps.shape[0]
    state = np.empty(4, np.uint64)
    seed_state(state, seed)
    sigma = np.empty(n, np.int8)
    _draw_spins(state, sigma)

    field = np.empty(n, np.int64)
    for i in range(n):
        acc = h[i]
        for j in range(n):
            acc += J[i, j] * sigma[j]
        field[i] = acc
    dot = np.int64(0)
    for i in range(n):
        dot += sigma[i] * (field[i] + h[i])
    energy = -(dot // 2)

    best_e = energy
    best_sigma = sigma.copy()
    trace_len = t_fin if collect_trace else 0
    trace_e = np.empty(trace_len, np.int64)
    trace_b = np.empty(trace_len, np.int64)

    table = np.empty(dmax + 1 if use_table else 1, np.float64)
    perm = np.empty(n, np.int64)

    for t in range(t_fin):
        temp = temps[t]
        if optimized and use_table:
            for d in range(table.shape[0]):
                table[d] = np.exp(-np.float64(d) / temp)
        _fisher_yates(state, perm)
        for a in range(n):
            i = perm[a]
            if optimized:
                f = field[i]
            else:
                f = h[i]
                for j in range(n):
                    f += J[i, j] * sigma[j]
            de = 2 * np.int64(sigma[i]) * f
            accept = True
            if de > 0:
                u = next_double(state)
                if optimized and use_table:
                    accept = u < table[de]
                else:
                    accept = u < np.exp(-np.float64(de) / temp)
            if accept:
                new = np.int8(-sigma[i])
                sigma[i] = new
                energy += de
                if optimized:
                    step = 2 * np.int64(new)
                    for j2 in range(n):
                        field[j2] += step * J[i, j2]
                if energy < best_e:
                    best_e = energy
                    for j2 in range(n):
                        best_sigma[j2] = sigma[j2]
        if collect_trace:
            trace_e[t] = energy
            trace_b[t] = best_e
    return sigma, best_sigma, energy, best_e, trace_e, trace_b


@njit(cache=True, nogil=True)
def sa_batch_kernel(J, h, temps, seeds, optimized, use_table, dmax):
    trials = seeds.shape[0]
    finals = np.empty(trials, np.int64)
    bests = np.empty(trials, np.int64)
    for k in range(trials):
        _s, _b, e, be, _te, _tb = sa_run_kernel(
            J, h, temps, seeds[k], optimized, use_table, dmax, False
        )
        finals[k] = e
        bests[k] = be
    return finals, bests


@njit(cache=True, nogil=True)
def _bits_field(sw, jrow, fm, n, i):
    # Full local field of spin i via XNOR + popcount; the self bit is masked out.
    pop = np.int64(0)
    wi = i >> 6
    for w in range(sw.shape[0]):
        x = ~(sw[w] ^ jrow[w]) & fm[w]
        if w == wi:
            x &= ~(_ONE << U64(i & 63))
        pop += np.int64(popcount64(x))
    return 2 * pop - (n - 1)


@njit(cache=True, nogil=True)
def bits_run_kernel(jw, n, ps, seed, collect_trace):
    """Majority-vote solver on the packed-bit datapath (unit couplings, no fields).

    Couplings are one bit per pair (1 encodes +1), interactions are XNOR
    words, and the vote is a popcount.  Stream consumption matches
    emvl_run_kernel draw for draw.
    """
    W = jw.shape[1]
    t_fin = ps.shape[0]
    state = np.empty(4, np.uint64)
    seed_state(state, seed)
    sw = np.zeros(W, np.uint64)
    for i in range(n):
        if next_u64(state) & _ONE == _ONE:
            sw[i >> 6] |= _ONE << U64(i & 63)

    fm = np.zeros(W, np.uint64)
    for i in range(n):
        fm[i >> 6] |= _ONE << U64(i & 63)

    dot = np.int64(0)
    for i in range(n):
        f = _bits_field(sw, jw[i], fm, n, i)
        s_i = np.int64(2 * np.int64((sw[i >> 6] >> U64(i & 63)) & _ONE) - 1)
        dot += s_i * f
    energy = -(dot // 2)

    best_e = energy
    best_sw = sw.copy()
    max_de = np.int64(-(2**62))
    trace_len = t_fin if collect_trace else 0
    trace_e = np.empty(trace_len, np.int64)
    trace_b = np.empty(trace_len, np.int64)

    scratch = np.empty(n, np.int64)
    for q in range(n):
        scratch[q] = q
    perm = np.empty(n, np.int64)
    mask = np.empty(W, np.uint64)

    for t in range(t_fin):
        m = _extraction_count(ps[t], n)
        _fisher_yates(state, perm)
        for a in range(n):
            i = perm[a]
            _partial_shuffle(state, scratch, m)
            for w in range(W):
                mask[w] = U64(0)
            cnt = np.int64(0)
            for b in range(m):
                k = scratch[b]
                if k != i:
                    mask[k >> 6] |= _ONE << U64(k & 63)
                    cnt += 1
            pop = np.int64(0)
            for w in range(W):
                pop += np.int64(popcount64(~(sw[w] ^ jw[i, w]) & mask[w]))
            sig = 2 * pop - cnt
            if sig > 0:
                newbit = _ONE
            elif sig < 0:
                newbit = U64(0)
            elif next_u64(state) & _ONE == _ONE:
                newbit = _ONE
            else:
                newbit = U64(0)
            oldbit = (sw[i >> 6] >> U64(i & 63)) & _ONE
            if newbit != oldbit:
                f = _bits_field(sw, jw[i], fm, n, i)
                s_i = np.int64(2 * np.int64(oldbit) - 1)
                de = 2 * s_i * f
                sw[i >> 6] ^= _ONE << U64(i & 63)
                energy += de
                if de > max_de:
                    max_de = de
                if energy < best_e:
                    best_e = energy
                    for w in range(W):
                        best_sw[w] = sw[w]
            elif max_de < 0:
                max_de = np.int64(0)
        if collect_trace:
            trace_e[t] = energy
            trace_b[t] = best_e
    sigma = np.empty(n, np.int8)
    best_sigma = np.empty(n, np.int8)
    for i in range(n):
        sigma[i] = 1 if (sw[i >> 6] >> U64(i & 63)) & _ONE == _ONE else -1
        best_sigma[i] = 1 if (best_sw[i >> 6] >> U64(i & 63)) & _ONE == _ONE else -1
    return sigma, best_sigma, energy, best_e, max_de, trace_e, trace_b


@njit(cache=True, nogil=True)
def exhaustive_kernel(J, h, m):
    """Exact minimum over all configurations of spins 0..m-1 (rest pinned at -1).

    Gray-code order with incremental field updates; pass m = n-1 for zero-field
    instances (global inversion symmetry) and m = n otherwise.
    """
    n = J.shape[0]
    sigma = np.full(n, np.int8(-1))
    field = np.empty(n, np.int64)
    for i in range(n):
        acc = h[i]
        for j in range(n):
            acc += J[i, j] * sigma[j]
        field[i] = acc
    dot = np.int64(0)
    for i in range(n):
        dot += sigma[i] * (field[i] + h[i])
    energy = -(dot // 2)
    best_e = energy
    best_sigma = sigma.copy()
    total = np.int64(1) << np.int64(m)
    for step in range(1, total):
        x = step
        v = 0
        while x & 1 == 0:
            x >>= 1
            v += 1
        de = 2 * np.int64(sigma[v]) * field[v]
        new = np.int8(-sigma[v])
        sigma[v] = new
        energy += de
        stepw = 2 * np.int64(new)
        for j in range(n):
            field[j] += stepw * J[v, j]
        if energy < best_e:
            best_e = energy
            for j in range(n):
                best_sigma[j] = sigma[j]
    return best_e, best_sigma
