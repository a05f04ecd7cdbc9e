"""Hot kernels: Hopcroft-Karp search and streaming greedy consumption.

Numba-compiled when available; set KVVSTREAM_NO_NUMBA=1 to force the pure
fallbacks (the benchmark script compares both).  Kernels operate on dense
int64 index arrays and uint64 bit sets so the same code path serves the
micro fixtures and the streaming-only sizes.
"""

from __future__ import annotations

import os

import numpy as np

NUMBA_DISABLED = os.environ.get("KVVSTREAM_NO_NUMBA", "") not in ("", "0")

if not NUMBA_DISABLED:
    try:
        from numba import njit
        HAVE_NUMBA = True
    except ImportError:  # pragma: no cover
        HAVE_NUMBA = False
else:
    HAVE_NUMBA = False

if not HAVE_NUMBA:
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


INF = np.int64(1 << 62)


# --- bit sets ----------------------------------------------------------------


def make_bitset(n_bits):
    return np.zeros((int(n_bits) + 63) // 64, dtype=np.uint64)


@njit(cache=True)
def _bit_test(bits, i):
    return (bits[i >> 6] >> np.uint64(i & 63)) & np.uint64(1)


@njit(cache=True)
def _bit_set(bits, i):
    bits[i >> 6] |= np.uint64(1) << np.uint64(i & 63)


# --- greedy stream consumption ----------------------------------------------


@njit(cache=True)
def greedy_batch(u, v, mu, mv, keep):
    """Maximal-matching greedy over one edge batch: keep an edge iff both
    endpoints are currently unmatched.  Mutates the bit sets; returns the
    number of edges kept (= matched)."""
    cnt = 0
    for i in range(len(u)):
        a = u[i]
        b = v[i]
        if _bit_test(mu, a) == 0 and _bit_test(mv, b) == 0:
            _bit_set(mu, a)
            _bit_set(mv, b)
            keep[i] = True
            cnt += 1
        else:
            keep[i] = False
    return cnt


if HAVE_NUMBA:

    @njit(cache=True)
    def _next_u64(state):
        # splitmix64; uint64 arithmetic wraps natively under numba
        state = state + np.uint64(0x9E3779B97F4A7C15)
        z = state
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        z = z ^ (z >> np.uint64(31))
        return state, z

    @njit(cache=True)
    def sample_greedy_group(coords, radix, weights, bits, cmask, shift_j, cut,
                            m, W, n_res, n_lines, tau_mode, q_coord, lam,
                            ip_coords, d_weights, offset_k,
                            i_coords, a_radix, a_weights,
                            u_base, v_base, mu, mv,
                            s_rem, t_rem, rng_state, kept_matched):
        """Stream one (round, phase, direction) group through selection
        sampling plus greedy matching, without materializing edges.

        Lines ascend by representative; per line the S values ascend, then
        the T values (S-major edge order).  Selection sampling keeps each
        remaining edge with probability s_rem / t_rem, realizing a uniform
        budget-sized subset of the whole stream; kept edges feed the greedy
        matching over the mu (arriving side) / mv (T side) bit sets.

        Returns (s_rem, t_rem, rng_state); kept/matched counts in
        kept_matched.  Numba-only: the fallback path samples per-batch
        hypergeometric counts instead (same distribution).
        """
        kept = 0
        matched = 0
        inv53 = 1.0 / 9007199254740992.0
        n_coords = len(coords)
        # incremental mixed-radix line counter: amortized O(1) per line
        digits = np.zeros(n_coords, dtype=np.int64)
        rep = np.int64(0)
        wt_rest = np.int64(0)
        for line in range(n_lines):
            if line > 0:
                t = 0
                while True:
                    digits[t] += 1
                    rep += np.int64(1) << (coords[t] * bits)
                    wt_rest += 1
                    if digits[t] < radix[t]:
                        break
                    rep -= digits[t] << (coords[t] * bits)
                    wt_rest -= digits[t]
                    digits[t] = 0
                    t += 1
            for sv in range(cut):
                if (wt_rest + sv) % W >= n_res:
                    continue
                u_cached = np.int64(-1)
                for tv in range(cut, m):
                    # selection sampling: keep with probability s_rem / t_rem
                    if s_rem <= 0:
                        t_rem -= 1
                        continue
                    rng_state, z = _next_u64(rng_state)
                    r = (z >> np.uint64(11)) * inv53
                    if r * t_rem >= s_rem:
                        t_rem -= 1
                        continue
                    s_rem -= 1
                    t_rem -= 1
                    kept += 1
                    if u_cached < 0:
                        s_label = rep + (np.int64(sv) << shift_j)
                        if tau_mode == 0:
                            u_cached = u_base + s_label
                        else:
                            beta = W // lam
                            qv = (s_label >> (q_coord * bits)) & cmask
                            dv = (qv // W) * beta + (qv % W) % beta
                            z_lbl = (s_label & ~(cmask << (q_coord * bits))
                                     ) | (dv << (q_coord * bits))
                            grank = offset_k
                            for t in range(len(ip_coords)):
                                dig = (z_lbl >> (ip_coords[t] * bits)) & cmask
                                grank += dig * d_weights[t]
                            out = z_lbl
                            for t in range(len(ip_coords)):
                                bv = (z_lbl >> (i_coords[t] * bits)) & cmask
                                out = (out & ~(cmask << (ip_coords[t] * bits))
                                       ) | (bv << (ip_coords[t] * bits))
                            for t in range(len(i_coords)):
                                av = (grank // a_weights[t]) % a_radix[t]
                                out = (out & ~(cmask << (i_coords[t] * bits))
                                       ) | (av << (i_coords[t] * bits))
                            u_cached = u_base + out
                    b_idx = v_base + rep + (np.int64(tv) << shift_j)
                    if _bit_test(mu, u_cached) == 0 and _bit_test(
                            mv, b_idx) == 0:
                        _bit_set(mu, u_cached)
                        _bit_set(mv, b_idx)
                        matched += 1
        kept_matched[0] = kept
        kept_matched[1] = matched
        return s_rem, t_rem, rng_state

else:
    sample_greedy_group = None


# --- Hopcroft-Karp -----------------------------------------------------------


@njit(cache=True)
def _hk_bfs(indptr, indices, pair_u, pair_v, dist, queue):
    found = False
    head = 0
    tail = 0
    for u in range(len(pair_u)):
        if pair_u[u] < 0:
            dist[u] = 0
            queue[tail] = u
            tail += 1
        else:
            dist[u] = INF
    while head < tail:
        u = queue[head]
        head += 1
        for p in range(indptr[u], indptr[u + 1]):
            v = indices[p]
            w = pair_v[v]
            if w < 0:
                found = True
            elif dist[w] == INF:
                dist[w] = dist[u] + 1
                queue[tail] = w
                tail += 1
    return found


@njit(cache=True)
def _hk_dfs(root, indptr, indices, pair_u, pair_v, dist, stack, it_stack):
    top = 0
    stack[0] = root
    it_stack[0] = indptr[root]
    while top >= 0:
        u = stack[top]
        p = it_stack[top]
        advanced = False
        while p < indptr[u + 1]:
            v = indices[p]
            p += 1
            w = pair_v[v]
            if w < 0:
                # augmenting path found: unwind the stack
                it_stack[top] = p
                while top >= 0:
                    uu = stack[top]
                    vv = indices[it_stack[top] - 1]
                    pair_u[uu] = vv
                    pair_v[vv] = uu
                    top -= 1
                return True
            if dist[w] == dist[u] + 1:
                it_stack[top] = p
                top += 1
                stack[top] = w
                it_stack[top] = indptr[w]
                advanced = True
                break
        if not advanced:
            dist[u] = INF
            top -= 1
    return False


@njit(cache=True)
def hk_match(indptr, indices, n_left, n_right):
    """Maximum bipartite matching; returns (pair_u, pair_v)."""
    pair_u = np.full(n_left, -1, dtype=np.int64)
    pair_v = np.full(n_right, -1, dtype=np.int64)
    dist = np.empty(n_left, dtype=np.int64)
    queue = np.empty(n_left, dtype=np.int64)
    stack = np.empty(n_left + 1, dtype=np.int64)
    it_stack = np.empty(n_left + 1, dtype=np.int64)
    while _hk_bfs(indptr, indices, pair_u, pair_v, dist, queue):
        for u in range(n_left):
            if pair_u[u] < 0:
                _hk_dfs(u, indptr, indices, pair_u, pair_v, dist, stack,
                        it_stack)
    return pair_u, pair_v


@njit(cache=True)
def konig_reach(indptr, indices, pair_u, pair_v, visit_u, visit_v, queue):
    """Alternating BFS from unmatched left vertices (free -> non-matching
    edge -> matching edge), marking reachable vertices for the Koenig cover."""
    head = 0
    tail = 0
    for u in range(len(pair_u)):
        if pair_u[u] < 0:
            visit_u[u] = True
            queue[tail] = u
            tail += 1
    while head < tail:
        u = queue[head]
        head += 1
        for p in range(indptr[u], indptr[u + 1]):
            v = indices[p]
            if not visit_v[v]:
                visit_v[v] = True
                w = pair_v[v]
                if w >= 0 and not visit_u[w]:
                    visit_u[w] = True
                    queue[tail] = w
                    tail += 1
