"""Compiled single-agent loop used by the Monte Carlo harness.

This module re-implements the agent-environment step loop from
:mod:`psgen.clips` / :mod:`psgen.agent` / :mod:`psgen.environments` with flat
arrays under numba, so ensembles of 10^4..10^5 agents run in seconds.  It is
deliberately draw-for-draw and edge-order compatible with the pure-Python
reference engine: given the same master seed both produce identical action
and reward sequences (covered by tests/test_engine_equivalence.py).

Network representation: action clips are ids 0..n-1; percept/wildcard clip
ids are n + row where `row` indexes the flat slot/adjacency arrays.  Slot
value -1 encodes the wildcard symbol.  Adjacency is a per-clip linked list
over (e_tgt, e_h, e_nxt) pools, appended in creation order, which is exactly
the dict insertion order of the reference network.

Two scenario-specific shortcuts exploit the neverending-color structure
(colors are unique per step, so percepts are always new and every wildcard
carries # in the color slot); both preserve the exact creation order of the
full pairwise scan:

* the pairwise comparison runs over distinct (arrow, extras) signatures in
  first-seen order instead of over all previous percepts;
* the matching-wildcard set of a new percept is cached per signature.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

ENV_DRIVER = 0
ENV_COLORS = 1
ENV_COLORS_ALL_IRRELEVANT = 2

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_SM_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_SM_MUL2 = np.uint64(0x94D049BB133111EB)
_DOUBLE_SCALE = 1.0 / 9007199254740992.0  # 2**-53
_FNV_OFFSET = np.uint64(1469598103934665603)
_FNV_PRIME = np.uint64(1099511628211)


@njit(cache=True, inline="always")
def _splitmix64(z):
    z = z + _GOLDEN
    x = z
    x = (x ^ (x >> np.uint64(30))) * _SM_MUL1
    x = (x ^ (x >> np.uint64(27))) * _SM_MUL2
    x = x ^ (x >> np.uint64(31))
    return z, x


@njit(cache=True, inline="always")
def _rotl(x, k):
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


@njit(cache=True, inline="always")
def _xoshiro_next(s):
    result = _rotl(s[1] * np.uint64(5), 7) * np.uint64(9)
    t = s[1] << np.uint64(17)
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return result


@njit(cache=True, inline="always")
def _rand01(s):
    return np.float64(_xoshiro_next(s) >> np.uint64(11)) * _DOUBLE_SCALE


@njit(cache=True)
def _seed_substream(master_seed, index, s):
    z = master_seed + np.uint64(index + 1) * _GOLDEN
    for j in range(4):
        z, out = _splitmix64(z)
        s[j] = out


@njit(cache=True, inline="always")
def _append_edge(row, tgt, h, head, tail, e_tgt, e_h, e_nxt, edge_count):
    e_tgt[edge_count] = tgt
    e_h[edge_count] = h
    e_nxt[edge_count] = -1
    if tail[row] == -1:
        head[row] = edge_count
    else:
        e_nxt[tail[row]] = edge_count
    tail[row] = edge_count
    return edge_count + 1


@njit(cache=True, inline="always")
def _matches_rows(slots, wc_count, low_row, high_row, K):
    """Strictly-more-wildcards + explicit-value agreement test."""
    if wc_count[high_row] <= wc_count[low_row]:
        return False
    for k in range(K):
        hs = slots[high_row, k]
        if hs != -1 and hs != slots[low_row, k]:
            return False
    return True


@njit(cache=True, inline="always")
def _slots_hash(cand, K, hash_mask):
    z = _FNV_OFFSET
    for k in range(K):
        z = (z ^ np.uint64(cand[k] + 2)) * _FNV_PRIME
    return np.int64(z & np.uint64(hash_mask))


@njit(cache=True)
def _wildcard_lookup(cand, K, slots, ht, hash_mask):
    """Return row of the wildcard with these slots, or ~insert_position."""
    idx = _slots_hash(cand, K, hash_mask)
    while True:
        row = ht[idx]
        if row == -1:
            return -idx - 1
        same = True
        for k in range(K):
            if slots[row, k] != cand[k]:
                same = False
                break
        if same:
            return row
        idx = (idx + 1) & hash_mask


@njit(cache=True)
def _run_single_agent(
    agent_index,
    master_seed,
    env_code,
    n,
    K,
    cards,
    generalization,
    gamma,
    lam,
    majority,
    T,
    track_tau,
    success_row,
    actions_all,
    record_actions,
    max_clips,
    max_edges,
    hash_mask,
    max_sigs,
):
    s = np.empty(4, np.uint64)
    _seed_substream(master_seed, agent_index, s)
    a_row = np.int64(agent_index)
    if a_row >= actions_all.shape[0]:
        a_row = actions_all.shape[0] - np.int64(1)
    actions_row = actions_all[a_row]

    colors_mode = env_code != ENV_DRIVER

    slots = np.empty((max_clips, K), np.int64)
    wc_count = np.empty(max_clips, np.int64)
    head = np.full(max_clips, -1, np.int64)
    tail = np.full(max_clips, -1, np.int64)
    e_tgt = np.empty(max_edges, np.int64)
    e_h = np.empty(max_edges, np.float64)
    e_nxt = np.empty(max_edges, np.int64)
    percept_rows = np.empty(T + 1, np.int64)
    wildcard_rows = np.empty(max_clips, np.int64)
    ht = np.full(hash_mask + 1, -1, np.int64)
    new_wc = np.empty(max_clips, np.int64)
    cand = np.empty(K, np.int64)
    percept = np.empty(K, np.int64)

    # signature structures (colors mode only)
    sig_vals = np.empty((max_sigs, K), np.int64)
    sig_cache = np.empty((max_sigs, max_clips), np.int64)
    sig_cache_len = np.zeros(max_sigs, np.int64)
    sig_cache_ver = np.full(max_sigs, -1, np.int64)

    path_slot = np.empty(K + 2, np.int64)
    path_src = np.empty(K + 2, np.int64)
    vote_counts = np.empty(n, np.int64)
    vote_paths_slot = np.empty((max(majority, 1), K + 2), np.int64)
    vote_paths_src = np.empty((max(majority, 1), K + 2), np.int64)
    vote_lens = np.empty(max(majority, 1), np.int64)
    vote_actions = np.empty(max(majority, 1), np.int64)

    n_clips = 0
    edge_count = 0
    n_percepts = 0
    n_wildcards = 0
    n_sigs = 0
    wc_version = 0
    tau = 0

    for t in range(1, T + 1):
        # ---- environment percept ------------------------------------
        if env_code == ENV_DRIVER:
            combo = np.int64(_rand01(s) * 4)
            percept[0] = combo & 1
            percept[1] = combo >> 1
            arrow = percept[0]
        else:
            arrow = np.int64(_rand01(s) * n)
            percept[0] = arrow
            percept[1] = t  # fresh color each step
            for k in range(2, K):
                percept[k] = np.int64(_rand01(s) * cards[k])

        # ---- locate or create the percept clip ----------------------
        p_row = -1
        if not colors_mode:
            for i in range(n_percepts):
                row = percept_rows[i]
                same = True
                for k in range(K):
                    if slots[row, k] != percept[k]:
                        same = False
                        break
                if same:
                    p_row = row
                    break

        if p_row == -1:
            old_np = n_percepts
            old_rows = n_clips
            p_row = n_clips
            n_clips += 1
            for k in range(K):
                slots[p_row, k] = percept[k]
            wc_count[p_row] = 0
            for a in range(n):
                edge_count = _append_edge(
                    p_row, a, 1.0, head, tail, e_tgt, e_h, e_nxt, edge_count
                )
            percept_rows[n_percepts] = p_row
            n_percepts += 1

            if generalization:
                # pairwise comparison with existing percepts -> wildcards
                n_new = 0
                if colors_mode:
                    # one representative per distinct (arrow, extras)
                    # signature, in first-seen order; the color always
                    # differs, so the generated wildcard depends only on
                    # the signature
                    for i in range(n_sigs):
                        l = 0
                        for k in range(K):
                            if k == 1 or sig_vals[i, k] != percept[k]:
                                cand[k] = -1
                                l += 1
                            else:
                                cand[k] = percept[k]
                        found = _wildcard_lookup(cand, K, slots, ht, hash_mask)
                        if found < 0:
                            w_row = n_clips
                            n_clips += 1
                            for k in range(K):
                                slots[w_row, k] = cand[k]
                            wc_count[w_row] = l
                            for a in range(n):
                                edge_count = _append_edge(
                                    w_row, a, 1.0, head, tail, e_tgt, e_h, e_nxt, edge_count
                                )
                            wildcard_rows[n_wildcards] = w_row
                            n_wildcards += 1
                            ht[-found - 1] = w_row
                            new_wc[n_new] = w_row
                            n_new += 1
                            wc_version += 1
                    # register this percept's signature if unseen
                    sig_idx = -1
                    for i in range(n_sigs):
                        same = True
                        for k in range(K):
                            if k != 1 and sig_vals[i, k] != percept[k]:
                                same = False
                                break
                        if same:
                            sig_idx = i
                            break
                    if sig_idx == -1:
                        sig_idx = n_sigs
                        for k in range(K):
                            sig_vals[sig_idx, k] = percept[k]
                        n_sigs += 1
                else:
                    for i in range(old_np):
                        q_row = percept_rows[i]
                        l = 0
                        for k in range(K):
                            if slots[q_row, k] != percept[k]:
                                cand[k] = -1
                                l += 1
                            else:
                                cand[k] = percept[k]
                        if l == 0:
                            continue
                        found = _wildcard_lookup(cand, K, slots, ht, hash_mask)
                        if found < 0:
                            w_row = n_clips
                            n_clips += 1
                            for k in range(K):
                                slots[w_row, k] = cand[k]
                            wc_count[w_row] = l
                            for a in range(n):
                                edge_count = _append_edge(
                                    w_row, a, 1.0, head, tail, e_tgt, e_h, e_nxt, edge_count
                                )
                            wildcard_rows[n_wildcards] = w_row
                            n_wildcards += 1
                            ht[-found - 1] = w_row
                            new_wc[n_new] = w_row
                            n_new += 1

                # closure pass 1: new percept -> matching wildcards, id order
                if colors_mode:
                    if sig_cache_ver[sig_idx] != wc_version:
                        m = 0
                        for j in range(n_wildcards):
                            w_row = wildcard_rows[j]
                            if _matches_rows(slots, wc_count, p_row, w_row, K):
                                sig_cache[sig_idx, m] = w_row
                                m += 1
                        sig_cache_len[sig_idx] = m
                        sig_cache_ver[sig_idx] = wc_version
                    for j in range(sig_cache_len[sig_idx]):
                        edge_count = _append_edge(
                            p_row, n + sig_cache[sig_idx, j], 1.0,
                            head, tail, e_tgt, e_h, e_nxt, edge_count,
                        )
                else:
                    for j in range(n_wildcards):
                        w_row = wildcard_rows[j]
                        if _matches_rows(slots, wc_count, p_row, w_row, K):
                            edge_count = _append_edge(
                                p_row, n + w_row, 1.0,
                                head, tail, e_tgt, e_h, e_nxt, edge_count,
                            )

                # closure pass 2: wire each new wildcard, creation order
                for j in range(n_new):
                    w_row = new_wc[j]
                    for jj in range(n_wildcards):
                        c_row = wildcard_rows[jj]
                        if c_row != w_row and _matches_rows(slots, wc_count, w_row, c_row, K):
                            edge_count = _append_edge(
                                w_row, n + c_row, 1.0,
                                head, tail, e_tgt, e_h, e_nxt, edge_count,
                            )
                    for c_row in range(old_rows):
                        if _matches_rows(slots, wc_count, c_row, w_row, K):
                            edge_count = _append_edge(
                                c_row, n + w_row, 1.0,
                                head, tail, e_tgt, e_h, e_nxt, edge_count,
                            )

        # ---- deliberation -------------------------------------------
        if majority == 0:
            plen = _walk(p_row, n, s, head, e_tgt, e_h, e_nxt, path_slot, path_src)
            action = e_tgt[path_slot[plen - 1]]
        else:
            for a in range(n):
                vote_counts[a] = 0
            for r in range(majority):
                vlen = _walk(
                    p_row, n, s, head, e_tgt, e_h, e_nxt,
                    vote_paths_slot[r], vote_paths_src[r],
                )
                vote_lens[r] = vlen
                vote_actions[r] = e_tgt[vote_paths_slot[r, vlen - 1]]
                vote_counts[vote_actions[r]] += 1
            action = 0
            for a in range(1, n):
                if vote_counts[a] > vote_counts[action]:
                    action = a
            plen = 0
            for r in range(majority - 1, -1, -1):
                if vote_actions[r] == action:
                    plen = vote_lens[r]
                    for j in range(plen):
                        path_slot[j] = vote_paths_slot[r, j]
                        path_src[j] = vote_paths_src[r, j]
                    break

        # ---- reward --------------------------------------------------
        if env_code == ENV_DRIVER:
            color = percept[1]
            if t <= 1000:
                correct = 1 if color == 1 else 0
            elif t <= 2000:
                correct = 1 if color == 0 else 0
            elif t <= 3000:
                correct = 0 if arrow == 0 else 1
            else:
                correct = 0
        elif env_code == ENV_COLORS:
            correct = arrow
        else:
            correct = 0
        rewarded = action == correct
        success_row[t - 1] = 1 if rewarded else 0
        if record_actions:
            actions_row[t - 1] = action

        # ---- learning ------------------------------------------------
        if gamma > 0.0:
            for e in range(edge_count):
                e_h[e] = e_h[e] - gamma * (e_h[e] - 1.0)
        if rewarded:
            for j in range(plen):
                e_h[path_slot[j]] += lam
            if (
                track_tau
                and tau == 0
                and generalization
                and env_code == ENV_COLORS
                and arrow == 0
            ):
                # first rewarded traversal of (0, #, ..., #) -> action 0;
                # tracking one designated arrow keeps the per-edge rate
                # 1/(n(n+1)(n+2)) that the closed-form learning time uses
                for j in range(plen):
                    src = path_src[j]
                    if src >= n:
                        row = src - n
                        if (
                            wc_count[row] == K - 1
                            and slots[row, 0] == 0
                            and e_tgt[path_slot[j]] == 0
                        ):
                            tau = t
                            break
    return tau


@njit(cache=True)
def _walk(p_row, n, s, head, e_tgt, e_h, e_nxt, path_slot, path_src):
    cur = n + p_row
    plen = 0
    while cur >= n:
        row = cur - n
        total = 0.0
        e = head[row]
        while e != -1:
            total += e_h[e]
            e = e_nxt[e]
        threshold = _rand01(s) * total
        acc = 0.0
        e = head[row]
        chosen = e
        while e != -1:
            acc += e_h[e]
            chosen = e
            if threshold < acc:
                break
            e = e_nxt[e]
        path_slot[plen] = chosen
        path_src[plen] = cur
        plen += 1
        cur = e_tgt[chosen]
    return plen


@njit(cache=True, parallel=True)
def run_ensemble_kernel(
    env_code,
    n,
    K,
    cards,
    generalization,
    gamma,
    lam,
    majority,
    n_agents,
    T,
    master_seed,
    track_tau,
    success,
    actions,
    record_actions,
    tau,
    max_clips,
    max_edges,
    hash_mask,
    max_sigs,
):
    for i in prange(n_agents):
        tau[i] = _run_single_agent(
            i,
            master_seed,
            env_code,
            n,
            K,
            cards,
            generalization,
            gamma,
            lam,
            majority,
            T,
            track_tau,
            success[i],
            actions,
            record_actions,
            max_clips,
            max_edges,
            hash_mask,
            max_sigs,
        )
