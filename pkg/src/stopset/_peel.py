"""Compiled peeling kernels over CSR Tanner graphs.

Each check keeps the count of its unresolved neighbours and the XOR of their
indices, so a check with count 1 names its last unknown directly.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def peel_set(check_ptr, check_idx, var_ptr, var_idx, members, n_var, stop_at):
    """Delete members adjacent to degree-one checks until none remain.

    Returns a boolean mask of the surviving members (the maximal stopping set
    inside ``members``). When ``stop_at >= 0`` the search returns early, with
    an all-false mask, as soon as that variable is deleted.
    """
    n_chk = len(check_ptr) - 1
    alive = np.zeros(n_var, dtype=np.bool_)
    cnt = np.zeros(n_chk, dtype=np.int64)
    xr = np.zeros(n_chk, dtype=np.int64)
    for v in members:
        alive[v] = True
    for v in members:
        for e in range(var_ptr[v], var_ptr[v + 1]):
            c = var_idx[e]
            cnt[c] += 1
            xr[c] ^= v
    # a check's count falls to 1 at most once, so 2 * n_chk pushes suffice
    stack = np.empty(2 * n_chk + 1, dtype=np.int64)
    top = 0
    for v in members:
        for e in range(var_ptr[v], var_ptr[v + 1]):
            c = var_idx[e]
            if cnt[c] == 1:
                stack[top] = c
                top += 1
    while top > 0:
        top -= 1
        c = stack[top]
        if cnt[c] != 1:
            continue
        v = xr[c]
        alive[v] = False
        if v == stop_at:
            alive[:] = False
            return alive
        for e in range(var_ptr[v], var_ptr[v + 1]):
            c2 = var_idx[e]
            cnt[c2] -= 1
            xr[c2] ^= v
            if cnt[c2] == 1:
                stack[top] = c2
                top += 1
    return alive


@njit(cache=True, nogil=True)
def acceptable_pattern(check_ptr, check_idx, var_ptr, var_idx, order):
    """Greedy stopping-set-free puncturing over a visiting order.

    Returns a boolean mask of punctured variables.
    """
    n_var = len(var_ptr) - 1
    in_r = np.zeros(n_var, dtype=np.bool_)
    members = np.empty(n_var, dtype=np.int64)
    size = 0
    for v in order:
        members[size] = v
        # R is stopping-set free, so R + v has a stopping set iff v is never peeled
        alive = peel_set(check_ptr, check_idx, var_ptr, var_idx, members[: size + 1], n_var, v)
        if alive[v]:
            continue
        in_r[v] = True
        size += 1
    return in_r


@njit(cache=True, nogil=True)
def mp_peel(check_ptr, check_idx, var_ptr, var_idx, values, cnt, xr, par):
    """Resolve erased values (-1) through degree-one checks, in place.

    ``cnt``/``xr``/``par`` must describe ``values`` on entry: erased-neighbour
    count, XOR of erased indices and parity of known neighbour values.
    """
    n_chk = len(check_ptr) - 1
    stack = np.empty(2 * n_chk + 1, dtype=np.int64)
    top = 0
    for c in range(n_chk):
        if cnt[c] == 1:
            stack[top] = c
            top += 1
    while top > 0:
        top -= 1
        c = stack[top]
        if cnt[c] != 1:
            continue
        v = xr[c]
        val = par[c]
        values[v] = val
        for e in range(var_ptr[v], var_ptr[v + 1]):
            c2 = var_idx[e]
            cnt[c2] -= 1
            xr[c2] ^= v
            par[c2] ^= val
            if cnt[c2] == 1:
                stack[top] = c2
                top += 1


@njit(cache=True, nogil=True)
def check_state(check_ptr, check_idx, values):
    n_chk = len(check_ptr) - 1
    cnt = np.zeros(n_chk, dtype=np.int64)
    xr = np.zeros(n_chk, dtype=np.int64)
    par = np.zeros(n_chk, dtype=np.int8)
    for c in range(n_chk):
        for e in range(check_ptr[c], check_ptr[c + 1]):
            v = check_idx[e]
            if values[v] < 0:
                cnt[c] += 1
                xr[c] ^= v
            else:
                par[c] ^= values[v]
    return cnt, xr, par


@njit(cache=True, nogil=True)
def supply_until_resolved(check_ptr, check_idx, var_ptr, var_idx, values, cnt, xr, par, priority):
    """Greedily supply erased variables (in priority order) until peeling finishes.

    Works on the given state in place; returns the supplied indices.
    """
    supplied = np.empty(len(priority), dtype=np.int64)
    s = 0
    for v in priority:
        if values[v] >= 0:
            continue
        supplied[s] = v
        s += 1
        values[v] = 0
        for e in range(var_ptr[v], var_ptr[v + 1]):
            c = var_idx[e]
            cnt[c] -= 1
            xr[c] ^= v
        mp_peel(check_ptr, check_idx, var_ptr, var_idx, values, cnt, xr, par)
    return supplied[:s]
