"""Pure-Python kernels.

Drop-in fallback for the compiled ``_kernels`` module. Every function draws
from the bit generator in exactly the same order as its compiled twin, so a
seed yields identical output under either backend.
"""

import numpy as np

from .errors import SamplingError
from .rng import bounded

BACKEND = "python"


def _shuffle(a, bg):
    for i in range(len(a) - 1, 0, -1):
        j = bounded(bg, i + 1)
        a[i], a[j] = a[j], a[i]


def _pair_consecutive(a, partner):
    for i in range(0, len(a) - 1, 2):
        x, y = a[i], a[i + 1]
        partner[x] = y
        partner[y] = x


def pair_clones(k, bg):
    """Uniform perfect matching on ``range(k)`` as a partner array."""
    if k % 2:
        raise ValueError("clone count must be even")
    perm = list(range(k))
    _shuffle(perm, bg)
    partner = [0] * k
    _pair_consecutive(perm, partner)
    return np.asarray(partner, dtype=np.int64)


def is_simple_partner(partner, n, d):
    ends = np.asarray(partner, dtype=np.int64).reshape(n, d) // d
    if (ends == np.arange(n)[:, None]).any():
        return False
    s = np.sort(ends, axis=1)
    return not (s[:, 1:] == s[:, :-1]).any()


def _static_core(ends, start, bg, max_rounds):
    n, d = len(ends), len(ends[0])
    ir = [-1] * n
    order = [0] * n
    ir[start] = 0
    order[0] = start
    count = 1
    boundary = sum(1 for x in ends[start] if x != start)
    t = 0
    while count < n and boundary > 0 and t < max_rounds:
        t += 1
        m = count
        for i in range(m):
            v = order[i]
            w = ends[v][bounded(bg, d)]
            if ir[w] < 0:
                ir[w] = t
                order[count] = w
                count += 1
                for x in ends[w]:
                    if x == w:
                        continue
                    if ir[x] >= 0:
                        boundary -= 1
                    else:
                        boundary += 1
    return ir, t, count == n


def static_run(ends, start, bg, max_rounds):
    """Push protocol on a fixed graph. Returns (inform_round, rounds_run)."""
    rows = np.asarray(ends).tolist()
    ir, t, _ = _static_core(rows, int(start), bg, max_rounds)
    return np.asarray(ir, dtype=np.int64), t


def _incremental_core(n, d, bg, complete_matching, max_rounds, record):
    k = n * d
    partner = [-1] * k
    pool = list(range(k))
    pos = list(range(k))
    size = k
    ir = [-1] * n
    free = [d] * n
    stamp = [-1] * k
    hits = [0] * n
    rows = {"P": [d], "A": [], "eAA": [], "eself": [], "eAU": [], "H": []}

    def remove(c):
        nonlocal size
        size -= 1
        p = pos[c]
        last = pool[size]
        pool[p] = last
        pos[last] = p

    ir[0] = 0
    count = 1
    P = d
    t = 0
    while count < n and P > 0 and t < max_rounds:
        t += 1
        selected = []
        for v in range(n):
            if ir[v] >= 0:
                c = v * d + bounded(bg, d)
                if partner[c] < 0:
                    selected.append(c)
                    stamp[c] = t
        e_aa = e_self = e_au = 0
        new = []
        for c in selected:
            if partner[c] >= 0:
                continue
            remove(c)
            c2 = pool[bounded(bg, size)]
            remove(c2)
            partner[c] = c2
            partner[c2] = c
            free[c // d] -= 1
            w = c2 // d
            free[w] -= 1
            if 0 <= ir[w] < t:
                if stamp[c2] == t:
                    e_aa += 1
                else:
                    e_self += 1
            else:
                e_au += 1
                hits[w] += 1
                if ir[w] < 0:
                    ir[w] = t
                    new.append(w)
        H = [0] * (d + 1)
        for w in new:
            H[hits[w]] += 1
            hits[w] = 0
        count += len(new)
        P = 0
        for v in range(n):
            if ir[v] >= 0:
                P += free[v]
        if record:
            rows["P"].append(P)
            rows["A"].append(len(selected))
            rows["eAA"].append(e_aa)
            rows["eself"].append(e_self)
            rows["eAU"].append(e_au)
            rows["H"].append(H)
    if complete_matching and size:
        rest = pool[:size]
        _shuffle(rest, bg)
        _pair_consecutive(rest, partner)
    return partner, ir, t, count == n, rows


def incremental_run(n, d, bg, complete_matching, max_rounds):
    """Push protocol co-sampled with the configuration model by deferred exposure."""
    partner, ir, t, _, rows = _incremental_core(n, d, bg, complete_matching, max_rounds, True)
    return {
        "partner": np.asarray(partner, dtype=np.int64),
        "inform_round": np.asarray(ir, dtype=np.int64),
        "rounds": t,
        "P": np.asarray(rows["P"], dtype=np.int64),
        "A": np.asarray(rows["A"], dtype=np.int64),
        "e_AA": np.asarray(rows["eAA"], dtype=np.int64),
        "e_self": np.asarray(rows["eself"], dtype=np.int64),
        "e_AU": np.asarray(rows["eAU"], dtype=np.int64),
        "H": np.asarray(rows["H"], dtype=np.int64).reshape(-1, d + 1),
    }


def batch_static_T(ends, start, runs, bg, max_rounds):
    rows = np.asarray(ends).tolist()
    out = np.empty(runs, dtype=np.int64)
    for r in range(runs):
        _, t, done = _static_core(rows, int(start), bg, max_rounds)
        out[r] = t if done else -1
    return out


def batch_sampled_static_T(n, d, runs, bg, multigraph, max_attempts, max_rounds):
    out = np.empty(runs, dtype=np.int64)
    attempts = 0
    for r in range(runs):
        for a in range(max_attempts):
            attempts += 1
            partner = pair_clones(n * d, bg)
            if multigraph or is_simple_partner(partner, n, d):
                break
        else:
            raise SamplingError("no simple configuration within max_attempts", attempts)
        rows = (partner // d).reshape(n, d).tolist()
        _, t, done = _static_core(rows, 0, bg, max_rounds)
        out[r] = t if done else -1
    return out, attempts


def batch_incremental_T(n, d, runs, bg, require_simple, max_attempts, max_rounds):
    out = np.empty(runs, dtype=np.int64)
    attempts = 0
    for r in range(runs):
        for a in range(max_attempts):
            attempts += 1
            partner, _, t, done, _ = _incremental_core(n, d, bg, require_simple, max_rounds, False)
            if not require_simple or is_simple_partner(partner, n, d):
                break
        else:
            raise SamplingError("no simple configuration within max_attempts", attempts)
        out[r] = t if done else -1
    return out, attempts
