"""Configuration model: uniform perfect matchings on clones and their projection.

A clone is a pair ``(vertex, slot)`` with 1-based vertex and slot in ``1..d``.
For the full universe ``V_n x [d]`` clone ``(v, s)`` sits at position
``(v - 1) * d + (s - 1)``, which is the clone id used by the kernels.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from ._backend import kernels
from .errors import InputError, SamplingError, StateError
from .graph import Graph
from .rng import make_rng

ENUMERATION_CUTOFF = 10
MAX_EXACT_COUNT = 20
DEFAULT_MAX_ATTEMPTS = 1000


class Clone(NamedTuple):
    vertex: int
    slot: int


def clone_universe(n, d):
    """All clones of ``V_n x [d]`` as an (n*d, 2) array, vertex-major."""
    v = np.repeat(np.arange(1, n + 1), d)
    s = np.tile(np.arange(1, d + 1), n)
    return np.stack([v, s], axis=1)


def vertex_clones(vertices, d):
    vs = np.asarray(list(vertices), dtype=np.int64)
    return np.stack([np.repeat(vs, d), np.tile(np.arange(1, d + 1), vs.size)], axis=1).reshape(-1, 2)


def _as_clone_array(clones):
    arr = np.asarray(clones, dtype=np.int64)
    if arr.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InputError("clones must be (vertex, slot) pairs")
    if (arr < 1).any():
        raise InputError("vertex and slot are 1-based")
    return arr


@dataclass(frozen=True, eq=False)
class CloneMatching:
    """Partial or perfect matching on a clone universe.

    ``partner[i]`` is the universe position matched to position ``i``, or -1.
    """

    clones: np.ndarray
    partner: np.ndarray

    def __post_init__(self):
        c = _as_clone_array(self.clones)
        p = np.asarray(self.partner, dtype=np.int64)
        if p.shape != (len(c),):
            raise InputError("partner array must align with clones")
        m = p >= 0
        if m.any() and not np.array_equal(p[p[m]], np.nonzero(m)[0]):
            raise InputError("partner array is not an involution")
        if (p[m] == np.nonzero(m)[0]).any():
            raise InputError("a clone cannot be matched to itself")
        object.__setattr__(self, "clones", c)
        object.__setattr__(self, "partner", p)

    @property
    def size(self):
        return len(self.clones)

    @property
    def complete(self):
        return bool((self.partner >= 0).all())

    @property
    def exposed(self):
        """Clones already matched."""
        return {Clone(*map(int, self.clones[i])) for i in np.nonzero(self.partner >= 0)[0]}

    @property
    def pairs(self):
        out = set()
        for i, j in enumerate(self.partner.tolist()):
            if j > i:
                out.add(frozenset((Clone(*map(int, self.clones[i])), Clone(*map(int, self.clones[j])))))
        return out

    def key(self):
        """Canonical hashable form (sorted pairs of positions)."""
        p = self.partner
        i = np.nonzero(p > np.arange(len(p)))[0]
        return tuple(zip(i.tolist(), p[i].tolist()))


def sample_matching(universe, rng):
    """Uniform perfect matching: shuffle the clones and pair consecutive entries."""
    clones = _as_clone_array(universe)
    k = len(clones)
    if k % 2:
        raise InputError(f"cannot perfectly match an odd number of clones ({k})")
    rng = make_rng(rng)
    partner = kernels.pair_clones(k, rng.bit_generator)
    return CloneMatching(clones, partner)


def count_matchings(k):
    """Number of perfect matchings of k points, (k-1)(k-3)...1."""
    if k < 0 or k % 2 or k > MAX_EXACT_COUNT:
        raise InputError(f"count_matchings needs an even k in 0..{MAX_EXACT_COUNT}, got {k}")
    return math.prod(range(k - 1, 0, -2))


def enumerate_matchings(k):
    """Yield every perfect matching of ``range(k)`` as a partner list."""
    if k % 2:
        raise InputError("odd point count has no perfect matching")

    partner = [-1] * k

    def rec():
        try:
            i = partner.index(-1)
        except ValueError:
            yield list(partner)
            return
        for j in range(i + 1, k):
            if partner[j] < 0:
                partner[i], partner[j] = j, i
                yield from rec()
                partner[i] = partner[j] = -1

    yield from rec()


def project(matching, n, d):
    """Multigraph on V_n with one edge per matched clone pair."""
    if matching.size != n * d or not np.array_equal(matching.clones, clone_universe(n, d)):
        raise InputError("matching is not on the clone universe V_n x [d]")
    if not matching.complete:
        raise StateError("cannot project an incomplete matching")
    return Graph((matching.partner // d).reshape(n, d))


def _check_nd(n, d):
    if n < 1 or d < 1:
        raise InputError("n and d must be positive")
    if (n * d) % 2:
        raise InputError(f"n*d must be even (n={n}, d={d})")
    if n * d >= 2**32:
        raise InputError("n*d too large for the 32-bit clone sampler")


def sample_multigraph(n, d, rng):
    """One draw of the configuration-model multigraph."""
    _check_nd(n, d)
    rng = make_rng(rng)
    partner = kernels.pair_clones(n * d, rng.bit_generator)
    return Graph(partner.reshape(n, d) // d)


class Sampled(NamedTuple):
    graph: Graph
    attempts: int


def sample_simple_regular(n, d, rng, max_attempts=DEFAULT_MAX_ATTEMPTS):
    """Uniform simple d-regular graph by rejecting non-simple configurations."""
    _check_nd(n, d)
    if d < 3:
        raise InputError("sample_simple_regular needs d >= 3")
    if d >= n:
        raise InputError(f"no simple {d}-regular graph on {n} vertices")
    rng = make_rng(rng)
    bg = rng.bit_generator
    for attempt in range(1, max_attempts + 1):
        partner = kernels.pair_clones(n * d, bg)
        if kernels.is_simple_partner(partner, n, d):
            return Sampled(Graph(partner.reshape(n, d) // d, simple=True), attempt)
    raise SamplingError(
        f"no simple {d}-regular configuration on {n} vertices in {max_attempts} attempts",
        max_attempts,
    )


# --- matching statistics -----------------------------------------------------

@dataclass(frozen=True)
class MatchingStats:
    e_AA: int
    e_AB: int
    e_AC: int
    H: tuple
    Q: int
    N: int


def _positions(keys_sorted, order, keys):
    idx = np.searchsorted(keys_sorted, keys)
    idx = np.clip(idx, 0, len(keys_sorted) - 1)
    if len(keys) and not np.array_equal(keys_sorted[idx], keys):
        raise InputError("set contains clones outside the matching's universe")
    return order[idx]


def matching_stats(matching, A, B, C, d):
    """Edge counts between clone classes and the hit profile of the vertices in C."""
    A = _as_clone_array(A)
    B = _as_clone_array(B)
    Cv = np.asarray(sorted(set(int(v) for v in C)), dtype=np.int64)
    Cc = vertex_clones(Cv, d)
    if len(A) + len(B) + len(Cc) != matching.size:
        raise InputError("A, B and C x [d] must exactly cover the matching's universe")
    if not matching.complete:
        raise StateError("matching_stats needs a complete matching")
    width = int(max(matching.clones[:, 1].max(initial=0), d)) + 1
    ukeys = matching.clones[:, 0] * width + matching.clones[:, 1]
    order = np.argsort(ukeys, kind="stable")
    skeys = ukeys[order]
    pa = _positions(skeys, order, A[:, 0] * width + A[:, 1])
    pb = _positions(skeys, order, B[:, 0] * width + B[:, 1])
    pc = _positions(skeys, order, Cc[:, 0] * width + Cc[:, 1])
    label = np.full(matching.size, -1, dtype=np.int64)
    for lab, pos in ((0, pa), (1, pb), (2, pc)):
        if (label[pos] != -1).any():
            raise InputError("A, B and C x [d] must be pairwise disjoint")
        label[pos] = lab
    if np.unique(np.concatenate([pa, pb, pc])).size != matching.size:
        raise InputError("A, B and C x [d] must be pairwise disjoint")
    owner = np.full(matching.size, -1, dtype=np.int64)
    owner[pc] = np.repeat(np.arange(Cv.size), d)

    p = matching.partner
    i = np.arange(matching.size)
    lo = i < p
    la, lb = label[i[lo]], label[p[lo]]
    e_aa = int(np.count_nonzero((la == 0) & (lb == 0)))
    e_ab = int(np.count_nonzero(((la == 0) & (lb == 1)) | ((la == 1) & (lb == 0))))
    e_ac = int(np.count_nonzero(((la == 0) & (lb == 2)) | ((la == 2) & (lb == 0))))
    c_hit = pc[label[p[pc]] == 0]
    per_vertex = np.bincount(owner[c_hit], minlength=Cv.size)
    H = np.bincount(per_vertex, minlength=d + 1)[: d + 1] if Cv.size else np.zeros(d + 1, dtype=np.int64)
    return MatchingStats(
        e_AA=e_aa,
        e_AB=e_ab,
        e_AC=e_ac,
        H=tuple(int(h) for h in H),
        Q=int(H[2:].sum()),
        N=len(A) + len(B) + d * Cv.size - 1,
    )


@dataclass(frozen=True)
class ExpectedStats:
    """Exact first moments of the edge counts plus the leading-order hit profile.

    ``h_applicable`` is False when |B| < |A|, outside the regime where the
    binomial form of E H_l is known to hold.
    """

    e_AA: Fraction
    e_AB: Fraction
    e_AC: Fraction
    H: tuple
    Q_bound: float
    N: int
    h_applicable: bool


def expected_stats(a, b, c, d):
    N = a + b + d * c - 1
    if N < 1:
        raise InputError(f"normalizer N = |A|+|B|+d|C|-1 must be positive, got {N}")
    e_aa = Fraction(a * (a - 1), 2 * N)
    e_ab = Fraction(a * b, N)
    e_ac = Fraction(d * a * c, N)
    x = a / N
    H = tuple(c * math.comb(d, ell) * x**ell * (1 - x) ** (d - ell) for ell in range(d + 1))
    q_bound = d * d * a * a * c / N**2 if N >= 4 else None
    return ExpectedStats(e_aa, e_ab, e_ac, H, q_bound, N, h_applicable=b >= a)
