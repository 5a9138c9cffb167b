"""Adjacency spectra, the expander mixing lemma and (p, eps)-typicality checks."""

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import CapacityError, InputError
from .graph import Graph, _as_mask, degrees_into, edges_between
from .rng import make_rng

DENSE_CAP = 4096
TOL = 1e-9
EXHAUSTIVE_MAX_N = 16


@dataclass
class SpectralProfile:
    n: int
    d: int
    eigenvalues: np.ndarray  # descending; None for the estimated path
    lam: float
    lambda_1: float
    exact: bool = True
    tolerance: float = 0.0

    @property
    def alon_boppana_slack(self):
        return self.lam - 2 * math.sqrt(self.d - 1)

    @property
    def ramanujan(self):
        return self.alon_boppana_slack <= TOL

    def expander_ok(self, C):
        """lambda <= C sqrt(d); C is supplied by the caller."""
        return self.lam <= C * math.sqrt(self.d) + TOL

    def to_dict(self):
        return {
            "n": self.n,
            "d": self.d,
            "lambda_1": self.lambda_1,
            "lambda": self.lam,
            "alon_boppana_slack": self.alon_boppana_slack,
            "exact": self.exact,
            "tolerance": self.tolerance,
            "eigenvalues": None if self.eigenvalues is None else [float(x) for x in self.eigenvalues],
        }


def spectrum(g, cap=DENSE_CAP, estimate=False, tol=1e-8):
    """Full spectrum by dense decomposition, or an estimate of lambda_1 and lambda.

    Above ``cap`` vertices a CapacityError is raised unless ``estimate`` is set,
    in which case a Lanczos estimate of the extreme eigenvalues is returned.
    """
    if g.n > cap:
        if not estimate:
            raise CapacityError(
                f"n={g.n} exceeds the dense eigensolver cap {cap}; pass estimate=True for a Lanczos estimate"
            )
        return _estimate(g, tol)
    ev = np.linalg.eigvalsh(g.adjacency_matrix())[::-1].copy()
    lam = float(np.abs(ev[1:]).max()) if g.n > 1 else 0.0
    return SpectralProfile(g.n, g.d, ev, lam, float(ev[0]))


def _estimate(g, tol):
    from scipy.sparse.linalg import eigsh

    A = g.sparse_adjacency().astype(np.float64)
    top = eigsh(A, k=2, which="LA", tol=tol, return_eigenvectors=False)
    bottom = eigsh(A, k=1, which="SA", tol=tol, return_eigenvectors=False)
    top = np.sort(top)[::-1]
    lam = float(max(abs(top[1]), abs(bottom[0])))
    return SpectralProfile(g.n, g.d, None, lam, float(top[0]), exact=False, tolerance=tol * g.d)


@dataclass(frozen=True)
class MixingResult:
    lhs: float
    rhs: float
    passed: bool


def mixing_check(g, U, W, lam):
    """|e(U,W) - d|U||W|/n| against lambda sqrt(|U||W|(1-|U|/n)(1-|W|/n)).

    Only disjoint U, W are supported.
    """
    mu, mw = _as_mask(g, U), _as_mask(g, W)
    e = edges_between(g, mu, mw)
    n = g.n
    u, w = int(mu.sum()), int(mw.sum())
    lhs = abs(e - g.d * u * w / n)
    rhs = lam * math.sqrt(max(0.0, u * w * (1 - u / n) * (1 - w / n)))
    return MixingResult(lhs, rhs, lhs <= rhs + TOL)


@dataclass(frozen=True)
class VarianceResult:
    mean: float
    var: float
    bound: float
    passed: bool


def variance_bound_check(g, S, lam):
    """Exact mean and variance of d_S(v) over a uniform vertex v."""
    ds = degrees_into(g, S)
    n = g.n
    s = int(_as_mask(g, S).sum())
    total = int(ds.sum())
    mean = Fraction(total, n)
    if mean != Fraction(g.d * s, n):
        raise AssertionError("mean of d_S(v) differs from d|S|/n on a regular graph")
    var = Fraction(int((ds.astype(np.int64) ** 2).sum()), n) - mean * mean
    bound = lam**2 * (s / n) * (1 - s / n)
    return VarianceResult(float(mean), float(var), bound, float(var) <= bound + TOL)


# --- typicality ---------------------------------------------------------------

@dataclass
class ConditionSamples:
    """One row per sampled set: its size, the statistic and the allowed range."""

    sizes: np.ndarray
    values: np.ndarray
    low: np.ndarray
    high: np.ndarray

    @property
    def ok(self):
        return (self.values >= self.low - TOL) & (self.values <= self.high + TOL)

    @property
    def passed(self):
        return bool(self.ok.all())

    @property
    def count(self):
        return int(self.sizes.size)

    def summary(self):
        return {
            "samples": self.count,
            "failures": int((~self.ok).sum()),
            "passed": self.passed,
            "strata": sorted(set(int(s) for s in self.sizes)),
        }


@dataclass
class TypicalityReport:
    p: float
    eps: float
    condition1: ConditionSamples
    condition2: ConditionSamples
    condition3: ConditionSamples
    exhaustive: bool = False
    notes: list = field(default_factory=list)

    @property
    def passed(self):
        return self.condition1.passed and self.condition2.passed and self.condition3.passed

    def to_dict(self):
        return {
            "p": self.p,
            "eps": self.eps,
            "exhaustive": self.exhaustive,
            "condition1": self.condition1.summary(),
            "condition2": self.condition2.summary(),
            "condition3": self.condition3.summary(),
            "passed": self.passed,
        }


def _degree_columns(g, masks):
    """d_S(v) for each column mask; masks has shape (n, k)."""
    A = g.sparse_adjacency()
    return np.rint(A @ masks.astype(np.float64)).astype(np.int64)


def _random_masks(n, size, k, rng):
    masks = np.zeros((n, k), dtype=bool)
    for j in range(k):
        masks[rng.choice(n, size=size, replace=False), j] = True
    return masks


def _all_masks(n):
    rows = np.array(list(itertools.product((False, True), repeat=n))[1:], dtype=bool)
    return rows.T


def _empty_samples():
    z = np.zeros(0)
    return ConditionSamples(z.astype(np.int64), z, z, z)


def _stack(parts):
    if not parts:
        return _empty_samples()
    return ConditionSamples(*(np.concatenate([p[i] for p in parts]) for i in range(4)))


def _evaluate(g, masks, eps, which):
    n, d = g.n, g.d
    p = d / n
    ds = _degree_columns(g, masks)
    size = masks.sum(axis=0)
    out = {}
    if 1 in which:
        sel = size >= eps * eps * n - TOL
        lo = (1 - eps) * p * size
        hi = (1 + eps) * p * size
        bad = ((ds < lo - TOL) | (ds > hi + TOL)) & ~masks
        x = bad.sum(axis=0)
        out[1] = (size[sel], x[sel].astype(float), np.zeros(sel.sum()), np.full(sel.sum(), 8 * n / math.log(n)))
    if 2 in which:
        sel = size <= eps * eps * n + TOL
        bad = (ds > eps * p * n + TOL) & ~masks
        x = bad.sum(axis=0)
        out[2] = (size[sel], x[sel].astype(float), np.zeros(sel.sum()), eps * size[sel])
    if 3 in which:
        cut = (d * size - (ds * masks).sum(axis=0)).astype(float)
        base = size * (n - size) * p
        w = 8 * math.sqrt(eps)
        out[3] = (size, cut, base * (1 - w), base * (1 + w))
    return out


def typicality_strata(n, eps):
    """Set sizes sampled for conditions 1/3 and for condition 2."""
    e2n = eps * eps * n
    e2n = round(e2n) if abs(e2n - round(e2n)) < 1e-9 else e2n
    big = sorted({min(n, max(1, s)) for s in (math.ceil(e2n), math.ceil(2 * e2n), n // 4, n // 2)})
    small = sorted({max(1, min(s, math.floor(e2n))) for s in (math.ceil(math.sqrt(n)), math.floor(e2n / 2))})
    return big, small


def typicality_check(g, eps, sample_budget=1000, rng=None, batch=256):
    """Sampled (p, eps)-typicality with p = d/n.

    Each condition spends ``sample_budget`` uniform sets spread evenly over its
    size strata. Graphs with n <= 16 are checked over every nonempty subset.
    X_S only counts vertices outside S.
    """
    if not 0 < eps < 1:
        raise InputError("eps must lie in (0, 1)")
    if sample_budget < 1:
        raise InputError("sample_budget must be positive")
    n = g.n
    p = g.d / n
    if n <= EXHAUSTIVE_MAX_N:
        res = _evaluate(g, _all_masks(n), eps, (1, 2, 3))
        parts = {k: [v] for k, v in res.items()}
        exhaustive = True
    else:
        rng = make_rng(rng)
        big, small = typicality_strata(n, eps)
        parts = {1: [], 2: [], 3: []}
        jobs = [((1, 3), big), ((2,), small)]
        for which, sizes in jobs:
            per = [sample_budget // len(sizes) + (i < sample_budget % len(sizes)) for i in range(len(sizes))]
            for size, k in zip(sizes, per):
                for start in range(0, k, batch):
                    masks = _random_masks(n, size, min(batch, k - start), rng)
                    for c, v in _evaluate(g, masks, eps, which).items():
                        parts[c].append(v)
        exhaustive = False
    notes = []
    if 8 * n / math.log(n) >= n:
        notes.append("condition 1 bound 8n/ln n is at least n and cannot fail")
    return TypicalityReport(
        p, eps, _stack(parts[1]), _stack(parts[2]), _stack(parts[3]), exhaustive, notes
    )


# --- explicit expanders -------------------------------------------------------

def is_prime(q):
    if q < 2:
        return False
    if q % 2 == 0:
        return q == 2
    return all(q % f for f in range(3, math.isqrt(q) + 1, 2))


def paley_graph(q):
    """Paley graph on Z_q: u ~ v iff u - v is a nonzero square mod q."""
    if not is_prime(q) or q % 4 != 1:
        raise InputError(f"Paley graph needs a prime q = 1 mod 4, got {q}")
    residues = np.array(sorted({x * x % q for x in range(1, q)}), dtype=np.int64)
    ends = (np.arange(q)[:, None] + residues[None, :]) % q
    return Graph(ends, simple=True)
