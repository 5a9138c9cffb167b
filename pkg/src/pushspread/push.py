"""Round-synchronous push protocol, on a fixed graph or co-sampled with the graph.

Round ``t`` maps the state after round ``t-1`` to the state after round ``t``;
the initial state (round 0) has only vertex 1 informed. In the exposure mode
every round also records the unexposed-clone count ``P``, the number of
selected clones ``A``, the hit profile ``H`` and the matching edge counts
needed to check the bookkeeping identities exactly.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels
from .errors import InputError, SamplingError
from .graph import Graph, edges_within
from .rng import make_rng

DEFAULT_MAX_ROUNDS = 1_000_000

_tally = {"runs": 0, "rounds": 0, "violations": 0}


def identity_tally():
    """Process-wide count of exposure runs checked and identity violations found."""
    return dict(_tally)


class IdentityViolation(AssertionError):
    pass


def phase_threshold(n, exponent=7.0):
    """ln(n)**exponent capped to [1, n], plus whether it is below n at all.

    The phase markers T0 and T1 are only meaningful when the raw threshold is
    smaller than n.
    """
    raw = math.log(n) ** exponent if n > 1 else 0.0
    return min(max(raw, 1.0), float(n)), raw < n


@dataclass
class RoundRecord:
    t: int
    I: int
    U: int
    N: int
    P: int = None
    A: int = None
    H: list = None
    e_selfhit: int = None
    e_AU: int = None
    e_AA: int = None
    P_prev: int = None


@dataclass
class ProtocolTrace:
    n: int
    d: int
    mode: str
    records: list
    inform_round: np.ndarray = field(repr=False)
    seed: int = None
    T: int = None
    T0: int = None
    T1: int = None
    threshold: float = None
    phases_applicable: bool = False
    attempts: int = 1
    violations: list = field(default_factory=list)
    final_phase_diag: object = None

    @property
    def complete(self):
        return self.T is not None

    @property
    def coverage(self):
        return int(np.count_nonzero(self.inform_round >= 0))

    def state_at(self, t):
        """(I_t, U_t, P_t) after round t; t = 0 is the initial state."""
        if t == 0:
            return 1, self.n - 1, (self.d if self.mode == "incremental" else None)
        r = self.records[t - 1]
        return r.I, r.U, r.P

    def to_dict(self):
        rounds = []
        for r in self.records:
            rounds.append({"t": r.t, "I": r.I, "U": r.U, "N": r.N, "P": r.P, "A": r.A, "H": r.H})
        return {
            "n": self.n,
            "d": self.d,
            "mode": self.mode,
            "seed": self.seed,
            "T": self.T,
            "T0": self.T0,
            "T1": self.T1,
            "coverage": self.coverage,
            "rounds": rounds,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), separators=(",", ":"))


def _seed_of(rng):
    return int(rng) if isinstance(rng, (int, np.integer)) else None


def _phase_markers(trace, exponent):
    tau, ok = phase_threshold(trace.n, exponent)
    trace.threshold = tau
    trace.phases_applicable = ok
    if not ok:
        return
    for r in trace.records:
        if trace.T0 is None and r.I >= tau:
            trace.T0 = r.t
        if trace.T1 is None and r.U <= tau:
            trace.T1 = r.t


def _base_records(ir, rounds, n):
    newly = np.bincount(ir[ir >= 0], minlength=rounds + 1)
    informed = np.cumsum(newly)
    return [
        RoundRecord(t=t, I=int(informed[t]), U=int(n - informed[t]), N=int(newly[t]))
        for t in range(1, rounds + 1)
    ]


def _generic_violations(trace):
    out = []
    prev_I = 1
    for r in trace.records:
        if r.I + r.U != trace.n:
            out.append((r.t, "I+U=n"))
        if r.N > prev_I:
            out.append((r.t, "N<=I_prev"))
        prev_I = r.I
    return out


def run_static(g, start=1, rng=None, phase_exponent=7.0, max_rounds=DEFAULT_MAX_ROUNDS):
    """Push protocol on a fixed graph.

    Every informed vertex picks one of its ``d`` edge-ends uniformly each
    round. On a disconnected graph the run stops once no uninformed vertex is
    reachable and ``T`` stays None.
    """
    if not isinstance(g, Graph):
        raise InputError("run_static needs a Graph")
    if not 1 <= int(start) <= g.n:
        raise InputError(f"start vertex {start} out of range 1..{g.n}")
    seed = _seed_of(rng)
    gen = make_rng(rng)
    ir, rounds = kernels.static_run(g.ends, int(start) - 1, gen.bit_generator, max_rounds)
    trace = ProtocolTrace(g.n, g.d, "static", _base_records(ir, rounds, g.n), ir, seed=seed)
    if trace.coverage == g.n:
        trace.T = rounds
    _phase_markers(trace, phase_exponent)
    trace.violations = _generic_violations(trace)
    return trace


def proposition1_violations(trace):
    """Rounds where an exposure-mode bookkeeping identity fails, as (t, name) pairs."""
    out = []
    d = trace.d
    prev = 1
    P_prev = d
    for r in trace.records:
        if r.N != sum(r.H):
            out.append((r.t, "N=sum H"))
        if r.N > r.e_AU:
            out.append((r.t, "N<=e_AU"))
        if r.I != prev + r.N or r.U != trace.n - prev - r.N:
            out.append((r.t, "I,U update"))
        if r.P_prev != P_prev or r.P != r.P_prev - r.A - r.e_selfhit + sum(
            (d - i) * h for i, h in enumerate(r.H, start=1)
        ):
            out.append((r.t, "P update"))
        if r.A != 2 * r.e_AA + r.e_selfhit + r.e_AU:
            out.append((r.t, "A split"))
        prev, P_prev = r.I, r.P
    return out


def _exposure_trace(n, d, out, seed):
    ir = out["inform_round"]
    rounds = out["rounds"]
    records = _base_records(ir, rounds, n)
    P = out["P"]
    for i, r in enumerate(records):
        r.P_prev = int(P[i])
        r.P = int(P[i + 1])
        r.A = int(out["A"][i])
        r.e_AA = int(out["e_AA"][i])
        r.e_selfhit = int(out["e_self"][i])
        r.e_AU = int(out["e_AU"][i])
        r.H = [int(h) for h in out["H"][i, 1:]]
    return ProtocolTrace(n, d, "incremental", records, ir, seed=seed)


def run_incremental(
    n,
    d,
    rng=None,
    require_simple=False,
    max_attempts=1000,
    phase_exponent=7.0,
    strict=True,
    max_rounds=DEFAULT_MAX_ROUNDS,
):
    """Push protocol with the configuration model exposed lazily round by round.

    Returns ``(trace, graph)``; after the broadcast the rest of the matching is
    completed uniformly, so ``graph`` is a full configuration-model draw. With
    ``require_simple`` the whole run is repeated until the graph is simple.
    """
    if n < 2 or d < 3 or (n * d) % 2:
        raise InputError(f"run_incremental needs n >= 2, d >= 3 and n*d even (n={n}, d={d})")
    seed = _seed_of(rng)
    gen = make_rng(rng)
    for attempt in range(1, max_attempts + 1):
        out = kernels.incremental_run(n, d, gen.bit_generator, True, max_rounds)
        if not require_simple or kernels.is_simple_partner(out["partner"], n, d):
            break
    else:
        raise SamplingError(f"no simple run in {max_attempts} attempts", max_attempts)
    graph = Graph(out["partner"].reshape(n, d) // d)
    trace = _exposure_trace(n, d, out, seed)
    trace.attempts = attempt
    if trace.coverage == n:
        trace.T = out["rounds"]
    _phase_markers(trace, phase_exponent)
    trace.violations = _generic_violations(trace) + proposition1_violations(trace)
    trace.violations += [(i + 1, "H_0=0") for i in np.nonzero(out["H"][:, 0])[0]]
    _tally["runs"] += 1
    _tally["rounds"] += len(trace.records)
    _tally["violations"] += len(trace.violations)
    if strict and trace.violations:
        raise IdentityViolation(f"bookkeeping identities failed: {trace.violations[:5]}")
    return trace, graph


# --- batch broadcast times -----------------------------------------------------

def broadcast_times_static(g, runs, rng, start=1, max_rounds=DEFAULT_MAX_ROUNDS):
    """Broadcast times of ``runs`` independent runs on one graph; -1 marks no coverage."""
    gen = make_rng(rng)
    return kernels.batch_static_T(g.ends, int(start) - 1, runs, gen.bit_generator, max_rounds)


def broadcast_times_sampled(n, d, runs, rng, multigraph=False, max_attempts=1000,
                            max_rounds=DEFAULT_MAX_ROUNDS):
    """Fresh configuration (simple unless ``multigraph``) per run, static push from vertex 1."""
    gen = make_rng(rng)
    T, _ = kernels.batch_sampled_static_T(n, d, runs, gen.bit_generator, multigraph,
                                          max_attempts, max_rounds)
    return T


def broadcast_times_incremental(n, d, runs, rng, require_simple=True, max_attempts=1000,
                                max_rounds=DEFAULT_MAX_ROUNDS):
    gen = make_rng(rng)
    T, _ = kernels.batch_incremental_T(n, d, runs, gen.bit_generator, require_simple,
                                       max_attempts, max_rounds)
    return T


# --- diagnostics ---------------------------------------------------------------

@dataclass
class AConcentrationRound:
    t: int
    P: int
    A: int
    deviation: float
    tolerance: float
    within: bool
    bound: float


@dataclass
class AConcentrationReport:
    rounds: list
    considered: int
    violations: int
    frequency: float
    mean_bound: float


def check_A_concentration(trace, n=None, min_P=0):
    """Compare the selected-clone count with P/d round by round.

    A round is within tolerance when |A - P/d| < P / (d ln^2 n); alongside it
    the analytic tail bound 2 exp(-P / (3 d ln^4 n)) is reported. Aggregates
    cover rounds with P >= ``min_P`` and P > 0.
    """
    n = trace.n if n is None else n
    d = trace.d
    L = math.log(n)
    rows = []
    for r in trace.records:
        if r.P_prev is None:
            raise InputError("A-concentration needs an exposure-mode trace")
        P = r.P_prev
        mean = P / d
        tol = P / (d * L**2)
        dev = abs(r.A - mean)
        within = P == 0 or dev < tol
        bound = min(1.0, 2 * math.exp(-P / (3 * d * L**4)))
        rows.append(AConcentrationRound(r.t, P, r.A, dev, tol, within, bound))
    sel = [x for x in rows if x.P > 0 and x.P >= min_P]
    bad = sum(1 for x in sel if not x.within)
    return AConcentrationReport(
        rounds=rows,
        considered=len(sel),
        violations=bad,
        frequency=bad / len(sel) if sel else 0.0,
        mean_bound=float(np.mean([x.bound for x in sel])) if sel else 0.0,
    )


@dataclass
class FinalPhaseRow:
    t: int
    size: int
    e_inside: int
    e_cut: int
    dense_flag: bool
    cut_flag: bool


@dataclass
class FinalPhaseReport:
    applicable: bool
    rows: list
    T_minus_T1: int = None
    flags: int = 0


def final_phase_diagnostics(trace, g):
    """Edge statistics of the uninformed set S after every round from T1 until T.

    Flags e(S) >= 1.1|S| and e(S, V \\ S) < d|S|/4.
    """
    if trace.T1 is None or not trace.complete:
        report = FinalPhaseReport(applicable=False, rows=[])
        trace.final_phase_diag = report
        return report
    ir = trace.inform_round
    rows = []
    for t in range(trace.T1, trace.T + 1):
        S = (ir < 0) | (ir > t)
        s = int(S.sum())
        inside = edges_within(g, S)
        cut = g.d * s - 2 * inside
        rows.append(FinalPhaseRow(t, s, inside, cut, inside >= 1.1 * s and s > 0, cut < g.d * s / 4))
    report = FinalPhaseReport(
        applicable=True,
        rows=rows,
        T_minus_T1=trace.T - trace.T1,
        flags=sum(r.dense_flag or r.cut_flag for r in rows),
    )
    trace.final_phase_diag = report
    return report


def trace_from_dict(data):
    """Rebuild the round records of a serialized trace (inform_round is not stored)."""
    recs = [RoundRecord(**{k: r[k] for k in ("t", "I", "U", "N", "P", "A", "H")}) for r in data["rounds"]]
    tr = ProtocolTrace(data["n"], data["d"], data["mode"], recs, np.empty(0, dtype=np.int64),
                       seed=data.get("seed"), T=data["T"], T0=data["T0"], T1=data["T1"])
    return tr
