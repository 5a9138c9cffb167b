"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -s``.
"""

import filecmp
import itertools
import math
import os
import time
from fractions import Fraction

import numpy as np
import pytest
from scipy.stats import ks_2samp

import oracles
from pushspread.bounds import chernoff_tail, lemma1_tail
from pushspread.config_model import expected_stats, matching_stats, sample_matching, vertex_clones
from pushspread.experiment import ExperimentSpec, compare_trajectory, sweep
from pushspread.graph import complete_graph, disjoint_union, from_edges, load_fixture
from pushspread.push import (
    broadcast_times_incremental,
    broadcast_times_sampled,
    final_phase_diagnostics,
    identity_tally,
    run_incremental,
)
from pushspread.rng import derive_seed
from pushspread.spectral import (
    mixing_check,
    paley_graph,
    spectrum,
    typicality_check,
    variance_bound_check,
)
from pushspread.theory import COMPLETE_GRAPH_CONSTANT, TheoryParams, c_d, g_ratio, integrate

MASTER = 20240601
# ln^7 n exceeds n = 10^5, so phase markers at that size use ln^3 n
PHASE_EXP = 3


def _rr_cell(n, d, multigraph=False):
    return {"kind": "random-regular", "n": n, "d": d, "multigraph": multigraph}


@pytest.fixture(scope="module")
def big_runs():
    """100 exposure-mode runs at n = 10^5, d = 3, reduced to what the criteria need."""
    out = []
    for i in range(100):
        tr, g = run_incremental(10**5, 3, derive_seed(MASTER, 8, i), phase_exponent=PHASE_EXP)
        fp = final_phase_diagnostics(tr, g)
        cmp = compare_trajectory(tr) if i < 50 else None
        out.append({"trace_T": tr.T, "T1": tr.T1, "fp": fp, "cmp": cmp, "viol": len(tr.violations)})
    return out


def test_c01_leading_order_d3(criterion):
    t0 = time.perf_counter()
    spec = ExperimentSpec(cells=[_rr_cell(10**k, 3) for k in (3, 4, 5)], runs=200, seed=MASTER)
    res = sweep(spec)
    wall = time.perf_counter() - t0
    ch = [s["C_hat"] for s in res.summaries]
    gap = abs(ch[-1] - c_d(3)) / c_d(3)
    ok = ch[0] > ch[1] > ch[2] and gap <= 0.15 and res.violations == 0
    detail = "C_hat " + ", ".join(f"{x:.4f}" for x in ch) + f"; gap at 1e5 {gap:.3%}; {wall:.0f}s"
    assert criterion(1, ok, detail)


def test_c02_degree_ordering(criterion):
    ds = (3, 4, 5, 8)
    spec = ExperimentSpec(cells=[_rr_cell(10**5, d, multigraph=True) for d in ds], runs=200, seed=MASTER)
    res = sweep(spec)
    ch = [s["C_hat"] for s in res.summaries]
    ref = [c_d(d) for d in ds]
    ok = all(a > b for a, b in zip(ch, ch[1:])) and all(a > b for a, b in zip(ref, ref[1:]))
    detail = ", ".join(f"d={d}: {x:.3f} (C_d {r:.3f})" for d, x, r in zip(ds, ch, ref))
    assert criterion(2, ok, detail)


def test_c03_complete_graph(criterion):
    res = sweep(ExperimentSpec(cells=[{"kind": "complete", "n": 1000}], runs=200, seed=MASTER))
    target = math.log2(1000) + math.log(1000)
    mean = res.summaries[0]["meanT"]
    err = abs(mean - target) / target
    assert criterion(3, err <= 0.10, f"mean T {mean:.2f} vs {target:.2f} ({err:.2%})")


def test_c04_paley(criterion):
    q = 1009
    res = sweep(ExperimentSpec(cells=[{"kind": "paley", "q": q}], runs=200, seed=MASTER))
    target = math.log2(q) + math.log(q)
    mean = res.summaries[0]["meanT"]
    err = abs(mean - target) / target
    eps = math.log(q) ** (-1 / 9)
    rep = typicality_check(paley_graph(q), eps, 1000, derive_seed(MASTER, 4))
    ok = err <= 0.20 and rep.passed
    assert criterion(4, ok, f"mean T {mean:.2f} vs {target:.2f} ({err:.2%}); typicality eps={eps:.4f} "
                            f"passed={rep.passed}")


def test_c05_exact_identities(criterion, big_runs):
    before = identity_tally()
    viol = 0
    count = 0
    for n, d in itertools.product((4, 6, 10, 50, 400, 3000), (3, 4, 5, 8)):
        if n * d % 2 or n <= d:
            continue
        for i in range(20):
            tr, _ = run_incremental(n, d, derive_seed(MASTER, 5, n, d, i), strict=False)
            viol += len(tr.violations)
            count += 1
    viol += sum(r["viol"] for r in big_runs)
    tally = identity_tally()
    ok = viol == 0 and tally["violations"] == 0
    assert criterion(5, ok, f"{count + len(big_runs)} runs here, {tally['runs']} in session so far "
                            f"({tally['rounds']} rounds), violations {tally['violations']}")
    assert tally["runs"] > before["runs"]


def test_c06_lemma1_oracle(criterion):
    exact_ok = True
    instances = 0
    for d in (1, 2, 3, 4):
        for c in range(0, 10 // d + 1):
            for a in range(0, 11 - c * d):
                for b in range(0, 11 - c * d - a):
                    k = a + b + c * d
                    if k < 2 or k % 2:
                        continue
                    means, _ = oracles.brute_matching_means(a, b, c, d)
                    ex = expected_stats(a, b, c, d)
                    exact_ok &= means.get("AA", Fraction(0)) == ex.e_AA
                    exact_ok &= means.get("AB", Fraction(0)) == ex.e_AB
                    exact_ok &= means.get("AC", Fraction(0)) == ex.e_AC
                    instances += 1
    a, b, c, d = 200, 200, 500, 3
    A = np.stack([np.full(a, c + 1), np.arange(1, a + 1)], 1)
    B = np.stack([np.full(b, c + 2), np.arange(1, b + 1)], 1)
    universe = np.concatenate([vertex_clones(range(1, c + 1), d), A, B])
    rng = np.random.default_rng(derive_seed(MASTER, 6))
    samples = 20000
    rows = []
    for _ in range(samples):
        s = matching_stats(sample_matching(universe, rng), A, B, range(1, c + 1), d)
        rows.append((s.e_AA, s.e_AB, s.e_AC) + s.H)
    rows = np.array(rows, dtype=float)
    ex = expected_stats(a, b, c, d)
    mean = rows.mean(axis=0)
    se = rows.std(axis=0, ddof=1) / math.sqrt(samples)
    z = [abs(mean[i] - float(v)) / se[i] for i, v in enumerate((ex.e_AA, ex.e_AB, ex.e_AC))]
    h_err = [abs(mean[3 + l] - ex.H[l]) / ex.H[l] for l in range(d + 1)]
    ok = exact_ok and max(z) <= 3 and max(h_err) <= 0.05
    detail = (f"{instances} exhaustive instances exact={exact_ok}; z(e_AA,e_AB,e_AC)="
              + ",".join(f"{x:.2f}" for x in z) + "; H rel err " + ",".join(f"{x:.2%}" for x in h_err))
    assert criterion(6, ok, detail)


def test_c07_mode_equivalence(criterion):
    runs = 10**5
    crit = 1.628 * math.sqrt(2 / runs)  # two-sample KS critical value at alpha = 0.01
    parts = []
    ok = True
    for n in (4, 6, 8):
        a = broadcast_times_sampled(n, 3, runs, derive_seed(MASTER, 7, n, 0))
        b = broadcast_times_incremental(n, 3, runs, derive_seed(MASTER, 7, n, 1))
        # -1 marks a disconnected draw (two K4's at n = 8); it stays in both samples
        D = ks_2samp(a, b).statistic
        ok &= D < crit
        parts.append(f"n={n}: D={D:.4f}, disconnected {np.mean(a < 0):.4f}/{np.mean(b < 0):.4f}")
    assert criterion(7, ok, "; ".join(parts) + f" (critical {crit:.4f})")


def test_c08_trajectory(criterion, big_runs):
    cmps = [r["cmp"] for r in big_runs[:50]]
    errs = [c.max_window_err_U for c in cmps]
    within = [c.ratio_within for c in cmps]
    mean_err = float(np.mean(errs))
    grid = np.logspace(-3, 3, 200)
    mono = all(
        all(x < y for x, y in zip(vals, vals[1:]))
        for vals in ([g_ratio(x, d) for x in grid] for d in range(3, 11))
    )
    worst = 0.0
    for d in (3, 4, 8):
        tr = integrate(TheoryParams(10**5, d, phase_exponent=PHASE_EXP))
        for t in range(tr.steps):
            worst = max(worst, abs(tr.r[t + 1] / tr.r[t] / g_ratio(tr.r[t], d) - 1))
    ok = all(c.applicable for c in cmps) and mean_err <= 0.10 and mono and worst <= 1e-10
    detail = (f"mean max-window U error {mean_err:.3%}; one-round ratio within 5% in "
              f"{np.mean(within):.1%} of rounds; g monotone={mono}; ratio identity err {worst:.1e}")
    assert criterion(8, ok, detail)


def _spectral_fixtures():
    from pushspread.config_model import sample_multigraph, sample_simple_regular

    return [
        load_fixture("k4"),
        load_fixture("petersen"),
        complete_graph(8),
        paley_graph(13),
        paley_graph(29),
        from_edges(8, [(1, 2), (1, 3), (1, 5), (2, 4), (2, 6), (3, 4), (3, 7),
                       (4, 8), (5, 6), (5, 7), (6, 8), (7, 8)]),
        disjoint_union(load_fixture("k4"), load_fixture("k4")),
        sample_simple_regular(10, 3, 3).graph,
        sample_simple_regular(12, 4, 4).graph,
        sample_simple_regular(100, 3, 5).graph,
        sample_multigraph(12, 3, 6),
        paley_graph(101),
    ]


def test_c09_spectral(criterion):
    rng = np.random.default_rng(derive_seed(MASTER, 9))
    fixtures = _spectral_fixtures()
    pairs = 0
    mixing_ok = True
    while pairs < 10**4:
        for g in fixtures:
            lam = spectrum(g).lam
            perm = rng.permutation(g.n) + 1
            a = int(rng.integers(1, g.n))
            b = int(rng.integers(1, g.n - a + 1))
            mixing_ok &= mixing_check(g, perm[:a], perm[a:a + b], lam).passed
            pairs += 1
    var_ok = True
    sets = 0
    for g in fixtures:
        if g.n > 12:
            continue
        lam = spectrum(g).lam
        for mask in itertools.product((False, True), repeat=g.n):
            var_ok &= variance_bound_check(g, np.array(mask), lam).passed
            sets += 1
    ev = spectrum(load_fixture("petersen")).eigenvalues
    pet_err = float(np.abs(ev - np.array([3] + [1] * 5 + [-2] * 4)).max())
    ok = mixing_ok and var_ok and pet_err <= 1e-8
    assert criterion(9, ok, f"mixing {pairs} pairs ok={mixing_ok}; variance {sets} sets ok={var_ok}; "
                            f"Petersen spectrum err {pet_err:.1e}")


def test_c10_final_phase(criterion, big_runs):
    flags = sum(r["fp"].flags for r in big_runs)
    applicable = all(r["fp"].applicable for r in big_runs)
    gaps = [r["fp"].T_minus_T1 for r in big_runs]
    limit = 10 * math.log(math.log(10**5)) ** 2
    ok = applicable and flags == 0 and np.mean(gaps) <= limit
    assert criterion(10, ok, f"flags {flags} over {len(big_runs)} runs; mean T-T1 {np.mean(gaps):.2f} "
                             f"<= {limit:.2f}")


def test_c11_bound_soundness(criterion):
    rng = np.random.default_rng(derive_seed(MASTER, 11))
    lines = []
    ok = True
    # fixture 1: binomial sum, independent indicators
    x = rng.binomial(300, 1 / 3, size=10**6)
    b = chernoff_tail(100, 30)
    f = float(np.mean(np.abs(x - 100) > 30))
    ok &= f <= b.value
    lines.append(f"Bin: {f:.2e}<={b.value:.2e}")
    # fixtures 2 and 3: matching statistics at |A|=|B|=300, |C|=1000, d=3
    a, bb, c, d = 300, 300, 1000, 3
    A = np.stack([np.full(a, c + 1), np.arange(1, a + 1)], 1)
    B = np.stack([np.full(bb, c + 2), np.arange(1, bb + 1)], 1)
    universe = np.concatenate([vertex_clones(range(1, c + 1), d), A, B])
    ex = expected_stats(a, bb, c, d)
    ab, ac = [], []
    for _ in range(10**4):
        s = matching_stats(sample_matching(universe, rng), A, B, range(1, c + 1), d)
        ab.append(s.e_AB)
        ac.append(s.e_AC)
    ab, ac = np.array(ab), np.array(ac)
    mu_ab, mu_ac = float(ex.e_AB), float(ex.e_AC)
    l1 = lemma1_tail(mu_ab, 0.2, d, n=c)
    f = float(np.mean(np.abs(ab - mu_ab) >= 0.2 * mu_ab))
    if l1.applicable:
        ok &= f <= l1.value
    lines.append(f"e(A,B) lemma: {f:.2e} vs {l1.value:.2g} (applicable={l1.applicable})")
    t = 40.0
    ch = chernoff_tail(mu_ac, t)
    f = float(np.mean(np.abs(ac - mu_ac) > t))
    ok &= f <= ch.value
    l1 = lemma1_tail(mu_ac, 0.2, d, n=c)
    f2 = float(np.mean(np.abs(ac - mu_ac) >= 0.2 * mu_ac))
    if l1.applicable:
        ok &= f2 <= l1.value
    lines.append(f"e(A,C): chernoff {f:.2e}<={ch.value:.2e}, lemma {f2:.2e} vs {l1.value:.2g} "
                 f"(applicable={l1.applicable})")
    assert criterion(11, ok, "; ".join(lines))


def test_c12_determinism(criterion, tmp_path):
    spec = ExperimentSpec(
        cells=[_rr_cell(2000, 3), _rr_cell(1000, 5, multigraph=True), {"kind": "complete", "n": 64},
               {"kind": "paley", "q": 61}],
        runs=30, seed=MASTER, retain="full", full_runs=5,
    )
    sweep(spec, out_dir=tmp_path / "a")
    sweep(spec, out_dir=tmp_path / "b")
    sweep(spec, out_dir=tmp_path / "c", workers=2)
    spec_inc = ExperimentSpec(cells=[_rr_cell(5000, 3)], runs=20, seed=MASTER, mode="incremental",
                              retain="full", full_runs=3, phase_exponent=2)
    sweep(spec_inc, out_dir=tmp_path / "d")
    sweep(spec_inc, out_dir=tmp_path / "e")

    def same(x, y):
        files = []
        for root, _, names in os.walk(x):
            for nm in names:
                if nm != "timings.jsonl":
                    files.append(os.path.relpath(os.path.join(root, nm), x))
        match, mismatch, errors = filecmp.cmpfiles(x, y, files, shallow=False)
        return not mismatch and not errors, len(match)

    checks = [same(tmp_path / "a", tmp_path / "b"), same(tmp_path / "a", tmp_path / "c"),
              same(tmp_path / "d", tmp_path / "e")]
    ok = all(c[0] for c in checks)
    assert criterion(12, ok, f"{sum(c[1] for c in checks)} output files compared byte for byte")
