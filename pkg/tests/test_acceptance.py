"""Acceptance suite: one test per criterion, each printing a single
``CRITERION n: PASS|FAIL`` line (visible even under output capture).

Criteria 1, 4, 5 and 8 share one batch of lockstep verification runs.
"""
import statistics
import time

import pytest

from lagset.harness import (
    Scenario,
    bench,
    bench_csv,
    iterate,
    random_stable_plant,
    simulate,
    structural_violations,
    timing_summary,
    verify,
)
from lagset.oracle import HRep, oracle_step, set_equal
from lagset.plant import parse_plant
from lagset.polytope import Polytope, from_vertices, validate
from lagset.recursion import compute_M, dual_line, lag_propagate

N_SCENARIOS = 100
HORIZON = 8


def report(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\nCRITERION {n}: {'PASS' if ok else 'FAIL'} - {detail}")


def scenarios():
    out = []
    for i in range(N_SCENARIOS):
        m = 2 if i % 2 == 0 else 3
        seed = 1000 + i
        mode = "ptu" if i % 4 < 2 else "utp"
        out.append(Scenario(random_stable_plant(m, seed), HORIZON, seed=seed, mode=mode))
    return out


@pytest.fixture(scope="module")
def lockstep():
    t0 = time.perf_counter()
    summaries = [verify(sc, samples=64) for sc in scenarios()]
    return summaries, time.perf_counter() - t0


def test_criterion_1_oracle_equivalence(lockstep, capsys):
    summaries, elapsed = lockstep
    failed = [s for s in summaries if not s.ok]
    comparisons = sum(s.set_checks for s in summaries)
    fv = sum(s.fv_steps for s in summaries)
    ok = not failed and len(summaries) >= 100 and elapsed < 600
    detail = (f"{len(summaries)} scenarios, {comparisons} exact set comparisons "
              f"({fv} incidence steps), {len(failed)} mismatches, {elapsed:.0f}s")
    if failed:
        detail += f"; first: {failed[0].mismatch}"
    report(capsys, 1, ok, detail)
    assert ok, detail


def test_criterion_2_golden_geometry(capsys):
    p = parse_plant((0, 1, 0), (1, 0, -1))
    square = from_vertices([(1, 1), (-1, 1), (-1, -1), (1, -1)])
    diamond = from_vertices([(1, 0), (0, 1), (-1, 0), (0, -1)])
    sq, _ = lag_propagate(square, p)
    hx, rep = lag_propagate(diamond, p)
    checks = [
        set(sq.vertices) == {(1, 2), (-1, 2), (1, -2), (-1, -2)},
        sq.n_facets == 4,
        set(hx.vertices) == {(1, 1), (-1, 1), (1, -1), (-1, -1), (0, 2), (0, -2)},
        hx.n_facets == 6,
        rep.n_R == 2,
        {((1, 0), 1), ((-1, 0), 1)} <= set(zip(hx.normals, hx.offsets)),
        set_equal(sq, oracle_step(HRep.from_polytope(square), 0, p, "utp")),
        set_equal(hx, oracle_step(HRep.from_polytope(diamond), 0, p, "utp")),
        validate(sq).ok and validate(hx).ok,
    ]
    ok = all(checks)
    report(capsys, 2, ok, f"square -> {sq.n_facets} facets, diamond -> {hx.n_facets} facets "
                          f"with ridge facets (+-1, 0); {sum(checks)}/{len(checks)} checks")
    assert ok


def test_criterion_3_fig1(capsys):
    p = parse_plant((0, 1, 0), (1, 0, -1))
    x, f, z = (0, 0), (1, 0), 0
    crosses_positive = dual_line(f, p).u_star(0) > 0
    M = compute_M(x, f, z, p)
    ok = crosses_positive and M.points() == {(1, 0)}
    report(capsys, 3, ok, f"M(x, f, z) = {sorted(M.points())}")
    assert ok


def test_criterion_4_theorem1(lockstep, capsys):
    summaries, _ = lockstep
    checked = sum(s.theorem_checks for s in summaries)
    bad = [s for s in summaries if s.mismatch and s.mismatch.startswith("theorem-1")]
    ok = checked > 0 and not bad and all(s.ok for s in summaries)
    report(capsys, 4, ok, f"{checked} sampled (vertex, direction, M-point) checks, {len(bad)} violations")
    assert ok


def test_criterion_5_structural_bounds(lockstep, capsys):
    summaries, _ = lockstep
    reports = [r for s in summaries for r in s.reports if r.path == "fv"]
    bad = [v for r in reports for v in structural_violations(r)]
    iso = sum(len(r.facet_count_pairs) for r in reports)
    ok = bool(reports) and not bad
    report(capsys, 5, ok, f"{len(reports)} propagations, {iso} propagated facets compared, "
                          f"{len(bad)} violations")
    assert ok, bad[:3]


def test_criterion_6_containment(capsys):
    runs = 0
    failures = []
    for m in (1, 2, 3):
        for seed in range(6):
            for mode in ("ptu", "utp"):
                for backend in ("exact", "float"):
                    if m == 3 and backend == "float" and seed > 2:
                        continue
                    sc = Scenario(random_stable_plant(m, seed), 10, seed=seed, mode=mode, backend=backend)
                    try:
                        simulate(sc)
                    except AssertionError as exc:
                        failures.append(str(exc))
                    runs += 1
    ok = not failures
    report(capsys, 6, ok, f"{runs} simulate runs (m = 1..3, both modes, both backends), "
                          f"{len(failures)} containment failures")
    assert ok, failures[:3]


def test_criterion_7_timing_trend(capsys, tmp_path):
    # this plant and seed grow past 50 facets within 13 steps
    recs = bench(3, 13, repeats=1, seed=4, check=True)
    csv_path = tmp_path / "bench_m3.csv"
    bench_csv(recs, csv_path)
    summary = timing_summary(recs, 50)
    usable = sorted((r for r in recs if r.ratio is not None), key=lambda r: r.n_f)
    ranks_nf = list(range(len(usable)))
    by_ratio = sorted(range(len(usable)), key=lambda i: usable[i].ratio)
    ratio_rank = [0] * len(usable)
    for rank, i in enumerate(by_ratio):
        ratio_rank[i] = rank
    corr = statistics.correlation(ranks_nf, ratio_rank) if len(usable) > 2 else 0.0
    ok = (summary["count"] > 0
          and summary["median_t_fv"] < summary["median_t_fm"]
          and summary["ratio_high_nf"] > summary["ratio_low_nf"]
          and corr > 0
          and all(r.equal for r in recs))
    big = [r for r in recs if r.n_f >= 50]
    detail = (f"{summary['count']} steps with n_f >= 50 (max {max(r.n_f for r in recs)}): "
              f"median F-V {summary.get('median_t_fv', 0) * 1e3:.1f} ms vs oracle "
              f"{summary.get('median_t_fm', 0) * 1e3:.1f} ms; ratio at n_f >= 50 "
              f"{statistics.median(r.ratio for r in big):.0f}x; median ratio low/high n_f "
              f"{summary['ratio_low_nf']:.1f}x/{summary['ratio_high_nf']:.1f}x; rank correlation {corr:.2f}")
    report(capsys, 7, ok, detail)
    assert ok, detail


def test_criterion_8_validation(lockstep, capsys):
    summaries, _ = lockstep
    checked = 0
    bad = []
    for s in summaries:
        for state, rep in zip(s.states, s.reports):
            for P in (rep.intermediate, state):
                if isinstance(P, Polytope):
                    checked += 1
                    v = validate(P)
                    if not v.ok:
                        bad.append(str(v))
    # golden cases and the bootstrap path of a fresh run
    p = parse_plant((0, 1, 0), (1, 0, -1))
    for pts in ([(1, 1), (-1, 1), (-1, -1), (1, -1)], [(1, 0), (0, 1), (-1, 0), (0, -1)]):
        out, _ = lag_propagate(from_vertices(pts), p)
        checked += 1
        if not validate(out).ok:
            bad.append(str(validate(out)))
    for _, _, _, state, rep in iterate(Scenario(random_stable_plant(3, 11), 6, seed=11), checks=False):
        for P in (rep.intermediate, state):
            if isinstance(P, Polytope):
                checked += 1
                if not validate(P).ok:
                    bad.append(str(validate(P)))
    ok = checked > 0 and not bad
    report(capsys, 8, ok, f"{checked} polytopes validated (criteria 2 and 7 validate their own), "
                          f"{len(bad)} failures")
    assert ok, bad[:3]
