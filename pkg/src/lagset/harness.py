"""Scenario simulation, lockstep verification, benchmarks and worked examples."""
from __future__ import annotations

import csv
import io
import random
import statistics
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import recursion as rec
from .oracle import FM_ROW_GUARD, FMBlowup, HRep, PointSet, oracle_step, set_equal
from .plant import PlantModel, dual_realization, parse_plant, primal_realization
from .polytope import Polytope, from_vertices, validate
from .scalar import EXACT, format_scalar, get_backend, dot, mat_vec
from .serialize import dumps, hrep_to_dict, state_to_dict

__all__ = [
    "Scenario",
    "Trace",
    "BenchRecord",
    "ContainmentViolation",
    "VerificationMismatch",
    "UnknownExample",
    "random_stable_plant",
    "generate_run",
    "simulate",
    "verify",
    "bench",
    "bench_csv",
    "example",
    "EXAMPLES",
]

NOISE_DENOMINATOR = 16


class ContainmentViolation(AssertionError):
    """The true state left the computed uncertainty set."""


class VerificationMismatch(AssertionError):
    def __init__(self, msg, k=None, dumps=None):
        super().__init__(msg)
        self.k = k
        self.dumps = dumps or {}


class UnknownExample(KeyError):
    pass


@dataclass
class Scenario:
    plant: PlantModel
    horizon: int
    seed: int = 0
    x0: tuple | None = None
    mode: str = "ptu"
    backend: str = "exact"
    measurements: Sequence | None = None
    initial: Polytope | None = None

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        if self.x0 is None:
            self.x0 = tuple([0] * self.plant.m)
        if len(self.x0) != self.plant.m:
            raise ValueError("x0 has the wrong dimension")
        self.mode = rec._mode(self.mode)
        if self.initial is not None and not self.initial.contains(self.x0):
            raise ValueError("x0 must lie in the initial set")


def random_stable_plant(m: int, seed: int) -> PlantModel:
    """Random plant with rational poles strictly inside the unit disc.

    The denominator is ``prod (1 - p_i lambda)`` so the poles of the
    state-space model are the ``p_i``; the numerator is random with a
    vanishing constant term.  Non-coprime draws are rejected.
    """
    if m < 1:
        raise ValueError("order must be positive")
    rng = random.Random(seed)
    for _ in range(100):
        poles = []
        for _ in range(m):
            q = rng.randint(2, 9)
            poles.append(Fraction(rng.choice((-1, 1)) * rng.randint(1, q - 1), q))
        d = [Fraction(1)]
        for pole in poles:
            d = [a - pole * b for a, b in zip(d + [0], [0] + d)]
        n = [0] + [rng.randint(-3, 3) for _ in range(m)]
        if all(c == 0 for c in n):
            continue
        try:
            return parse_plant(n, d)
        except ValueError:
            continue
    d = [Fraction(1)]  # pragma: no cover - fallback after repeated rejection
    for _ in range(m):  # pragma: no cover
        d = [a - Fraction(1, 2) * b for a, b in zip(d + [0], [0] + d)]
    return parse_plant([0, 1] + [0] * (m - 1), d)  # pragma: no cover


def _noise(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(-NOISE_DENOMINATOR, NOISE_DENOMINATOR), NOISE_DENOMINATOR)


@dataclass
class Run:
    """True trajectory and measurements behind a scenario.

    ``states[k]`` is ``x_k`` and ``z[k]`` is ``<C, x_k> + w_k``.
    """

    states: list
    inputs: list
    noise: list
    z: list


def generate_run(sc: Scenario) -> Run:
    """Sample ``u_k``, ``w_k`` uniformly on a grid in ``[-1, 1]``.

    One more measurement than the horizon is generated so both step orders
    consume ``horizon`` measurement-and-dynamics steps.
    """
    real = primal_realization(sc.plant)
    rng = random.Random(sc.seed)
    x = tuple(EXACT.convert(c) for c in sc.x0)
    states, inputs, noise, zs = [x], [], [], []
    n = sc.horizon + 1
    given = list(sc.measurements) if sc.measurements is not None else None
    if given is not None and len(given) < n:
        raise ValueError(f"need {n} measurements, got {len(given)}")
    for k in range(n):
        u, w = _noise(rng), _noise(rng)
        y = dot(real.C, x)
        zs.append(EXACT.convert(given[k]) if given is not None else EXACT.convert(y + w))
        inputs.append(u)
        noise.append(w)
        if k < n - 1:
            x = tuple(EXACT.convert(a + b * u) for a, b in zip(mat_vec(real.A, x), real.B))
            states.append(x)
    return Run(states, inputs, noise, zs)


def _contains(state, x, backend) -> bool:
    x = tuple(backend.convert(c) for c in x)
    if isinstance(state, Polytope):
        return state.contains(x)
    if isinstance(state, PointSet):
        return state.contains(tuple(Fraction(c) for c in x))
    lo, hi = state
    return backend.cmp(lo, x[0]) <= 0 <= backend.cmp(hi, x[0])


def _initial(sc: Scenario, backend):
    if sc.initial is not None:
        if sc.initial.backend != backend:
            raise ValueError("initial set uses a different backend")
        return sc.initial
    return rec.initial_set(sc.x0, backend)


@dataclass
class Trace:
    scenario: Scenario
    run: Run
    entries: list = field(default_factory=list)
    states: list = field(default_factory=list)
    reports: list = field(default_factory=list)

    def to_json(self) -> str:
        return dumps(self.entries)


def _report_fields(rep: rec.StepReport, timing: bool) -> dict:
    d = rep.as_dict()
    if not timing:
        d.pop("duration")
    return d


def _check(state, x, k, backend, checks: bool):
    if not _contains(state, x, backend):
        raise ContainmentViolation(f"true state {x} outside S_{k}")
    if checks and isinstance(state, Polytope):
        v = validate(state)
        if not v.ok:
            raise VerificationMismatch(f"S_{k} fails validation: {v}", k)


def iterate(sc: Scenario, include_ridges: bool = True, checks: bool = True):
    """Yield ``(k, z, previous_state, state, report)`` for each step.

    Update-then-propagate steps ``k = 0..K-1`` consume ``z_k`` and produce
    ``S_{k+1}``, which must contain ``x_{k+1}``.  Propagate-then-update
    starts from ``{x_0}`` (already consistent with ``z_0``) and step ``k``
    consumes ``z_k`` for ``k = 1..K``, producing ``S_k`` cut by ``z_k``.
    """
    be = get_backend(sc.backend)
    run = generate_run(sc)
    p = sc.plant
    state = _initial(sc, be)
    for i in range(sc.horizon):
        if sc.mode == "utp":
            k, z, target = i, run.z[i], i + 1
        else:
            k, z, target = i + 1, run.z[i + 1], i + 1
        new, rep = rec.advance(state, be.convert(z), p, sc.mode, include_ridges)
        _check(new, run.states[target], target, be, checks)
        yield k, z, state, new, rep
        state = new


def simulate(sc: Scenario, out: str | Path | None = None, timing: bool = False,
             checks: bool = True) -> Trace:
    """Run the recursion on a simulated trajectory.

    Every set is checked to contain the true state; with ``checks`` each
    polytope is also validated.  Timing fields are left out of the trace
    unless requested so that a fixed seed gives a byte-identical file.
    """
    trace = Trace(sc, generate_run(sc))
    for k, z, _prev, state, rep in iterate(sc, checks=checks):
        trace.states.append(state)
        trace.reports.append(rep)
        entry = {"k": k, "z": format_scalar(z), "mode": sc.mode, "polytope": state_to_dict(state)}
        entry.update(_report_fields(rep, timing))
        trace.entries.append(entry)
    if out is not None:
        Path(out).write_text(trace.to_json() + "\n")
    return trace


# --- verification -------------------------------------------------------------

def _as_comparable(state):
    if isinstance(state, tuple) and len(state) == 2 and not isinstance(state[0], tuple):
        lo, hi = state
        return PointSet(((lo,), (hi,)) if lo != hi else ((lo,),))
    return state


def _oracle_initial(sc: Scenario) -> HRep:
    if sc.initial is not None:
        return HRep.from_polytope(sc.initial)
    return HRep.point(tuple(EXACT.convert(c) for c in sc.x0))


@dataclass
class VerifySummary:
    scenario: Scenario
    steps: int = 0
    set_checks: int = 0
    theorem_checks: int = 0
    structural_checks: int = 0
    fv_steps: int = 0
    mismatch: str | None = None
    mismatch_step: int | None = None
    dumps: dict = field(default_factory=dict)
    states: list = field(default_factory=list)
    reports: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.mismatch is None

    def __str__(self) -> str:
        head = "PASS" if self.ok else "FAIL"
        s = (f"{head}: {self.steps} steps, {self.set_checks} set comparisons, "
             f"{self.theorem_checks} theorem-1 checks, {self.fv_steps} incidence steps")
        if not self.ok:
            s += f"\nfirst mismatch at step {self.mismatch_step}: {self.mismatch}"
        return s


def structural_violations(rep: rec.StepReport) -> list[str]:
    """Allocation bounds and facet isomorphism for one propagation."""
    out = []
    if rep.path != "fv":
        return out
    if rep.n_f_out > rep.n_f + rep.n_R:
        out.append(f"n_f+ = {rep.n_f_out} exceeds n_f + n_R = {rep.n_f + rep.n_R}")
    if rep.n_v_out > 2 * rep.n_v:
        out.append(f"n_v+ = {rep.n_v_out} exceeds 2 n_v = {2 * rep.n_v}")
    for before, after in rep.facet_count_pairs:
        if before != after:
            out.append(f"propagated facet has {after} vertices, source had {before}")
    return out


def theorem1_check(prev, z, p: PlantModel, samples: int | None = 64, seed: int = 0):
    """Run the alignment check on the update-then-propagate successor of ``prev``."""
    if not isinstance(prev, Polytope):
        return None
    try:
        nxt, _ = rec.step(prev, z, p, "utp")
    except (rec.DegenerateCut, rec.InfeasibleMeasurement):
        return None
    return rec.verify_theorem1(prev, nxt, z, p, samples=samples, seed=seed)


def verify(sc: Scenario, fault: str | None = None, samples: int | None = 64,
           theorem: bool = True) -> VerifySummary:
    """Run the incidence pipeline and the projection oracle in lockstep.

    Every step is compared as a set, checked for the structural bounds and,
    when the previous set is a full-dimensional polytope, checked against
    the alignment predicate.  ``fault="skip-ridges"`` drops the ridge block
    to demonstrate that the comparison catches a broken update.
    """
    if sc.backend != "exact":
        raise ValueError("verification needs the exact backend")
    if fault not in (None, "skip-ridges"):
        raise ValueError(f"unknown fault {fault!r}")
    summary = VerifySummary(sc)
    p = sc.plant
    H = _oracle_initial(sc)
    # the alignment check needs the measurement that produced ``prev``
    # in propagate-then-update mode (the set is already cut by it)
    prev_z = generate_run(sc).z[0]
    try:
        for k, z, prev, state, rep in iterate(sc, include_ridges=fault is None, checks=False):
            summary.steps += 1
            summary.states.append(state)
            summary.reports.append(rep)
            H = oracle_step(H, z, p, sc.mode)
            summary.set_checks += 1
            if not set_equal(_as_comparable(state), H):
                summary.mismatch = "incidence pipeline and oracle disagree"
                summary.mismatch_step = k
                summary.dumps = {"pipeline": state_to_dict(state), "oracle": hrep_to_dict(H)}
                break
            invalid = [validate(P) for P in (rep.intermediate, state) if isinstance(P, Polytope)]
            invalid = [v for v in invalid if not v.ok]
            if invalid:
                summary.mismatch = f"validation failed: {invalid[0]}"
                summary.mismatch_step = k
                break
            if rep.path == "fv":
                summary.fv_steps += 1
            summary.structural_checks += 1
            bad = structural_violations(rep)
            if bad:
                summary.mismatch = "; ".join(bad)
                summary.mismatch_step = k
                break
            if theorem and p.m >= 2:
                tz = z if sc.mode == "utp" else prev_z
                tr = theorem1_check(prev, tz, p, samples=samples, seed=sc.seed + k)
                if tr is not None:
                    summary.theorem_checks += tr.checked
                    if not tr.ok:
                        summary.mismatch = "theorem-1 violation: " + tr.violations[0]
                        summary.mismatch_step = k
                        break
            prev_z = z
    except (ContainmentViolation, VerificationMismatch) as exc:
        summary.mismatch = str(exc)
        summary.mismatch_step = summary.steps
    except rec.StepError as exc:
        # a broken update can make later measurements look inconsistent
        if fault is None:
            raise
        summary.mismatch = f"pipeline failed: {exc}"
        summary.mismatch_step = summary.steps
    return summary


# --- benchmarks ----------------------------------------------------------------

@dataclass
class BenchRecord:
    k: int
    n_f: int
    t_fv: float
    t_fm: float | None
    equal: bool
    repeat: int = 0
    n_v: int = 0
    censored: bool = False

    @property
    def ratio(self) -> float | None:
        if self.t_fm is None or self.t_fv <= 0:
            return None
        return self.t_fm / self.t_fv


BENCH_FIELDS = ["repeat", "k", "n_f", "n_v", "t_fv", "t_fm", "ratio", "equal", "censored"]


def _bench_one(args) -> list[BenchRecord]:
    order, steps, seed, repeat, guard, mode, check = args
    p = random_stable_plant(order, seed)
    sc = Scenario(p, steps, seed=seed, mode=mode)
    run = generate_run(sc)
    be = EXACT
    state = _initial(sc, be)
    H = _oracle_initial(sc)
    out = []
    fm_alive = True
    for i in range(steps):
        z = run.z[i] if mode == "utp" else run.z[i + 1]
        n_f = state.n_facets if isinstance(state, Polytope) else 0
        n_v = state.n_vertices if isinstance(state, Polytope) else 0
        t0 = time.perf_counter()
        new, rep = rec.advance(state, z, p, mode)
        t_fv = time.perf_counter() - t0
        if check:
            for P in (rep.intermediate, new):
                if isinstance(P, Polytope) and not validate(P).ok:
                    raise VerificationMismatch(f"step {i} fails validation: {validate(P)}", i)
        t_fm = None
        equal = True
        censored = False
        if fm_alive:
            t0 = time.perf_counter()
            try:
                H_new = oracle_step(H, z, p, mode, guard)
                t_fm = time.perf_counter() - t0
            except FMBlowup:
                censored, fm_alive = True, False
            else:
                equal = set_equal(new, H_new) if isinstance(new, Polytope) else set_equal(_as_comparable(new), H_new)
                H = H_new
        else:
            censored = True
        if not equal:
            raise VerificationMismatch("benchmark step disagrees with the oracle", i,
                                       {"pipeline": state_to_dict(new)})
        if isinstance(state, Polytope):
            out.append(BenchRecord(i, n_f, t_fv, t_fm, equal, repeat, n_v, censored))
        state = new
    return out


def bench(order: int, steps: int, repeats: int = 1, seed: int = 0, mode: str = "ptu",
          guard: int | None = None, workers: int = 1, check: bool = False) -> list[BenchRecord]:
    """Time the incidence update against the oracle update step by step.

    Every repeat runs the same plant and measurement sequence, so facet
    counts agree across repeats and only timings vary.  Only steps starting
    from a full-dimensional polytope are recorded.  ``check`` validates every
    polytope outside the timed region.
    """
    guard = FM_ROW_GUARD if guard is None else guard
    jobs = [(order, steps, seed, r, guard, rec._mode(mode), check) for r in range(repeats)]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_bench_one, jobs))
    else:
        results = [_bench_one(j) for j in jobs]
    return [r for batch in results for r in batch]


def bench_csv(records: list[BenchRecord], path: str | Path | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BENCH_FIELDS)
    for r in records:
        ratio = r.ratio
        w.writerow([r.repeat, r.k, r.n_f, r.n_v, f"{r.t_fv:.6g}",
                    "" if r.t_fm is None else f"{r.t_fm:.6g}",
                    "" if ratio is None else f"{ratio:.4g}",
                    str(r.equal).lower(), str(r.censored).lower()])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def timing_summary(records: list[BenchRecord], threshold: int = 50) -> dict:
    """Median times for records with at least ``threshold`` facets, and the
    median ratio in the lower and upper halves of that facet range."""
    big = [r for r in records if r.n_f >= threshold and r.t_fm is not None]
    if not big:
        return {"count": 0}
    med_fv = statistics.median(r.t_fv for r in big)
    med_fm = statistics.median(r.t_fm for r in big)
    usable = sorted((r for r in records if r.ratio is not None), key=lambda r: r.n_f)
    half = len(usable) // 2
    low = statistics.median(r.ratio for r in usable[:half]) if half else None
    high = statistics.median(r.ratio for r in usable[half:]) if half else None
    return {"count": len(big), "median_t_fv": med_fv, "median_t_fm": med_fm,
            "ratio_low_nf": low, "ratio_high_nf": high}


# --- worked examples -----------------------------------------------------------

EXAMPLE_PLANT = ((0, 1, 0), (1, 0, -1))


def _fmt_vec(v) -> str:
    return "(" + ", ".join(format_scalar(c) for c in v) + ")"


def _fmt_rows(rows: list[int], width: int) -> list[str]:
    return ["  " + " ".join("1" if r >> j & 1 else "0" for j in range(width)) for r in rows]


def _mask_str(mask: int, n: int) -> str:
    return " ".join("1" if mask >> j & 1 else "0" for j in range(n))


def _describe(S: Polytope, title: str) -> list[str]:
    lines = [f"{title}: {S.n_vertices} vertices, {S.n_facets} facets"]
    lines.append("  vertices: " + ", ".join(_fmt_vec(v) for v in S.vertices))
    for f, h in zip(S.normals, S.offsets):
        lines.append(f"  facet {_fmt_vec(f)} . x <= {format_scalar(h)}")
    lines.append("  incidence (facet rows x vertex columns):")
    lines += _fmt_rows(list(S.incidence), S.n_vertices)
    return lines


def _walkthrough(S: Polytope, name: str) -> str:
    p = parse_plant(*EXAMPLE_PLANT)
    real, dual = primal_realization(p), dual_realization(p)
    out, rep = rec.lag_propagate(S, p)
    t = rep.tables
    nf, nv = S.n_facets, S.n_vertices
    lines = [f"example {name}: plant n={_fmt_vec(p.n)}, d={_fmt_vec(p.d)}"]
    lines.append(f"A = {[list(map(format_scalar, r)) for r in real.A]}, B = {_fmt_vec(real.B)}")
    lines.append(f"A* = {[list(map(format_scalar, r)) for r in dual.A]}")
    lines += _describe(S, "input")
    lines.append("facet classes:")
    lines.append(f"  IF^T {_mask_str(t.IF_T, nf)}")
    lines.append(f"  IF^B {_mask_str(t.IF_B, nf)}")
    lines.append(f"  IF^O {_mask_str(t.IF_O, nf)}")
    for label, rows in (("I^T", t.I_T), ("I^B", t.I_B), ("IO^T", t.IO_T), ("IO^B", t.IO_B)):
        lines.append(f"{label}:")
        lines += _fmt_rows(rows, nv)
    lines.append(f"IV^PT {_mask_str(t.IV_PT, nv)}")
    lines.append(f"IV^PB {_mask_str(t.IV_PB, nv)}")
    lines.append(f"qualifying ridges: {len(t.ridges)}")
    for r in t.ridges:
        fr = rec.ridge_direction(*r.direction_pair)
        lines.append(f"  facets {r.facet_pair}, vertices {list(r.vertex_ids)}, f^R = {_fmt_vec(fr)}")
    for label, rows in (("IRV", t.IRV), ("IR^T", t.IR_T), ("IR^B", t.IR_B)):
        lines.append(f"{label}:")
        lines += _fmt_rows(rows, nv) if rows else ["  (none)"]
    lines.append(f"assembled incidence before pruning ({len(t.assembled)} x {2 * nv}),"
                 " columns A v + B then A v - B:")
    lines += _fmt_rows(t.assembled, 2 * nv)
    lines.append(f"pruned {rep.pruned_rows} zero rows and {rep.pruned_cols} zero columns")
    lines += _describe(out, "result")
    return "\n".join(lines)


def _fig1() -> str:
    p = parse_plant(*EXAMPLE_PLANT)
    x, f, z = (0, 0), (1, 0), 0
    line = rec.dual_line(f, p)
    M = rec.compute_M(x, f, z, p)
    y = dot(primal_realization(p).C, x)
    return "\n".join([
        f"example fig1: plant n={_fmt_vec(p.n)}, d={_fmt_vec(p.d)}",
        f"x = {_fmt_vec(x)}, f = {_fmt_vec(f)}, z = {z}, y = <C, x> = {format_scalar(y)}",
        f"dual line: {format_scalar(line.n_m)} y* + {format_scalar(line.d_m)} u* = {format_scalar(line.rhs)}"
        f" (meets the u* axis at u* = {format_scalar(line.u_star(0))} > 0)",
        f"|y - z| = {format_scalar(abs(y - z))} < 1, so y* = 0 and u = 1",
        "M = {" + ", ".join(_fmt_vec(q) for q in sorted(M.points())) + "}",
    ])


def _square() -> str:
    return _walkthrough(from_vertices([(1, 1), (-1, 1), (-1, -1), (1, -1)]), "square")


def _diamond() -> str:
    return _walkthrough(from_vertices([(1, 0), (0, 1), (-1, 0), (0, -1)]), "diamond")


EXAMPLES = {"fig1": _fig1, "square": _square, "diamond": _diamond}


def example(name: str) -> str:
    try:
        fn = EXAMPLES[name]
    except KeyError:
        raise UnknownExample(f"unknown example {name!r}; choose from {', '.join(EXAMPLES)}") from None
    return fn()
