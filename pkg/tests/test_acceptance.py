"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v -s``; the lines are also
collected into a section of the terminal summary.
"""
import math
import time

import pytest

from conftest import ACCEPTANCE_LINES
from walklab import rng
from walklab.chains import ceil_trel, lazy_walk_chain, mixing_time
from walklab.cli import main
from walklab.coalescing import build_epoch_schedule, estimate_tcoal, exact_tcoal, simulate_with_allowed_killings
from walklab.errors import SimulationError
from walklab.graphs import FamilySpec, build_graph, degree_stats, generate
from walklab.hitting import (
    GraphAnalysis,
    check_formula_1_1,
    verify_green_lemmas,
    verify_hitting_bounds,
    verify_return_bounds,
)
from walklab.meeting import negative_control_report, verify_meeting_theorem
from walklab.network import effective_resistance, unit_network, unit_resistance_constant, verify_network_propositions
from walklab.suite import SuiteConfig, default_families, sweep_sharpness

HORIZON = SuiteConfig().horizon
SEED = 0

# Pilot over the default suite (200 replicas, seed 0): the largest mean/t_hit
# was 1.2089 (complete n=8), rounded up to one decimal.
CEILING = 1.3
# Same pilot, largest mean / ((d_avg/d_min) n sqrt(t_rel)) was 1.5993 (complete n=8).
COR17_CEILING = 1.6
# Same suite, largest R_eff(x, y) d_min / sqrt(t_rel) with unit resistances was 1.5679 (path n=16).
UNIT_RESISTANCE_CEILING = 1.6


class Gate:
    """Collects failures for one criterion and reports a single line."""

    def __init__(self, number, title, budget=None):
        self.number, self.title, self.budget = number, title, budget
        self.problems: list[str] = []
        self.notes: list[str] = []
        self.start = time.perf_counter()

    def require(self, cond, what):
        if not cond:
            self.problems.append(what)

    def finish(self):
        elapsed = time.perf_counter() - self.start
        if self.budget is not None and elapsed >= self.budget:
            self.problems.append(f"took {elapsed:.1f} s, budget {self.budget} s")
        status = "PASS" if not self.problems else "FAIL"
        detail = "; ".join(self.notes + self.problems[:3])
        line = f"[{status}] criterion {self.number}: {self.title} ({elapsed:.1f} s){': ' + detail if detail else ''}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert not self.problems, line


def gating_failures(checks):
    return [c for c in checks if c.gating and not c.passed]


def describe(c):
    return f"{c.name} {c.context} x={c.x} t={c.t} margin={c.margin:.3g}"


def fresh_analyses():
    return [GraphAnalysis.of(generate(s)) for s in default_families()]


def test_criterion_01_hit_return_identity():
    gate = Gate(1, "pi(x) E_pi[tau_x] equals the spectral closed form within 1e-7", budget=10)
    worst = 0.0
    for a in fresh_analyses():
        for x in range(a.graph.n):
            c = check_formula_1_1(a.chain, x, a.profile, a.spectrum, context=a.label)
            worst = max(worst, abs(c.lhs - c.rhs))
            gate.require(abs(c.lhs - c.rhs) <= 1e-7, describe(c))
    gate.notes.append(f"max |diff| {worst:.2e}")
    gate.finish()


def test_criterion_02_hitting_time_bound():
    gate = Gate(2, "t_hit <= 20 (d_avg/d_min) n sqrt(t_rel+1) on the suite; K2 exact", budget=10)
    for a in fresh_analyses():
        for c in verify_hitting_bounds(a):
            if c.name == "hit_time_degree_bound":
                gate.require(c.margin >= 0, describe(c))
    k2 = next(c for c in verify_hitting_bounds(build_graph(2, [(0, 1)], "K2")) if c.name == "hit_time_degree_bound")
    gate.require(abs(k2.lhs - 2.0) <= 1e-12, f"K2 lhs {k2.lhs}")
    gate.require(abs(k2.rhs - 56.57) <= 5e-3, f"K2 rhs {k2.rhs}")
    gate.notes.append(f"K2 lhs {k2.lhs:g}, rhs {k2.rhs:.4f}")
    gate.finish()


def test_criterion_03_return_probability_bounds():
    gate = Gate(3, "return-probability bounds on the grid; general bound tight at t=0", budget=30)
    count = 0
    for a in fresh_analyses():
        checks = verify_return_bounds(a, HORIZON)
        for c in checks:
            if c.name in ("return_degree_bound", "return_spectral_bound"):
                count += 1
                gate.require(c.passed, describe(c))
            if c.name == "return_spectral_bound" and c.t == 0:
                gate.require(c.margin == 0.0, "t=0 not an equality: " + describe(c))
    gate.notes.append(f"{count} checks")
    gate.finish()


def test_criterion_04_green_lemmas():
    gate = Gate(4, "Green-function lemmas with slack >= -1e-9", budget=30)
    count = 0
    for a in fresh_analyses():
        for c in verify_green_lemmas(a, HORIZON):
            count += 1
            gate.require(c.margin >= -1e-9, describe(c))
    gate.notes.append(f"{count} checks")
    gate.finish()


def test_criterion_05_network():
    gate = Gate(5, "Green/resistance identity, commute and exit-set bounds, diameter fact, series/parallel",
                budget=60)
    worst, count = 0.0, 0
    for a in fresh_analyses():
        for c in verify_network_propositions(a, SEED):
            if c.name == "green_resistance_identity":
                worst = max(worst, abs(c.lhs - c.rhs))
                gate.require(abs(c.lhs - c.rhs) <= 1e-7, describe(c))
            elif c.gating:
                gate.require(c.passed, describe(c))
            count += 1
    for n in range(3, 17):
        path = unit_network(generate(FamilySpec("path", {"n": n})))
        ring = unit_network(generate(FamilySpec("cycle", {"n": n})))
        for k in range(1, n):
            gate.require(abs(effective_resistance(path, 0, [k]) - k) <= 1e-9, f"P{n} 0-{k}")
            gate.require(abs(effective_resistance(ring, 0, [k]) - k * (n - k) / n) <= 1e-9, f"C{n} 0-{k}")
    gate.notes.append(f"{count} checks, identity max |diff| {worst:.2e}")
    gate.finish()


def test_criterion_06_meeting():
    gate = Gate(6, "survival <= (1-1/t_hit)^t for fixed/random/greedy targets; quasistationary identity; "
                   "non-lazy control fails", budget=60)
    rows = 0
    for a in fresh_analyses():
        rep = verify_meeting_theorem(a, 10 * ceil_trel(a.t_rel), trials=100, seed=SEED)
        rows += len(rep.survival)
        for r in rep.violations:
            gate.require(False, f"{r.context} {r.kind}#{r.index} t={r.t} margin={r.margin:.3g}")
        for c in rep.checks:
            gate.require(c.passed, describe(c))
        kinds = {r.kind for r in rep.survival}
        gate.require(kinds == {"fixed", "random", "greedy_adversarial"}, f"{a.label} kinds {kinds}")
        qs = [c for c in rep.checks if c.name == "quasistationary_identity"]
        gate.require(len(qs) == a.graph.n, f"{a.label}: {len(qs)} quasistationary checks")
    control = negative_control_report()
    gate.require(bool(control.violations), "negative control did not fail")
    gate.notes.append(f"{rows} survival rows, control violations {len(control.violations)}")
    gate.finish()


def test_criterion_07_coalescence():
    gate = Gate(7, "K2 mean ~ 2; n <= 4 means match the exact chain; domination over 1000 coupled replicas",
                budget=300)
    k2 = lazy_walk_chain(build_graph(2, [(0, 1)], "K2"))
    est = estimate_tcoal(k2, 10_000, SEED)
    gate.require(abs(est.mean - 2.0) <= 3 * est.stderr, f"K2 mean {est.mean} +- {est.stderr}")
    gate.notes.append(f"K2 {est.mean:.4f} +- {est.stderr:.4f}")
    analyses = fresh_analyses()
    small = [a for a in analyses if a.graph.n <= 4]
    for a in small:
        exact = exact_tcoal(a.chain)
        est = estimate_tcoal(a.chain, 10_000, SEED, t_hit=a.profile.t_hit)
        gate.require(abs(est.mean - exact) <= 3 * est.stderr,
                     f"{a.label}: {est.mean:.4f} +- {est.stderr:.4f} vs exact {exact:.4f}")
    violations = 0
    for a in analyses:
        sched = build_epoch_schedule(mixing_time(a.chain), a.profile.t_hit, a.graph.n)
        for r in range(1000):
            try:
                simulate_with_allowed_killings(a.chain, sched, rng.split(SEED, r))
            except SimulationError as exc:
                if exc.code != "domination_violated":
                    raise
                violations += 1
    gate.require(violations == 0, f"{violations} domination violations")
    gate.notes.append(f"{len(small)} small graphs vs exact, {1000 * len(analyses)} coupled runs")
    gate.finish()


@pytest.fixture(scope="module")
def suite_estimates():
    cfg = SuiteConfig()
    out = []
    for a in fresh_analyses():
        est = estimate_tcoal(a.chain, cfg.replicas, cfg.seed, t_hit=a.profile.t_hit)
        st = degree_stats(a.graph)
        scale = float(st.d_avg) / st.d_min * a.graph.n * math.sqrt(a.t_rel)
        out.append((a, est, scale))
    return out


def test_criterion_08_coalescence_ceiling(suite_estimates):
    gate = Gate(8, f"empirical gate: mean/t_hit <= CEILING={CEILING} on every suite instance")
    worst = max(suite_estimates, key=lambda e: e[1].ratio_to_thit)
    for a, est, _ in suite_estimates:
        gate.require(est.ratio_to_thit <= CEILING, f"{a.label} ratio {est.ratio_to_thit:.4f}")
    gate.notes.append(f"max ratio {worst[1].ratio_to_thit:.4f} on {worst[0].label}")
    gate.finish()


@pytest.mark.xfail(strict=True, reason="on complete graphs t_hit exceeds (d_avg/d_min) n sqrt(t_rel), "
                                       "so the t_hit ceiling cannot also cap the second form")
def test_criterion_08_second_form_same_ceiling(suite_estimates):
    gate = Gate("8b", f"empirical gate: mean <= CEILING={CEILING} (d_avg/d_min) n sqrt(t_rel)")
    worst = max(suite_estimates, key=lambda e: e[1].mean / e[2])
    for a, est, scale in suite_estimates:
        gate.require(est.mean <= CEILING * scale, f"{a.label} ratio {est.mean / scale:.4f}")
    gate.notes.append(f"max ratio {worst[1].mean / worst[2]:.4f} on {worst[0].label}; known conflict")
    gate.finish()


def test_criterion_08_regression_ceilings(suite_estimates, suite_analyses):
    gate = Gate("8c", f"regression gates: mean <= {COR17_CEILING} (d_avg/d_min) n sqrt(t_rel); "
                      f"unit R_eff <= {UNIT_RESISTANCE_CEILING} sqrt(t_rel)/d_min")
    for a, est, scale in suite_estimates:
        gate.require(est.mean <= COR17_CEILING * scale, f"{a.label} ratio {est.mean / scale:.4f}")
    worst = 0.0
    for a in suite_analyses:
        k = unit_resistance_constant(a.graph, a.t_rel)
        worst = max(worst, k)
        gate.require(k <= UNIT_RESISTANCE_CEILING, f"{a.label} K {k:.4f}")
    gate.notes.append(f"max unit-resistance K {worst:.4f}")
    gate.finish()


def test_criterion_09_sharpness_sweeps():
    gate = Gate(9, "lollipop t_rel slope in [1.6, 2.4]; stretched expander t_hit slope in [0.8, 1.2]", budget=300)
    lol = sweep_sharpness("lollipop", [16, 24, 32, 48, 64], seed=SEED, d=3)
    s1 = lol.slopes["t_rel_vs_n"]
    gate.require(1.6 <= s1 <= 2.4, f"lollipop slope {s1:.4f}")
    se = sweep_sharpness("stretched_expander", [2, 4, 8], seed=SEED, n0=8)
    s2 = se.slopes["t_hit_vs_n_sqrt_trel"]
    gate.require(0.8 <= s2 <= 1.2, f"stretched slope {s2:.4f}")
    gate.notes.append(f"slopes {s1:.4f}, {s2:.4f}")
    gate.finish()


def test_criterion_10_determinism(tmp_path):
    gate = Gate(10, "repeated verify and simulate runs give byte-identical data")
    specs = ["lollipop:d=3,n=16,seed=0", "random_regular:n=16,d=3,seed=0", "star:n=6", "cycle:n=7"]
    args = [a for s in specs for a in ("--family-spec", s)]
    for name in ("a", "b"):
        code = main(["verify", *args, "--output-dir", str(tmp_path / name)])
        gate.require(code == 0, f"verify exit {code}")
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    for f in files:
        a, b = (tmp_path / "a" / f).read_bytes(), (tmp_path / "b" / f).read_bytes()
        if f == "summary.json":
            # only the header carries a timestamp
            a, b = a.split(b'"config"', 1)[1], b.split(b'"config"', 1)[1]
            a = a.replace(str(tmp_path / "a").encode(), b"")
            b = b.replace(str(tmp_path / "b").encode(), b"")
        gate.require(a == b, f"{f} differs")
    sims = []
    for name in ("a", "b"):
        out = tmp_path / f"sim_{name}.json"
        main(["simulate", "--family", "lollipop", "--d", "3", "--n", "16", "--replicas", "500",
              "--sim-seed", "7", "--out", str(out)])
        sims.append(out.read_bytes())
    gate.require(sims[0] == sims[1], "simulate output differs")
    gate.notes.append(f"{len(files)} report files compared")
    gate.finish()
