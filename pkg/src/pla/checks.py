"""Randomized property suites shared by ``pla check`` and the test-suite."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .core import MarketParams, default_lipschitz
from .environment import DemandModel, FiniteSupport, realized_cost
from .intervals import build_intervals
from .saa import exact_W
from .transport import brute_force_allocation, solve_allocation


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail} ({self.seconds:.2f}s)"


def random_transport_instance(rng: np.random.Generator, p_max: float = 4.0, integral: bool = False):
    m, n = rng.integers(1, 4, size=2)
    draw = (lambda size: rng.integers(0, 5, size=size).astype(float)) if integral else (
        lambda size: rng.uniform(0, 3, size=size)
    )
    I, D = draw(m), draw(n)
    C = rng.uniform(0, p_max, size=(m, n))
    p = rng.uniform(0, p_max)
    if integral:
        C = np.round(C)
        p = float(np.round(p))
    return I, D, p, C


def allocation_certificate_errors(res, I, D, p, C, tol: float = 1e-9) -> list[str]:
    """Primal feasibility, dual feasibility, zero gap and complementary slackness."""
    problems = []
    X, lam, eta = res.X, res.lam, res.eta
    scale = 1.0 + abs(res.objective)
    if np.any(X < -tol):
        problems.append("negative flow")
    if np.any(X.sum(axis=0) > D + tol) or np.any(X.sum(axis=1) > I + tol):
        problems.append("capacity violated")
    if np.any(lam < 0) or np.any(eta < 0):
        problems.append("negative dual")
    reduced = C - p + lam[:, None] + eta[None, :]
    if np.any(reduced < -tol * scale):
        problems.append(f"dual infeasible (min reduced cost {reduced.min():.3g})")
    gap = abs(res.objective - res.dual_objective(I, D))
    if gap > tol * scale:
        problems.append(f"duality gap {gap:.3g}")
    if np.any((X > tol) & (reduced > tol * scale)):
        problems.append("complementary slackness violated")
    return problems


def check_transport_oracle(count: int = 1000, seed: int = 0) -> CheckResult:
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    instances = [(np.ones(2), np.ones(2), 5.0, np.array([[1.0, 2.0], [3.0, 10.0]]))]
    instances += [random_transport_instance(rng, integral=(k % 4 == 0)) for k in range(count)]
    worst, failures = 0.0, []
    for k, (I, D, p, C) in enumerate(instances):
        res = solve_allocation(I, D, p, C)
        ref = brute_force_allocation(I, D, p, C)
        err = abs(res.objective - ref) / (1.0 + abs(ref))
        worst = max(worst, err)
        problems = allocation_certificate_errors(res, I, D, p, C)
        if err > 1e-9:
            problems.append(f"objective {res.objective} != brute force {ref}")
        if problems:
            failures.append((k, problems))
    anti_greedy = solve_allocation(*instances[0]).objective
    ok = not failures and abs(anti_greedy + 5.0) <= 1e-9
    detail = f"{len(instances)} instances, max rel err {worst:.2e}, anti-greedy g={anti_greedy:g}"
    if failures:
        detail += f", first failure {failures[0]}"
    return CheckResult("transport oracle equivalence", ok, detail, time.perf_counter() - start)


def check_joint_convexity(count: int = 500, seed: int = 1) -> CheckResult:
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = -np.inf
    for _ in range(count):
        m, n = rng.integers(1, 4, size=2)
        C = rng.uniform(0, 4, size=(m, n))
        p = rng.uniform(0, 4)
        z1 = rng.uniform(0, 3, size=m + n)
        z2 = rng.uniform(0, 3, size=m + n)
        g1 = solve_allocation(z1[:m], z1[m:], p, C).objective
        g2 = solve_allocation(z2[:m], z2[m:], p, C).objective
        for lam in (0.0, 0.25, 0.5, 0.75, 1.0):
            z = lam * z1 + (1 - lam) * z2
            excess = solve_allocation(z[:m], z[m:], p, C).objective - (lam * g1 + (1 - lam) * g2)
            worst = max(worst, excess)
    ok = worst <= 1e-9
    return CheckResult("joint convexity of g", ok, f"{count} segments, max excess {worst:.2e}",
                       time.perf_counter() - start)


def random_market(rng: np.random.Generator, m: int, n: int, p_max: float = 2.0):
    C = np.round(rng.uniform(0, p_max, size=(m, n)), 2)
    gamma = np.round(rng.uniform(0, 0.5, size=m), 2)
    market = MarketParams(gamma=gamma, C=C, p_max=p_max, I_max=float(m + n), gamma_max=1.0, a_max=3.0, b_max=1.0)
    spread = rng.uniform(0, 0.3, size=n)
    b = rng.uniform(0.1, 0.6, size=n)
    a = b * p_max + spread + rng.uniform(0.2, 1.5, size=n)
    model = DemandModel(np.minimum(a, 3.0), b, FiniteSupport.symmetric_two_point(spread))
    return market, model


def _midpoint_excess(values: np.ndarray) -> float:
    return float(np.max(values[1:-1] - 0.5 * (values[:-2] + values[2:])))


def check_marginal_convexity(count: int = 20, grid: int = 11, seed: int = 2) -> CheckResult:
    """Realized cost in price, per breakpoint interval, for fixed inventory and noise."""
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = -np.inf
    for _ in range(count):
        m, n = rng.integers(1, 4, size=2)
        market, model = random_market(rng, m, n)
        I = rng.uniform(0, market.I_max / m, size=m)
        noise = model.noise.offsets[rng.integers(len(model.noise.probs))]
        for _, lo, hi in build_intervals(market.C, market.p_max):
            if hi - lo < 1e-9:
                continue
            ps = np.linspace(lo, hi, grid)
            vals = np.array([realized_cost(I, p, model.mean_demand(p) + noise, market) for p in ps])
            worst = max(worst, _midpoint_excess(vals))
    ok = worst <= 1e-7
    return CheckResult("marginal convexity of realized cost in p", ok,
                       f"{count} markets, max midpoint excess {worst:.2e}", time.perf_counter() - start)


def check_W_structure(count: int = 6, grid: int = 11, seed: int = 3) -> CheckResult:
    """Convexity of W within each interval and the default Lipschitz bound."""
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst_convex, worst_lip = -np.inf, 0.0
    for _ in range(count):
        m, n = rng.integers(1, 3, size=2)
        market, model = random_market(rng, m, n)
        L_W = default_lipschitz(market)
        for _, lo, hi in build_intervals(market.C, market.p_max):
            if hi - lo < 1e-9:
                continue
            ps = np.linspace(lo, hi, grid)
            vals = np.array([exact_W(p, model, market)[0] for p in ps])
            worst_convex = max(worst_convex, _midpoint_excess(vals))
            slopes = np.abs(np.diff(vals)) / np.diff(ps)
            worst_lip = max(worst_lip, float(slopes.max()) / L_W)
    ok = worst_convex <= 1e-7 and worst_lip <= 1.0
    detail = f"{count} markets, max midpoint excess {worst_convex:.2e}, max |slope|/L_W {worst_lip:.3f}"
    return CheckResult("piecewise convexity and Lipschitz bound of W", ok, detail, time.perf_counter() - start)


def convex_pwl_min(slopes: np.ndarray, intercepts: np.ndarray, lo: float, hi: float) -> float:
    """Exact minimum over ``[lo, hi]`` of ``max_k (slopes[k] x + intercepts[k])``."""
    xs = [lo, hi]
    for i in range(len(slopes)):
        for j in range(i + 1, len(slopes)):
            if slopes[i] != slopes[j]:
                x = (intercepts[j] - intercepts[i]) / (slopes[i] - slopes[j])
                if lo <= x <= hi:
                    xs.append(x)
    xs = np.array(xs)
    return float(np.max(np.outer(xs, slopes) + intercepts, axis=1).min())


def check_quaternary(count: int = 1000, seed: int = 4) -> CheckResult:
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = -np.inf
    for _ in range(count):
        k = rng.integers(1, 8)
        slopes = rng.normal(0, 3, size=k)
        intercepts = rng.normal(0, 1, size=k)
        f = lambda x: float(np.max(slopes * x + intercepts))
        vals = np.array([f(0.25), f(0.5), f(0.75)])
        # premise: all three values inside [A - Delta, A + Delta]
        A = 0.5 * (vals.max() + vals.min()) + rng.uniform(-0.1, 0.1)
        Delta = max(vals.max() - A, A - vals.min()) + rng.exponential(0.05)
        fmin = convex_pwl_min(slopes, intercepts, 0.0, 1.0)
        worst = max(worst, (vals.max() - fmin) - 4 * Delta)
    ok = worst <= 1e-9
    return CheckResult("quaternary suboptimality", ok, f"{count} functions, max excess over 4*Delta {worst:.2e}",
                       time.perf_counter() - start)


SUITES = (
    check_transport_oracle,
    check_joint_convexity,
    check_marginal_convexity,
    check_W_structure,
    check_quaternary,
)


def run_all() -> list[CheckResult]:
    return [suite() for suite in SUITES]
