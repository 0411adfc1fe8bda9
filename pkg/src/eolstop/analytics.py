"""Post-solution and closed-form analytics.

Covers the deterministic switching-time cost curve and its discrete
differences in inventory, the first-order-condition order-up-to level, upper
and lower bounds on the best switching time, assumption validation, and the
exact distribution of the optimal stopping time induced by a solved dynamic
policy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.stats import poisson

from . import _backends
from .costs import CostParameters
from .demand import IntensityModel
from .errors import AssumptionViolated, NotFound, PolicyIncompatible
from .kernels import PMF_TAIL_EPS, constant_A
from .solver import CONTINUE, ORDER, STOP, PolicyTable, StopMode

DEFAULT_TAU_STEP = 0.01
_GL_ORDER = 32


@dataclass(frozen=True)
class AssumptionReport:
    """Validation of the standing assumptions behind the switching analytics."""

    c3_non_increasing: bool
    c2_tilde_non_increasing: bool
    c3_non_negative: bool
    c2_tilde_non_negative: bool
    c4_non_negative: bool
    holding_net_of_scrap_non_negative: bool  # c1 - delta*c4 >= 0
    lambda_non_increasing: bool
    order_scrap_consistent: bool  # c_bar > -c4
    c2_dominates_c3: bool
    failures: tuple = ()

    @property
    def non_inc(self) -> bool:
        return self.c3_non_increasing and self.c2_tilde_non_increasing

    @property
    def pos(self) -> bool:
        return (
            self.c3_non_negative
            and self.c2_tilde_non_negative
            and self.c4_non_negative
            and self.holding_net_of_scrap_non_negative
        )

    @property
    def ok(self) -> bool:
        return self.non_inc and self.pos


def validate_assumptions(params: CostParameters, model: IntensityModel) -> AssumptionReport:
    checks = {
        "c3_non_increasing": params.gamma >= 0 or params.c3_bar == 0,
        "c2_tilde_non_increasing": True,  # constant premium under the exponential family
        "c3_non_negative": params.c3_bar >= 0,
        "c2_tilde_non_negative": params.c2_bar >= 0,
        "c4_non_negative": params.c4 >= 0,
        "holding_net_of_scrap_non_negative": params.c1 - params.delta * params.c4 >= 0,
        "lambda_non_increasing": bool(np.all(np.diff(model.rates) <= 1e-12)),
        "order_scrap_consistent": params.c_bar > -params.c4,
        "c2_dominates_c3": params.c2_bar >= 0,
    }
    failures = tuple(name for name, ok in checks.items() if not ok)
    return AssumptionReport(**checks, failures=failures)


def _require_assumptions(params, model, need_lambda_mono=False):
    rep = validate_assumptions(params, model)
    if not rep.ok:
        raise AssumptionViolated(f"POS/NON-INC violated: {', '.join(rep.failures)}")
    if need_lambda_mono and not rep.lambda_non_increasing:
        raise AssumptionViolated("lambda must be non-increasing for the lower bound")
    return rep


# ---------------------------------------------------------------------------
# switching-time cost curve
# ---------------------------------------------------------------------------

def _gl_nodes(model: IntensityModel, tau: float, order: int):
    """Gauss-Legendre nodes/weights over [0, tau], composite per unit interval."""
    base_x, base_w = leggauss(order)
    nodes, weights, lams = [], [], []
    lo = 0.0
    while lo < tau - 1e-15:
        hi = min(math.floor(lo) + 1.0, tau)
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        u = mid + half * base_x
        nodes.append(u)
        weights.append(half * base_w)
        lams.append(np.full(order, model.rates[int(lo)]))
        lo = hi
    if not nodes:
        return np.empty(0), np.empty(0), np.empty(0)
    return np.concatenate(nodes), np.concatenate(weights), np.concatenate(lams)


def _expected_surplus(x: int, mu) -> np.ndarray:
    """E[(x - N)^+] for Poisson(mu): x*F(x-1) - mu*F(x-2)."""
    mu = np.asarray(mu, dtype=float)
    if x <= 0:
        return np.zeros_like(mu)
    return x * poisson.cdf(x - 1, mu) - mu * poisson.cdf(x - 2, mu)


def switch_cost(params: CostParameters, model: IntensityModel, x: int, tau: float,
                order: int = _GL_ORDER) -> float:
    """Total discounted cost of operating without orders until the committed
    switch epoch tau, then scrapping and outsourcing the remainder."""
    _require_assumptions(params, model)
    if not 0 <= tau <= model.horizon:
        raise ValueError(f"tau must lie in [0, {model.horizon}]")
    u, w, lam = _gl_nodes(model, tau, order)
    A = constant_A(params, model)
    if len(u) == 0:
        return params.c4 * x + A
    mu = model.mean_value(u)
    disc = np.exp(-params.delta * u)
    c2u = params.c2_bar + params.c3_bar * np.exp(-params.gamma * u)
    i1 = np.sum(w * disc * lam * (-params.c4 - c2u) * poisson.cdf(x - 1, mu))
    i2 = params.c2_bar * np.sum(w * disc * lam)
    i3 = np.sum(w * disc * _expected_surplus(x, mu))
    return params.c4 * x + i1 + i2 + (params.c1 - params.delta * params.c4) * i3 + A


def delta_x_switch_cost(params: CostParameters, model: IntensityModel, x: int, tau: float,
                        order: int = _GL_ORDER) -> float:
    """First difference in inventory of the switch-cost curve, closed form."""
    _require_assumptions(params, model)
    u, w, lam = _gl_nodes(model, tau, order)
    if len(u) == 0:
        return params.c4
    mu = model.mean_value(u)
    disc = np.exp(-params.delta * u)
    c2u = params.c2_bar + params.c3_bar * np.exp(-params.gamma * u)
    i1 = np.sum(w * disc * lam * (-params.c4 - c2u) * poisson.pmf(x, mu))
    i2 = np.sum(w * disc * poisson.cdf(x, mu))
    return params.c4 + i1 + (params.c1 - params.delta * params.c4) * i2


def delta2_x_switch_cost(params: CostParameters, model: IntensityModel, x: int, tau: float,
                         order: int = _GL_ORDER, c2_jumps=()) -> float:
    """Second difference Delta^2 C(x, tau) = Delta C(x+1, tau) - Delta C(x, tau).

    ``c2_jumps`` lists (location, drop) pairs for a piecewise lost-sales cost;
    it is empty for the smooth exponential family used throughout.
    """
    _require_assumptions(params, model)
    j = x + 1  # the closed form indexes the Poisson terms one level up
    mu_tau = float(model.mean_value(tau))
    c2_tau = params.c2_bar + params.c3_bar * math.exp(-params.gamma * tau)
    out = math.exp(-params.delta * tau) * (c2_tau + params.c4) * poisson.pmf(j, mu_tau)
    u, w, _ = _gl_nodes(model, tau, order)
    if len(u):
        mu = model.mean_value(u)
        disc = np.exp(-params.delta * u)
        c2u = params.c2_bar + params.c3_bar * np.exp(-params.gamma * u)
        c2p = -params.gamma * params.c3_bar * np.exp(-params.gamma * u)
        out += np.sum(w * disc * (params.c1 - c2p + params.delta * c2u) * poisson.pmf(j, mu))
    for loc, drop in c2_jumps:
        if loc <= tau:
            out -= math.exp(-params.delta * loc) * drop * poisson.pmf(j, model.mean_value(loc))
    return float(out)


@dataclass(frozen=True, eq=False)
class SwitchCostCurve:
    x: int
    tau_grid: np.ndarray
    values: np.ndarray
    delta_x: np.ndarray
    delta2_x: np.ndarray


def switch_cost_curve(params: CostParameters, model: IntensityModel, x: int,
                      step: float = DEFAULT_TAU_STEP) -> SwitchCostCurve:
    """Evaluate the switch-cost curve and its inventory differences on a
    uniform tau grid via cumulative per-step quadrature."""
    _require_assumptions(params, model)
    T = model.horizon
    n = int(round(T / step))
    grid = np.linspace(0.0, T, n + 1)
    base_x, base_w = leggauss(5)
    mid = 0.5 * (grid[:-1] + grid[1:])
    half = 0.5 * step
    u = (mid[:, None] + half * base_x[None, :]).ravel()
    w = np.tile(half * base_w, n)
    lam = model.rates[np.minimum(u.astype(int), T - 1)]
    mu = model.mean_value(u)
    disc = np.exp(-params.delta * u)
    c2u = params.c2_bar + params.c3_bar * np.exp(-params.gamma * u)
    c2p = -params.gamma * params.c3_bar * np.exp(-params.gamma * u)
    A = constant_A(params, model)

    def cum(integrand):
        steps = (integrand * w).reshape(n, -1).sum(axis=1)
        return np.concatenate(([0.0], np.cumsum(steps)))

    vals = (
        params.c4 * x
        + cum(disc * lam * (-params.c4 - c2u) * poisson.cdf(x - 1, mu))
        + params.c2_bar * cum(disc * lam)
        + (params.c1 - params.delta * params.c4) * cum(disc * _expected_surplus(x, mu))
        + A
    )
    d1 = (
        params.c4
        + cum(disc * lam * (-params.c4 - c2u) * poisson.pmf(x, mu))
        + (params.c1 - params.delta * params.c4) * cum(disc * poisson.cdf(x, mu))
    )
    mu_g = model.mean_value(grid)
    c2_g = params.c2_bar + params.c3_bar * np.exp(-params.gamma * grid)
    d2 = (
        np.exp(-params.delta * grid) * (c2_g + params.c4) * poisson.pmf(x + 1, mu_g)
        + cum(disc * (params.c1 - c2p + params.delta * c2u) * poisson.pmf(x + 1, mu))
    )
    return SwitchCostCurve(x=x, tau_grid=grid, values=vals, delta_x=d1, delta2_x=d2)


def order_up_to_of_tau(params: CostParameters, model: IntensityModel, tau: float,
                       x_cap: int = 1200) -> int:
    """Smallest x with c_bar + Delta_x C(x, tau) >= 0 (the first-order condition)."""
    _require_assumptions(params, model)
    for x in range(x_cap + 1):
        if params.c_bar + delta_x_switch_cost(params, model, x, tau) >= 0:
            return x
    raise NotFound(f"first-order condition unmet for every x <= {x_cap}")


@dataclass(frozen=True)
class SwitchBounds:
    lb: float
    ub: float


def switch_time_bounds(params: CostParameters, model: IntensityModel, x: int,
                       step: float = DEFAULT_TAU_STEP) -> SwitchBounds:
    """Grid versions of the analytical bounds on the best switching time.

    ub: smallest grid tau where the premium at the horizon already dominates
    the weighted stop-side term; T when never satisfied.  lb: largest grid tau
    with lambda(tau) >= 1 where the stop-side term still dominates the linear
    holding bound; 0 when never satisfied.
    """
    rep = _require_assumptions(params, model, need_lambda_mono=True)
    T = model.horizon
    grid = np.round(np.arange(0.0, T + step / 2, step), 12)
    grid = grid[grid <= T]
    mu = model.mean_value(grid)
    c2g = params.c2_bar + params.c3_bar * np.exp(-params.gamma * grid)
    stop_side = poisson.cdf(x - 1, mu) * (c2g + params.c4)
    ct_T = params.c2_tilde()

    ub_hits = np.flatnonzero(ct_T >= stop_side)
    ub = float(grid[ub_hits[0]]) if len(ub_hits) else float(T)

    lam_g = model.rates[np.minimum(grid.astype(int), T - 1)]
    rhs = x * (params.c1 - params.delta * params.c4) + params.c2_tilde()
    lb_hits = np.flatnonzero((lam_g >= 1.0) & (stop_side >= rhs))
    lb = float(grid[lb_hits[-1]]) if len(lb_hits) else 0.0
    return SwitchBounds(lb=lb, ub=ub)


def brute_force_switch_argmin(params: CostParameters, model: IntensityModel, x: int,
                              step: float = DEFAULT_TAU_STEP):
    """Grid argmin of the switch-cost curve; the oracle the bounds sandwich."""
    curve = switch_cost_curve(params, model, x, step=step)
    i = int(np.argmin(curve.values))
    return float(curve.tau_grid[i]), float(curve.values[i])


# ---------------------------------------------------------------------------
# stopping-time distribution
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class StoppingTimeDistribution:
    """P{tau* = m} for m = 0..T under a solved dynamic policy."""

    mass: np.ndarray
    x0: int

    def mean(self) -> float:
        return float(np.dot(np.arange(len(self.mass)), self.mass))


def _period_pmfs(model: IntensityModel):
    pmfs, tails = [], []
    for lam in model.rates:
        n = int(poisson.ppf(1.0 - PMF_TAIL_EPS, lam)) + 1 if lam > 0 else 0
        grid = np.arange(n + 1)
        pmfs.append(poisson.pmf(grid, lam))
        tails.append(np.maximum(poisson.sf(grid, lam), 0.0))
    return pmfs, tails


def stopping_time_distribution(policy: PolicyTable, model: IntensityModel, x0: int,
                               backend: str | None = None) -> StoppingTimeDistribution:
    """Exact stopping-time law by one backward pass per target epoch.

    The recursion propagates, per post-action state, the probability that the
    first entry into the stopping region happens exactly at the target epoch;
    ordering states hand off to the entered order-up-to level one budget layer
    down.
    """
    if policy.spec.stop_mode is not StopMode.DYNAMIC:
        raise PolicyIncompatible("stopping-time distribution needs a dynamic-stop policy")
    if not 0 <= x0 <= policy.x_max:
        raise ValueError(f"x0 must lie in 0..{policy.x_max}")
    T, X, Z = policy.horizon, policy.x_max, policy.action.shape[2]
    pmfs, tails = _period_pmfs(model)
    mass = np.zeros(T + 1)

    a0 = policy.action[0, x0, policy.z0]
    if a0 == STOP:
        mass[0] = 1.0
        return StoppingTimeDistribution(mass=mass, x0=x0)

    for m in range(1, T + 1):
        h = np.zeros((X + 1, Z))
        for z in range(Z):
            h[policy.action[m, :, z] == STOP, z] = 1.0
        for t in range(m - 1, 0, -1):
            P = np.empty((X + 1, Z))
            for z in range(Z):
                P[:, z] = _backends.ev_clamped(h[:, z], pmfs[t], tails[t], backend)
            h = np.zeros((X + 1, Z))
            for z in range(Z):
                act = policy.action[t, :, z]
                cont = act == CONTINUE
                h[cont, z] = P[cont, z]
                orde = np.flatnonzero(act == ORDER)
                if len(orde):
                    src = z if policy.spec.order_budget is None else z - 1
                    h[orde, z] = P[policy.target[t, orde, z], src]
        P0 = np.empty((X + 1, Z))
        for z in range(Z):
            P0[:, z] = _backends.ev_clamped(h[:, z], pmfs[0], tails[0], backend)
        if a0 == ORDER:
            src = policy.z0 if policy.spec.order_budget is None else policy.z0 - 1
            mass[m] = P0[policy.target[0, x0, policy.z0], src]
        else:
            mass[m] = P0[x0, policy.z0]
    return StoppingTimeDistribution(mass=mass, x0=x0)
