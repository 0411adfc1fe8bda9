"""Backward-induction solvers for the ordering/stopping flexibility taxonomy.

A model is addressed as ``a/b/c``:

  a - when inventory holding may stop: D dynamically at any review epoch,
      S at a single switch epoch committed at time zero, T never before T;
  b - order budget: a positive integer or ``inf``;
  c - first-order timing: Z only at time zero, F free.

The recursion runs in reformulated units: the stopping cost is just the
scrap term ``c4*x`` and the policy-independent outside-source constant A is
added back at the end.  ``solve_original_form`` runs the same engine on the
raw kernels (stopping cost with its integral tail) to verify the
reformulation identity V = V_tilde + A.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import _backends
from .errors import BudgetMisuse, CapSaturated
from .kernels import KernelTable

CONTINUE, STOP, ORDER = 0, 1, 2


class StopMode(enum.Enum):
    DYNAMIC = "D"
    STATIC = "S"
    NEVER = "T"


class FirstOrder(enum.Enum):
    ZERO_ONLY = "Z"
    FREE = "F"


@dataclass(frozen=True)
class ModelSpec:
    """Taxonomy coordinate; ``order_budget=None`` means unlimited."""

    stop_mode: StopMode
    order_budget: int | None
    first_order: FirstOrder

    def __post_init__(self):
        if self.order_budget is not None and self.order_budget < 1:
            raise BudgetMisuse("finite order budget must be >= 1")
        if self.order_budget is None and self.first_order is FirstOrder.ZERO_ONLY:
            raise BudgetMisuse("unlimited orders with zero-only timing is not in the taxonomy")

    @classmethod
    def parse(cls, label: str) -> "ModelSpec":
        parts = label.strip().split("/")
        if len(parts) != 3:
            raise BudgetMisuse(f"model label must look like D/inf/F, got {label!r}")
        a, b, c = parts
        try:
            stop = StopMode(a.upper())
            first = FirstOrder(c.upper())
        except ValueError:
            raise BudgetMisuse(f"unknown taxonomy coordinate in {label!r}") from None
        if b.lower() in ("inf", "infinity", "unlimited", "∞"):
            budget = None
        else:
            try:
                budget = int(b)
            except ValueError:
                raise BudgetMisuse(f"order budget must be an integer or 'inf', got {b!r}") from None
        return cls(stop, budget, first)

    @property
    def label(self) -> str:
        b = "inf" if self.order_budget is None else str(self.order_budget)
        return f"{self.stop_mode.value}/{b}/{self.first_order.value}"

    @property
    def layers(self) -> int:
        return 1 if self.order_budget is None else self.order_budget + 1


@dataclass(frozen=True, eq=False)
class PolicyTable:
    """Optimal action per (epoch, inventory, remaining-budget layer)."""

    spec: ModelSpec
    x_max: int
    horizon: int
    action: np.ndarray  # (T+1, X+1, Z) int8
    target: np.ndarray  # (T+1, X+1, Z) int32; order-up-to level, -1 elsewhere
    z0: int
    switch_epoch: int | None = None  # STATIC models: the committed stop epoch


@dataclass(frozen=True, eq=False)
class ValueGrid:
    """Reformulated values plus the pieces the action comparison used."""

    V: np.ndarray  # (T+1, X+1, Z)
    G: np.ndarray  # (T, X+1, Z) continuation cost
    J_order: np.ndarray  # (T, X+1, Z) best strictly-positive order, +inf if none
    A: float


@dataclass(frozen=True, eq=False)
class SolveResult:
    spec: ModelSpec
    value_grid: ValueGrid
    policy: PolicyTable
    total_cost: float

    @property
    def values_at_zero(self) -> np.ndarray:
        """V(0, x) + A for every starting inventory (the policy's own layer).

        For STATIC specs these are the values of the switch epoch chosen for
        the requested x0; use ``static_switch_values`` for per-x optima.
        """
        return self.value_grid.V[0, :, self.policy.z0] + self.value_grid.A


def _order_admissible(spec: ModelSpec, t: int, z: int) -> bool:
    if spec.order_budget is not None and z == 0:
        return False
    if spec.first_order is FirstOrder.ZERO_ONLY and t > 0:
        return False
    return True


def _backward_pass(
    spec: ModelSpec,
    kernels: KernelTable,
    cost: np.ndarray,
    stop_tail: np.ndarray,
    *,
    stop_at,
    start_epoch: int,
    keep_grids: bool,
    backend: str | None,
):
    """Run the recursion from ``start_epoch`` down to 0.

    ``stop_at(t)`` says whether stopping is admissible at epoch t < start;
    the pass is seeded with a forced stop at ``start_epoch``.
    """
    p = kernels.params
    T, X, Z = kernels.horizon, kernels.x_max, spec.layers
    y = np.arange(X + 1, dtype=np.float64)
    scrap = p.c4 * y
    disc = np.exp(-p.delta)

    V = np.empty((start_epoch + 1, X + 1, Z)) if keep_grids else None
    G_all = np.empty((start_epoch, X + 1, Z)) if keep_grids else None
    J_all = np.empty((start_epoch, X + 1, Z)) if keep_grids else None
    action = np.full((T + 1, X + 1, Z), STOP, dtype=np.int8)
    target = np.full((T + 1, X + 1, Z), -1, dtype=np.int32)

    Vnext = np.tile((scrap + stop_tail[start_epoch])[:, None], (1, Z))
    if keep_grids:
        V[start_epoch] = Vnext

    for t in range(start_epoch - 1, -1, -1):
        pmf, tail = kernels.pmfs[t], kernels.pmf_tails[t]
        stop_vec = scrap + stop_tail[t]
        G = np.empty((X + 1, Z))
        for z in range(Z):
            G[:, z] = cost[t] + disc * _backends.ev_clamped(Vnext[:, z], pmf, tail, backend)
        Vt = np.empty((X + 1, Z))
        for z in range(Z):
            src = z if spec.order_budget is None else z - 1
            if _order_admissible(spec, t, z):
                w = p.c_bar * y + G[:, src]
                mins, args = _backends.suffix_min(w, backend)
                J_ord = np.full(X + 1, np.inf)
                J_ord[:-1] = p.K + mins[1:] - p.c_bar * y[:-1]
                tgt = args[1:]
            else:
                J_ord = np.full(X + 1, np.inf)
                tgt = None
            ordering = J_ord < G[:, z]  # strict: order only when it beats doing nothing
            val = np.where(ordering, J_ord, G[:, z])
            act = np.where(ordering, ORDER, CONTINUE).astype(np.int8)
            if stop_at(t):
                stopping = stop_vec <= val  # ties stop
                val = np.where(stopping, stop_vec, val)
                act = np.where(stopping, STOP, act)
            Vt[:, z] = val
            action[t, :, z] = act
            if tgt is not None:
                chosen = act == ORDER
                target[t, :-1, z][chosen[:-1]] = tgt[chosen[:-1]]
                if np.any(target[t, :, z][chosen] >= kernels.x_max):
                    raise CapSaturated(
                        f"order-up-to reached x_max={kernels.x_max} at epoch {t}; raise the cap"
                    )
            if keep_grids:
                G_all[t, :, z] = G[:, z]
                J_all[t, :, z] = J_ord
        Vnext = Vt
        if keep_grids:
            V[t] = Vt

    return Vnext, V, G_all, J_all, action, target


def _assemble(spec, kernels, stop_tail, add_A, *, stop_at, start_epoch, x0, backend,
              switch_epoch=None, cost=None):
    cost = kernels.C_tilde if cost is None else cost
    V0, V, G, J, action, target = _backward_pass(
        spec, kernels, cost, stop_tail,
        stop_at=stop_at, start_epoch=start_epoch, keep_grids=True, backend=backend,
    )
    T, X, Z = kernels.horizon, kernels.x_max, spec.layers
    if start_epoch < T:  # forced switch before the end: pad value grid shape
        Vfull = np.empty((T + 1, X + 1, Z))
        Vfull[: start_epoch + 1] = V
        scrap = kernels.params.c4 * np.arange(X + 1, dtype=np.float64)
        for t in range(start_epoch + 1, T + 1):
            Vfull[t] = np.tile((scrap + stop_tail[t])[:, None], (1, Z))
        Gfull = np.full((T, X + 1, Z), np.nan)
        Gfull[:start_epoch] = G
        Jfull = np.full((T, X + 1, Z), np.inf)
        Jfull[:start_epoch] = J
        V, G, J = Vfull, Gfull, Jfull
    A = kernels.A if add_A else 0.0
    z0 = 0 if spec.order_budget is None else spec.order_budget
    grid = ValueGrid(V=V, G=G, J_order=J, A=A)
    policy = PolicyTable(
        spec=spec, x_max=X, horizon=T, action=action, target=target,
        z0=z0, switch_epoch=switch_epoch,
    )
    total = float(V[0, x0, z0] + A)
    return SolveResult(spec=spec, value_grid=grid, policy=policy, total_cost=total)


def _solve_with(spec, kernels, x0, *, stop_tail, add_A, backend, cost=None):
    T = kernels.horizon
    if not 0 <= x0 <= kernels.x_max:
        raise ValueError(f"x0 must lie in 0..{kernels.x_max}")

    if spec.stop_mode is StopMode.DYNAMIC:
        return _assemble(spec, kernels, stop_tail, add_A, stop_at=lambda t: True,
                         start_epoch=T, x0=x0, backend=backend, cost=cost)
    if spec.stop_mode is StopMode.NEVER:
        return _assemble(spec, kernels, stop_tail, add_A, stop_at=lambda t: False,
                         start_epoch=T, x0=x0, backend=backend, cost=cost)

    # STATIC: sweep the committed switch epoch, keep the best for x0
    best_val, best_k = np.inf, T
    use_cost = kernels.C_tilde if cost is None else cost
    for k_star in range(T + 1):
        V0, *_ = _backward_pass(
            spec, kernels, use_cost, stop_tail,
            stop_at=lambda t: False, start_epoch=k_star, keep_grids=False, backend=backend,
        )
        z0 = 0 if spec.order_budget is None else spec.order_budget
        if V0[x0, z0] < best_val:
            best_val, best_k = float(V0[x0, z0]), k_star
    return _assemble(spec, kernels, stop_tail, add_A, stop_at=lambda t: False,
                     start_epoch=best_k, x0=x0, backend=backend,
                     switch_epoch=best_k, cost=cost)


def solve(spec: ModelSpec, kernels: KernelTable, x0: int,
          backend: str | None = None) -> SolveResult:
    """Solve the requested taxonomy model; total cost is V_tilde(0, x0) + A."""
    zero_tail = np.zeros(kernels.horizon + 1)
    return _solve_with(spec, kernels, x0, stop_tail=zero_tail, add_A=True, backend=backend)


def solve_original_form(spec: ModelSpec, kernels: KernelTable, x0: int,
                        backend: str | None = None) -> float:
    """Un-reformulated recursion: one-period cost C and stopping cost with its
    outside-source integral.  Intended for small instances and equivalence
    tests against ``solve``."""
    res = _solve_with(
        spec, kernels, x0,
        stop_tail=kernels.stop_tail, add_A=False, backend=backend, cost=kernels.C,
    )
    return res.total_cost


def static_switch_values(spec: ModelSpec, kernels: KernelTable,
                         backend: str | None = None) -> tuple[np.ndarray, np.ndarray]:
    """For STATIC models: per starting inventory, the best committed switch
    epoch and its total cost (V + A)."""
    if spec.stop_mode is not StopMode.STATIC:
        raise BudgetMisuse("static_switch_values requires a STATIC spec")
    T, X = kernels.horizon, kernels.x_max
    zero_tail = np.zeros(T + 1)
    z0 = 0 if spec.order_budget is None else spec.order_budget
    best = np.full(X + 1, np.inf)
    best_k = np.zeros(X + 1, dtype=np.int64)
    for k_star in range(T + 1):
        V0, *_ = _backward_pass(
            spec, kernels, kernels.C_tilde, zero_tail,
            stop_at=lambda t: False, start_epoch=k_star, keep_grids=False, backend=backend,
        )
        better = V0[:, z0] < best
        best[better] = V0[better, z0]
        best_k[better] = k_star
    return best + kernels.A, best_k


def extract_regions(policy: PolicyTable, t: int, z: int | None = None):
    """Disjoint (stop, order, continue) inventory sets at epoch t."""
    if not 0 <= t <= policy.horizon:
        raise ValueError(f"t must lie in 0..{policy.horizon}")
    z = policy.z0 if z is None else z
    act = policy.action[t, :, z]
    stop = np.flatnonzero(act == STOP)
    order = np.flatnonzero(act == ORDER)
    cont = np.flatnonzero(act == CONTINUE)
    return stop, order, cont


def order_up_to_profile(policy: PolicyTable, z: int | None = None) -> list[dict[int, int]]:
    """Per epoch, the map x -> order-up-to level on the ordering set."""
    z = policy.z0 if z is None else z
    out = []
    for t in range(policy.horizon + 1):
        xs = np.flatnonzero(policy.action[t, :, z] == ORDER)
        out.append({int(x): int(policy.target[t, x, z]) for x in xs})
    return out
