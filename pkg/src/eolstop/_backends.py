"""Numba-accelerated inner loops with pure-numpy fallbacks.

Backend selection: set EOLSTOP_BACKEND to "numba" or "numpy"; unset, numba is
used when importable.  Both implementations consume identical presampled
inputs, so they agree to floating-point accumulation order.

Hot paths covered here:
  * clamped one-period expectation  EV[y] = E[V((y - D)^+)]
  * suffix minimum with smallest-index argmin (order-up-to search)
  * per-period simulation sweep across all Monte Carlo paths
"""

from __future__ import annotations

import math
import os

import numpy as np

try:  # pragma: no cover - exercised indirectly via backend dispatch
    import numba

    _HAS_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    _HAS_NUMBA = False


def active_backend() -> str:
    name = os.environ.get("EOLSTOP_BACKEND", "").strip().lower()
    if name == "numpy":
        return "numpy"
    if name == "numba":
        if not _HAS_NUMBA:
            raise RuntimeError("EOLSTOP_BACKEND=numba but numba is not importable")
        return "numba"
    if name:
        raise ValueError(f"unknown EOLSTOP_BACKEND={name!r}")
    return "numba" if _HAS_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------

def _ev_clamped_np(V, pmf, tail):
    # tail[j] = 1 - sum_{n<=j} pmf[n]; demand beyond y (and truncated residual
    # mass) lands on inventory 0.
    n = len(V)
    s = len(pmf) - 1
    ev = np.convolve(V, pmf)[:n]
    idx = np.minimum(np.arange(n), s)
    return ev + V[0] * tail[idx]


def _suffix_min_np(W):
    n = len(W)
    rev = W[::-1]
    run = np.minimum.accumulate(rev)
    prev = np.concatenate(([np.inf], run[:-1]))
    upd = rev <= prev  # ties update, so the scan prefers smaller y
    pos = np.where(upd, np.arange(n), 0)
    last = np.maximum.accumulate(pos)
    args = (n - 1) - last
    return run[::-1].copy(), args[::-1].copy()


def _sim_period_np(stock, stopped, cost, u, counts, k, c1, c2b, c3b, gamma, delta):
    """Advance all paths through [k, k+1); mutates stock and cost in place.

    u is (paths, nmax) with row p holding counts[p] sorted arrival times and
    k+1 in the padding slots.
    """
    P, nmax = u.shape
    j = np.arange(nmax)
    real = j[None, :] < counts[:, None]
    disc_u = np.exp(-delta * u)
    c2_u = c2b + c3b * np.exp(-gamma * u)
    c3_u = c3b * np.exp(-gamma * u)

    stopped_paths = stopped & (counts > 0)
    if stopped_paths.any():
        cost[stopped_paths] += np.sum(
            np.where(real[stopped_paths], disc_u[stopped_paths] * c3_u[stopped_paths], 0.0),
            axis=1,
        )

    act = ~stopped
    if not act.any():
        return
    y = stock[act]
    ua = u[act]
    na = counts[act]
    # event grid k = e_0 < arrivals < e_{nmax+1} = k+1; padding collapses to
    # zero-length segments at k+1
    events = np.concatenate(
        (np.full((ua.shape[0], 1), float(k)), ua, np.full((ua.shape[0], 1), k + 1.0)), axis=1
    )
    if delta > 0:
        d = np.exp(-delta * events)
        seg = (d[:, :-1] - d[:, 1:]) / delta
    else:
        seg = events[:, 1:] - events[:, :-1]
    lvl = np.maximum(y[:, None] - np.arange(nmax + 1)[None, :], 0)  # stock during segment j
    cost[act] += c1 * np.sum(lvl * seg, axis=1)

    lost = (j[None, :] >= y[:, None]) & (j[None, :] < na[:, None])
    cost[act] += np.sum(np.where(lost, disc_u[act] * c2_u[act], 0.0), axis=1)
    stock[act] = np.maximum(y - na, 0)


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if _HAS_NUMBA:

    @numba.njit(cache=True)
    def _ev_clamped_nb(V, pmf, tail):
        n = len(V)
        s = len(pmf) - 1
        out = np.empty(n)
        for y in range(n):
            m = min(y, s)
            acc = V[0] * tail[m]
            for d in range(m + 1):
                acc += pmf[d] * V[y - d]
            out[y] = acc
        return out

    @numba.njit(cache=True)
    def _suffix_min_nb(W):
        n = len(W)
        vals = np.empty(n)
        args = np.empty(n, dtype=np.int64)
        best = np.inf
        barg = n - 1
        for y in range(n - 1, -1, -1):
            if W[y] <= best:
                best = W[y]
                barg = y
            vals[y] = best
            args[y] = barg
        return vals, args

    @numba.njit(cache=True)
    def _sim_period_nb(stock, stopped, cost, u, counts, k, c1, c2b, c3b, gamma, delta):
        P = stock.shape[0]
        for p in range(P):
            n = counts[p]
            if stopped[p]:
                for j in range(n):
                    uj = u[p, j]
                    cost[p] += math.exp(-delta * uj) * c3b * math.exp(-gamma * uj)
                continue
            s = stock[p]
            t_prev = float(k)
            acc = 0.0
            for j in range(n):
                uj = u[p, j]
                if s > 0:
                    if delta > 0:
                        acc += s * (math.exp(-delta * t_prev) - math.exp(-delta * uj)) / delta
                    else:
                        acc += s * (uj - t_prev)
                    s -= 1
                else:
                    cost[p] += math.exp(-delta * uj) * (c2b + c3b * math.exp(-gamma * uj))
                t_prev = uj
            if s > 0:
                if delta > 0:
                    acc += s * (math.exp(-delta * t_prev) - math.exp(-delta * (k + 1.0))) / delta
                else:
                    acc += s * (k + 1.0 - t_prev)
            cost[p] += c1 * acc
            stock[p] = s


_IMPLS = {
    "numpy": {
        "ev_clamped": _ev_clamped_np,
        "suffix_min": _suffix_min_np,
        "sim_period": _sim_period_np,
    },
}
if _HAS_NUMBA:
    _IMPLS["numba"] = {
        "ev_clamped": _ev_clamped_nb,
        "suffix_min": _suffix_min_nb,
        "sim_period": _sim_period_nb,
    }


def get_impl(name: str | None = None):
    return _IMPLS[name or active_backend()]


def ev_clamped(V, pmf, tail, backend: str | None = None):
    return get_impl(backend)["ev_clamped"](V, pmf, tail)


def suffix_min(W, backend: str | None = None):
    return get_impl(backend)["suffix_min"](W)


def sim_period(stock, stopped, cost, u, counts, k, c1, c2b, c3b, gamma, delta,
               backend: str | None = None):
    return get_impl(backend)["sim_period"](
        stock, stopped, cost, u, counts, k, c1, c2b, c3b, gamma, delta
    )
