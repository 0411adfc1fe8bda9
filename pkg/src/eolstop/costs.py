"""Cost parameters and the lost-sales accounting convention."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass


class LostSalesConvention(enum.Enum):
    """Upper index of the satisfied-demand sum in the replacement-cost kernel.

    ARRIVAL: an arrival is satisfied while strictly fewer than x prior
    arrivals occurred (sum to x-1; empty at x=0), the accounting implied by
    the first-passage definition of the depletion time.  PAPER: sum to x,
    matching the printed closed form.  The two differ by one Poisson term per
    state; ARRIVAL is the default because it reproduces the reference
    comparison tables.
    """

    ARRIVAL = "arrival"
    PAPER = "paper"

    @classmethod
    def parse(cls, name: str) -> "LostSalesConvention":
        try:
            return cls(name.lower())
        except ValueError:
            raise ValueError(f"convention must be 'arrival' or 'paper', got {name!r}") from None


@dataclass(frozen=True)
class CostParameters:
    """All cost and discount scalars.

    The outside-source unit cost declines exponentially, c3(u) = c3_bar *
    exp(-gamma*u), and the lost-sales cost is c2(u) = c2_bar + c3(u), so the
    lost-sales premium c2 - c3 is the constant c2_bar.  c4 may be negative
    (salvage revenue), but ordering-to-scrap must stay unprofitable:
    c_bar > -c4.
    """

    c_bar: float
    K: float
    c1: float
    c2_bar: float
    c3_bar: float
    gamma: float
    c4: float
    delta: float
    horizon: int

    def __post_init__(self):
        for name in ("c_bar", "K", "c1", "c2_bar", "c3_bar", "gamma", "delta"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if not self.c_bar > -self.c4:
            raise ValueError("need c_bar > -c4, else ordering-and-scrapping is a money pump")
        if self.horizon < 1:
            raise ValueError("horizon must be a positive integer")

    def c3(self, u):
        return self.c3_bar * math.exp(-self.gamma * u) if isinstance(u, float) else self._c3_arr(u)

    def _c3_arr(self, u):
        import numpy as np

        return self.c3_bar * np.exp(-self.gamma * np.asarray(u, dtype=float))

    def c2(self, u):
        return self.c2_bar + self.c3(u)

    def c2_tilde(self, u=0.0):
        """Lost-sales premium c2 - c3; constant for the exponential family."""
        return self.c2_bar


def order_cost(params: CostParameters, m: int) -> float:
    """Fixed-plus-linear procurement cost; free when nothing is ordered."""
    if m < 0 or m != int(m):
        raise ValueError("order quantity must be a non-negative integer")
    return 0.0 if m == 0 else params.K + params.c_bar * m
