import numpy as np
import pytest

from eolstop import (
    CostParameters,
    LostSalesConvention,
    build_kernel_table,
    build_named_intensity,
)


def base_params(K=0.0, T=50, **overrides):
    kw = dict(c_bar=100.0, K=K, c1=1.0, c2_bar=200.0, c3_bar=200.0,
              gamma=0.01, c4=25.0, delta=0.005, horizon=T)
    kw.update(overrides)
    return CostParameters(**kw)


@pytest.fixture(scope="session")
def base_model():
    return build_named_intensity("convex", 50, 500.0)


@pytest.fixture(scope="session")
def base_kernels(base_model):
    return build_kernel_table(base_params(), base_model, LostSalesConvention.ARRIVAL, x_max=1200)


@pytest.fixture(scope="session")
def base_kernels_paper(base_model):
    return build_kernel_table(base_params(), base_model, LostSalesConvention.PAPER, x_max=1200)


def small_instance(seed, T_max=10, x_max=50):
    """Random small instance for equivalence and oracle tests."""
    from eolstop import IntensityModel

    rng = np.random.default_rng(seed)
    T = int(rng.integers(2, T_max + 1))
    model = IntensityModel(horizon=T, rates=rng.uniform(0.0, 4.0, size=T))
    params = CostParameters(
        c_bar=float(rng.uniform(50, 150)),
        K=float(rng.choice([0.0, 20.0, 200.0])),
        c1=float(rng.uniform(0.2, 3.0)),
        c2_bar=float(rng.uniform(0, 400)),
        c3_bar=float(rng.uniform(0, 300)),
        gamma=float(rng.choice([0.0, 0.01, 0.05])),
        c4=float(rng.choice([25.0, -25.0, 0.0])),
        delta=float(rng.choice([0.0, 0.005, 0.02])),
        horizon=T,
    )
    x0 = int(rng.integers(0, min(x_max, 12)))
    return params, model, x0, x_max
