"""Experiment configuration: JSON in, validated objects out.

Configs are strict: a ``schema_version`` field is required and unknown keys
are rejected so golden-file runs stay reproducible.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .costs import CostParameters, LostSalesConvention
from .demand import NAMED_KINDS, IntensityModel, build_named_intensity, load_rates_table
from .errors import ConfigError
from .kernels import KernelTable, build_kernel_table
from .solver import ModelSpec

SCHEMA_VERSION = 1

_TOP_KEYS = {
    "schema_version", "intensity", "costs", "setup_costs", "x0", "models",
    "x_max", "convention", "tau_step", "seed", "paths",
}
_INTENSITY_KEYS = {"kind", "horizon", "total_demand", "rates_file", "rates"}
_COST_KEYS = {"c_bar", "c1", "c2_bar", "c3_bar", "gamma", "c4", "delta"}


@dataclass(frozen=True)
class ExperimentConfig:
    intensity: dict
    costs: dict
    setup_costs: tuple
    x0: tuple
    models: tuple
    x_max: int = 1200
    convention: str = "arrival"
    tau_step: float = 0.01
    seed: int = 0
    paths: int = 100_000
    schema_version: int = SCHEMA_VERSION

    # ------------------------------------------------------------------
    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(raw) - _TOP_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if raw.get("schema_version") != SCHEMA_VERSION:
            raise ConfigError(f"schema_version must be {SCHEMA_VERSION}")
        for req in ("intensity", "costs", "setup_costs", "x0", "models"):
            if req not in raw:
                raise ConfigError(f"missing required config key: {req!r}")
        intensity = dict(raw["intensity"])
        if set(intensity) - _INTENSITY_KEYS:
            raise ConfigError(f"unknown intensity keys: {sorted(set(intensity) - _INTENSITY_KEYS)}")
        costs = dict(raw["costs"])
        if set(costs) != _COST_KEYS:
            missing, extra = _COST_KEYS - set(costs), set(costs) - _COST_KEYS
            raise ConfigError(f"costs must have exactly {sorted(_COST_KEYS)}; "
                              f"missing {sorted(missing)}, unknown {sorted(extra)}")
        models = tuple(raw["models"])
        if not models:
            raise ConfigError("models must list at least one taxonomy label")
        cfg = cls(
            intensity=intensity,
            costs=costs,
            setup_costs=tuple(float(k) for k in raw["setup_costs"]),
            x0=tuple(int(x) for x in raw["x0"]),
            models=models,
            x_max=int(raw.get("x_max", 1200)),
            convention=str(raw.get("convention", "arrival")),
            tau_step=float(raw.get("tau_step", 0.01)),
            seed=int(raw.get("seed", 0)),
            paths=int(raw.get("paths", 100_000)),
        )
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(raw)

    @classmethod
    def base_case(cls, **overrides) -> "ExperimentConfig":
        """Convex demand over 50 periods, the reference cost scalars, the
        standard (K, x0) comparison grid."""
        raw = {
            "schema_version": SCHEMA_VERSION,
            "intensity": {"kind": "convex", "horizon": 50, "total_demand": 500.0},
            "costs": {"c_bar": 100.0, "c1": 1.0, "c2_bar": 200.0, "c3_bar": 200.0,
                      "gamma": 0.01, "c4": 25.0, "delta": 0.005},
            "setup_costs": [0.0, 1000.0, 5000.0],
            "x0": [0, 100, 250],
            "models": ["D/inf/F", "D/1/Z"],
        }
        raw.update(overrides)
        return cls.from_dict(raw)

    # ------------------------------------------------------------------
    def validate(self):
        kind = self.intensity.get("kind")
        if kind in NAMED_KINDS:
            for req in ("horizon", "total_demand"):
                if req not in self.intensity:
                    raise ConfigError(f"named intensity needs {req!r}")
        elif kind == "custom":
            if not ("rates_file" in self.intensity or "rates" in self.intensity):
                raise ConfigError("custom intensity needs 'rates_file' or 'rates'")
        else:
            raise ConfigError(f"intensity.kind must be one of {NAMED_KINDS + ('custom',)}")
        if any(k < 0 for k in self.setup_costs):
            raise ConfigError("setup_costs must be non-negative")
        if any(x < 0 for x in self.x0):
            raise ConfigError("x0 values must be non-negative")
        if any(x > self.x_max for x in self.x0):
            raise ConfigError("x0 values must not exceed x_max")
        LostSalesConvention.parse(self.convention)  # raises on bad value
        for label in self.models:
            ModelSpec.parse(label)
        if self.x_max < 1:
            raise ConfigError("x_max must be >= 1")
        if self.tau_step <= 0:
            raise ConfigError("tau_step must be positive")
        if self.paths < 2:
            raise ConfigError("paths must be >= 2")
        try:
            self.build_model()
            self.build_params(self.setup_costs[0])
        except ConfigError:
            raise
        except Exception as exc:
            raise ConfigError(str(exc)) from exc

    # ------------------------------------------------------------------
    def build_model(self) -> IntensityModel:
        kind = self.intensity["kind"]
        if kind == "custom":
            if "rates" in self.intensity:
                import numpy as np

                return IntensityModel(
                    horizon=len(self.intensity["rates"]),
                    rates=np.asarray(self.intensity["rates"], dtype=float),
                    kind="custom",
                )
            return load_rates_table(self.intensity["rates_file"])
        return build_named_intensity(
            kind, int(self.intensity["horizon"]), float(self.intensity["total_demand"])
        )

    def build_params(self, K: float) -> CostParameters:
        return CostParameters(K=float(K), horizon=self.build_model().horizon, **self.costs)

    def build_kernels(self, K: float | None = None) -> KernelTable:
        K = self.setup_costs[0] if K is None else K
        return build_kernel_table(
            self.build_params(K),
            self.build_model(),
            LostSalesConvention.parse(self.convention),
            x_max=self.x_max,
        )

    def parsed_models(self) -> list[ModelSpec]:
        return [ModelSpec.parse(m) for m in self.models]

    # ------------------------------------------------------------------
    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["setup_costs"] = list(self.setup_costs)
        d["x0"] = list(self.x0)
        d["models"] = list(self.models)
        return d

    def digest(self) -> str:
        return hashlib.sha256(
            json.dumps(self.to_dict(), sort_keys=True).encode()
        ).hexdigest()[:16]


def kernels_with_K(kernels: KernelTable, K: float) -> KernelTable:
    """Kernel arrays are K-independent; swap the scalar without rebuilding."""
    if K == kernels.params.K:
        return kernels
    return dataclasses.replace(kernels, params=dataclasses.replace(kernels.params, K=float(K)))
