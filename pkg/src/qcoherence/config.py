"""Sweep configuration files.

A config is one JSON object; unknown keys anywhere are rejected::

    {
      "n_qubits": 3,
      "sampler": {"kind": "targeted", "m": 1, "k": 0.6},
      "samples": 1000,
      "alphas": [1, 2],
      "betas": [1],
      "seed": 7,
      "output_path": "sweep.csv",
      "check_chain": false,
      "condition_form": "proof",
      "tolerances": {"tol_ineq": 1e-9, "tol_phys": 1e-9}
    }

``sampler.n_qubits`` and ``sampler.seed`` default to the top-level values;
if given they must match ``n_qubits`` / override the master seed.
``condition_form`` selects the dominated-side condition (see
:mod:`qcoherence.bounds`); it also steers the ``targeted`` sampler.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .bounds import TOL_INEQ
from .errors import CoherenceError
from .qmatrix import TOL_PHYS
from .sampling import SamplerSpec

U64_MAX = 2**64 - 1


class ConfigError(CoherenceError, ValueError):
    """Config file is malformed or violates the schema."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class SamplerConfig(_Strict):
    kind: Literal["haar_pure", "ginibre_mixed", "product_pure", "targeted"]
    n_qubits: Optional[int] = Field(default=None, ge=2)
    seed: Optional[int] = Field(default=None, ge=0, le=U64_MAX)
    rank: Optional[int] = Field(default=None, ge=1)
    m: Optional[int] = Field(default=None, ge=1)
    k: Optional[float] = Field(default=None, gt=0, le=1)


class Tolerances(_Strict):
    tol_ineq: float = Field(default=TOL_INEQ, ge=0)
    tol_phys: float = Field(default=TOL_PHYS, ge=0)


class ExperimentConfig(_Strict):
    n_qubits: int = Field(ge=3)
    sampler: SamplerConfig
    samples: int = Field(ge=1)
    alphas: list[float] = Field(min_length=1)
    betas: list[float] = Field(default=[1.0], min_length=1)
    seed: int = Field(default=0, ge=0, le=U64_MAX)
    output_path: Optional[str] = None
    check_chain: bool = False
    condition_form: Literal["proof", "stated"] = "proof"
    tolerances: Tolerances = Tolerances()

    @model_validator(mode="after")
    def _consistent(self):
        for name in ("alphas", "betas"):
            if any(not v >= 1 for v in getattr(self, name)):
                raise ValueError(f"{name} entries must be >= 1")
        if self.sampler.n_qubits is not None and self.sampler.n_qubits != self.n_qubits:
            raise ValueError("sampler.n_qubits disagrees with n_qubits")
        if self.sampler.m is not None and self.sampler.m > self.n_qubits - 2:
            raise ValueError(f"sampler.m must be <= n_qubits - 2 = {self.n_qubits - 2}")
        if self.sampler.rank is not None and self.sampler.rank > 2**self.n_qubits:
            raise ValueError(f"sampler.rank must be <= 2**n_qubits = {2**self.n_qubits}")
        return self

    def sampler_spec(self) -> SamplerSpec:
        s = self.sampler
        return SamplerSpec(
            kind=s.kind,
            n_qubits=self.n_qubits,
            seed=self.seed if s.seed is None else s.seed,
            rank=s.rank,
            m=s.m,
            k=s.k,
            form=self.condition_form,
        )


def parse_config(doc) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(doc)
    except ValidationError as exc:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or '<root>'}: {err['msg']}" for err in exc.errors()
        )
        raise ConfigError(f"invalid config: {problems}") from None


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return parse_config(doc)
