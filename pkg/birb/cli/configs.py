"""
Command Configs
Pydantic models for every JSON input the command line accepts
"""

import json
from pathlib import Path
from typing import Annotated, Any, Dict, List, Literal, Optional, Type, TypeVar, Union

from pydantic import BaseModel, ConfigDict, Field

from birb.analysis.fitting import Convention
from birb.analysis.planner import PlannerInput
from birb.circuits.circuit import GateSetSpec
from birb.core.config import settings
from birb.engines.runner import Engine
from birb.noise.models import (
    MeasurementFamily,
    NoiseFamily,
    NoiseModel,
    measurement_error_family,
    sample_random_model,
)
from birb.sampler.design import ExperimentDesign
from birb.sampler.omega import OmegaSpec
from birb.utils.helpers import derive_rng, open_artifact

ModelT = TypeVar("ModelT", bound=BaseModel)


class MeasurementNoiseSpec(BaseModel):
    kind: MeasurementFamily
    p: float = Field(ge=0.0)


class RandomNoiseSpec(BaseModel):
    """Random model family block: {family, p, seed, measurement}"""

    family: NoiseFamily
    p: float = Field(ge=0.0)
    seed: int = Field(ge=0, lt=2**64)
    measurement: Optional[MeasurementNoiseSpec] = None
    hs_convention: Optional[Literal["split", "literal"]] = None

    def build(self, n: int, gate_set: GateSetSpec) -> NoiseModel:
        noise = sample_random_model(
            self.family, n, self.p, gate_set, derive_rng(self.seed, "noise"), self.hs_convention
        )
        if self.measurement is not None:
            readout = measurement_error_family(
                self.measurement.kind, n, self.measurement.p, derive_rng(self.seed, "measurement")
            )
            noise = noise.model_copy(update={"measurement": readout})
        noise.provenance.update({"seed": self.seed, "measurement": self.measurement and self.measurement.model_dump()})
        return noise


# Path, random-family block or inline model, tried in that order
NoiseSource = Annotated[Union[str, RandomNoiseSpec, NoiseModel], Field(union_mode="left_to_right")]


def resolve_noise(source: Optional[NoiseSource], n: int, gate_set: GateSetSpec) -> NoiseModel:
    """A noise model from a path, a random-family block or an inline model"""
    if source is None:
        return NoiseModel()
    if isinstance(source, str):
        return NoiseModel.load(source)
    if isinstance(source, RandomNoiseSpec):
        return source.build(n, gate_set)
    return source


class ExperimentConfig(BaseModel):
    """Design plus simulation settings for `design` and `simulate`"""

    model_config = ConfigDict(populate_by_name=True)

    design: ExperimentDesign
    noise: Optional[NoiseSource] = None
    engine: Engine = "frame"
    shots: int = Field(default_factory=lambda: settings.default_shots, alias="N", ge=0)
    circuits_out: Optional[str] = None
    dataset_out: Optional[str] = None


class OracleConfig(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    n: int = Field(ge=1)
    omega: OmegaSpec = Field(default_factory=OmegaSpec)
    depths: List[int] = Field(min_length=2)
    circuits_per_depth: int = Field(alias="K", ge=1)
    seed: int = Field(ge=0, lt=2**64)
    noise: Optional[NoiseSource] = None
    floor: bool = False
    bootstrap: int = Field(default=0, ge=0)
    convention: Convention = "entanglement"


class ScrambleConfig(BaseModel):
    n: int = Field(ge=1)
    k: int = Field(ge=0)
    omega: OmegaSpec = Field(default_factory=OmegaSpec)
    pauli_pairs: int = Field(default=20, ge=1)
    circuits: int = Field(default=20, ge=1)
    probes: Optional[int] = Field(default=100, ge=1)
    seed: int = Field(ge=0, lt=2**64)


class LspecConfig(BaseModel):
    n: int = Field(ge=1)
    omega: OmegaSpec = Field(default_factory=OmegaSpec)
    noise: Optional[NoiseSource] = None
    samples: Optional[int] = Field(default=None, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)


CONFIG_MODELS: Dict[str, Type[BaseModel]] = {
    "design": ExperimentDesign,
    "experiment": ExperimentConfig,
    "noise": NoiseModel,
    "random_noise": RandomNoiseSpec,
    "oracle": OracleConfig,
    "scramble": ScrambleConfig,
    "plan": PlannerInput,
    "lspec": LspecConfig,
}


def read_json(path: Union[str, Path]) -> Any:
    with open_artifact(path, "rt") as f:
        return json.load(f)


def load_config(model: Type[ModelT], path: Union[str, Path], overrides: Optional[dict] = None) -> ModelT:
    """Validate a JSON file against `model`, with non-None overrides applied on top"""
    data = read_json(path)
    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value
    return model.model_validate(data)
