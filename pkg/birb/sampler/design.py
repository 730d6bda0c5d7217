"""
Experiment Design
Design JSON model and deterministic circuit batch generation
"""

from typing import Iterator, List, Literal, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from birb.core.config import settings
from birb.core.errors import CapabilityError
from birb.core.logging import get_logger
from birb.sampler.birb_circuits import BirbCircuit, build_birb_circuit
from birb.sampler.clifford_group import build_clifford_group_birb_circuit
from birb.sampler.omega import OmegaSpec, check_density
from birb.utils.helpers import derive_rng

logger = get_logger()

Variant = Literal["birb", "clifford-group-birb"]


class ExperimentDesign(BaseModel):
    """
    {n, depths, K, omega: {xi, gate_set, connectivity}, seed, variant}

    Circuit (depth d, index i) is drawn from the substream
    (seed, "circuit", d, i), so any subset can be regenerated alone.
    """

    model_config = ConfigDict(populate_by_name=True)

    n: int = Field(ge=1)
    depths: List[int] = Field(min_length=1)
    circuits_per_depth: int = Field(alias="K", ge=1)
    omega: OmegaSpec = Field(default_factory=OmegaSpec)
    seed: int = Field(ge=0, lt=2**64)
    variant: Variant = "birb"

    @field_validator("depths")
    @classmethod
    def _check_depths(cls, depths: List[int]) -> List[int]:
        if any(d < 0 for d in depths):
            raise ValueError("benchmark depths must be non-negative")
        if len(set(depths)) != len(depths):
            raise ValueError("benchmark depths must be distinct")
        return depths

    @model_validator(mode="after")
    def _check_variant(self):
        if self.variant == "clifford-group-birb" and self.n > settings.clifford_max_qubits:
            raise CapabilityError(
                f"clifford-group-birb on {self.n} qubits",
                hint=f"the cap is {settings.clifford_max_qubits} qubits; use variant birb",
            )
        return self

    @property
    def circuit_count(self) -> int:
        return self.circuits_per_depth * len(self.depths)

    def keys(self) -> List[Tuple[int, int]]:
        return [(d, i) for d in self.depths for i in range(self.circuits_per_depth)]

    def build(self, depth: int, index: int) -> BirbCircuit:
        rng = derive_rng(self.seed, "circuit", depth, index)
        if self.variant == "clifford-group-birb":
            return build_clifford_group_birb_circuit(self.n, depth, rng)
        return build_birb_circuit(self.n, depth, self.omega, rng)

    def generate(self) -> Iterator[Tuple[str, BirbCircuit]]:
        """Yield (id, circuit) for every depth and index, depth-major"""
        if self.variant == "birb":
            check_density(self.omega, self.n)
        for depth, index in self.keys():
            yield circuit_id(depth, index), self.build(depth, index)
        logger.info(f"Generated {self.circuit_count} {self.variant} circuits on {self.n} qubits")

    def records(self) -> Iterator[dict]:
        for cid, bc in self.generate():
            yield bc.to_record(cid, {"seed": self.seed})


def circuit_id(depth: int, index: int) -> str:
    return f"d{depth}-k{index}"
