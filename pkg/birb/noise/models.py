"""
Noise Models
Per-gate post-gate errors, gate-independent layer errors and SPAM channels
"""

import math
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from birb.circuits.circuit import GateSetSpec
from birb.core.config import settings
from birb.core.errors import DimensionError, DomainError
from birb.core.logging import get_logger
from birb.noise.generators import (
    ErrorGenerator,
    channel_from_generators,
    is_completely_positive,
    pauli_error_distribution,
)
from birb.pauli.gates import get_gate
from birb.pauli.operator import all_paulis
from birb.utils.helpers import open_artifact

logger = get_logger()

ReadoutKind = Literal["none", "bitflip", "amplitude_damping"]
NoiseFamily = Literal["stochastic", "hamiltonian", "both"]
MeasurementFamily = Literal["bitflip-all", "bitflip-single", "amplitude-damping-all", "amplitude-damping-single"]


class GateNoise(BaseModel):
    """Generators applied after `gate` acting on `qubits` (order matters for CNOT)"""

    gate: str
    qubits: Tuple[int, ...]
    generators: List[ErrorGenerator] = Field(default_factory=list)

    @model_validator(mode="after")
    def _place_generators(self):
        arity = get_gate(self.gate, len(self.qubits)).arity
        if arity != len(self.qubits):
            raise ValueError(f"gate {self.gate} takes {arity} qubits, got {self.qubits}")
        placed = []
        for g in self.generators:
            if g.qubits is None:
                if g.width != len(self.qubits):
                    raise ValueError(f"generator {g.paulis} does not match the {len(self.qubits)} gate qubits")
                g = g.model_copy(update={"qubits": tuple(self.qubits)})
            placed.append(g)
        self.generators = placed
        return self

    @property
    def support(self) -> Tuple[int, ...]:
        qubits = set(self.qubits)
        for g in self.generators:
            qubits.update(g.qubits)
        return tuple(sorted(qubits))


class ReadoutChannel(BaseModel):
    kind: ReadoutKind = "none"
    p: float = Field(default=0.0, ge=0.0)

    @property
    def is_trivial(self) -> bool:
        return self.kind == "none" or self.p == 0.0


class MeasurementErrorModel(BaseModel):
    """Per-qubit channel spec; qubits not listed are perfect"""

    channels: Dict[int, ReadoutChannel] = Field(default_factory=dict)

    def channel(self, qubit: int) -> ReadoutChannel:
        return self.channels.get(qubit, ReadoutChannel())

    @property
    def is_trivial(self) -> bool:
        return all(c.is_trivial for c in self.channels.values())


# Type of the (gate name, qubits) -> generators map
GateErrorModel = Dict[Tuple[str, Tuple[int, ...]], List[ErrorGenerator]]


class NoiseModel(BaseModel):
    """
    Markovian noise model

    gates          post-gate generators per (gate, qubits)
    layer_errors   gate-independent generators applied after every benchmark layer
    depolarizing   global depolarizing polarization after every benchmark layer
    measurement    channels immediately before readout
    prep           channels applied to |0...0> before the first layer
    """

    gates: List[GateNoise] = Field(default_factory=list)
    layer_errors: List[ErrorGenerator] = Field(default_factory=list)
    depolarizing: float = Field(default=1.0, gt=0.0, le=1.0)
    measurement: MeasurementErrorModel = Field(default_factory=MeasurementErrorModel)
    prep: MeasurementErrorModel = Field(default_factory=MeasurementErrorModel)
    provenance: Dict[str, Any] = Field(default_factory=dict)

    @field_validator("gates")
    @classmethod
    def _unique_gates(cls, gates: List[GateNoise]) -> List[GateNoise]:
        seen = set()
        for entry in gates:
            key = (entry.gate, entry.qubits)
            if key in seen:
                raise ValueError(f"duplicate noise entry for {entry.gate}{entry.qubits}")
            seen.add(key)
            if entry.support != tuple(sorted(entry.qubits)):
                logger.warning(f"crosstalk: {entry.gate}{entry.qubits} errors act on {entry.support}")
        return gates

    @field_validator("layer_errors")
    @classmethod
    def _layer_errors_placed(cls, gens: List[ErrorGenerator]) -> List[ErrorGenerator]:
        for g in gens:
            if g.qubits is None:
                raise ValueError("layer errors need explicit qubits")
        return gens

    @property
    def gate_errors(self) -> GateErrorModel:
        return {(e.gate, e.qubits): e.generators for e in self.gates}

    def generators(self) -> List[ErrorGenerator]:
        return [g for e in self.gates for g in e.generators] + list(self.layer_errors)

    @property
    def is_stochastic(self) -> bool:
        """Only stochastic generators and bit-flip SPAM (Pauli-frame compatible)"""
        if any(g.kind != "stochastic" and g.rate != 0.0 for g in self.generators()):
            return False
        for spam in (self.measurement, self.prep):
            if any(c.kind == "amplitude_damping" and c.p > 0 for c in spam.channels.values()):
                return False
        return True

    @property
    def is_noiseless(self) -> bool:
        return (
            all(g.rate == 0.0 for g in self.generators())
            and self.depolarizing == 1.0
            and self.measurement.is_trivial
            and self.prep.is_trivial
        )

    def max_qubit(self) -> int:
        qubits = [-1]
        for e in self.gates:
            qubits.extend(e.support)
        for g in self.layer_errors:
            qubits.extend(g.qubits)
        qubits.extend(self.measurement.channels)
        qubits.extend(self.prep.channels)
        return max(qubits)

    def check_qubits(self, n: int):
        if self.max_qubit() >= n:
            raise DimensionError(f"noise model references qubit {self.max_qubit()} but circuits have {n} qubits")

    # -- persistence --------------------------------------------------

    def save(self, path: Union[str, Path]):
        with open_artifact(path, "wt") as f:
            f.write(self.model_dump_json(indent=2, exclude_none=True))
            f.write("\n")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "NoiseModel":
        with open_artifact(path, "rt") as f:
            return cls.model_validate_json(f.read())


def global_depolarizing(gamma: float) -> NoiseModel:
    """Reference model: depolarizing polarization gamma after each benchmark layer"""
    return NoiseModel(depolarizing=gamma, provenance={"family": "depolarizing", "gamma": gamma})


# -- SPAM channels ----------------------------------------------------------


def _readout_generators(channel: ReadoutChannel) -> List[ErrorGenerator]:
    if channel.is_trivial:
        return []
    if channel.kind == "bitflip":
        return [ErrorGenerator.stochastic("X", channel.p)]
    # exp(p (S_X + S_Y - A_XY)) relaxes toward |0>
    return [
        ErrorGenerator.stochastic("X", channel.p),
        ErrorGenerator.stochastic("Y", channel.p),
        ErrorGenerator.active("X", "Y", -channel.p),
    ]


def measurement_channel(
    spec: Union[ReadoutChannel, MeasurementErrorModel], qubit: Optional[int] = None
) -> np.ndarray:
    """Single-qubit PTM of the readout channel (identity when trivial)"""
    if isinstance(spec, MeasurementErrorModel):
        if qubit is None:
            raise DomainError("a qubit index is needed to pick a channel from a measurement model")
        spec = spec.channel(qubit)
    return channel_from_generators(_readout_generators(spec), 1)


def flip_probability(channel: ReadoutChannel) -> float:
    """Classical flip probability of a bit-flip readout channel"""
    if channel.is_trivial:
        return 0.0
    if channel.kind != "bitflip":
        raise DomainError(f"{channel.kind} readout errors are not a classical bit flip")
    return (1.0 - math.exp(-2.0 * channel.p)) / 2.0


def measurement_error_family(
    kind: MeasurementFamily, n: int, p: float, rng: np.random.Generator
) -> MeasurementErrorModel:
    """
    The four readout-error types: bit flip or amplitude damping, either on
    every qubit with p_m ~ U[0, 2p/n] or on one random qubit with p_m = p
    """
    channel_kind = "bitflip" if kind.startswith("bitflip") else "amplitude_damping"
    if kind.endswith("-all"):
        rates = rng.uniform(0.0, 2.0 * p / n, size=n)
        channels = {q: ReadoutChannel(kind=channel_kind, p=float(r)) for q, r in enumerate(rates)}
    else:
        q = int(rng.integers(n))
        channels = {q: ReadoutChannel(kind=channel_kind, p=p)}
    return MeasurementErrorModel(channels=channels)


# -- random model families ----------------------------------------------------


def family_rates(family: NoiseFamily, n: int, p: float, rng: np.random.Generator, hs_convention: Optional[str] = None):
    """Total stochastic and Hamiltonian rates (s, h) for a two-qubit gate"""
    if p < 0:
        raise DomainError(f"error scale must be non-negative, got {p}")
    if family == "stochastic":
        return 1.2 * p, 0.0
    if family == "hamiltonian":
        return 0.0, math.sqrt((6.0 if n < 4 else 8.0) * p)
    if family == "both":
        convention = hs_convention or settings.hs_rate_convention
        s = float(rng.uniform(0.0, p)) if p > 0 else 0.0
        h = math.sqrt(2.0 * (p - s)) if convention == "split" else math.sqrt(2.0 * p - s)
        return s, h
    raise DomainError(f"unknown noise family {family!r}")


def noisy_gate_instances(gate_set: GateSetSpec, n: int) -> List[Tuple[str, Tuple[int, ...]]]:
    """Every single-qubit gate on every qubit and the two-qubit gate on both orientations of every edge"""
    instances = [(name, (q,)) for name in dict.fromkeys(gate_set.single_qubit_gates) for q in range(n)]
    for a, b in gate_set.edges(n):
        instances.append((gate_set.two_qubit_gate, (a, b)))
        instances.append((gate_set.two_qubit_gate, (b, a)))
    return instances


def _split_rates(total: float, count: int, rng: np.random.Generator, quadrature: bool) -> np.ndarray:
    weights = rng.dirichlet(np.ones(count))
    if not quadrature:
        return total * weights
    signs = rng.choice([-1.0, 1.0], size=count)
    return total * np.sqrt(weights) * signs


def sample_random_model(
    family: NoiseFamily,
    n: int,
    p: float,
    gate_set: GateSetSpec,
    rng: np.random.Generator,
    hs_convention: Optional[str] = None,
) -> NoiseModel:
    """
    Random post-gate noise of a given family and scale p

    Per gate, the stochastic total is U[0, chi*s] split over the 4^k - 1
    Paulis with Dirichlet weights; the Hamiltonian total is U[0, chi*h]
    split in quadrature with random signs. chi is the configured
    single-qubit ratio for single-qubit gates when n >= 2 and 1 otherwise.
    """
    s_total, h_total = family_rates(family, n, p, rng, hs_convention)
    single_ratio = settings.single_qubit_rate_ratio if n >= 2 else 1.0

    entries = []
    for name, qubits in noisy_gate_instances(gate_set, n):
        k = len(qubits)
        chi = single_ratio if k == 1 else 1.0
        labels = [pauli.to_label()[1:] for pauli in all_paulis(k, include_identity=False)]
        generators = []
        if s_total > 0:
            rates = _split_rates(rng.uniform(0.0, chi * s_total), len(labels), rng, quadrature=False)
            generators += [ErrorGenerator.stochastic(lab, float(r)) for lab, r in zip(labels, rates)]
        if h_total > 0:
            rates = _split_rates(rng.uniform(0.0, chi * h_total), len(labels), rng, quadrature=True)
            generators += [ErrorGenerator.hamiltonian(lab, float(r)) for lab, r in zip(labels, rates)]
        entries.append(GateNoise(gate=name, qubits=qubits, generators=generators))

    logger.debug(f"Sampled {family} model on {n} qubits at p={p}: s={s_total:.4g}, h={h_total:.4g}")
    return NoiseModel(
        gates=entries,
        provenance={
            "family": family,
            "p": p,
            "n": n,
            "s_total": s_total,
            "h_total": h_total,
            "hs_convention": hs_convention or settings.hs_rate_convention,
        },
    )


# -- compiled form ------------------------------------------------------------


class CompiledNoiseModel:
    """
    Channel matrices and Pauli error tables of a noise model, built lazily
    and cached per (gate, qubits); read-only once built
    """

    def __init__(self, noise: NoiseModel, n: int):
        noise.check_qubits(n)
        self.noise = noise
        self.n = n
        self._entries = {(e.gate, e.qubits): e for e in noise.gates}
        self._channels: Dict[Tuple[str, Tuple[int, ...]], Optional[Tuple[Tuple[int, ...], np.ndarray]]] = {}
        self._pauli_tables: Dict[Tuple[str, Tuple[int, ...]], Optional[Tuple[Tuple[int, ...], np.ndarray]]] = {}
        self._layer_support = tuple(sorted({q for g in noise.layer_errors for q in g.qubits}))
        self._layer_channel: Optional[np.ndarray] = None
        self._layer_table: Optional[np.ndarray] = None

    @property
    def depolarizing(self) -> float:
        return self.noise.depolarizing

    def _active_generators(self, gens: Sequence[ErrorGenerator]) -> List[ErrorGenerator]:
        return [g for g in gens if g.rate != 0.0]

    def gate_channel(self, gate: str, qubits: Sequence[int]) -> Optional[Tuple[Tuple[int, ...], np.ndarray]]:
        """(support, PTM) of the post-gate error, or None for a perfect gate"""
        key = (gate, tuple(qubits))
        if key not in self._channels:
            entry = self._entries.get(key)
            gens = self._active_generators(entry.generators) if entry else []
            if not gens:
                self._channels[key] = None
            else:
                support = entry.support
                channel = channel_from_generators(gens, len(support), support)
                if any(g.kind != "stochastic" for g in gens) and not is_completely_positive(channel):
                    logger.warning(f"error channel of {gate}{tuple(qubits)} is not completely positive")
                self._channels[key] = (support, channel)
        return self._channels[key]

    def gate_pauli_errors(self, gate: str, qubits: Sequence[int]) -> Optional[Tuple[Tuple[int, ...], np.ndarray]]:
        """(support, probabilities over 4^k Paulis) of a stochastic post-gate error"""
        key = (gate, tuple(qubits))
        if key not in self._pauli_tables:
            entry = self._entries.get(key)
            gens = self._active_generators(entry.generators) if entry else []
            if not gens:
                self._pauli_tables[key] = None
            else:
                support = entry.support
                self._pauli_tables[key] = (support, pauli_error_distribution(gens, len(support), support))
        return self._pauli_tables[key]

    @property
    def layer_support(self) -> Tuple[int, ...]:
        return self._layer_support

    def layer_channel(self) -> Optional[np.ndarray]:
        gens = self._active_generators(self.noise.layer_errors)
        if not gens:
            return None
        if self._layer_channel is None:
            support = self._layer_support
            self._layer_channel = channel_from_generators(gens, len(support), support)
        return self._layer_channel

    def layer_pauli_errors(self) -> Optional[np.ndarray]:
        gens = self._active_generators(self.noise.layer_errors)
        if not gens:
            return None
        if self._layer_table is None:
            support = self._layer_support
            self._layer_table = pauli_error_distribution(gens, len(support), support)
        return self._layer_table

    def measurement_ptm(self, qubit: int) -> Optional[np.ndarray]:
        channel = self.noise.measurement.channel(qubit)
        return None if channel.is_trivial else measurement_channel(channel)

    def prep_ptm(self, qubit: int) -> Optional[np.ndarray]:
        channel = self.noise.prep.channel(qubit)
        return None if channel.is_trivial else measurement_channel(channel)

    def readout_flip(self, qubit: int) -> float:
        return flip_probability(self.noise.measurement.channel(qubit))

    def prep_flip(self, qubit: int) -> float:
        return flip_probability(self.noise.prep.channel(qubit))
