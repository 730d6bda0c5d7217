"""
Layer Sampling
Edgegrab sampler for Omega-distributed layers

A layer is drawn by scanning the connectivity edges in a uniformly shuffled
order to build a maximal matching M, keeping each matched edge with
probability min(1, n*xi / (2|M|)), orienting kept edges uniformly at random
and giving every other qubit a uniform single-qubit gate. The expected
two-qubit gate density is xi whenever n*xi/2 <= |M|.
"""

from collections import defaultdict
from itertools import combinations, permutations, product
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

from birb.circuits.circuit import GateInstance, GateLayer, GateSetSpec
from birb.core.config import settings
from birb.core.errors import CapabilityError, ConfigurationError
from birb.core.logging import get_logger

logger = get_logger()


class OmegaSpec(BaseModel):
    """Layer distribution: gate set, connectivity and two-qubit gate density"""

    xi: float = Field(default=0.25, ge=0.0, le=1.0)
    gate_set: GateSetSpec = Field(default_factory=GateSetSpec)

    @model_validator(mode="before")
    @classmethod
    def _lift_connectivity(cls, data):
        # Accept {xi, gate_set: [names], connectivity} as well as the nested form
        if not isinstance(data, dict):
            return data
        data = dict(data)
        gate_set = data.get("gate_set")
        if isinstance(gate_set, list):
            gate_set = {"single_qubit_gates": gate_set}
        if "connectivity" in data:
            gate_set = dict(gate_set or {})
            gate_set["connectivity"] = data.pop("connectivity")
        if gate_set is not None:
            data["gate_set"] = gate_set
        return data


def greedy_matching(
    edges: Sequence[Tuple[int, int]], order: Sequence[int], n: Optional[int] = None
) -> List[Tuple[int, int]]:
    """Maximal matching from scanning `edges` in `order`"""
    used = set()
    matching = []
    for i in order:
        a, b = edges[i]
        if a not in used and b not in used:
            matching.append((a, b))
            used.update((a, b))
            if n is not None and len(used) >= n - 1:
                break
    return matching


def check_density(spec: OmegaSpec, n: int) -> bool:
    """Warn when n*xi/2 exceeds the matching the connectivity allows"""
    edges = spec.gate_set.edges(n)
    if spec.xi > 0 and not edges:
        raise ConfigurationError(f"xi={spec.xi} needs two-qubit connectivity but there are no edges on {n} qubits")
    capacity = len(greedy_matching(edges, range(len(edges))))
    if n * spec.xi / 2 > capacity + 1e-12:
        logger.warning(
            f"xi={spec.xi} asks for {n * spec.xi / 2:.2f} two-qubit gates per layer "
            f"but the connectivity matches at most ~{capacity}; realized density will be lower"
        )
        return False
    return True


def _retention(n: int, xi: float, matching_size: int) -> float:
    if matching_size == 0:
        return 0.0
    return min(1.0, n * xi / (2 * matching_size))


def sample_omega_layer(spec: OmegaSpec, n: int, rng: np.random.Generator) -> GateLayer:
    """Draw one layer from the edgegrab distribution"""
    edges = spec.gate_set.edges(n)
    if spec.xi > 0 and not edges:
        raise ConfigurationError(f"xi={spec.xi} needs two-qubit connectivity but there are no edges on {n} qubits")

    singles = spec.gate_set.single_gates()
    entangler = spec.gate_set.entangling_gate()

    matching = greedy_matching(edges, rng.permutation(len(edges)), n) if spec.xi > 0 else []
    keep = _retention(n, spec.xi, len(matching))

    gates = []
    busy = set()
    for a, b in matching:
        if rng.random() < keep:
            pair = (a, b) if rng.random() < 0.5 else (b, a)
            gates.append(GateInstance(entangler, pair))
            busy.update(pair)
    for q in range(n):
        if q not in busy:
            gates.append(GateInstance(singles[int(rng.integers(len(singles)))], (q,)))

    gates.sort(key=lambda g: min(g.qubits))
    return GateLayer(n, tuple(gates))


def enumerate_omega_layers(spec: OmegaSpec, n: int) -> List[Tuple[GateLayer, float]]:
    """
    Exact edgegrab layer distribution as (layer, probability) pairs

    Enumerates every edge ordering, retained subset, orientation and
    single-qubit assignment, so it is limited to small graphs.
    """
    edges = spec.gate_set.edges(n)
    if len(edges) > settings.edgegrab_enumeration_max_edges:
        raise CapabilityError(
            f"exact layer enumeration over {len(edges)} edges",
            hint=f"at most {settings.edgegrab_enumeration_max_edges} edges; sample layers instead",
        )
    if spec.xi > 0 and not edges:
        raise ConfigurationError(f"xi={spec.xi} needs two-qubit connectivity but there are no edges on {n} qubits")

    singles = spec.gate_set.single_gates()
    entangler = spec.gate_set.entangling_gate()

    # Probability of each maximal matching over uniformly shuffled scans
    matchings: Dict[Tuple[Tuple[int, int], ...], float] = defaultdict(float)
    if spec.xi > 0:
        orders = list(permutations(range(len(edges))))
        for order in orders:
            matchings[tuple(sorted(greedy_matching(edges, order)))] += 1.0 / len(orders)
    else:
        matchings[()] = 1.0

    layers: Dict[Tuple, Tuple[GateLayer, float]] = {}
    for matching, p_matching in matchings.items():
        keep = _retention(n, spec.xi, len(matching))
        for size in range(len(matching) + 1):
            p_size = keep**size * (1 - keep) ** (len(matching) - size)
            if p_size == 0.0:
                continue
            for kept in combinations(matching, size):
                for flips in product((False, True), repeat=size):
                    pairs = [(b, a) if flip else (a, b) for (a, b), flip in zip(kept, flips)]
                    busy = {q for pair in pairs for q in pair}
                    free = [q for q in range(n) if q not in busy]
                    p_layer = p_matching * p_size / (2**size) / (len(singles) ** len(free))
                    for choice in product(singles, repeat=len(free)):
                        gates = [GateInstance(entangler, pair) for pair in pairs]
                        gates += [GateInstance(g, (q,)) for g, q in zip(choice, free)]
                        gates.sort(key=lambda g: min(g.qubits))
                        key = tuple((g.gate.name, g.qubits) for g in gates)
                        if key in layers:
                            layers[key] = (layers[key][0], layers[key][1] + p_layer)
                        else:
                            layers[key] = (GateLayer(n, tuple(gates)), p_layer)
    return list(layers.values())
