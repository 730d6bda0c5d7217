"""
Experiment Runner
Runs circuit batches through an engine and collects the per-circuit dataset

Shots of circuit `id` are split in blocks; block b draws from the substream
(seed, "shots", id, b), so a dataset does not depend on worker count or
on the order circuits are scheduled in.
"""

from pathlib import Path
from typing import IO, Dict, Iterable, Iterator, List, Literal, Optional, Tuple, Union

import numpy as np
from joblib import Parallel, delayed
from pydantic import BaseModel, ConfigDict, Field, model_validator

from birb.core.config import settings
from birb.core.errors import DomainError
from birb.core.logging import get_logger
from birb.engines.dense import evolve, outcome_probabilities
from birb.engines.frame import flip_sources, sample_block, sources_expectation
from birb.engines.ptm import check_dense_capacity
from birb.noise.models import CompiledNoiseModel, NoiseModel
from birb.sampler.birb_circuits import BirbCircuit
from birb.sampler.design import ExperimentDesign, circuit_id
from birb.utils.helpers import derive_rng, iter_jsonl, open_artifact, write_jsonl

logger = get_logger()

Engine = Literal["dense", "frame", "dense-exact"]
ENGINES = ("dense", "frame", "dense-exact")

# Rounding slack on exact expectations
EXACT_TOLERANCE = 1e-9


class DatasetRow(BaseModel):
    """One circuit's result: shot tally and/or exact expectation"""

    model_config = ConfigDict(populate_by_name=True)

    id: str
    n: int = Field(ge=1)
    depth: int = Field(alias="d", ge=0)
    target: str
    shots: int = Field(alias="N", ge=0)
    success_sum: int = 0
    exact: Optional[float] = None
    seed: Optional[int] = None
    schema_version: str = Field(default_factory=lambda: settings.schema_version)

    @model_validator(mode="after")
    def _check_values(self):
        if abs(self.success_sum) > self.shots:
            raise ValueError(f"success_sum {self.success_sum} exceeds N={self.shots}")
        if (self.success_sum - self.shots) % 2:
            raise ValueError("success_sum and N must have the same parity")
        if self.exact is not None:
            if abs(self.exact) > 1.0 + EXACT_TOLERANCE:
                raise ValueError(f"exact expectation {self.exact} outside [-1, 1]")
            self.exact = float(np.clip(self.exact, -1.0, 1.0))
        if self.shots == 0 and self.exact is None:
            raise ValueError("a row needs shots or an exact expectation")
        return self

    @property
    def estimate(self) -> float:
        """Per-circuit <s_C> estimate: the shot mean, or the exact value when no shots ran"""
        if self.shots > 0:
            return self.success_sum / self.shots
        return float(self.exact)

    def to_record(self) -> dict:
        return self.model_dump(by_alias=True, exclude_none=True)


class Dataset(BaseModel):
    """Rows of one experiment grouped by benchmark depth"""

    rows: List[DatasetRow] = Field(default_factory=list)

    @property
    def n(self) -> int:
        if not self.rows:
            raise DomainError("empty dataset")
        sizes = {row.n for row in self.rows}
        if len(sizes) != 1:
            raise DomainError(f"dataset mixes qubit counts {sorted(sizes)}")
        return sizes.pop()

    @property
    def seed(self) -> Optional[int]:
        seeds = {row.seed for row in self.rows}
        return seeds.pop() if len(seeds) == 1 else None

    def depths(self) -> List[int]:
        return sorted({row.depth for row in self.rows})

    def by_depth(self) -> Dict[int, List[DatasetRow]]:
        groups: Dict[int, List[DatasetRow]] = {}
        for row in self.rows:
            groups.setdefault(row.depth, []).append(row)
        return dict(sorted(groups.items()))

    def estimates(self, depth: int) -> np.ndarray:
        values = [row.estimate for row in self.rows if row.depth == depth]
        if not values:
            raise DomainError(f"no circuits at benchmark depth {depth}")
        return np.array(values)

    def __len__(self) -> int:
        return len(self.rows)


# -- dataset I/O --------------------------------------------------------------


def write_dataset(target: Union[str, Path, IO], rows: Iterable[DatasetRow]) -> int:
    """Write rows as JSONL (gzip when the path ends in .gz); returns the row count"""
    records = (row.to_record() for row in rows)
    if isinstance(target, (str, Path)):
        with open_artifact(target, "wt") as stream:
            return write_jsonl(stream, records)
    return write_jsonl(target, records)


def iter_dataset(source: Union[str, Path, IO]) -> Iterator[DatasetRow]:
    if isinstance(source, (str, Path)):
        with open_artifact(source, "rt") as stream:
            yield from (DatasetRow.model_validate(r) for r in iter_jsonl(stream))
    else:
        yield from (DatasetRow.model_validate(r) for r in iter_jsonl(source))


def load_dataset(source: Union[str, Path, IO]) -> Dataset:
    return Dataset(rows=list(iter_dataset(source)))


# -- single circuits ----------------------------------------------------------


def check_engine(engine: str, noise: NoiseModel, n: int):
    """Fail before any work when the engine cannot run this noise on n qubits"""
    if engine not in ENGINES:
        raise DomainError(f"unknown engine {engine!r}; expected one of {', '.join(ENGINES)}")
    noise.check_qubits(n)
    if engine == "frame":
        if not noise.is_stochastic:
            raise DomainError(
                "the frame engine needs stochastic generators and bit-flip SPAM errors only; "
                "use the dense engine for coherent or amplitude-damping noise"
            )
    else:
        check_dense_capacity(n)


def _blocks(shots: int, block_shots: int) -> Iterator[Tuple[int, int]]:
    for b, start in enumerate(range(0, shots, block_shots)):
        yield b, min(block_shots, shots - start)


def run_circuit(
    cid: str,
    bc: BirbCircuit,
    compiled: CompiledNoiseModel,
    engine: Engine,
    shots: int,
    seed: int,
    block_shots: Optional[int] = None,
) -> DatasetRow:
    """Run one circuit; exact expectations ride along whenever they come for free"""
    block_shots = block_shots or settings.frame_block_shots
    if engine == "frame":
        sources, depolarizing_count = flip_sources(bc, compiled)
        exact = sources_expectation(sources, depolarizing_count, compiled.depolarizing)
        total = 0
        for b, size in _blocks(shots, block_shots):
            rng = derive_rng(seed, "shots", cid, b)
            total += int(sample_block(sources, depolarizing_count, compiled.depolarizing, size, rng).sum(dtype=np.int64))
    else:
        state = evolve(bc, compiled)
        exact = state.expectation(bc.target)
        if engine == "dense-exact":
            shots = 0
        total = 0
        if shots:
            probabilities = outcome_probabilities(state)
            for b, size in _blocks(shots, block_shots):
                rng = derive_rng(seed, "shots", cid, b)
                outcomes = rng.choice(len(probabilities), size=size, p=probabilities)
                total += int(bc.values(outcomes).sum(dtype=np.int64))

    logger.debug(f"{cid}: d={bc.benchmark_depth} exact={exact:.6f} sum={total}/{shots}")
    return DatasetRow(
        id=cid,
        n=bc.n,
        d=bc.benchmark_depth,
        target=bc.target.to_label(),
        N=shots,
        success_sum=total,
        exact=exact,
        seed=seed,
    )


# -- batches ------------------------------------------------------------------


def _run_design_chunk(
    design: ExperimentDesign,
    noise: NoiseModel,
    keys: List[Tuple[int, int]],
    engine: Engine,
    shots: int,
    block_shots: int,
) -> List[DatasetRow]:
    compiled = CompiledNoiseModel(noise, design.n)
    return [
        run_circuit(circuit_id(d, i), design.build(d, i), compiled, engine, shots, design.seed, block_shots)
        for d, i in keys
    ]


def _chunks(items: List, count: int) -> List[List]:
    size = max(1, -(-len(items) // count))
    return [items[i : i + size] for i in range(0, len(items), size)]


def run_design(
    design: ExperimentDesign,
    noise: Optional[NoiseModel] = None,
    engine: Engine = "frame",
    shots: Optional[int] = None,
    workers: Optional[int] = None,
    block_shots: Optional[int] = None,
) -> Dataset:
    """
    Build and run every circuit of a design

    Args:
        design: Experiment design (its seed drives circuits and shots)
        noise: Noise model; None means noiseless
        engine: "dense", "frame" or "dense-exact" (no shots)
        shots: Shots per circuit, default from settings
        workers: joblib worker count, default from settings

    Returns:
        Dataset with one row per circuit, depth-major
    """
    noise = noise or NoiseModel()
    shots = settings.default_shots if shots is None else shots
    workers = workers or settings.workers
    block_shots = block_shots or settings.frame_block_shots
    if shots < 0:
        raise DomainError(f"shots must be non-negative, got {shots}")
    check_engine(engine, noise, design.n)

    keys = design.keys()
    if workers == 1:
        rows = _run_design_chunk(design, noise, keys, engine, shots, block_shots)
    else:
        # Several chunks per worker keeps the pool busy when depths differ a lot
        parts = Parallel(n_jobs=workers)(
            delayed(_run_design_chunk)(design, noise, chunk, engine, shots, block_shots)
            for chunk in _chunks(keys, workers * 4)
        )
        rows = [row for part in parts for row in part]

    logger.info(f"Ran {len(rows)} circuits on the {engine} engine ({shots if engine != 'dense-exact' else 0} shots each)")
    return Dataset(rows=rows)


def _run_record_chunk(
    records: List[dict], noise: NoiseModel, engine: Engine, shots: int, seed: Optional[int], block_shots: int
) -> List[DatasetRow]:
    compiled: Dict[int, CompiledNoiseModel] = {}
    rows = []
    for record in records:
        bc = BirbCircuit.from_record(record)
        if bc.n not in compiled:
            check_engine(engine, noise, bc.n)
            compiled[bc.n] = CompiledNoiseModel(noise, bc.n)
        record_seed = seed if seed is not None else (record.get("metadata") or {}).get("seed")
        if record_seed is None:
            raise DomainError(f"circuit {record['id']} carries no seed; pass one explicitly")
        rows.append(run_circuit(record["id"], bc, compiled[bc.n], engine, shots, int(record_seed), block_shots))
    return rows


def simulate_records(
    records: Iterable[dict],
    noise: Optional[NoiseModel] = None,
    engine: Engine = "frame",
    shots: Optional[int] = None,
    seed: Optional[int] = None,
    workers: Optional[int] = None,
    batch_size: int = 64,
) -> Iterator[DatasetRow]:
    """
    Stream dataset rows for a stream of circuit records

    Records are consumed `batch_size` at a time, so memory stays flat in the
    number of circuits. The seed defaults to each record's metadata seed.
    """
    noise = noise or NoiseModel()
    shots = settings.default_shots if shots is None else shots
    workers = workers or settings.workers
    block_shots = settings.frame_block_shots

    pool = Parallel(n_jobs=workers) if workers > 1 else None
    batch: List[dict] = []
    count = 0

    def flush(batch: List[dict]) -> List[DatasetRow]:
        if pool is None:
            return _run_record_chunk(batch, noise, engine, shots, seed, block_shots)
        parts = pool(
            delayed(_run_record_chunk)(chunk, noise, engine, shots, seed, block_shots)
            for chunk in _chunks(batch, workers)
        )
        return [row for part in parts for row in part]

    for record in records:
        batch.append(record)
        if len(batch) >= batch_size * workers:
            rows = flush(batch)
            count += len(rows)
            yield from rows
            batch = []
    if batch:
        rows = flush(batch)
        count += len(rows)
        yield from rows
    logger.info(f"Simulated {count} circuits on the {engine} engine")

