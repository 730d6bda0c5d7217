"""
Helper Utilities
Seed derivation and artifact I/O used across the toolkit
"""

import gzip
import hashlib
import json
from pathlib import Path
from typing import IO, Iterable, Iterator, Union

import numpy as np

SEED_MASK = (1 << 64) - 1


def _key_to_int(key) -> int:
    """Hash a substream key (string or integer) to a 32-bit integer"""
    digest = hashlib.sha256(str(key).encode()).digest()
    return int.from_bytes(digest[:4], "little")


def derive_seed_sequence(seed: int, *keys) -> np.random.SeedSequence:
    """
    Derive a named substream from a root seed

    The substream depends only on (seed, keys), never on worker count or
    scheduling order.

    Args:
        seed: Root 64-bit seed
        keys: Stage name, depth, circuit index, block index, ...

    Returns:
        SeedSequence for the substream
    """
    return np.random.SeedSequence(
        entropy=int(seed) & SEED_MASK,
        spawn_key=tuple(_key_to_int(k) for k in keys),
    )


def derive_rng(seed: int, *keys) -> np.random.Generator:
    """Generator for the substream (seed, *keys)"""
    return np.random.default_rng(derive_seed_sequence(seed, *keys))


def draw_seed(rng: np.random.Generator) -> int:
    """Draw a fresh 63-bit root seed from a generator"""
    return int(rng.integers(0, 2**63 - 1))


def open_artifact(path: Union[str, Path], mode: str = "rt") -> IO:
    """Open a text artifact, transparently gzipped when the suffix is .gz"""
    path = Path(path)
    if "w" in mode or "a" in mode:
        path.parent.mkdir(parents=True, exist_ok=True)
    if path.suffix == ".gz":
        return gzip.open(path, mode, encoding="utf-8")
    return open(path, mode, encoding="utf-8")


def write_jsonl(stream: IO, records: Iterable[dict]) -> int:
    """Write one compact JSON object per line; returns the record count"""
    count = 0
    for record in records:
        stream.write(json.dumps(record, sort_keys=True, separators=(",", ":")))
        stream.write("\n")
        count += 1
    return count


def iter_jsonl(stream: IO) -> Iterator[dict]:
    """Yield JSON objects from a JSONL stream, skipping blank lines"""
    for line in stream:
        line = line.strip()
        if line:
            yield json.loads(line)


def dumps_report(report: dict) -> str:
    """Canonical JSON text for a report (byte-stable across runs)"""
    return json.dumps(report, sort_keys=True, indent=2) + "\n"
