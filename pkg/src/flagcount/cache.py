"""JSON Lines flag records and a fingerprinted on-disk cache of enumeration runs."""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Iterator, List, Optional

from . import __version__
from .enumeration import EnumerationJob, height_ac, height_inf
from .lattice import FlagChain, IntegerBasis, PrimitiveLattice
from .shapes import direction, shape_vector

SCHEMA_VERSION = 1


def frac_str(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def default_cache_dir() -> Path:
    env = os.environ.get("FLAGCOUNT_CACHE")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "flagcount"


def job_description(job: EnumerationJob) -> dict:
    return {
        "n": job.n,
        "partition": list(job.partition),
        "height": job.height.value,
        "bound_sq": frac_str(job.bound_sq),
        "schema": SCHEMA_VERSION,
    }


def fingerprint(job: EnumerationJob) -> str:
    text = json.dumps(job_description(job), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def flag_to_record(f: FlagChain, shapes: bool = False, directions: bool = False) -> dict:
    rec = {
        "partition": list(f.partition),
        "bases": [[list(row) for row in lat.rows] for lat in f.lattices[:-1]],
        "covol_sq": [frac_str(c) for c in f.covols_sq[:-1]],
        "h_inf_sq": frac_str(height_inf(f)),
        "h_ac_sq": frac_str(height_ac(f)),
    }
    if shapes:
        rec["shapes"] = [s.as_json() for s in shape_vector(f)]
    if directions:
        rec["directions"] = [d.as_json() for d in direction(f)]
    return rec


def record_to_flag(rec: dict) -> FlagChain:
    partition = tuple(rec["partition"])
    n = sum(partition)
    lats = [
        PrimitiveLattice(IntegerBasis(tuple(tuple(r) for r in rows)), Fraction(c))
        for rows, c in zip(rec["bases"], rec["covol_sq"])
    ]
    ident = tuple(tuple(int(i == j) for j in range(n)) for i in range(n))
    lats.append(PrimitiveLattice(IntegerBasis(ident), Fraction(1)))
    return FlagChain(partition, tuple(lats))


def dumps(rec: dict) -> str:
    return json.dumps(rec, separators=(",", ":"))


def write_flags(path: Path, flags: Iterable[FlagChain], shapes: bool = False,
                directions: bool = False) -> "RunStats":
    """Stream flags to ``path`` via a ``.partial`` file renamed on success."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    partial = path.with_name(path.name + ".partial")
    stats = RunStats()
    with open(partial, "w") as fh:
        for f in flags:
            fh.write(dumps(flag_to_record(f, shapes, directions)) + "\n")
            stats.add(f)
    os.replace(partial, path)
    return stats


def read_flags(path) -> Iterator[FlagChain]:
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield record_to_flag(json.loads(line))


@dataclass
class RunStats:
    count: int = 0
    level_counts: List[int] = field(default_factory=list)
    _seen: List[set] = field(default_factory=list, repr=False)

    def add(self, f: FlagChain) -> None:
        self.count += 1
        members = f.lattices[:-1]
        while len(self._seen) < len(members):
            self._seen.append(set())
        for seen, lat in zip(self._seen, members):
            seen.add(lat.rows)
        self.level_counts = [len(s) for s in self._seen]


@dataclass
class CacheEntry:
    fingerprint: str
    count: int
    level_counts: List[int]
    jsonl_path: str
    version: str
    job: dict

    def to_json(self) -> dict:
        return asdict(self)


class Cache:
    """Directory of ``<fingerprint>.jsonl`` flag streams with ``<fingerprint>.json`` entries."""

    def __init__(self, root: Optional[Path] = None):
        self.root = Path(root) if root is not None else default_cache_dir()

    def _paths(self, fp: str):
        return self.root / f"{fp}.json", self.root / f"{fp}.jsonl"

    def lookup(self, job: EnumerationJob) -> Optional[CacheEntry]:
        fp = fingerprint(job)
        meta, data = self._paths(fp)
        if not meta.exists() or not data.exists():
            return None
        try:
            raw = json.loads(meta.read_text())
            entry = CacheEntry(**raw)
        except (ValueError, TypeError):
            return None
        if entry.job.get("schema") != SCHEMA_VERSION:
            return None
        return entry

    def store(self, job: EnumerationJob, flags: Iterable[FlagChain]) -> CacheEntry:
        fp = fingerprint(job)
        meta, data = self._paths(fp)
        stats = write_flags(data, flags)
        entry = CacheEntry(fp, stats.count, stats.level_counts, str(data), __version__,
                           job_description(job))
        tmp = meta.with_name(meta.name + ".partial")
        tmp.write_text(json.dumps(entry.to_json(), indent=1, sort_keys=True))
        os.replace(tmp, meta)
        return entry
