"""Command-line entry point: ``flagcount enumerate|predict|verify|equidist``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import shutil
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .cache import Cache, default_cache_dir, fingerprint, frac_str, read_flags, write_flags
from .enumeration import EnumerationJob, HeightKind, count_flags, enumerate_flags
from .harness import (
    CellsTooFine,
    chi_square_uniform,
    fit_exponent,
    modular_cells,
    ratio_table,
    sphere_cap_cells,
)
from .predictions import height_exponent, predict
from .shapes import direction, shape_vector

log = logging.getLogger("flagcount")

EXIT_OK, EXIT_TOLERANCE, EXIT_CONFIG, EXIT_INTERNAL = 0, 1, 2, 3

DEFAULT_RATIO_TOL = {HeightKind.INF: 0.02, HeightKind.AC: 0.25}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    n: int
    partition: Tuple[int, ...]
    height: HeightKind
    Xs: List[Fraction]
    out: Optional[Path] = None
    cache_dir: Optional[Path] = None
    use_cache: bool = True
    workers: int = 1
    emit_shapes: bool = False
    emit_directions: bool = False
    order: str = "auto"
    exponent_tol: float = 0.15
    ratio_tol: Optional[float] = None
    cells: Optional[int] = None
    target: str = "shape"
    block: Optional[int] = None

    @property
    def X(self) -> Fraction:
        if len(self.Xs) != 1:
            raise ConfigError("this command takes a single X")
        return self.Xs[0]

    def job(self, X) -> EnumerationJob:
        return EnumerationJob(self.partition, self.height, Fraction(X) ** 2)


# ---------------------------------------------------------------- config parsing

def read_config_file(path) -> Dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    for num, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{num}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _parse_bool(v) -> bool:
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {v!r}")


def _parse_number(s: str) -> Fraction:
    try:
        x = Fraction(s.strip())
    except ValueError as exc:
        raise ConfigError(f"not a number: {s!r}") from exc
    if x < 1:
        raise ConfigError("X must be >= 1")
    return x


def _parse_xs(raw: str) -> List[Fraction]:
    xs = [_parse_number(p) for p in str(raw).split(",") if p.strip()]
    if not xs:
        raise ConfigError("empty X list")
    return xs


def build_config(args: argparse.Namespace) -> RunConfig:
    merged: Dict[str, object] = {}
    if args.config:
        merged.update(read_config_file(args.config))
    for key, value in vars(args).items():
        if key in ("command", "config", "verbose") or value is None:
            continue
        merged[key] = value
    try:
        if "partition" not in merged:
            raise ConfigError("a partition is required")
        part = tuple(int(p) for p in str(merged["partition"]).split(",") if p.strip())
        if not part or any(d < 1 for d in part):
            raise ConfigError("partition parts must be positive integers")
        n = int(merged.get("n", sum(part)))
        if sum(part) != n:
            raise ConfigError(f"partition {','.join(map(str, part))} does not sum to n={n}")
        height = HeightKind.parse(merged.get("height", "inf"))
        if "X" in merged and "Xs" in merged:
            raise ConfigError("give X or Xs, not both")
        raw_x = merged.get("Xs", merged.get("X"))
        if args.command != "predict" and raw_x is None:
            raise ConfigError("an X or Xs value is required")
        xs = _parse_xs(raw_x) if raw_x is not None else []
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ConfigError("Xs must be strictly increasing")
        cfg = RunConfig(
            n=n,
            partition=part,
            height=height,
            Xs=xs,
            out=Path(merged["out"]) if merged.get("out") else None,
            cache_dir=Path(merged["cache"]) if merged.get("cache") else None,
            use_cache=not _parse_bool(merged.get("no_cache", False)),
            workers=int(merged.get("workers", 1)),
            emit_shapes=_parse_bool(merged.get("emit_shapes", False)),
            emit_directions=_parse_bool(merged.get("emit_directions", False)),
            order=str(merged.get("order", "auto")),
            exponent_tol=float(merged.get("exponent_tol", 0.15)),
            ratio_tol=float(merged["ratio_tol"]) if merged.get("ratio_tol") is not None else None,
            cells=int(merged["cells"]) if merged.get("cells") is not None else None,
            target=str(merged.get("target", "shape")),
            block=int(merged["block"]) if merged.get("block") is not None else None,
        )
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    if cfg.workers < 1:
        raise ConfigError("workers must be >= 1")
    if cfg.order not in ("auto", "top-down", "bottom-up"):
        raise ConfigError("order must be auto, top-down or bottom-up")
    if cfg.target not in ("shape", "direction"):
        raise ConfigError("target must be shape or direction")
    return cfg


# ---------------------------------------------------------------- commands

def _summary_path(out: Path) -> Path:
    return out.with_name(out.name + ".summary.json")


def _write_json(path: Optional[Path], payload) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if path is None:
        print(text)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    partial = path.with_name(path.name + ".partial")
    partial.write_text(text + "\n")
    partial.replace(path)


def cmd_enumerate(cfg: RunConfig) -> int:
    job = cfg.job(cfg.X)
    extras = cfg.emit_shapes or cfg.emit_directions
    summary = {
        "partition": list(cfg.partition),
        "n": cfg.n,
        "height": cfg.height.value,
        "bound": frac_str(job.bound_sq),
        "fingerprint": fingerprint(job),
    }
    cache = Cache(cfg.cache_dir or default_cache_dir()) if cfg.use_cache else None
    entry = cache.lookup(job) if cache else None
    if entry is not None:
        log.info("cache hit %s", entry.fingerprint[:12])
    elif cache is not None:
        log.info("cache miss, enumerating")
        entry = cache.store(job, enumerate_flags(job, order=cfg.order, workers=cfg.workers))
    if entry is not None:
        summary.update(count=entry.count, level_counts=entry.level_counts, cached_jsonl=entry.jsonl_path)
        if cfg.out is not None:
            if extras:
                write_flags(cfg.out, read_flags(entry.jsonl_path), cfg.emit_shapes, cfg.emit_directions)
            else:
                partial = cfg.out.with_name(cfg.out.name + ".partial")
                cfg.out.parent.mkdir(parents=True, exist_ok=True)
                shutil.copyfile(entry.jsonl_path, partial)
                partial.replace(cfg.out)
    elif cfg.out is not None:
        stats = write_flags(cfg.out, enumerate_flags(job, order=cfg.order, workers=cfg.workers),
                            cfg.emit_shapes, cfg.emit_directions)
        summary.update(count=stats.count, level_counts=stats.level_counts)
    else:
        summary.update(count=count_flags(job, order=cfg.order, workers=cfg.workers))
    _write_json(_summary_path(cfg.out) if cfg.out else None, summary)
    return EXIT_OK


def cmd_predict(cfg: RunConfig) -> int:
    pred = predict(cfg.partition, cfg.height)
    if not cfg.Xs:
        payload = pred.as_dict()
    elif len(cfg.Xs) == 1:
        payload = pred.as_dict(cfg.Xs[0])
    else:
        payload = [pred.as_dict(X) for X in cfg.Xs]
    _write_json(cfg.out, payload)
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    records = ratio_table(cfg.partition, cfg.height, cfg.Xs, order=cfg.order, workers=cfg.workers)
    target = height_exponent(cfg.partition, cfg.height)
    fit = fit_exponent(records) if len(records) >= 3 else None
    ratio_tol = cfg.ratio_tol if cfg.ratio_tol is not None else DEFAULT_RATIO_TOL[cfg.height]
    ratio_ok = abs(records[-1].ratio - 1.0) <= ratio_tol
    exponent_ok = True
    if fit is not None and cfg.height is HeightKind.INF:
        exponent_ok = abs(fit.slope - target) <= cfg.exponent_tol
    passed = ratio_ok and exponent_ok
    rows = [
        {
            "X": float(r.X),
            "count": r.count,
            "predicted": r.predicted,
            "ratio": r.ratio,
            "fitted_exponent": fit.slope if fit else "",
            "target_exponent": target,
        }
        for r in records
    ]
    summary = {
        "partition": list(cfg.partition),
        "height": cfg.height.value,
        "fitted_exponent": fit.slope if fit else None,
        "target_exponent": target,
        "final_ratio": records[-1].ratio,
        "ratio_tol": ratio_tol,
        "exponent_tol": cfg.exponent_tol,
        "pass": passed,
    }
    if cfg.out is not None:
        _write_csv(cfg.out, rows)
        _write_json(_summary_path(cfg.out), summary)
    else:
        _write_csv(None, rows)
        print(json.dumps(summary, sort_keys=True))
    return EXIT_OK if passed else EXIT_TOLERANCE


def _write_csv(path: Optional[Path], rows: List[dict]) -> None:
    if not rows:
        return
    if path is None:
        w = csv.DictWriter(sys.stdout, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    partial = path.with_name(path.name + ".partial")
    with open(partial, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    partial.replace(path)


def _pick_block(cfg: RunConfig) -> int:
    """0-based index of the block (shape) or member (direction) to test."""
    if cfg.block is not None:
        idx = cfg.block - 1
        if not 0 <= idx < len(cfg.partition):
            raise ConfigError("block out of range")
        return idx
    if cfg.target == "shape":
        for i, d in enumerate(cfg.partition):
            if d == 2:
                return i
        raise ConfigError("shape test needs a block of size 2")
    if cfg.partition[0] != 1:
        raise ConfigError("direction test needs a first block of size 1")
    return 0


def cmd_equidist(cfg: RunConfig) -> int:
    job = cfg.job(cfg.X)
    idx = _pick_block(cfg)
    if cfg.target == "shape":
        if cfg.partition[idx] != 2:
            raise ConfigError("shape test needs a block of size 2")
        cells = modular_cells(cfg.cells or 10)
        obs = [cells.classifier(shape_vector(f)[idx].point) for f in enumerate_flags(job, order=cfg.order)]
    else:
        if cfg.n not in (2, 3):
            raise ConfigError("direction cells are only available for n = 2, 3")
        if idx != 0 or cfg.partition[0] != 1:
            raise ConfigError("direction test needs the first member to have rank 1")
        cells = sphere_cap_cells(cfg.n, cfg.cells or 8)
        obs = [cells.classifier(direction(f)[0].unit) for f in enumerate_flags(job, order=cfg.order)]
    try:
        res = chi_square_uniform(cells, obs)
    except CellsTooFine as exc:
        raise ConfigError(str(exc)) from exc
    rows = [
        {"cell_id": i, "mass": m, "observed": o, "expected": e, "contribution": c}
        for i, (m, o, e, c) in enumerate(zip(cells.masses, res.observed, res.expected, res.contributions()))
    ]
    summary = {"statistic": res.statistic, "threshold_99": res.threshold_99, "pass": res.passed,
               "flags": len(obs)}
    if cfg.out is not None:
        _write_csv(cfg.out, rows)
        _write_json(_summary_path(cfg.out), summary)
    else:
        _write_csv(None, rows)
        print(json.dumps(summary, sort_keys=True))
    return EXIT_OK if res.passed else EXIT_TOLERANCE


COMMANDS = {
    "enumerate": cmd_enumerate,
    "predict": cmd_predict,
    "verify": cmd_verify,
    "equidist": cmd_equidist,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flagcount", description="Count flags of primitive lattices by height.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat key = value file; flags override it")
        p.add_argument("--n", type=int)
        p.add_argument("--partition", help="comma-separated block sizes, e.g. 1,2")
        p.add_argument("--height", choices=["inf", "ac"])
        xs = p.add_mutually_exclusive_group()
        xs.add_argument("--X", dest="X", help="height bound (integer, decimal or p/q)")
        xs.add_argument("--Xs", dest="Xs", help="comma-separated increasing bounds")
        p.add_argument("--out", help="output path (JSONL for enumerate, CSV for verify/equidist)")
        p.add_argument("--cache", help="cache directory (default: $FLAGCOUNT_CACHE or ~/.cache/flagcount)")
        p.add_argument("--no-cache", dest="no_cache", action="store_const", const=True)
        p.add_argument("--workers", type=int)
        p.add_argument("--order", choices=["auto", "top-down", "bottom-up"])
        p.add_argument("--emit-shapes", dest="emit_shapes", action="store_const", const=True)
        p.add_argument("--emit-directions", dest="emit_directions", action="store_const", const=True)
        p.add_argument("--exponent-tol", dest="exponent_tol", type=float)
        p.add_argument("--ratio-tol", dest="ratio_tol", type=float)
        p.add_argument("--cells", type=int, help="number of cells for equidist")
        p.add_argument("--target", choices=["shape", "direction"])
        p.add_argument("--block", type=int, help="1-based block index for equidist")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(name)s: %(message)s")
    try:
        cfg = build_config(args)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"flagcount: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error")
        print(f"flagcount: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
