"""Configuration-driven randomized verification campaigns.

A campaign is the product of theorem ids, function specs, map specs, and
dimensions.  Every cell draws ``instances_per_cell`` fresh instances, builds
the registered chain, and aggregates link verdicts.  Instance streams are
keyed by ``(seed, cell_index, instance_index)``, and reports are serialized
canonically (sorted keys, 17-significant-digit floats), so identical
configurations produce byte-identical reports at any parallelism degree.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from . import __version__
from .errors import ConfigError, IoError, LoewnerLabError, SpecParseError
from .chains import (
    THEOREMS,
    build_chain,
    evaluate_chain,
    needs_nonneg_instances,
    resolve_theorem,
    sample_instance_for,
)
from .functions import parse_function_spec
from .maps import parse_family_spec, sample_map
from .seeding import spawn_rng
from .serialize import dumps_canonical

_NO_MAP_LABEL = "-"


@dataclass(frozen=True)
class CampaignConfig:
    theorem_ids: tuple
    function_specs: tuple
    map_specs: tuple
    dims: tuple
    mm_ranges: tuple
    instances_per_cell: int
    tol: float
    seed: int

    _FIELDS = ("theorem_ids", "function_specs", "map_specs", "dims", "mm_ranges",
               "instances_per_cell", "tol", "seed")

    @classmethod
    def from_dict(cls, obj: dict) -> "CampaignConfig":
        if not isinstance(obj, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(obj) - set(cls._FIELDS)
        if unknown:
            raise ConfigError(f"unknown config field(s): {', '.join(sorted(unknown))}")
        missing = [k for k in cls._FIELDS if k not in obj and k != "seed"]
        if missing:
            raise ConfigError(f"missing config field(s): {', '.join(missing)}")
        cfg = cls(
            theorem_ids=tuple(str(t) for t in _require_list(obj, "theorem_ids")),
            function_specs=tuple(str(s) for s in _require_list(obj, "function_specs")),
            map_specs=tuple(str(s) for s in _require_list(obj, "map_specs")),
            dims=tuple(obj["dims"]) if isinstance(obj.get("dims"), (list, tuple)) else _bad("dims"),
            mm_ranges=tuple(tuple(r) for r in _require_list(obj, "mm_ranges")),
            instances_per_cell=obj["instances_per_cell"],
            tol=obj["tol"],
            seed=int(obj.get("seed", 0)),
        )
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if not self.theorem_ids:
            raise ConfigError("theorem_ids: must be non-empty")
        for t in self.theorem_ids:
            if str(t).upper() not in THEOREMS:
                raise ConfigError(f"theorem_ids: unknown id {t!r}")
        if not self.function_specs:
            raise ConfigError("function_specs: must be non-empty")
        for s in self.function_specs:
            try:
                parse_function_spec(s)
            except SpecParseError as exc:
                raise ConfigError(f"function_specs: {exc}") from None
        if not self.map_specs:
            raise ConfigError("map_specs: must be non-empty")
        if not self.dims:
            raise ConfigError("dims: must be non-empty")
        for d in self.dims:
            if not isinstance(d, int) or d < 1:
                raise ConfigError(f"dims: entries must be integers >= 1, got {d!r}")
        if not self.mm_ranges:
            raise ConfigError("mm_ranges: must be non-empty")
        for r in self.mm_ranges:
            if len(r) != 2 or not all(isinstance(x, (int, float)) for x in r) or r[0] >= r[1]:
                raise ConfigError(f"mm_ranges: each range must be [lo, hi] with lo < hi, got {r!r}")
        if not isinstance(self.instances_per_cell, int) or self.instances_per_cell < 1:
            raise ConfigError(
                f"instances_per_cell: must be an integer >= 1, got {self.instances_per_cell!r}"
            )
        if not isinstance(self.tol, (int, float)) or self.tol <= 0:
            raise ConfigError(f"tol: must be > 0, got {self.tol!r}")

    def to_dict(self) -> dict:
        return {
            "theorem_ids": list(self.theorem_ids),
            "function_specs": list(self.function_specs),
            "map_specs": list(self.map_specs),
            "dims": [int(d) for d in self.dims],
            "mm_ranges": [[float(lo), float(hi)] for lo, hi in self.mm_ranges],
            "instances_per_cell": int(self.instances_per_cell),
            "tol": float(self.tol),
            "seed": int(self.seed),
        }


def _require_list(obj, key):
    v = obj.get(key)
    if not isinstance(v, (list, tuple)):
        raise ConfigError(f"{key}: must be a list")
    return v


def _bad(key):
    raise ConfigError(f"{key}: must be a list")


@dataclass(frozen=True)
class CellResult:
    theorem: str
    function: str
    map_spec: str
    dim: int
    skipped: bool = False
    skip_reason: str = ""
    pass_count: int = 0
    fail_count: int = 0
    min_link_eigenvalue: float | None = None
    equality_links: int = 0
    failing: tuple = ()

    def to_dict(self) -> dict:
        out = {
            "theorem": self.theorem,
            "function": self.function,
            "map": self.map_spec,
            "dim": int(self.dim),
            "pass_count": int(self.pass_count),
            "fail_count": int(self.fail_count),
            "equality_links": int(self.equality_links),
            "min_link_eigenvalue": self.min_link_eigenvalue,
            "failing": list(self.failing),
        }
        if self.skipped:
            out["skipped"] = True
            out["reason"] = self.skip_reason
        return out


@dataclass(frozen=True)
class CampaignReport:
    config: CampaignConfig
    cells: tuple
    verdict: str
    seed: int
    version: str = __version__

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "cells": [c.to_dict() for c in self.cells],
            "verdict": self.verdict,
            "seed": int(self.seed),
            "version": self.version,
        }


# ---------------------------------------------------------------------------
# Cell planning
# ---------------------------------------------------------------------------


def _cell_skip_reason(spec, f, map_spec: str, dim: int, ranges) -> str | None:
    if spec.required_class not in f.classes:
        return "function class mismatch"
    if spec.power_predicate is not None:
        p = f.params.get("p")
        if p is None or not spec.power_predicate(p):
            return f"function is not {spec.power_description}"
    if spec.map_mode == "single":
        if map_spec.startswith("family"):
            return "needs a single map, not a family"
        if map_spec.startswith("compression:"):
            try:
                k = int(map_spec.split("=", 1)[1])
            except (IndexError, ValueError):
                return f"bad map spec {map_spec!r}"
            if k > dim:
                return f"compression k={k} exceeds dim {dim}"
    elif spec.map_mode == "family":
        if not map_spec.startswith("family"):
            return "needs a map family"
        try:
            parse_family_spec(map_spec)
        except SpecParseError as exc:
            return str(exc)
    if not _compatible_ranges(spec, f, ranges):
        return "no compatible (m, M) range for this function"
    return None


def _compatible_ranges(spec, f, ranges):
    need_positive = needs_nonneg_instances(spec, f)
    return [r for r in ranges if (not need_positive or r[0] > 0.0)]


def _draw_mm(rng, lo: float, hi: float) -> tuple[float, float]:
    """m in the lower 40% of the range, M at least 0.3 widths above it."""
    width = hi - lo
    m = lo + 0.4 * width * float(rng.random())
    floor = m + 0.3 * width
    big_m = floor + (hi - floor) * float(rng.random())
    return m, big_m


def _run_cell(config: CampaignConfig, cell_index: int, theorem_id: str,
              f_spec: str, map_spec: str, dim: int) -> CellResult:
    spec = resolve_theorem(theorem_id)
    f = parse_function_spec(f_spec)
    reason = _cell_skip_reason(spec, f, map_spec, dim, config.mm_ranges)
    label = _NO_MAP_LABEL if spec.map_mode == "none" else map_spec
    if reason is not None:
        return CellResult(theorem=spec.id, function=f_spec, map_spec=label, dim=dim,
                          skipped=True, skip_reason=reason)
    ranges = _compatible_ranges(spec, f, config.mm_ranges)
    family_size = parse_family_spec(map_spec) if spec.map_mode == "family" else 3

    passes = fails = equalities = 0
    min_eig: float | None = None
    failing: list[str] = []
    for i in range(config.instances_per_cell):
        rng = spawn_rng(config.seed, cell_index, i)
        lo, hi = ranges[i % len(ranges)]
        m, big_m = _draw_mm(rng, float(lo), float(hi))
        try:
            inst = sample_instance_for(spec, f, dim, m, big_m, rng,
                                       family_size=family_size)
            maps = sample_map(map_spec, dim, rng) if spec.map_mode == "single" else None
            chain = build_chain(spec.id, inst, f, maps, tol=config.tol)
            report = evaluate_chain(chain, config.tol, seed=config.seed)
        except LoewnerLabError as exc:
            fails += 1
            if len(failing) < 5:
                failing.append(f"error:{type(exc).__name__}:{exc}")
            continue
        cell_min = report.min_link_eigenvalue
        min_eig = cell_min if min_eig is None else min(min_eig, cell_min)
        equalities += report.equality_links
        if report.passed:
            passes += 1
        else:
            fails += 1
            if len(failing) < 5:
                failing.append(report.instance_digest)
    return CellResult(
        theorem=spec.id, function=f_spec, map_spec=label, dim=dim,
        pass_count=passes, fail_count=fails,
        min_link_eigenvalue=min_eig, equality_links=equalities,
        failing=tuple(failing),
    )


def plan_cells(config: CampaignConfig):
    """The cell grid in deterministic order.  Theorems that use no map are
    paired with the placeholder map label once instead of once per spec."""
    cells = []
    for t in config.theorem_ids:
        spec = resolve_theorem(t)
        map_axis = config.map_specs if spec.map_mode != "none" else config.map_specs[:1]
        for f_spec in config.function_specs:
            for map_spec in map_axis:
                for dim in config.dims:
                    cells.append((spec.id, f_spec, map_spec, int(dim)))
    return cells


def run_campaign(config: CampaignConfig, jobs: int = 1) -> CampaignReport:
    """Execute every cell; deterministic in (config, seed) regardless of
    ``jobs`` because each instance owns a counter-keyed stream and results
    are merged in cell order."""
    config.validate()
    cells = plan_cells(config)
    if jobs <= 1:
        results = [
            _run_cell(config, idx, *cell) for idx, cell in enumerate(cells)
        ]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(_run_cell, config, idx, *cell)
                for idx, cell in enumerate(cells)
            ]
            results = [fut.result() for fut in futures]
    any_fail = any(c.fail_count > 0 for c in results)
    return CampaignReport(
        config=config,
        cells=tuple(results),
        verdict="fail" if any_fail else "pass",
        seed=config.seed,
    )


def emit_report(report: CampaignReport, path) -> None:
    """Write the canonical JSON report; raises IoError on unwritable paths."""
    text = dumps_canonical(report.to_dict()) + "\n"
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write report to {path}: {exc}") from exc
