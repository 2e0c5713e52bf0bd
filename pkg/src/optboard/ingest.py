"""Disk ingestion: converters, content hashing, and live refresh.

A converter turns an on-disk run directory into a :class:`~optboard.model.Run`.
The reference "native" format is line-appendable so running optimizers and the
reader never contend on rewrites:

    manifest.json  -- meta, objectives, budgets, space (written once)
    configs.jsonl  -- one JSON object per configuration line
    trials.jsonl   -- one JSON object per trial line

Change detection hashes the sorted file list plus every file's bytes; refresh
reloads only when the digest moved and never evicts a served run on failure.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from .model import (
    Condition,
    Configuration,
    ConfigurationSpace,
    Direction,
    Hyperparameter,
    Kind,
    Objective,
    Run,
    Status,
    Trial,
    ValidationError,
    validate_config,
)

logger = logging.getLogger(__name__)

__all__ = [
    "IngestError",
    "UnsupportedFormatError",
    "ConverterDescriptor",
    "RunSource",
    "RefreshResult",
    "register_converter",
    "registered_formats",
    "get_converter",
    "detect_format",
    "compute_hash",
    "load_run",
    "refresh",
    "write_native",
    "parse_config_line",
]


class IngestError(ValueError):
    """Run data on disk could not be parsed."""


class UnsupportedFormatError(IngestError):
    """No registered converter recognizes the directory."""


@dataclass(frozen=True)
class ConverterDescriptor:
    """A named format: a cheap detect predicate plus a full loader."""

    format_name: str
    detect: Callable[[Path], bool]
    load: Callable[[Path], Run]


@dataclass
class RunSource:
    """Tracks one watched run directory and its last successfully loaded state."""

    path: Path
    format_name: str
    last_hash: str = ""
    last_loaded: float = 0.0


@dataclass(frozen=True)
class RefreshResult:
    kind: str  # "unchanged" | "reloaded" | "failed"
    run: Run | None = None
    error: str | None = None


# ---------------------------------------------------------------------------
# Converter registry (registration order = detection priority)
# ---------------------------------------------------------------------------

_CONVERTERS: list[ConverterDescriptor] = []


def register_converter(descriptor: ConverterDescriptor) -> None:
    if any(c.format_name == descriptor.format_name for c in _CONVERTERS):
        raise ValueError(f"converter {descriptor.format_name!r} already registered")
    _CONVERTERS.append(descriptor)


def registered_formats() -> list[str]:
    return [c.format_name for c in _CONVERTERS]


def get_converter(format_name: str) -> ConverterDescriptor:
    for c in _CONVERTERS:
        if c.format_name == format_name:
            return c
    raise UnsupportedFormatError(
        f"unknown format {format_name!r}; registered formats: {registered_formats()}"
    )


def detect_format(path: Path | str) -> str:
    """Name of the first registered converter whose detect predicate passes."""
    path = Path(path)
    if not path.is_dir():
        raise IngestError(f"{path}: not a readable directory")
    for c in _CONVERTERS:
        if c.detect(path):
            return c.format_name
    raise UnsupportedFormatError(
        f"{path}: unsupported format; registered formats: {registered_formats()}"
    )


def compute_hash(path: Path | str) -> str:
    """Digest over the sorted relative file list and each file's bytes.

    Any byte change, rename, addition, or removal changes the digest;
    directory listing order does not.
    """
    path = Path(path)
    digest = hashlib.sha256()
    files = sorted(p for p in path.rglob("*") if p.is_file())
    for p in files:
        rel = p.relative_to(path).as_posix()
        try:
            data = p.read_bytes()
        except OSError as exc:
            raise IngestError(f"cannot read {p}: {exc}") from exc
        digest.update(rel.encode("utf-8"))
        digest.update(b"\0")
        digest.update(str(len(data)).encode("ascii"))
        digest.update(b"\0")
        digest.update(data)
    return digest.hexdigest()


def load_run(path: Path | str, format_name: str | None = None) -> Run:
    """Load a run directory via its (detected or named) converter."""
    path = Path(path)
    name = format_name or detect_format(path)
    run = get_converter(name).load(path)
    return run


def refresh(source: RunSource) -> RefreshResult:
    """Reload a source when its content hash moved.

    A parse failure (e.g. mid-write) leaves ``last_hash`` untouched so the
    previously loaded run stays served and the next poll retries.
    """
    try:
        current = compute_hash(source.path)
    except IngestError as exc:
        return RefreshResult(kind="failed", error=str(exc))
    if current == source.last_hash:
        return RefreshResult(kind="unchanged")
    try:
        run = load_run(source.path, source.format_name)
    except (IngestError, ValidationError) as exc:
        logger.warning("refresh of %s failed: %s", source.path, exc)
        return RefreshResult(kind="failed", error=str(exc))
    # record the pre-load digest: bytes appended while loading then show up
    # as a fresh change on the next poll instead of being skipped
    source.last_hash = current
    source.last_loaded = time.time()
    return RefreshResult(kind="reloaded", run=run)


# ---------------------------------------------------------------------------
# Native format
# ---------------------------------------------------------------------------

_STATUS_TOKENS = {
    "success": Status.SUCCESS,
    "crashed": Status.CRASHED,
    "timeout": Status.TIMEOUT,
    "memout": Status.MEMOUT,
    "running": Status.RUNNING,
}

_KIND_TOKENS = {k.value: k for k in Kind}


def _reject_constant(token: str) -> None:
    raise IngestError(f"non-finite number {token!r} is not allowed")


def _loads(text: str) -> Any:
    return json.loads(text, parse_constant=_reject_constant)


def _detect_native(path: Path) -> bool:
    return (path / "manifest.json").is_file() and (path / "trials.jsonl").is_file()


def _parse_space(raw: dict) -> ConfigurationSpace:
    hps = []
    for h in raw.get("hyperparameters", []):
        try:
            kind = _KIND_TOKENS[h["kind"]]
        except KeyError as exc:
            raise IngestError(f"hyperparameter {h.get('name')!r}: bad kind {h.get('kind')!r}") from exc
        cond = None
        if h.get("condition") is not None:
            cond = Condition(
                parent=h["condition"]["parent"],
                values=tuple(h["condition"]["values"]),
            )
        hps.append(
            Hyperparameter(
                name=h["name"],
                kind=kind,
                lower=h.get("lower"),
                upper=h.get("upper"),
                log_scale=bool(h.get("log", False)),
                choices=tuple(h["choices"]) if h.get("choices") is not None else None,
                default=h.get("default"),
                condition=cond,
            )
        )
    return ConfigurationSpace(hyperparameters=tuple(hps))


def parse_config_line(line: str) -> tuple[int, Configuration]:
    """Parse one configs.jsonl line into (id, Configuration)."""
    obj = _loads(line)
    if not isinstance(obj, dict) or "id" not in obj or "values" not in obj:
        raise IngestError("config line needs 'id' and 'values'")
    return int(obj["id"]), Configuration(values=dict(obj["values"]))


def _parse_trial_line(line: str, n_objectives: int) -> Trial:
    obj = _loads(line)
    status_token = obj.get("status")
    if status_token not in _STATUS_TOKENS:
        raise IngestError(f"bad status {status_token!r}")
    status = _STATUS_TOKENS[status_token]
    costs = obj.get("costs")
    if status is Status.SUCCESS:
        if not isinstance(costs, list) or len(costs) != n_objectives:
            raise IngestError("success trial needs one cost per objective")
        if any(not isinstance(c, (int, float)) or not math.isfinite(c) for c in costs):
            raise IngestError("costs must be finite numbers")
        cost_vec: tuple[float, ...] | None = tuple(float(c) for c in costs)
    else:
        if costs is not None:
            raise IngestError(f"{status_token} trial must have null costs")
        cost_vec = None
    return Trial(
        config_id=int(obj["config_id"]),
        budget=float(obj["budget"]),
        costs=cost_vec,
        status=status,
        start=float(obj.get("start", 0.0)),
        end=float(obj["end"]) if obj.get("end") is not None else None,
        additional=dict(obj.get("additional") or {}),
    )


def _read_jsonl(path: Path, parse: Callable[[str], Any], warnings: list[str]) -> list[Any]:
    """Parse a .jsonl file, tolerating one half-written trailing line."""
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    out: list[Any] = []
    for i, line in enumerate(lines):
        if line.strip() == "":
            continue
        try:
            out.append(parse(line))
        except (IngestError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            if i == len(lines) - 1:
                warnings.append(f"{path.name}: dropped half-written trailing line {i + 1}")
                logger.warning("%s: dropped trailing line %d (%s)", path, i + 1, exc)
                break
            raise IngestError(f"{path.name} line {i + 1}: {exc}") from exc
    return out


def _load_native(path: Path) -> Run:
    manifest_path = path / "manifest.json"
    try:
        manifest = _loads(manifest_path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise IngestError(f"cannot read {manifest_path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise IngestError(f"{manifest_path.name}: {exc}") from exc

    objectives = []
    for o in manifest.get("objectives", []):
        try:
            direction = Direction(o.get("direction", "minimize"))
        except ValueError as exc:
            raise IngestError(f"objective {o.get('name')!r}: bad direction") from exc
        objectives.append(
            Objective(
                name=o["name"],
                direction=direction,
                lower=o.get("lower"),
                upper=o.get("upper"),
            )
        )
    space = _parse_space(manifest.get("space", {}))
    budgets = tuple(float(b) for b in manifest.get("budgets", []))

    warnings: list[str] = []
    configs_path = path / "configs.jsonl"
    config_rows: list[tuple[int, Configuration]] = []
    if configs_path.is_file():
        config_rows = _read_jsonl(configs_path, parse_config_line, warnings)
    configs: list[Configuration] = []
    for row_idx, (cid, config) in enumerate(config_rows):
        if cid != row_idx:
            raise IngestError(f"configs.jsonl line {row_idx + 1}: id {cid} != row {row_idx}")
        try:
            validate_config(config, space)
        except ValidationError as exc:
            raise IngestError(f"configs.jsonl line {row_idx + 1}: {exc}") from exc
        configs.append(config)

    n_obj = len(objectives)
    trials = _read_jsonl(
        path / "trials.jsonl", lambda line: _parse_trial_line(line, n_obj), warnings
    )

    meta = dict(manifest.get("meta", {}))
    if warnings:
        # Half-written tails are expected while an optimizer is mid-append.
        meta["load_warnings"] = warnings
    mtimes = [p.stat().st_mtime for p in path.rglob("*") if p.is_file()]
    try:
        return Run(
            id=path.name,
            meta=meta,
            space=space,
            objectives=tuple(objectives),
            budgets=budgets,
            configs=tuple(configs),
            trials=tuple(trials),
            content_hash=compute_hash(path),
            data_timestamp=max(mtimes) if mtimes else 0.0,
        )
    except ValidationError as exc:
        raise IngestError(str(exc)) from exc


def _hyperparameter_json(hp: Hyperparameter) -> dict:
    out: dict[str, Any] = {"name": hp.name, "kind": hp.kind.value}
    if hp.is_numeric:
        out["lower"] = hp.lower
        out["upper"] = hp.upper
        out["log"] = hp.log_scale
    else:
        out["choices"] = list(hp.choices)
    if hp.default is not None:
        out["default"] = hp.default
    if hp.condition is not None:
        out["condition"] = {
            "parent": hp.condition.parent,
            "values": list(hp.condition.values),
        }
    return out


def config_line(config_id: int, config: Configuration) -> str:
    """Canonical configs.jsonl line (sorted keys, compact separators)."""
    return json.dumps(
        {"id": config_id, "values": dict(config.values)},
        sort_keys=True,
        separators=(",", ":"),
    )


def write_native(run: Run, out_dir: Path | str) -> None:
    """Write a run as a native-format directory in canonical form.

    Canonical form is a fixed point: loading and re-writing an already
    canonical directory reproduces it byte for byte.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "version": 1,
        "meta": {k: v for k, v in run.meta.items() if k != "load_warnings"},
        "objectives": [
            {
                "name": o.name,
                "direction": o.direction.value,
                "lower": o.lower,
                "upper": o.upper,
            }
            for o in run.objectives
        ],
        "budgets": list(run.budgets),
        "space": {
            "hyperparameters": [_hyperparameter_json(hp) for hp in run.space.hyperparameters]
        },
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    with (out / "configs.jsonl").open("w", encoding="utf-8") as fh:
        for cid, config in enumerate(run.configs):
            fh.write(config_line(cid, config) + "\n")
    with (out / "trials.jsonl").open("w", encoding="utf-8") as fh:
        for t in run.trials:
            fh.write(
                json.dumps(
                    {
                        "config_id": t.config_id,
                        "budget": t.budget,
                        "costs": list(t.costs) if t.costs is not None else None,
                        "status": t.status.value,
                        "start": t.start,
                        "end": t.end,
                        "additional": dict(t.additional),
                    },
                    sort_keys=True,
                    separators=(",", ":"),
                )
                + "\n"
            )


register_converter(
    ConverterDescriptor(format_name="native", detect=_detect_native, load=_load_native)
)
