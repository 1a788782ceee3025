"""Whole-corpus generation over a worker pool.

Every task writes exactly one file whose bytes depend only on the index and
the config, so the corpus is identical for any worker count or scheduling.
"""

from __future__ import annotations

import logging
import multiprocessing as mp
import os
import re
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .census_index import CountryIndex, CountyNode, StateNode
from .colormap import ColorScheme, NormalizationMode, density_scale
from .errors import InvalidRecord, OutputRootUnwritable
from .kml import DEFAULT_FILL_ALPHA, KmlRenderSpec, document_name, emit_kml
from .xlsx import build_workbook, emit_xlsx

log = logging.getLogger(__name__)

KML_DIR = "GoogleEarth"
XLSX_DIR = "Excel"
_UNSAFE = re.compile(r"[^A-Za-z0-9_-]")

# index shared with forked workers (inherited, never pickled)
_SHARED: CountryIndex | None = None


@dataclass(frozen=True)
class GenerationConfig:
    output_root: Path
    workers: int = 1
    schemes: tuple[ColorScheme, ...] = tuple(ColorScheme)
    modes: tuple[NormalizationMode, ...] = tuple(NormalizationMode)
    fill_alpha: int = DEFAULT_FILL_ALPHA
    case_rate: float = 0.0
    emit_kml: bool = True
    emit_xlsx: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "output_root", Path(self.output_root))
        object.__setattr__(self, "schemes", tuple(self.schemes))
        object.__setattr__(self, "modes", tuple(self.modes))
        if self.workers < 1:
            raise InvalidRecord(f"workers must be >= 1, got {self.workers}")
        if not (self.emit_kml or self.emit_xlsx):
            raise InvalidRecord("at least one of emit_kml / emit_xlsx must be enabled")
        if self.emit_kml and not (self.schemes and self.modes):
            raise InvalidRecord("KML output needs at least one scheme and one mode")
        if not 0 <= self.fill_alpha <= 255:
            raise InvalidRecord(f"fill_alpha must be a byte, got {self.fill_alpha}")
        if not 0.0 <= self.case_rate <= 1.0:
            raise InvalidRecord(f"case_rate must be in [0, 1], got {self.case_rate}")


@dataclass(frozen=True)
class OutputTask:
    state_fp: int
    county_fp: int
    kind: str  # "kml" | "xlsx"
    scheme: ColorScheme | None
    mode: NormalizationMode | None
    path: str  # relative to output_root

    @property
    def county_geoid(self) -> str:
        return f"{self.state_fp:02d}{self.county_fp:03d}"


@dataclass
class GenerationReport:
    files_written: int = 0
    bytes_written: int = 0
    elapsed: float = 0.0
    per_county_failures: list[tuple[str, str]] = field(default_factory=list)
    tasks_planned: int = 0

    def summary(self) -> str:
        return (
            f"files_written={self.files_written} bytes_written={self.bytes_written} "
            f"failures={len(self.per_county_failures)} elapsed_s={self.elapsed:.3f}"
        )


def sanitize(name: str) -> str:
    return _UNSAFE.sub("_", name)


def _county_stem(state: StateNode, county: CountyNode) -> str:
    stem = sanitize(county.name) or county.geoid
    clash = sum(1 for c in state.counties if (sanitize(c.name) or c.geoid) == stem)
    if clash > 1:
        stem = f"{stem}_{county.county_fp:03d}"
    return stem


def layout_path(
    state: StateNode,
    county: CountyNode,
    kind: str,
    scheme: ColorScheme | None = None,
    mode: NormalizationMode | None = None,
) -> str:
    """Relative output path, e.g. ``GoogleEarth/Massachusetts/Middlesex_jet_relative.kml``."""
    state_dir = sanitize(state.name) or f"{state.state_fp:02d}"
    stem = _county_stem(state, county)
    if kind == "kml":
        if scheme is None or mode is None:
            raise ValueError("KML paths need a scheme and a mode")
        return f"{KML_DIR}/{state_dir}/{stem}_{scheme.value}_{mode.value}.kml"
    if kind == "xlsx":
        return f"{XLSX_DIR}/{state_dir}/{stem}.xlsx"
    raise ValueError(f"unknown artifact kind {kind!r}")


def plan_outputs(index: CountryIndex, cfg: GenerationConfig) -> list[OutputTask]:
    # kind order: kml before xlsx; schemes/modes in enum declaration order
    schemes = [s for s in ColorScheme if s in cfg.schemes]
    modes = [m for m in NormalizationMode if m in cfg.modes]
    tasks = []
    for st, co in index.iter_counties():
        if cfg.emit_kml:
            for s in schemes:
                for m in modes:
                    tasks.append(OutputTask(st.state_fp, co.county_fp, "kml", s, m,
                                            layout_path(st, co, "kml", s, m)))
        if cfg.emit_xlsx:
            tasks.append(OutputTask(st.state_fp, co.county_fp, "xlsx", None, None,
                                    layout_path(st, co, "xlsx")))
    return tasks


def render_task(index: CountryIndex, task: OutputTask, cfg: GenerationConfig) -> bytes:
    st = index.state(task.state_fp)
    co = index.county(task.state_fp, task.county_fp)
    if task.kind == "kml":
        spec = KmlRenderSpec(
            county=co,
            scheme=task.scheme,
            scale=density_scale(index, co, task.mode),
            fill_alpha=cfg.fill_alpha,
            document_name=document_name(st.name, co.name, task.scheme, task.mode),
        )
        return emit_kml(spec)
    return emit_xlsx(build_workbook(co, case_rate=cfg.case_rate))


def atomic_write(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def _run_one(index: CountryIndex, task: OutputTask, cfg: GenerationConfig):
    try:
        data = render_task(index, task, cfg)
        atomic_write(cfg.output_root / task.path, data)
        return task, len(data), None
    except Exception as exc:  # one bad county must not abort the corpus
        return task, 0, f"{type(exc).__name__}: {exc}"


def _worker(args):
    task, cfg = args
    return _run_one(_SHARED, task, cfg)


def _init_worker(index: CountryIndex | None) -> None:
    global _SHARED
    if index is not None:
        _SHARED = index


def _check_root(root: Path) -> None:
    try:
        root.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(dir=root, prefix=".probe."):
            pass
    except OSError as exc:
        raise OutputRootUnwritable(f"cannot write to {root}: {exc}") from exc


def _executor(index: CountryIndex, workers: int) -> ProcessPoolExecutor:
    global _SHARED
    if "fork" in mp.get_all_start_methods():
        _SHARED = index
        return ProcessPoolExecutor(workers, mp_context=mp.get_context("fork"))
    return ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(index,))


def generate_all(index: CountryIndex, cfg: GenerationConfig) -> GenerationReport:
    """Render every planned file under ``cfg.output_root``; collect per-task errors."""
    global _SHARED
    start = time.perf_counter()
    _check_root(cfg.output_root)
    tasks = plan_outputs(index, cfg)
    report = GenerationReport(tasks_planned=len(tasks))

    if cfg.workers == 1 or len(tasks) <= 1:
        results: Iterable = (_run_one(index, t, cfg) for t in tasks)
        _collect(report, results)
    else:
        chunk = max(1, len(tasks) // (cfg.workers * 8))
        try:
            with _executor(index, cfg.workers) as pool:
                _collect(report, pool.map(_worker, [(t, cfg) for t in tasks], chunksize=chunk))
        finally:
            _SHARED = None

    report.elapsed = time.perf_counter() - start
    log.info("generated corpus: %s", report.summary())
    return report


def _collect(report: GenerationReport, results: Iterable) -> None:
    for task, nbytes, err in results:
        if err is None:
            report.files_written += 1
            report.bytes_written += nbytes
        else:
            log.warning("task %s failed: %s", task.path, err)
            report.per_county_failures.append((task.county_geoid, f"{task.path}: {err}"))
    report.per_county_failures.sort()
