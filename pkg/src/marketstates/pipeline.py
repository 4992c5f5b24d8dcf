"""End-to-end driver: prices in, similarity, tree, states and figures out."""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import asdict, dataclass, field, fields
from datetime import timedelta
from pathlib import Path

from . import io as fio
from . import plotting
from .cluster import ClusterConfig, build_tree, cut_to_states, state_timeline
from .corr import TWO_MONTHS, WindowSpec, average_matrix, correlation_windows
from .errors import MarketStatesError, MissingSectorError, StorageError, ValidationError
from .ingest import (
    SessionWindow,
    align_universe,
    compute_returns,
    format_instant,
    parse_instant,
    parse_price_table,
)
from .normalize import LocalNormConfig, normalize_panel
from .render import render_heatmap, render_tree
from .similarity import similarity_matrix
from .states import SectorMap, coefficient_histogram, diff_to_overall, sector_sort, state_average

log = logging.getLogger(__name__)

DAILY = "daily"
INTRADAY = "intraday"
STAGES = ("similarity", "cluster", "states", "hist")


@dataclass
class PipelineConfig:
    prices: str | None = None
    sectors: str | None = None
    output_dir: str = "out"
    mode: str = DAILY
    horizon: int | None = None  # observations (daily, 1) or minutes (intraday, 60)
    stride: int = 1
    session: str = "10:45-14:45"
    start: str | None = None
    end: str | None = None
    normalize: bool | None = None  # None: on for daily, off for intraday
    norm_n: int = 13
    window_length: int = TWO_MONTHS
    window_stride: int = 1
    window_mode: str = "disjoint"
    measure: str = "zeta"
    threshold: float = 0.1465
    max_kmeans_iter: int = 100
    init_policy: str = "farthest-pair"
    seed: int = 0
    bins: int = 40
    stages: list = field(default_factory=lambda: list(STAGES))

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except OSError as exc:
            raise StorageError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config {path} is not valid JSON: {exc}") from exc

    def validate(self):
        if self.mode not in (DAILY, INTRADAY):
            raise ValidationError(f"mode must be {DAILY!r} or {INTRADAY!r}")
        bad = set(self.stages) - set(STAGES)
        if bad:
            raise ValidationError(f"unknown stages: {', '.join(sorted(bad))}")
        if self.prices is None:
            raise ValidationError("no price table given")
        if not Path(self.prices).is_file():
            raise StorageError(f"price table {self.prices} does not exist")
        if "states" in self.stages:
            if self.sectors is None:
                raise MissingSectorError("the states stage needs a sector map")
            if not Path(self.sectors).is_file():
                raise StorageError(f"sector map {self.sectors} does not exist")
        if (self.horizon is not None and self.horizon < 1) or self.stride < 1:
            raise ValidationError("horizon and stride must be positive")
        self.window_spec()
        self.cluster_config()
        LocalNormConfig(self.norm_n)

    def window_spec(self) -> WindowSpec:
        return WindowSpec(self.window_length, self.window_stride, self.window_mode)

    def cluster_config(self) -> ClusterConfig:
        return ClusterConfig(self.threshold, self.max_kmeans_iter, self.init_policy, self.seed)

    @property
    def normalize_on(self) -> bool:
        return self.normalize if self.normalize is not None else self.mode == DAILY


class StageError(MarketStatesError):
    def __init__(self, stage, cause):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 1)


class _Outputs:
    """Tracks written files so a failed run can be rolled back."""

    def __init__(self, root: Path):
        self.root = root
        self.files: list[tuple[Path, str]] = []
        self.dirs: list[Path] = []

    def path(self, rel: str, kind: str) -> Path:
        p = self.root / rel
        for parent in reversed(p.relative_to(self.root).parents):
            d = self.root / parent
            if not d.exists():
                d.mkdir(parents=True)
                self.dirs.append(d)
        self.files.append((p, kind))
        return p

    def text(self, rel: str, kind: str, content: str) -> Path:
        p = self.path(rel, kind)
        p.write_text(content)
        return p

    def rollback(self):
        for p, _ in self.files:
            p.unlink(missing_ok=True)
        for d in reversed(self.dirs):
            if d.exists() and not any(d.iterdir()):
                d.rmdir()


def load_panel(cfg: PipelineConfig):
    with open(cfg.prices, newline="", encoding="utf-8") as fh:
        series = parse_price_table(fh)
    if cfg.mode == DAILY:
        returns = [compute_returns(s, cfg.horizon or 1, cfg.stride) for s in series]
    else:
        session = SessionWindow.parse(cfg.session)
        returns = [
            compute_returns(s, timedelta(minutes=cfg.horizon or 60), timedelta(minutes=cfg.stride), session)
            for s in series
        ]
    start = parse_instant(cfg.start) if cfg.start else None
    end = parse_instant(cfg.end) if cfg.end else None
    panel = align_universe(returns, start, end)
    if cfg.normalize_on:
        panel = normalize_panel(panel, LocalNormConfig(cfg.norm_n))
    return panel


def _write_windows_index(out: _Outputs, windows):
    p = out.path("windows.csv", "windows")
    with p.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "label_date", "window_start", "window_end", "sample_count"])
        for i, win in enumerate(windows):
            w.writerow(
                [i, format_instant(win.label_date), format_instant(win.window_start),
                 format_instant(win.window_end), win.sample_count]
            )


def run_pipeline(cfg: PipelineConfig) -> dict:
    """Run every requested stage and write a manifest with content hashes."""
    cfg.validate()
    root = Path(cfg.output_dir)
    try:
        root.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise StorageError(f"cannot create {root}: {exc}") from exc
    out = _Outputs(root)
    stage = "ingest"
    try:
        panel = load_panel(cfg)
        log.info("panel: %d symbols x %d timestamps", panel.K, panel.T)

        stage = "corr"
        windows = correlation_windows(panel, cfg.window_spec())
        labels = [w.label_date for w in windows]
        date_labels = [format_instant(d) for d in labels]
        _write_windows_index(out, windows)

        if "similarity" in cfg.stages:
            stage = "similarity"
            sim = similarity_matrix(windows, cfg.measure)
            fio.write_matrix_csv(sim, out.path("similarity.csv", "similarity"))
            out.text("similarity.svg", "figure", render_heatmap(sim, title=f"{cfg.measure} similarity"))

        mapping = None
        if "cluster" in cfg.stages or "states" in cfg.stages:
            stage = "cluster"
            full = ClusterConfig(0.0, cfg.max_kmeans_iter, cfg.init_policy, cfg.seed)
            root_node = build_tree(windows, full)
            cut = cut_to_states(root_node, cfg.threshold, labels)
            mapping = cut.mapping
            fio.write_json(fio.tree_to_dict(root_node, labels), out.path("tree.json", "tree"))
            out.text("tree.svg", "figure", render_tree(root_node, date_labels))
            seq = state_timeline(mapping, windows)
            fio.write_timeline_csv(seq, out.path("timeline.csv", "timeline"))
            plotting.plot_timeline(seq, out.path("timeline.svg", "figure"))
            log.info("%d windows in %d states", len(windows), cut.n_states)

        if "states" in cfg.stages:
            stage = "states"
            with open(cfg.sectors, newline="", encoding="utf-8") as fh:
                smap = SectorMap.read_csv(fh)
            overall = average_matrix(windows)
            sorted_overall, blocks = sector_sort(overall, smap)
            fio.write_matrix_csv(sorted_overall, out.path("states/overall_average.csv", "matrix"))
            out.text(
                "states/overall_average.svg", "figure",
                render_heatmap(sorted_overall, blocks=blocks, title="overall average"),
            )
            for sid, avg in state_average(mapping, windows).items():
                s_sorted, _ = sector_sort(avg, smap)
                fio.write_matrix_csv(s_sorted, out.path(f"states/state_{sid}.csv", "matrix"))
                out.text(
                    f"states/state_{sid}.svg", "figure",
                    render_heatmap(s_sorted, blocks=blocks, title=f"state {sid}"),
                )
                diff = diff_to_overall(s_sorted, sorted_overall)
                fio.write_matrix_csv(diff, out.path(f"states/diff_{sid}.csv", "matrix"), s_sorted.symbols)
                out.text(
                    f"states/diff_{sid}.svg", "figure",
                    render_heatmap(diff, labels=s_sorted.symbols, blocks=blocks,
                                   title=f"state {sid} minus overall"),
                )

        if "hist" in cfg.stages:
            stage = "hist"
            hists = [coefficient_histogram(w, cfg.bins) for w in windows]
            for h, d in zip(hists, date_labels):
                fio.write_histogram_csv(h, out.path(f"histograms/hist_{d.replace(':', '')}.csv", "histogram"))
            plotting.plot_histogram_surface(hists, out.path("histograms.svg", "figure"), date_labels)

        stage = "manifest"
        manifest = {
            "config": asdict(cfg),
            "panel": {"symbols": panel.K, "timestamps": panel.T, "normalized": panel.normalized},
            "windows": len(windows),
            "states": len(set(mapping.values())) if mapping else None,
            "artifacts": [
                {"path": p.relative_to(root).as_posix(), "kind": kind, "sha256": fio.sha256_file(p)}
                for p, kind in out.files
            ],
        }
        fio.write_json(manifest, root / "manifest.json")
        return manifest
    except MarketStatesError as exc:
        out.rollback()
        raise StageError(stage, exc) from exc
    except OSError as exc:
        out.rollback()
        raise StageError(stage, StorageError(str(exc))) from exc
