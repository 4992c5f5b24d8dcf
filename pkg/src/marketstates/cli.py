"""Command line interface.

Exit codes: 0 success, 2 validation error, 3 numeric error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import fields
from datetime import timedelta
from pathlib import Path

from . import io as fio
from . import plotting
from .cluster import ClusterConfig, build_tree, cut_to_states, state_timeline
from .corr import CorrelationWindow, WindowSpec, average_matrix, correlation_windows
from .errors import MarketStatesError, ParseError, StorageError
from .ingest import (
    SessionWindow,
    align_universe,
    compute_returns,
    format_instant,
    parse_instant,
    parse_price_table,
    read_returns_table,
    write_price_table,
    write_returns_table,
)
from .normalize import LocalNormConfig, normalize_panel
from .pipeline import DAILY, INTRADAY, STAGES, PipelineConfig, run_pipeline
from .render import render_heatmap, render_tree
from .similarity import MEASURES, similarity_matrix
from .states import SECTORS, SectorMap, coefficient_histogram, diff_to_overall, sector_sort, state_average
from .synth import RegimeSpec, generate_regime_panel, panel_to_prices

log = logging.getLogger("marketstates")


def _open(path, mode="r"):
    try:
        return open(path, mode, newline="", encoding="utf-8")
    except OSError as exc:
        raise StorageError(f"cannot open {path}: {exc}") from exc


def _outdir(path) -> Path:
    p = Path(path)
    try:
        p.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise StorageError(f"cannot create {p}: {exc}") from exc
    return p


def load_corr_dir(path) -> list[CorrelationWindow]:
    """Read the windows written by the ``corr`` subcommand."""
    root = Path(path)
    with _open(root / "windows.csv") as fh:
        rows = list(csv.DictReader(fh))
    out = []
    for row in rows:
        values, rlab, clab = fio.read_matrix_csv(root / row["file"])
        if rlab != clab:
            raise ParseError(f"{row['file']}: row and column labels differ")
        out.append(
            CorrelationWindow(
                values,
                clab,
                parse_instant(row["window_start"]),
                parse_instant(row["window_end"]),
                parse_instant(row["label_date"]),
                int(row["sample_count"]),
            )
        )
    return out


# -- subcommands ------------------------------------------------------------


def cmd_returns(args):
    with _open(args.prices) as fh:
        series = parse_price_table(fh)
    if args.mode == DAILY:
        horizon, stride, session = args.horizon or 1, args.stride or 1, None
        returns = [compute_returns(s, horizon, stride) for s in series]
    else:
        session = SessionWindow.parse(args.session)
        horizon = timedelta(minutes=args.horizon or 60)
        stride = timedelta(minutes=args.stride or 1)
        returns = [compute_returns(s, horizon, stride, session) for s in series]
    start = parse_instant(args.start) if args.start else None
    end = parse_instant(args.end) if args.end else None
    panel = align_universe(returns, start, end)
    norm = args.normalize if args.normalize is not None else args.mode == DAILY
    if norm:
        panel = normalize_panel(panel, LocalNormConfig(args.norm_n))
    with _open(args.out, "w") as fh:
        write_returns_table(panel, fh)
    log.info("wrote %d x %d panel to %s", panel.K, panel.T, args.out)


def cmd_corr(args):
    with _open(args.returns) as fh:
        panel = align_universe(read_returns_table(fh))
    windows = correlation_windows(panel, WindowSpec(args.length, args.stride, args.mode))
    root = _outdir(args.out_dir)
    _outdir(root / "matrices")
    with _open(root / "windows.csv", "w") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "label_date", "window_start", "window_end", "sample_count", "file"])
        for i, win in enumerate(windows):
            rel = f"matrices/corr_{i:05d}.csv"
            fio.write_matrix_csv(win, root / rel)
            w.writerow(
                [i, format_instant(win.label_date), format_instant(win.window_start),
                 format_instant(win.window_end), win.sample_count, rel]
            )
    log.info("wrote %d windows to %s", len(windows), root)


def cmd_similarity(args):
    windows = load_corr_dir(args.corr_dir)
    sim = similarity_matrix(windows, args.measure)
    fio.write_matrix_csv(sim, args.out)
    if args.svg:
        Path(args.svg).write_text(render_heatmap(sim, title=f"{args.measure} similarity"))


def cmd_cluster(args):
    windows = load_corr_dir(args.corr_dir)
    labels = [w.label_date for w in windows]
    build_threshold = 0.0 if args.full_tree else args.threshold
    root = build_tree(windows, ClusterConfig(build_threshold, args.max_iter, args.init, args.seed))
    cut = cut_to_states(root, args.threshold, labels)
    out = _outdir(args.out_dir)
    fio.write_json(fio.tree_to_dict(root, labels), out / "tree.json")
    (out / "tree.svg").write_text(render_tree(root, [format_instant(d) for d in labels]))
    seq = state_timeline(cut.mapping, windows)
    fio.write_timeline_csv(seq, out / "timeline.csv")
    plotting.plot_timeline(seq, out / "timeline.svg")
    print(f"{len(windows)} windows, {cut.n_states} states")


def cmd_states(args):
    windows = load_corr_dir(args.corr_dir)
    seq = fio.read_timeline_csv(args.timeline)
    by_date = dict(seq.entries)
    try:
        mapping = {k: by_date[w.label_date] for k, w in enumerate(windows)}
    except KeyError as exc:
        raise ParseError(f"timeline has no state for window ending {exc.args[0]}") from None
    with _open(args.sectors) as fh:
        smap = SectorMap.read_csv(fh)
    out = _outdir(args.out_dir)
    overall, blocks = sector_sort(average_matrix(windows), smap)
    fio.write_matrix_csv(overall, out / "overall_average.csv")
    (out / "overall_average.svg").write_text(render_heatmap(overall, blocks=blocks, title="overall average"))
    for sid, avg in state_average(mapping, windows).items():
        s_sorted, _ = sector_sort(avg, smap)
        fio.write_matrix_csv(s_sorted, out / f"state_{sid}.csv")
        (out / f"state_{sid}.svg").write_text(render_heatmap(s_sorted, blocks=blocks, title=f"state {sid}"))
        diff = diff_to_overall(s_sorted, overall)
        fio.write_matrix_csv(diff, out / f"diff_{sid}.csv", s_sorted.symbols)
        (out / f"diff_{sid}.svg").write_text(
            render_heatmap(diff, labels=s_sorted.symbols, blocks=blocks, title=f"state {sid} minus overall")
        )


def cmd_hist(args):
    windows = load_corr_dir(args.corr_dir)
    out = _outdir(args.out_dir)
    hists = [coefficient_histogram(w, args.bins, args.include_diagonal) for w in windows]
    dates = [format_instant(w.label_date) for w in windows]
    for h, d in zip(hists, dates):
        fio.write_histogram_csv(h, out / f"hist_{d.replace(':', '')}.csv")
    plotting.plot_histogram_surface(hists, out / "histograms.svg", dates)


def cmd_render(args):
    if args.tree:
        with _open(args.tree) as fh:
            root = fio.tree_from_dict(json.load(fh))
        svg = render_tree(root)
    else:
        values, rows, cols = fio.read_matrix_csv(args.matrix)
        vrange = tuple(args.range) if args.range else None
        blocks = None
        if args.sectors:
            with _open(args.sectors) as fh:
                smap = SectorMap.read_csv(fh)
            window, blocks = sector_sort(CorrelationWindow(values, cols), smap)
            values, cols = window.values, list(window.symbols)
        svg = render_heatmap(values, labels=cols, value_range=vrange, blocks=blocks, title=args.title)
    with _open(args.out, "w") as fh:
        fh.write(svg)


def cmd_synth(args):
    spec = RegimeSpec.load(args.spec)
    syn = generate_regime_panel(spec)
    out = _outdir(args.out_dir)
    with _open(out / "prices.csv", "w") as fh:
        write_price_table(panel_to_prices(syn.panel), fh)
    with _open(out / "returns.csv", "w") as fh:
        write_returns_table(syn.panel, fh)
    with _open(out / "labels.csv", "w") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", "regime", "segment"])
        for t, lab, seg in zip(syn.panel.timestamps, syn.labels, syn.segment_index):
            w.writerow([format_instant(t), int(lab), int(seg)])
    per = -(-spec.K // len(SECTORS))
    smap = SectorMap({s: SECTORS[i // per] for i, s in enumerate(syn.panel.symbols)})
    with _open(out / "sectors.csv", "w") as fh:
        smap.write_csv(fh)
    log.info("wrote synthetic panel (%d x %d) to %s", syn.panel.K, syn.panel.T, out)


def cmd_run(args):
    data = {}
    if args.config:
        with _open(args.config) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ParseError(f"config is not valid JSON: {exc}") from None
    for f in fields(PipelineConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            data[f.name] = value
    if "stages" in data and isinstance(data["stages"], str):
        data["stages"] = [s for s in data["stages"].split(",") if s]
    cfg = PipelineConfig.from_dict(data)
    manifest = run_pipeline(cfg)
    print(f"{len(manifest['artifacts'])} artifacts written to {cfg.output_dir}")


# -- parser -----------------------------------------------------------------


def _add_returns_flags(p, defaults=True):
    d = (lambda v: v) if defaults else (lambda v: None)
    p.add_argument("--mode", choices=[DAILY, INTRADAY], default=d(DAILY))
    p.add_argument("--horizon", type=int, default=None,
                   help="return horizon: observations (daily, default 1) or minutes (intraday, default 60)")
    p.add_argument("--stride", type=int, default=None,
                   help="sampling stride: observations (daily) or minutes (intraday); default 1")
    p.add_argument("--session", default=d("10:45-14:45"), help="intraday session HH:MM-HH:MM")
    p.add_argument("--start", default=None, help="first timestamp to keep (ISO-8601)")
    p.add_argument("--end", default=None, help="last timestamp to keep (ISO-8601)")
    p.add_argument("--normalize", dest="normalize", action="store_true", default=None,
                   help="local normalization (default: on for daily, off for intraday)")
    p.add_argument("--no-normalize", dest="normalize", action="store_false")
    p.add_argument("--norm-n", dest="norm_n", type=int, default=d(13))


def _add_cluster_flags(p, defaults=True):
    d = (lambda v: v) if defaults else (lambda v: None)
    p.add_argument("--threshold", type=float, default=d(0.1465))
    p.add_argument("--max-iter", dest="max_kmeans_iter" if not defaults else "max_iter", type=int, default=d(100))
    p.add_argument("--init", dest="init_policy" if not defaults else "init",
                   choices=["farthest-pair", "seeded-random"], default=d("farthest-pair"))
    p.add_argument("--seed", type=int, default=d(0))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="marketstates", description="Identify market states from return series.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("returns", help="prices -> aligned (normalized) returns")
    p.add_argument("--prices", required=True)
    _add_returns_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_returns)

    p = sub.add_parser("corr", help="returns -> windowed correlation matrices")
    p.add_argument("--returns", required=True)
    p.add_argument("--length", type=int, default=42)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--mode", choices=["disjoint", "sliding"], default="disjoint")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_corr)

    p = sub.add_parser("similarity", help="pairwise distances between windows")
    p.add_argument("--corr-dir", required=True)
    p.add_argument("--measure", choices=MEASURES, default="zeta")
    p.add_argument("--out", required=True)
    p.add_argument("--svg")
    p.set_defaults(func=cmd_similarity)

    p = sub.add_parser("cluster", help="top-down clustering into market states")
    p.add_argument("--corr-dir", required=True)
    _add_cluster_flags(p)
    p.add_argument("--full-tree", action=argparse.BooleanOptionalAction, default=True,
                   help="divide down to single windows and cut at the threshold afterwards")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("states", help="state averages, sector ordering and differences")
    p.add_argument("--corr-dir", required=True)
    p.add_argument("--timeline", required=True)
    p.add_argument("--sectors", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_states)

    p = sub.add_parser("hist", help="histograms of correlation coefficients")
    p.add_argument("--corr-dir", required=True)
    p.add_argument("--bins", type=int, default=40)
    p.add_argument("--include-diagonal", action="store_true")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_hist)

    p = sub.add_parser("render", help="SVG of a matrix CSV or a tree JSON")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--matrix")
    src.add_argument("--tree")
    p.add_argument("--sectors")
    p.add_argument("--range", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--title")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("synth", help="synthetic regime-switching panel")
    p.add_argument("--spec", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("run", help="full pipeline")
    p.add_argument("--config")
    p.add_argument("--prices")
    p.add_argument("--sectors")
    p.add_argument("--output-dir", dest="output_dir")
    _add_returns_flags(p, defaults=False)
    p.add_argument("--window-length", dest="window_length", type=int)
    p.add_argument("--window-stride", dest="window_stride", type=int)
    p.add_argument("--window-mode", dest="window_mode", choices=["disjoint", "sliding"])
    p.add_argument("--measure", choices=MEASURES)
    _add_cluster_flags(p, defaults=False)
    p.add_argument("--bins", type=int)
    p.add_argument("--stages", help=f"comma-separated subset of {','.join(STAGES)}")
    p.set_defaults(func=cmd_run)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        args.func(args)
    except MarketStatesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return StorageError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
