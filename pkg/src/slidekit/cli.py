"""Command-line entry point.

Artifacts go to the filesystem; logs are line-delimited JSON on stderr.
Every subcommand accepts ``--config FILE`` (JSON object whose keys mirror
the flag names); explicit flags override config values. Backend
credentials come from ``SLIDER_BACKEND_<NAME>_URL`` / ``_KEY`` environment
variables, never from flags.
"""

from __future__ import annotations

import functools
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click

from .arena import ArenaCorpus, ArenaStore
from .backends import Backend, HttpBackend, MockOracleBackend
from .contexts import build_refinement_context, load_detections
from .dataset import build_corpus, corpus_stats, read_corpus_samples, write_stats
from .engine import derender_pipeline, refine as refine_pass, DerenderResult
from .errors import SlidekitError
from .metrics import (
    evaluate_sample,
    run_external_scorer,
    summarize,
    write_records_jsonl,
    write_summary_csv,
)
from .postprocess import write_slide_outputs
from .raster import load_png, resize_max_side
from .svgio import parse_slide_svg, serialize_slide_svg
from .training import TrainSample, export_training_variants, write_training_records


def log_event(event: str, **fields) -> None:
    payload = {"ts": round(time.time(), 3), "event": event}
    payload.update(fields)
    print(json.dumps(payload, default=str), file=sys.stderr)


def _merge_config(ctx: click.Context, config_path: str | None) -> None:
    """Fill parameters from a JSON config; explicit flags keep priority.

    Config keys mirror the flag spellings (``out``, ``refine``, ...); the
    internal parameter names are accepted too.
    """
    if not config_path:
        return
    config = json.loads(Path(config_path).read_text(encoding="utf-8"))
    alias: dict[str, str] = {}
    for param in ctx.command.params:
        for opt in list(param.opts) + list(param.secondary_opts):
            alias[opt.lstrip("-").replace("-", "_")] = param.name
        alias[param.name] = param.name
    for name, value in config.items():
        key = alias.get(name.replace("-", "_"))
        if key is None or key not in ctx.params:
            continue
        source = ctx.get_parameter_source(key)
        if source is not None and source.name != "COMMANDLINE":
            ctx.params[key] = value


def with_config(fn):
    """Adds --config and re-dispatches with merged parameters."""

    @click.option("--config", "config_path", type=click.Path(exists=True), default=None,
                  help="JSON file whose keys mirror the flags; flags override.")
    @functools.wraps(fn)
    def wrapper(*args, config_path=None, **kwargs):
        ctx = click.get_current_context()
        ctx.params.update(kwargs)
        _merge_config(ctx, config_path)
        kwargs = {k: v for k, v in ctx.params.items() if k in kwargs}
        try:
            return fn(*args, **kwargs)
        except SlidekitError as exc:
            log_event("error", kind=type(exc).__name__, message=str(exc))
            sys.exit(1)
        except OSError as exc:
            log_event("error", kind="IoError", message=str(exc))
            sys.exit(1)

    return wrapper


def _require(value, flag: str):
    """Post-merge requiredness: the value may come from a flag or the config."""
    if value is None or value == ():
        raise click.UsageError(f"Missing option {flag!r} (flag or --config key).")
    return value


def _make_backend(spec: str, mock_manifest: str | None, seed: int) -> Backend:
    if spec == "mock":
        if not mock_manifest:
            raise SlidekitError("--backend mock requires --mock-manifest FILE")
        return MockOracleBackend.from_manifest(mock_manifest, seed=seed)
    if spec.startswith("http:"):
        return HttpBackend.from_env(spec.split(":", 1)[1])
    raise SlidekitError(f"unknown backend {spec!r}; expected 'mock' or 'http:<name>'")


@click.group()
@click.version_option(package_name="slidekit")
def main():
    """Derender raster slides into editable SVG documents and evaluate them."""


# --- derender / refine ---


def _pipeline_options(fn):
    for option in reversed(
        [
            click.option("--backend", default="mock", show_default=True,
                         help="mock | http:<name>"),
            click.option("--mock-manifest", default=None,
                         help="JSON {image_path: gt_svg_path} for the mock backend."),
            click.option("--start", default="skeleton", show_default=True,
                         help="skeleton | partial:<det.jsonl>"),
            click.option("--refine", "refine_steps", default=0, show_default=True, type=int),
            click.option("--max-side", default=1024, show_default=True, type=int),
            click.option("--inpaint-radius", default=3, show_default=True, type=int),
            click.option("--conf", default=0.25, show_default=True, type=float,
                         help="Detection confidence threshold."),
            click.option("--seed", default=0, show_default=True, type=int),
            click.option("--parallelism", default=1, show_default=True, type=int),
            click.option("-o", "--out", "out_dir", default=None, type=click.Path()),
        ]
    ):
        fn = option(fn)
    return fn


def _resolve_start(start: str, image_path: Path):
    if start == "skeleton":
        return "skeleton", None
    if start.startswith("partial:"):
        det_map = load_detections(start.split(":", 1)[1])
        det = det_map.get(str(image_path)) or det_map.get(image_path.name)
        if det is None:
            raise SlidekitError(f"no detections for {image_path}")
        return "partial", det
    raise SlidekitError(f"unknown start context {start!r}")


def _run_one_slide(image_path: Path, out_dir: Path, backend, start, refine_steps,
                   max_side, inpaint_radius, conf) -> None:
    raster = load_png(image_path)
    start_kind, det = _resolve_start(start, image_path)
    run = derender_pipeline(
        raster,
        backend,
        start=start_kind,
        detections=det,
        refine_steps=refine_steps,
        max_side=max_side,
        conf_threshold=conf,
    )
    resized = resize_max_side(raster, max_side)
    write_slide_outputs(
        resized,
        run.final.doc,
        out_dir,
        radius=inpaint_radius,
        metadata={
            "source": str(image_path),
            "passes": run.backend_calls,
            "repairs": [r for result in run.results for r in result.repairs_applied],
        },
    )
    if len(run.results) > 1:  # keep intermediates for pass-by-pass comparison
        passes_dir = out_dir / "passes"
        passes_dir.mkdir(parents=True, exist_ok=True)
        for result in run.results:
            (passes_dir / f"pass_{result.pass_index}.svg").write_text(
                serialize_slide_svg(result.doc), encoding="utf-8"
            )
    log_event("derendered", slide=str(image_path), passes=run.backend_calls, out=str(out_dir))


@main.command()
@click.argument("inputs", nargs=-1, required=True, type=click.Path(exists=True))
@_pipeline_options
@with_config
def derender(inputs, backend, mock_manifest, start, refine_steps, max_side,
             inpaint_radius, conf, seed, parallelism, out_dir):
    """Derender slide PNG(s) into SVG + extracted assets."""
    out_dir = _require(out_dir, "-o/--out")
    backend_handle = _make_backend(backend, mock_manifest, seed)
    out_dir = Path(out_dir)
    files: list[Path] = []
    for item in inputs:
        path = Path(item)
        files.extend(sorted(path.glob("*.png")) if path.is_dir() else [path])
    if not files:
        raise SlidekitError("no input PNG files found")

    def target_dir(path: Path) -> Path:
        return out_dir if len(files) == 1 else out_dir / path.stem

    jobs = [(f, target_dir(f)) for f in files]
    if parallelism <= 1:
        for image_path, slide_out in jobs:
            _run_one_slide(image_path, slide_out, backend_handle, start, refine_steps,
                           max_side, inpaint_radius, conf)
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            futures = [
                pool.submit(_run_one_slide, image_path, slide_out, backend_handle, start,
                            refine_steps, max_side, inpaint_radius, conf)
                for image_path, slide_out in jobs
            ]
            for future in futures:
                future.result()


@main.command()
@click.argument("image", type=click.Path(exists=True))
@click.argument("prior_svg", type=click.Path(exists=True))
@_pipeline_options
@with_config
def refine(image, prior_svg, backend, mock_manifest, start, refine_steps, max_side,
           inpaint_radius, conf, seed, parallelism, out_dir):
    """Run refinement passes on an existing prediction."""
    out_dir = _require(out_dir, "-o/--out")
    backend_handle = _make_backend(backend, mock_manifest, seed)
    steps = max(refine_steps, 1)
    raster = resize_max_side(load_png(image), max_side)
    prior_doc = parse_slide_svg(Path(prior_svg).read_text(encoding="utf-8"))
    result = DerenderResult(
        doc=prior_doc, raw_response="", repairs_applied=(), pass_index=0,
        context=build_refinement_context(prior_doc),
    )
    for _ in range(steps):
        result = refine_pass(raster, result, backend_handle)
    write_slide_outputs(
        raster, result.doc, Path(out_dir), radius=inpaint_radius,
        metadata={"source": str(image), "passes": result.pass_index, "repairs": list(result.repairs_applied)},
    )
    log_event("refined", slide=str(image), passes=result.pass_index, out=str(out_dir))


# --- eval ---


def _load_eval_dir(root: Path) -> dict[str, tuple[Path, Path]]:
    """Map sample id -> (svg path, png path); per-id dirs or flat files."""
    out: dict[str, tuple[Path, Path]] = {}
    for svg in sorted(root.rglob("slide.svg")):
        png = svg.parent / "slide.png"
        if png.exists():
            out[svg.parent.name] = (svg, png)
    if out:
        return out
    for svg in sorted(root.glob("*.svg")):
        png = svg.with_suffix(".png")
        if png.exists():
            out[svg.stem] = (svg, png)
    return out


@main.command("eval")
@click.option("--gt", "gt_dir", default=None, type=click.Path(exists=True))
@click.option("--pred", "preds", multiple=True,
              help="Prediction dir, or name=dir; repeat for several methods.")
@click.option("--scorer", default=None, help="External scorer: <cmd> <gt.png> <pred.png>.")
@click.option("-o", "--out", "out_dir", default=None, type=click.Path())
@with_config
def eval_cmd(gt_dir, preds, scorer, out_dir):
    """Metric table (mIoU, OCR accuracy, MSE) over prediction directories."""
    gt_dir = _require(gt_dir, "--gt")
    preds = _require(preds, "--pred")
    gt = _load_eval_dir(Path(gt_dir))
    if not gt:
        raise SlidekitError(f"no gt samples under {gt_dir}")
    summaries = {}
    out_path = Path(out_dir) if out_dir else None
    if out_path:
        out_path.mkdir(parents=True, exist_ok=True)
    for spec in preds:
        name, _, path = spec.rpartition("=")
        name = name or Path(path).name
        pred = _load_eval_dir(Path(path))
        records = []
        for sample_id, (gt_svg, gt_png) in sorted(gt.items()):
            if sample_id not in pred:
                log_event("missing_prediction", method=name, sample=sample_id)
                continue
            pred_svg, pred_png = pred[sample_id]
            extra = {}
            if scorer:
                extra = run_external_scorer(scorer, gt_png, pred_png)
            records.append(
                evaluate_sample(
                    parse_slide_svg(gt_svg.read_text(encoding="utf-8")),
                    load_png(gt_png),
                    parse_slide_svg(pred_svg.read_text(encoding="utf-8")),
                    load_png(pred_png),
                    sample_id=sample_id,
                    extra=extra,
                )
            )
        summaries[name] = summarize(records)
        if out_path:
            write_records_jsonl(records, out_path / f"{name}.jsonl")
        log_event("evaluated", method=name, samples=len(records), **summaries[name])
    csv_target = (out_path / "summary.csv") if out_path else Path("summary.csv")
    write_summary_csv(summaries, csv_target)
    click.echo(csv_target.read_text(encoding="utf-8"), nl=False)


# --- dataset ---


@main.group()
def dataset():
    """Corpus construction and statistics."""


@dataset.command("build")
@click.option("--input", "input_dir", default=None, type=click.Path(exists=True))
@click.option("-o", "--out", "out_dir", default=None, type=click.Path())
@click.option("--train-frac", default=0.9, show_default=True, type=float)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--det", "det_file", default=None, type=click.Path(exists=True),
              help="Detections JSONL used for text grouping.")
@click.option("--max-images", default=8, show_default=True, type=int)
@click.option("--max-texts", default=31, show_default=True, type=int)
@click.option("--renderer", default=None, help="External renderer command for re-rasterization.")
@with_config
def dataset_build(input_dir, out_dir, train_frac, seed, det_file, max_images, max_texts, renderer):
    """Group, filter, normalize and split input slides into a corpus."""
    input_dir = _require(input_dir, "--input")
    out_dir = _require(out_dir, "-o/--out")
    detections = load_detections(det_file) if det_file else None
    stats = build_corpus(
        input_dir,
        out_dir,
        train_fraction=train_frac,
        seed=seed,
        detections=detections,
        max_images=max_images,
        max_texts=max_texts,
        renderer_cmd=renderer,
    )
    write_stats(stats, Path(out_dir) / "stats.json", Path(out_dir) / "stats.csv")
    log_event("corpus_built", **stats.split_sizes, total=stats.total)


@dataset.command("stats")
@click.argument("corpus_dir", type=click.Path(exists=True))
@click.option("-o", "--out", "out_json", default=None, type=click.Path())
@click.option("--csv", "out_csv", default=None, type=click.Path())
@with_config
def dataset_stats(corpus_dir, out_json, out_csv):
    """Histograms of asset counts and SVG character length."""
    stats = corpus_stats(corpus_dir)
    if out_json:
        write_stats(stats, out_json, out_csv)
    click.echo(json.dumps(stats.as_dict(), indent=2))


# --- training export ---


@main.command("export-train")
@click.option("--corpus", "corpus_dir", default=None, type=click.Path(exists=True))
@click.option("-o", "--out", "out_file", default=None, type=click.Path())
@click.option("--det", "det_file", default=None, type=click.Path(exists=True))
@click.option("--priors", "priors_file", default=None, type=click.Path(exists=True),
              help="JSON {sample_id: {skeleton: svg_path, partial: svg_path}}.")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--conf", default=0.25, show_default=True, type=float)
@with_config
def export_train(corpus_dir, out_file, det_file, priors_file, seed, conf):
    """Export skeleton/partial/initial training records as JSONL."""
    corpus_dir = _require(corpus_dir, "--corpus")
    out_file = _require(out_file, "-o/--out")
    samples = [
        TrainSample(
            id=s.id,
            image_path=str(s.raster_path),
            doc=parse_slide_svg(s.svg_path.read_text(encoding="utf-8")),
        )
        for s in read_corpus_samples(corpus_dir)
        if s.id.startswith("train/")
    ]
    if not samples:
        raise SlidekitError(f"no train samples under {corpus_dir}")
    det_by_image = load_detections(det_file) if det_file else None

    def det_source(sample_id: str):
        if det_by_image is None:
            return None
        sample = next(s for s in samples if s.id == sample_id)
        return det_by_image.get(sample.image_path) or det_by_image.get(Path(sample.image_path).name)

    prior_source = None
    if priors_file:
        priors_map = json.loads(Path(priors_file).read_text(encoding="utf-8"))
        base = Path(priors_file).parent

        def prior_source(sample_id: str, start: str):
            entry = priors_map.get(sample_id, {})
            path = entry.get(start)
            if path is None:
                return None
            full = Path(path) if Path(path).is_absolute() else base / path
            return parse_slide_svg(full.read_text(encoding="utf-8"))

    records = export_training_variants(
        samples,
        det_source=det_source if det_by_image else None,
        prior_source=prior_source,
        seed=seed,
        conf_threshold=conf,
    )
    count = write_training_records(records, out_file)
    log_event("training_exported", records=count, out=out_file)


# --- arena ---


@main.group()
def arena():
    """Human-evaluation arena service."""


@arena.command("serve")
@click.option("--corpus", "corpus_dir", default=None, type=click.Path(exists=True),
              help="Layout: <dir>/<sample_id>/{original.png, <method>.png}.")
@click.option("--methods", default=None, help="Comma-separated method names.")
@click.option("--event-log", default="arena_events.jsonl", show_default=True, type=click.Path())
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--k-factor", default=4.0, show_default=True, type=float)
@click.option("--initial", default=1000.0, show_default=True, type=float)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8600, show_default=True, type=int)
@click.option("--ui", "ui_dir", default=None, type=click.Path(),
              help="Built frontend bundle to serve at /.")
@click.option("--backend", default=None, help="Enable /derender: mock | http:<name>.")
@click.option("--mock-manifest", default=None)
@with_config
def arena_serve(corpus_dir, methods, event_log, seed, k_factor, initial, host, port,
                ui_dir, backend, mock_manifest):
    """Serve the blinded ranking API (and UI bundle when built)."""
    corpus_dir = _require(corpus_dir, "--corpus")
    methods = _require(methods, "--methods")
    import uvicorn

    from .service import create_app

    method_list = [m.strip() for m in methods.split(",") if m.strip()]
    corpus = ArenaCorpus.from_directory(corpus_dir, method_list)
    store = ArenaStore(
        method_list, corpus, event_log, k_factor=k_factor, initial=initial, seed=seed
    )
    backend_handle = _make_backend(backend, mock_manifest, seed) if backend else None
    app = create_app(store, backend=backend_handle, ui_dir=ui_dir)
    log_event("arena_starting", host=host, port=port, methods=method_list,
              samples=len(corpus.originals))
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
