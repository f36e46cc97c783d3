"""Command-line entry point: one dispatcher for every pipeline.

Exit codes: 0 success, 1 argument/validation error, 2 runtime error.
`--json` switches progress logging to machine-readable JSON lines.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

DEFAULT_SEED = 0xB055  # fixed so casual runs reproduce

_BACKGROUNDS = {"black": (0.0,), "red": (1.0, 0.0, 0.0)}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _log(as_json: bool, event: str, **fields):
    if as_json:
        print(json.dumps({"event": event, **fields}))
    else:
        detail = " ".join(f"{k}={v}" for k, v in fields.items())
        print(f"[{event}] {detail}" if detail else f"[{event}]")


def build_parser() -> _Parser:
    parser = _Parser(prog="contour-bench",
                     description="Fragmented-object contour integration toolkit")
    parser.add_argument("--json", action="store_true",
                        help="machine-readable JSON log lines")
    sub = parser.add_subparsers(
        dest="command",
        parser_class=lambda **kw: _Parser(
            formatter_class=argparse.ArgumentDefaultsHelpFormatter, **kw))

    p = sub.add_parser("generate", help="build the 19-dataset stimulus tree (+RGB)")
    p.add_argument("--src", required=True, help="source tree <category>/<object>.png")
    p.add_argument("--out", required=True, help="output dataset directory")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="global seed")
    p.add_argument("--background", choices=sorted(_BACKGROUNDS), default="black",
                   help="stimulus background color")
    p.add_argument("--pixels-per-degree", type=float, default=32.0,
                   help="rendering resolution")
    p.add_argument("--canvas", type=int, default=256, help="canvas side in px")
    p.add_argument("--replica", action="store_true",
                   help="require the 12x4 source layout")
    p.add_argument("--jobs", type=int, default=0, help="0 = use all cores")

    p = sub.add_parser("mask", help="emit seeded 1/f noise masks")
    p.add_argument("--out", required=True, help="output file (or dir with --count)")
    p.add_argument("--size", type=int, default=256, help="mask side in px")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="mask seed")
    p.add_argument("--count", type=int, default=1, help="number of masks")

    p = sub.add_parser("zero-shot", help="map 1000-class logits to the 12 categories")
    p.add_argument("--logits", required=True, help="ACTF file with cols=1000")
    p.add_argument("--out", required=True, help="output CSV")
    p.add_argument("--mapping", default=None, help="mapping JSON (default: shipped)")
    p.add_argument("--aggregate", choices=("max", "sum"), default="max",
                   help="member-class aggregation rule")
    p.add_argument("--model-id", default="model", help="id stamped on rows")
    p.add_argument("--condition", default="", help="condition stamped on rows")
    p.add_argument("--level", default="", help="level stamped on rows")

    p = sub.add_parser("fit-decoder", help="fit the linear decoder on activations")
    p.add_argument("--train", required=True, help="labeled ACTF file")
    p.add_argument("--test", default=None, help="ACTF file to predict")
    p.add_argument("--out", required=True, help="output prefix")
    p.add_argument("--l2", type=float, default=1e-3, help="L2 strength")
    p.add_argument("--max-iter", type=int, default=2000, help="iteration cap")
    p.add_argument("--tol", type=float, default=1e-6,
                   help="gradient max-norm tolerance")
    p.add_argument("--no-standardize", action="store_true",
                   help="skip feature standardization")
    p.add_argument("--model-id", default="model", help="id stamped on rows")
    p.add_argument("--condition", default="", help="condition stamped on rows")
    p.add_argument("--level", default="", help="level stamped on rows")

    p = sub.add_parser("evaluate", help="accuracy tables and fits from responses")
    p.add_argument("--responses", required=True, nargs="+",
                   help="response table CSVs")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="bootstrap seed")

    p = sub.add_parser("report", help="cross-model scaling/bias report")
    p.add_argument("--bias-summaries", required=True, help="bias summary CSV")
    p.add_argument("--human", default=None, help="human responses CSV")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="bootstrap seed")

    p = sub.add_parser("serve", help="host the 12-AFC experiment over HTTP")
    p.add_argument("--data", required=True, help="dataset directory with manifest")
    p.add_argument("--sessions", required=True, help="session log directory")
    p.add_argument("--practice", default=None, help="practice dataset directory")
    p.add_argument("--ui", default=None,
                   help="built browser runner directory (index.html + dist/)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    return parser


def _require(path: str, kind: str = "path") -> Path:
    p = Path(path)
    if not p.exists():
        raise UsageError(f"{kind} does not exist: {path}")
    return p


def _cmd_generate(args) -> int:
    from .pipeline import PipelineConfig, build_dataset, default_jobs, discover_sources

    src = _require(args.src, "--src")
    sources = discover_sources(src)
    config = PipelineConfig(
        canvas=args.canvas,
        pixels_per_degree=args.pixels_per_degree,
        background=_BACKGROUNDS[args.background],
        global_seed=args.seed,
    )
    jobs = args.jobs if args.jobs > 0 else default_jobs()
    manifest = build_dataset(sources, config, args.out,
                             replica=args.replica, jobs=jobs)
    _log(args.json, "generated", sources=len(sources),
         stimuli=len(manifest.records), out=args.out, seed=args.seed)
    return 0


def _cmd_mask(args) -> int:
    from .images import write_gray_png
    from .pipeline import derive_seed, generate_noise_mask

    out = Path(args.out)
    if args.count == 1:
        write_gray_png(out, generate_noise_mask(args.size, args.seed))
        written = [str(out)]
    else:
        out.mkdir(parents=True, exist_ok=True)
        written = []
        for k in range(args.count):
            seed = derive_seed(args.seed, "mask", k)
            path = out / f"mask_{k:04d}.png"
            write_gray_png(path, generate_noise_mask(args.size, seed))
            written.append(str(path))
    _log(args.json, "masks", count=len(written), size=args.size)
    return 0


def _stamp_rows(ids, choices, labels, args):
    rows = []
    for i, stimulus in enumerate(ids):
        true = labels[i] if labels else ""
        rows.append({
            "id": args.model_id, "condition": args.condition,
            "level": args.level, "stimulus": stimulus, "true": true,
            "choice": choices[i],
            "correct": int(choices[i] == true) if labels else "",
            "rt_ms": "",
        })
    return rows


def _cmd_zero_shot(args) -> int:
    import pandas as pd

    from .readout import CategoryMapping, read_actf, zero_shot_predict_batch

    logits = read_actf(_require(args.logits, "--logits"))
    if logits.cols != 1000:
        raise UsageError(f"logits file has {logits.cols} columns, expected 1000")
    if args.mapping:
        mapping = CategoryMapping.from_json(_require(args.mapping, "--mapping"))
    else:
        mapping = CategoryMapping.default()
    choices = zero_shot_predict_batch(logits, mapping, aggregate=args.aggregate)
    rows = _stamp_rows(logits.ids, choices, logits.labels, args)
    pd.DataFrame(rows).to_csv(args.out, index=False)
    _log(args.json, "zero-shot", rows=len(rows), out=args.out)
    return 0


def _cmd_fit_decoder(args) -> int:
    import pandas as pd

    from .readout import DecoderHyper, decoder_predict, fit_decoder, read_actf

    train = read_actf(_require(args.train, "--train"))
    hyper = DecoderHyper(l2=args.l2, max_iter=args.max_iter, tol=args.tol,
                         standardize=not args.no_standardize)
    model = fit_decoder(train, hyper)
    prefix = Path(args.out)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    model.to_json(Path(str(prefix) + ".decoder.json"))
    _log(args.json, "decoder-fit", loss=round(model.final_loss, 6),
         iterations=model.n_iter)
    if args.test:
        test = read_actf(_require(args.test, "--test"))
        choices = decoder_predict(model, test)
        rows = _stamp_rows(test.ids, choices, test.labels, args)
        out_csv = Path(str(prefix) + ".responses.csv")
        pd.DataFrame(rows).to_csv(out_csv, index=False)
        _log(args.json, "decoder-predict", rows=len(rows), out=str(out_csv))
    return 0


def _cmd_evaluate(args) -> int:
    import pandas as pd

    from .analysis import (cohens_d, condition_accuracy, integration_bias,
                           load_response_table, log_linear_fit)

    tables = [load_response_table(_require(p, "--responses"))
              for p in args.responses]
    table = pd.concat(tables, ignore_index=True)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    accuracy = condition_accuracy(table, seed=args.seed)
    accuracy.to_csv(out / "accuracy.csv", index=False)

    doc = {"n_trials": int(len(table)), "fits": {}, "integration_bias": None}
    fragmented = table[table["condition"].isin(("phosphene", "segment"))]
    per_condition = {}
    for condition, group in fragmented.groupby("condition"):
        acc = group.groupby("level")["correct"].mean()
        per_condition[condition] = float(group["correct"].mean())
        if len(acc) >= 3:
            doc["fits"][condition] = asdict(
                log_linear_fit(list(zip(acc.index, acc.values))))
    if not fragmented.empty:
        pooled = fragmented.groupby("level")["correct"].mean()
        if len(pooled) >= 3:
            doc["fits"]["pooled"] = asdict(
                log_linear_fit(list(zip(pooled.index, pooled.values))))
    if {"phosphene", "segment"} <= set(per_condition):
        doc["integration_bias"] = integration_bias(
            per_condition["segment"], per_condition["phosphene"])
        by_id = fragmented.pivot_table(index="id", columns="condition",
                                       values="correct", aggfunc="mean")
        if len(by_id) >= 2 and {"phosphene", "segment"} <= set(by_id.columns):
            complete = by_id.dropna()
            if len(complete) >= 2:
                try:
                    doc["cohens_d"] = asdict(cohens_d(
                        complete["phosphene"], complete["segment"]))
                except ValueError as err:
                    doc["cohens_d"] = {"unavailable": str(err)}
    (out / "evaluation.json").write_text(json.dumps(doc, indent=1))
    _log(args.json, "evaluated", out=str(out), n_trials=len(table))
    return 0


def _cmd_report(args) -> int:
    from .analysis import load_bias_summaries, load_response_table
    from .reporting import scaling_report

    summaries = load_bias_summaries(_require(args.bias_summaries,
                                             "--bias-summaries"))
    human = None
    if args.human:
        human = load_response_table(_require(args.human, "--human"))
    scaling_report(summaries, human, out_dir=args.out, seed=args.seed)
    _log(args.json, "report", models=len(summaries), out=args.out)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import ExperimentStore, create_app

    _require(args.data, "--data")
    if args.ui:
        _require(args.ui, "--ui")
    store = ExperimentStore(args.data, args.sessions, practice_dir=args.practice)
    app = create_app(store, ui_dir=args.ui)
    _log(args.json, "serving", host=args.host, port=args.port)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "mask": _cmd_mask,
    "zero-shot": _cmd_zero_shot,
    "fit-decoder": _cmd_fit_decoder,
    "evaluate": _cmd_evaluate,
    "report": _cmd_report,
    "serve": _cmd_serve,
}


def run(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            return 1
        return _COMMANDS[args.command](args)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


def main() -> int:
    return run(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
