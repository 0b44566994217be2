"""Command-line entry point: ``qcorr <subcommand> [--config FILE] [--seed N] [--out DIR] ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import experiments as ex
from .ml import load_model, read_jsonl, save_model, write_jsonl
from .ml.data import SchemaError

log = logging.getLogger("qcorr")


class OrderingError(RuntimeError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _emit_error("UsageError", message)
        sys.exit(2)


def _emit_error(kind: str, message: str) -> None:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")


def _dump_json(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def load_config(args) -> ex.RunConfig:
    data = {}
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise FileNotFoundError(f"config file {path} not found")
        data = json.loads(path.read_text())
    cfg = ex.RunConfig.from_dict(data)
    return cfg.with_overrides(seed=args.seed, noise=getattr(args, "noise", None))


def _need(path: Path) -> Path:
    if not path.exists():
        raise FileNotFoundError(f"{path} not found; run the producing subcommand first")
    return path


def _load_split(out: Path, name: str):
    return read_jsonl(_need(out / f"{name}.jsonl"))


def cmd_gen_data(cfg, args, out: Path):
    for split in ("train", "test"):
        ds = ex.generate_split(cfg, split)
        write_jsonl(ds, out / f"{split}.jsonl")
        print(f"{split}: {len(ds)} states, class counts {ds.class_counts().tolist()}")


def cmd_train_eval(cfg, args, out: Path):
    train, test = _load_split(out, "train"), _load_split(out, "test")
    report, fitted = ex.train_and_evaluate(cfg, train, test, args.model)
    (out / "models").mkdir(exist_ok=True)
    for kind, (model, ev) in fitted.items():
        save_model(model, out / "models" / f"{kind}.json")
        rows = ex.phase_rows(test, ev.predictions)
        (out / f"phase_{kind}.csv").write_text(ex.phase_csv(rows))
        bins = report["models"][kind]["binary"]
        print(
            f"{kind}: accuracy {ev.accuracy:.4f}; entangled? {bins['entangled']['accuracy']:.4f} "
            f"steerable? {bins['steerable']['accuracy']:.4f} nonlocal? {bins['nonlocal']['accuracy']:.4f}"
        )
    _dump_json(report, out / "report.json")


def cmd_mismatch_study(cfg, args, out: Path):
    report = ex.mismatch_study(cfg, args.model)
    _dump_json(report, out / "mismatch.json")
    for kind, r in report["models"].items():
        print(
            f"{kind}: matched {r['matched_accuracy']:.4f} mismatched {r['mismatched_accuracy']:.4f} "
            f"class III recall {r['class_III_recall']['matched']} -> {r['class_III_recall']['mismatched']}"
        )


def _load_models(out: Path, choice):
    fitted = {}
    for kind in ex.resolve_models(choice):
        fitted[kind] = (load_model(_need(out / "models" / f"{kind}.json")), None)
    return fitted


def cmd_bench(cfg, args, out: Path):
    test = _load_split(out, "test")
    report = ex.bench(cfg, _load_models(out, args.model), test)
    _dump_json(report, out / "bench.json")
    for k, v in report["median_seconds"].items():
        print(f"{k}: {v:.3e} s")
    if report.get("ordering_holds") is False:
        raise OrderingError(f"timing ordering {report['ordering']} does not hold: {report['median_seconds']}")


def cmd_sdp_run(cfg, args, out: Path):
    rows, summary = ex.sdp_batch(cfg)
    (out / "sdp_results.jsonl").write_text("".join(json.dumps(r, sort_keys=True) + "\n" for r in rows))
    _dump_json(summary, out / "sdp_summary.json")
    for run in summary["runs"]:
        agree = run.get("ppt_agreement")
        extra = f", PPT agreement {agree:.4f}" if agree is not None else ""
        print(f"{run['dims'][0]}x{run['dims'][1]}: {run['counts']}{extra}")


def cmd_phase_export(cfg, args, out: Path):
    test = _load_split(out, "test")
    for kind, (model, _) in _load_models(out, args.model).items():
        pred = model.predict(test.features)
        (out / f"phase_{kind}.csv").write_text(ex.phase_csv(ex.phase_rows(test, pred)))
        print(f"phase_{kind}.csv: {len(test)} rows")


COMMANDS = {
    "gen-data": (cmd_gen_data, "simulate the training and test datasets"),
    "train-eval": (cmd_train_eval, "train models and write accuracy reports"),
    "mismatch-study": (cmd_mismatch_study, "noiseless-trained vs noise-matched models"),
    "bench": (cmd_bench, "per-state timing of labeling and inference"),
    "sdp-run": (cmd_sdp_run, "symmetric-extension test on random states"),
    "phase-export": (cmd_phase_export, "write p,theta,true,pred,correct tables"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qcorr", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--seed", type=int, help="root seed (overrides the config)")
        p.add_argument("--out", default=".", help="directory for inputs and outputs")
        if name == "gen-data":
            p.add_argument("--noise", choices=ex.NOISE_CHOICES)
        if name in ("train-eval", "mismatch-study", "bench", "phase-export"):
            p.add_argument("--model", choices=(*ex.MODEL_CHOICES, "all"), default="all")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        cfg = load_config(args)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        COMMANDS[args.command][0](cfg, args, out)
    except (OSError, ValueError, SchemaError, OrderingError, KeyError) as exc:
        _emit_error(type(exc).__name__, str(exc))
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
