"""Command-line front end: run orchestration and deterministic exports.

Subcommands:
  run       full optimization on a CSV dataset, exports under --out
  hv        dominated hypervolume of an exported front CSV
  measures  NF/NI/NNM of a dumped model under a group-structure file
  detect    dump detector outputs for a dataset

Exit codes: 0 success, 1 usage error, 2 data error, 3 runtime error.
Floats are serialized with 17 significant digits so that exports are
byte-identical across reruns and round-trip exactly.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import logging
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__, detectors, gbm, measures
from .data import DataError, load_csv
from .evolution import BudgetZeroError, RunConfig, RunResult, run
from .groupstruct import format_structure, parse_structure
from .moo import hypervolume

log = logging.getLogger("eagga")

FLAVORS = {
    "full": {},
    "random_search": {"random_search": True},
    "no_crossover": {"no_gga_crossover": True},
    "no_mutation": {"no_gga_mutation": True},
    "no_cross_mut": {"no_gga_crossover": True, "no_gga_mutation": True},
    "no_detectors": {"no_detectors": True},
}

FRONT_HEADER = ["eval_index", "auc", "nf", "ni", "nnm", "group_structure", "hp_json"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{message}\n{self.format_usage()}")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _setup_logging():
    level = os.environ.get("EAGGA_LOG", "error").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    if level not in levels:
        raise UsageError(f"EAGGA_LOG must be one of {sorted(levels)}, got {level!r}")
    logging.basicConfig(level=levels[level], format="%(levelname)s %(name)s: %(message)s")


def load_config(path) -> dict:
    """JSON config with keys mirroring RunConfig; unknown keys are errors."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise UsageError("config must be a JSON object")
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(raw) - known
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    return raw


def export_front(result: RunResult, outdir) -> None:
    """Write pareto_front.csv, test_front.csv, hv_trace.csv, eval_log.csv,
    and one model dump per archive entry."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "models").mkdir(exist_ok=True)

    entries = sorted(result.archive.entries, key=lambda e: (-e.objectives[0], e.eval_index))
    with open(outdir / "pareto_front.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(FRONT_HEADER)
        for e in entries:
            w.writerow([
                e.eval_index, _fmt(-e.objectives[0]), _fmt(e.objectives[1]),
                _fmt(e.objectives[2]), _fmt(e.objectives[3]),
                format_structure(e.groups), _hp_json(e.hp),
            ])

    tests = sorted(result.test_front, key=lambda t: (t.auc, t.eval_index))
    with open(outdir / "test_front.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(FRONT_HEADER)
        for t in tests:
            w.writerow([t.eval_index, _fmt(t.auc), _fmt(t.nf), _fmt(t.ni), _fmt(t.nnm),
                        format_structure(t.groups), _hp_json(t.hp)])

    with open(outdir / "hv_trace.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["eval_index", "hypervolume"])
        for idx, hv in result.hv_trace:
            w.writerow([idx, _fmt(hv)])

    with open(outdir / "eval_log.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["eval_index", "auc", "nf", "ni", "nnm", "accepted",
                    "hypervolume", "group_structure", "hp_json"])
        for r in result.eval_log:
            w.writerow([r.eval_index, _fmt(-r.objectives[0]), _fmt(r.objectives[1]),
                        _fmt(r.objectives[2]), _fmt(r.objectives[3]),
                        int(r.accepted), _fmt(r.hypervolume), r.structure, _hp_json(r.hp)])

    for t in result.test_front:
        with open(outdir / "models" / f"entry_{t.eval_index}.json", "w", encoding="utf-8") as fh:
            json.dump(gbm.model_to_dict(t.model), fh)
            fh.write("\n")


def _hp_json(hp: gbm.HyperparamConfig) -> str:
    return json.dumps(hp.as_dict(), separators=(",", ":"))


def _fingerprint(path) -> dict:
    digest = hashlib.sha256(Path(path).read_bytes()).hexdigest()
    return {"path": str(path), "sha256": digest}


def _write_manifest(outdir, payload: dict):
    with open(Path(outdir) / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _cmd_run(args) -> int:
    cfg_dict = load_config(args.config) if args.config else {}
    if args.seed is not None:
        cfg_dict["seed"] = args.seed
    if args.flavor is not None:
        if args.flavor not in FLAVORS:
            raise UsageError(f"unknown flavor {args.flavor!r}; choose from {sorted(FLAVORS)}")
        cfg_dict.update(FLAVORS[args.flavor])
    if args.max_depth_2:
        cfg_dict["fixed_max_depth"] = 2
    if args.workers is not None:
        cfg_dict["workers"] = args.workers
    if args.max_evaluations is not None:
        cfg_dict["max_evaluations"] = args.max_evaluations
    try:
        cfg = RunConfig(**cfg_dict)
        cfg.validate()
    except TypeError as exc:
        raise UsageError(str(exc)) from None

    ds = load_csv(args.data, args.target)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "tool": "eagga",
        "version": __version__,
        "config": dataclasses.asdict(cfg),
        "dataset": {**_fingerprint(args.data), "rows": ds.n, "cols": ds.p,
                    "target": args.target},
        "seed": cfg.seed,
        "started": datetime.now(timezone.utc).isoformat(),
        "status": "running",
    }
    _write_manifest(outdir, manifest)

    result = run(ds, cfg)
    export_front(result, outdir)
    if args.dump_detectors and not cfg.no_detectors:
        _dump_detectors(ds, cfg, outdir)

    manifest["finished"] = datetime.now(timezone.utc).isoformat()
    manifest["status"] = "complete"
    manifest["eval_count"] = result.eval_count
    manifest["sign_flip"] = [int(s) for s in result.sign_flip]
    manifest["feature_names"] = list(result.feature_names)
    _write_manifest(outdir, manifest)
    log.info("exports written to %s", outdir)
    return 0


def _dump_detectors(ds, cfg: RunConfig, outdir: Path):
    from .evolution import _rng_for
    filt = detectors.information_gain(ds, cfg.detector_bins)
    inter = detectors.fast_interactions(ds, cfg.detector_bins)
    mono = detectors.monotonicity_scores(ds, cfg.mono_repeats, cfg.mono_subsample,
                                         _rng_for(cfg.seed, 99),
                                         cfg.detector_tree_depth, cfg.detector_tree_min_obs)
    with open(outdir / "detectors.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["feature", "info_gain", "mono_signed", "mono_probability", "mono_sign"])
        for j, name in enumerate(ds.feature_names):
            w.writerow([name, _fmt(filt.scores[j]), _fmt(mono.signed[j]),
                        _fmt(mono.probability[j]), int(mono.sign[j])])
    with open(outdir / "interaction_scores.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["feature_a", "feature_b", "score"])
        for j in range(ds.p):
            for k in range(j + 1, ds.p):
                w.writerow([ds.feature_names[j], ds.feature_names[k],
                            _fmt(inter.matrix[j, k])])


def read_front_csv(path) -> list:
    """Parse an exported front CSV back into objective vectors."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:5] != FRONT_HEADER[:5]:
            raise DataError(f"unexpected front header in {path}: {header}")
        points = []
        for row in reader:
            points.append((-float(row[1]), float(row[2]), float(row[3]), float(row[4])))
    return points


def _cmd_hv(args) -> int:
    points = read_front_csv(args.front)
    print(_fmt(hypervolume(points, (0.0, 1.0, 1.0, 1.0))))
    return 0


def _cmd_measures(args) -> int:
    with open(args.model, encoding="utf-8") as fh:
        model = gbm.model_from_dict(json.load(fh))
    text = Path(args.groups).read_text(encoding="utf-8").strip()
    g = parse_structure(text)
    p = args.p
    print(f"nf={_fmt(measures.nf(model, p))}")
    print(f"ni={_fmt(measures.ni(model, p))}")
    print(f"nnm={_fmt(measures.nnm(model, g, p))}")
    return 0


def _cmd_detect(args) -> int:
    ds = load_csv(args.data, args.target)
    cfg = RunConfig(seed=args.seed if args.seed is not None else 0, max_evaluations=1)
    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        _dump_detectors(ds, cfg, outdir)
        return 0
    from .evolution import _rng_for
    filt = detectors.information_gain(ds, cfg.detector_bins)
    mono = detectors.monotonicity_scores(ds, cfg.mono_repeats, cfg.mono_subsample,
                                         _rng_for(cfg.seed, 99),
                                         cfg.detector_tree_depth, cfg.detector_tree_min_obs)
    w = csv.writer(sys.stdout)
    w.writerow(["feature", "info_gain", "mono_signed", "mono_probability", "mono_sign"])
    for j, name in enumerate(ds.feature_names):
        w.writerow([name, _fmt(filt.scores[j]), _fmt(mono.signed[j]),
                    _fmt(mono.probability[j]), int(mono.sign[j])])
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="eagga", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the optimizer on a CSV dataset")
    p_run.add_argument("--config", help="JSON config mirroring RunConfig")
    p_run.add_argument("--data", required=True)
    p_run.add_argument("--target", required=True)
    p_run.add_argument("--out", required=True)
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--flavor", choices=sorted(FLAVORS))
    p_run.add_argument("--max-depth-2", action="store_true", dest="max_depth_2")
    p_run.add_argument("--max-evaluations", type=int, dest="max_evaluations")
    p_run.add_argument("--workers", type=int)
    p_run.add_argument("--dump-detectors", action="store_true", dest="dump_detectors")
    p_run.set_defaults(func=_cmd_run)

    p_hv = sub.add_parser("hv", help="hypervolume of an exported front CSV")
    p_hv.add_argument("--front", required=True)
    p_hv.set_defaults(func=_cmd_hv)

    p_meas = sub.add_parser("measures", help="NF/NI/NNM of a dumped model")
    p_meas.add_argument("--model", required=True)
    p_meas.add_argument("--groups", required=True)
    p_meas.add_argument("--p", required=True, type=int)
    p_meas.set_defaults(func=_cmd_measures)

    p_det = sub.add_parser("detect", help="dump detector outputs")
    p_det.add_argument("--data", required=True)
    p_det.add_argument("--target", required=True)
    p_det.add_argument("--seed", type=int)
    p_det.add_argument("--out")
    p_det.set_defaults(func=_cmd_detect)
    return parser


def main(argv=None) -> int:
    try:
        _setup_logging()
        parser = build_parser()
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DataError, BudgetZeroError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
