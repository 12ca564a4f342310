"""Command-line entry point: ``sweetspot <command> [options]``.

Exit codes: 0 success, 1 configuration error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from dataclasses import asdict, replace

import yaml

from .config import PipelineConfig, default_config_text, load_config
from .errors import ConfigError, ConfigInvalid, DataError, MissingFeatures
from .logframe import StandardizedLogFrame
from .models import get_zoo
from .pipeline import Preprocessed, extract_features, preprocess
from .production import CumulativeProductionFrame
from .report import predictions_csv, report_json, run_phase, scatter_plots, summary_table
from .synthfield import SynthConfig, generate

log = logging.getLogger("sweetspot")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


def _write(path: str, text: str) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _frame_csv(frame: CumulativeProductionFrame, path: str) -> None:
    os.makedirs(os.path.dirname(path), exist_ok=True)
    frame.to_csv(path)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _resolve_seed(args, default: int) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("SWEETSPOT_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ConfigInvalid(f"SWEETSPOT_SEED must be an integer, got {env!r}") from None
    return default


def _load(args) -> PipelineConfig:
    if not args.config:
        raise ConfigInvalid("--config is required")
    cfg = load_config(args.config)
    if args.out:
        cfg.output_dir = os.path.abspath(args.out)
    if args.horizon is not None:
        cfg.horizon = args.horizon
        if args.horizon not in cfg.horizons:
            cfg.horizons = sorted(set(cfg.horizons) | {args.horizon})
    if args.phase:
        cfg.phases = [args.phase]
    cfg.evaluation = replace(cfg.evaluation, seed=_resolve_seed(args, cfg.evaluation.seed))
    return cfg


def _stage(cfg: PipelineConfig, name: str) -> str:
    return os.path.join(cfg.output_dir, name)


# -- commands ----------------------------------------------------------------


def cmd_preprocess(cfg: PipelineConfig) -> None:
    cfg.check_inputs()
    cfg.check_formations()
    pre = preprocess(cfg.inputs, cfg.targets, cfg.properties, horizons=cfg.horizons, polygon=cfg.polygon)
    out = _stage(cfg, "preprocess")
    for prop, frame in sorted(pre.frames.items()):
        for formation in sorted(frame.blocks):
            _write(os.path.join(out, "frames", f"{prop}__{formation}.csv"), frame.block_csv(formation))
        _write(os.path.join(out, "frames", f"{prop}.json"), frame.sidecar() + "\n")
    _frame_csv(pre.production, os.path.join(out, "production_frame.csv"))
    _write(os.path.join(out, "formation_map.json"), pre.fmap.to_json() + "\n")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["well_id", "x", "y"])
    for well, (x, y) in sorted(pre.vertical_coords.items()):
        w.writerow([well, repr(float(x)), repr(float(y))])
    _write(os.path.join(out, "vertical_coords.csv"), buf.getvalue())
    _write(os.path.join(out, "audit.json"), _json(pre.audit))
    empty = [r for f in pre.frames.values() for r in f.rejections if r.get("reason") == "EmptyBlock"]
    if empty:
        log.warning("%d (property, formation) blocks are empty", len(empty))
    print(f"preprocess: {len(pre.frames)} properties, {len(pre.production)} horizontal wells -> {out}")


def _read_preprocessed(cfg: PipelineConfig) -> Preprocessed:
    out = _stage(cfg, "preprocess")
    prod_path = os.path.join(out, "production_frame.csv")
    if not os.path.exists(prod_path):
        raise ConfigInvalid(f"preprocess outputs missing under {out}; run 'preprocess' first")
    frames = {}
    fdir = os.path.join(out, "frames")
    for prop in cfg.properties:
        blocks = {}
        for formation in cfg.targets:
            path = os.path.join(fdir, f"{prop}__{formation}.csv")
            if os.path.exists(path):
                with open(path, encoding="utf-8") as fh:
                    blocks[formation] = fh.read()
        side = os.path.join(fdir, f"{prop}.json")
        sidecar = open(side, encoding="utf-8").read() if os.path.exists(side) else None
        frames[prop] = StandardizedLogFrame.read(prop, blocks, sidecar)
    coords = {}
    with open(os.path.join(out, "vertical_coords.csv"), encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            coords[row["well_id"]] = (float(row["x"]), float(row["y"]))
    return Preprocessed(frames, None, None, CumulativeProductionFrame.read_csv(prod_path), coords)


def cmd_features(cfg: PipelineConfig) -> None:
    pre = _read_preprocessed(cfg)
    feats = extract_features(pre, cfg.fpca_k, cfg.geostat)
    out = _stage(cfg, "features")
    _frame_csv(feats.frame, os.path.join(out, "features.csv"))
    for (prop, formation), model in sorted(feats.models.items()):
        _write(os.path.join(out, "fpca", f"{prop}__{formation}.json"), model.to_json() + "\n")
    _write(os.path.join(out, "variograms.json"), _json(feats.variograms))
    _write(os.path.join(out, "audit.json"), _json(feats.audit))
    print(f"features: {len(feats.frame.features)} columns -> {out}")


def cmd_validate(cfg: PipelineConfig) -> None:
    path = os.path.join(_stage(cfg, "features"), "features.csv")
    if not os.path.exists(path):
        raise ConfigInvalid(f"{path} missing; run 'features' first")
    frame = CumulativeProductionFrame.read_csv(path)
    if not frame.features:
        raise MissingFeatures("feature columns are absent; refusing to validate")
    zoo = get_zoo(cfg.zoo)
    out = _stage(cfg, "validate")
    results = []
    for phase in cfg.phases:
        log.info("validating %s at %d months", phase, cfg.horizon)

        def progress(i, n, phase=phase):
            if i % 10 == 0 or i == n:
                log.info("%s: outer iteration %d/%d", phase, i, n)

        res = run_phase(frame, phase, cfg.horizon, zoo, cfg.evaluation, n_jobs=cfg.n_jobs, progress=progress)
        results.append(res)
        _write(os.path.join(out, f"predictions_{phase}.csv"), predictions_csv(res))
        for name, svg in sorted(scatter_plots(res).items()):
            _write(os.path.join(out, "plots", f"{phase}_{name}.svg"), svg)
    echo = {
        "horizon": cfg.horizon,
        "phases": cfg.phases,
        "evaluation": asdict(cfg.evaluation),
        "zoo": [s.name for s in zoo],
        "n_features": len(frame.features),
    }
    text = report_json(results, echo)
    _write(os.path.join(out, "report.json"), text)
    print(summary_table(json.loads(text)), end="")


def cmd_report(cfg: PipelineConfig) -> None:
    path = os.path.join(_stage(cfg, "validate"), "report.json")
    if not os.path.exists(path):
        raise ConfigInvalid(f"{path} missing; run 'validate' first")
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    table = summary_table(doc)
    _write(os.path.join(_stage(cfg, "validate"), "summary.md"), table)
    print(table, end="")


def cmd_synth(args) -> None:
    if not args.out:
        raise ConfigInvalid("synth needs --out DIR")
    params = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            params = yaml.safe_load(fh) or {}
        if not isinstance(params, dict):
            raise ConfigInvalid("synth config must be a mapping")
        unknown = sorted(set(params) - set(SynthConfig.__dataclass_fields__))
        if unknown:
            raise ConfigInvalid(f"unknown synth keys: {unknown}")
        if "signal_coefficients" in params:
            params["signal_coefficients"] = {
                (t["property"], t["formation"], int(t["component"])): float(t["weight"]) for t in params["signal_coefficients"] or []
            }
        if "formations" in params:
            params["formations"] = tuple((f["name"], float(f["thickness"])) for f in params["formations"])
    params["seed"] = _resolve_seed(args, int(params.get("seed", 0)))
    if args.null_signal:
        params["signal_coefficients"] = {}
    field = generate(SynthConfig(**params))
    field.write(args.out)
    target = params.get("target_formation", "Target")
    _write(os.path.join(args.out, "sweetspot.yaml"), default_config_text(targets=(target,)))
    print(f"synth: seed {params['seed']} -> {args.out}")


COMMANDS = {"preprocess": cmd_preprocess, "features": cmd_features, "validate": cmd_validate, "report": cmd_report}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sweetspot", description="Sweet-spot workflow: logs -> fPCA features -> validated production models.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    # SUPPRESS keeps a subcommand from resetting a flag given before it
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS, help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("preprocess", "features", "validate", "report", "synth"):
        sp = sub.add_parser(name, parents=[common])
        sp.add_argument("--config", help="pipeline YAML (synth: optional generator YAML)")
        sp.add_argument("--seed", type=int, default=None, help="overrides config and SWEETSPOT_SEED")
        sp.add_argument("--phase", choices=("oil", "gas"), default=None)
        sp.add_argument("--horizon", type=int, default=None, help="months")
        sp.add_argument("--out", default=None, help="output directory")
        if name == "synth":
            sp.add_argument("--null-signal", action="store_true", help="production independent of the logs")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "synth":
            cmd_synth(args)
        else:
            COMMANDS[args.command](_load(args))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error")
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
