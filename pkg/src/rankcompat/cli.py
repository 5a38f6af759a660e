"""Command-line entry point: ``rankcompat <subcommand> [flags]``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric/degenerate
error. Every run echoes its fully resolved configuration to stderr as JSON.
Values come from (lowest to highest precedence) built-in defaults, the
``--config`` JSON file, and command-line flags. The base seed falls back to
the ``RANKCOMPAT_SEED`` environment variable when neither sets it.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

import numpy as np

from rankcompat import combinatorics, data_io, metrics, pipeline, plots
from rankcompat.errors import DataError, DegenerateError, InvalidConfig
from rankcompat.surrogate import SurrogateConfig
from rankcompat.trainer import TrainConfig, predict, train

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3
SEED_ENV = "RANKCOMPAT_SEED"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def parse_range(text: str) -> tuple[float, ...]:
    """``start..end[:step]`` (inclusive, default step 0.1), a comma list, or one number."""
    text = text.strip()
    try:
        if ".." in text:
            body, _, step = text.partition(":")
            start, _, end = body.partition("..")
            step_v = float(step) if step else 0.1
            if step_v <= 0:
                raise ValueError
            return pipeline.grid(float(start), float(end), step_v)
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid range {text!r}") from None


# --------------------------------------------------------------------------
# flag groups: (section, field, flag, type, help)

_SYNTH = [
    ("n", "--n", int, "number of rows"),
    ("d", "--d", int, "number of features"),
    ("prevalence", "--prevalence", float, "positive-label rate"),
    ("class_separation", "--class-separation", float,
     "mean gap between class-conditional Gaussians per informative feature"),
    ("noise_features", "--noise-features", int, "trailing features without signal"),
    ("shift", "--shift", float, "covariate-shift magnitude on updated/eval partitions"),
]
_SPLIT = [
    ("n_original", "--n-original", int, "rows for the original model (dev+val)"),
    ("n_updated", "--n-updated", int, "rows for the updated models (dev+val)"),
    ("dev_fraction", "--dev-fraction", float, "dev share of each model dataset"),
]
_CAND = [
    ("n_resample", "--n-resample", int, "bootstrap variants in the BCE pool"),
    ("n_shuffle", "--n-shuffle", int, "reshuffled variants in the BCE pool"),
    ("reg_grid", "--regs", parse_range, "L2 strengths, e.g. 0.1,0.01,0.001"),
]
_TRAIN = [
    ("alpha", "--alpha", float, "BCE weight in the training objective"),
    ("s", "--s", float, "ranking-sigmoid sharpness"),
    ("reg_l2", "--reg-l2", float, "L2 penalty"),
    ("learning_rate", "--learning-rate", float, "SGD step size"),
    ("batch_size", "--batch-size", int, "mini-batch size"),
    ("max_epochs", "--max-epochs", int, "epoch budget"),
    ("patience", "--patience", int, "early-stopping patience (epochs)"),
]
_TRAIN_TEMPLATE = [f for f in _TRAIN if f[0] not in ("alpha", "reg_l2")]


def _add_group(p, title, flags):
    g = p.add_argument_group(title)
    for field, flag, typ, help_ in flags:
        g.add_argument(flag, dest=field, type=typ, default=None, help=help_)


def _common(p):
    p.add_argument("--config", type=Path, default=None,
                   help="JSON file with sections synth/split/candidates/train/experiment")
    p.add_argument("--seed", type=int, default=None,
                   help=f"base seed (falls back to ${SEED_ENV}, then 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rankcompat", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="subcommand", parser_class=_Parser)

    p = sub.add_parser("gen-data", help="write a synthetic dataset CSV")
    _common(p)
    p.add_argument("--out", type=Path, required=True, help="output CSV path")
    _add_group(p, "synthetic data", _SYNTH)

    p = sub.add_parser("split", help="write the five partition CSVs")
    _common(p)
    p.add_argument("--data", type=Path, required=True, help="dataset CSV")
    p.add_argument("--out-dir", type=Path, required=True)
    _add_group(p, "split", _SPLIT)

    p = sub.add_parser("train", help="train one model and write its JSON")
    _common(p)
    p.add_argument("--dev", type=Path, required=True, help="development CSV")
    p.add_argument("--val", type=Path, required=True, help="validation CSV")
    p.add_argument("--original", type=Path, default=None,
                   help="original model JSON (required when alpha < 1)")
    p.add_argument("--out", type=Path, required=True, help="output model JSON")
    _add_group(p, "training", _TRAIN)

    p = sub.add_parser("evaluate", help="print AUROC/RBC/BTC/POP table for a model-pair")
    _common(p)
    p.add_argument("--original", type=Path, required=True)
    p.add_argument("--updated", type=Path, required=True)
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--tau-o", type=float, default=0.5, help="original decision threshold")
    p.add_argument("--tau-u", type=float, default=0.5, help="updated decision threshold")
    p.add_argument("--json", action="store_true", help="print JSON instead of text")

    for name, help_ in (("update-experiment", "replicated BCE-vs-RBC update experiment"),
                        ("btc-sweep", "BTC over a grid of decision thresholds")):
        p = sub.add_parser(name, help=help_)
        _common(p)
        p.add_argument("--data", type=Path, default=None,
                       help="dataset CSV (default: generate from the synthetic flags)")
        p.add_argument("--out-dir", type=Path, required=True)
        p.add_argument("--replications", type=int, default=None)
        p.add_argument("--jobs", type=int, default=1,
                       help="worker processes; output does not depend on it")
        if name == "update-experiment":
            p.add_argument("--alphas", type=parse_range, default=None, help="e.g. 0..1")
            p.add_argument("--betas", type=parse_range, default=None, help="e.g. 0..1")
        else:
            p.add_argument("--tau-o", dest="tau_grid_o", type=parse_range, default=None,
                           help="original-model thresholds, e.g. 0..0.95:0.05")
            p.add_argument("--tau-u", dest="tau_grid_u", type=parse_range, default=None,
                           help="updated-model thresholds")
        _add_group(p, "synthetic data", _SYNTH)
        _add_group(p, "split", _SPLIT)
        _add_group(p, "candidates", _CAND)
        _add_group(p, "training", _TRAIN_TEMPLATE)

    p = sub.add_parser("combinatorics", help="configuration-count curves")
    _common(p)
    p.add_argument("--m", type=int, default=400, help="number of patient-pairs")
    p.add_argument("--auroc-o", type=float, default=0.65)
    p.add_argument("--auroc-u", type=parse_range, default=(0.65, 0.75, 0.85, 0.95))
    p.add_argument("--out-dir", type=Path, required=True)
    return parser


# --------------------------------------------------------------------------
# config resolution


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise data_io.ParseError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(cfg, dict):
        raise data_io.SchemaError("config file must hold a JSON object")
    return cfg


def _checked(file_cfg, name, known):
    section = file_cfg.get(name, {})
    if not isinstance(section, dict):
        raise data_io.SchemaError(f"config section {name!r} must be an object")
    unknown = sorted(set(section) - set(known))
    if unknown:
        raise data_io.SchemaError(f"unknown keys in config section {name!r}: {unknown}")
    return section


def _section(args, file_cfg, name, cls, flags, **fixed):
    values = {f.name: f.default for f in dataclasses.fields(cls)
              if f.default is not dataclasses.MISSING}
    values.update(_checked(file_cfg, name, values))
    for field, *_ in flags:
        v = getattr(args, field, None)
        if v is not None:
            values[field] = v
    values.update(fixed)
    return values


def _resolve_seed(args, file_cfg):
    if args.seed is not None:
        return args.seed
    if "seed" in file_cfg:
        return int(file_cfg["seed"])
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise InvalidConfig(f"{SEED_ENV}={env!r} is not an integer") from None
    return 0


def _train_cfg(values) -> TrainConfig:
    values = dict(values)
    sur = SurrogateConfig(**{k: values.pop(k) for k in ("s", "alpha") if k in values})
    values.pop("surrogate", None)
    return TrainConfig(surrogate=sur, **values)


def _train_values(args, file_cfg, flags, seed):
    defaults = dataclasses.asdict(TrainConfig())
    defaults.update(defaults.pop("surrogate"))
    values = {**defaults, **_checked(file_cfg, "train", defaults)}
    for field, *_ in flags:
        v = getattr(args, field, None)
        if v is not None:
            values[field] = v
    values["seed"] = seed
    return values


def _echo(config):
    print(json.dumps(config, sort_keys=True, default=list), file=sys.stderr)


def _dataset_from(args, file_cfg, seed, resolved):
    synth = _section(args, file_cfg, "synth", data_io.SynthConfig, _SYNTH, seed=seed)
    resolved["synth"] = synth
    if args.data is not None:
        resolved["data"] = str(args.data)
        return data_io.load_dataset(args.data), data_io.SynthConfig(**synth).shift
    cfg = data_io.SynthConfig(**synth)
    return data_io.generate(cfg), cfg.shift


# --------------------------------------------------------------------------
# subcommands


def cmd_gen_data(args, file_cfg):
    seed = _resolve_seed(args, file_cfg)
    synth = _section(args, file_cfg, "synth", data_io.SynthConfig, _SYNTH, seed=seed)
    _echo({"command": "gen-data", "out": str(args.out), "synth": synth})
    data_io.save_dataset(args.out, data_io.generate(data_io.SynthConfig(**synth)))


PARTITION_FILES = ("orig_dev.csv", "orig_val.csv", "upd_dev.csv", "upd_val.csv", "eval.csv")


def cmd_split(args, file_cfg):
    seed = _resolve_seed(args, file_cfg)
    spec = _section(args, file_cfg, "split", pipeline.SplitSpec, _SPLIT)
    _echo({"command": "split", "data": str(args.data), "out_dir": str(args.out_dir),
           "split": spec, "seed": seed})
    parts = pipeline.split(data_io.load_dataset(args.data), pipeline.SplitSpec(**spec), seed)
    out = data_io.ensure_dir(args.out_dir)
    for fname, ds in zip(PARTITION_FILES, parts[:5]):
        data_io.save_dataset(out / fname, ds)


def cmd_train(args, file_cfg):
    seed = _resolve_seed(args, file_cfg)
    values = _train_values(args, file_cfg, _TRAIN, seed)
    _echo({"command": "train", "dev": str(args.dev), "val": str(args.val),
           "original": None if args.original is None else str(args.original),
           "out": str(args.out), "train": values})
    cfg = _train_cfg(values)
    orig = data_io.load_model(args.original) if args.original is not None else None
    model = train(data_io.load_dataset(args.dev), data_io.load_dataset(args.val), orig, cfg)
    data_io.save_model(args.out, model)


def evaluation_report(orig, upd, ds, tau_o, tau_u) -> dict:
    o = predict(orig, ds.features)
    u = predict(upd, ds.features)
    pop = metrics.pop_table(o, u, ds.labels)
    out = {"auroc_o": pop.auroc_o, "auroc_u": pop.auroc_u,
           "rbc": metrics.rbc_from_pop(pop)}
    try:
        out["btc"] = metrics.btc(o, u, ds.labels, tau_o, tau_u)
    except metrics.OriginalAllWrong:
        out["btc"] = None
    out["accuracy_o"] = metrics.accuracy(o, ds.labels, tau_o)
    out["accuracy_u"] = metrics.accuracy(u, ds.labels, tau_u)
    out["pop"] = pop.as_dict()
    if metrics.in_regime(pop.auroc_o, pop.auroc_u):
        out["rbc_lower_bound"] = metrics.bounds(pop.auroc_o, pop.auroc_u).rbc_lower
    return out


def cmd_evaluate(args, file_cfg):
    _echo({"command": "evaluate", "original": str(args.original),
           "updated": str(args.updated), "data": str(args.data),
           "tau_o": args.tau_o, "tau_u": args.tau_u})
    rep = evaluation_report(data_io.load_model(args.original), data_io.load_model(args.updated),
                            data_io.load_dataset(args.data), args.tau_o, args.tau_u)
    if args.json:
        print(json.dumps(rep, indent=2))
        return
    for key, value in rep.items():
        if key == "pop":
            for k, v in value.items():
                print(f"{k} {v}")
        else:
            print(f"{key} {'undefined' if value is None else value}")


def _experiment_setup(args, file_cfg, command):
    seed = _resolve_seed(args, file_cfg)
    resolved = {"command": command, "out_dir": str(args.out_dir), "seed": seed,
                "jobs": args.jobs}
    ds, shift = _dataset_from(args, file_cfg, seed, resolved)
    exp = file_cfg.get("experiment", {})
    replications = args.replications if args.replications is not None else exp.get(
        "replications", 40)
    if replications < 1:
        raise InvalidConfig("--replications must be at least 1")
    split_v = _section(args, file_cfg, "split", pipeline.SplitSpec, _SPLIT)
    fixed = {}
    if command == "update-experiment":
        alphas = args.alphas if args.alphas is not None else exp.get("alphas")
        if alphas is not None:
            fixed["alpha_grid"] = tuple(alphas)
    cand_v = _section(args, file_cfg, "candidates", pipeline.CandidateSpec, _CAND, **fixed)
    train_v = _train_values(args, file_cfg, _TRAIN_TEMPLATE, seed)
    resolved.update(replications=replications, split=split_v, candidates=cand_v,
                    train=train_v)
    return (ds, shift, seed, replications, pipeline.SplitSpec(**split_v),
            pipeline.CandidateSpec(**cand_v), _train_cfg(train_v), exp, resolved)


def cmd_update_experiment(args, file_cfg):
    ds, shift, seed, reps, splits, cand, tcfg, exp, resolved = _experiment_setup(
        args, file_cfg, "update-experiment")
    betas = args.betas if args.betas is not None else tuple(exp.get("betas", pipeline.DEFAULT_BETAS))
    resolved["betas"] = list(betas)
    _echo(resolved)
    if reps < 2:
        raise pipeline.TooFewReplications("update-experiment needs --replications >= 2")
    results = pipeline.run_experiment(ds, splits, cand, betas, seed, reps, jobs=args.jobs,
                                      train_cfg=tcfg, shift=shift)
    out = data_io.ensure_dir(args.out_dir)
    data_io.write_report(out / "summary.csv", pipeline.aggregate(results))

    header = ["replication"] + results[0].report_rows()[0]
    rows = [[r] + row for r, res in enumerate(results) for row in res.report_rows()[1]]
    data_io.write_csv(out / "replications.csv", header, rows)

    scatter_rows = []
    for r, res in enumerate(results):
        scatter_rows.append([r, "original", "", "", res.original_auroc, 1.0, ""])
        pools = [("bce", "", res.bce)] + [("rbc", a, cm) for a, cm in res.rbc.items()]
        for kind, alpha, cm in pools:
            for i in range(len(cm)):
                scatter_rows.append([r, kind, alpha, cm.reg[i], cm.eval_auroc[i],
                                     cm.eval_rbc[i], cm.eval_phi_pp[i]])
    data_io.write_csv(out / "scatter.csv",
                      ["replication", "model", "alpha", "reg_l2", "eval_auroc", "eval_rbc",
                       "eval_phi_pp"], scatter_rows)
    series = [("BCE models", [x for res in results for x in res.bce.eval_auroc],
               [y for res in results for y in res.bce.eval_rbc])]
    for a in cand.alpha_grid:
        series.append((f"RBC alpha={a:g}",
                       [x for res in results for x in res.rbc[a].eval_auroc],
                       [y for res in results for y in res.rbc[a].eval_rbc]))
    plots.write_svg(out / "scatter.svg", plots.scatter_chart(
        series, "Held-out AUROC vs RBC per candidate", "AUROC (updated)", "RBC"))

    hist = pipeline.phi_pp_histogram([res.bce.eval_phi_pp for res in results])
    data_io.write_csv(out / "phi_pp_histogram.csv", ["bin_lo", "bin_hi", "mean_count"],
                      [[hist.edges[i], hist.edges[i + 1], hist.mean[i]]
                       for i in range(hist.mean.size)])


def cmd_btc_sweep(args, file_cfg):
    ds, shift, seed, reps, splits, cand, tcfg, exp, resolved = _experiment_setup(
        args, file_cfg, "btc-sweep")
    taus_o = args.tau_grid_o or tuple(exp.get("tau_grid_o", pipeline.DEFAULT_TAUS))
    taus_u = args.tau_grid_u or tuple(exp.get("tau_grid_u", pipeline.DEFAULT_TAUS))
    resolved.update(tau_grid_o=list(taus_o), tau_grid_u=list(taus_u))
    _echo(resolved)
    seeds = [pipeline.derive_seed(seed, pipeline._REPL, r) for r in range(reps)]
    job = [(ds, splits, cand, s, taus_o, taus_u, tcfg, shift) for s in seeds]
    if args.jobs > 1 and reps > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            grids = list(pool.map(_sweep_job, job))
    else:
        grids = [_sweep_job(j) for j in job]
    mean = pipeline.mean_btc_grid(grids)
    out = data_io.ensure_dir(args.out_dir)
    header, rows = mean.rows()
    data_io.write_csv(out / "btc_sweep.csv", header[:-1], [r[:-1] for r in rows])
    plots.write_svg(out / "btc_sweep.svg", plots.heatmap(
        mean.btc, [f"{t:g}" for t in taus_o], [f"{t:g}" for t in taus_u],
        "Mean max-achievable held-out BTC", "tau (updated)", "tau (original)", label="BTC"))


def _sweep_job(a):
    ds, splits, cand, s, taus_o, taus_u, tcfg, shift = a
    return pipeline.btc_sweep_replication(ds, splits, cand, s, taus_o, taus_u,
                                          train_cfg=tcfg, shift=shift)


def cmd_combinatorics(args, file_cfg):
    _echo({"command": "combinatorics", "m": args.m, "auroc_o": args.auroc_o,
           "auroc_u": list(args.auroc_u), "out_dir": str(args.out_dir)})
    curves = combinatorics.nu_curve(args.auroc_o, args.auroc_u, args.m)
    out = data_io.ensure_dir(args.out_dir)
    data_io.write_csv(out / "nu_curves.csv", *combinatorics.curves_to_rows(curves))
    series = [(f"AUROC_u={c.auroc_u:g}", c.rbc, c.log10_count) for c in curves]
    markers = [(c.peak_rbc, float(combinatorics.log_nu(c.triple, c.k_star)) / np.log(10))
               for c in curves]
    plots.write_svg(out / "nu_curves.svg", plots.line_chart(
        series, f"Configurations per RBC (m={args.m}, AUROC_o={args.auroc_o:g})",
        "RBC", "log10 count", markers=markers))
    for c in curves:
        print(f"auroc_u {c.auroc_u:g} k_star {c.k_star} peak_rbc {c.peak_rbc:.6f}")


COMMANDS = {
    "gen-data": cmd_gen_data,
    "split": cmd_split,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "update-experiment": cmd_update_experiment,
    "btc-sweep": cmd_btc_sweep,
    "combinatorics": cmd_combinatorics,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        file_cfg = _load_config(getattr(args, "config", None))
        COMMANDS[args.command](args, file_cfg)
    except DegenerateError as exc:
        print(f"rankcompat {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, OSError) as exc:
        print(f"rankcompat {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
