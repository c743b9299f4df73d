"""``mimix`` command line.

Subcommands: estimate, gen, benchmark, select, netinfer, replay.

Exit codes: 0 success, 2 input error, 3 parameter error, 4 internal
invariant violation. Every command records a JSON run manifest; ``replay``
re-runs a manifest's argument list.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import numpy as np

from .core import DatasetError, InvariantError, ParameterError, validate_dataset
from .estimators import ESTIMATOR_NAMES, get_estimator
from .eval import (
    auroc,
    count_inversions,
    edge_labels,
    mse_sweep,
    rank_features,
    roc_curve,
    score_gene_pairs,
)
from .io import (
    atomic_write,
    dumps,
    make_manifest,
    parse_columns,
    read_dataset,
    read_numeric_csv,
    write_dataset,
    write_manifest,
    write_matrix,
    write_table,
)
from .synthgen import GENERATORS, FeatureSelectionData, GeneratorSpec, apply_dropout, generate, ground_truth

EXIT_OK, EXIT_INPUT, EXIT_PARAM, EXIT_INTERNAL = 0, 2, 3, 4

_ALIASES = {
    "partition": "fixed_partition",
    "fixed": "fixed_partition",
    "adaptive": "adaptive_partition",
    "ksg-noisy": "noisy_ksg",
    "noisy-ksg": "noisy_ksg",
}


def _estimator_name(name: str) -> str:
    name = _ALIASES.get(name, name)
    if name not in ESTIMATOR_NAMES:
        raise ParameterError(f"unknown estimator {name!r}; choose from {', '.join(ESTIMATOR_NAMES)}")
    return name


def _estimator_from_args(args, name: str | None = None, overrides: dict | None = None):
    opts = dict(k=args.k, within_norm=args.norm, atom_tolerance=args.atom_tolerance,
                marginal_term=args.marginal_term, sigma=args.sigma, bins=args.bins,
                significance=args.significance, min_cell=args.min_cell)
    opts.update(overrides or {})
    return get_estimator(_estimator_name(name or args.est), **opts)


def _parse_est_item(item: str) -> tuple[str, dict]:
    """``name[:key=value,...]``, e.g. ``noisy_ksg:sigma=0.1``."""
    name, _, rest = item.partition(":")
    overrides = {}
    for pair in filter(None, rest.split(",")):
        key, _, value = pair.partition("=")
        key = key.strip().replace("-", "_")
        if key in ("k", "bins", "min_cell"):
            overrides[key] = int(value)
        elif key in ("sigma", "significance", "atom_tolerance"):
            overrides[key] = float(value)
        elif key in ("within_norm", "norm", "marginal_term"):
            overrides["within_norm" if key == "norm" else key] = value
        else:
            raise ParameterError(f"unknown estimator option {key!r} in {item!r}")
    return name, overrides


def _spec_from_args(args) -> GeneratorSpec:
    params = {}
    for key in ("m", "p", "dims", "dropout", "p_total", "q_relevant", "target_noise"):
        value = getattr(args, key, None)
        if value is not None:
            params[key] = value
    allowed = {
        "exp1": (), "exp2": ("m",), "exp3": ("m", "dims"), "exp4": ("p",),
        "featsel": ("p_total", "q_relevant", "dropout", "target_noise"),
    }[args.spec]
    extra = sorted(set(params) - set(allowed))
    if extra:
        raise ParameterError(f"{args.spec} does not take {', '.join('--' + e.replace('_', '-') for e in extra)}")
    return GeneratorSpec(args.spec, params, args.seed)


def _print_json(obj) -> None:
    sys.stdout.write(dumps(obj))


# commands


def cmd_estimate(args, argv) -> int:
    dataset = read_dataset(args.input, args.x_cols, args.y_cols)
    est = _estimator_from_args(args)
    result = est(dataset, args.seed)
    value = result.value
    if not math.isfinite(value):
        raise InvariantError(f"estimator returned a non-finite value {value!r}")
    if args.clip_zero:
        value = max(0.0, value)
    out = {"value": value, "estimator": result.estimator_name, "config": result.config, "n": dataset.n}
    manifest = make_manifest("estimate", argv, out["config"], args.seed, [args.input])
    if args.output:
        atomic_write(args.output, dumps(out))
        write_manifest(args.output + ".manifest.json", manifest)
    else:
        out["manifest"] = manifest
    _print_json(out)
    return EXIT_OK


def cmd_gen(args, argv) -> int:
    spec = _spec_from_args(args)
    data = generate(spec, args.n)
    if isinstance(data, FeatureSelectionData):
        header = [f"f{i}" for i in range(data.n_features)] + [f"t{i}" for i in range(data.target.shape[1])]
        write_matrix(args.output, header, np.hstack([data.features, data.target]))
        info = {"relevant_features": [int(i) for i in np.flatnonzero(data.relevant)],
                "feature_cols": f"0-{data.n_features - 1}",
                "target_cols": f"{data.n_features}-{data.n_features + data.target.shape[1] - 1}"}
    else:
        write_dataset(args.output, data)
        info = {"ground_truth": ground_truth(spec).to_dict(),
                "x_cols": f"0-{data.x_dim - 1}", "y_cols": f"{data.x_dim}-{data.x_dim + data.y_dim - 1}"}
    info.update({"spec": spec.to_dict(), "n": args.n, "output": args.output})
    write_manifest(args.output + ".manifest.json",
                   make_manifest("gen", argv, spec.to_dict(), args.seed, []))
    _print_json(info)
    return EXIT_OK


def cmd_benchmark(args, argv) -> int:
    spec = _spec_from_args(args)
    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    rows, results = [], []
    for item in args.est or ["mixed"]:
        name, overrides = _parse_est_item(item)
        est = _estimator_from_args(args, name, overrides)
        res = mse_sweep(est, spec, sizes, args.trials, args.seed)
        results.append(res.to_dict() | {"mse_inversions": count_inversions(res.mse_per_size), "label": item})
        for row in res.rows():
            rows.append([item, row["n"], row["trials"], row["mse"], row["bias"]])
    write_table(args.output, ["estimator", "n", "trials", "mse", "bias"], rows)
    summary = {"spec": spec.to_dict(), "sizes": sizes, "trials": args.trials, "results": results}
    atomic_write(args.output + ".json", dumps(summary))
    write_manifest(args.output + ".manifest.json",
                   make_manifest("benchmark", argv, {"spec": spec.to_dict(), "estimators": args.est or ["mixed"],
                                                     "sizes": sizes, "trials": args.trials}, args.seed, []))
    _print_json({"rows": len(rows), "output": args.output})
    return EXIT_OK


def cmd_select(args, argv) -> int:
    inputs = []
    if args.input:
        header, table = read_numeric_csv(args.input)
        inputs.append(args.input)
        if not args.target_cols:
            raise ParameterError("--target-cols is required with an input CSV")
        t_cols = parse_columns(args.target_cols, table.shape[1], header)
        f_cols = (parse_columns(args.feature_cols, table.shape[1], header) if args.feature_cols
                  else [c for c in range(table.shape[1]) if c not in t_cols])
        features, target = table[:, f_cols], table[:, t_cols]
        relevant = None
        if args.relevant:
            rel = set(parse_columns(args.relevant, table.shape[1], header))
            relevant = np.array([c in rel for c in f_cols])
        names = [header[c] for c in f_cols]
    else:
        args.spec = "featsel"
        spec = _spec_from_args(args)
        data = generate(spec, args.n)
        features, target, relevant = data.features, data.target, data.relevant
        names = [f"f{i}" for i in range(features.shape[1])]
    validate_dataset(features, target)
    est = _estimator_from_args(args)
    ranking = rank_features(features, target, est, seed=args.seed)
    write_table(args.output + "_ranking.csv", ["rank", "feature", "name", "score"],
                [[r, int(i), names[i], float(ranking.scores[i])] for r, i in enumerate(ranking.order)])
    summary = {"estimator": est.name, "estimator_params": est.params, "n": int(features.shape[0]),
               "ranking": [int(i) for i in ranking.order]}
    if relevant is not None:
        curve = roc_curve(ranking.scores, relevant)
        write_table(args.output + "_roc.csv", ["fpr", "tpr"], [[float(a), float(b)] for a, b in curve.points])
        summary["auroc"] = auroc(curve)
    atomic_write(args.output + "_summary.json", dumps(summary))
    write_manifest(args.output + ".manifest.json", make_manifest("select", argv, summary, args.seed, inputs))
    _print_json(summary)
    return EXIT_OK


def _read_gold(path: str, header: list[str], n_genes: int) -> list[tuple[int, int]]:
    def gene_index(token: str, row: int) -> int:
        token = token.strip()
        if token in header:
            return header.index(token)
        try:
            idx = int(float(token))
        except ValueError:
            raise DatasetError(f"gold standard row {row}: unknown gene {token!r}", row=row) from None
        if not 0 <= idx < n_genes:
            raise DatasetError(f"gold standard row {row}: gene index {idx} out of range (0..{n_genes - 1})", row=row)
        return idx

    edges = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        g_header = next(reader, None)
        if g_header is None or [h.strip() for h in g_header[:3]] != ["gene_a", "gene_b", "label"]:
            raise DatasetError("gold standard CSV must have header gene_a,gene_b,label")
        for r, raw in enumerate(reader):
            if not raw or all(not c.strip() for c in raw):
                continue
            if len(raw) < 3:
                raise DatasetError(f"gold standard row {r} has {len(raw)} cells, expected 3", row=r)
            a, b = gene_index(raw[0], r), gene_index(raw[1], r)
            try:
                label = int(float(raw[2]))
            except ValueError:
                raise DatasetError(f"gold standard row {r}, column 2: bad label {raw[2]!r}", row=r, column=2) from None
            if label not in (0, 1):
                raise DatasetError(f"gold standard row {r}, column 2: label must be 0 or 1", row=r, column=2)
            if label == 1:
                edges.append((a, b))
    return edges


def cmd_netinfer(args, argv) -> int:
    header, expr = read_numeric_csv(args.expression)
    if expr.shape[1] < 3:
        raise ParameterError("need at least 3 genes")
    edges = _read_gold(args.gold, header, expr.shape[1])
    observed = apply_dropout(expr, args.dropout, args.seed)
    est = _estimator_from_args(args)
    scores = score_gene_pairs(observed, est, seed=args.seed)
    labels = edge_labels(scores.pairs, edges, expr.shape[1])
    summary = {"estimator": est.name, "estimator_params": est.params, "dropout": args.dropout,
               "genes": int(expr.shape[1]), "samples": int(expr.shape[0]), "pairs": int(len(scores.pairs)),
               "true_edges": int(labels.sum())}
    if labels.any() and not labels.all():
        summary["auroc"] = auroc(roc_curve(scores.scores, labels))
    else:
        summary["auroc"] = None
    write_table(args.output + "_pairs.csv", ["gene_a", "gene_b", "score", "label"],
                [[int(a), int(b), float(s), int(lab)] for (a, b), s, lab in zip(scores.pairs, scores.scores, labels)])
    atomic_write(args.output + "_summary.json", dumps(summary))
    write_manifest(args.output + ".manifest.json",
                   make_manifest("netinfer", argv, summary, args.seed, [args.expression, args.gold]))
    _print_json(summary)
    return EXIT_OK


def cmd_replay(args, argv) -> int:
    with open(args.manifest, encoding="utf-8") as fh:
        manifest = json.load(fh)
    return main(manifest["argv"])


# parser


def _add_estimator_options(p, repeat_est=False):
    if repeat_est:
        p.add_argument("--est", action="append",
                       help="estimator, repeatable; options as name:key=value,... (e.g. noisy_ksg:sigma=0.1)")
    else:
        p.add_argument("--est", default="mixed", help=f"estimator: {', '.join(ESTIMATOR_NAMES)}")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--norm", default="max", choices=["max", "euclidean"], help="within-space norm")
    p.add_argument("--atom-tolerance", type=float, default=0.0)
    p.add_argument("--marginal-term", default="log", choices=["log", "digamma"])
    p.add_argument("--sigma", type=float, default=None, help="noise level for noisy_ksg")
    p.add_argument("--bins", type=int, default=8, help="bins per dimension for fixed_partition")
    p.add_argument("--significance", type=float, default=0.05)
    p.add_argument("--min-cell", type=int, default=4)


def _add_spec_options(p):
    p.add_argument("--m", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--dims", type=int)
    p.add_argument("--dropout", type=float)
    p.add_argument("--p-total", type=int)
    p.add_argument("--q-relevant", type=int)
    p.add_argument("--target-noise", choices=["exp", "poisson"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mimix", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="estimate I(X;Y) from a CSV file")
    p.add_argument("input")
    p.add_argument("--x-cols", required=True, help="X columns, e.g. 0 or 0-2,5 or names")
    p.add_argument("--y-cols", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--clip-zero", action="store_true", help="report max(0, estimate)")
    p.add_argument("--output", help="write the JSON result here instead of embedding the manifest")
    _add_estimator_options(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("gen", help="sample a synthetic distribution to CSV")
    p.add_argument("spec", choices=GENERATORS)
    p.add_argument("output")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    _add_spec_options(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("benchmark", help="MSE versus sample size over repeated trials")
    p.add_argument("spec", choices=[g for g in GENERATORS if g != "featsel"])
    p.add_argument("output", help="CSV path; a .json summary and manifest are written alongside")
    p.add_argument("--sizes", default="500,1000,2000,4000")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, required=True)
    _add_spec_options(p)
    _add_estimator_options(p, repeat_est=True)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("select", help="rank features by MI with a target; ROC and AUROC")
    p.add_argument("input", nargs="?", help="CSV with features and target; omit to generate featsel data")
    p.add_argument("--output", required=True, help="output prefix")
    p.add_argument("--feature-cols")
    p.add_argument("--target-cols")
    p.add_argument("--relevant", help="feature columns known to be relevant (enables ROC)")
    p.add_argument("--n", type=int, default=5000)
    p.add_argument("--seed", type=int, required=True)
    _add_spec_options(p)
    _add_estimator_options(p)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("netinfer", help="score gene pairs by MI after simulated dropout")
    p.add_argument("expression", help="samples x genes CSV with a header")
    p.add_argument("gold", help="edge list CSV with header gene_a,gene_b,label")
    p.add_argument("--dropout", type=float, default=0.0)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--output", required=True, help="output prefix")
    _add_estimator_options(p)
    p.set_defaults(func=cmd_netinfer)

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARAM if exc.code else EXIT_OK
    try:
        return args.func(args, argv)
    except DatasetError as exc:
        print(f"mimix: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (OSError, json.JSONDecodeError) as exc:
        print(f"mimix: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ParameterError as exc:
        print(f"mimix: parameter error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except InvariantError as exc:
        print(f"mimix: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
