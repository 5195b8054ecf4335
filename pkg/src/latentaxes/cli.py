"""Command-line surface.

All commands operate on a workspace directory with conventional file names,
so a full run is:

    latentaxes gen-data --workspace ws --n 20000
    latentaxes fit --workspace ws --d 16
    latentaxes train --workspace ws --variant C
    latentaxes edit --workspace ws --latents in.npy --attribute 2 --target 1.5
    latentaxes evaluate --workspace ws --n 1024

Options may come from a JSON config file (--config); explicit flags win.
Exit codes: 0 success, 2 config error, 3 data error, 4 numeric failure.
"""

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import baseline, editor, evaluation, gaussianize, oracle, pca, training
from .errors import ConfigInvalid, LatentAxesError, NonFinite, NonPSD
from .npyio import load_dataset, read_matrix, write_matrix

CONFIG_ERROR, DATA_ERROR, NUMERIC_ERROR = 2, 3, 4


def _apply_config(args: argparse.Namespace, parser_defaults: dict):
    """Fill unset options from the JSON config file, if one was given."""
    if not getattr(args, "config", None):
        return args
    try:
        overrides = json.loads(Path(args.config).read_text())
    except (OSError, ValueError) as exc:
        raise ConfigInvalid(f"cannot read config {args.config}: {exc}") from exc
    for key, value in overrides.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            raise ConfigInvalid(f"unknown config key {key!r}")
        # a flag explicitly given on the command line beats the file
        if getattr(args, attr) == parser_defaults.get(attr):
            setattr(args, attr, value)
    return args


def cmd_gen_data(args) -> int:
    ws = Path(args.workspace)
    ws.mkdir(parents=True, exist_ok=True)
    latent_path = ws / "latents.npy"
    if latent_path.exists() and not args.force:
        raise ConfigInvalid(f"{latent_path} exists; pass --force to overwrite")
    world = oracle.make_world(args.m, args.k, args.q,
                              correlated=args.correlated, seed=args.seed,
                              mapping_kind=args.mapping)
    latents, attrs = oracle.build_dataset(world, args.n, seed=args.seed + 1)
    write_matrix(latents, latent_path)
    write_matrix(attrs, ws / "attrs.npy")
    oracle.save_world(world, ws)
    print(f"wrote {args.n} x {args.m} latents and {args.k} attributes to {ws}")
    return 0


def cmd_fit(args) -> int:
    ws = Path(args.workspace)
    latents, attrs = load_dataset(ws / "latents.npy", ws / "attrs.npy")
    if args.d > latents.shape[1]:
        raise ConfigInvalid(f"d={args.d} exceeds latent dim {latents.shape[1]}")
    model = pca.fit_pca(latents, args.d)
    pca.save_pca(model, ws)
    transform = gaussianize.fit_transform(attrs)
    gaussianize.save_transform(transform, ws)
    frac = pca.explained_variance_fraction(model, args.d)
    print(f"PCA fit on {latents.shape[0]} samples; "
          f"d={args.d} explains {frac:.1%} of variance")
    return 0


def cmd_train(args) -> int:
    ws = Path(args.workspace)
    latents, attrs = load_dataset(ws / "latents.npy", ws / "attrs.npy")
    pca_model = pca.load_pca(ws)
    transform = gaussianize.load_transform(ws)

    cfg = training.TrainConfig(
        alpha=args.alpha, beta=args.beta, epochs=args.epochs,
        batch_size=args.batch_size, corr_mode=training.VARIANT_MODES[args.variant],
        learning_rate=args.learning_rate, seed=args.seed,
        hidden_size=args.hidden_size, n_layers=args.n_layers)

    top = pca.project(pca_model, latents).top
    attrs_gauss = gaussianize.gaussianize_columns(transform, attrs)
    model, history = training.train(top, attrs_gauss, cfg)
    training.save_model(model, cfg, ws)

    with open(ws / "loss_history.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["epoch", "recons", "attr",
                                                "corr", "total"])
        writer.writeheader()
        for i, row in enumerate(history):
            writer.writerow({"epoch": i, **{k: row[k] for k in
                                            ("recons", "attr", "corr", "total")}})
    print(f"trained variant {args.variant} for {cfg.epochs} epochs; "
          f"final recons loss {history[-1]['recons']:.4g}")
    return 0


def _load_pipeline(ws: Path) -> editor.EditPipeline:
    model, _ = training.load_model(ws)
    return editor.EditPipeline(pca=pca.load_pca(ws),
                               transform=gaussianize.load_transform(ws),
                               model=model)


def cmd_edit(args) -> int:
    ws = Path(args.workspace)
    pipeline = _load_pipeline(ws)
    latents = read_matrix(args.latents)
    k = args.attribute
    if not 0 <= k < pipeline.model.n_attributes:
        raise ConfigInvalid(f"attribute {k} out of range")
    if args.raw:
        target = gaussianize.gaussianize_value(pipeline.transform, k, args.target)
    else:
        target = args.target
    edited = editor.edit(pipeline, latents, k, target)
    out = args.out or str(ws / "edited.npy")
    write_matrix(edited, out)
    print(f"edited {latents.shape[0]} latents (attribute {k} -> {target:.3f} "
          f"gaussianized), wrote {out}")
    return 0


def cmd_evaluate(args) -> int:
    ws = Path(args.workspace)
    world = oracle.load_world(ws)
    pipeline = _load_pipeline(ws)
    latents, attrs = load_dataset(ws / "latents.npy", ws / "attrs.npy")
    linear = baseline.fit_all_directions(latents, attrs)

    classify = lambda w: oracle.classify(world, w)
    embed = lambda w: oracle.embed_identity(world, w)
    sampler = lambda n, seed: oracle.sample_w(world, n, seed)
    n_attrs = world.n_attributes

    methods = {}
    for name, method in (("autoencoder", pipeline), ("linear", linear)):
        search = (editor.search_positive if name == "autoencoder"
                  else method.search_positive)
        pairs_per_attr = []
        for k in range(n_attrs):
            wrapper = _SearchWrapper(search, pipeline if name == "autoencoder" else None)
            pairs_per_attr.append(evaluation.build_edit_pairs(
                wrapper, classify, sampler, k, n=args.n,
                threshold=args.threshold, seed=args.seed + k))
        mat = evaluation.variation_matrix(pairs_per_attr, classify)
        rates = [p.success_rate for p in pairs_per_attr]
        identities = [evaluation.identity_similarity(p, embed)
                      for p in pairs_per_attr if p.n_success > 0]
        frechets = []
        for p in pairs_per_attr:
            if p.n_success > p.negatives.shape[1]:
                frechets.append(evaluation.frechet_distance(p.negatives, p.positives))
            else:
                frechets.append(float("nan"))
        methods[name] = {
            "rates": rates,
            "variation_matrix": mat,
            "off_diagonal_sum": evaluation.off_diagonal_sum(np.nan_to_num(mat)),
            "identity": float(np.mean(identities)) if identities else float("nan"),
            "frechet": frechets,
        }
        if args.csv:
            np.savetxt(ws / f"variation_{name}.csv", mat, delimiter=",")

    report = evaluation.make_report(
        config={k: v for k, v in vars(args).items()
                if isinstance(v, (str, int, float, bool, type(None)))},
        seeds={"evaluate": args.seed, "world": world.seed},
        amplitude_grid=editor.DEFAULT_AMPLITUDE_QUANTILES,
        threshold=args.threshold,
        methods=methods,
    )
    out = ws / "report.json"
    out.write_text(json.dumps(report, indent=2))
    print(f"wrote {out}")
    for name, metrics in methods.items():
        print(f"  {name}: mean rate {np.nanmean(metrics['rates']):.3f}, "
              f"off-diagonal sum {metrics['off_diagonal_sum']:.3f}")
    return 0


class _SearchWrapper:
    """Adapts the pipeline's free-function search to the method interface."""

    def __init__(self, search, pipeline):
        self._search = search
        self._pipeline = pipeline

    def search_positive(self, latents, k, classify_fn, threshold):
        if self._pipeline is not None:
            return self._search(self._pipeline, latents, k, classify_fn, threshold)
        return self._search(latents, k, classify_fn, threshold)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="latentaxes",
                                     description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--workspace", required=True, help="workspace directory")
        p.add_argument("--config", help="JSON file with option defaults")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("gen-data", help="generate a synthetic latent/attribute dataset")
    common(p)
    p.add_argument("--n", type=int, default=20000)
    p.add_argument("--m", type=int, default=32, help="latent dimension")
    p.add_argument("--k", type=int, default=5, help="attribute count")
    p.add_argument("--q", type=int, default=8, help="identity subspace dimension")
    p.add_argument("--correlated", action="store_true",
                   help="plant correlations between adjacent attributes")
    p.add_argument("--mapping", choices=["linear", "tanh-mixed"], default="linear")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("fit", help="fit the PCA basis and attribute transform")
    common(p)
    p.add_argument("--d", type=int, default=16, help="leading components kept")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("train", help="train an autoencoder variant")
    common(p)
    p.add_argument("--variant", choices=["A", "B", "C"], default="C")
    p.add_argument("--alpha", type=float, default=1e-5)
    p.add_argument("--beta", type=float, default=1e-5)
    p.add_argument("--epochs", type=int, default=150)
    p.add_argument("--batch-size", type=int, default=256)
    p.add_argument("--learning-rate", type=float, default=1e-4)
    p.add_argument("--hidden-size", type=int, default=512)
    p.add_argument("--n-layers", type=int, default=8)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("edit", help="edit one attribute of a latent batch")
    common(p)
    p.add_argument("--latents", required=True, help="input .npy latent matrix")
    p.add_argument("--attribute", type=int, required=True)
    p.add_argument("--target", type=float, required=True)
    p.add_argument("--raw", action="store_true",
                   help="target is a raw [0,1] value instead of gaussianized")
    p.add_argument("--out", help="output .npy path")
    p.set_defaults(func=cmd_edit)

    p = sub.add_parser("evaluate", help="run the full editing evaluation")
    common(p)
    p.add_argument("--n", type=int, default=1024)
    p.add_argument("--threshold", type=float, default=0.9)
    p.add_argument("--csv", action="store_true",
                   help="also write variation matrices as CSV")
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    defaults = {a.dest: a.default for a in parser._subparsers._group_actions[0]
                .choices[args.command]._actions}
    try:
        _apply_config(args, defaults)
        return args.func(args)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return CONFIG_ERROR
    except (NonFinite, NonPSD, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return NUMERIC_ERROR
    except (LatentAxesError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return DATA_ERROR


if __name__ == "__main__":
    sys.exit(main())
