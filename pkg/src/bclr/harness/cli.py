"""Command-line interface: ``bclr {fit,multi,simulate,bench}``.

Chains started from the CLI use ``make_stream(seed, 0)``, so a library call
with the same stream reproduces CLI output exactly.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from ..core import GaussianPrior, GibbsConfig, KappaPrior, run_gibbs
from ..embeddings import EmbeddingSpec, embed_image_series, embed_tabular_series, feature_labels
from ..multi import MultiConfig, multi_fit
from ..posterior import (
    ChangepointPosterior,
    highest_mass_set,
    normalized_entropy,
    point_estimates,
    quantile_interval,
    snr_report,
)
from ..rng import make_stream
from .bench import DEFAULTS, run_scenario
from .generators import SCENARIOS, ScenarioSpec, generate
from .io import is_image_stack, read_csv, read_image_stack, write_csv, write_image_stack, write_json

__all__ = ["main", "build_parser", "load_features", "parse_kappa_prior", "fit_summary"]

IMAGE_SCALE = 3.0
TABULAR_SCALE = 1.0 / 3.0


class CliError(Exception):
    pass


def parse_kappa_prior(text: str | None, n: int) -> KappaPrior | None:
    """``uniform`` or ``binomial:p=0.8[,nu=0.02]``."""
    if text is None or text == "uniform":
        return None
    kind, _, rest = text.partition(":")
    if kind != "binomial":
        raise CliError(f"unknown kappa prior {text!r}")
    params = {}
    for item in filter(None, rest.split(",")):
        key, eq, val = item.partition("=")
        if not eq or key not in ("p", "nu"):
            raise CliError(f"bad kappa prior parameter {item!r}")
        try:
            params[key] = float(val)
        except ValueError:
            raise CliError(f"bad kappa prior parameter {item!r}") from None
    if "p" not in params:
        raise CliError("binomial kappa prior needs p")
    return KappaPrior.binomial(n, params["p"], params.get("nu", 1.0))


def _embedding(args, image: bool) -> EmbeddingSpec:
    kind = args.embed or ("tda-stat" if image else "identity")
    spec = EmbeddingSpec(kind, sigma=args.sigma, connectivity=args.connectivity, standardize_stage=args.standardize_stage)
    if image != (spec.kind in ("tda-stat", "persistence-image")):
        raise CliError(f"embedding {kind} does not apply to {'an image stack' if image else 'tabular data'}")
    return spec


def load_features(path, args):
    """Read an image stack or CSV and embed it; returns ``(FeatureMatrix, labels, is_image)``."""
    path = Path(path)
    if not path.exists():
        raise CliError(f"{path}: no such file")
    image = is_image_stack(path)
    spec = _embedding(args, image)
    if image:
        X = embed_image_series(read_image_stack(path), spec)
        return X, feature_labels(spec), True
    rows, header = read_csv(path)
    X = embed_tabular_series(rows, spec)
    q = rows.shape[1]
    labels = feature_labels(spec, q)
    if header is not None and spec.kind == "identity":
        labels = list(header)
    return X, labels, False


def _prior(args, d: int, scale: float) -> GaussianPrior:
    mu = np.zeros(d)
    sigma = scale * np.eye(d)
    if args.prior_mean_file:
        mu = read_csv(args.prior_mean_file)[0].ravel()
    if args.prior_cov_file:
        sigma = read_csv(args.prior_cov_file)[0]
    if mu.shape != (d,):
        raise CliError(f"prior mean has {mu.size} entries, features have {d}")
    return GaussianPrior(mu, sigma)


def fit_summary(samples, n: int, labels=None, start: int = 1, alpha: float = 0.05) -> dict:
    """JSON-ready summary of one changepoint posterior."""
    post = ChangepointPosterior.from_samples(samples, n, start=start)
    mode, mean = point_estimates(samples)
    qi = quantile_interval(post, alpha)
    hm = highest_mass_set(post, alpha)
    snr = snr_report(samples)
    return {
        "n": n,
        "draws": len(samples),
        "support_start": post.start,
        "pmf": post.pmf.tolist(),
        "mode": mode + start - 1,
        "mean": mean + start - 1,
        f"I_{alpha}": list(qi.bounds),
        f"C_{alpha}": list(hm.members),
        "entropy": normalized_entropy(post),
        "snr": [
            {"index": j, "label": lab, "mean": m, "sd": s, "snr": v}
            for j, lab, m, s, v in snr.rows(labels)
        ],
    }


def _write_draws(path, samples, labels, offset: int = 0):
    header = ["kappa"] + [f"beta[{lab}]" for lab in labels]
    write_csv(path, np.column_stack([samples.kappa + offset, samples.beta]), header)


def cmd_fit(args) -> int:
    X, labels, image = load_features(args.input, args)
    scale = args.prior_scale if args.prior_scale is not None else (IMAGE_SCALE if image else TABULAR_SCALE)
    prior = _prior(args, X.d, scale)
    samples = run_gibbs(X, prior, parse_kappa_prior(args.kappa_prior, X.n),
                        GibbsConfig(args.iters, args.burn_in), make_stream(args.seed, 0))
    if args.draws:
        _write_draws(args.draws, samples, labels)
    summary = {"command": "fit", "input": str(args.input), "seed": args.seed, "prior_scale": scale,
               **fit_summary(samples, X.n, labels)}
    text = write_json(args.output, summary)
    if args.output in (None, "-"):
        print(text)
    return 0


def cmd_multi(args) -> int:
    X, labels, _ = load_features(args.input, args)
    eta = args.entropy
    if len(eta) < 1:
        raise CliError("--entropy needs at least the final threshold")
    config = MultiConfig(
        J=args.segments, min_gap=args.min_gap, eta=tuple(eta[:-1]), eta_final=eta[-1],
        warmup=GibbsConfig(args.warmup_iters, args.warmup_burn_in),
        final=GibbsConfig(args.iters, args.burn_in),
        prior_scale=args.prior_scale if args.prior_scale is not None else 1.0,
    )
    res = multi_fit(X, config, make_stream(args.seed, 0))
    changes = []
    for k, seg in zip(res.changepoints, res.segments):
        s = fit_summary(seg.samples, seg.hi - seg.lo, labels, start=seg.lo + 1)
        s.update(changepoint=k, segment_rows=[seg.lo + 1, seg.hi])
        changes.append(s)
    if args.draws:
        for i, seg in enumerate(res.segments):
            _write_draws(f"{args.draws}.{i + 1}.csv", seg.samples, labels, offset=seg.lo)
    payload = {"command": "multi", "input": str(args.input), "seed": args.seed,
               "changepoints": list(res.changepoints), "partitions": [list(p) for p in res.history],
               "details": changes}
    text = write_json(args.output, payload)
    if args.output in (None, "-"):
        print(text)
    return 0


def cmd_simulate(args) -> int:
    spec = ScenarioSpec(args.kind, args.reps, args.seed)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for r in range(spec.reps):
        data, truth = generate(spec.kind, spec.stream(r).child(0))
        if spec.kind in ("exp1", "exp2"):
            p = out / f"{spec.kind}_rep{r}.bclr"
            write_image_stack(p, data)
        else:
            p = out / f"{spec.kind}_rep{r}.csv"
            write_csv(p, data, [f"x{j + 1}" for j in range(data.shape[1])])
        files.append({"rep": r, "path": str(p), "truth": truth})
    text = write_json(out / "truth.json", {"kind": spec.kind, "seed": spec.seed, "files": files})
    print(text)
    return 0


def cmd_bench(args) -> int:
    spec = ScenarioSpec(args.kind, args.reps, args.seed)
    res = run_scenario(spec, GibbsConfig(args.iters, args.burn_in), prior_scale=args.prior_scale)
    payload = {"command": "bench", "prior_scale": args.prior_scale or DEFAULTS[spec.kind].prior_scale,
               "embedding": DEFAULTS[spec.kind].embed, **res.to_dict()}
    text = write_json(args.output, payload)
    if args.output in (None, "-"):
        print(text)
    return 0


def _chain_args(p, iters=5000, burn=2500):
    p.add_argument("--iters", type=int, default=iters, help="Gibbs iterations (default %(default)s)")
    p.add_argument("--burn-in", type=int, default=burn, help="discarded iterations (default %(default)s)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--prior-scale", type=float, default=None, help="beta prior N(0, scale I)")
    p.add_argument("--output", "-o", default=None, help="JSON summary path (default stdout)")


def _input_args(p):
    p.add_argument("input", help="CSV (optional header) or BCLR-IS1 image stack")
    p.add_argument("--embed", choices=["tda-stat", "poly2", "identity", "pimg"], default=None)
    p.add_argument("--sigma", type=float, default=2.0, help="image smoothing width")
    p.add_argument("--connectivity", type=int, choices=[4, 8], default=8)
    p.add_argument("--standardize-stage", choices=["raw", "smoothed"], default="raw")
    p.add_argument("--draws", default=None, help="write raw draws as CSV")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bclr", description="Bayesian changepoint detection via logistic regression")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="single changepoint")
    _input_args(p)
    _chain_args(p)
    p.add_argument("--prior-mean-file", default=None)
    p.add_argument("--prior-cov-file", default=None)
    p.add_argument("--kappa-prior", default=None, help="uniform or binomial:p=0.8[,nu=0.02]")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("multi", help="multiple changepoints")
    _input_args(p)
    _chain_args(p)
    p.add_argument("--segments", type=int, default=10, help="initial segment count J")
    p.add_argument("--min-gap", type=int, default=10, help="minimum gap between changepoints")
    p.add_argument("--entropy", type=float, nargs="+", default=[0.75, 0.5, 1.0],
                   help="warm-up thresholds followed by the final threshold")
    p.add_argument("--warmup-iters", type=int, default=600)
    p.add_argument("--warmup-burn-in", type=int, default=300)
    p.set_defaults(func=cmd_multi)

    p = sub.add_parser("simulate", help="write synthetic data")
    p.add_argument("kind", choices=SCENARIOS)
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="scenario replications and metrics")
    p.add_argument("kind", choices=SCENARIOS)
    p.add_argument("--reps", type=int, default=100)
    _chain_args(p)
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ValueError, OSError, np.linalg.LinAlgError, AssertionError) as exc:
        print(f"bclr {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
