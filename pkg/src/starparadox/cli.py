"""Command-line surface.

Subcommands:

    simulate     star-tree pattern counts -> counts.csv
    posterior    tree posterior for one count vector -> posterior.json
    scan         paradox scan over sequence lengths -> scan.csv
    prior-check  temperedness verdict for a prior -> verdict.json
    moments      moment curve and threshold scan -> moments.csv, threshold.json
    claims       band-advantage and conditional-dominance reports -> claims.json
    replay       rerun a command from its manifest

Priors are given either as shorthand (``uniform:1.0``, ``power:0.5``,
``discrete:0.1,0.5``, ``logti``, ``tlogti``, ``tame``) via --spec, or as a
JSON file via --spec-file.  Every command writes a ``manifest.json`` next
to its outputs; ``replay --manifest ...`` reproduces the output files byte
for byte, for any --jobs.  Exit codes: 0 success, 2 invalid usage or
arguments, 3 runtime failure.  The environment variable STARPARADOX_SEED
supplies the default seed.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .claims import conditional_ratio_scan, in_band_advantage
from .manifest import RunManifest, write_csv_rows
from .model import PatternCounts, counts_in_band
from .moments import (
    BetaTailV,
    ConditionalZetaV,
    PointMassOneV,
    QuadraticV,
    UniformV,
    geometric_grid,
    moment_curve,
    threshold_scan,
)
from .posterior import paradox_scan, simulate_counts, tree_posterior
from .priors import parse_prior, prior_from_dict, prior_from_json
from .tempering import check_tempered

_ENV_SEED = "STARPARADOX_SEED"


def _default_seed() -> int:
    return int(os.environ.get(_ENV_SEED, "0"))


def _load_prior(args) -> object:
    if getattr(args, "spec_file", None):
        with open(args.spec_file, "r", encoding="utf-8") as fh:
            return prior_from_json(fh.read())
    if getattr(args, "spec", None):
        return parse_prior(args.spec)
    raise ValueError("a prior is required: pass --spec or --spec-file")


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)!r}")


def _write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _finite(x: float):
    """JSON-safe float: None stands in for an overflowed (infinite) ratio."""
    return x if math.isfinite(x) else None


def _parse_counts(text: str) -> PatternCounts:
    parts = [int(v) for v in text.split(",")]
    if len(parts) != 4:
        raise ValueError("counts must be four comma-separated integers")
    return PatternCounts(*parts)


# ---------------------------------------------------------------------------
# subcommand implementations; each returns the list of output files
# ---------------------------------------------------------------------------

def _cmd_simulate(args, out: Path) -> list[Path]:
    if args.n < 1:
        raise ValueError("--n must be >= 1")
    if args.trials < 1:
        raise ValueError("--trials must be >= 1")
    rng = np.random.default_rng(np.random.SeedSequence([args.seed, 7]))
    rows = []
    for trial in range(args.trials):
        c = simulate_counts(args.t, args.n, rng)
        rows.append((trial, c.n0, c.n1, c.n2, c.n3))
    path = out / "counts.csv"
    write_csv_rows(path, ("trial", "n0", "n1", "n2", "n3"), rows)
    return [path]


def _cmd_posterior(args, out: Path) -> list[Path]:
    prior = _load_prior(args)
    counts = _parse_counts(args.counts)
    weights = tuple(float(v) for v in args.weights.split(","))
    est = tree_posterior(prior, counts, weights, args.samples, args.seed, jobs=args.jobs)
    path = out / "posterior.json"
    _write_json(
        path,
        {
            "prior": prior.to_dict(),
            "counts": counts.array.tolist(),
            "weights": list(weights),
            "posterior": est.posterior.tolist(),
            "log_expected_kernel": est.log_epi.tolist(),
            "stderr_log": est.stderr.tolist(),
            "n_samples": est.n_samples,
        },
    )
    return [path]


def _cmd_scan(args, out: Path) -> list[Path]:
    prior = _load_prior(args)
    n_list = [int(v) for v in args.n_list.split(",")]
    results = paradox_scan(
        prior, args.t, args.epsilon, n_list, args.trials, args.samples, args.seed,
        jobs=args.jobs,
    )
    path = out / "scan.csv"
    rows = [
        (r.n, r.epsilon, r.delta_hat, r.ci_lo, r.ci_hi, r.trials, args.seed)
        for r in results
    ]
    write_csv_rows(path, ("n", "epsilon", "delta_hat", "ci_lo", "ci_hi", "trials", "seed"), rows)
    return [path]


def _cmd_prior_check(args, out: Path) -> list[Path]:
    prior = _load_prior(args)
    verdict = check_tempered(prior, args.t)
    path = out / "verdict.json"
    _write_json(path, {"prior": prior.to_dict(), "t": args.t, **verdict.summary()})
    return [path]


_DISTS = {"uniform01": UniformV, "const1": PointMassOneV, "quadratic": QuadraticV}


def _cmd_moments(args, out: Path) -> list[Path]:
    if args.dist in _DISTS:
        dist = _DISTS[args.dist]()
    elif args.dist.startswith("beta:"):
        dist = BetaTailV(float(args.dist.split(":", 1)[1]))
    elif args.dist == "zeta":
        prior = _load_prior(args)
        if args.z is None:
            raise ValueError("--z is required for --dist zeta")
        dist = ConditionalZetaV(prior, args.z)
    else:
        raise ValueError(
            f"unknown distribution {args.dist!r}; known: "
            f"{sorted(_DISTS)} plus 'beta:<alpha>' and 'zeta'"
        )
    grid = geometric_grid(args.t_lo, args.t_hi, args.per_decade)
    curve = moment_curve(dist, grid)
    scan = threshold_scan(dist, args.alpha, grid)
    curve_path = out / "moments.csv"
    write_csv_rows(curve_path, ("t", "m_t", "m_t_plus_1", "r_t", "two_t_r_t"), curve)
    thr_path = out / "threshold.json"
    _write_json(
        thr_path,
        {"alpha": args.alpha, "reached": scan.reached, "t_star": scan.t_star,
         "grid_lo": args.t_lo, "grid_hi": args.t_hi, "per_decade": args.per_decade},
    )
    return [curve_path, thr_path]


def _cmd_claims(args, out: Path) -> list[Path]:
    prior = _load_prior(args)
    counts = counts_in_band(args.n, args.t, args.c)
    r1 = {
        j: in_band_advantage(prior, args.t, counts, args.c, j, args.samples, args.seed)
        for j in (2, 3)
    }
    r2 = {
        j: conditional_ratio_scan(
            prior, args.t, counts, args.c, j, args.z_points, args.samples, args.seed
        )
        for j in (2, 3)
    }
    def claim1_dict(r):
        return {
            "j": r.j, "n_in": r.n_in, "n_out": r.n_out,
            "log_mean_in": r.log_mean_in, "log_mean_out": r.log_mean_out,
            "se_in": r.se_in, "se_out": r.se_out,
            "log_ratio": r.log_ratio, "se_ratio": r.se_ratio,
            "significant": r.significant,
            "envelope_low_log": r.envelope_low_log,
            "envelope_high_log": r.envelope_high_log,
            "samplewise_upper_ok": r.samplewise_upper_ok,
        }
    def claim2_dict(r):
        return {
            "j": r.j, "c": r.c, "z_grid": r.z_grid, "band_counts": r.band_counts,
            "log_ratio": r.log_ratio, "se_ratio": r.se_ratio,
            "min_log_gap": r.min_log_gap,
            "min_ratio_over_c2": _finite(r.min_ratio_over_c2),
            "min_ratio_over_3c2": _finite(r.min_ratio_over_3c2),
            "min_ratio_over_4c2": _finite(r.min_ratio_over_4c2),
            "significant": r.significant,
        }
    path = out / "claims.json"
    _write_json(
        path,
        {
            "prior": prior.to_dict(),
            "t": args.t, "c": args.c, "n": args.n,
            "counts": counts.array.tolist(),
            "band_advantage": {str(j): claim1_dict(r) for j, r in r1.items()},
            "conditional_dominance": {str(j): claim2_dict(r) for j, r in r2.items()},
        },
    )
    return [path]


_COMMANDS = {
    "simulate": _cmd_simulate,
    "posterior": _cmd_posterior,
    "scan": _cmd_scan,
    "prior-check": _cmd_prior_check,
    "moments": _cmd_moments,
    "claims": _cmd_claims,
}


def _cmd_replay(args, out: Path) -> list[Path]:
    manifest = RunManifest.read(args.manifest)
    if manifest.command not in _COMMANDS:
        raise ValueError(f"manifest names unknown command {manifest.command!r}")
    params = dict(manifest.params)
    params["seed"] = manifest.seed
    if args.jobs is not None:
        params["jobs"] = args.jobs
    replay_args = argparse.Namespace(**params)
    if manifest.prior is not None:
        # materialize the stored prior as a spec file for the rerun
        prior = prior_from_dict(manifest.prior)
        tmp_spec = out / "_replayed_spec.json"
        with open(tmp_spec, "w", encoding="utf-8") as fh:
            json.dump(prior.to_dict(), fh)
        replay_args.spec = None
        replay_args.spec_file = str(tmp_spec)
    outputs = _COMMANDS[manifest.command](replay_args, out)
    _emit_manifest(manifest.command, replay_args, out, outputs)
    return outputs


def _emit_manifest(command: str, args, out: Path, outputs: list[Path]) -> None:
    params = {
        k: v
        for k, v in vars(args).items()
        if k not in ("func", "out", "manifest", "command") and not k.startswith("_")
    }
    prior_dict = None
    try:
        if params.get("spec") or params.get("spec_file"):
            prior_dict = _load_prior(args).to_dict()
    except (ValueError, OSError):
        prior_dict = None
    seed = params.pop("seed", 0)
    params.pop("spec", None)
    params.pop("spec_file", None)
    manifest = RunManifest(
        command=command, params=params, seed=seed, version=__version__, prior=prior_dict
    )
    for path in outputs:
        manifest.add_output(path)
    manifest.finish()
    manifest.write(out / "manifest.json")


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="starparadox",
        description="Posteriors, tempered-prior checks and moment scans for "
        "the three-taxon star paradox.",
    )
    top.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = top.add_subparsers(dest="command", required=True)

    def common(p, prior=False, sampling=False):
        p.add_argument("--out", default=".", help="output directory (default: .)")
        p.add_argument("--seed", type=int, default=_default_seed(),
                       help=f"RNG seed (default: ${_ENV_SEED} or 0)")
        p.add_argument("--jobs", type=int, default=1, help="worker processes")
        if prior:
            p.add_argument("--spec", help="prior shorthand, e.g. uniform:1.0")
            p.add_argument("--spec-file", help="path to a prior spec JSON file")
        if sampling:
            p.add_argument("--samples", type=int, default=8192,
                           help="prior draws per estimate")

    p = sub.add_parser("simulate", help="simulate star-tree pattern counts")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, default=1)
    common(p)

    p = sub.add_parser("posterior", help="posterior over the three resolved trees")
    p.add_argument("--counts", required=True, help="n0,n1,n2,n3")
    p.add_argument("--weights", default="1,1,1", help="tree prior weights w1,w2,w3")
    common(p, prior=True, sampling=True)

    p = sub.add_parser("scan", help="paradox scan over sequence lengths")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--n-list", required=True, help="ascending lengths, e.g. 100,1000")
    p.add_argument("--trials", type=int, default=200)
    common(p, prior=True, sampling=True)

    p = sub.add_parser("prior-check", help="tempered-prior verdict")
    p.add_argument("--t", type=float, required=True)
    common(p, prior=True)

    p = sub.add_parser("moments", help="moment curve and 2tR_t threshold scan")
    p.add_argument("--dist", required=True,
                   help="uniform01 | const1 | quadratic | beta:<alpha> | zeta")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--t-lo", type=float, default=0.05)
    p.add_argument("--t-hi", type=float, default=1000.0)
    p.add_argument("--per-decade", type=int, default=64)
    p.add_argument("--z", type=float, help="conditioning point for --dist zeta")
    common(p, prior=True)

    p = sub.add_parser("claims", help="band-advantage / conditional-dominance checks")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--c", type=float, default=1.5)
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--z-points", type=int, default=8)
    common(p, prior=True, sampling=True)

    p = sub.add_parser("replay", help="rerun a command from its manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", default=".")
    p.add_argument("--jobs", type=int, default=None)

    return top


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "replay":
            _cmd_replay(args, out)
        else:
            outputs = _COMMANDS[args.command](args, out)
            _emit_manifest(args.command, args, out, outputs)
    except (ValueError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failures
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
